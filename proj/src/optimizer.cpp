#include "mixkin/optimizer.hpp"

#include <cmath>
#include <limits>

#include "mixkin/errors.hpp"

namespace mixkin {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double eval(const Objective& f, const std::vector<double>& x) {
    double v = f(x);
    return std::isnan(v) ? kInf : v;
}

double inf_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

std::vector<double> numeric_gradient(const Objective& f, const std::vector<double>& x,
                                     double step) {
    std::vector<double> g(x.size(), 0.0), p(x);
    for (std::size_t i = 0; i < x.size(); ++i) {
        p[i] = x[i] + step;
        double fp = eval(f, p);
        p[i] = x[i] - step;
        double fm = eval(f, p);
        p[i] = x[i];
        g[i] = (fp - fm) / (2.0 * step);
    }
    return g;
}

std::vector<std::vector<double>> numeric_hessian(const Objective& f,
                                                 const std::vector<double>& x, double step) {
    const std::size_t n = x.size();
    std::vector<std::vector<double>> h(n, std::vector<double>(n, 0.0));
    std::vector<double> p(x);
    double f0 = eval(f, x);
    for (std::size_t i = 0; i < n; ++i) {
        p[i] = x[i] + step;
        double fp = eval(f, p);
        p[i] = x[i] - step;
        double fm = eval(f, p);
        p[i] = x[i];
        h[i][i] = (fp - 2.0 * f0 + fm) / (step * step);
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            p[i] = x[i] + step;
            p[j] = x[j] + step;
            double fpp = eval(f, p);
            p[j] = x[j] - step;
            double fpm = eval(f, p);
            p[i] = x[i] - step;
            double fmm = eval(f, p);
            p[j] = x[j] + step;
            double fmp = eval(f, p);
            p[i] = x[i];
            p[j] = x[j];
            h[i][j] = h[j][i] = (fpp - fpm - fmp + fmm) / (4.0 * step * step);
        }
    return h;
}

OptimResult minimize_bfgs(const Objective& f, std::vector<double> x0,
                          const OptimizerOptions& opt) {
    const std::size_t n = x0.size();
    OptimResult res;
    res.x = std::move(x0);
    res.f = eval(f, res.x);
    if (!std::isfinite(res.f)) {
        res.grad_norm = kInf;
        return res;
    }
    if (n == 0) {
        res.converged = true;
        return res;
    }

    std::vector<std::vector<double>> H(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) H[i][i] = 1.0;
    std::vector<double> g = numeric_gradient(f, res.x, opt.fd_step);
    std::vector<double> d(n), xn(n), gn(n), s(n), y(n), hy(n);

    for (res.iterations = 0; res.iterations < opt.max_iter; ++res.iterations) {
        res.grad_norm = inf_norm(g);
        if (res.grad_norm <= opt.grad_tol * std::max(1.0, std::fabs(res.f))) {
            res.converged = true;
            return res;
        }

        for (std::size_t i = 0; i < n; ++i) {
            double v = 0.0;
            for (std::size_t j = 0; j < n; ++j) v -= H[i][j] * g[j];
            d[i] = v;
        }
        double slope = dot(d, g);
        if (!(slope < 0.0)) {
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) H[i][j] = 0.0;
                H[i][i] = 1.0;
                d[i] = -g[i];
            }
            slope = dot(d, g);
            if (!(slope < 0.0)) {
                res.converged = res.grad_norm == 0.0;
                return res;
            }
        }

        double alpha = 1.0;
        double fn = kInf;
        bool stepped = false;
        while (alpha >= 1e-16) {
            for (std::size_t i = 0; i < n; ++i) xn[i] = res.x[i] + alpha * d[i];
            fn = eval(f, xn);
            if (fn <= res.f + 1e-4 * alpha * slope) {
                stepped = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!stepped) return res;

        gn = numeric_gradient(f, xn, opt.fd_step);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = xn[i] - res.x[i];
            y[i] = gn[i] - g[i];
        }
        double sy = dot(s, y);
        if (sy > 1e-12 * inf_norm(s) * std::max(inf_norm(y), 1e-300)) {
            double rho = 1.0 / sy;
            for (std::size_t i = 0; i < n; ++i) {
                double v = 0.0;
                for (std::size_t j = 0; j < n; ++j) v += H[i][j] * y[j];
                hy[i] = v;
            }
            double yhy = dot(y, hy);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    H[i][j] += (1.0 + rho * yhy) * rho * s[i] * s[j] -
                               rho * (s[i] * hy[j] + hy[i] * s[j]);
        }
        res.x = xn;
        res.f = fn;
        g = gn;
    }
    res.grad_norm = inf_norm(g);
    res.converged = res.grad_norm <= opt.grad_tol * std::max(1.0, std::fabs(res.f));
    return res;
}

bool spd_inverse(std::vector<std::vector<double>>& a) {
    const std::size_t n = a.size();
    for (const auto& row : a)
        if (row.size() != n) throw InternalError("spd_inverse requires a square matrix");
    std::vector<std::vector<double>> L(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a[i][j];
            for (std::size_t k = 0; k < j; ++k) s -= L[i][k] * L[j][k];
            if (i == j) {
                if (!(s > 0.0) || !std::isfinite(s)) return false;
                L[i][i] = std::sqrt(s);
            } else {
                L[i][j] = s / L[j][j];
            }
        }
    }
    // columns of L^{-1} by forward substitution
    std::vector<std::vector<double>> Linv(n, std::vector<double>(n, 0.0));
    for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t i = c; i < n; ++i) {
            double s = i == c ? 1.0 : 0.0;
            for (std::size_t k = c; k < i; ++k) s -= L[i][k] * Linv[k][c];
            Linv[i][c] = s / L[i][i];
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = std::max(i, j); k < n; ++k) s += Linv[k][i] * Linv[k][j];
            a[i][j] = s;
        }
    return true;
}

}  // namespace mixkin
