#include "mixkin/gamma.hpp"

#include <cmath>
#include <limits>

#include "mixkin/errors.hpp"

namespace mixkin {

namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxIter = 2000;
constexpr double kTiny = 1e-300;

void check_args(double x, double shape, double scale) {
    if (!(shape > 0.0) || !std::isfinite(shape))
        throw ValidationError("gamma shape must be positive");
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw ValidationError("gamma scale must be positive");
    if (!(x >= 0.0) || !std::isfinite(x)) throw ValidationError("gamma argument must be >= 0");
}

// log of Sum_{n>=0} x^n / ((a+1)(a+2)...(a+n)); terms are positive and the
// sum starts at 1, so the log never underflows.
double log_lower_series(double a, double x) {
    double sum = 1.0, term = 1.0, r = a;
    for (int n = 0; n < kMaxIter; ++n) {
        r += 1.0;
        term *= x / r;
        sum += term;
        if (term < sum * kEps) break;
    }
    return std::log(sum);
}

// Continued fraction for the upper tail: Q(a,x) = exp(a ln x - x - lgamma(a)) * cf.
// Modified Lentz, as in the usual igamc implementations.
double upper_cf(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxIter; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double lower_regularized_gamma(double shape, double x) {
    check_args(x, shape, 1.0);
    if (x == 0.0) return 0.0;
    if (x < shape + 1.0) {
        double lg = shape * std::log(x) - x - std::lgamma(shape + 1.0) +
                    log_lower_series(shape, x);
        return std::exp(lg);
    }
    double lq = shape * std::log(x) - x - std::lgamma(shape) + std::log(upper_cf(shape, x));
    return -std::expm1(lq);
}

double log_gamma_pdf(double x, double shape, double scale) {
    check_args(x, shape, scale);
    if (x == 0.0) {
        if (shape < 1.0) return std::numeric_limits<double>::infinity();
        if (shape == 1.0) return -std::log(scale);
        return -std::numeric_limits<double>::infinity();
    }
    double t = x / scale;
    return (shape - 1.0) * std::log(t) - t - std::lgamma(shape) - std::log(scale);
}

double log_gamma_cdf(double x, double shape, double scale) {
    check_args(x, shape, scale);
    if (x == 0.0) return -std::numeric_limits<double>::infinity();
    double t = x / scale;
    if (t < shape + 1.0) {
        return shape * std::log(t) - t - std::lgamma(shape + 1.0) + log_lower_series(shape, t);
    }
    double lq = shape * std::log(t) - t - std::lgamma(shape) + std::log(upper_cf(shape, t));
    // t >= shape+1 puts the upper tail below ~0.6, so log1p is safe
    return std::log1p(-std::exp(lq));
}

}  // namespace mixkin
