#include <cstddef>
#include <limits>

#include "mixkin/kernels.hpp"

namespace mixkin {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sum_scalar(const double* a, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i];
    return s;
}

double max_scalar(const double* a, std::size_t n) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        if (a[i] > m) m = a[i];
    return m;
}

void scale_scalar(double* a, std::size_t n, double c) {
    for (std::size_t i = 0; i < n; ++i) a[i] *= c;
}

void axpy_scalar(double* y, const double* x, std::size_t n, double c) {
    for (std::size_t i = 0; i < n; ++i) y[i] += c * x[i];
}

}  // namespace

namespace detail {
const KernelTable kScalarKernels = {dot_scalar, sum_scalar, max_scalar, scale_scalar,
                                    axpy_scalar};
}  // namespace detail
}  // namespace mixkin
