#if defined(__ARM_NEON) || defined(__aarch64__)

#include <arm_neon.h>

#include <cstddef>
#include <limits>

#include "mixkin/kernels.hpp"

namespace mixkin {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) acc = vfmaq_f64(acc, vld1q_f64(a + i), vld1q_f64(b + i));
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sum_neon(const double* a, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(a + i));
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) s += a[i];
    return s;
}

double max_neon(const double* a, std::size_t n) {
    double m = -std::numeric_limits<double>::infinity();
    std::size_t i = 0;
    if (n >= 2) {
        float64x2_t vm = vdupq_n_f64(m);
        for (; i + 2 <= n; i += 2) vm = vmaxq_f64(vm, vld1q_f64(a + i));
        double h = vmaxvq_f64(vm);
        if (h > m) m = h;
    }
    for (; i < n; ++i)
        if (a[i] > m) m = a[i];
    return m;
}

void scale_neon(double* a, std::size_t n, double c) {
    float64x2_t vc = vdupq_n_f64(c);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(a + i, vmulq_f64(vld1q_f64(a + i), vc));
    for (; i < n; ++i) a[i] *= c;
}

void axpy_neon(double* y, const double* x, std::size_t n, double c) {
    float64x2_t vc = vdupq_n_f64(c);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), vc, vld1q_f64(x + i)));
    for (; i < n; ++i) y[i] += c * x[i];
}

}  // namespace

namespace detail {
const KernelTable kNeonKernels = {dot_neon, sum_neon, max_neon, scale_neon, axpy_neon};
}  // namespace detail
}  // namespace mixkin

#endif
