#pragma once

#include <cstddef>
#include <string>

namespace mixkin {

// Dense double-array primitives behind the likelihood recursions. A scalar
// reference implementation always exists; on x86 an AVX2/FMA variant is
// selected at startup when the CPU supports it, on ARM a NEON variant.
enum class Backend { kScalar, kAvx2, kNeon };

struct KernelTable {
    double (*dot)(const double*, const double*, std::size_t);
    double (*sum)(const double*, std::size_t);
    double (*max)(const double*, std::size_t);
    void (*scale)(double*, std::size_t, double);
    void (*axpy)(double*, const double*, std::size_t, double);  // y += c * x
};

double kernel_dot(const double* a, const double* b, std::size_t n);
double kernel_sum(const double* a, std::size_t n);
double kernel_max(const double* a, std::size_t n);
void kernel_scale(double* a, std::size_t n, double c);
void kernel_axpy(double* y, const double* x, std::size_t n, double c);

Backend active_backend();
std::string backend_name(Backend b);
bool backend_available(Backend b);
// Forces a backend (tests compare scalar against vector variants). Throws
// ValidationError if this build/CPU lacks it.
void set_backend(Backend b);

namespace detail {
extern const KernelTable kScalarKernels;
#if defined(__x86_64__) || defined(_M_X64)
extern const KernelTable kAvx2Kernels;
#endif
#if defined(__ARM_NEON) || defined(__aarch64__)
extern const KernelTable kNeonKernels;
#endif
}  // namespace detail

}  // namespace mixkin
