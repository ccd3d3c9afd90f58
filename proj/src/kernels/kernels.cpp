#include "mixkin/kernels.hpp"

#include <atomic>

#include "mixkin/errors.hpp"

namespace mixkin {

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend detect_backend() {
#if defined(__ARM_NEON) || defined(__aarch64__)
    return Backend::kNeon;
#else
    if (cpu_has_avx2()) return Backend::kAvx2;
    return Backend::kScalar;
#endif
}

const KernelTable* table_for(Backend b) {
    switch (b) {
        case Backend::kScalar:
            return &detail::kScalarKernels;
        case Backend::kAvx2:
#if defined(__x86_64__) || defined(_M_X64)
            return &detail::kAvx2Kernels;
#else
            return nullptr;
#endif
        case Backend::kNeon:
#if defined(__ARM_NEON) || defined(__aarch64__)
            return &detail::kNeonKernels;
#else
            return nullptr;
#endif
    }
    return nullptr;
}

struct State {
    std::atomic<const KernelTable*> table;
    std::atomic<Backend> backend;
    State() {
        Backend b = detect_backend();
        backend.store(b);
        table.store(table_for(b));
    }
};

State& state() {
    static State s;
    return s;
}

}  // namespace

double kernel_dot(const double* a, const double* b, std::size_t n) {
    return state().table.load(std::memory_order_relaxed)->dot(a, b, n);
}

double kernel_sum(const double* a, std::size_t n) {
    return state().table.load(std::memory_order_relaxed)->sum(a, n);
}

double kernel_max(const double* a, std::size_t n) {
    return state().table.load(std::memory_order_relaxed)->max(a, n);
}

void kernel_scale(double* a, std::size_t n, double c) {
    state().table.load(std::memory_order_relaxed)->scale(a, n, c);
}

void kernel_axpy(double* y, const double* x, std::size_t n, double c) {
    state().table.load(std::memory_order_relaxed)->axpy(y, x, n, c);
}

Backend active_backend() { return state().backend.load(std::memory_order_relaxed); }

std::string backend_name(Backend b) {
    switch (b) {
        case Backend::kScalar:
            return "scalar";
        case Backend::kAvx2:
            return "avx2";
        case Backend::kNeon:
            return "neon";
    }
    return "?";
}

bool backend_available(Backend b) {
    if (table_for(b) == nullptr) return false;
    if (b == Backend::kAvx2) return cpu_has_avx2();
    return true;
}

void set_backend(Backend b) {
    if (!backend_available(b))
        throw ValidationError("kernel backend not available: " + backend_name(b));
    state().backend.store(b);
    state().table.store(table_for(b));
}

}  // namespace mixkin
