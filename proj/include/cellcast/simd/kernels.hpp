#pragma once

// Data-parallel inner loops shared by the statistics and network code.
//
// Every kernel has a scalar reference implementation and, where the target
// supports it, an AVX2+FMA (x86-64) or NEON (aarch64) variant. The variant
// is chosen once per process from the CPU's capabilities; the environment
// variable CELLCAST_SIMD=scalar|avx2|neon overrides the choice. Vector
// variants reassociate sums, so they agree with the scalar reference to
// rounding, not bit for bit. Within one process the selection never changes,
// which keeps every run reproducible.

#include <cassert>
#include <cstddef>
#include <span>
#include <string_view>

namespace cellcast::simd {

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa);

struct Moments {
    double sxx = 0.0;  // sum (x - mx)^2
    double syy = 0.0;  // sum (y - my)^2
    double sxy = 0.0;  // sum (x - mx)(y - my)
};

struct KernelTable {
    Isa isa;
    double (*dot)(const double* a, const double* b, std::size_t n);
    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    double (*sum)(const double* x, std::size_t n);
    Moments (*centered_moments)(const double* x, const double* y, double mx, double my, std::size_t n);
    double (*abs_diff_sum)(const double* a, const double* b, std::size_t n);
};

const KernelTable& scalar_kernels();

/// Table for `isa`, or nullptr when it is not compiled in or the CPU lacks it.
const KernelTable* kernels_for(Isa isa);

/// Process-wide selection (see header comment).
const KernelTable& active();

inline double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    assert(x.size() == y.size());
    active().axpy(alpha, x.data(), y.data(), x.size());
}

inline double sum(std::span<const double> x) { return active().sum(x.data(), x.size()); }

inline Moments centered_moments(std::span<const double> x, std::span<const double> y, double mx, double my) {
    assert(x.size() == y.size());
    return active().centered_moments(x.data(), y.data(), mx, my, x.size());
}

inline double abs_diff_sum(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    return active().abs_diff_sum(a.data(), b.data(), a.size());
}

}  // namespace cellcast::simd
