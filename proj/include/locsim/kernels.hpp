#pragma once

#include <complex>
#include <cstddef>
#include <string_view>

namespace locsim::kern {

using cd = std::complex<double>;

/// Data-parallel inner-loop primitives. Scalar reference implementations
/// and AVX2 variants are equivalence-tested against each other; the active
/// set is chosen once at startup from CPUID and can be overridden with the
/// LOCSIM_SIMD environment variable ("scalar" or "avx2").
struct Kernels {
    double (*dot_d)(const double *a, const double *b, std::size_t n);
    double (*sumsq_d)(const double *x, std::size_t n);
    // Sum over conj(a[i]) * b[i].
    cd (*dot_cd)(const cd *a, const cd *b, std::size_t n);
    double (*sumsq_cd)(const cd *x, std::size_t n);
    // y[i] += a * x[i]
    void (*axpy_cd)(cd a, const cd *x, cd *y, std::size_t n);
    // y[i] = w[i] * x[i] with real w
    void (*cmul_d)(const double *w, const cd *x, cd *y, std::size_t n);
};

enum class Lane { scalar, avx2 };

/// Kernel set for an explicit lane (throws InvalidInput if unsupported).
const Kernels &kernels(Lane lane);

/// Active kernel set (runtime-dispatched).
const Kernels &kernels();

Lane active_lane();
std::string_view lane_name(Lane lane);
bool cpu_has_avx2();

/// Force a lane (used by tests and the CLI's --simd flag).
void force_lane(Lane lane);

extern const Kernels scalar_kernels;
#if defined(__x86_64__)
extern const Kernels avx2_kernels;
#endif

} // namespace locsim::kern
