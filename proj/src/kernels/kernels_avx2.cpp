// AVX2/FMA variants of the inner-loop kernels. This translation unit is the
// only one compiled with -mavx2 -mfma; callers go through the dispatch table.

#if defined(__x86_64__)

#include "locsim/kernels.hpp"

#include <immintrin.h>

namespace locsim::kern {

namespace {

double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

double dot_d_avx2(const double *a, const double *b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i),
                              acc);
    double r = hsum(acc);
    for (; i < n; ++i)
        r += a[i] * b[i];
    return r;
}

double sumsq_d_avx2(const double *x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(x + i);
        acc = _mm256_fmadd_pd(v, v, acc);
    }
    double r = hsum(acc);
    for (; i < n; ++i)
        r += x[i] * x[i];
    return r;
}

cd dot_cd_avx2(const cd *a, const cd *b, std::size_t n) {
    const double *ap = reinterpret_cast<const double *>(a);
    const double *bp = reinterpret_cast<const double *>(b);
    __m256d acc_re = _mm256_setzero_pd(); // slots hold ar*br, ai*bi pairs
    __m256d acc_im = _mm256_setzero_pd(); // slots hold ai*br, ar*bi pairs
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d va = _mm256_loadu_pd(ap + 2 * i);
        const __m256d vb = _mm256_loadu_pd(bp + 2 * i);
        acc_re = _mm256_fmadd_pd(va, vb, acc_re);
        acc_im = _mm256_fmadd_pd(_mm256_permute_pd(va, 0x5), vb, acc_im);
    }
    // im contribution per pair is ar*bi - ai*br: negate even slots.
    const __m256d sign = _mm256_set_pd(1.0, -1.0, 1.0, -1.0);
    double re = hsum(acc_re);
    double im = hsum(_mm256_mul_pd(acc_im, sign));
    for (; i < n; ++i) {
        const double ar = a[i].real(), ai = a[i].imag();
        const double br = b[i].real(), bi = b[i].imag();
        re += ar * br + ai * bi;
        im += ar * bi - ai * br;
    }
    return {re, im};
}

double sumsq_cd_avx2(const cd *x, std::size_t n) {
    return sumsq_d_avx2(reinterpret_cast<const double *>(x), 2 * n);
}

void axpy_cd_avx2(cd a, const cd *x, cd *y, std::size_t n) {
    const double ar = a.real(), ai = a.imag();
    const __m256d var = _mm256_set1_pd(ar);
    const __m256d vai = _mm256_set_pd(ai, -ai, ai, -ai);
    const double *xp = reinterpret_cast<const double *>(x);
    double *yp = reinterpret_cast<double *>(y);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d vx = _mm256_loadu_pd(xp + 2 * i);
        __m256d vy = _mm256_loadu_pd(yp + 2 * i);
        vy = _mm256_fmadd_pd(var, vx, vy);
        vy = _mm256_fmadd_pd(vai, _mm256_permute_pd(vx, 0x5), vy);
        _mm256_storeu_pd(yp + 2 * i, vy);
    }
    for (; i < n; ++i) {
        const double xr = x[i].real(), xi = x[i].imag();
        y[i] += cd{ar * xr - ai * xi, ar * xi + ai * xr};
    }
}

void cmul_d_avx2(const double *w, const cd *x, cd *y, std::size_t n) {
    const double *xp = reinterpret_cast<const double *>(x);
    double *yp = reinterpret_cast<double *>(y);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d vw = _mm256_setr_pd(w[i], w[i], w[i + 1], w[i + 1]);
        _mm256_storeu_pd(yp + 2 * i,
                         _mm256_mul_pd(vw, _mm256_loadu_pd(xp + 2 * i)));
    }
    for (; i < n; ++i)
        y[i] = cd{w[i] * x[i].real(), w[i] * x[i].imag()};
}

} // namespace

const Kernels avx2_kernels = {
    dot_d_avx2, sumsq_d_avx2,  dot_cd_avx2,
    sumsq_cd_avx2, axpy_cd_avx2, cmul_d_avx2,
};

} // namespace locsim::kern

#endif // __x86_64__
