#include "locsim/kernels.hpp"

namespace locsim::kern {

namespace {

double dot_d_scalar(const double *a, const double *b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        acc += a[i] * b[i];
    return acc;
}

double sumsq_d_scalar(const double *x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        acc += x[i] * x[i];
    return acc;
}

cd dot_cd_scalar(const cd *a, const cd *b, std::size_t n) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ar = a[i].real(), ai = a[i].imag();
        const double br = b[i].real(), bi = b[i].imag();
        re += ar * br + ai * bi;
        im += ar * bi - ai * br;
    }
    return {re, im};
}

double sumsq_cd_scalar(const cd *x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        acc += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
    return acc;
}

void axpy_cd_scalar(cd a, const cd *x, cd *y, std::size_t n) {
    const double ar = a.real(), ai = a.imag();
    for (std::size_t i = 0; i < n; ++i) {
        const double xr = x[i].real(), xi = x[i].imag();
        y[i] += cd{ar * xr - ai * xi, ar * xi + ai * xr};
    }
}

void cmul_d_scalar(const double *w, const cd *x, cd *y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        y[i] = cd{w[i] * x[i].real(), w[i] * x[i].imag()};
}

} // namespace

const Kernels scalar_kernels = {
    dot_d_scalar, sumsq_d_scalar,  dot_cd_scalar,
    sumsq_cd_scalar, axpy_cd_scalar, cmul_d_scalar,
};

} // namespace locsim::kern
