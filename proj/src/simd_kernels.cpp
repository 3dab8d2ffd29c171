#include "qrf/simd_kernels.hpp"

namespace qrf::simd {

// ============================================================================
// Scalar reference kernels
// ============================================================================

namespace {

void caxpy_scalar(cplx* y, cplx a, const cplx* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        y[i] += a * x[i];
}

cplx cdotc_scalar(const cplx* a, const cplx* b, std::size_t n) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ar = a[i].real(), ai = a[i].imag();
        const double br = b[i].real(), bi = b[i].imag();
        re += ar * br + ai * bi;
        im += ar * bi - ai * br;
    }
    return {re, im};
}

void cscal_scalar(cplx* x, cplx a, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        x[i] *= a;
}

double sumabs2_scalar(const cplx* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        s += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
    return s;
}

void crot_scalar(cplx* x, cplx* y, double c, cplx s, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const cplx xi = x[i], yi = y[i];
        x[i] = c * xi + s * yi;
        y[i] = -std::conj(s) * xi + c * yi;
    }
}

void cgemm_acc_scalar(cplx* C, const cplx* A, const cplx* B,
                      std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        cplx* crow = C + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const cplx aip = A[i * k + p];
            if (aip == cplx(0.0, 0.0))
                continue;
            const cplx* brow = B + p * n;
            for (std::size_t j = 0; j < n; ++j)
                crow[j] += aip * brow[j];
        }
    }
}

constexpr Kernels kScalar = {
    "scalar",
    caxpy_scalar,
    cdotc_scalar,
    cscal_scalar,
    sumabs2_scalar,
    crot_scalar,
    cgemm_acc_scalar,
};

} // namespace

const Kernels& scalar() { return kScalar; }

#if QRFKIT_HAVE_AVX2_TU
namespace detail {
const Kernels* avx2_table();   // defined in simd_kernels_avx2.cpp
bool cpu_has_avx2_fma();
}
#endif

const Kernels* avx2_or_null() {
#if QRFKIT_HAVE_AVX2_TU
    if (detail::cpu_has_avx2_fma())
        return detail::avx2_table();
#endif
    return nullptr;
}

const Kernels& active() {
    static const Kernels* chosen = [] {
        if (const Kernels* t = avx2_or_null())
            return t;
        return &kScalar;
    }();
    return *chosen;
}

} // namespace qrf::simd
