// AVX2/FMA variants of the complex kernels. This TU is the only one compiled
// with -mavx2 -mfma; callers go through the runtime dispatch in active().

#include "qrf/simd_kernels.hpp"

#include <immintrin.h>

namespace qrf::simd {
namespace detail {

bool cpu_has_avx2_fma() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

namespace {

// A __m256d holds two interleaved complex doubles: [re0, im0, re1, im1].

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    __m128d s = _mm_add_pd(lo, hi);
    __m128d t = _mm_unpackhi_pd(s, s);
    return _mm_cvtsd_f64(_mm_add_sd(s, t));
}

// packed * broadcast complex w: even lanes re, odd lanes im
inline __m256d cmul_bcast(__m256d a, __m256d wre, __m256d wim) {
    __m256d aswap = _mm256_permute_pd(a, 0x5);               // [im0, re0, im1, re1]
    return _mm256_fmaddsub_pd(a, wre, _mm256_mul_pd(aswap, wim));
}

void caxpy_avx2(cplx* y, cplx a, const cplx* x, std::size_t n) {
    const std::size_t n2 = n & ~std::size_t(1);
    const __m256d wre = _mm256_set1_pd(a.real());
    const __m256d wim = _mm256_set1_pd(a.imag());
    double* yd = reinterpret_cast<double*>(y);
    const double* xd = reinterpret_cast<const double*>(x);
    for (std::size_t i = 0; i < n2; i += 2) {
        __m256d xv = _mm256_loadu_pd(xd + 2 * i);
        __m256d yv = _mm256_loadu_pd(yd + 2 * i);
        _mm256_storeu_pd(yd + 2 * i, _mm256_add_pd(yv, cmul_bcast(xv, wre, wim)));
    }
    for (std::size_t i = n2; i < n; ++i)
        y[i] += a * x[i];
}

cplx cdotc_avx2(const cplx* a, const cplx* b, std::size_t n) {
    const std::size_t n2 = n & ~std::size_t(1);
    __m256d acc_re = _mm256_setzero_pd();
    __m256d acc_im = _mm256_setzero_pd();
    // sign mask flips even lanes: gives [-ai*br, +ar*bi] per pair
    const __m256d sgn = _mm256_set_pd(0.0, -0.0, 0.0, -0.0);
    const double* ad = reinterpret_cast<const double*>(a);
    const double* bd = reinterpret_cast<const double*>(b);
    for (std::size_t i = 0; i < n2; i += 2) {
        __m256d av = _mm256_loadu_pd(ad + 2 * i);
        __m256d bv = _mm256_loadu_pd(bd + 2 * i);
        acc_re = _mm256_fmadd_pd(av, bv, acc_re);            // [ar*br, ai*bi, ...]
        __m256d aswap = _mm256_permute_pd(av, 0x5);          // [ai, ar, ...]
        __m256d t = _mm256_mul_pd(aswap, bv);                // [ai*br, ar*bi, ...]
        acc_im = _mm256_add_pd(acc_im, _mm256_xor_pd(t, sgn));
    }
    double re = hsum(acc_re), im = hsum(acc_im);
    for (std::size_t i = n2; i < n; ++i) {
        const double ar = a[i].real(), ai = a[i].imag();
        const double br = b[i].real(), bi = b[i].imag();
        re += ar * br + ai * bi;
        im += ar * bi - ai * br;
    }
    return {re, im};
}

void cscal_avx2(cplx* x, cplx a, std::size_t n) {
    const std::size_t n2 = n & ~std::size_t(1);
    const __m256d wre = _mm256_set1_pd(a.real());
    const __m256d wim = _mm256_set1_pd(a.imag());
    double* xd = reinterpret_cast<double*>(x);
    for (std::size_t i = 0; i < n2; i += 2) {
        __m256d xv = _mm256_loadu_pd(xd + 2 * i);
        _mm256_storeu_pd(xd + 2 * i, cmul_bcast(xv, wre, wim));
    }
    for (std::size_t i = n2; i < n; ++i)
        x[i] *= a;
}

double sumabs2_avx2(const cplx* x, std::size_t n) {
    const std::size_t n2 = n & ~std::size_t(1);
    __m256d acc = _mm256_setzero_pd();
    const double* xd = reinterpret_cast<const double*>(x);
    for (std::size_t i = 0; i < n2; i += 2) {
        __m256d xv = _mm256_loadu_pd(xd + 2 * i);
        acc = _mm256_fmadd_pd(xv, xv, acc);
    }
    double s = hsum(acc);
    for (std::size_t i = n2; i < n; ++i)
        s += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
    return s;
}

void crot_avx2(cplx* x, cplx* y, double c, cplx s, std::size_t n) {
    const std::size_t n2 = n & ~std::size_t(1);
    const __m256d cv = _mm256_set1_pd(c);
    const __m256d sre = _mm256_set1_pd(s.real());
    const __m256d sim = _mm256_set1_pd(s.imag());
    const __m256d csre = _mm256_set1_pd(s.real());     // conj(s): re
    const __m256d csim = _mm256_set1_pd(-s.imag());    // conj(s): im
    double* xd = reinterpret_cast<double*>(x);
    double* yd = reinterpret_cast<double*>(y);
    for (std::size_t i = 0; i < n2; i += 2) {
        __m256d xv = _mm256_loadu_pd(xd + 2 * i);
        __m256d yv = _mm256_loadu_pd(yd + 2 * i);
        __m256d sy = cmul_bcast(yv, sre, sim);
        __m256d csx = cmul_bcast(xv, csre, csim);
        _mm256_storeu_pd(xd + 2 * i, _mm256_fmadd_pd(xv, cv, sy));
        _mm256_storeu_pd(yd + 2 * i, _mm256_fmsub_pd(yv, cv, csx));
    }
    for (std::size_t i = n2; i < n; ++i) {
        const cplx xi = x[i], yi = y[i];
        x[i] = c * xi + s * yi;
        y[i] = -std::conj(s) * xi + c * yi;
    }
}

void cgemm_acc_avx2(cplx* C, const cplx* A, const cplx* B,
                    std::size_t m, std::size_t k, std::size_t n) {
    const std::size_t n2 = n & ~std::size_t(1);
    for (std::size_t i = 0; i < m; ++i) {
        cplx* crow = C + i * n;
        double* cd = reinterpret_cast<double*>(crow);
        for (std::size_t p = 0; p < k; ++p) {
            const cplx aip = A[i * k + p];
            if (aip == cplx(0.0, 0.0))
                continue;
            const cplx* brow = B + p * n;
            const double* bd = reinterpret_cast<const double*>(brow);
            const __m256d wre = _mm256_set1_pd(aip.real());
            const __m256d wim = _mm256_set1_pd(aip.imag());
            for (std::size_t j = 0; j < n2; j += 2) {
                __m256d bv = _mm256_loadu_pd(bd + 2 * j);
                __m256d cv = _mm256_loadu_pd(cd + 2 * j);
                _mm256_storeu_pd(cd + 2 * j, _mm256_add_pd(cv, cmul_bcast(bv, wre, wim)));
            }
            for (std::size_t j = n2; j < n; ++j)
                crow[j] += aip * brow[j];
        }
    }
}

constexpr Kernels kAvx2 = {
    "avx2",
    caxpy_avx2,
    cdotc_avx2,
    cscal_avx2,
    sumabs2_avx2,
    crot_avx2,
    cgemm_acc_avx2,
};

} // namespace

const Kernels* avx2_table() { return &kAvx2; }

} // namespace detail
} // namespace qrf::simd
