#ifndef QRFKIT_SIMD_KERNELS_HPP
#define QRFKIT_SIMD_KERNELS_HPP

#include <complex>
#include <cstddef>

namespace qrf::simd {

using cplx = std::complex<double>;

// Hot complex-arithmetic inner loops used by the dense linear algebra layer.
// Each entry has a scalar reference implementation and (on x86 with AVX2+FMA)
// a vectorized variant; the active table is chosen once at startup from CPUID.
struct Kernels {
    const char* name;

    // y[i] += a * x[i]
    void (*caxpy)(cplx* y, cplx a, const cplx* x, std::size_t n);

    // sum_i conj(a[i]) * b[i]   (Hilbert-Schmidt inner product on flat data)
    cplx (*cdotc)(const cplx* a, const cplx* b, std::size_t n);

    // x[i] *= a
    void (*cscal)(cplx* x, cplx a, std::size_t n);

    // sum_i |x[i]|^2
    double (*sumabs2)(const cplx* x, std::size_t n);

    // Plane rotation on two vectors (Jacobi updates):
    //   x[i] <- c*x[i] + s*y[i]
    //   y[i] <- -conj(s)*x_old[i] + c*y[i]
    void (*crot)(cplx* x, cplx* y, double c, cplx s, std::size_t n);

    // C (m x n) += A (m x k) * B (k x n), all row-major, contiguous
    void (*cgemm_acc)(cplx* C, const cplx* A, const cplx* B,
                      std::size_t m, std::size_t k, std::size_t n);
};

// Runtime-selected table (AVX2 when available, scalar otherwise).
const Kernels& active();

// Scalar reference table, always available; the oracle for equivalence tests.
const Kernels& scalar();

// AVX2 table or nullptr when unsupported (by the build or by the CPU).
const Kernels* avx2_or_null();

} // namespace qrf::simd

#endif
