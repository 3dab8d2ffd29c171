#ifndef QRFKIT_MATRIX_HPP
#define QRFKIT_MATRIX_HPP

#include <complex>
#include <cstddef>
#include <vector>

#include "qrf/rng.hpp"

namespace qrf {

using cplx = std::complex<double>;

// Thresholds used across the library. rank_tol is relative to the largest
// singular/eigenvalue of the object at hand, the other two are absolute.
struct Tolerance {
    double rank_tol = 1e-9;
    double degeneracy_tol = 1e-7;
    double equality_tol = 1e-9;
};

// Dense complex matrix, row-major. The single carrier for operators, states
// and isometries; immutable by convention once handed to an algorithm.
class ComplexMatrix {
public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, cplx(0.0, 0.0)) {}

    static ComplexMatrix identity(std::size_t n);
    static ComplexMatrix zero(std::size_t rows, std::size_t cols);
    static ComplexMatrix diag(const std::vector<cplx>& d);
    // entries ~ (N(0,1) + i N(0,1))/sqrt(2)
    static ComplexMatrix random(std::size_t rows, std::size_t cols, Rng& rng);
    static ComplexMatrix random_hermitian(std::size_t n, Rng& rng);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    cplx& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const cplx& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    cplx* data() { return data_.data(); }
    const cplx* data() const { return data_.data(); }

    ComplexMatrix dagger() const;
    ComplexMatrix transpose() const;
    ComplexMatrix conj() const;
    cplx trace() const;
    double frobenius_norm() const;
    double max_abs() const;
    bool is_finite() const;

    ComplexMatrix& operator+=(const ComplexMatrix& other);
    ComplexMatrix& operator-=(const ComplexMatrix& other);
    ComplexMatrix& operator*=(cplx scalar);

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<cplx> data_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator*(cplx s, ComplexMatrix a);
ComplexMatrix operator*(ComplexMatrix a, cplx s);

// tr(a^dagger b); the Hilbert-Schmidt inner product used everywhere.
cplx hs_inner(const ComplexMatrix& a, const ComplexMatrix& b);

// ||a - b|| in Frobenius norm
double distance(const ComplexMatrix& a, const ComplexMatrix& b);

double commutator_norm(const ComplexMatrix& a, const ComplexMatrix& b);

// Kronecker product; realizes tensor products of spaces and operators.
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

// Partial trace over the factors NOT listed in `keep`. `dims` are the factor
// dimensions in tensor order; kept factors stay in their original order.
// Throws std::invalid_argument on dimension mismatch.
ComplexMatrix partial_trace(const ComplexMatrix& m,
                            const std::vector<std::size_t>& dims,
                            const std::vector<std::size_t>& keep);

} // namespace qrf

#endif
