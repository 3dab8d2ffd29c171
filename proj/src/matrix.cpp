#include "qrf/matrix.hpp"

#include <cmath>
#include <stdexcept>

#include "qrf/simd_kernels.hpp"

namespace qrf {

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        m(i, i) = 1.0;
    return m;
}

ComplexMatrix ComplexMatrix::zero(std::size_t rows, std::size_t cols) {
    return ComplexMatrix(rows, cols);
}

ComplexMatrix ComplexMatrix::diag(const std::vector<cplx>& d) {
    ComplexMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        m(i, i) = d[i];
    return m;
}

ComplexMatrix ComplexMatrix::random(std::size_t rows, std::size_t cols, Rng& rng) {
    ComplexMatrix m(rows, cols);
    const double inv_sqrt2 = 0.7071067811865475244;
    for (auto i = std::size_t{0}; i < m.size(); ++i)
        m.data()[i] = rng.gaussian_complex() * inv_sqrt2;
    return m;
}

ComplexMatrix ComplexMatrix::random_hermitian(std::size_t n, Rng& rng) {
    ComplexMatrix g = random(n, n, rng);
    ComplexMatrix h = g.dagger();
    h += g;
    h *= cplx(0.5, 0.0);
    return h;
}

ComplexMatrix ComplexMatrix::dagger() const {
    ComplexMatrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j)
            out(j, i) = std::conj((*this)(i, j));
    return out;
}

ComplexMatrix ComplexMatrix::transpose() const {
    ComplexMatrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j)
            out(j, i) = (*this)(i, j);
    return out;
}

ComplexMatrix ComplexMatrix::conj() const {
    ComplexMatrix out(rows_, cols_);
    for (std::size_t i = 0; i < data_.size(); ++i)
        out.data()[i] = std::conj(data_[i]);
    return out;
}

cplx ComplexMatrix::trace() const {
    cplx t = 0.0;
    const std::size_t n = rows_ < cols_ ? rows_ : cols_;
    for (std::size_t i = 0; i < n; ++i)
        t += (*this)(i, i);
    return t;
}

double ComplexMatrix::frobenius_norm() const {
    return std::sqrt(simd::active().sumabs2(data_.data(), data_.size()));
}

double ComplexMatrix::max_abs() const {
    double m = 0.0;
    for (const cplx& v : data_)
        m = std::max(m, std::abs(v));
    return m;
}

bool ComplexMatrix::is_finite() const {
    for (const cplx& v : data_)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            return false;
    return true;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& other) {
    if (rows_ != other.rows_ || cols_ != other.cols_)
        throw std::invalid_argument("matrix add: shape mismatch");
    simd::active().caxpy(data_.data(), cplx(1.0, 0.0), other.data(), data_.size());
    return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& other) {
    if (rows_ != other.rows_ || cols_ != other.cols_)
        throw std::invalid_argument("matrix sub: shape mismatch");
    simd::active().caxpy(data_.data(), cplx(-1.0, 0.0), other.data(), data_.size());
    return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(cplx scalar) {
    simd::active().cscal(data_.data(), scalar, data_.size());
    return *this;
}

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols() != b.rows())
        throw std::invalid_argument("matrix mul: inner dimension mismatch");
    ComplexMatrix c(a.rows(), b.cols());
    simd::active().cgemm_acc(c.data(), a.data(), b.data(), a.rows(), a.cols(), b.cols());
    return c;
}

ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }
ComplexMatrix operator*(ComplexMatrix a, cplx s) { return a *= s; }

cplx hs_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("hs_inner: shape mismatch");
    return simd::active().cdotc(a.data(), b.data(), a.size());
}

double distance(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix d = a;
    d -= b;
    return d.frobenius_norm();
}

double commutator_norm(const ComplexMatrix& a, const ComplexMatrix& b) {
    return distance(a * b, b * a);
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t ia = 0; ia < a.rows(); ++ia)
        for (std::size_t ja = 0; ja < a.cols(); ++ja) {
            const cplx w = a(ia, ja);
            if (w == cplx(0.0, 0.0))
                continue;
            for (std::size_t ib = 0; ib < b.rows(); ++ib)
                for (std::size_t jb = 0; jb < b.cols(); ++jb)
                    out(ia * b.rows() + ib, ja * b.cols() + jb) = w * b(ib, jb);
        }
    return out;
}

ComplexMatrix partial_trace(const ComplexMatrix& m,
                            const std::vector<std::size_t>& dims,
                            const std::vector<std::size_t>& keep) {
    if (m.rows() != m.cols())
        throw std::invalid_argument("partial_trace: matrix not square");
    std::size_t total = 1;
    for (std::size_t d : dims)
        total *= d;
    if (total != m.rows())
        throw std::invalid_argument("partial_trace: dims product != matrix dimension");
    for (std::size_t k : keep)
        if (k >= dims.size())
            throw std::invalid_argument("partial_trace: keep index out of range");

    std::vector<bool> kept(dims.size(), false);
    for (std::size_t k : keep)
        kept[k] = true;

    std::size_t dim_keep = 1, dim_out = 1;
    for (std::size_t f = 0; f < dims.size(); ++f)
        (kept[f] ? dim_keep : dim_out) *= dims[f];

    // strides of each factor in the full index
    std::vector<std::size_t> stride(dims.size(), 1);
    for (std::size_t f = dims.size(); f-- > 1;)
        stride[f - 1] = stride[f] * dims[f];

    // enumerate kept / traced factor lists in tensor order
    std::vector<std::size_t> keep_f, out_f;
    for (std::size_t f = 0; f < dims.size(); ++f)
        (kept[f] ? keep_f : out_f).push_back(f);

    ComplexMatrix res(dim_keep, dim_keep);
    // multi-index walkers
    std::vector<std::size_t> ki(keep_f.size(), 0), kj(keep_f.size(), 0), ti(out_f.size(), 0);
    auto offset = [&](const std::vector<std::size_t>& fs, const std::vector<std::size_t>& idx) {
        std::size_t off = 0;
        for (std::size_t a = 0; a < fs.size(); ++a)
            off += idx[a] * stride[fs[a]];
        return off;
    };
    auto advance = [&](std::vector<std::size_t>& idx, const std::vector<std::size_t>& fs) {
        for (std::size_t a = fs.size(); a-- > 0;) {
            if (++idx[a] < dims[fs[a]])
                return true;
            idx[a] = 0;
        }
        return false;
    };

    std::size_t ri = 0;
    do {
        const std::size_t off_i = offset(keep_f, ki);
        std::size_t rj = 0;
        std::fill(kj.begin(), kj.end(), 0);
        do {
            const std::size_t off_j = offset(keep_f, kj);
            cplx sum = 0.0;
            std::fill(ti.begin(), ti.end(), 0);
            do {
                const std::size_t off_t = offset(out_f, ti);
                sum += m(off_i + off_t, off_j + off_t);
            } while (advance(ti, out_f));
            res(ri, rj) = sum;
            ++rj;
        } while (advance(kj, keep_f));
        ++ri;
    } while (advance(ki, keep_f));

    return res;
}

} // namespace qrf
