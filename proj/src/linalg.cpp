#include "qrf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "qrf/simd_kernels.hpp"

namespace qrf {

// Relative floor under which a Gram eigenvalue is numerically zero.
static constexpr double kGramNoiseRel = 1e-12;

namespace {

// One Jacobi similarity rotation on the (p,q) plane of Hermitian a, with the
// same rotation accumulated into the rows of vt (vt rows end up being the
// eigenvectors). The 2x2 pivot block [[app, apq], [conj(apq), aqq]] is
// brought to diagonal form by J = P R, P = diag(1, conj(apq)/|apq|),
// R the classic real rotation.
void jacobi_rotate(ComplexMatrix& a, ComplexMatrix& vt, std::size_t p, std::size_t q) {
    const std::size_t n = a.rows();
    const cplx apq = a(p, q);
    const double norm_apq = std::abs(apq);
    if (norm_apq == 0.0)
        return;

    const double app = a(p, p).real();
    const double aqq = a(q, q).real();
    const cplx phase = apq / norm_apq;                 // e^{i phi}
    const double tau = (aqq - app) / (2.0 * norm_apq);
    const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
    const double c = 1.0 / std::sqrt(1.0 + t * t);
    const double sr = t * c;
    // J = [[c, s], [-conj(s), c]] with s = sr * phase diagonalizes the block
    // under A <- J^dagger A J restricted to rows/cols (p, q).
    const cplx s = sr * phase;

    // Column update: [a(:,p), a(:,q)] <- [c*a(:,p) - conj(s)... ] derived from
    // A J; strided access, kept scalar.
    for (std::size_t i = 0; i < n; ++i) {
        const cplx aip = a(i, p), aiq = a(i, q);
        a(i, p) = c * aip - std::conj(s) * aiq;
        a(i, q) = s * aip + c * aiq;
    }
    // Row updates: A <- J^dagger A and vt <- J^dagger vt, contiguous rows;
    // crot(x, y, c, -s) computes exactly (c*x - s*y, conj(s)*x + c*y).
    simd::active().crot(a.data() + p * n, a.data() + q * n, c, -s, n);
    simd::active().crot(vt.data() + p * n, vt.data() + q * n, c, -s, n);
    a(p, q) = 0.0;
    a(q, p) = 0.0;
    a(p, p) = cplx(a(p, p).real(), 0.0);
    a(q, q) = cplx(a(q, q).real(), 0.0);
}

double offdiag_norm(const ComplexMatrix& a) {
    double s = 0.0;
    const std::size_t n = a.rows();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            s += std::norm(a(i, j));
    return std::sqrt(2.0 * s);
}

} // namespace

EigResult hermitian_eig(const ComplexMatrix& m, const Tolerance& tol) {
    if (m.rows() != m.cols())
        throw std::invalid_argument("hermitian_eig: matrix not square");
    const std::size_t n = m.rows();
    if (distance(m, m.dagger()) > tol.equality_tol * std::max(1.0, m.frobenius_norm()))
        throw std::invalid_argument("hermitian_eig: input is not Hermitian");

    // symmetrize to kill roundoff asymmetry before iterating
    ComplexMatrix a = m;
    a += m.dagger();
    a *= cplx(0.5, 0.0);

    ComplexMatrix vt = ComplexMatrix::identity(n);
    const double scale = std::max(a.frobenius_norm(), 1e-300);
    const double target = 1e-15 * scale;
    const int max_sweeps = 60;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        if (offdiag_norm(a) <= target)
            break;
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q)
                if (std::abs(a(p, q)) > 1e-18 * scale)
                    jacobi_rotate(a, vt, p, q);
    }

    EigResult res;
    res.values.resize(n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> diag(n);
    for (std::size_t i = 0; i < n; ++i)
        diag[i] = a(i, i).real();
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return diag[x] < diag[y]; });

    res.vectors = ComplexMatrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        res.values[k] = diag[order[k]];
        // eigenvector = conjugated row of vt (vt = V^dagger)
        for (std::size_t i = 0; i < n; ++i)
            res.vectors(i, k) = std::conj(vt(order[k], i));
    }
    return res;
}

std::vector<std::pair<std::size_t, std::size_t>>
group_eigenvalues(const std::vector<double>& values, double degeneracy_tol) {
    std::vector<std::pair<std::size_t, std::size_t>> groups;
    std::size_t begin = 0;
    for (std::size_t i = 1; i <= values.size(); ++i) {
        if (i == values.size() || values[i] - values[i - 1] > degeneracy_tol) {
            groups.emplace_back(begin, i);
            begin = i;
        }
    }
    return groups;
}

std::vector<ComplexMatrix> orthonormal_span(const std::vector<ComplexMatrix>& vectors,
                                            const Tolerance& tol) {
    std::vector<ComplexMatrix> basis;
    const auto& K = simd::active();
    // inputs far below the dominant scale are roundoff residue; normalizing
    // them would amplify noise into spurious directions
    double max_norm = 0.0;
    for (const ComplexMatrix& v : vectors)
        max_norm = std::max(max_norm, v.frobenius_norm());
    const double norm_floor = std::max(1e-300, tol.rank_tol * max_norm);
    for (const ComplexMatrix& v : vectors) {
        const double norm0 = v.frobenius_norm();
        if (norm0 <= norm_floor)
            continue;
        ComplexMatrix w = v;
        w *= cplx(1.0 / norm0, 0.0);
        // two rounds of projection; classic twice-is-enough
        for (int round = 0; round < 2; ++round)
            for (const ComplexMatrix& b : basis) {
                const cplx coeff = K.cdotc(b.data(), w.data(), w.size());
                K.caxpy(w.data(), -coeff, b.data(), w.size());
            }
        const double resid = w.frobenius_norm();
        if (resid > tol.rank_tol) {
            w *= cplx(1.0 / resid, 0.0);
            basis.push_back(std::move(w));
        }
    }
    return basis;
}

std::vector<std::vector<cplx>> gram_nullspace(const ComplexMatrix& a, const Tolerance& tol) {
    const std::size_t n = a.cols();
    ComplexMatrix gram(n, n);
    // gram = a^dagger a
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            cplx s = 0.0;
            for (std::size_t r = 0; r < a.rows(); ++r)
                s += std::conj(a(r, i)) * a(r, j);
            gram(i, j) = s;
            gram(j, i) = std::conj(s);
        }
    EigResult eig = hermitian_eig(gram, tol);
    const double lambda_max = eig.values.empty() ? 0.0 : std::max(eig.values.back(), 0.0);
    // Gram eigenvalues are squared singular values; exact zeros surface as
    // O(eps * lambda_max), so the rank cut cannot go below that floor.
    const double cut = lambda_max * std::max(tol.rank_tol * tol.rank_tol, kGramNoiseRel);
    std::vector<std::vector<cplx>> null;
    for (std::size_t k = 0; k < n; ++k) {
        if (eig.values[k] <= cut || lambda_max <= 0.0) {
            std::vector<cplx> v(n);
            for (std::size_t i = 0; i < n; ++i)
                v[i] = eig.vectors(i, k);
            null.push_back(std::move(v));
        }
    }
    return null;
}

std::size_t span_rank(const std::vector<ComplexMatrix>& vectors, const Tolerance& tol) {
    return orthonormal_span(vectors, tol).size();
}

bool in_span(const ComplexMatrix& m, const std::vector<ComplexMatrix>& basis, double tol) {
    return distance(m, project_onto_span(m, basis)) <= tol * std::max(1.0, m.frobenius_norm());
}

ComplexMatrix project_onto_span(const ComplexMatrix& m,
                                const std::vector<ComplexMatrix>& basis) {
    ComplexMatrix out(m.rows(), m.cols());
    const auto& K = simd::active();
    for (const ComplexMatrix& b : basis) {
        const cplx coeff = K.cdotc(b.data(), m.data(), m.size());
        K.caxpy(out.data(), coeff, b.data(), out.size());
    }
    return out;
}

namespace {

// Gram matrix of the stacked commutator map restricted to a coordinate list:
// G_{ab} = sum_i < [C_a, g_i], [C_b, g_i] >_HS.
ComplexMatrix commutator_gram(const std::vector<ComplexMatrix>& generators,
                              const std::vector<ComplexMatrix>& coords) {
    const std::size_t nc = coords.size();
    ComplexMatrix gram(nc, nc);
    std::vector<ComplexMatrix> comm(nc);
    for (const ComplexMatrix& g : generators) {
        for (std::size_t a = 0; a < nc; ++a)
            comm[a] = coords[a] * g - g * coords[a];
        for (std::size_t a = 0; a < nc; ++a)
            for (std::size_t b = a; b < nc; ++b) {
                const cplx s = hs_inner(comm[a], comm[b]);
                gram(a, b) += s;
                gram(b, a) = std::conj(gram(a, b));
            }
    }
    return gram;
}

std::vector<ComplexMatrix> nullspace_of_gram(const ComplexMatrix& gram,
                                             const std::vector<ComplexMatrix>& coords,
                                             const Tolerance& tol) {
    EigResult eig = hermitian_eig(gram, tol);
    const double lambda_max = eig.values.empty() ? 0.0 : std::max(eig.values.back(), 0.0);
    // commutator residuals scale like sqrt(lambda); square the rank cut and
    // keep it above the numerical-zero floor of the eigensolver
    const double cut = std::max({tol.rank_tol * tol.rank_tol * lambda_max,
                                 kGramNoiseRel * lambda_max,
                                 tol.equality_tol * tol.equality_tol});
    std::vector<ComplexMatrix> out;
    for (std::size_t k = 0; k < eig.values.size(); ++k) {
        if (eig.values[k] > cut)
            continue;
        ComplexMatrix x(coords[0].rows(), coords[0].cols());
        for (std::size_t a = 0; a < coords.size(); ++a) {
            const cplx coeff = eig.vectors(a, k);
            simd::active().caxpy(x.data(), coeff, coords[a].data(), x.size());
        }
        out.push_back(std::move(x));
    }
    return out;
}

} // namespace

std::vector<ComplexMatrix> solve_commutant(const std::vector<ComplexMatrix>& generators,
                                           std::size_t d, const Tolerance& tol) {
    for (const ComplexMatrix& g : generators)
        if (g.rows() != d || g.cols() != d)
            throw std::invalid_argument("solve_commutant: generator has wrong dimension");

    // coordinates = matrix units E_ij of M_d (HS-orthonormal)
    std::vector<ComplexMatrix> coords;
    coords.reserve(d * d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            ComplexMatrix e(d, d);
            e(i, j) = 1.0;
            coords.push_back(std::move(e));
        }
    if (generators.empty())
        return coords;
    ComplexMatrix gram = commutator_gram(generators, coords);
    return nullspace_of_gram(gram, coords, tol);
}

std::vector<ComplexMatrix> solve_commutant_in_span(
    const std::vector<ComplexMatrix>& generators,
    const std::vector<ComplexMatrix>& coords, const Tolerance& tol) {
    if (coords.empty())
        return {};
    if (generators.empty())
        return coords;
    ComplexMatrix gram = commutator_gram(generators, coords);
    return nullspace_of_gram(gram, coords, tol);
}

} // namespace qrf
