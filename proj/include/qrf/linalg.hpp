#ifndef QRFKIT_LINALG_HPP
#define QRFKIT_LINALG_HPP

#include <vector>

#include "qrf/matrix.hpp"

namespace qrf {

struct EigResult {
    std::vector<double> values;   // ascending
    ComplexMatrix vectors;        // columns, orthonormal
};

// Cyclic complex Jacobi diagonalization. Requires ||m - m^dagger|| below
// tol.equality_tol (throws std::invalid_argument otherwise); the Hermitian
// part is what gets diagonalized.
EigResult hermitian_eig(const ComplexMatrix& m, const Tolerance& tol = {});

// Indices [begin, end) per group of eigenvalues closer than degeneracy_tol,
// scanning the sorted list.
std::vector<std::pair<std::size_t, std::size_t>>
group_eigenvalues(const std::vector<double>& values, double degeneracy_tol);

// Gram-Schmidt with re-orthogonalization over the Hilbert-Schmidt inner
// product; first-come pivoting, so output order follows input order.
std::vector<ComplexMatrix> orthonormal_span(const std::vector<ComplexMatrix>& vectors,
                                            const Tolerance& tol = {});

// Orthonormal basis of {x : A x = 0} via the Gram matrix A^dagger A; the rank
// cut is relative to the largest eigenvalue (rank_tol^2 on Gram eigenvalues).
std::vector<std::vector<cplx>> gram_nullspace(const ComplexMatrix& a, const Tolerance& tol = {});

// Rank of the span of the given (flattened) matrices under the HS inner
// product.
std::size_t span_rank(const std::vector<ComplexMatrix>& vectors, const Tolerance& tol = {});

// True if m lies in the span of the (orthonormal) basis to equality_tol.
bool in_span(const ComplexMatrix& m, const std::vector<ComplexMatrix>& orthonormal_basis,
             double tol);

// HS-orthogonal projection of m onto the span of an orthonormal basis.
ComplexMatrix project_onto_span(const ComplexMatrix& m,
                                const std::vector<ComplexMatrix>& orthonormal_basis);

// Hilbert-Schmidt-orthonormal basis of {X : [X, g] = 0 for all generators},
// computed as the null space of the stacked commutator superoperator
// X -> (X g - g X). All generators must be d x d.
std::vector<ComplexMatrix> solve_commutant(const std::vector<ComplexMatrix>& generators,
                                           std::size_t d, const Tolerance& tol = {});

// Same null space, but with X restricted to span(coords) where coords is an
// HS-orthonormal list; returns coefficient vectors re-expanded as matrices.
std::vector<ComplexMatrix> solve_commutant_in_span(
    const std::vector<ComplexMatrix>& generators,
    const std::vector<ComplexMatrix>& coords, const Tolerance& tol = {});

} // namespace qrf

#endif
