#ifndef QRFKIT_ALGEBRA_HPP
#define QRFKIT_ALGEBRA_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qrf/group.hpp"
#include "qrf/linalg.hpp"
#include "qrf/matrix.hpp"
#include "qrf/rng.hpp"

namespace qrf {

// *-closed, identity-containing span of operators, kept as an HS-orthonormal
// basis. Construct through generate_algebra / make_operator_algebra so the
// invariants actually hold.
struct OperatorAlgebra {
    std::size_t ambient_dim = 0;
    std::vector<ComplexMatrix> basis;
    bool contains_identity = false;

    std::size_t dim() const { return basis.size(); }
};

OperatorAlgebra make_operator_algebra(std::size_t ambient_dim,
                                      const std::vector<ComplexMatrix>& spanning,
                                      const Tolerance& tol = {});

// closure diagnostics used by tests: max residual of products/adjoints
// against the span
double algebra_closure_residual(const OperatorAlgebra& alg, const Tolerance& tol = {});

// Smallest *-closed identity-containing span containing the generators;
// iterates products through orthonormal_span until the dimension stabilizes
// (50-round cap, throws if exceeded).
OperatorAlgebra generate_algebra(const std::vector<ComplexMatrix>& generators,
                                 const Tolerance& tol = {});

// Full commutant within M_d, repackaged as an algebra.
OperatorAlgebra commutant(const OperatorAlgebra& alg, const Tolerance& tol = {});

// G-invariant commutant: operators fixed by the twirl that commute with alg.
// Requires alg itself to be G-invariant.
OperatorAlgebra invariant_commutant(const OperatorAlgebra& alg, const UnitaryRep& rep,
                                    const Tolerance& tol = {});

// Z(alg) = alg  intersect  alg'
OperatorAlgebra centre(const OperatorAlgebra& alg, const Tolerance& tol = {});

// Minimal central projectors via generic-element eigen-splitting with a
// bounded redraw loop (throws after 8 failed draws).
std::vector<ComplexMatrix> central_decomposition(const OperatorAlgebra& alg,
                                                 const Tolerance& tol = {},
                                                 Rng* rng = nullptr);

struct FactorFactorization {
    std::size_t multiplicity_dim = 0;   // n = rank of each minimal projector
    std::size_t block_dim = 0;          // m = number of minimal projectors
    ComplexMatrix isometry;             // D x (n*m) unitary phi, phi^dag A phi = id_n (x) M_m
};

// Constructive factor decomposition for an algebra with trivial centre,
// given on its own (compressed) space of dimension D = n*m.
FactorFactorization factorize_factor(const OperatorAlgebra& alg, const Tolerance& tol = {},
                                     Rng* rng = nullptr);

struct Sector {
    std::string k_label;
    ComplexMatrix central_projector;            // ambient x ambient
    std::vector<Charge> charges;                // ascending; empty without a rep
    std::size_t block_dim = 0;                  // dim H_k
    std::size_t multiplicity_total = 0;         // n = sum_r dim H_{r,k}
    std::map<Charge, std::size_t> multiplicity_dims;
    // (n*m) x ambient; maps the sector subspace onto its multiplicity (x)
    // block factorization: isometry * A * isometry^dag = id_n (x) block.
    ComplexMatrix isometry;
};

struct SectorDecomposition {
    std::size_t ambient_dim = 0;
    std::vector<Sector> sectors;

    std::size_t total_reconstructed_dim() const;
};

// Full structural pipeline: central decomposition, per-sector factor factorization,
// then (when a representation is supplied) charge decomposition of each
// multiplicity factor. All three conjugation relations are verified, with a
// diagnostic throw on failure.
SectorDecomposition full_decomposition(const OperatorAlgebra& alg,
                                       const UnitaryRep* rep = nullptr,
                                       const Tolerance& tol = {}, Rng* rng = nullptr);

bool double_commutant_check(const OperatorAlgebra& alg, const Tolerance& tol = {});

} // namespace qrf

#endif
