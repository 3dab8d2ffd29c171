#ifndef QRFKIT_FRAMES_HPP
#define QRFKIT_FRAMES_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qrf/algebra.hpp"
#include "qrf/group.hpp"

namespace qrf {

// ---------------------------------------------------------------------------
// Rank-one quantum reference frames
//
// A frame lives in its charge basis: index i carries charge rep.charges[i]
// (ascending, multiplicity-free) and seed amplitude alpha_i, all of equal
// modulus. Orientation states are |g> = U(g)|e>, POVM gamma(g) = |g><g| / c.
// ---------------------------------------------------------------------------

struct Qrf {
    UnitaryRep rep;                  // diagonal; no basis_change
    std::vector<cplx> seed_amplitudes;
    double c = 0.0;                  // POVM normalization

    std::size_t dim() const { return rep.dim; }
    const SymmetryGroup& group() const { return rep.group; }
};

Qrf make_rank_one_qrf(const SymmetryGroup& group, std::vector<Charge> charges,
                      std::vector<cplx> amplitudes, const Tolerance& tol = {});
Qrf trivial_qrf(const SymmetryGroup& group);
Qrf regular_qrf(const SymmetryGroup& group); // finite groups only

// |g> of the frame, as charge-basis coordinates
ComplexMatrix orientation_state(const Qrf& frame, const FiniteElement& g);
ComplexMatrix orientation_state(const Qrf& frame, double theta);
// gamma(g) = |g><g| / c
ComplexMatrix orientation_povm(const Qrf& frame, const FiniteElement& g);
ComplexMatrix orientation_povm(const Qrf& frame, double theta);

// min_{g != e} tr(gamma(g)|e><e|) / tr(gamma(e)|e><e|); a frame is ideal when
// this vanishes (finite groups).
double orientation_overlap_ratio(const Qrf& frame);
bool is_ideal(const Qrf& frame, const Tolerance& tol = {});

// ---------------------------------------------------------------------------
// Relationalization
// ---------------------------------------------------------------------------

// R_A[op]: finite groups as the group sum, U(1) analytically by charge
// conservation. Result acts on H_A (x) H_S (frame indices major).
ComplexMatrix relationalize(const Qrf& frame, const ComplexMatrix& op_s,
                            const UnitaryRep& rep_s);

// O[R_A[O_S]]: generated from the relationalized matrix-unit basis of S.
OperatorAlgebra relational_algebra(const Qrf& frame, const UnitaryRep& rep_s,
                                   const Tolerance& tol = {});

struct BackReactionReport {
    std::size_t relational_span_dim = 0; // dim span R_A[O_S]
    std::size_t algebra_dim = 0;         // dim O[R_A[O_S]]
    std::size_t system_operator_dim = 0; // dim O_S
    bool strict_inclusion = false;       // span < algebra
};

BackReactionReport back_reaction_report(const Qrf& frame, const UnitaryRep& rep_s,
                                        const Tolerance& tol = {});

// ---------------------------------------------------------------------------
// kappa and the analytic sector prediction
// ---------------------------------------------------------------------------

// kappa(r) = sigma_S  intersect  (r - sigma_A), as supports
std::vector<Charge> kappa(const ChargeSpectrum& sigma_s, const ChargeSpectrum& sigma_a,
                          const Charge& r);

struct KappaSector {
    std::vector<Charge> k;         // sector label: set of S charges
    std::vector<Charge> preimage;  // kappa^{-1}(k): total charges r
    std::size_t block_dim = 0;     // dim H_{k,S}
};

// all sectors of frame+system, ordered by minimum preimage charge
std::vector<KappaSector> kappa_sectors(const Qrf& frame, const UnitaryRep& rep_s);

// ---------------------------------------------------------------------------
// Jumps
// ---------------------------------------------------------------------------

struct JumpMap {
    std::size_t source_dim = 0;
    std::size_t target_dim = 0;
    // target x source isometry; target basis = (window charge) x (S index)
    ComplexMatrix matrix;
    std::vector<Charge> window;           // regular-frame charges, ascending
    std::vector<KappaSector> sectors;     // analytic structure
    SectorDecomposition decomposition;    // on the target space
};

// V = W^dag (E (x) id_S), expressed in the charge basis of the regular frame.
// Verifies the analytic kappa prediction against the numeric
// full_decomposition of the relational algebra unless verify = false.
JumpMap abelian_jump(const Qrf& frame, const UnitaryRep& rep_s, const Tolerance& tol = {},
                     bool verify = true);

// Conjugates R_A[op] by the jump and asserts the direct block formula
// (+)_k id_{kappa^-1(k)} (x) pi_k op pi_k.
ComplexMatrix jump_relational(const JumpMap& jump, const Qrf& frame,
                              const ComplexMatrix& op_s, const UnitaryRep& rep_s,
                              const Tolerance& tol = {});

// V^{A->B} = V_B V_A^dag for two jumps with a common source space.
ComplexMatrix qrf_transformation(const JumpMap& jump_a, const JumpMap& jump_b);

// Permutation matrix realizing a reordering of tensor factors: index
// (i_0,...,i_{f-1}) with dims `dims` maps to the index of the permuted tuple
// (i_{perm[0]}, ..., i_{perm[f-1]}) with dims permuted accordingly.
ComplexMatrix tensor_permutation(const std::vector<std::size_t>& dims,
                                 const std::vector<std::size_t>& perm);

// ---------------------------------------------------------------------------
// Regular-frame machinery (finite groups)
// ---------------------------------------------------------------------------

// W = sum_g |g><g| (x) U_S(g) on l2(G) (x) H_S, position basis on the frame
ComplexMatrix regular_w(const SymmetryGroup& group, const UnitaryRep& rep_s);

// left-regular representation in the position basis
ComplexMatrix left_regular(const SymmetryGroup& group, const FiniteElement& g);
ComplexMatrix right_regular(const SymmetryGroup& group, const FiniteElement& g);

// position basis -> charge basis Fourier map: row r, column g, e^{-i r(g)}/sqrt|G|
ComplexMatrix fourier_matrix(const SymmetryGroup& group);

// closed-form regular-to-regular QRF transformation
// sum_g L(g)_{Gamma} (x) |-g>_A <g|_B (x) U_Q^dag(g), position bases
ComplexMatrix regular_transformation_closed_form(const SymmetryGroup& group,
                                                 const UnitaryRep& rep_q);

// E : H_A -> l2(G), rows in the position basis of the regular frame
ComplexMatrix embedding_map(const Qrf& frame);

// pi = W^dag (E E^dag (x) id) W, position basis on the regular frame
ComplexMatrix jump_projector(const Qrf& frame, const UnitaryRep& rep_s);

struct PnCheck {
    bool ok = false;
    double projector_residual = 0.0; // pi_{r=0} vs coherent group average
    double jump_residual = 0.0;      // V pi_{r=0} vs (1/sqrt c)|0><e| (x) id
};

// Perspective-neutral restriction: V^{->A} pi_{r=0} against the closed form.
PnCheck pn_restriction_check(const Qrf& frame, const UnitaryRep& rep_s,
                             const Tolerance& tol = {});

// ---------------------------------------------------------------------------
// States seen through a frame
// ---------------------------------------------------------------------------

struct EffectiveState {
    ComplexMatrix state;                       // varsigma'
    std::vector<double> p_finite;              // p(g) per group element (finite)
    std::function<double(double)> p_u1;        // p(theta) (U(1))
};

EffectiveState effective_state(const Qrf& frame, const ComplexMatrix& rho_a,
                               const ComplexMatrix& sigma_s, const UnitaryRep& rep_s);

// Unique element of span(alg) with tr(rho_red X) = tr(state X) for all X in
// alg; verified positive semidefinite and unit trace within tolerances.
ComplexMatrix reduced_relational_state(const ComplexMatrix& state, const OperatorAlgebra& alg,
                                       const UnitaryRep& rep, const Tolerance& tol = {});

// ---------------------------------------------------------------------------
// Bipartite sector analysis (factorization of S:A|A per sector)
// ---------------------------------------------------------------------------

struct BipartiteSector {
    std::vector<Charge> k;
    std::vector<std::pair<Charge, Charge>> solutions; // (q1,q2), q1+q2 in k
    bool is_product = false;
    std::vector<Charge> x1, x2;       // factor charge sets when is_product
    double commutator_norm = 0.0;     // ||[X1,X2]|| for random X1, X2
    double formula_residual = 0.0;    // against the characteristic-function formula
};

std::vector<BipartiteSector> bipartite_sector_analysis(const Qrf& frame,
                                                       const UnitaryRep& rep_s1,
                                                       const UnitaryRep& rep_s2,
                                                       Rng* rng = nullptr);

} // namespace qrf

#endif
