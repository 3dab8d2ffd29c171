#ifndef QRFKIT_GROUP_HPP
#define QRFKIT_GROUP_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qrf/linalg.hpp"
#include "qrf/matrix.hpp"

namespace qrf {

// ---------------------------------------------------------------------------
// Symmetry groups: finite Abelian products Z_{n1} x ... x Z_{nm}, or U(1).
// Convention fixed across the library: a basis vector of charge r transforms
// as e^{-i r theta} (U(1)) or e^{-2 pi i sum_j r_j g_j / n_j} (finite).
// ---------------------------------------------------------------------------

enum class GroupKind { FiniteAbelian, U1 };

// Group element of a finite Abelian group, one component per factor.
using FiniteElement = std::vector<long>;

struct SymmetryGroup {
    GroupKind kind = GroupKind::FiniteAbelian;
    std::vector<long> moduli;   // finite only

    static SymmetryGroup finite(std::vector<long> moduli);
    static SymmetryGroup u1();

    bool is_finite() const { return kind == GroupKind::FiniteAbelian; }
    std::size_t num_factors() const { return is_finite() ? moduli.size() : 1; }

    // |G|: group cardinality for finite groups, 2*pi for U(1).
    double haar_total() const;
    std::size_t order() const;                  // finite only
    std::vector<FiniteElement> elements() const; // finite only, lexicographic
    FiniteElement identity_element() const;
    FiniteElement add(const FiniteElement& a, const FiniteElement& b) const;
    FiniteElement negate(const FiniteElement& a) const;

    bool operator==(const SymmetryGroup&) const = default;
};

struct Charge {
    std::vector<long> components;

    bool operator==(const Charge&) const = default;
    bool operator<(const Charge& o) const { return components < o.components; }
};

std::string to_string(const Charge& c);

// canonical representative: components reduced into [0, n_i) for finite groups
Charge charge_canonical(const SymmetryGroup& g, Charge c);
Charge charge_add(const SymmetryGroup& g, const Charge& a, const Charge& b);
Charge charge_sub(const SymmetryGroup& g, const Charge& a, const Charge& b);
Charge charge_neg(const SymmetryGroup& g, const Charge& a);

// e^{-i r(g)}: the phase a charge-r vector picks up
cplx charge_phase(const SymmetryGroup& g, const Charge& r, const FiniteElement& elem);
cplx charge_phase(const SymmetryGroup& g, const Charge& r, double theta);

// ---------------------------------------------------------------------------
// Charge spectra (multisets of charges)
// ---------------------------------------------------------------------------

struct ChargeSpectrum {
    SymmetryGroup group;
    std::map<Charge, std::size_t> mult;

    std::size_t total_multiplicity() const;
    std::vector<Charge> support() const;
};

ChargeSpectrum spectrum_sum(const ChargeSpectrum& a, const ChargeSpectrum& b);

// ---------------------------------------------------------------------------
// Charge-labelled unitary representations
// ---------------------------------------------------------------------------

// The representation is diagonal in its stored "charge basis"; basis_change
// (when present, unitary) maps charge-basis coordinates to the working basis:
// U_working(g) = B diag(e^{-i r_j(g)}) B^dagger.
struct UnitaryRep {
    SymmetryGroup group;
    std::size_t dim = 0;
    std::vector<Charge> charges;               // one per charge-basis index
    std::optional<ComplexMatrix> basis_change;

    ComplexMatrix basis_matrix() const;        // identity if absent
};

// rep with the given per-index charges and identity basis change
UnitaryRep make_rep(const SymmetryGroup& g, std::vector<Charge> charges);
UnitaryRep trivial_rep(const SymmetryGroup& g, std::size_t dim);
// joint representation on a tensor product, kron index order
UnitaryRep kron_rep(const UnitaryRep& a, const UnitaryRep& b);

ChargeSpectrum spectrum_of(const UnitaryRep& rep);

ComplexMatrix rep_evaluate(const UnitaryRep& rep, const FiniteElement& g);
ComplexMatrix rep_evaluate(const UnitaryRep& rep, double theta);

// projector onto the charge-r subspace, in the working basis
ComplexMatrix charge_projector(const UnitaryRep& rep, const Charge& r);

// diag of charges as a Hermitian operator (single-factor component `factor`)
ComplexMatrix charge_operator(const UnitaryRep& rep, std::size_t factor = 0);

// Simultaneous eigendecomposition of the representation:
//  - finite: one unitary per group factor, evaluated at that factor's
//    generator; they must commute pairwise and have n_i-th-root eigenphases
//  - u1: a Hermitian charge operator with integer spectrum
// Charges are read off eigenphases; the diagonalizing basis is recorded.
UnitaryRep decompose_charges(const SymmetryGroup& g,
                             const std::vector<ComplexMatrix>& factor_unitaries,
                             const Tolerance& tol = {});
UnitaryRep decompose_charges_u1(const ComplexMatrix& charge_op, const Tolerance& tol = {});

// ---------------------------------------------------------------------------
// G-twirl and invariant operators
// ---------------------------------------------------------------------------

// Group average of conjugation. Finite groups: literal average over all
// elements. U(1): de-phasing, zeroing matrix elements between different
// charges (exact; no quadrature).
ComplexMatrix g_twirl(const UnitaryRep& rep, const ComplexMatrix& op);

// HS-orthonormal basis of the fixed-point algebra of the twirl: matrix units
// between equal-charge basis pairs, in the working basis. Size sum_r m_r^2.
std::vector<ComplexMatrix> invariant_operator_basis(const UnitaryRep& rep);

} // namespace qrf

#endif
