#include "qrf/group.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qrf {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

// ---------------------------------------------------------------------------
// SymmetryGroup
// ---------------------------------------------------------------------------

SymmetryGroup SymmetryGroup::finite(std::vector<long> moduli) {
    if (moduli.empty())
        throw std::invalid_argument("finite group needs at least one factor");
    for (long n : moduli)
        if (n < 1)
            throw std::invalid_argument("finite group moduli must be >= 1");
    SymmetryGroup g;
    g.kind = GroupKind::FiniteAbelian;
    g.moduli = std::move(moduli);
    return g;
}

SymmetryGroup SymmetryGroup::u1() {
    SymmetryGroup g;
    g.kind = GroupKind::U1;
    return g;
}

double SymmetryGroup::haar_total() const {
    if (!is_finite())
        return kTwoPi;
    return static_cast<double>(order());
}

std::size_t SymmetryGroup::order() const {
    if (!is_finite())
        throw std::invalid_argument("order() only defined for finite groups");
    std::size_t n = 1;
    for (long m : moduli)
        n *= static_cast<std::size_t>(m);
    return n;
}

std::vector<FiniteElement> SymmetryGroup::elements() const {
    if (!is_finite())
        throw std::invalid_argument("elements() only defined for finite groups");
    std::vector<FiniteElement> out;
    out.reserve(order());
    FiniteElement cur(moduli.size(), 0);
    while (true) {
        out.push_back(cur);
        std::size_t f = moduli.size();
        while (f-- > 0) {
            if (++cur[f] < moduli[f])
                break;
            cur[f] = 0;
            if (f == 0)
                return out;
        }
    }
}

FiniteElement SymmetryGroup::identity_element() const {
    return FiniteElement(num_factors(), 0);
}

FiniteElement SymmetryGroup::add(const FiniteElement& a, const FiniteElement& b) const {
    FiniteElement c(moduli.size());
    for (std::size_t i = 0; i < moduli.size(); ++i)
        c[i] = ((a[i] + b[i]) % moduli[i] + moduli[i]) % moduli[i];
    return c;
}

FiniteElement SymmetryGroup::negate(const FiniteElement& a) const {
    FiniteElement c(moduli.size());
    for (std::size_t i = 0; i < moduli.size(); ++i)
        c[i] = ((-a[i]) % moduli[i] + moduli[i]) % moduli[i];
    return c;
}

// ---------------------------------------------------------------------------
// Charges
// ---------------------------------------------------------------------------

std::string to_string(const Charge& c) {
    if (c.components.size() == 1)
        return std::to_string(c.components[0]);
    std::string s = "(";
    for (std::size_t i = 0; i < c.components.size(); ++i) {
        if (i)
            s += ",";
        s += std::to_string(c.components[i]);
    }
    return s + ")";
}

Charge charge_canonical(const SymmetryGroup& g, Charge c) {
    if (c.components.size() != g.num_factors())
        throw std::invalid_argument("charge has wrong number of components");
    if (g.is_finite())
        for (std::size_t i = 0; i < c.components.size(); ++i)
            c.components[i] = ((c.components[i] % g.moduli[i]) + g.moduli[i]) % g.moduli[i];
    return c;
}

Charge charge_add(const SymmetryGroup& g, const Charge& a, const Charge& b) {
    Charge c;
    c.components.resize(a.components.size());
    for (std::size_t i = 0; i < a.components.size(); ++i)
        c.components[i] = a.components[i] + b.components[i];
    return charge_canonical(g, c);
}

Charge charge_sub(const SymmetryGroup& g, const Charge& a, const Charge& b) {
    Charge c;
    c.components.resize(a.components.size());
    for (std::size_t i = 0; i < a.components.size(); ++i)
        c.components[i] = a.components[i] - b.components[i];
    return charge_canonical(g, c);
}

Charge charge_neg(const SymmetryGroup& g, const Charge& a) {
    Charge c;
    c.components.assign(a.components.size(), 0);
    return charge_sub(g, c, a);
}

cplx charge_phase(const SymmetryGroup& g, const Charge& r, const FiniteElement& elem) {
    if (!g.is_finite())
        throw std::invalid_argument("finite element passed to a U(1) group");
    double phase = 0.0;
    for (std::size_t i = 0; i < g.moduli.size(); ++i)
        phase += static_cast<double>(r.components[i]) * static_cast<double>(elem[i]) /
                 static_cast<double>(g.moduli[i]);
    return std::polar(1.0, -kTwoPi * phase);
}

cplx charge_phase(const SymmetryGroup& g, const Charge& r, double theta) {
    if (g.is_finite())
        throw std::invalid_argument("angle passed to a finite group");
    return std::polar(1.0, -static_cast<double>(r.components[0]) * theta);
}

// ---------------------------------------------------------------------------
// ChargeSpectrum
// ---------------------------------------------------------------------------

std::size_t ChargeSpectrum::total_multiplicity() const {
    std::size_t n = 0;
    for (const auto& [c, m] : mult)
        n += m;
    return n;
}

std::vector<Charge> ChargeSpectrum::support() const {
    std::vector<Charge> out;
    out.reserve(mult.size());
    for (const auto& [c, m] : mult)
        out.push_back(c);
    return out;
}

ChargeSpectrum spectrum_sum(const ChargeSpectrum& a, const ChargeSpectrum& b) {
    if (!(a.group == b.group))
        throw std::invalid_argument("spectrum_sum: group mismatch");
    ChargeSpectrum out;
    out.group = a.group;
    for (const auto& [ca, ma] : a.mult)
        for (const auto& [cb, mb] : b.mult)
            out.mult[charge_add(a.group, ca, cb)] += ma * mb;
    return out;
}

// ---------------------------------------------------------------------------
// UnitaryRep
// ---------------------------------------------------------------------------

ComplexMatrix UnitaryRep::basis_matrix() const {
    return basis_change ? *basis_change : ComplexMatrix::identity(dim);
}

UnitaryRep make_rep(const SymmetryGroup& g, std::vector<Charge> charges) {
    UnitaryRep rep;
    rep.group = g;
    rep.dim = charges.size();
    rep.charges.reserve(charges.size());
    for (Charge& c : charges)
        rep.charges.push_back(charge_canonical(g, std::move(c)));
    return rep;
}

UnitaryRep trivial_rep(const SymmetryGroup& g, std::size_t dim) {
    Charge zero;
    zero.components.assign(g.num_factors(), 0);
    return make_rep(g, std::vector<Charge>(dim, zero));
}

UnitaryRep kron_rep(const UnitaryRep& a, const UnitaryRep& b) {
    if (!(a.group == b.group))
        throw std::invalid_argument("kron_rep: group mismatch");
    UnitaryRep rep;
    rep.group = a.group;
    rep.dim = a.dim * b.dim;
    rep.charges.reserve(rep.dim);
    for (const Charge& ca : a.charges)
        for (const Charge& cb : b.charges)
            rep.charges.push_back(charge_add(a.group, ca, cb));
    if (a.basis_change || b.basis_change)
        rep.basis_change = kron(a.basis_matrix(), b.basis_matrix());
    return rep;
}

ChargeSpectrum spectrum_of(const UnitaryRep& rep) {
    ChargeSpectrum s;
    s.group = rep.group;
    for (const Charge& c : rep.charges)
        ++s.mult[c];
    return s;
}

namespace {

template <typename Elem>
ComplexMatrix rep_evaluate_impl(const UnitaryRep& rep, const Elem& g) {
    std::vector<cplx> phases(rep.dim);
    for (std::size_t i = 0; i < rep.dim; ++i)
        phases[i] = charge_phase(rep.group, rep.charges[i], g);
    ComplexMatrix d = ComplexMatrix::diag(phases);
    if (!rep.basis_change)
        return d;
    const ComplexMatrix& b = *rep.basis_change;
    return b * d * b.dagger();
}

} // namespace

ComplexMatrix rep_evaluate(const UnitaryRep& rep, const FiniteElement& g) {
    if (!rep.group.is_finite())
        throw std::invalid_argument("rep_evaluate: finite element for U(1) rep");
    if (g.size() != rep.group.num_factors())
        throw std::invalid_argument("rep_evaluate: element outside group domain");
    return rep_evaluate_impl(rep, g);
}

ComplexMatrix rep_evaluate(const UnitaryRep& rep, double theta) {
    if (rep.group.is_finite())
        throw std::invalid_argument("rep_evaluate: angle for finite-group rep");
    return rep_evaluate_impl(rep, theta);
}

ComplexMatrix charge_projector(const UnitaryRep& rep, const Charge& r) {
    const Charge rc = charge_canonical(rep.group, r);
    ComplexMatrix d(rep.dim, rep.dim);
    for (std::size_t i = 0; i < rep.dim; ++i)
        if (rep.charges[i] == rc)
            d(i, i) = 1.0;
    if (!rep.basis_change)
        return d;
    const ComplexMatrix& b = *rep.basis_change;
    return b * d * b.dagger();
}

ComplexMatrix charge_operator(const UnitaryRep& rep, std::size_t factor) {
    if (factor >= rep.group.num_factors())
        throw std::invalid_argument("charge_operator: factor out of range");
    ComplexMatrix d(rep.dim, rep.dim);
    for (std::size_t i = 0; i < rep.dim; ++i)
        d(i, i) = static_cast<double>(rep.charges[i].components[factor]);
    if (!rep.basis_change)
        return d;
    const ComplexMatrix& b = *rep.basis_change;
    return b * d * b.dagger();
}

// ---------------------------------------------------------------------------
// decompose_charges
// ---------------------------------------------------------------------------

namespace {

// Refine a list of orthonormal column blocks into joint eigenblocks of a
// Hermitian operator.
void refine_blocks(std::vector<ComplexMatrix>& blocks, const ComplexMatrix& h,
                   const Tolerance& tol) {
    std::vector<ComplexMatrix> next;
    for (const ComplexMatrix& s : blocks) {
        const std::size_t k = s.cols();
        ComplexMatrix compressed = s.dagger() * h * s;
        EigResult eig = hermitian_eig(compressed, tol);
        auto groups = group_eigenvalues(eig.values, tol.degeneracy_tol);
        for (const auto& [b, e] : groups) {
            ComplexMatrix v(k, e - b);
            for (std::size_t c = b; c < e; ++c)
                for (std::size_t i = 0; i < k; ++i)
                    v(i, c - b) = eig.vectors(i, c);
            next.push_back(s * v);
        }
    }
    blocks = std::move(next);
}

long phase_to_charge(cplx lambda, long modulus, double tol_phase) {
    const double ang = std::arg(lambda); // in (-pi, pi]
    // lambda should be e^{-2 pi i r / n}
    double r_real = -ang * static_cast<double>(modulus) / kTwoPi;
    long r = std::lround(r_real);
    const cplx expect = std::polar(1.0, -kTwoPi * static_cast<double>(r) / modulus);
    if (std::abs(lambda - expect) > tol_phase)
        throw std::invalid_argument("decompose_charges: eigenphase is not an n-th root of unity");
    return ((r % modulus) + modulus) % modulus;
}

} // namespace

UnitaryRep decompose_charges(const SymmetryGroup& g,
                             const std::vector<ComplexMatrix>& factor_unitaries,
                             const Tolerance& tol) {
    if (!g.is_finite())
        throw std::invalid_argument("decompose_charges: use decompose_charges_u1 for U(1)");
    if (factor_unitaries.size() != g.moduli.size())
        throw std::invalid_argument("decompose_charges: need one unitary per group factor");
    const std::size_t d = factor_unitaries.front().rows();
    for (const auto& u : factor_unitaries) {
        if (u.rows() != d || u.cols() != d)
            throw std::invalid_argument("decompose_charges: dimension mismatch");
        if (distance(u * u.dagger(), ComplexMatrix::identity(d)) > 1e-8 * std::max(1.0, double(d)))
            throw std::invalid_argument("decompose_charges: input is not unitary");
    }
    for (std::size_t a = 0; a < factor_unitaries.size(); ++a)
        for (std::size_t b = a + 1; b < factor_unitaries.size(); ++b)
            if (commutator_norm(factor_unitaries[a], factor_unitaries[b]) > 1e-8)
                throw std::invalid_argument("decompose_charges: non-commuting inputs");

    // joint eigenblocks of all Hermitian/anti-Hermitian parts
    std::vector<ComplexMatrix> blocks{ComplexMatrix::identity(d)};
    for (const auto& u : factor_unitaries) {
        ComplexMatrix h = u + u.dagger();
        h *= cplx(0.5, 0.0);
        ComplexMatrix k = u - u.dagger();
        k *= cplx(0.0, -0.5);
        refine_blocks(blocks, h, tol);
        refine_blocks(blocks, k, tol);
    }

    // read a charge per block from the eigenphases of each factor unitary
    struct Labelled {
        Charge charge;
        ComplexMatrix block;
    };
    std::vector<Labelled> labelled;
    for (const ComplexMatrix& s : blocks) {
        Charge c;
        for (std::size_t f = 0; f < factor_unitaries.size(); ++f) {
            ComplexMatrix compressed = s.dagger() * factor_unitaries[f] * s;
            const cplx lambda = compressed(0, 0);
            // the block must be an eigenblock: compressed ~ lambda * I
            if (distance(compressed, lambda * ComplexMatrix::identity(s.cols())) > 1e-7)
                throw std::invalid_argument("decompose_charges: joint refinement failed");
            c.components.push_back(phase_to_charge(lambda, g.moduli[f], 1e-6));
        }
        labelled.push_back({std::move(c), s});
    }
    std::stable_sort(labelled.begin(), labelled.end(),
                     [](const Labelled& a, const Labelled& b) { return a.charge < b.charge; });

    UnitaryRep rep;
    rep.group = g;
    rep.dim = d;
    ComplexMatrix basis(d, d);
    std::size_t col = 0;
    for (const Labelled& lb : labelled) {
        for (std::size_t c = 0; c < lb.block.cols(); ++c, ++col) {
            rep.charges.push_back(lb.charge);
            for (std::size_t i = 0; i < d; ++i)
                basis(i, col) = lb.block(i, c);
        }
    }
    rep.basis_change = std::move(basis);
    return rep;
}

UnitaryRep decompose_charges_u1(const ComplexMatrix& charge_op, const Tolerance& tol) {
    EigResult eig = hermitian_eig(charge_op, tol);
    UnitaryRep rep;
    rep.group = SymmetryGroup::u1();
    rep.dim = charge_op.rows();
    for (double v : eig.values) {
        const long r = std::lround(v);
        if (std::abs(v - static_cast<double>(r)) > tol.degeneracy_tol)
            throw std::invalid_argument("decompose_charges_u1: non-integer spectrum");
        rep.charges.push_back(Charge{{r}});
    }
    rep.basis_change = eig.vectors;
    return rep;
}

// ---------------------------------------------------------------------------
// G-twirl and invariant operators
// ---------------------------------------------------------------------------

ComplexMatrix g_twirl(const UnitaryRep& rep, const ComplexMatrix& op) {
    if (op.rows() != rep.dim || op.cols() != rep.dim)
        throw std::invalid_argument("g_twirl: dimension mismatch");
    if (rep.group.is_finite()) {
        ComplexMatrix acc(rep.dim, rep.dim);
        const auto elems = rep.group.elements();
        for (const FiniteElement& g : elems) {
            ComplexMatrix u = rep_evaluate(rep, g);
            acc += u * op * u.dagger();
        }
        acc *= cplx(1.0 / static_cast<double>(elems.size()), 0.0);
        return acc;
    }
    // U(1): de-phase between different charges, exactly
    const ComplexMatrix b = rep.basis_matrix();
    ComplexMatrix cb = rep.basis_change ? b.dagger() * op * b : op;
    for (std::size_t i = 0; i < rep.dim; ++i)
        for (std::size_t j = 0; j < rep.dim; ++j)
            if (!(rep.charges[i] == rep.charges[j]))
                cb(i, j) = 0.0;
    return rep.basis_change ? b * cb * b.dagger() : cb;
}

std::vector<ComplexMatrix> invariant_operator_basis(const UnitaryRep& rep) {
    std::vector<ComplexMatrix> out;
    const ComplexMatrix b = rep.basis_matrix();
    for (std::size_t i = 0; i < rep.dim; ++i)
        for (std::size_t j = 0; j < rep.dim; ++j) {
            if (!(rep.charges[i] == rep.charges[j]))
                continue;
            if (!rep.basis_change) {
                ComplexMatrix e(rep.dim, rep.dim);
                e(i, j) = 1.0;
                out.push_back(std::move(e));
            } else {
                // b e_i e_j^dagger b^dagger = (col i of b)(col j of b)^dagger
                ComplexMatrix e(rep.dim, rep.dim);
                for (std::size_t r = 0; r < rep.dim; ++r)
                    for (std::size_t c = 0; c < rep.dim; ++c)
                        e(r, c) = b(r, i) * std::conj(b(c, j));
                out.push_back(std::move(e));
            }
        }
    return out;
}

} // namespace qrf
