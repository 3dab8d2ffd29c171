#include "qrf/frames.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace qrf {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::vector<Charge> dual_charges(const SymmetryGroup& g) {
    // charges of the dual group, same tuple enumeration as the elements
    std::vector<Charge> out;
    for (const FiniteElement& e : g.elements())
        out.push_back(Charge{e});
    std::sort(out.begin(), out.end());
    return out;
}

std::size_t index_of_charge(const std::vector<Charge>& list, const Charge& c) {
    auto it = std::lower_bound(list.begin(), list.end(), c);
    if (it == list.end() || !(*it == c))
        throw std::runtime_error("internal: charge not in window");
    return static_cast<std::size_t>(it - list.begin());
}

ComplexMatrix state_projector(const ComplexMatrix& v) {
    ComplexMatrix p(v.rows(), v.rows());
    for (std::size_t i = 0; i < v.rows(); ++i)
        for (std::size_t j = 0; j < v.rows(); ++j)
            p(i, j) = v(i, 0) * std::conj(v(j, 0));
    return p;
}

} // namespace

// ---------------------------------------------------------------------------
// Frame construction
// ---------------------------------------------------------------------------

Qrf make_rank_one_qrf(const SymmetryGroup& group, std::vector<Charge> charges,
                      std::vector<cplx> amplitudes, const Tolerance& tol) {
    if (charges.size() != amplitudes.size() || charges.empty())
        throw std::invalid_argument("make_rank_one_qrf: need one amplitude per charge");

    // canonicalize and sort by charge, amplitudes following
    std::vector<std::pair<Charge, cplx>> pairs;
    for (std::size_t i = 0; i < charges.size(); ++i)
        pairs.emplace_back(charge_canonical(group, charges[i]), amplitudes[i]);
    std::stable_sort(pairs.begin(), pairs.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < pairs.size(); ++i)
        if (pairs[i].first == pairs[i - 1].first)
            throw std::invalid_argument("make_rank_one_qrf: repeated charge " +
                                        to_string(pairs[i].first));

    const double mod0 = std::abs(pairs.front().second);
    if (mod0 <= 0.0)
        throw std::invalid_argument("make_rank_one_qrf: zero amplitude");
    for (const auto& [c, a] : pairs)
        if (std::abs(std::abs(a) - mod0) > 1e-12 * std::max(1.0, mod0))
            throw std::invalid_argument("make_rank_one_qrf: amplitudes must have equal modulus");

    Qrf f;
    std::vector<Charge> sorted;
    for (auto& [c, a] : pairs) {
        sorted.push_back(c);
        f.seed_amplitudes.push_back(a);
    }
    f.rep = make_rep(group, sorted);
    f.c = group.haar_total() * mod0 * mod0;

    // completeness: (1/c) sum_g |g><g| = id (finite groups, checked literally)
    if (group.is_finite()) {
        ComplexMatrix acc(f.dim(), f.dim());
        for (const FiniteElement& g : group.elements())
            acc += orientation_povm(f, g);
        if (distance(acc, ComplexMatrix::identity(f.dim())) > tol.equality_tol * f.dim())
            throw std::invalid_argument("make_rank_one_qrf: POVM completeness failed");
        // covariance on the factor generators
        for (std::size_t fac = 0; fac < group.num_factors(); ++fac) {
            FiniteElement gen(group.num_factors(), 0);
            gen[fac] = 1;
            ComplexMatrix u = rep_evaluate(f.rep, gen);
            for (const FiniteElement& g : group.elements()) {
                ComplexMatrix lhs = u * orientation_povm(f, g) * u.dagger();
                if (distance(lhs, orientation_povm(f, group.add(gen, g))) > 1e-9 * f.dim())
                    throw std::invalid_argument("make_rank_one_qrf: covariance failed");
            }
        }
    } else {
        // covariance spot-check at sample angles (completeness is exact by
        // the equal-modulus condition)
        const double th1 = 0.9, th2 = 2.3;
        ComplexMatrix u = rep_evaluate(f.rep, th1);
        ComplexMatrix lhs = u * orientation_povm(f, th2) * u.dagger();
        if (distance(lhs, orientation_povm(f, th1 + th2)) > 1e-9 * f.dim())
            throw std::invalid_argument("make_rank_one_qrf: covariance failed");
    }
    return f;
}

Qrf trivial_qrf(const SymmetryGroup& group) {
    Charge zero;
    zero.components.assign(group.num_factors(), 0);
    return make_rank_one_qrf(group, {zero}, {cplx(1.0, 0.0)});
}

Qrf regular_qrf(const SymmetryGroup& group) {
    if (!group.is_finite())
        throw std::invalid_argument("regular_qrf: the U(1) regular frame is improper; "
                                    "use a Z_n window instead");
    auto charges = dual_charges(group);
    const double amp = 1.0 / std::sqrt(static_cast<double>(group.order()));
    return make_rank_one_qrf(group, charges, std::vector<cplx>(charges.size(), cplx(amp, 0.0)));
}

namespace {

template <typename Elem>
ComplexMatrix orientation_state_impl(const Qrf& f, const Elem& g) {
    ComplexMatrix v(f.dim(), 1);
    for (std::size_t i = 0; i < f.dim(); ++i)
        v(i, 0) = f.seed_amplitudes[i] * charge_phase(f.group(), f.rep.charges[i], g);
    return v;
}

} // namespace

ComplexMatrix orientation_state(const Qrf& f, const FiniteElement& g) {
    return orientation_state_impl(f, g);
}
ComplexMatrix orientation_state(const Qrf& f, double theta) {
    return orientation_state_impl(f, theta);
}

ComplexMatrix orientation_povm(const Qrf& f, const FiniteElement& g) {
    ComplexMatrix p = state_projector(orientation_state(f, g));
    p *= cplx(1.0 / f.c, 0.0);
    return p;
}
ComplexMatrix orientation_povm(const Qrf& f, double theta) {
    ComplexMatrix p = state_projector(orientation_state(f, theta));
    p *= cplx(1.0 / f.c, 0.0);
    return p;
}

double orientation_overlap_ratio(const Qrf& f) {
    if (!f.group().is_finite())
        throw std::invalid_argument("orientation_overlap_ratio: finite groups only");
    const ComplexMatrix e = orientation_state(f, f.group().identity_element());
    const double denom = std::norm(hs_inner(e, e));
    // ideality needs tr(gamma(g)|e><e|) to vanish for EVERY g != e, so the
    // flag is driven by the largest overlap
    double worst = 0.0;
    for (const FiniteElement& g : f.group().elements()) {
        bool is_id = true;
        for (long x : g)
            if (x != 0)
                is_id = false;
        if (is_id)
            continue;
        worst = std::max(worst, std::norm(hs_inner(orientation_state(f, g), e)) / denom);
    }
    return worst;
}

bool is_ideal(const Qrf& f, const Tolerance& tol) {
    return orientation_overlap_ratio(f) < tol.rank_tol;
}

// ---------------------------------------------------------------------------
// Relationalization
// ---------------------------------------------------------------------------

ComplexMatrix relationalize(const Qrf& frame, const ComplexMatrix& op_s,
                            const UnitaryRep& rep_s) {
    if (!(frame.group() == rep_s.group))
        throw std::invalid_argument("relationalize: group mismatch");
    if (op_s.rows() != rep_s.dim || op_s.cols() != rep_s.dim)
        throw std::invalid_argument("relationalize: operator dimension mismatch");

    const std::size_t da = frame.dim(), ds = rep_s.dim;
    if (frame.group().is_finite()) {
        ComplexMatrix acc(da * ds, da * ds);
        for (const FiniteElement& g : frame.group().elements()) {
            ComplexMatrix us = rep_evaluate(rep_s, g);
            acc += kron(orientation_povm(frame, g), us * op_s * us.dagger());
        }
        return acc;
    }

    // U(1): exact via charge conservation. Work in the S charge basis.
    const ComplexMatrix bs = rep_s.basis_matrix();
    ComplexMatrix opc = rep_s.basis_change ? bs.dagger() * op_s * bs : op_s;
    ComplexMatrix out(da * ds, da * ds);
    const double w0 = kTwoPi / frame.c;
    for (std::size_t pr = 0; pr < da; ++pr)
        for (std::size_t pc = 0; pc < da; ++pc) {
            const cplx wa = w0 * frame.seed_amplitudes[pr] * std::conj(frame.seed_amplitudes[pc]);
            const long dp = frame.rep.charges[pr].components[0] -
                            frame.rep.charges[pc].components[0];
            for (std::size_t sr = 0; sr < ds; ++sr)
                for (std::size_t sc = 0; sc < ds; ++sc) {
                    // nonzero only on total-charge-conserving elements
                    if (rep_s.charges[sr].components[0] - rep_s.charges[sc].components[0] + dp != 0)
                        continue;
                    out(pr * ds + sr, pc * ds + sc) = wa * opc(sr, sc);
                }
        }
    if (!rep_s.basis_change)
        return out;
    ComplexMatrix big = kron(ComplexMatrix::identity(da), bs);
    return big * out * big.dagger();
}

OperatorAlgebra relational_algebra(const Qrf& frame, const UnitaryRep& rep_s,
                                   const Tolerance& tol) {
    std::vector<ComplexMatrix> gens;
    gens.reserve(rep_s.dim * rep_s.dim);
    for (std::size_t i = 0; i < rep_s.dim; ++i)
        for (std::size_t j = 0; j < rep_s.dim; ++j) {
            ComplexMatrix e(rep_s.dim, rep_s.dim);
            e(i, j) = 1.0;
            gens.push_back(relationalize(frame, e, rep_s));
        }
    return generate_algebra(gens, tol);
}

BackReactionReport back_reaction_report(const Qrf& frame, const UnitaryRep& rep_s,
                                        const Tolerance& tol) {
    std::vector<ComplexMatrix> images;
    for (std::size_t i = 0; i < rep_s.dim; ++i)
        for (std::size_t j = 0; j < rep_s.dim; ++j) {
            ComplexMatrix e(rep_s.dim, rep_s.dim);
            e(i, j) = 1.0;
            images.push_back(relationalize(frame, e, rep_s));
        }
    BackReactionReport rep;
    rep.relational_span_dim = span_rank(images, tol);
    rep.algebra_dim = generate_algebra(images, tol).dim();
    rep.system_operator_dim = rep_s.dim * rep_s.dim;
    rep.strict_inclusion = rep.relational_span_dim < rep.algebra_dim;
    return rep;
}

// ---------------------------------------------------------------------------
// kappa
// ---------------------------------------------------------------------------

std::vector<Charge> kappa(const ChargeSpectrum& sigma_s, const ChargeSpectrum& sigma_a,
                          const Charge& r) {
    if (!(sigma_s.group == sigma_a.group))
        throw std::invalid_argument("kappa: group mismatch");
    std::vector<Charge> out;
    for (const auto& [q, mult] : sigma_s.mult) {
        const Charge p = charge_sub(sigma_s.group, r, q);
        if (sigma_a.mult.count(p))
            out.push_back(q);
    }
    return out; // map iteration is ascending
}

std::vector<KappaSector> kappa_sectors(const Qrf& frame, const UnitaryRep& rep_s) {
    const ChargeSpectrum sa = spectrum_of(frame.rep);
    const ChargeSpectrum ss = spectrum_of(rep_s);
    const ChargeSpectrum sas = spectrum_sum(sa, ss);

    std::map<std::vector<Charge>, std::vector<Charge>> by_k;
    for (const auto& [r, mult] : sas.mult)
        by_k[kappa(ss, sa, r)].push_back(r);

    std::vector<KappaSector> sectors;
    for (auto& [k, pre] : by_k) {
        KappaSector sec;
        sec.k = k;
        sec.preimage = pre; // ascending by construction
        sec.block_dim = 0;
        for (const Charge& q : k)
            sec.block_dim += ss.mult.at(q);
        sectors.push_back(std::move(sec));
    }
    std::sort(sectors.begin(), sectors.end(), [](const KappaSector& a, const KappaSector& b) {
        return a.preimage.front() < b.preimage.front();
    });
    return sectors;
}

// ---------------------------------------------------------------------------
// Jumps
// ---------------------------------------------------------------------------

namespace {

// analytic jump in the charge bases: A-charge p (x) S-charge q  ->
// window charge p+q (x) same S content, with the seed phase of p
ComplexMatrix analytic_jump_matrix(const Qrf& frame, const UnitaryRep& rep_s,
                                   const std::vector<Charge>& window) {
    const std::size_t da = frame.dim(), ds = rep_s.dim, nw = window.size();
    ComplexMatrix v(nw * ds, da * ds);
    for (std::size_t p = 0; p < da; ++p) {
        const cplx phase = std::conj(frame.seed_amplitudes[p]) / std::abs(frame.seed_amplitudes[p]);
        std::set<Charge> seen;
        for (const Charge& q : rep_s.charges) {
            if (seen.count(q))
                continue;
            seen.insert(q);
            const Charge r = charge_add(frame.group(), frame.rep.charges[p], q);
            const std::size_t w = index_of_charge(window, r);
            const ComplexMatrix pq = charge_projector(rep_s, q);
            for (std::size_t i = 0; i < ds; ++i)
                for (std::size_t j = 0; j < ds; ++j)
                    if (pq(i, j) != cplx(0.0, 0.0))
                        v(w * ds + i, p * ds + j) += phase * pq(i, j);
        }
    }
    return v;
}

} // namespace

ComplexMatrix regular_w(const SymmetryGroup& group, const UnitaryRep& rep_s) {
    const auto elems = group.elements();
    const std::size_t n = elems.size(), ds = rep_s.dim;
    ComplexMatrix w(n * ds, n * ds);
    for (std::size_t g = 0; g < n; ++g) {
        ComplexMatrix us = rep_evaluate(rep_s, elems[g]);
        for (std::size_t i = 0; i < ds; ++i)
            for (std::size_t j = 0; j < ds; ++j)
                w(g * ds + i, g * ds + j) = us(i, j);
    }
    return w;
}

ComplexMatrix left_regular(const SymmetryGroup& group, const FiniteElement& g) {
    const auto elems = group.elements();
    std::map<FiniteElement, std::size_t> index;
    for (std::size_t i = 0; i < elems.size(); ++i)
        index[elems[i]] = i;
    ComplexMatrix l(elems.size(), elems.size());
    for (std::size_t i = 0; i < elems.size(); ++i)
        l(index.at(group.add(g, elems[i])), i) = 1.0;
    return l;
}

ComplexMatrix right_regular(const SymmetryGroup& group, const FiniteElement& g) {
    const auto elems = group.elements();
    std::map<FiniteElement, std::size_t> index;
    for (std::size_t i = 0; i < elems.size(); ++i)
        index[elems[i]] = i;
    ComplexMatrix r(elems.size(), elems.size());
    for (std::size_t i = 0; i < elems.size(); ++i)
        r(index.at(group.add(elems[i], group.negate(g))), i) = 1.0;
    return r;
}

ComplexMatrix fourier_matrix(const SymmetryGroup& group) {
    const auto elems = group.elements();
    const auto charges = dual_charges(group);
    const double s = 1.0 / std::sqrt(static_cast<double>(elems.size()));
    ComplexMatrix f(charges.size(), elems.size());
    for (std::size_t r = 0; r < charges.size(); ++r)
        for (std::size_t g = 0; g < elems.size(); ++g)
            f(r, g) = s * charge_phase(group, charges[r], elems[g]);
    return f;
}

ComplexMatrix embedding_map(const Qrf& frame) {
    if (!frame.group().is_finite())
        throw std::invalid_argument("embedding_map: defined for finite groups; embed U(1) "
                                    "instances in an anti-aliased Z_n window first");
    const auto elems = frame.group().elements();
    const double inv_sqrt_c = 1.0 / std::sqrt(frame.c);
    ComplexMatrix e(elems.size(), frame.dim());
    for (std::size_t g = 0; g < elems.size(); ++g)
        for (std::size_t p = 0; p < frame.dim(); ++p)
            e(g, p) = inv_sqrt_c * std::conj(frame.seed_amplitudes[p]) *
                      std::conj(charge_phase(frame.group(), frame.rep.charges[p], elems[g]));
    return e;
}

ComplexMatrix jump_projector(const Qrf& frame, const UnitaryRep& rep_s) {
    const ComplexMatrix e = embedding_map(frame);
    const ComplexMatrix w = regular_w(frame.group(), rep_s);
    const ComplexMatrix ee = e * e.dagger();
    return w.dagger() * kron(ee, ComplexMatrix::identity(rep_s.dim)) * w;
}

JumpMap abelian_jump(const Qrf& frame, const UnitaryRep& rep_s, const Tolerance& tol,
                     bool verify) {
    if (!(frame.group() == rep_s.group))
        throw std::invalid_argument("abelian_jump: group mismatch");

    const std::size_t da = frame.dim(), ds = rep_s.dim;

    JumpMap jump;
    jump.source_dim = da * ds;
    jump.sectors = kappa_sectors(frame, rep_s);

    // window: finite -> the full dual group; U(1) -> sigma_A union sigma_AS
    if (frame.group().is_finite()) {
        jump.window = dual_charges(frame.group());
    } else {
        std::set<Charge> w;
        for (const Charge& c : frame.rep.charges)
            w.insert(c);
        for (const KappaSector& sec : jump.sectors)
            for (const Charge& r : sec.preimage)
                w.insert(r);
        jump.window.assign(w.begin(), w.end());
    }
    jump.target_dim = jump.window.size() * ds;

    jump.matrix = analytic_jump_matrix(frame, rep_s, jump.window);

    if (frame.group().is_finite()) {
        // the explicit construction W^dag (E (x) id), rotated to the charge
        // basis, must reproduce the analytic matrix
        ComplexMatrix v_pos = regular_w(frame.group(), rep_s).dagger() *
                              kron(embedding_map(frame), ComplexMatrix::identity(ds));
        ComplexMatrix v_charge =
            kron(fourier_matrix(frame.group()), ComplexMatrix::identity(ds)) * v_pos;
        if (distance(v_charge, jump.matrix) > 1e-9 * std::max<std::size_t>(1, jump.target_dim))
            throw std::runtime_error("abelian_jump: explicit and analytic constructions disagree");
    }

    if (distance(jump.matrix.dagger() * jump.matrix, ComplexMatrix::identity(da * ds)) > 1e-9 * da * ds)
        throw std::runtime_error("abelian_jump: jump is not an isometry");

    // analytic sector decomposition on the target space
    jump.decomposition.ambient_dim = jump.target_dim;
    for (std::size_t si = 0; si < jump.sectors.size(); ++si) {
        const KappaSector& ks = jump.sectors[si];
        Sector sec;
        sec.charges = ks.preimage;
        sec.block_dim = ks.block_dim;
        sec.multiplicity_total = ks.preimage.size();
        for (const Charge& r : ks.preimage)
            sec.multiplicity_dims[r] = 1;

        ComplexMatrix pk(ds, ds);
        for (const Charge& q : ks.k)
            pk += charge_projector(rep_s, q);
        ComplexMatrix p(jump.target_dim, jump.target_dim);
        for (const Charge& r : ks.preimage) {
            const std::size_t w = index_of_charge(jump.window, r);
            for (std::size_t i = 0; i < ds; ++i)
                for (std::size_t j = 0; j < ds; ++j)
                    p(w * ds + i, w * ds + j) = pk(i, j);
        }
        sec.central_projector = std::move(p);

        // S-side orthonormal columns of the k block, charge-basis order
        const ComplexMatrix bs = rep_s.basis_matrix();
        std::vector<std::size_t> cols;
        for (std::size_t idx = 0; idx < ds; ++idx)
            for (const Charge& q : ks.k)
                if (rep_s.charges[idx] == q) {
                    cols.push_back(idx);
                    break;
                }
        const std::size_t m = cols.size(); // == block_dim
        const std::size_t n = ks.preimage.size();
        ComplexMatrix iso(n * m, jump.target_dim);
        for (std::size_t a = 0; a < n; ++a) {
            const std::size_t w = index_of_charge(jump.window, ks.preimage[a]);
            for (std::size_t b = 0; b < m; ++b)
                for (std::size_t s = 0; s < ds; ++s)
                    iso(a * m + b, w * ds + s) = std::conj(bs(s, cols[b]));
        }
        sec.isometry = std::move(iso);
        sec.k_label = "{";
        for (std::size_t i = 0; i < ks.k.size(); ++i) {
            if (i)
                sec.k_label += ",";
            sec.k_label += to_string(ks.k[i]);
        }
        sec.k_label += "}";
        jump.decomposition.sectors.push_back(std::move(sec));
    }

    if (verify) {
        OperatorAlgebra alg = relational_algebra(frame, rep_s, tol);
        UnitaryRep joint = kron_rep(frame.rep, rep_s);
        SectorDecomposition numeric = full_decomposition(alg, &joint, tol);
        if (numeric.sectors.size() != jump.sectors.size())
            throw std::runtime_error("abelian_jump: sector count disagrees with the numeric "
                                     "decomposition");
        for (std::size_t i = 0; i < numeric.sectors.size(); ++i) {
            const Sector& ns = numeric.sectors[i];
            const KappaSector& as = jump.sectors[i];
            if (ns.block_dim != as.block_dim || ns.charges != as.preimage)
                throw std::runtime_error("abelian_jump: sector structure disagrees with the "
                                         "numeric decomposition");
            for (const auto& [r, mdim] : ns.multiplicity_dims)
                if (mdim != 1)
                    throw std::runtime_error("abelian_jump: unexpected multiplicity > 1");
        }
    }
    return jump;
}

ComplexMatrix jump_relational(const JumpMap& jump, const Qrf& frame,
                              const ComplexMatrix& op_s, const UnitaryRep& rep_s,
                              const Tolerance& tol) {
    ComplexMatrix rel = relationalize(frame, op_s, rep_s);
    ComplexMatrix conj = jump.matrix * rel * jump.matrix.dagger();

    // direct block formula
    const std::size_t ds = rep_s.dim;
    ComplexMatrix direct(jump.target_dim, jump.target_dim);
    for (const KappaSector& ks : jump.sectors) {
        ComplexMatrix pk(ds, ds);
        for (const Charge& q : ks.k)
            pk += charge_projector(rep_s, q);
        ComplexMatrix blocked = pk * op_s * pk;
        for (const Charge& r : ks.preimage) {
            const std::size_t w = index_of_charge(jump.window, r);
            for (std::size_t i = 0; i < ds; ++i)
                for (std::size_t j = 0; j < ds; ++j)
                    direct(w * ds + i, w * ds + j) += blocked(i, j);
        }
    }
    if (distance(conj, direct) >
        1e-8 * std::max(1.0, op_s.frobenius_norm()) * static_cast<double>(jump.target_dim))
        throw std::runtime_error("jump_relational: conjugated operator disagrees with the "
                                 "block formula");
    (void)tol;
    return conj;
}

ComplexMatrix qrf_transformation(const JumpMap& jump_a, const JumpMap& jump_b) {
    if (jump_a.source_dim != jump_b.source_dim)
        throw std::invalid_argument("qrf_transformation: source space mismatch");
    return jump_b.matrix * jump_a.matrix.dagger();
}

ComplexMatrix tensor_permutation(const std::vector<std::size_t>& dims,
                                 const std::vector<std::size_t>& perm) {
    if (dims.size() != perm.size())
        throw std::invalid_argument("tensor_permutation: size mismatch");
    std::size_t total = 1;
    for (std::size_t d : dims)
        total *= d;
    // strides in the source ordering
    std::vector<std::size_t> stride(dims.size(), 1);
    for (std::size_t f = dims.size(); f-- > 1;)
        stride[f - 1] = stride[f] * dims[f];
    // target dims/strides
    std::vector<std::size_t> tdims(dims.size());
    for (std::size_t f = 0; f < dims.size(); ++f)
        tdims[f] = dims[perm[f]];
    std::vector<std::size_t> tstride(dims.size(), 1);
    for (std::size_t f = dims.size(); f-- > 1;)
        tstride[f - 1] = tstride[f] * tdims[f];

    ComplexMatrix p(total, total);
    std::vector<std::size_t> idx(dims.size(), 0);
    for (std::size_t src = 0; src < total; ++src) {
        std::size_t rem = src;
        for (std::size_t f = 0; f < dims.size(); ++f) {
            idx[f] = rem / stride[f];
            rem %= stride[f];
        }
        std::size_t dst = 0;
        for (std::size_t f = 0; f < dims.size(); ++f)
            dst += idx[perm[f]] * tstride[f];
        p(dst, src) = 1.0;
    }
    return p;
}

ComplexMatrix regular_transformation_closed_form(const SymmetryGroup& group,
                                                 const UnitaryRep& rep_q) {
    const auto elems = group.elements();
    const std::size_t n = elems.size(), dq = rep_q.dim;
    std::map<FiniteElement, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i)
        index[elems[i]] = i;

    ComplexMatrix v(n * n * dq, n * n * dq);
    for (std::size_t gi = 0; gi < n; ++gi) {
        const FiniteElement& g = elems[gi];
        const ComplexMatrix l = left_regular(group, g);
        const ComplexMatrix uq = rep_evaluate(rep_q, g).dagger();
        const std::size_t neg = index.at(group.negate(g));
        // term: L(g) (x) |-g><g| (x) U_Q^dag(g)
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) {
                if (l(a, b) == cplx(0.0, 0.0))
                    continue;
                for (std::size_t i = 0; i < dq; ++i)
                    for (std::size_t j = 0; j < dq; ++j)
                        v((a * n + neg) * dq + i, (b * n + gi) * dq + j) += l(a, b) * uq(i, j);
            }
    }
    return v;
}

// ---------------------------------------------------------------------------
// Perspective-neutral restriction
// ---------------------------------------------------------------------------

PnCheck pn_restriction_check(const Qrf& frame, const UnitaryRep& rep_s, const Tolerance& tol) {
    if (!frame.group().is_finite())
        throw std::invalid_argument("pn_restriction_check: finite groups only");
    const std::size_t ds = rep_s.dim;
    const auto elems = frame.group().elements();

    UnitaryRep joint = kron_rep(frame.rep, rep_s);
    Charge zero;
    zero.components.assign(frame.group().num_factors(), 0);
    ComplexMatrix pi0_charge = charge_projector(joint, zero);
    if (pi0_charge.trace().real() < 0.5)
        throw std::invalid_argument("pn_restriction_check: empty r=0 sector");

    ComplexMatrix pi0_sum(joint.dim, joint.dim);
    for (const FiniteElement& g : elems)
        pi0_sum += kron(rep_evaluate(frame.rep, g), rep_evaluate(rep_s, g));
    pi0_sum *= cplx(1.0 / static_cast<double>(elems.size()), 0.0);

    PnCheck out;
    out.projector_residual = distance(pi0_sum, pi0_charge);

    ComplexMatrix v_pos = regular_w(frame.group(), rep_s).dagger() *
                          kron(embedding_map(frame), ComplexMatrix::identity(ds));
    ComplexMatrix lhs = v_pos * pi0_sum;

    // (1/sqrt c) |0>_regular <e|_A (x) id_S, |0> = sum_g |g> (unnormalized);
    // the closed form describes the map on the r=0 domain, so the projector
    // is applied to it as well
    ComplexMatrix closed(elems.size() * ds, frame.dim() * ds);
    const double s = 1.0 / std::sqrt(frame.c);
    for (std::size_t g = 0; g < elems.size(); ++g)
        for (std::size_t p = 0; p < frame.dim(); ++p)
            for (std::size_t i = 0; i < ds; ++i)
                closed(g * ds + i, p * ds + i) = s * std::conj(frame.seed_amplitudes[p]);
    ComplexMatrix rhs = closed * pi0_sum;

    double worst = 0.0;
    for (std::size_t i = 0; i < lhs.size(); ++i)
        worst = std::max(worst, std::abs(lhs.data()[i] - rhs.data()[i]));
    out.jump_residual = worst;
    out.ok = out.projector_residual < 1e-9 * joint.dim && out.jump_residual < tol.equality_tol * 10;
    return out;
}

// ---------------------------------------------------------------------------
// Effective states and reduced relational states
// ---------------------------------------------------------------------------

EffectiveState effective_state(const Qrf& frame, const ComplexMatrix& rho_a,
                               const ComplexMatrix& sigma_s, const UnitaryRep& rep_s) {
    if (rho_a.rows() != frame.dim() || sigma_s.rows() != rep_s.dim)
        throw std::invalid_argument("effective_state: dimension mismatch");
    auto check_state = [](const ComplexMatrix& m, const char* name) {
        if (std::abs(m.trace() - cplx(1.0, 0.0)) > 1e-8 ||
            distance(m, m.dagger()) > 1e-8 * std::max(1.0, m.frobenius_norm()))
            throw std::invalid_argument(std::string("effective_state: ") + name +
                                        " is not a density matrix");
        EigResult eig = hermitian_eig(m);
        if (eig.values.front() < -1e-8)
            throw std::invalid_argument(std::string("effective_state: ") + name +
                                        " is not positive semidefinite");
    };
    check_state(rho_a, "rho_A");
    check_state(sigma_s, "sigma_S");

    EffectiveState out;
    if (frame.group().is_finite()) {
        const auto elems = frame.group().elements();
        ComplexMatrix acc(rep_s.dim, rep_s.dim);
        for (const FiniteElement& g : elems) {
            const double p = (orientation_povm(frame, g) * rho_a).trace().real();
            out.p_finite.push_back(p);
            ComplexMatrix us = rep_evaluate(rep_s, g);
            ComplexMatrix term = us.dagger() * sigma_s * us;
            term *= cplx(p, 0.0);
            acc += term;
        }
        out.state = std::move(acc);
        return out;
    }

    // U(1): the theta-integral collapses by Schur orthogonality; the result
    // reweights sigma's charge-basis elements by w(q_row - q_col)
    const ComplexMatrix bs = rep_s.basis_matrix();
    ComplexMatrix sig_c = rep_s.basis_change ? bs.dagger() * sigma_s * bs : sigma_s;
    ComplexMatrix res(rep_s.dim, rep_s.dim);
    const double w0 = kTwoPi / frame.c;
    for (std::size_t i = 0; i < rep_s.dim; ++i)
        for (std::size_t j = 0; j < rep_s.dim; ++j) {
            const long delta =
                rep_s.charges[i].components[0] - rep_s.charges[j].components[0];
            cplx w = 0.0;
            for (std::size_t p = 0; p < frame.dim(); ++p) {
                const long pp = frame.rep.charges[p].components[0];
                // need frame charge p' = p + delta present
                for (std::size_t p2 = 0; p2 < frame.dim(); ++p2)
                    if (frame.rep.charges[p2].components[0] == pp + delta) {
                        w += std::conj(frame.seed_amplitudes[p]) * frame.seed_amplitudes[p2] *
                             rho_a(p, p2);
                        break;
                    }
            }
            res(i, j) = w0 * w * sig_c(i, j);
        }
    out.state = rep_s.basis_change ? bs * res * bs.dagger() : res;

    const Qrf frame_copy = frame;
    const ComplexMatrix rho_copy = rho_a;
    out.p_u1 = [frame_copy, rho_copy](double theta) {
        return (orientation_povm(frame_copy, theta) * rho_copy).trace().real();
    };
    return out;
}

ComplexMatrix reduced_relational_state(const ComplexMatrix& state, const OperatorAlgebra& alg,
                                       const UnitaryRep& rep, const Tolerance& tol) {
    if (std::abs(state.trace() - cplx(1.0, 0.0)) > 1e-8)
        throw std::invalid_argument("reduced_relational_state: state trace != 1");
    ComplexMatrix twirled = g_twirl(rep, state);
    ComplexMatrix red = project_onto_span(twirled, alg.basis);
    // symmetrize roundoff
    ComplexMatrix herm = red.dagger();
    herm += red;
    herm *= cplx(0.5, 0.0);

    EigResult eig = hermitian_eig(herm, tol);
    if (eig.values.front() < -100 * tol.equality_tol) {
        std::ostringstream oss;
        oss << "reduced_relational_state: projection is not positive; eigenvalues:";
        for (double v : eig.values)
            oss << " " << v;
        throw std::runtime_error(oss.str());
    }
    if (std::abs(herm.trace() - cplx(1.0, 0.0)) > 1e-7)
        throw std::runtime_error("reduced_relational_state: projection does not have unit trace");
    return herm;
}

// ---------------------------------------------------------------------------
// Bipartite sector analysis
// ---------------------------------------------------------------------------

std::vector<BipartiteSector> bipartite_sector_analysis(const Qrf& frame,
                                                       const UnitaryRep& rep_s1,
                                                       const UnitaryRep& rep_s2, Rng* rng_in) {
    Rng local(Rng::kDefaultSeed ^ 0xB1BA27u);
    Rng& rng = rng_in ? *rng_in : local;
    const UnitaryRep joint = kron_rep(rep_s1, rep_s2);
    auto sectors = kappa_sectors(frame, joint);
    const ChargeSpectrum s1 = spectrum_of(rep_s1), s2 = spectrum_of(rep_s2);

    ComplexMatrix x1 = ComplexMatrix::random(rep_s1.dim, rep_s1.dim, rng);
    ComplexMatrix x2 = ComplexMatrix::random(rep_s2.dim, rep_s2.dim, rng);

    std::vector<BipartiteSector> out;
    for (const KappaSector& ks : sectors) {
        BipartiteSector bs;
        bs.k = ks.k;
        std::set<Charge> kset(ks.k.begin(), ks.k.end());
        std::set<Charge> x1set, x2set;
        for (const auto& [q1, m1] : s1.mult)
            for (const auto& [q2, m2] : s2.mult)
                if (kset.count(charge_add(frame.group(), q1, q2))) {
                    bs.solutions.emplace_back(q1, q2);
                    x1set.insert(q1);
                    x2set.insert(q2);
                }
        bs.is_product = bs.solutions.size() == x1set.size() * x2set.size();
        if (bs.is_product) {
            bs.x1.assign(x1set.begin(), x1set.end());
            bs.x2.assign(x2set.begin(), x2set.end());
        }

        // commutator of the two blocked operators on H_S
        ComplexMatrix pk(joint.dim, joint.dim);
        for (const Charge& q : ks.k)
            pk += charge_projector(joint, q);
        ComplexMatrix a = pk * kron(x1, ComplexMatrix::identity(rep_s2.dim)) * pk;
        ComplexMatrix b = pk * kron(ComplexMatrix::identity(rep_s1.dim), x2) * pk;
        ComplexMatrix lhs = a * b - b * a;
        bs.commutator_norm = lhs.frobenius_norm();

        // characteristic-function formula
        ComplexMatrix rhs(joint.dim, joint.dim);
        auto chi = [&](const Charge& q) { return kset.count(q) ? 1.0 : 0.0; };
        for (const auto& [q1, q2] : bs.solutions)
            for (const auto& [q1p, q2p] : bs.solutions) {
                const double weight = chi(charge_add(frame.group(), q1p, q2)) -
                                      chi(charge_add(frame.group(), q1, q2p));
                if (weight == 0.0)
                    continue;
                ComplexMatrix t1 =
                    charge_projector(rep_s1, q1) * x1 * charge_projector(rep_s1, q1p);
                ComplexMatrix t2 =
                    charge_projector(rep_s2, q2) * x2 * charge_projector(rep_s2, q2p);
                ComplexMatrix term = kron(t1, t2);
                term *= cplx(weight, 0.0);
                rhs += term;
            }
        bs.formula_residual = distance(lhs, rhs);
        out.push_back(std::move(bs));
    }
    return out;
}

} // namespace qrf
