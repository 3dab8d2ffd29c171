#include "qrf/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "qrf/simd_kernels.hpp"

namespace qrf {

namespace {

constexpr int kMaxClosureRounds = 50;
constexpr int kMaxRedraws = 8;

// Generic Hermitian combination of a basis, used for eigen-splitting.
ComplexMatrix generic_hermitian(const std::vector<ComplexMatrix>& basis, Rng& rng) {
    ComplexMatrix h(basis.front().rows(), basis.front().cols());
    for (const ComplexMatrix& b : basis) {
        const cplx w = rng.gaussian_complex();
        simd::active().caxpy(h.data(), w, b.data(), h.size());
    }
    ComplexMatrix out = h.dagger();
    out += h;
    out *= cplx(0.5, 0.0);
    return out;
}

ComplexMatrix generic_element(const std::vector<ComplexMatrix>& basis, Rng& rng) {
    ComplexMatrix x(basis.front().rows(), basis.front().cols());
    for (const ComplexMatrix& b : basis)
        simd::active().caxpy(x.data(), rng.gaussian_complex(), b.data(), x.size());
    return x;
}

// Commutant basis of span(generators) restricted to span(coords), with a
// cheap generic-pair pass first and a verified fallback to the full
// generator list.
std::vector<ComplexMatrix> commutant_in_coords(const std::vector<ComplexMatrix>& generators,
                                               const std::vector<ComplexMatrix>& coords,
                                               const Tolerance& tol) {
    if (coords.empty())
        return {};
    if (generators.size() > 2) {
        Rng rng(Rng::kDefaultSeed ^ 0xC0117u);
        std::vector<ComplexMatrix> pair{generic_element(generators, rng),
                                        generic_element(generators, rng)};
        auto candidate = solve_commutant_in_span(pair, coords, tol);
        bool ok = true;
        for (const ComplexMatrix& x : candidate) {
            for (const ComplexMatrix& g : generators)
                if (commutator_norm(x, g) > 10.0 * tol.equality_tol * std::max(1.0, g.frobenius_norm())) {
                    ok = false;
                    break;
                }
            if (!ok)
                break;
        }
        if (ok)
            return candidate;
    }
    return solve_commutant_in_span(generators, coords, tol);
}

std::vector<ComplexMatrix> matrix_units(std::size_t d) {
    std::vector<ComplexMatrix> units;
    units.reserve(d * d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            ComplexMatrix e(d, d);
            e(i, j) = 1.0;
            units.push_back(std::move(e));
        }
    return units;
}

// Orthonormal columns spanning the image of an (approximate) orthogonal
// projector; deterministic via the eigendecomposition.
ComplexMatrix projector_image(const ComplexMatrix& p, const Tolerance& tol) {
    EigResult eig = hermitian_eig(p, tol);
    std::size_t rank = 0;
    for (double v : eig.values)
        if (v > 0.5)
            ++rank;
    ComplexMatrix cols(p.rows(), rank);
    std::size_t c = 0;
    for (std::size_t k = 0; k < eig.values.size(); ++k)
        if (eig.values[k] > 0.5) {
            for (std::size_t i = 0; i < p.rows(); ++i)
                cols(i, c) = eig.vectors(i, k);
            ++c;
        }
    return cols;
}

} // namespace

OperatorAlgebra make_operator_algebra(std::size_t ambient_dim,
                                      const std::vector<ComplexMatrix>& spanning,
                                      const Tolerance& tol) {
    OperatorAlgebra alg;
    alg.ambient_dim = ambient_dim;
    alg.basis = orthonormal_span(spanning, tol);
    alg.contains_identity =
        !alg.basis.empty() && in_span(ComplexMatrix::identity(ambient_dim), alg.basis, 1e-8);
    return alg;
}

double algebra_closure_residual(const OperatorAlgebra& alg, const Tolerance& tol) {
    (void)tol;
    double worst = 0.0;
    for (const ComplexMatrix& a : alg.basis) {
        ComplexMatrix ad = a.dagger();
        worst = std::max(worst, distance(ad, project_onto_span(ad, alg.basis)));
        for (const ComplexMatrix& b : alg.basis) {
            ComplexMatrix p = a * b;
            worst = std::max(worst, distance(p, project_onto_span(p, alg.basis)));
        }
    }
    return worst;
}

OperatorAlgebra generate_algebra(const std::vector<ComplexMatrix>& generators,
                                 const Tolerance& tol) {
    if (generators.empty())
        throw std::invalid_argument("generate_algebra: no generators");
    const std::size_t d = generators.front().rows();
    for (const ComplexMatrix& g : generators)
        if (g.rows() != d || g.cols() != d)
            throw std::invalid_argument("generate_algebra: generators must be square, same dim");

    std::vector<ComplexMatrix> seed{ComplexMatrix::identity(d)};
    for (const ComplexMatrix& g : generators) {
        seed.push_back(g);
        seed.push_back(g.dagger());
    }
    std::vector<ComplexMatrix> basis = orthonormal_span(seed, tol);

    const auto& K = simd::active();
    auto append_direction = [&](ComplexMatrix v) -> bool {
        // products of unit-norm basis elements below this are numerically zero
        const double n0 = v.frobenius_norm();
        if (n0 <= 1e-12)
            return false;
        v *= cplx(1.0 / n0, 0.0);
        for (int round = 0; round < 2; ++round)
            for (const ComplexMatrix& b : basis) {
                const cplx coeff = K.cdotc(b.data(), v.data(), v.size());
                K.caxpy(v.data(), -coeff, b.data(), v.size());
            }
        const double resid = v.frobenius_norm();
        if (resid <= tol.rank_tol)
            return false;
        v *= cplx(1.0 / resid, 0.0);
        basis.push_back(std::move(v));
        return true;
    };

    std::size_t new_begin = 0; // everything is new in the first round
    for (int round = 0; round < kMaxClosureRounds; ++round) {
        const std::size_t old_size = basis.size();
        for (std::size_t i = 0; i < old_size; ++i)
            for (std::size_t j = (i < new_begin ? new_begin : std::size_t{0}); j < old_size; ++j) {
                if (basis.size() >= d * d)
                    break;
                append_direction(basis[i] * basis[j]);
            }
        if (basis.size() == old_size || basis.size() >= d * d) {
            if (basis.size() >= d * d) {
                // saturated M_d; replace with the exact matrix-unit basis
                OperatorAlgebra alg;
                alg.ambient_dim = d;
                alg.basis = matrix_units(d);
                alg.contains_identity = true;
                return alg;
            }
            OperatorAlgebra alg;
            alg.ambient_dim = d;
            alg.basis = std::move(basis);
            alg.contains_identity = true;
            return alg;
        }
        new_begin = old_size;
    }
    throw std::runtime_error("generate_algebra: closure did not stabilize within 50 rounds");
}

OperatorAlgebra commutant(const OperatorAlgebra& alg, const Tolerance& tol) {
    const std::size_t d = alg.ambient_dim;
    auto basis = commutant_in_coords(alg.basis, matrix_units(d), tol);
    OperatorAlgebra out;
    out.ambient_dim = d;
    out.basis = orthonormal_span(basis, tol);
    out.contains_identity = true;
    return out;
}

OperatorAlgebra invariant_commutant(const OperatorAlgebra& alg, const UnitaryRep& rep,
                                    const Tolerance& tol) {
    for (const ComplexMatrix& b : alg.basis)
        if (distance(g_twirl(rep, b), b) > 1e-7)
            throw std::invalid_argument("invariant_commutant: algebra is not G-invariant");
    auto coords = invariant_operator_basis(rep);
    auto basis = commutant_in_coords(alg.basis, coords, tol);
    OperatorAlgebra out;
    out.ambient_dim = alg.ambient_dim;
    out.basis = orthonormal_span(basis, tol);
    out.contains_identity = true;
    return out;
}

OperatorAlgebra centre(const OperatorAlgebra& alg, const Tolerance& tol) {
    auto basis = commutant_in_coords(alg.basis, alg.basis, tol);
    OperatorAlgebra out;
    out.ambient_dim = alg.ambient_dim;
    out.basis = orthonormal_span(basis, tol);
    out.contains_identity = out.basis.empty()
                                ? false
                                : in_span(ComplexMatrix::identity(alg.ambient_dim), out.basis, 1e-8);
    return out;
}

std::vector<ComplexMatrix> central_decomposition(const OperatorAlgebra& alg,
                                                 const Tolerance& tol, Rng* rng_in) {
    Rng local(Rng::kDefaultSeed ^ 0x5EC70Bu);
    Rng& rng = rng_in ? *rng_in : local;
    OperatorAlgebra z = centre(alg, tol);
    if (z.basis.empty())
        throw std::runtime_error("central_decomposition: empty centre (no identity?)");
    const std::size_t want = z.dim();

    for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
        ComplexMatrix h = generic_hermitian(z.basis, rng);
        EigResult eig = hermitian_eig(h, tol);
        auto groups = group_eigenvalues(eig.values, tol.degeneracy_tol);
        if (groups.size() != want)
            continue; // degenerate draw
        std::vector<ComplexMatrix> projectors;
        bool ok = true;
        for (const auto& [b, e] : groups) {
            ComplexMatrix p(alg.ambient_dim, alg.ambient_dim);
            for (std::size_t k = b; k < e; ++k)
                for (std::size_t i = 0; i < alg.ambient_dim; ++i)
                    for (std::size_t j = 0; j < alg.ambient_dim; ++j)
                        p(i, j) += eig.vectors(i, k) * std::conj(eig.vectors(j, k));
            if (!in_span(p, z.basis, 1e-7)) {
                ok = false;
                break;
            }
            projectors.push_back(std::move(p));
        }
        if (!ok)
            continue;
        // deterministic order: ascending rank, then ascending first moment
        std::stable_sort(projectors.begin(), projectors.end(),
                         [](const ComplexMatrix& a, const ComplexMatrix& b) {
                             const double ra = a.trace().real(), rb = b.trace().real();
                             if (std::abs(ra - rb) > 0.5)
                                 return ra < rb;
                             double ma = 0, mb = 0;
                             for (std::size_t i = 0; i < a.rows(); ++i) {
                                 ma += i * a(i, i).real();
                                 mb += i * b(i, i).real();
                             }
                             return ma < mb;
                         });
        return projectors;
    }
    throw std::runtime_error(
        "central_decomposition: no generic draw separated the centre after 8 attempts "
        "(centre dim " + std::to_string(want) + ")");
}

FactorFactorization factorize_factor(const OperatorAlgebra& alg, const Tolerance& tol,
                                     Rng* rng_in) {
    Rng local(Rng::kDefaultSeed ^ 0xFAC702u);
    Rng& rng = rng_in ? *rng_in : local;
    const std::size_t d = alg.ambient_dim;

    {
        OperatorAlgebra z = centre(alg, tol);
        if (z.dim() != 1)
            throw std::invalid_argument("factorize_factor: centre is not trivial (dim " +
                                        std::to_string(z.dim()) + ")");
    }

    // --- (i) maximal family of mutually orthogonal minimal projectors -----
    // each projector is kept as an isometry of orthonormal columns
    std::vector<ComplexMatrix> blocks{ComplexMatrix::identity(d)};
    auto compressed_rank = [&](const ComplexMatrix& w) {
        std::vector<ComplexMatrix> comp;
        comp.reserve(alg.basis.size());
        for (const ComplexMatrix& b : alg.basis)
            comp.push_back(w.dagger() * b * w);
        return span_rank(comp, tol);
    };

    bool changed = true;
    int guard = 0;
    while (changed) {
        if (++guard > 4 * static_cast<int>(d) + 8)
            throw std::runtime_error("factorize_factor: minimality refinement exceeded bound");
        changed = false;
        for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
            if (blocks[bi].cols() == 1)
                continue; // rank-1 projector is always minimal
            if (compressed_rank(blocks[bi]) == 1)
                continue; // pi A pi = C pi: minimal
            const ComplexMatrix& w = blocks[bi];
            bool split_done = false;
            for (int attempt = 0; attempt < kMaxRedraws && !split_done; ++attempt) {
                ComplexMatrix h = generic_hermitian(alg.basis, rng);
                ComplexMatrix compressed = w.dagger() * h * w;
                EigResult eig = hermitian_eig(compressed, tol);
                auto groups = group_eigenvalues(eig.values, tol.degeneracy_tol);
                if (groups.size() < 2)
                    continue;
                std::vector<ComplexMatrix> children;
                bool member_ok = true;
                for (const auto& [gb, ge] : groups) {
                    ComplexMatrix v(w.cols(), ge - gb);
                    for (std::size_t c = gb; c < ge; ++c)
                        for (std::size_t i = 0; i < w.cols(); ++i)
                            v(i, c - gb) = eig.vectors(i, c);
                    ComplexMatrix child = w * v;
                    // spectral projectors of pi h pi must lie in span(alg)
                    ComplexMatrix proj = child * child.dagger();
                    if (!in_span(proj, alg.basis, 1e-7)) {
                        member_ok = false;
                        break;
                    }
                    children.push_back(std::move(child));
                }
                if (!member_ok)
                    continue;
                blocks.erase(blocks.begin() + bi);
                blocks.insert(blocks.end(), children.begin(), children.end());
                split_done = true;
                changed = true;
            }
            if (!split_done)
                throw std::runtime_error(
                    "factorize_factor: could not split a non-minimal projector after 8 draws");
            break; // restart the scan; `blocks` changed under us
        }
    }

    const std::size_t m = blocks.size();
    const std::size_t n = blocks.front().cols();
    for (const auto& w : blocks)
        if (w.cols() != n)
            throw std::runtime_error("factorize_factor: minimal projectors have unequal rank");
    if (n * m != d)
        throw std::runtime_error("factorize_factor: rank bookkeeping failed (n*m != dim)");

    // deterministic projector order: ascending first moment of the projector
    std::stable_sort(blocks.begin(), blocks.end(),
                     [](const ComplexMatrix& a, const ComplexMatrix& b) {
                         double ma = 0, mb = 0;
                         for (std::size_t c = 0; c < a.cols(); ++c)
                             for (std::size_t i = 0; i < a.rows(); ++i) {
                                 ma += i * std::norm(a(i, c));
                                 mb += i * std::norm(b(i, c));
                             }
                         return ma < mb;
                     });

    // --- (ii) partial isometries V_{i1} with V^dag V = pi_1 ----------------
    std::vector<ComplexMatrix> projs;
    projs.reserve(m);
    for (const auto& w : blocks)
        projs.push_back(w * w.dagger());

    std::vector<ComplexMatrix> v_i1(m);
    v_i1[0] = projs[0];
    for (std::size_t i = 1; i < m; ++i) {
        bool found = false;
        for (int attempt = 0; attempt < kMaxRedraws && !found; ++attempt) {
            ComplexMatrix x = generic_element(alg.basis, rng);
            ComplexMatrix v = projs[i] * x * projs[0];
            const double lambda = (v.dagger() * v).trace().real() / static_cast<double>(n);
            if (lambda < 1e-12)
                continue;
            v *= cplx(1.0 / std::sqrt(lambda), 0.0);
            if (distance(v.dagger() * v, projs[0]) > 1e-6)
                continue; // draw not generic enough
            // gauge: largest-magnitude entry real positive
            cplx top = 0.0;
            for (std::size_t idx = 0; idx < v.size(); ++idx)
                if (std::abs(v.data()[idx]) > std::abs(top))
                    top = v.data()[idx];
            v *= std::conj(top) / std::abs(top);
            v_i1[i] = std::move(v);
            found = true;
        }
        if (!found)
            throw std::runtime_error("factorize_factor: pi_i A pi_1 appears empty; "
                                     "algebra may not have trivial centre");
    }

    // --- (iii) assemble phi: |j>_{X'} (x) |i>_X  ->  V_{i1} |j>_1 ----------
    ComplexMatrix phi(d, n * m);
    for (std::size_t j = 0; j < n; ++j) {
        // |j>_1 = column j of blocks[0]
        ComplexMatrix col(d, 1);
        for (std::size_t r = 0; r < d; ++r)
            col(r, 0) = blocks[0](r, j);
        for (std::size_t i = 0; i < m; ++i) {
            ComplexMatrix out = v_i1[i] * col;
            for (std::size_t r = 0; r < d; ++r)
                phi(r, j * m + i) = out(r, 0);
        }
    }
    if (distance(phi.dagger() * phi, ComplexMatrix::identity(n * m)) > 1e-8)
        throw std::runtime_error("factorize_factor: assembled map is not unitary");

    FactorFactorization out;
    out.multiplicity_dim = n;
    out.block_dim = m;
    out.isometry = std::move(phi);
    return out;
}

std::size_t SectorDecomposition::total_reconstructed_dim() const {
    std::size_t total = 0;
    for (const Sector& s : sectors)
        total += s.multiplicity_total * s.block_dim;
    return total;
}

namespace {

std::string sector_label(const Sector& s, std::size_t index) {
    if (s.charges.empty())
        return "k" + std::to_string(index);
    std::string lbl = "{";
    for (std::size_t i = 0; i < s.charges.size(); ++i) {
        if (i)
            lbl += ",";
        lbl += to_string(s.charges[i]);
    }
    return lbl + "}";
}

} // namespace

SectorDecomposition full_decomposition(const OperatorAlgebra& alg, const UnitaryRep* rep,
                                       const Tolerance& tol, Rng* rng_in) {
    Rng local(Rng::kDefaultSeed ^ 0xDEC0DEu);
    Rng& rng = rng_in ? *rng_in : local;
    const std::size_t d = alg.ambient_dim;
    if (rep && rep->dim != d)
        throw std::invalid_argument("full_decomposition: rep dimension mismatch");
    if (rep)
        for (const ComplexMatrix& b : alg.basis)
            if (distance(g_twirl(*rep, b), b) > 1e-7)
                throw std::invalid_argument("full_decomposition: algebra is not G-invariant");

    auto projectors = central_decomposition(alg, tol, &rng);

    SectorDecomposition dec;
    dec.ambient_dim = d;

    for (const ComplexMatrix& p : projectors) {
        ComplexMatrix cols = projector_image(p, tol); // d x D_k
        const std::size_t dk = cols.cols();

        // restrict the algebra to the sector
        std::vector<ComplexMatrix> restricted;
        restricted.reserve(alg.basis.size());
        for (const ComplexMatrix& b : alg.basis)
            restricted.push_back(cols.dagger() * b * cols);
        OperatorAlgebra alg_k = make_operator_algebra(dk, restricted, tol);

        FactorFactorization fac = factorize_factor(alg_k, tol, &rng);
        const std::size_t n = fac.multiplicity_dim, m = fac.block_dim;

        Sector sec;
        sec.central_projector = p;
        sec.block_dim = m;
        sec.multiplicity_total = n;

        ComplexMatrix phi = cols * fac.isometry; // d x (n*m)

        if (rep) {
            // charge decomposition of the multiplicity factor:
            // phi^dag J phi = j (x) id_m per group factor
            const std::size_t nf = rep->group.num_factors();
            std::vector<ComplexMatrix> js;
            for (std::size_t f = 0; f < nf; ++f) {
                ComplexMatrix big = phi.dagger() * charge_operator(*rep, f) * phi;
                ComplexMatrix j = partial_trace(big, {n, m}, {0});
                j *= cplx(1.0 / static_cast<double>(m), 0.0);
                if (distance(big, kron(j, ComplexMatrix::identity(m))) > 1e-6)
                    throw std::runtime_error(
                        "full_decomposition: charge operator not of the form j (x) id on a sector");
                js.push_back(std::move(j));
            }
            // simultaneous eigenbasis of the commuting j's
            std::vector<std::pair<Charge, std::size_t>> index_charges(n);
            ComplexMatrix y = ComplexMatrix::identity(n);
            {
                // refine blocks per factor
                std::vector<ComplexMatrix> blocks{ComplexMatrix::identity(n)};
                for (const ComplexMatrix& j : js) {
                    std::vector<ComplexMatrix> next;
                    for (const ComplexMatrix& s : blocks) {
                        ComplexMatrix comp = s.dagger() * j * s;
                        EigResult eig = hermitian_eig(comp, tol);
                        auto groups = group_eigenvalues(eig.values, tol.degeneracy_tol);
                        for (const auto& [gb, ge] : groups) {
                            ComplexMatrix v(s.cols(), ge - gb);
                            for (std::size_t c = gb; c < ge; ++c)
                                for (std::size_t i = 0; i < s.cols(); ++i)
                                    v(i, c - gb) = eig.vectors(i, c);
                            next.push_back(s * v);
                        }
                    }
                    blocks = std::move(next);
                }
                // label each block with its charge and order ascending
                struct Lab {
                    Charge c;
                    ComplexMatrix b;
                };
                std::vector<Lab> labs;
                for (ComplexMatrix& s : blocks) {
                    Charge c;
                    for (const ComplexMatrix& j : js) {
                        ComplexMatrix comp = s.dagger() * j * s;
                        const double v = comp(0, 0).real();
                        const long r = std::lround(v);
                        if (std::abs(v - static_cast<double>(r)) > 1e-6)
                            throw std::runtime_error(
                                "full_decomposition: non-integer charge on multiplicity factor");
                        c.components.push_back(r);
                    }
                    labs.push_back({charge_canonical(rep->group, c), std::move(s)});
                }
                std::stable_sort(labs.begin(), labs.end(),
                                 [](const Lab& a, const Lab& b) { return a.c < b.c; });
                std::size_t col = 0;
                for (const Lab& lb : labs)
                    for (std::size_t c = 0; c < lb.b.cols(); ++c, ++col) {
                        index_charges[col] = {lb.c, col};
                        for (std::size_t i = 0; i < n; ++i)
                            y(i, col) = lb.b(i, c);
                    }
            }
            phi = phi * kron(y, ComplexMatrix::identity(m));
            for (const auto& [c, idx] : index_charges) {
                ++sec.multiplicity_dims[c];
            }
            for (const auto& [c, mult] : sec.multiplicity_dims)
                sec.charges.push_back(c);
        }

        sec.isometry = phi.dagger(); // (n*m) x d
        dec.sectors.push_back(std::move(sec));
    }

    // ---- verification of the three conjugation relations ------------------
    const double vtol = 1e-8;
    for (const Sector& sec : dec.sectors) {
        const std::size_t n = sec.multiplicity_total, m = sec.block_dim;
        // (a) algebra acts as id_n (x) M_m
        for (const ComplexMatrix& b : alg.basis) {
            ComplexMatrix conj = sec.isometry * b * sec.isometry.dagger();
            ComplexMatrix blk = partial_trace(conj, {n, m}, {1});
            blk *= cplx(1.0 / static_cast<double>(n), 0.0);
            if (distance(conj, kron(ComplexMatrix::identity(n), blk)) > vtol)
                throw std::runtime_error("full_decomposition: algebra conjugation failed");
        }
        // (b) commutant side: id (x) ... candidates commute with the algebra
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t bidx = 0; bidx < n; ++bidx) {
                if (rep) {
                    // only same-charge units are invariant-commutant members
                    Charge ca, cb;
                    std::size_t acc = 0;
                    for (const auto& [c, mult] : sec.multiplicity_dims) {
                        if (a >= acc && a < acc + mult)
                            ca = c;
                        if (bidx >= acc && bidx < acc + mult)
                            cb = c;
                        acc += mult;
                    }
                    if (!(ca == cb))
                        continue;
                }
                ComplexMatrix e(n, n);
                e(a, bidx) = 1.0;
                ComplexMatrix cand =
                    sec.isometry.dagger() * kron(e, ComplexMatrix::identity(m)) * sec.isometry;
                for (const ComplexMatrix& g : alg.basis)
                    if (commutator_norm(cand, g) > vtol)
                        throw std::runtime_error(
                            "full_decomposition: commutant conjugation failed");
            }
        // (c) the representation acts as a charge phase on the multiplicity factor
        if (rep) {
            std::vector<Charge> per_index;
            for (const auto& [c, mult] : sec.multiplicity_dims)
                for (std::size_t q = 0; q < mult; ++q)
                    per_index.push_back(c);
            auto check_rep = [&](const ComplexMatrix& u, auto&& phase_of) {
                ComplexMatrix conj = sec.isometry * u * sec.isometry.dagger();
                ComplexMatrix expect(n * m, n * m);
                for (std::size_t a = 0; a < n; ++a) {
                    const cplx ph = phase_of(per_index[a]);
                    for (std::size_t bq = 0; bq < m; ++bq)
                        expect(a * m + bq, a * m + bq) = ph;
                }
                if (distance(conj, expect) > vtol)
                    throw std::runtime_error(
                        "full_decomposition: representation conjugation failed");
            };
            if (rep->group.is_finite()) {
                for (std::size_t f = 0; f < rep->group.num_factors(); ++f) {
                    FiniteElement gen(rep->group.num_factors(), 0);
                    gen[f] = 1;
                    check_rep(rep_evaluate(*rep, gen), [&](const Charge& c) {
                        return charge_phase(rep->group, c, gen);
                    });
                }
            } else {
                const double theta = 0.831;
                check_rep(rep_evaluate(*rep, theta), [&](const Charge& c) {
                    return charge_phase(rep->group, c, theta);
                });
            }
        }
    }

    // deterministic sector order
    if (rep) {
        std::stable_sort(dec.sectors.begin(), dec.sectors.end(), [](const Sector& a, const Sector& b) {
            if (a.charges.empty() || b.charges.empty())
                return a.charges.size() < b.charges.size();
            return a.charges.front() < b.charges.front();
        });
    }
    for (std::size_t i = 0; i < dec.sectors.size(); ++i)
        dec.sectors[i].k_label = sector_label(dec.sectors[i], i);

    // completeness: projectors orthogonal and summing to the identity
    ComplexMatrix sum(d, d);
    for (const Sector& s : dec.sectors)
        sum += s.central_projector;
    if (distance(sum, ComplexMatrix::identity(d)) > 1e-8)
        throw std::runtime_error("full_decomposition: central projectors do not resolve identity");
    if (dec.total_reconstructed_dim() != d)
        throw std::runtime_error("full_decomposition: dimension bookkeeping failed");

    return dec;
}

bool double_commutant_check(const OperatorAlgebra& alg, const Tolerance& tol) {
    OperatorAlgebra cc = commutant(commutant(alg, tol), tol);
    if (cc.dim() != alg.dim())
        return false;
    for (const ComplexMatrix& b : cc.basis)
        if (!in_span(b, alg.basis, 1e-7))
            return false;
    return true;
}

} // namespace qrf
