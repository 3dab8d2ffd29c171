#include "qrf/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace qrf {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string charge_set_string(const std::vector<Charge>& cs) {
    std::string s = "{";
    for (std::size_t i = 0; i < cs.size(); ++i) {
        if (i)
            s += ",";
        s += to_string(cs[i]);
    }
    return s + "}";
}

struct CheckLine {
    std::string name;
    bool pass = false;
    double residual = 0.0;
};

void render_checks(std::ostringstream& out, nlohmann::json& machine,
                   const std::vector<CheckLine>& checks) {
    out << "verification:\n";
    nlohmann::json jchecks = nlohmann::json::array();
    for (const CheckLine& c : checks) {
        out << "  [" << (c.pass ? "pass" : "FAIL") << "] " << c.name
            << "  residual=" << fmt(c.residual) << "\n";
        jchecks.push_back({{"name", c.name}, {"pass", c.pass}, {"residual", c.residual}});
    }
    machine["verification"] = jchecks;
}

bool all_pass(const std::vector<CheckLine>& checks) {
    for (const CheckLine& c : checks)
        if (!c.pass)
            return false;
    return true;
}

std::string group_string(const SymmetryGroup& g) {
    if (!g.is_finite())
        return "U(1)";
    std::string s = "Z";
    for (std::size_t i = 0; i < g.moduli.size(); ++i) {
        if (i)
            s += " x Z";
        s += std::to_string(g.moduli[i]);
    }
    return s;
}

std::string spectrum_string(const ChargeSpectrum& sp) {
    std::string s = "{";
    bool first = true;
    for (const auto& [c, m] : sp.mult) {
        if (!first)
            s += ", ";
        first = false;
        s += to_string(c);
        if (m > 1)
            s += "x" + std::to_string(m);
    }
    return s + "}";
}

nlohmann::json spectrum_json(const ChargeSpectrum& sp) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& [c, m] : sp.mult)
        j.push_back({{"charge", to_string(c)}, {"multiplicity", m}});
    return j;
}

} // namespace

// ---------------------------------------------------------------------------
// decompose
// ---------------------------------------------------------------------------

CommandResult cmd_decompose(const InstanceSpec& spec) {
    CommandResult res;
    std::ostringstream out;

    const Qrf frame = spec.build_frame();
    const UnitaryRep rep_s = spec.build_system_rep();
    const UnitaryRep joint = kron_rep(frame.rep, rep_s);

    const ChargeSpectrum sa = spectrum_of(frame.rep);
    const ChargeSpectrum ss = spectrum_of(rep_s);
    const ChargeSpectrum sas = spectrum_sum(sa, ss);

    out << "instance:\n";
    out << "  group: " << group_string(spec.group) << "\n";
    out << "  frame dim " << frame.dim() << ", c = " << fmt(frame.c) << "\n";
    out << "  system dim " << rep_s.dim << "\n";
    out << "charge spectra:\n";
    out << "  sigma_A  = " << spectrum_string(sa) << "\n";
    out << "  sigma_S  = " << spectrum_string(ss) << "\n";
    out << "  sigma_AS = " << spectrum_string(sas) << "\n";
    res.machine["group"] = group_string(spec.group);
    res.machine["frame_dim"] = frame.dim();
    res.machine["frame_c"] = frame.c;
    res.machine["system_dim"] = rep_s.dim;
    res.machine["sigma_A"] = spectrum_json(sa);
    res.machine["sigma_S"] = spectrum_json(ss);
    res.machine["sigma_AS"] = spectrum_json(sas);

    std::vector<CheckLine> checks;

    // kappa table + jump (with internal cross-verification against the
    // numeric structural decomposition)
    bool kappa_consistent = true;
    std::string kappa_error;
    JumpMap jump;
    try {
        jump = abelian_jump(frame, rep_s, spec.tol, true);
    } catch (const std::runtime_error& e) {
        kappa_consistent = false;
        kappa_error = e.what();
        jump = abelian_jump(frame, rep_s, spec.tol, false);
    }
    checks.push_back({"kappa prediction matches numeric decomposition", kappa_consistent, 0.0});

    out << "regular-frame window: " << charge_set_string(jump.window) << "\n";
    res.machine["window"] = charge_set_string(jump.window);

    out << "kappa table (r -> kappa(r)):\n";
    nlohmann::json jkappa = nlohmann::json::array();
    for (const auto& [r, m] : sas.mult) {
        auto k = kappa(ss, sa, r);
        out << "  " << to_string(r) << " -> " << charge_set_string(k) << "\n";
        jkappa.push_back({{"r", to_string(r)}, {"kappa", charge_set_string(k)}});
    }
    res.machine["kappa"] = jkappa;

    out << "sectors:\n";
    nlohmann::json jsec = nlohmann::json::array();
    for (std::size_t i = 0; i < jump.sectors.size(); ++i) {
        const KappaSector& s = jump.sectors[i];
        out << "  sector " << i << ": k = " << charge_set_string(s.k)
            << ", charges = " << charge_set_string(s.preimage) << ", block dim " << s.block_dim
            << ", multiplicities 1 each\n";
        jsec.push_back({{"k", charge_set_string(s.k)},
                        {"charges", charge_set_string(s.preimage)},
                        {"block_dim", s.block_dim}});
    }
    res.machine["sectors"] = jsec;

    // algebra dimensions
    const BackReactionReport br = back_reaction_report(frame, rep_s, spec.tol);
    OperatorAlgebra alg = relational_algebra(frame, rep_s, spec.tol);
    OperatorAlgebra z = centre(alg, spec.tol);
    OperatorAlgebra invc = invariant_commutant(alg, joint, spec.tol);
    const std::size_t inv_dim = invariant_operator_basis(joint).size();

    out << "algebra dims:\n";
    out << "  relational span " << br.relational_span_dim << "\n";
    out << "  generated algebra " << br.algebra_dim << "\n";
    out << "  invariant commutant " << invc.dim() << "\n";
    out << "  centre " << z.dim() << "\n";
    out << "  invariant operators " << inv_dim << "\n";
    out << "back-reaction (span < algebra): " << (br.strict_inclusion ? "yes" : "no") << "\n";
    res.machine["dims"] = {{"relational_span", br.relational_span_dim},
                           {"algebra", br.algebra_dim},
                           {"invariant_commutant", invc.dim()},
                           {"centre", z.dim()},
                           {"invariant_operators", inv_dim}};
    res.machine["back_reaction"] = br.strict_inclusion;

    // verifications with residuals
    {
        ComplexMatrix vv = jump.matrix.dagger() * jump.matrix;
        const double r = distance(vv, ComplexMatrix::identity(jump.source_dim));
        checks.push_back({"jump isometry V^dag V = id", r < 1e-9 * jump.source_dim, r});
    }
    {
        double worst = 0.0;
        for (const ComplexMatrix& b : alg.basis)
            worst = std::max(worst, distance(g_twirl(joint, b), b));
        checks.push_back({"relational algebra is G-invariant", worst < 1e-8, worst});
    }
    {
        std::size_t sq = 0, mult_sq = 0, complete = 0;
        for (const KappaSector& s : jump.sectors) {
            sq += s.block_dim * s.block_dim;
            mult_sq += s.preimage.size();
            complete += s.preimage.size() * s.block_dim;
        }
        checks.push_back({"dim algebra = sum block^2",
                          sq == alg.dim(),
                          static_cast<double>(sq) - static_cast<double>(alg.dim())});
        checks.push_back({"dim invariant commutant = sum mult^2",
                          mult_sq == invc.dim(),
                          static_cast<double>(mult_sq) - static_cast<double>(invc.dim())});
        checks.push_back({"sector dims resolve the image",
                          complete == jump.source_dim,
                          static_cast<double>(complete) - static_cast<double>(jump.source_dim)});
        checks.push_back({"centre dim = sector count",
                          z.dim() == jump.sectors.size(),
                          static_cast<double>(z.dim()) - static_cast<double>(jump.sectors.size())});
    }
    if (!kappa_consistent)
        out << "kappa mismatch detail: " << kappa_error << "\n";

    render_checks(out, res.machine, checks);
    res.exit_code = all_pass(checks) ? 0 : 3;
    res.text = out.str();
    return res;
}

// ---------------------------------------------------------------------------
// scenarios
// ---------------------------------------------------------------------------

namespace {

Charge ch1(long v) { return Charge{{v}}; }

ComplexMatrix projector_state(const ComplexMatrix& v) {
    double n2 = 0;
    for (std::size_t i = 0; i < v.rows(); ++i)
        n2 += std::norm(v(i, 0));
    ComplexMatrix rho(v.rows(), v.rows());
    for (std::size_t i = 0; i < v.rows(); ++i)
        for (std::size_t j = 0; j < v.rows(); ++j)
            rho(i, j) = v(i, 0) * std::conj(v(j, 0)) / n2;
    return rho;
}

CommandResult scenario_qutrit_qubit() {
    CommandResult res;
    std::ostringstream out;
    std::vector<CheckLine> checks;

    const cplx a3(1.0 / std::sqrt(3.0), 0.0), a2(1.0 / std::sqrt(2.0), 0.0);
    Qrf fa = make_rank_one_qrf(SymmetryGroup::u1(), {ch1(-1), ch1(0), ch1(1)}, {a3, a3, a3});
    Qrf fb = make_rank_one_qrf(SymmetryGroup::u1(), {ch1(-1), ch1(1)}, {a2, a2});
    UnitaryRep ra = make_rep(SymmetryGroup::u1(), {ch1(-1), ch1(0), ch1(1)});
    UnitaryRep rb = make_rep(SymmetryGroup::u1(), {ch1(-1), ch1(1)});

    out << "scenario qutrit-qubit (U(1), sigma_A = {-1,0,1}, sigma_B = {-1,1})\n";

    OperatorAlgebra algA = relational_algebra(fa, rb);
    OperatorAlgebra algB = relational_algebra(fb, ra);
    checks.push_back({"dim A^{B:A|A} = 6", algA.dim() == 6, static_cast<double>(algA.dim()) - 6});
    checks.push_back({"dim A^{A:B|B} = 7", algB.dim() == 7, static_cast<double>(algB.dim()) - 7});

    auto secA = kappa_sectors(fa, rb);
    auto secB = kappa_sectors(fb, ra);
    const bool a_ok = secA.size() == 3 && secA[0].k == std::vector<Charge>{ch1(-1)} &&
                      secA[0].preimage == std::vector<Charge>{ch1(-2), ch1(-1)} &&
                      secA[1].k == std::vector<Charge>{ch1(-1), ch1(1)} &&
                      secA[1].preimage == std::vector<Charge>{ch1(0)} &&
                      secA[2].k == std::vector<Charge>{ch1(1)} &&
                      secA[2].preimage == std::vector<Charge>{ch1(1), ch1(2)};
    checks.push_back({"A-view sectors {-1}:{-2,-1}, {-1,1}:{0}, {1}:{1,2}", a_ok, 0.0});
    const bool b_ok = secB.size() == 4 && secB[0].k == std::vector<Charge>{ch1(-1)} &&
                      secB[0].preimage == std::vector<Charge>{ch1(-2)} &&
                      secB[1].k == std::vector<Charge>{ch1(0)} &&
                      secB[1].preimage == std::vector<Charge>{ch1(-1), ch1(1)} &&
                      secB[2].k == std::vector<Charge>{ch1(-1), ch1(1)} &&
                      secB[2].preimage == std::vector<Charge>{ch1(0)} &&
                      secB[3].k == std::vector<Charge>{ch1(1)} &&
                      secB[3].preimage == std::vector<Charge>{ch1(2)};
    checks.push_back({"B-view sectors {-1}:{-2}, {0}:{-1,1}, {-1,1}:{0}, {1}:{2}", b_ok, 0.0});

    // the phase curve tr(rho_red (X^|A)^2) over a phi x q grid
    UnitaryRep joint = kron_rep(fa.rep, rb);
    ComplexMatrix x(2, 2);
    x(0, 1) = x(1, 0) = 1.0;
    ComplexMatrix rx = relationalize(fa, x, rb);
    ComplexMatrix x2 = rx * rx;

    out << "phase curve tr(rho_red (X^|A)^2), rows phi, columns q in {0, 0.3, 0.5, 1}:\n";
    nlohmann::json jcurve = nlohmann::json::array();
    double worst = 0.0;
    for (int pi = 0; pi <= 8; ++pi) {
        const double phi = kTwoPi * pi / 8.0;
        out << "  phi=" << fmt(phi) << ":";
        for (double q : {0.0, 0.3, 0.5, 1.0}) {
            ComplexMatrix sig = ComplexMatrix::diag({cplx(q, 0), cplx(1 - q, 0)});
            ComplexMatrix v1 = orientation_state(fa, 0.0);
            ComplexMatrix v2 = orientation_state(fa, kTwoPi / 3.0);
            v2 *= std::polar(1.0, phi);
            v1 += v2;
            ComplexMatrix rho = kron(projector_state(v1), sig);
            ComplexMatrix red = reduced_relational_state(rho, algA, joint);
            const double got = (red * x2).trace().real();
            const double expect =
                1.0 / 3.0 - std::cos(phi) / 6.0 + (q - 0.5) * std::sin(phi) / std::sqrt(3.0);
            worst = std::max(worst, std::abs(got - expect));
            out << " " << fmt(got);
            jcurve.push_back({{"phi", phi}, {"q", q}, {"value", got}, {"expect", expect}});
        }
        out << "\n";
    }
    res.machine["phase_curve"] = jcurve;
    checks.push_back({"phase curve matches the closed form", worst < 1e-9, worst});

    render_checks(out, res.machine, checks);
    res.exit_code = all_pass(checks) ? 0 : 3;
    res.text = out.str();
    return res;
}

CommandResult scenario_trivial() {
    CommandResult res;
    std::ostringstream out;
    std::vector<CheckLine> checks;
    out << "scenario trivial (U(1) trivial frame observing sigma_S = {-1,0,1})\n";

    Qrf f = trivial_qrf(SymmetryGroup::u1());
    UnitaryRep rep = make_rep(SymmetryGroup::u1(), {ch1(-1), ch1(0), ch1(1)});
    auto sectors = kappa_sectors(f, rep);
    bool singletons = sectors.size() == 3;
    for (const auto& s : sectors)
        singletons = singletons && s.k.size() == 1 && s.preimage == s.k;
    checks.push_back({"per-charge superselection (singleton sectors)", singletons, 0.0});

    // relationalizing equals the system twirl
    Rng rng(41);
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
        ComplexMatrix op = ComplexMatrix::random(3, 3, rng);
        worst = std::max(worst, distance(relationalize(f, op, rep), g_twirl(rep, op)));
    }
    checks.push_back({"R_trivial[f] = G-twirl[f]", worst < 1e-10, worst});

    out << "sectors:";
    for (const auto& s : sectors)
        out << " " << charge_set_string(s.k);
    out << "\n";
    render_checks(out, res.machine, checks);
    res.exit_code = all_pass(checks) ? 0 : 3;
    res.text = out.str();
    return res;
}

CommandResult scenario_regular(std::uint64_t seed) {
    CommandResult res;
    std::ostringstream out;
    std::vector<CheckLine> checks;
    out << "scenario regular (Z4 regular frame, random 3-dim system, seed " << seed << ")\n";

    Rng rng(seed);
    SymmetryGroup group = SymmetryGroup::finite({4});
    Qrf f = regular_qrf(group);
    std::vector<Charge> sys;
    for (int i = 0; i < 3; ++i)
        sys.push_back(ch1(static_cast<long>(rng.below(4))));
    UnitaryRep rep = make_rep(group, sys);
    out << "system charges " << charge_set_string(sys) << "\n";

    auto sectors = kappa_sectors(f, rep);
    checks.push_back({"single sector", sectors.size() == 1,
                      static_cast<double>(sectors.size()) - 1.0});
    checks.push_back({"sector block dim = dim S",
                      sectors.size() == 1 && sectors[0].block_dim == 3, 0.0});
    OperatorAlgebra alg = relational_algebra(f, rep);
    checks.push_back({"dim algebra = (dim S)^2 = 9", alg.dim() == 9,
                      static_cast<double>(alg.dim()) - 9.0});

    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        ComplexMatrix a = ComplexMatrix::random(3, 3, rng);
        ComplexMatrix b = ComplexMatrix::random(3, 3, rng);
        worst = std::max(worst,
                         distance(relationalize(f, a, rep) * relationalize(f, b, rep),
                                  relationalize(f, a * b, rep)));
    }
    checks.push_back({"relationalization is an algebra homomorphism", worst < 1e-10, worst});

    render_checks(out, res.machine, checks);
    res.exit_code = all_pass(checks) ? 0 : 3;
    res.text = out.str();
    return res;
}

CommandResult scenario_bipartite() {
    CommandResult res;
    std::ostringstream out;
    std::vector<CheckLine> checks;
    out << "scenario bipartite (qutrit frame observing two qubits)\n";

    const cplx a3(1.0 / std::sqrt(3.0), 0.0);
    Qrf f = make_rank_one_qrf(SymmetryGroup::u1(), {ch1(-1), ch1(0), ch1(1)}, {a3, a3, a3});
    UnitaryRep s1 = make_rep(SymmetryGroup::u1(), {ch1(-1), ch1(1)});
    UnitaryRep s2 = make_rep(SymmetryGroup::u1(), {ch1(-1), ch1(1)});
    auto report = bipartite_sector_analysis(f, s1, s2);

    out << "Xi membership (sector factorizes into S1 x S2 pieces):\n";
    nlohmann::json jsec = nlohmann::json::array();
    double worst_formula = 0.0;
    std::map<std::string, bool> got;
    for (const auto& sec : report) {
        out << "  k = " << charge_set_string(sec.k) << ": "
            << (sec.is_product ? "product" : "not a product")
            << ", solutions " << sec.solutions.size()
            << ", commutator norm " << fmt(sec.commutator_norm) << "\n";
        jsec.push_back({{"k", charge_set_string(sec.k)},
                        {"product", sec.is_product},
                        {"solutions", sec.solutions.size()},
                        {"commutator_norm", sec.commutator_norm}});
        got[charge_set_string(sec.k)] = sec.is_product;
        worst_formula = std::max(worst_formula, sec.formula_residual);
    }
    res.machine["sectors"] = jsec;

    const bool table_ok = got.size() == 5 && got.at("{-2}") && !got.at("{-2,0}") &&
                          !got.at("{0}") && !got.at("{0,2}") && got.at("{2}");
    checks.push_back({"Xi membership table {-2}:yes {-2,0}:no {0}:no {0,2}:no {2}:yes",
                      table_ok, 0.0});
    checks.push_back({"commutator formula residual", worst_formula < 1e-10, worst_formula});

    render_checks(out, res.machine, checks);
    res.exit_code = all_pass(checks) ? 0 : 3;
    res.text = out.str();
    return res;
}

} // namespace

CommandResult cmd_scenario(const std::string& name, std::uint64_t seed) {
    if (name == "qutrit-qubit")
        return scenario_qutrit_qubit();
    if (name == "trivial")
        return scenario_trivial();
    if (name == "regular")
        return scenario_regular(seed);
    if (name == "bipartite")
        return scenario_bipartite();
    CommandResult res;
    res.exit_code = 2;
    res.text = "unknown scenario '" + name +
               "' (expected qutrit-qubit | trivial | regular | bipartite)\n";
    return res;
}

// ---------------------------------------------------------------------------
// kappa diagram
// ---------------------------------------------------------------------------

CommandResult cmd_kappa_diagram(const InstanceSpec& spec, const std::string& out_path) {
    CommandResult res;
    std::ostringstream out;

    const Qrf frame = spec.build_frame();
    const UnitaryRep rep_s = spec.build_system_rep();
    const ChargeSpectrum sa = spectrum_of(frame.rep);
    const ChargeSpectrum ss = spectrum_of(rep_s);
    const ChargeSpectrum sas = spectrum_sum(sa, ss);
    auto sectors = kappa_sectors(frame, rep_s);

    auto sector_of = [&](const Charge& r) -> std::size_t {
        for (std::size_t i = 0; i < sectors.size(); ++i)
            for (const Charge& p : sectors[i].preimage)
                if (p == r)
                    return i;
        return sectors.size();
    };

    const auto cols = ss.support();
    std::size_t width = 2;
    for (const Charge& z : cols)
        width = std::max(width, to_string(z).size());
    for (const auto& [r, m] : sas.mult)
        width = std::max(width, to_string(r).size());
    width += 1;

    out << "kappa diagram (rows: total charge r, top to bottom descending; "
           "columns: system charge z; '*' marks z in kappa(r))\n";
    out << std::string(width, ' ') << " |";
    for (const Charge& z : cols) {
        std::string zs = to_string(z);
        out << " " << std::string(width - zs.size(), ' ') << zs;
    }
    out << "\n";

    std::ostringstream csv;
    csv << "r,z,sector_id\n";
    nlohmann::json jrows = nlohmann::json::array();

    std::vector<Charge> rows;
    for (const auto& [r, m] : sas.mult)
        rows.push_back(r);
    std::reverse(rows.begin(), rows.end());
    for (const Charge& r : rows) {
        auto k = kappa(ss, sa, r);
        std::string rs = to_string(r);
        out << std::string(width - rs.size(), ' ') << rs << " |";
        for (const Charge& z : cols) {
            const bool mark = std::find(k.begin(), k.end(), z) != k.end();
            out << " " << std::string(width - 1, ' ') << (mark ? '*' : '.');
            if (mark) {
                csv << to_string(r) << "," << to_string(z) << "," << sector_of(r) << "\n";
                jrows.push_back(
                    {{"r", to_string(r)}, {"z", to_string(z)}, {"sector", sector_of(r)}});
            }
        }
        out << "   sector " << sector_of(r) << " " << charge_set_string(k) << "\n";
    }
    res.machine["points"] = jrows;

    if (!out_path.empty()) {
        std::ofstream f(out_path);
        if (!f) {
            res.exit_code = 2;
            res.text = "cannot write '" + out_path + "'\n";
            return res;
        }
        f << csv.str();
        out << "csv written to " << out_path << "\n";
    }
    res.text = out.str();
    return res;
}

// ---------------------------------------------------------------------------
// Monte Carlo verification
// ---------------------------------------------------------------------------

CommandResult cmd_mc_verify(const InstanceSpec& spec, std::size_t samples, std::uint64_t seed) {
    CommandResult res;
    std::ostringstream out;

    if (!spec.group.is_finite()) {
        res.exit_code = 2;
        res.text = "mc-verify needs a finite group instance; embed U(1) charges into an "
                   "anti-aliased Z_n window first\n";
        return res;
    }
    if (!spec.povm_charge_basis) {
        res.exit_code = 2;
        res.text = "mc-verify needs 'povm = charge_basis' in the instance file\n";
        return res;
    }

    const Qrf frame = spec.build_frame();
    const UnitaryRep rep_s = spec.build_system_rep();
    const ComplexMatrix rho_a = spec.build_frame_state();
    const ComplexMatrix sigma = spec.build_system_state();
    const std::size_t ds = rep_s.dim;

    // POVM: projectors onto the joint system basis states
    std::vector<ComplexMatrix> povm;
    for (std::size_t i = 0; i < ds; ++i) {
        ComplexMatrix m(ds, ds);
        m(i, i) = 1.0;
        povm.push_back(std::move(m));
    }

    // exact relational law: p_i = tr(R_A[m_i] (rho (x) sigma))
    const ComplexMatrix joint_state = kron(rho_a, sigma);
    std::vector<double> exact(ds);
    for (std::size_t i = 0; i < ds; ++i)
        exact[i] = (relationalize(frame, povm[i], rep_s) * joint_state).trace().real();

    // operational sampling: g ~ tr(gamma(g) rho), then i ~ tr(U m U^dag sigma)
    const auto elems = frame.group().elements();
    std::vector<double> pg;
    for (const FiniteElement& g : elems)
        pg.push_back(std::max(0.0, (orientation_povm(frame, g) * rho_a).trace().real()));
    std::vector<std::vector<double>> outcome_given_g;
    for (const FiniteElement& g : elems) {
        ComplexMatrix u = rep_evaluate(rep_s, g);
        std::vector<double> row(ds);
        for (std::size_t i = 0; i < ds; ++i)
            row[i] = std::max(0.0, (u * povm[i] * u.dagger() * sigma).trace().real());
        outcome_given_g.push_back(std::move(row));
    }

    Rng rng(seed);
    std::vector<std::size_t> counts(ds, 0);
    for (std::size_t n = 0; n < samples; ++n) {
        double u1 = rng.uniform();
        std::size_t gi = 0;
        for (double acc = 0.0; gi < elems.size(); ++gi) {
            acc += pg[gi];
            if (u1 <= acc)
                break;
        }
        gi = std::min(gi, elems.size() - 1);
        double u2 = rng.uniform();
        std::size_t oi = 0;
        for (double acc = 0.0; oi < ds; ++oi) {
            acc += outcome_given_g[gi][oi];
            if (u2 <= acc)
                break;
        }
        oi = std::min(oi, ds - 1);
        ++counts[oi];
    }

    out << "mc-verify: " << samples << " samples, seed " << seed << "\n";
    out << "outcome  exact          empirical      z\n";
    nlohmann::json jout = nlohmann::json::array();
    double worst_z = 0.0;
    for (std::size_t i = 0; i < ds; ++i) {
        const double emp = static_cast<double>(counts[i]) / static_cast<double>(samples);
        const double var = exact[i] * (1.0 - exact[i]);
        double zscore;
        if (var < 1e-12)
            zscore = std::abs(emp - exact[i]) < 1e-9 ? 0.0 : 999.0;
        else
            zscore = (emp - exact[i]) / std::sqrt(var / static_cast<double>(samples));
        worst_z = std::max(worst_z, std::abs(zscore));
        char line[128];
        std::snprintf(line, sizeof(line), "%7zu  %-13.6g  %-13.6g  %+.3f\n", i, exact[i], emp,
                      zscore);
        out << line;
        jout.push_back({{"outcome", i}, {"exact", exact[i]}, {"empirical", emp}, {"z", zscore}});
    }
    res.machine["outcomes"] = jout;
    res.machine["max_abs_z"] = worst_z;

    std::vector<CheckLine> checks;
    checks.push_back({"all |z| < 5", worst_z < 5.0, worst_z});
    double law_total = 0.0;
    for (double p : exact)
        law_total += p;
    checks.push_back({"exact law sums to 1", std::abs(law_total - 1.0) < 1e-9,
                      std::abs(law_total - 1.0)});
    render_checks(out, res.machine, checks);
    res.exit_code = all_pass(checks) ? 0 : 3;
    res.text = out.str();
    return res;
}

// ---------------------------------------------------------------------------
// galilei
// ---------------------------------------------------------------------------

CommandResult cmd_galilei(const GalileiOptions& opt) {
    CommandResult res;
    std::ostringstream out;
    const GalileiParams& g = opt.params;

    const double sa = galilei_sigma_a(g), sv = galilei_sigma_v(g);
    const double a_lo = std::min(g.a1, g.a2) - opt.span_sigmas * sa;
    const double a_hi = std::max(g.a1, g.a2) + opt.span_sigmas * sa;
    const double v_lo = std::min(g.v1, g.v2) - opt.span_sigmas * sv;
    const double v_hi = std::max(g.v1, g.v2) + opt.span_sigmas * sv;

    out << "galilei orientation density p(a, v); m=" << fmt(g.m) << " omega=" << fmt(g.omega)
        << "\n";
    out << "peaks at (a, v) = (" << fmt(g.a1) << ", " << fmt(g.v1) << ") and (" << fmt(g.a2)
        << ", " << fmt(g.v2) << ")\n";
    const double w1 = galilei_fitted_half_width(g, g.a1, g.v1);
    const double w2 = galilei_fitted_half_width(g, g.a2, g.v2);
    out << "fitted half-widths along a: " << fmt(w1) << " and " << fmt(w2) << "\n";

    const double total = galilei_quadrature(g, a_lo, a_hi, v_lo, v_hi,
                                            std::max<std::size_t>(opt.na, 301),
                                            std::max<std::size_t>(opt.nv, 301));
    const double expect = galilei_total_analytic(g);
    out << "quadrature total " << fmt(total) << " vs analytic " << fmt(expect) << "\n";

    res.machine["peaks"] = {{{"a", g.a1}, {"v", g.v1}, {"half_width", w1}},
                            {{"a", g.a2}, {"v", g.v2}, {"half_width", w2}}};
    res.machine["quadrature_total"] = total;
    res.machine["analytic_total"] = expect;

    if (!opt.out_path.empty()) {
        std::ofstream f(opt.out_path);
        if (!f) {
            res.exit_code = 2;
            res.text = "cannot write '" + opt.out_path + "'\n";
            return res;
        }
        f << "a,v,p\n";
        for (const auto& pt : galilei_grid(g, a_lo, a_hi, opt.na, v_lo, v_hi, opt.nv)) {
            char line[96];
            std::snprintf(line, sizeof(line), "%.12g,%.12g,%.12g\n", pt.a, pt.v, pt.p);
            f << line;
        }
        out << "csv written to " << opt.out_path << "\n";
    }

    std::vector<CheckLine> checks;
    checks.push_back({"quadrature matches the analytic total (1e-3 relative)",
                      std::abs(total - expect) < 1e-3 * std::abs(expect),
                      std::abs(total - expect) / std::max(1e-300, std::abs(expect))});
    render_checks(out, res.machine, checks);
    res.exit_code = all_pass(checks) ? 0 : 3;
    res.text = out.str();
    return res;
}

} // namespace qrf
