// qrf: perspectives of quantum reference frames for Abelian symmetry groups.
//
// Subcommands: decompose, scenario, kappa-diagram, mc-verify, galilei.
// Exit codes: 0 success, 2 input error, 3 verification/golden failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qrf/report.hpp"

namespace {

int emit(const qrf::CommandResult& res, const std::string& format, const std::string& out_path) {
    std::string payload =
        format == "machine" ? res.machine.dump(2) + "\n" : res.text;
    if (!out_path.empty()) {
        std::ofstream f(out_path);
        if (!f) {
            std::cerr << "cannot write '" << out_path << "'\n";
            return 2;
        }
        f << payload;
    } else {
        std::cout << payload;
    }
    return res.exit_code;
}

struct GlobalOpts {
    double tol_rank = -1.0, tol_eq = -1.0;
    std::uint64_t seed = qrf::Rng::kDefaultSeed;
    bool seed_set = false;
    std::string format = "";
    std::string out_path;
};

qrf::InstanceSpec load_instance(const std::string& path, const GlobalOpts& g) {
    qrf::InstanceSpec spec = qrf::parse_instance_file(path);
    if (g.tol_rank > 0)
        spec.tol.rank_tol = g.tol_rank;
    if (g.tol_eq > 0)
        spec.tol.equality_tol = g.tol_eq;
    if (g.seed_set)
        spec.seed = g.seed;
    if (!g.format.empty())
        spec.format = g.format;
    return spec;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"QRF perspectives: relational algebras, superselection sectors and jumps "
                 "for Abelian symmetry groups"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand

    GlobalOpts g;
    app.add_option("--tol-rank", g.tol_rank, "relative rank tolerance, at most 1e-6")
        ->check(CLI::Range(1e-300, 1e-6));
    app.add_option("--tol-eq", g.tol_eq, "absolute equality tolerance")
        ->check(CLI::PositiveNumber);
    auto* seed_opt = app.add_option("--seed", g.seed, "RNG seed");
    app.add_option("--format", g.format, "text | machine")
        ->check(CLI::IsMember({"text", "machine"}));
    app.add_option("--out", g.out_path, "write the report to PATH instead of stdout");

    std::string instance_path, scenario_name, diagram_csv, galilei_csv;
    std::size_t mc_samples = 100000;

    auto* dec = app.add_subcommand("decompose", "decompose an instance file");
    dec->add_option("instance", instance_path, "instance file")->required();

    auto* sce = app.add_subcommand("scenario", "run a canned paper scenario");
    sce->add_option("name", scenario_name, "qutrit-qubit | trivial | regular | bipartite")
        ->required();

    auto* kap = app.add_subcommand("kappa-diagram", "emit the kappa diagram of an instance");
    kap->add_option("instance", instance_path, "instance file")->required();
    kap->add_option("--csv", diagram_csv, "CSV output path for (r, z, sector_id)");

    auto* mcv = app.add_subcommand("mc-verify", "Monte Carlo check of the relational law");
    mcv->add_option("instance", instance_path, "instance file")->required();
    mcv->add_option("--samples", mc_samples, "sample count (default 100000)");

    qrf::GalileiOptions gal;
    auto* galc = app.add_subcommand("galilei", "closed-form Galilei orientation density");
    galc->add_option("--mass", gal.params.m, "mass m > 0")->check(CLI::PositiveNumber);
    galc->add_option("--omega", gal.params.omega, "squeezing > 0")->check(CLI::PositiveNumber);
    galc->add_option("--theta1", gal.params.theta1, "first orientation phase");
    galc->add_option("--a1", gal.params.a1, "first translation");
    galc->add_option("--v1", gal.params.v1, "first boost");
    galc->add_option("--theta2", gal.params.theta2, "second orientation phase");
    galc->add_option("--a2", gal.params.a2, "second translation");
    galc->add_option("--v2", gal.params.v2, "second boost");
    galc->add_option("--na", gal.na, "grid points along a");
    galc->add_option("--nv", gal.nv, "grid points along v");
    galc->add_option("--csv", gal.out_path, "CSV output path for (a, v, p)");

    CLI11_PARSE(app, argc, argv);
    g.seed_set = seed_opt->count() > 0;

    try {
        if (dec->parsed()) {
            auto spec = load_instance(instance_path, g);
            return emit(qrf::cmd_decompose(spec),
                        g.format.empty() ? spec.format : g.format, g.out_path);
        }
        if (sce->parsed()) {
            return emit(qrf::cmd_scenario(scenario_name, g.seed),
                        g.format.empty() ? "text" : g.format, g.out_path);
        }
        if (kap->parsed()) {
            auto spec = load_instance(instance_path, g);
            return emit(qrf::cmd_kappa_diagram(spec, diagram_csv),
                        g.format.empty() ? spec.format : g.format, g.out_path);
        }
        if (mcv->parsed()) {
            auto spec = load_instance(instance_path, g);
            return emit(qrf::cmd_mc_verify(spec, mc_samples, g.seed_set ? g.seed : spec.seed),
                        g.format.empty() ? spec.format : g.format, g.out_path);
        }
        if (galc->parsed()) {
            return emit(qrf::cmd_galilei(gal), g.format.empty() ? "text" : g.format, g.out_path);
        }
    } catch (const qrf::ParseError& e) {
        std::cerr << "parse error";
        if (e.line)
            std::cerr << " (line " << e.line << ")";
        std::cerr << ": " << e.message << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "verification failure: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
