#ifndef QRFKIT_REPORT_HPP
#define QRFKIT_REPORT_HPP

#include <cstdint>
#include <string>

#include <json.hpp>

#include "qrf/galilei.hpp"
#include "qrf/instance.hpp"

namespace qrf {

// Exit-code contract: 0 success, 2 input error, 3 verification/golden failure.
struct CommandResult {
    int exit_code = 0;
    std::string text;
    nlohmann::json machine;
};

CommandResult cmd_decompose(const InstanceSpec& spec);

// canned instances: qutrit-qubit | trivial | regular | bipartite
CommandResult cmd_scenario(const std::string& name, std::uint64_t seed = Rng::kDefaultSeed);

// ASCII diagram in the text output; CSV of (r, z, sector_id) written to
// out_path when non-empty.
CommandResult cmd_kappa_diagram(const InstanceSpec& spec, const std::string& out_path);

CommandResult cmd_mc_verify(const InstanceSpec& spec, std::size_t samples, std::uint64_t seed);

struct GalileiOptions {
    GalileiParams params;
    std::size_t na = 201, nv = 201;
    double span_sigmas = 6.0;  // grid half-width in peak sigmas
    std::string out_path;      // CSV destination (empty: skip)
};

CommandResult cmd_galilei(const GalileiOptions& opt);

} // namespace qrf

#endif
