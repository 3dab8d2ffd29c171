#ifndef QRFKIT_INSTANCE_HPP
#define QRFKIT_INSTANCE_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qrf/frames.hpp"

namespace qrf {

// Parse error with a line number, surfaced by the CLI as exit code 2.
struct ParseError {
    std::string message;
    std::size_t line = 0;
};

struct SystemSpec {
    std::string name;
    std::vector<Charge> charges;
};

// Declarative instance: group, frame, systems, optional state, options.
// Grammar (one `key = value` per line, # comments):
//   group = u1               |  group = z 6  |  group = z 2 3
//   frame = trivial | regular
//   frame = charges [-1, 0, 1]
//   frame = charges [-1, 0, 1] amplitudes [[0.577, 0.0], [0.577, 0.0], [0.577, 0.0]]
//   system B = charges [-1, 1]
//   state frame = orientations [0.0, 2.0944] coefficients [[0.7071, 0.0], [0.7071, 0.7854]]
//   state B = diag [0.3, 0.7]
//   state B = matrix [[[0.3,0],[0,0]],[[0,0],[0.7,0]]]     (entries [modulus, phase])
//   povm = charge_basis
//   seed = 1337
//   tol_rank = 1e-9      tol_eq = 1e-9      tol_degeneracy = 1e-7
//   format = text | machine
struct InstanceSpec {
    SymmetryGroup group = SymmetryGroup::u1();
    enum class FrameKind { Charges, Trivial, Regular } frame_kind = FrameKind::Charges;
    std::vector<Charge> frame_charges;
    std::vector<cplx> frame_amplitudes;        // empty -> uniform 1/sqrt(dim)
    std::vector<SystemSpec> systems;

    // optional frame state: superposition of orientation states
    bool has_frame_state = false;
    std::vector<FiniteElement> state_orientations_finite;
    std::vector<double> state_orientations_u1;
    std::vector<cplx> state_coefficients;

    // optional per-system density matrices
    std::map<std::string, ComplexMatrix> system_states;

    bool povm_charge_basis = false;
    std::uint64_t seed = Rng::kDefaultSeed;
    Tolerance tol;
    std::string format = "text";

    // derived objects (throw std::invalid_argument on inconsistent spec)
    Qrf build_frame() const;
    UnitaryRep build_system_rep() const;       // tensor product of all systems
    std::size_t system_dim() const;
    ComplexMatrix build_frame_state() const;   // density matrix on the frame
    ComplexMatrix build_system_state() const;  // product over systems
};

// Throws ParseError on malformed input.
InstanceSpec parse_instance(const std::string& text);
InstanceSpec parse_instance_file(const std::string& path);

} // namespace qrf

#endif
