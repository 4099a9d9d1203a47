#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hrcalc/experiments/common.hpp"

namespace hrcalc::experiments {

// A single-qubit gate acting on the Bloch vector q as w q w*.
struct Gate {
  std::string name;
  Quaternion w;  // unit
};

// Unit quaternion cos(a/2) + n sin(a/2) for axis n (normalised) and angle a in degrees.
Gate make_gate(const std::string& name, double ax, double ay, double az, double angle_deg);

// Parses `[name] ax ay az angle_deg; ...`. Unnamed entries are called g<index>.
// A zero axis is allowed only with a zero angle.
std::vector<Gate> parse_gates(const std::string& text);

struct QubitParams {
  std::vector<Gate> gates;   // admissible set, must not be empty
  std::vector<Gate> target;  // applied first to last
  std::size_t max_depth = 3;
  double lambda = 1e-3;  // cost per stage
  std::size_t starts = 16;
  double step = 1.0;  // initial descent step on the HR* gradient
  std::size_t random_probes = 2;
  double tie_tol = 1e-9;
};

void declare_qubit(ParamSet& p);
QubitParams qubit_params(const ParamSet& p);
void validate(const QubitParams& p);

// Probe set: the six cardinal Bloch states, then random qubit states.
std::vector<Quaternion> qubit_probes(std::size_t random_probes, std::uint64_t seed);

// W_D ... W_1 q W_1* ... W_D* with stages normalised.
Quaternion apply_circuit(const QVector& w, const Quaternion& q);
// Mean over probes of |f(q) - f_hat(q, W)|^2.
double circuit_residual(const QVector& w, const Quaternion& target, const std::vector<Quaternion>& probes);

struct DepthResult {
  std::size_t depth = 0;
  double residual_continuous = 0.0;  // best start before projection
  double residual_projected = 0.0;
  double objective = 0.0;  // projected residual + lambda depth
  std::vector<std::size_t> gates;  // indices into the gate set, first stage first
};

struct QubitReport {
  std::vector<DepthResult> depths;
  std::size_t selected = 0;  // index into depths
};

// For each depth: multistart descent on the unit stages along -dJ/dW*,
// continuation with an increasing penalty on the distance to the gate set,
// then progressive projection (one stage snapped to its nearest gate, the
// rest re-optimised) in both stage orders. The selected depth minimises
// the objective; within tie_tol the shorter circuit wins.
QubitReport run_qubit(const QubitParams& p, std::uint64_t seed, std::size_t iterations,
                      std::ostream* csv = nullptr);

}  // namespace hrcalc::experiments
