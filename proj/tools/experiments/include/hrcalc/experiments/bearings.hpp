#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "hrcalc/experiments/common.hpp"
#include "hrcalc/fusion.hpp"

namespace hrcalc::experiments {

enum class BearingsFusion {
  diffusion,  // covariance-weighted combination of estimates and covariances
  average,    // Metropolis average of estimates, covariances kept local
  none,       // every agent filters alone
};

struct BearingsParams {
  double cube = 24.0;  // side of the cube holding the sensors, centred at 0
  std::size_t agents = 20;
  std::size_t edges = 43;
  double dt = 0.04;
  double accel_var = 10.0;  // per axis, truth and filter
  double obs_var = 1e-4;    // per axis, truth and filter
  double init_std = 1.0;    // prior std of position and velocity components
  BearingsFusion fusion = BearingsFusion::diffusion;
  std::uint64_t topology_seed = 1;
};

void declare_bearings(ParamSet& p);
// `topology` (a file path, empty for the generated network) is returned
// separately since it is not part of the numeric parameters.
BearingsParams bearings_params(const ParamSet& p, std::string* topology_path);
void validate(const BearingsParams& p);

struct BearingsScenario {
  std::vector<Quaternion> sensors;  // pure positions inside the cube
  AgentNetwork network;
  std::size_t leaf = 0;  // an agent of minimum degree
};

// Sensors uniform in the cube from `topology_seed`. The generated network
// joins agent 0 to its nearest sensor only; agents 1..n-1 are linked by a
// minimum spanning tree, then each remaining degree-1 agent gains its
// shortest missing edge, then the shortest missing edges fill up to `edges`.
BearingsScenario make_bearings_scenario(const BearingsParams& p);
// Same with an explicit network (sensor positions still from the seed).
BearingsScenario make_bearings_scenario(const BearingsParams& p, const AgentNetwork& net);

struct BearingsRun {
  std::vector<std::vector<double>> pos_error;  // [step][agent], steps + 1 rows
  std::size_t leaf = 0;
  double leaf_rms = 0.0;     // over steps 1..steps
  double network_rms = 0.0;  // over steps 1..steps and agents
  bool left_cube = false;
};

// Target starts uniformly in the central half of the cube at rest;
// acceleration is white Gaussian. Agent l observes the unit bearing
// (q - L_l)/|q - L_l| plus noise, runs an extended filter on (q, v) and
// then combines with its neighbourhood according to `fusion`.
BearingsRun run_bearings(const BearingsParams& p, const BearingsScenario& scenario,
                         std::uint64_t seed, std::size_t steps, std::ostream* csv = nullptr);

}  // namespace hrcalc::experiments
