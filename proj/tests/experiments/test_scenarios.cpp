#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "hrcalc/errors.hpp"
#include "hrcalc/experiments/bearings.hpp"
#include "hrcalc/experiments/common.hpp"
#include "hrcalc/experiments/flight.hpp"
#include "hrcalc/experiments/motion.hpp"
#include "hrcalc/experiments/qubit.hpp"
#include "hrcalc/experiments/three_phase.hpp"

namespace hrcalc::experiments {
namespace {

TEST(ParamSet, RejectsUnknownKeysAndBadValues) {
  ParamSet p;
  p.declare("x", "1.5", "a real");
  p.declare("n", "3", "a count");
  EXPECT_DOUBLE_EQ(p.real("x"), 1.5);
  EXPECT_EQ(p.count("n"), 3u);
  EXPECT_THROW(p.set("y", "2"), UsageError);
  p.set("n", "-1");
  EXPECT_THROW(p.count("n"), UsageError);
  p.set("x", "abc");
  EXPECT_THROW(p.real("x"), UsageError);
}

TEST(ParamSet, ConfigFileCommentsAndErrors) {
  ParamSet p;
  p.declare("x", "1", "");
  std::istringstream good("# comment\n\nx = 2.5  # trailing\n");
  load_config(p, good, "good.cfg");
  EXPECT_DOUBLE_EQ(p.real("x"), 2.5);
  std::istringstream unknown("z = 1\n");
  EXPECT_THROW(load_config(p, unknown, "bad.cfg"), UsageError);
  std::istringstream malformed("x 3\n");
  EXPECT_THROW(load_config(p, malformed, "bad.cfg"), UsageError);
}

TEST(Rng, ChildSeedsAreStableAndDistinct) {
  EXPECT_EQ(child_seed(1, 0), child_seed(1, 0));
  EXPECT_NE(child_seed(1, 0), child_seed(1, 1));
  EXPECT_NE(child_seed(1, 0), child_seed(2, 0));
}

// ------------------------------------------------------------ three-phase

TEST(ThreePhase, SequenceSplitReconstructsVoltage) {
  ThreePhaseParams p;
  p.fault_time = 0.1;
  for (std::size_t n : {0u, 50u, 150u, 333u}) {
    const SequenceSplit s = three_phase_sequences(p, n);
    EXPECT_LT(max_abs_diff(s.plus - s.minus, three_phase_voltage(p, n)), 1e-12) << n;
  }
  // Balanced: no negative sequence.
  ThreePhaseParams b;
  EXPECT_LT(norm(three_phase_sequences(b, 17).minus), 1e-12);
}

TEST(ThreePhase, AxisIsUnitAndFrequencyFromPhiInverts) {
  const Quaternion z = three_phase_axis();
  EXPECT_NEAR(norm(z), 1.0, 1e-15);
  const double dt = 1e-3, f = 50.0, w = 2.0 * std::numbers::pi * f * dt;
  const Quaternion phi = Quaternion(std::cos(w)) + std::sin(w) * z;
  EXPECT_NEAR(frequency_from_phi(phi, dt), f, 1e-9);
}

TEST(ThreePhase, BalancedNoiselessConverges) {
  const ThreePhaseRun run = run_three_phase(ThreePhaseParams{}, 1, 600);
  for (std::size_t n = 250; n < 600; ++n) {
    EXPECT_LT(std::abs(run.f_hat[n] - 50.0), 0.01) << n;
    EXPECT_LT(run.qminus_norm[n], 1e-6) << n;
  }
}

TEST(ThreePhase, RejectsInvalidSampling) {
  ThreePhaseParams p;
  p.dt = 0.0;
  EXPECT_THROW(validate(p), UsageError);
  p.dt = 0.011;  // f dt > 0.5
  EXPECT_THROW(validate(p), UsageError);
}

// --------------------------------------------------------------- bearings

TEST(Bearings, DefaultNetworkShape) {
  const BearingsParams p;
  const BearingsScenario sc = make_bearings_scenario(p);
  ASSERT_EQ(sc.network.n_agents, 20u);
  std::size_t edges = 0;
  for (std::size_t l = 0; l < 20; ++l) edges += sc.network.degree(l);
  EXPECT_EQ(edges / 2, 43u);
  EXPECT_TRUE(is_connected(sc.network));
  EXPECT_EQ(sc.network.degree(sc.leaf), 1u);
  const double h = p.cube / 2.0;
  for (const auto& s : sc.sensors) {
    EXPECT_EQ(s.r, 0.0);
    EXPECT_LE(std::max({std::abs(s.i), std::abs(s.j), std::abs(s.k)}), h);
  }
}

TEST(Bearings, NoiselessExactInitialisationStaysExact) {
  BearingsParams p;
  p.accel_var = 0.0;
  p.obs_var = 0.0;
  p.init_std = 0.0;
  const BearingsScenario sc = make_bearings_scenario(p);
  const BearingsRun run = run_bearings(p, sc, 5, 60);
  for (const auto& row : run.pos_error)
    for (double e : row) EXPECT_LT(e, 1e-6);
}

TEST(Bearings, DiffusionHelpsTheLeaf) {
  const BearingsParams p;
  BearingsParams solo = p;
  solo.fusion = BearingsFusion::none;
  const BearingsScenario sc = make_bearings_scenario(p);
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed)
    wins += run_bearings(p, sc, seed, 100).leaf_rms < run_bearings(solo, sc, seed, 100).leaf_rms;
  EXPECT_EQ(wins, 5);
}

TEST(Bearings, ParameterValidation) {
  ParamSet ps;
  declare_bearings(ps);
  ps.set("fusion", "sometimes");
  std::string topo;
  EXPECT_THROW(bearings_params(ps, &topo), UsageError);
  BearingsParams p;
  p.dt = -1.0;
  EXPECT_THROW(validate(p), UsageError);
}

// ----------------------------------------------------------------- flight

TEST(Flight, ZeroStateGivesZeroTrajectory) {
  const QVector zero(2);
  const FlightRun run = run_flight(FlightParams{}, 1, 80, nullptr, &zero);
  for (const auto& s : run.states) EXPECT_EQ(norm(s), 0.0);
  for (const auto& u : run.inputs) EXPECT_EQ(norm(u), 0.0);
}

TEST(Flight, ClosedLoopIsStableAndDecays) {
  const FlightParams p;
  EXPECT_LT(spectral_radius(flight_monodromy(p)), 1.0);
  const FlightRun run = run_flight(p, 3, 1000);
  EXPECT_LT(run.phi_norm.back(), 1e-4 * run.phi_norm.front());
  EXPECT_LT(run.max_input_inconsistency, 1e-12);
}

TEST(Flight, RejectsIndefiniteR) {
  FlightParams p;
  p.r_coupling = 6.0;  // 2 x 2 R = 10 I - 6 (1 1^T) has eigenvalue -2
  EXPECT_THROW(validate(p), UsageError);
  p = FlightParams{};
  p.apply = 2.0;  // longer than the segment
  EXPECT_THROW(validate(p), UsageError);
}

// ----------------------------------------------------------------- motion

TEST(Motion, WrapAndEulerMap) {
  EXPECT_NEAR(wrap_angle(3.0 * std::numbers::pi), std::numbers::pi, 1e-12);
  EXPECT_NEAR(wrap_angle(-std::numbers::pi), std::numbers::pi, 1e-12);
  EXPECT_NEAR(wrap_angle(0.5), 0.5, 1e-15);
  const Quaternion q = euler_to_quaternion(0.3, -0.2, 1.1);
  EXPECT_NEAR(norm(q), 1.0, 1e-15);
  // Pure yaw: exp(k yaw / 2).
  const Quaternion y = euler_to_quaternion(0.0, 0.0, 0.8);
  EXPECT_LT(max_abs_diff(y, Quaternion(std::cos(0.4), 0.0, 0.0, std::sin(0.4))), 1e-15);
}

TEST(Motion, ConstantAnglesGiveZeroError) {
  MotionParams p;
  p.constant = true;
  const MotionRun run = run_motion(p, 2, 3000);
  EXPECT_LT(run.err_qlms.back(), 1e-12);
  EXPECT_LT(run.err_lms.back(), 1e-12);
}

TEST(Motion, QuaternionTrackIsContinuousAcrossYawWrap) {
  const MotionRun run = run_motion(MotionParams{}, 1, 2000);
  double q_jump = 0.0, yaw_jump = 0.0;
  for (std::size_t n = 1; n < run.q.size(); ++n) {
    q_jump = std::max(q_jump, norm(run.q[n] - run.q[n - 1]));
    yaw_jump = std::max(yaw_jump, std::abs(run.yaw_wrapped[n] - run.yaw_wrapped[n - 1]));
  }
  EXPECT_GT(yaw_jump, 6.0);
  EXPECT_LT(q_jump, 0.1);
}

TEST(Motion, QlmsBeatsChannelwiseLms) {
  const MotionRun run = run_motion(MotionParams{}, 7, 3000);
  EXPECT_LT(run.mse_qlms, run.mse_lms);
}

// ------------------------------------------------------------------ qubit

TEST(Qubit, GateParsing) {
  const auto gates = parse_gates("X90 1 0 0 90; 0 0 1 45");
  ASSERT_EQ(gates.size(), 2u);
  EXPECT_EQ(gates[0].name, "X90");
  EXPECT_EQ(gates[1].name, "g1");
  const double c = std::cos(std::numbers::pi / 4), s = std::sin(std::numbers::pi / 4);
  EXPECT_LT(max_abs_diff(gates[0].w, Quaternion(c, s, 0.0, 0.0)), 1e-15);
  EXPECT_THROW(parse_gates("X 1 0"), UsageError);
  EXPECT_THROW(parse_gates("Z 0 0 0 30"), UsageError);
}

TEST(Qubit, EmptyGateSetRejected) {
  QubitParams p;
  p.target = parse_gates("1 0 0 90");
  EXPECT_THROW(validate(p), UsageError);
}

TEST(Qubit, ProbesArePureUnit) {
  const auto probes = qubit_probes(4, 3);
  ASSERT_EQ(probes.size(), 10u);
  for (const auto& q : probes) {
    EXPECT_NEAR(norm(q), 1.0, 1e-15);
    EXPECT_EQ(q.r, 0.0);
  }
}

TEST(Qubit, CircuitActsAsRotation) {
  const Quaternion w = make_gate("Z90", 0, 0, 1, 90).w;
  // 90 degrees about z maps i to j.
  EXPECT_LT(max_abs_diff(apply_circuit({w}, Quaternion::unit_i()), Quaternion::unit_j()), 1e-15);
  const auto probes = qubit_probes(2, 1);
  EXPECT_LT(circuit_residual({w}, w, probes), 1e-30);
}

TEST(Qubit, RecoversTwoGateComposition) {
  ParamSet ps;
  declare_qubit(ps);
  ps.set("max_depth", "2");
  const QubitReport rep = run_qubit(qubit_params(ps), 2, 200);
  EXPECT_EQ(rep.depths[rep.selected].depth, 2u);
  EXPECT_LT(rep.depths[rep.selected].residual_projected, 1e-6);
}

}  // namespace
}  // namespace hrcalc::experiments
