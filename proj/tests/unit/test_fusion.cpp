#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "hrcalc/augmentation.hpp"
#include "hrcalc/errors.hpp"
#include "hrcalc/fusion.hpp"
#include "test_random.hpp"

using namespace hrcalc;
using hrcalc::testing::Rand;

namespace {

AugmentedVector aug(const QVector& v) { return augment(v); }

std::vector<std::pair<std::size_t, std::size_t>> ring(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> e;
  for (std::size_t l = 0; l < n; ++l) e.emplace_back(l, (l + 1) % n);
  return e;
}

std::vector<std::pair<std::size_t, std::size_t>> complete(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> e;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) e.emplace_back(a, b);
  return e;
}

}  // namespace

TEST(Network, MetropolisWeights) {
  const AgentNetwork net = make_network(5, {{0, 1}, {1, 2}, {1, 3}, {3, 4}});
  validate_network(net);
  const Eigen::MatrixXd& c = net.combine_weights;
  for (int l = 0; l < 5; ++l) EXPECT_DOUBLE_EQ(c.row(l).sum(), 1.0);
  EXPECT_TRUE(c.isApprox(c.transpose(), 0.0));
  EXPECT_DOUBLE_EQ(c(0, 1), 1.0 / 4.0);  // deg 1 vs deg 3
  EXPECT_DOUBLE_EQ(c(3, 4), 1.0 / 3.0);  // deg 2 vs deg 1
  EXPECT_EQ(c(0, 2), 0.0);
  // Off-diagonal rows sum to at most 1 (doubly substochastic).
  for (int l = 0; l < 5; ++l) EXPECT_LE(c.row(l).sum() - c(l, l), 1.0);
  EXPECT_TRUE(is_connected(net));
  EXPECT_FALSE(is_connected(make_network(3, {{0, 1}})));
  EXPECT_THROW(make_network(3, {{0, 3}}), UsageError);
  EXPECT_THROW(make_network(3, {{1, 1}}), UsageError);
}

TEST(Network, TopologyFile) {
  std::stringstream ss("# demo\nagents 4\nedge 0 1\nedge 1 2  # trailing comment\nedge 2 3\n");
  const AgentNetwork net = read_topology(ss);
  EXPECT_EQ(net.n_agents, 4u);
  EXPECT_EQ(net.degree(1), 2u);
  std::stringstream out;
  write_topology(out, net);
  EXPECT_EQ(out.str(), "agents 4\nedge 0 1\nedge 1 2\nedge 2 3\n");
  std::stringstream bad1("edge 0 1\n"), bad2("agents 2\nedge 0\n"), bad3("agents 2\nlink 0 1\n");
  EXPECT_THROW(read_topology(bad1), UsageError);
  EXPECT_THROW(read_topology(bad2), UsageError);
  EXPECT_THROW(read_topology(bad3), UsageError);
}

TEST(FuseWeighted, Examples) {
  Rand rng(200);
  const QVector e = rng.vec(2);
  FusionInput in{{aug(e), aug(e), aug(e)}, {}};
  EXPECT_LE(max_abs_diff(fuse_weighted(in, {0.2, 0.3, 0.5}).stacked, augment_stacked(e)), 1e-15);
  FusionInput two{{aug({Quaternion(0.0)}), aug({Quaternion(1.0)})}, {}};
  EXPECT_EQ(fuse_weighted(two, {0.5, 0.5}).stacked[0], Quaternion(0.5));
  EXPECT_THROW(fuse_weighted(two, {0.5, 0.6}), UsageError);
  EXPECT_THROW(fuse_weighted(two, {1.5, -0.5}), UsageError);
}

TEST(FuseWeighted, PermutationAndConvexity) {
  Rand rng(201);
  std::vector<QVector> xs;
  std::vector<double> w;
  for (int l = 0; l < 5; ++l) {
    xs.push_back(augment_stacked(rng.vec(2)));
    w.push_back(rng.uniform(0.1, 1.0));
  }
  const double s = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= s;
  w.back() = 1.0 - std::accumulate(w.begin(), w.end() - 1, 0.0);
  const QVector f = fuse_weighted(xs, w);
  std::vector<std::size_t> perm = {3, 0, 4, 1, 2};
  std::vector<QVector> px;
  std::vector<double> pw;
  for (auto p : perm) {
    px.push_back(xs[p]);
    pw.push_back(w[p]);
  }
  EXPECT_LE(max_abs_diff(fuse_weighted(px, pw), f), 1e-14);
  for (std::size_t n = 0; n < f.size(); ++n)
    for (int c = 0; c < 4; ++c) {
      double lo = 1e300, hi = -1e300;
      for (const auto& x : xs) {
        lo = std::min(lo, x[n][c]);
        hi = std::max(hi, x[n][c]);
      }
      EXPECT_GE(f[n][c], lo - 1e-14);
      EXPECT_LE(f[n][c], hi + 1e-14);
    }
}

TEST(FuseWeighted, InverseVarianceMonteCarlo) {
  Rand rng(202);
  const std::vector<double> sd = {0.5, 1.0, 2.0};
  std::vector<double> w;
  for (double s : sd) w.push_back(1.0 / (s * s));
  const double tot = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= tot;
  w.back() = 1.0 - w[0] - w[1];
  const Quaternion truth(1.0, -2.0, 0.5, 3.0);
  double fused_mse = 0.0;
  std::vector<double> single_mse(sd.size(), 0.0);
  for (int d = 0; d < 2000; ++d) {
    std::vector<QVector> xs;
    for (std::size_t l = 0; l < sd.size(); ++l) {
      const Quaternion x = truth + rng.quat(sd[l]);
      single_mse[l] += norm_squared(x - truth);
      xs.push_back({x});
    }
    fused_mse += norm_squared(fuse_weighted(xs, w)[0] - truth);
  }
  EXPECT_LE(fused_mse, *std::min_element(single_mse.begin(), single_mse.end()));
}

TEST(FuseCovariance, Examples) {
  Rand rng(203);
  const QMatrix sigma = rng.hpd(4);
  const QVector x = augment_stacked(rng.vec(1));
  const AugmentedVector zero{1, QVector(4)};
  EXPECT_LE(max_abs_diff(fuse_covariance_weighted({{{1, x}}, {sigma}}, zero, sigma).stacked, x),
            1e-10);

  // Isotropic covariances w_l^-1 I with G = I reduce to fuse_weighted.
  const std::vector<double> w = {0.2, 0.3, 0.5};
  FusionInput in;
  for (double wl : w) {
    in.estimates.push_back(aug(rng.vec(2)));
    in.covariances.push_back(QMatrix::identity(8) * (1.0 / wl));
  }
  const QMatrix g = optimal_fusion_gain(in.covariances);
  EXPECT_LE(max_abs_diff(g, QMatrix::identity(8)), 1e-12);
  const AugmentedVector zero2{2, QVector(8)};
  EXPECT_LE(max_abs_diff(fuse_covariance_weighted(in, zero2, g).stacked, fuse_weighted(in, w).stacked),
            1e-10);

  // Covariance ratio 1:4 pulls the fused value 4:1 toward the precise sensor.
  const QVector a = augment_stacked({Quaternion(1.0, 2.0, 0.0, -1.0)});
  const QVector b = augment_stacked({Quaternion(-3.0, 0.5, 2.0, 1.0)});
  const std::vector<QMatrix> covs = {QMatrix::identity(4), 4.0 * QMatrix::identity(4)};
  const AugmentedVector f =
      fuse_covariance_weighted({{{1, a}, {1, b}}, covs}, {1, augment_stacked({rng.quat()})},
                               optimal_fusion_gain(covs));
  EXPECT_LE(max_abs_diff(f.stacked, 0.8 * a + 0.2 * b), 1e-10);

  // Singular covariance names the sensor.
  try {
    fuse_covariance_weighted({{{1, a}, {1, b}}, {QMatrix::identity(4), QMatrix(4, 4)}}, zero, sigma);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("agent 1"), std::string::npos);
  }
}

TEST(Diffusion, CovarianceCombination) {
  Rand rng(211);
  const AgentNetwork net = make_network(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {1, 3}});
  std::vector<QVector> x;
  std::vector<QMatrix> m;
  for (std::size_t l = 0; l < 5; ++l) {
    x.push_back(augment_stacked(rng.vec(2)));
    Eigen::MatrixXd b(8, 8);
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = rng.normal();
    const Eigen::MatrixXd spd = b * b.transpose() + Eigen::MatrixXd::Identity(8, 8);
    m.push_back(symmetrize(augmented_covariance_from_real(spd)));
  }
  const CovarianceCombination c = diffusion_combine_covariance(net, x, m);
  ASSERT_EQ(c.x.size(), 5u);
  for (std::size_t l = 0; l < 5; ++l) {
    // Oracle: the general fusion rule with Σ_k = M_k / c_lk and the optimal gain.
    FusionInput in;
    for (std::size_t k = 0; k < 5; ++k) {
      const double w = net.combine_weights(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k));
      if (w == 0.0) continue;
      in.estimates.push_back({2, x[k]});
      in.covariances.push_back((1.0 / w) * m[k]);
    }
    const QMatrix g = optimal_fusion_gain(in.covariances);
    const AugmentedVector f = fuse_covariance_weighted(in, {2, QVector(8)}, g);
    EXPECT_LE(max_abs_diff(c.x[l], f.stacked), 1e-8) << "agent " << l;
    EXPECT_LE(max_abs_diff(c.M[l], g), 1e-8) << "agent " << l;
    EXPECT_LE(max_abs_diff(c.M[l], hermitian(c.M[l])), 1e-12);
    // Augmented structure survives the combination.
    EXPECT_LE(max_abs_diff(c.x[l], augment_stacked(deaugment(c.x[l], false))), 1e-10);
  }

  // Agreeing agents are left unchanged.
  const std::vector<QVector> same(5, x[0]);
  const std::vector<QMatrix> same_m(5, m[0]);
  const CovarianceCombination u = diffusion_combine_covariance(net, same, same_m);
  for (std::size_t l = 0; l < 5; ++l) {
    EXPECT_LE(max_abs_diff(u.x[l], x[0]), 1e-9);
    EXPECT_LE(max_abs_diff(u.M[l], m[0]), 1e-9);
  }

  m[3] = QMatrix(8, 8);
  try {
    diffusion_combine_covariance(net, x, m);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("agent 3"), std::string::npos);
  }
  EXPECT_THROW(diffusion_combine_covariance(net, {x[0]}, {m[0]}), UsageError);
}

TEST(Diffusion, DisconnectedEqualsIndependent) {
  Rand rng(210);
  const AgentNetwork net = make_network(3, {});
  std::vector<LmsFilter> agents(3, LmsFilter{QVector(8), 0.05});
  std::vector<LmsFilter> solo = agents;
  for (int n = 0; n < 20; ++n) {
    std::vector<LmsObservation> obs;
    for (int l = 0; l < 3; ++l) obs.push_back({rng.vec(2), rng.quat()});
    agents = diffusion_round(net, agents, obs, n);
    for (int l = 0; l < 3; ++l) solo[l] = qlms_step(solo[l], obs[l].z, obs[l].y).filter;
  }
  for (int l = 0; l < 3; ++l) EXPECT_EQ(agents[l].w, solo[l].w);
}

TEST(Diffusion, CompleteGraphAgrees) {
  Rand rng(211);
  const AgentNetwork net = make_network(4, complete(4));
  for (int l = 0; l < 4; ++l) EXPECT_DOUBLE_EQ(net.combine_weights(l, l), 0.25);
  std::vector<LmsFilter> agents;
  for (int l = 0; l < 4; ++l) agents.push_back({rng.vec(4), 0.1});
  const LmsObservation o{rng.vec(1), rng.quat()};
  const auto out = diffusion_round(net, agents, std::vector<LmsObservation>(4, o));
  for (int l = 1; l < 4; ++l) EXPECT_LE(max_abs_diff(out[l].w, out[0].w), 1e-14);
  const auto cd = consensus_distances({out[0].w, out[1].w, out[2].w, out[3].w});
  EXPECT_LE(*std::max_element(cd.begin(), cd.end()), 1e-14);
}

TEST(Diffusion, MixingIsNonExpansive) {
  Rand rng(212);
  const AgentNetwork net = make_network(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {1, 4}});
  const QVector ref = rng.vec(3);
  std::vector<QVector> psi;
  for (int l = 0; l < 6; ++l) psi.push_back(ref + rng.vec(3, rng.uniform(0.1, 2.0)));
  double before = 0.0, after = 0.0;
  for (const auto& p : psi) before = std::max(before, norm(p - ref));
  for (const auto& p : diffusion_combine(net, psi)) after = std::max(after, norm(p - ref));
  EXPECT_LE(after, before + 1e-14);
}

TEST(Diffusion, ErrorsCarryAgentIndex) {
  const AgentNetwork net = make_network(2, {{0, 1}});
  std::vector<LmsFilter> agents = {{QVector(4), 0.1}, {QVector(8), 0.1}};
  const LmsObservation o{{Quaternion(1.0)}, Quaternion(1.0)};
  try {
    diffusion_round(net, agents, {o, o});
    FAIL() << "expected UsageError";
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("agent 1"), std::string::npos);
  }
}

TEST(Diffusion, RingKalmanBeatsNonCooperative) {
  // Two quaternion states; agent l observes state l % 2 only.
  const std::size_t agents = 8;
  const AgentNetwork ring8 = make_network(agents, ring(agents));
  const AgentNetwork alone = make_network(agents, {});
  QMatrix fq(2, 2);
  fq(0, 0) = 0.9 * Quaternion(0.8, 0.6, 0.0, 0.0);
  fq(0, 1) = Quaternion(0.3);
  fq(1, 0) = Quaternion(-0.3);
  fq(1, 1) = 0.9 * Quaternion(0.8, 0.0, 0.0, 0.6);
  const QMatrix f = augmented_linear_operator(fq);
  const QMatrix sv = QMatrix::identity(8) * (4.0 * 0.05);
  std::vector<StateSpaceModel> models;
  std::vector<double> sw;
  for (std::size_t l = 0; l < agents; ++l) {
    QMatrix h(1, 2);
    h(0, l % 2) = Quaternion(1.0);
    sw.push_back(0.2 + 0.1 * static_cast<double>(l));
    models.push_back({f, {}, augmented_linear_operator(h), sv,
                      QMatrix::identity(4) * (4.0 * sw.back() * sw.back())});
  }
  const int seeds = 200, steps = 40, burn = 20;
  double mse_coop = 0.0, mse_solo = 0.0;
  for (int seed = 0; seed < seeds; ++seed) {
    Rand rng(5000 + seed);
    QVector x = rng.vec(2);
    std::vector<KalmanState> coop(agents, KalmanState{QVector(8), QMatrix::identity(8) * 4.0, {}});
    std::vector<KalmanState> solo = coop;
    for (int n = 0; n < steps; ++n) {
      x = fq * x + rng.vec(2, std::sqrt(0.05));
      std::vector<QVector> obs;
      for (std::size_t l = 0; l < agents; ++l)
        obs.push_back(augment_stacked({x[l % 2] + rng.quat(sw[l])}));
      coop = diffusion_round(ring8, models, coop, obs);
      solo = diffusion_round(alone, models, solo, obs);
      if (n < burn) continue;
      for (std::size_t l = 0; l < agents; ++l) {
        mse_coop += norm_squared(x - deaugment(coop[l].x_hat, false));
        mse_solo += norm_squared(x - deaugment(solo[l].x_hat, false));
      }
    }
  }
  EXPECT_LT(mse_coop, mse_solo);
  RecordProperty("mse_ratio", std::to_string(mse_coop / mse_solo));
}

TEST(Federated, Examples) {
  Rand rng(220);
  const QVector c0 = rng.vec(4);
  std::vector<LmsFilter> agents(3, LmsFilter{c0, 0.05});
  std::vector<std::vector<LmsObservation>> data(3);
  for (auto& d : data)
    for (int n = 0; n < 5; ++n) d.push_back({rng.vec(1), rng.quat()});
  const FederatedResult one = federated_round(c0, agents, {false, true, false}, data);
  LmsFilter solo{c0, 0.05};
  for (const auto& o : data[1]) solo = qlms_step(solo, o.z, o.y).filter;
  EXPECT_FALSE(one.skipped);
  EXPECT_LE(max_abs_diff(one.center, solo.w), 1e-15);
  for (const auto& a : one.agents) EXPECT_EQ(a.w, one.center);

  const FederatedResult same =
      federated_round(c0, agents, {true, true, true}, {data[0], data[0], data[0]});
  LmsFilter s0{c0, 0.05};
  for (const auto& o : data[0]) s0 = qlms_step(s0, o.z, o.y).filter;
  EXPECT_LE(max_abs_diff(same.center, s0.w), 1e-14);

  const FederatedResult none = federated_round(c0, agents, {false, false, false}, data);
  EXPECT_TRUE(none.skipped);
  EXPECT_EQ(none.center, c0);
}

TEST(Federated, BeatsSoloTrainingOnShards) {
  // Each agent's shard excites a different subspace of the regressor.
  const std::size_t agents = 4, m = 2, rounds = 20, batch = 25;
  int wins = 0;
  double center_err = 0.0, best_solo_err = 0.0;
  for (int seed = 0; seed < 50; ++seed) {
    Rand rng(7000 + seed);
    const QVector w_true = rng.vec(4 * m, 0.5);
    std::vector<Eigen::VectorXd> scale(agents);
    for (std::size_t l = 0; l < agents; ++l) {
      scale[l] = Eigen::VectorXd::Constant(4 * m, 0.15);
      for (std::size_t c = 0; c < 4 * m; ++c)
        if (c % agents == l) scale[l](static_cast<Eigen::Index>(c)) = 1.0;
    }
    auto draw = [&](std::size_t l) {
      Eigen::VectorXd x(4 * m);
      for (Eigen::Index c = 0; c < x.size(); ++c) x(c) = scale[l](c) * rng.normal();
      const QVector z = from_real_components(x);
      return LmsObservation{z, dot_t(w_true, augment_stacked(z)) + rng.quat(0.05)};
    };
    std::vector<std::vector<std::vector<LmsObservation>>> shards(
        rounds, std::vector<std::vector<LmsObservation>>(agents));
    std::vector<QVector> all_z;
    std::vector<Quaternion> all_y;
    for (auto& r : shards)
      for (std::size_t l = 0; l < agents; ++l)
        for (std::size_t n = 0; n < batch; ++n) {
          r[l].push_back(draw(l));
          all_z.push_back(r[l].back().z);
          all_y.push_back(r[l].back().y);
        }
    const QVector w_opt = wl_mmse_fit(all_z, all_y);
    const double gamma = 0.5 * qlms_default_gamma(all_z, 0.1);

    QVector center(4 * m);
    std::vector<LmsFilter> fed(agents, LmsFilter{center, gamma});
    std::vector<LmsFilter> solo = fed;
    for (std::size_t r = 0; r < rounds; ++r) {
      const FederatedResult res = federated_round(center, fed, std::vector<bool>(agents, true), shards[r]);
      center = res.center;
      fed = res.agents;
      for (std::size_t l = 0; l < agents; ++l)
        for (const auto& o : shards[r][l]) solo[l] = qlms_step(solo[l], o.z, o.y).filter;
    }
    double best = 1e300;
    for (const auto& s : solo) best = std::min(best, norm(s.w - w_opt));
    const double ce = norm(center - w_opt);
    center_err += ce;
    best_solo_err += best;
    if (ce < best) ++wins;
  }
  EXPECT_LT(center_err, best_solo_err);
  EXPECT_GE(wins, 45);
}

TEST(NetworkMetrics, Csv) {
  std::stringstream ss;
  NetworkMetricsWriter w(ss);
  w.row(1, 2, 0.5, 0.25);
  EXPECT_EQ(ss.str(), "round,agent,mse,consensus_distance\n1,2,0.5,0.25\n");
}
