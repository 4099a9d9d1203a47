#include "hrcalc/experiments/bearings.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>

#include "hrcalc/augmentation.hpp"
#include "hrcalc/errors.hpp"
#include "hrcalc/io.hpp"
#include "hrcalc/kalman.hpp"

namespace hrcalc::experiments {

namespace {

using Edge = std::pair<std::size_t, std::size_t>;

// Added to every real variance so that each agent's covariance stays
// invertible for the covariance-weighted combination.
constexpr double kVarianceFloor = 1e-9;

double dist(const Quaternion& a, const Quaternion& b) { return norm(a - b); }

// Real covariance of (q, v) for white acceleration of variance `var` per
// imaginary axis; component-major ordering with entries (q, v).
Eigen::MatrixXd motion_covariance(double var, double dt) {
  Eigen::MatrixXd c = kVarianceFloor * Eigen::MatrixXd::Identity(8, 8);
  for (int comp = 1; comp < 4; ++comp) {
    const int q = 2 * comp, v = 2 * comp + 1;
    c(q, q) += var * std::pow(dt, 4) / 4.0;
    c(q, v) = c(v, q) = var * std::pow(dt, 3) / 2.0;
    c(v, v) += var * dt * dt;
  }
  return c;
}

Eigen::MatrixXd prior_covariance(double var) {
  Eigen::MatrixXd c = kVarianceFloor * Eigen::MatrixXd::Identity(8, 8);
  for (int idx = 2; idx < 8; ++idx) c(idx, idx) += var;
  return c;
}

bool inside(const Quaternion& q, double half) {
  return std::abs(q.i) <= half && std::abs(q.j) <= half && std::abs(q.k) <= half;
}

}  // namespace

void declare_bearings(ParamSet& p) {
  const BearingsParams d;
  p.declare("cube", format_real(d.cube), "side of the sensor cube");
  p.declare("agents", std::to_string(d.agents), "number of agents (generated network)");
  p.declare("edges", std::to_string(d.edges), "number of edges (generated network)");
  p.declare("dt", format_real(d.dt), "sampling interval (s)");
  p.declare("accel_var", format_real(d.accel_var), "acceleration variance per axis");
  p.declare("obs_var", format_real(d.obs_var), "bearing noise variance per axis");
  p.declare("init_std", format_real(d.init_std), "prior std of position and velocity");
  p.declare("fusion", "diffusion", "diffusion, average or none");
  p.declare("topology_seed", std::to_string(d.topology_seed), "seed of sensor placement");
  p.declare("topology", "", "topology file (empty: generated network)");
}

BearingsParams bearings_params(const ParamSet& s, std::string* topology_path) {
  BearingsParams p;
  p.cube = s.real("cube");
  p.agents = s.count("agents");
  p.edges = s.count("edges");
  p.dt = s.real("dt");
  p.accel_var = s.real("accel_var");
  p.obs_var = s.real("obs_var");
  p.init_std = s.real("init_std");
  const std::string& f = s.text("fusion");
  if (f == "diffusion") p.fusion = BearingsFusion::diffusion;
  else if (f == "average") p.fusion = BearingsFusion::average;
  else if (f == "none") p.fusion = BearingsFusion::none;
  else throw UsageError("bearings: fusion must be diffusion, average or none");
  p.topology_seed = s.u64("topology_seed");
  if (topology_path) *topology_path = s.text("topology");
  validate(p);
  return p;
}

void validate(const BearingsParams& p) {
  auto req = [](bool ok, const char* what) {
    if (!ok) throw UsageError(std::string("bearings: ") + what);
  };
  req(std::isfinite(p.cube) && p.cube > 0.0, "cube must be positive");
  req(std::isfinite(p.dt) && p.dt > 0.0, "dt must be positive");
  req(p.agents >= 3, "need at least three agents");
  req(p.edges >= p.agents && p.edges <= (p.agents - 1) * (p.agents - 2) / 2 + 1,
      "edges must lie between agents and (agents-1)(agents-2)/2 + 1");
  req(std::isfinite(p.accel_var) && p.accel_var >= 0.0, "accel_var must be non-negative");
  req(std::isfinite(p.obs_var) && p.obs_var >= 0.0, "obs_var must be non-negative");
  req(std::isfinite(p.init_std) && p.init_std >= 0.0, "init_std must be non-negative");
}

BearingsScenario make_bearings_scenario(const BearingsParams& p, const AgentNetwork& net) {
  validate(p);
  BearingsScenario sc;
  Rng rng(child_seed(p.topology_seed, 0));
  const double h = p.cube / 2.0;
  for (std::size_t l = 0; l < net.n_agents; ++l)
    sc.sensors.push_back({0.0, rng.uniform(-h, h), rng.uniform(-h, h), rng.uniform(-h, h)});
  validate_network(net);
  sc.network = net;
  sc.leaf = 0;
  for (std::size_t l = 1; l < net.n_agents; ++l)
    if (net.degree(l) < net.degree(sc.leaf)) sc.leaf = l;
  return sc;
}

BearingsScenario make_bearings_scenario(const BearingsParams& p) {
  validate(p);
  const std::size_t n = p.agents;
  Rng rng(child_seed(p.topology_seed, 0));
  const double h = p.cube / 2.0;
  std::vector<Quaternion> pos;
  for (std::size_t l = 0; l < n; ++l)
    pos.push_back({0.0, rng.uniform(-h, h), rng.uniform(-h, h), rng.uniform(-h, h)});

  // Candidate edges among agents 1..n-1, shortest first (ties by index).
  std::vector<Edge> cand;
  for (std::size_t a = 1; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) cand.emplace_back(a, b);
  std::stable_sort(cand.begin(), cand.end(), [&](const Edge& x, const Edge& y) {
    return dist(pos[x.first], pos[x.second]) < dist(pos[y.first], pos[y.second]);
  });
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  std::vector<std::size_t> deg(n, 0);
  std::vector<Edge> edges;
  auto add = [&](std::size_t a, std::size_t b) {
    adj[a][b] = adj[b][a] = true;
    ++deg[a];
    ++deg[b];
    edges.emplace_back(a, b);
  };
  // Kruskal over agents 1..n-1.
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& [a, b] : cand) {
    const std::size_t ra = find(a), rb = find(b);
    if (ra == rb) continue;
    parent[ra] = rb;
    add(a, b);
  }
  // Agent 0 is the single leaf.
  std::size_t nearest = 1;
  for (std::size_t l = 2; l < n; ++l)
    if (dist(pos[0], pos[l]) < dist(pos[0], pos[nearest])) nearest = l;
  add(0, nearest);
  for (std::size_t l = 1; l < n && edges.size() < p.edges; ++l) {
    if (deg[l] != 1) continue;
    for (const auto& [a, b] : cand)
      if ((a == l || b == l) && !adj[a][b]) {
        add(a, b);
        break;
      }
  }
  for (const auto& [a, b] : cand) {
    if (edges.size() >= p.edges) break;
    if (!adj[a][b]) add(a, b);
  }
  BearingsScenario sc;
  sc.sensors = pos;
  sc.network = make_network(n, edges);
  sc.leaf = 0;
  return sc;
}

BearingsRun run_bearings(const BearingsParams& p, const BearingsScenario& sc, std::uint64_t seed,
                         std::size_t steps, std::ostream* csv) {
  validate(p);
  const std::size_t n = sc.network.n_agents;
  if (sc.sensors.size() != n) throw UsageError("bearings: one sensor position per agent");
  Rng truth_rng(child_seed(seed, 0));
  const double h = p.cube / 2.0;

  NonlinearStateModel base;
  const double dt = p.dt;
  base.f = [dt](const QVector& x) { return QVector{x[0] + dt * x[1], x[1]}; };
  base.Sigma_v = augmented_covariance_from_real(motion_covariance(p.accel_var, dt));
  Eigen::MatrixXd w = Eigen::MatrixXd::Identity(4, 4) * std::max(p.obs_var, 1e-12);
  base.Sigma_w = augmented_covariance_from_real(w);
  std::vector<NonlinearStateModel> models(n, base);
  for (std::size_t l = 0; l < n; ++l) {
    const Quaternion s = sc.sensors[l];
    models[l].h = [s](const QVector& x) {
      const Quaternion d = x[0] - s;
      return QVector{d / norm(d)};
    };
  }

  Quaternion q{0.0, truth_rng.uniform(-h / 2, h / 2), truth_rng.uniform(-h / 2, h / 2),
               truth_rng.uniform(-h / 2, h / 2)};
  Quaternion v;
  std::vector<EkfState> est(n);
  const QMatrix m0 = augmented_covariance_from_real(prior_covariance(p.init_std * p.init_std));
  for (std::size_t l = 0; l < n; ++l) {
    Rng init_rng(child_seed(seed, 1000 + l));
    est[l].x = QVector{q + init_rng.pure(p.init_std), v + init_rng.pure(p.init_std)};
    est[l].M = m0;
  }

  BearingsRun run;
  run.leaf = sc.leaf;
  if (csv) *csv << "step,agent,pos_error,est_i,est_j,est_k,true_i,true_j,true_k\n";
  auto record = [&](std::size_t step) {
    std::vector<double> row(n);
    for (std::size_t l = 0; l < n; ++l) {
      row[l] = norm(est[l].x[0] - q);
      if (csv)
        *csv << step << ',' << l << ',' << format_real(row[l]) << ',' << format_real(est[l].x[0].i)
             << ',' << format_real(est[l].x[0].j) << ',' << format_real(est[l].x[0].k) << ','
             << format_real(q.i) << ',' << format_real(q.j) << ',' << format_real(q.k) << '\n';
    }
    run.pos_error.push_back(std::move(row));
  };
  record(0);
  Rng noise_rng(child_seed(seed, 1));
  for (std::size_t step = 1; step <= steps; ++step) {
    const Quaternion u =
        p.accel_var > 0.0 ? truth_rng.pure(std::sqrt(p.accel_var)) : Quaternion{};
    q = q + dt * v + (dt * dt / 2.0) * u;
    v = v + dt * u;
    if (!inside(q, h)) run.left_cube = true;
    std::vector<QVector> psi(n);
    std::vector<QMatrix> cov(n);
    for (std::size_t l = 0; l < n; ++l) {
      const Quaternion d = q - sc.sensors[l];
      Quaternion y = d / norm(d);
      if (p.obs_var > 0.0) y += noise_rng.pure(std::sqrt(p.obs_var));
      try {
        est[l] = ekf_step(models[l], est[l], QVector{y}, step);
      } catch (const NumericError& e) {
        throw NumericError("bearings: agent " + std::to_string(l) + ": " + e.what(), e.condition());
      }
      psi[l] = augment_stacked(est[l].x);
      cov[l] = est[l].M;
    }
    if (p.fusion == BearingsFusion::average) {
      const std::vector<QVector> combined = diffusion_combine(sc.network, psi);
      for (std::size_t l = 0; l < n; ++l) est[l].x = deaugment(combined[l], false);
    } else if (p.fusion == BearingsFusion::diffusion) {
      CovarianceCombination c = diffusion_combine_covariance(sc.network, psi, cov);
      for (std::size_t l = 0; l < n; ++l) {
        est[l].x = deaugment(c.x[l], false);
        est[l].M = std::move(c.M[l]);
      }
    }
    record(step);
  }
  double leaf = 0.0, all = 0.0;
  for (std::size_t step = 1; step <= steps; ++step) {
    leaf += run.pos_error[step][sc.leaf] * run.pos_error[step][sc.leaf];
    for (double e : run.pos_error[step]) all += e * e;
  }
  if (steps > 0) {
    run.leaf_rms = std::sqrt(leaf / static_cast<double>(steps));
    run.network_rms = std::sqrt(all / static_cast<double>(steps * n));
  }
  return run;
}

}  // namespace hrcalc::experiments
