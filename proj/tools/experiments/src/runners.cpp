#include "hrcalc/experiments/runners.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "hrcalc/augmentation.hpp"
#include "hrcalc/control.hpp"
#include "hrcalc/errors.hpp"
#include "hrcalc/fusion.hpp"
#include "hrcalc/hr_calculus.hpp"
#include "hrcalc/io.hpp"
#include "hrcalc/kalman.hpp"
#include "hrcalc/qnn.hpp"

namespace hrcalc::experiments {

namespace {

std::ifstream open_input(const std::string& path, const std::string& what) {
  std::ifstream is(path);
  if (!is) throw UsageError("cannot open " + what + " '" + path + "'");
  return is;
}

// Improper regressor entry: x + a x^i, x ~ N(0, I_4).
Quaternion improper_sample(Rng& rng, double a) {
  const Quaternion x = rng.quat();
  return x + a * involution(x, Quaternion::unit_i());
}

QVector improper_vec(Rng& rng, std::size_t m, double a) {
  QVector v(m);
  for (auto& q : v) q = improper_sample(rng, a);
  return v;
}

// Step size from the data when the configured value is zero.
double resolve_gamma(double gamma, Rng rng, std::size_t m, double a) {
  if (gamma > 0.0) return gamma;
  if (gamma < 0.0) throw UsageError("gamma must be non-negative");
  std::vector<QVector> pilot;
  for (int k = 0; k < 200; ++k) pilot.push_back(improper_vec(rng, m, a));
  return qlms_default_gamma(pilot);
}

// Square root of a real PSD matrix through its eigen-decomposition.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& c) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (c + c.transpose()));
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal();
}

// Augmented sample with real covariance C of the stacked components, where
// the augmented covariance is A C A^H, so C = (A^H / 4) Sigma (A / 4).
QVector augmented_noise(Rng& rng, const Eigen::MatrixXd& root) {
  Eigen::VectorXd z(root.cols());
  for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = rng.normal();
  return augment_stacked(from_real_components(root * z));
}

Eigen::MatrixXd real_covariance(const QMatrix& sigma) {
  return 0.25 * real_operator_from_augmented(sigma);
}

}  // namespace

// ------------------------------------------------------------------- qlms

void declare_qlms(ParamSet& p) {
  p.declare("order", "2", "regressor length M");
  p.declare("gamma", "0", "step size, 0 picks 0.1 * 2 / rho from a pilot run");
  p.declare("noise_std", "0.05", "observation noise std per component");
  p.declare("improperness", "0.5", "a in x + a x^i for the regressor entries");
  p.declare("weight_std", "0.5", "std of the true widely linear weights");
}

int run_qlms(const ParamSet& p, std::uint64_t seed, std::size_t steps, std::ostream& csv,
             std::ostream&) {
  const std::size_t m = p.count("order");
  if (m == 0) throw UsageError("order must be positive");
  const double a = p.real("improperness");
  Rng rng(child_seed(seed, 0));
  const QVector w_true = rng.vec(4 * m, p.real("weight_std"));
  LmsFilter f{QVector(4 * m), resolve_gamma(p.real("gamma"), Rng(child_seed(seed, 1)), m, a)};
  csv << "step,err_sq,weight_dev\n";
  for (std::size_t n = 0; n < steps; ++n) {
    const QVector z = improper_vec(rng, m, a);
    const Quaternion y = dot_t(w_true, augment_stacked(z)) + rng.quat(p.real("noise_std"));
    const LmsStep s = qlms_step(f, z, y, n);
    f = s.filter;
    csv << n << ',' << format_real(norm_squared(s.error)) << ','
        << format_real(norm_squared(f.w - w_true)) << '\n';
  }
  return 0;
}

// ----------------------------------------------------------------- kalman

void declare_kalman(ParamSet& p) {
  p.declare("model", "", "model file; empty draws a random real-embedded model");
  p.declare("states", "2", "quaternion states of the random model");
  p.declare("rho", "0.95", "spectral radius of the random real transition");
  p.declare("proc_var", "0.05", "process noise shift of the random model");
  p.declare("obs_var", "0.2", "observation noise shift of the random model");
  p.declare("init_var", "1", "prior variance per real component");
}

int run_kalman(const ParamSet& p, std::uint64_t seed, std::size_t steps, std::ostream& csv,
               std::ostream&) {
  StateSpaceModel model;
  Rng rng(child_seed(seed, 0));
  const std::string path = p.text("model");
  if (!path.empty()) {
    std::ifstream is = open_input(path, "model file");
    model = read_model(is);
  } else {
    const std::size_t n = 4 * p.count("states");
    if (n == 0) throw UsageError("states must be positive");
    Eigen::MatrixXd f(n, n), h(n, n);
    for (Eigen::Index k = 0; k < f.size(); ++k) {
      f(k) = rng.normal();
      h(k) = rng.normal();
    }
    f *= p.real("rho") / f.eigenvalues().cwiseAbs().maxCoeff();
    model = {augmented_operator_from_real(f), {}, augmented_operator_from_real(h),
             augmented_covariance_from_real(rng.spd(n, p.real("proc_var"))),
             augmented_covariance_from_real(rng.spd(n, p.real("obs_var")))};
  }
  validate_model(model);
  if (!model.B.empty()) throw UsageError("kalman runner: models with inputs are not supported");
  const std::size_t nx = model.F.rows();
  if (nx % 4 != 0) throw UsageError("kalman runner: state is not an augmented vector");
  const Eigen::MatrixXd root_v = psd_sqrt(real_covariance(model.Sigma_v));
  const Eigen::MatrixXd root_w = psd_sqrt(real_covariance(model.Sigma_w));
  const double init_var = p.real("init_var");
  if (!(init_var > 0.0)) throw UsageError("init_var must be positive");
  const Eigen::MatrixXd root_0 =
      std::sqrt(init_var) * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(nx), static_cast<Eigen::Index>(nx));

  QVector x = augmented_noise(rng, root_0);
  KalmanState st{QVector(nx), augmented_covariance_from_real(root_0 * root_0.transpose()), {}};
  KalmanTraceWriter trace(csv, nx / 4);
  for (std::size_t n = 0; n < steps; ++n) {
    x = model.F * x + augmented_noise(rng, root_v);
    const QVector y = model.H * x + augmented_noise(rng, root_w);
    st = kalman_update(model, kalman_predict(model, st), y);
    trace.row(n, deaugment(x - st.x_hat, false), st.M, st.G);
  }
  return 0;
}

// -------------------------------------------------------------- diffusion

namespace {

AgentNetwork network_from(const ParamSet& p, const std::string& key, std::size_t agents) {
  const std::string path = p.text(key);
  if (!path.empty()) {
    std::ifstream is = open_input(path, "topology file");
    return read_topology(is);
  }
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  if (agents > 2)
    for (std::size_t l = 0; l < agents; ++l) edges.emplace_back(l, (l + 1) % agents);
  else if (agents == 2)
    edges.emplace_back(0, 1);
  return make_network(agents, edges);
}

}  // namespace

void declare_diffusion(ParamSet& p) {
  p.declare("agents", "8", "agents of the generated ring");
  p.declare("topology", "", "topology file; empty uses a ring of `agents`");
  p.declare("order", "2", "regressor length M");
  p.declare("gamma", "0", "step size, 0 picks 0.1 * 2 / rho from a pilot run");
  p.declare("noise_base", "0.2", "observation noise std of agent 0");
  p.declare("noise_step", "0.1", "noise std increment per agent index");
  p.declare("improperness", "0.5", "a in x + a x^i for the regressor entries");
  p.declare("weight_std", "0.5", "std of the true widely linear weights");
}

int run_diffusion(const ParamSet& p, std::uint64_t seed, std::size_t steps, std::ostream& csv,
                  std::ostream&) {
  const AgentNetwork net = network_from(p, "topology", p.count("agents"));
  const std::size_t n = net.n_agents, m = p.count("order");
  if (m == 0) throw UsageError("order must be positive");
  const double a = p.real("improperness");
  Rng truth(child_seed(seed, 0));
  const QVector w_true = truth.vec(4 * m, p.real("weight_std"));
  const double gamma = resolve_gamma(p.real("gamma"), Rng(child_seed(seed, 1)), m, a);
  std::vector<Rng> rngs;
  for (std::size_t l = 0; l < n; ++l) rngs.emplace_back(child_seed(seed, 100 + l));
  std::vector<LmsFilter> agents(n, LmsFilter{QVector(4 * m), gamma});
  NetworkMetricsWriter writer(csv);
  for (std::size_t step = 0; step < steps; ++step) {
    std::vector<LmsObservation> obs;
    std::vector<double> err;
    for (std::size_t l = 0; l < n; ++l) {
      const double sd = p.real("noise_base") + p.real("noise_step") * static_cast<double>(l);
      const QVector z = improper_vec(rngs[l], m, a);
      const QVector za = augment_stacked(z);
      const Quaternion y = dot_t(w_true, za) + rngs[l].quat(sd);
      err.push_back(norm_squared(y - dot_t(agents[l].w, za)));
      obs.push_back({z, y});
    }
    agents = diffusion_round(net, agents, obs, step);
    std::vector<QVector> ws;
    for (const auto& f : agents) ws.push_back(f.w);
    const std::vector<double> cd = consensus_distances(ws);
    for (std::size_t l = 0; l < n; ++l) writer.row(step, l, err[l], cd[l]);
  }
  return 0;
}

// -------------------------------------------------------------- federated

void declare_federated(ParamSet& p) {
  p.declare("agents", "4", "number of agents");
  p.declare("order", "2", "regressor length M");
  p.declare("batch", "25", "samples per agent and round");
  p.declare("participation", "1", "probability that an agent joins a round");
  p.declare("gamma", "0", "step size, 0 picks 0.05 * 2 / rho from the first round");
  p.declare("noise_std", "0.05", "observation noise std per component");
  p.declare("weak_scale", "0.15", "input scale on the real components an agent does not own");
  p.declare("weight_std", "0.5", "std of the true widely linear weights");
}

int run_federated(const ParamSet& p, std::uint64_t seed, std::size_t steps, std::ostream& csv,
                  std::ostream&) {
  const std::size_t n = p.count("agents"), m = p.count("order"), batch = p.count("batch");
  if (n == 0 || m == 0 || batch == 0) throw UsageError("agents, order and batch must be positive");
  const double part = p.real("participation");
  if (!(part >= 0.0 && part <= 1.0)) throw UsageError("participation must lie in [0, 1]");
  Rng rng(child_seed(seed, 0));
  const QVector w_true = rng.vec(4 * m, p.real("weight_std"));
  // Agent l mostly excites the real components c with c % n == l.
  const auto draw = [&](std::size_t l) {
    Eigen::VectorXd xr(static_cast<Eigen::Index>(4 * m));
    for (Eigen::Index c = 0; c < xr.size(); ++c)
      xr(c) = (static_cast<std::size_t>(c) % n == l ? 1.0 : p.real("weak_scale")) * rng.normal();
    const QVector z = from_real_components(xr);
    return LmsObservation{z, dot_t(w_true, augment_stacked(z)) + rng.quat(p.real("noise_std"))};
  };
  QVector center(4 * m);
  std::vector<LmsFilter> agents;
  NetworkMetricsWriter writer(csv);
  for (std::size_t round = 0; round < steps; ++round) {
    std::vector<std::vector<LmsObservation>> data(n);
    std::vector<bool> active(n);
    for (std::size_t l = 0; l < n; ++l) {
      for (std::size_t k = 0; k < batch; ++k) data[l].push_back(draw(l));
      active[l] = rng.uniform(0.0, 1.0) < part;
    }
    if (agents.empty()) {
      double gamma = p.real("gamma");
      if (gamma < 0.0) throw UsageError("gamma must be non-negative");
      if (gamma == 0.0) {
        std::vector<QVector> zs;
        for (const auto& d : data)
          for (const auto& o : d) zs.push_back(o.z);
        gamma = 0.5 * qlms_default_gamma(zs);
      }
      agents.assign(n, LmsFilter{center, gamma});
    }
    std::vector<double> mse(n, 0.0);
    for (std::size_t l = 0; l < n; ++l) {
      for (const auto& o : data[l]) mse[l] += norm_squared(o.y - dot_t(center, augment_stacked(o.z)));
      mse[l] /= static_cast<double>(batch);
    }
    const FederatedResult res = federated_round(center, agents, active, data);
    center = res.center;
    agents = res.agents;
    std::vector<QVector> ws;
    for (const auto& f : agents) ws.push_back(f.w);
    ws.push_back(center);
    const std::vector<double> cd = consensus_distances(ws);
    double total = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      writer.row(round, l, mse[l], cd[l]);
      total += mse[l];
    }
    writer.row(round, n, total / static_cast<double>(n), cd[n]);
  }
  return 0;
}

// ---------------------------------------------------------------- qnn-train

void declare_qnn_train(ParamSet& p) {
  p.declare("sizes", "2,3,1", "layer sizes N_0,...,N_L");
  p.declare("activation", "split_tanh", "identity, split_tanh or split_sigmoid");
  p.declare("gamma", "0.01", "learning rate");
  p.declare("trainer", "backprop", "backprop (layer-by-layer update rules) or numeric (HR* gradient)");
  p.declare("samples", "50", "training set size");
  p.declare("teacher_scale", "4", "teacher weights are the initial draw times this factor");
  p.declare("load", "", "checkpoint to start from");
  p.declare("save", "", "checkpoint written after training");
}

int run_qnn_train(const ParamSet& p, std::uint64_t seed, std::size_t steps, std::ostream& csv,
                  std::ostream&) {
  std::vector<std::size_t> sizes;
  for (double s : p.reals("sizes")) {
    if (!(s >= 1.0) || s != std::floor(s)) throw UsageError("sizes must be positive integers");
    sizes.push_back(static_cast<std::size_t>(s));
  }
  if (sizes.size() < 2) throw UsageError("sizes needs at least an input and an output layer");
  const std::string trainer = p.text("trainer");
  if (trainer != "backprop" && trainer != "numeric")
    throw UsageError("trainer must be backprop or numeric, got '" + trainer + "'");
  const std::string activation = p.text("activation");
  QnnNetwork net;
  if (!p.text("load").empty()) {
    std::ifstream is = open_input(p.text("load"), "checkpoint");
    net = read_checkpoint(is);
  } else {
    net = init_network(sizes, activation, p.real("gamma"), child_seed(seed, 0));
  }
  validate_network(net);
  if (net.input_size() != sizes.front() || net.output_size() != sizes.back())
    throw UsageError("checkpoint shape does not match sizes");

  // Teacher with the same architecture produces the targets.
  QnnNetwork teacher = init_network(sizes, activation, 0.0, child_seed(seed, 1));
  teacher = with_parameters(teacher, p.real("teacher_scale") * flatten_parameters(teacher));
  Rng rng(child_seed(seed, 2));
  std::vector<TrainingSample> data;
  for (std::size_t k = 0; k < p.count("samples"); ++k) {
    const QVector x0 = rng.vec(sizes.front());
    data.push_back({x0, forward(teacher, x0).x.back()});
  }
  if (data.empty()) throw UsageError("samples must be positive");

  // J is logged over the whole training set before each step; the backprop
  // trainer updates on one sample per step, cycling through the set.
  const auto set_cost = [&] {
    double j = 0.0;
    for (const auto& s : data) j += qnn_cost(net, s.x0, s.d);
    return j;
  };
  TrainingLogWriter log(csv);
  for (std::size_t step = 0; step < steps; ++step) {
    TrainResult tr;
    double j = 0.0;
    if (trainer == "backprop") {
      j = set_cost();
      const TrainingSample& s = data[step % data.size()];
      tr = train_step(net, s.x0, s.d, step);
    } else {
      tr = numeric_grad_train_step(net, data, step);
      j = tr.cost;
    }
    net = tr.net;
    log.row(step, j, tr.grad_norm);
  }
  if (!p.text("save").empty()) {
    std::ofstream os(p.text("save"));
    if (!os) throw UsageError("cannot write checkpoint '" + p.text("save") + "'");
    write_checkpoint(os, net);
  }
  return 0;
}

// -------------------------------------------------------------------- lqr

void declare_lqr(ParamSet& p) {
  p.declare("states", "3", "quaternion states");
  p.declare("inputs", "2", "quaternion inputs");
  p.declare("f_std", "0.5", "std of the transition entries");
  p.declare("b_std", "0.5", "std of the input matrix entries");
  p.declare("tol", "1e-6", "relative tolerance of the cost certificate");
}

int run_lqr(const ParamSet& p, std::uint64_t seed, std::size_t steps, std::ostream& csv,
            std::ostream& log) {
  const std::size_t nx = p.count("states"), nu = p.count("inputs");
  if (nx == 0 || nu == 0) throw UsageError("states and inputs must be positive");
  if (steps < 2) throw UsageError("lqr needs at least 2 steps");
  Rng rng(child_seed(seed, 0));
  LqrProblem prob;
  prob.F = rng.mat(nx, nx, p.real("f_std"));
  prob.B = rng.mat(nx, nu, p.real("b_std"));
  prob.Q = rng.hpd(nx, 0.5);
  prob.R = rng.hpd(nu, 1.0);
  prob.T = rng.hpd(nx, 0.5);
  prob.horizon = steps;
  const LqrSolution s = lqr_backward(prob);
  const QVector x1 = rng.vec(nx);
  const Trajectory t = simulate_closed_loop(prob, s, x1);
  write_trajectory_csv(csv, t);
  const double want = quadratic_form(s.P_seq[1], x1);
  const double rel = std::abs(t.cost - want) / std::max(std::abs(want), 1e-300);
  if (!(rel <= p.real("tol"))) {
    log << "lqr: realized cost " << format_real(t.cost) << " differs from x1^H P1 x1 = "
        << format_real(want) << " (relative " << format_real(rel) << ")\n";
    return 1;
  }
  return 0;
}

// -------------------------------------------------------------- gradcheck

void declare_gradcheck(ParamSet& p) {
  p.declare("order", "2", "regressor length M of the widely linear error cost");
  p.declare("tol", "1e-6", "relative tolerance");
  p.declare("fd_step", "0", "finite-difference step, 0 for the default");
}

int run_gradcheck(const ParamSet& p, std::uint64_t seed, std::size_t steps, std::ostream& csv,
                  std::ostream& log) {
  const std::size_t m = p.count("order");
  if (m == 0) throw UsageError("order must be positive");
  const double tol = p.real("tol");
  Rng rng(child_seed(seed, 0));
  csv << "instance,residual\n";
  std::size_t failed = 0;
  for (std::size_t k = 0; k < steps; ++k) {
    // |y - w^T z^a|^2 has the closed-form HR* gradient -1/2 eps z^a*.
    const QVector za = augment_stacked(rng.vec(m)), w = rng.vec(4 * m);
    const Quaternion y = rng.quat();
    const QFunction cost = [&](const QVector& wv) { return Quaternion(norm_squared(y - dot_t(wv, za))); };
    const Quaternion eps = y - dot_t(w, za);
    const HRGradient g = hr_gradient(cost, w, p.real("fd_step"));
    double scale = 0.0, err = 0.0;
    for (std::size_t c = 0; c < 4 * m; ++c) {
      const Quaternion closed = -0.5 * (eps * conj(za[c]));
      scale = std::max(scale, norm(closed));
      err = std::max(err, norm(g.d_q_conj[c] - closed));
    }
    const double residual = err / std::max(scale, 1e-300);
    csv << k << ',' << format_real(residual) << '\n';
    if (!(residual <= tol)) ++failed;
  }
  if (failed > 0) {
    log << "gradcheck: " << failed << " of " << steps << " instances exceed " << format_real(tol) << '\n';
    return 1;
  }
  return 0;
}

}  // namespace hrcalc::experiments
