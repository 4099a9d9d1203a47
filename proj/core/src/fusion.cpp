#include "hrcalc/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>
#include <string>

#include "hrcalc/errors.hpp"
#include "hrcalc/io.hpp"

namespace hrcalc {

namespace {

// Runs fn, rethrowing library errors with the agent index prefixed.
template <typename Fn>
auto tagged(std::size_t agent, Fn&& fn) -> decltype(fn()) {
  const std::string tag = "agent " + std::to_string(agent) + ": ";
  try {
    return fn();
  } catch (const DivergenceError& e) {
    throw DivergenceError(tag + e.what(), e.step());
  } catch (const NumericError& e) {
    throw NumericError(tag + e.what(), e.condition());
  } catch (const UsageError& e) {
    throw UsageError(tag + e.what());
  } catch (const DomainError& e) {
    throw DomainError(tag + e.what());
  }
}

void check_weights(const std::vector<double>& w, std::size_t n) {
  if (w.size() != n) throw UsageError("fusion: weight count does not match estimate count");
  double sum = 0.0;
  for (double x : w) {
    if (!(x >= 0.0)) throw UsageError("fusion: weights must be nonnegative");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw UsageError("fusion: weights sum to " + format_real(sum) + ", expected 1");
}

}  // namespace

std::size_t AgentNetwork::degree(std::size_t agent) const {
  return static_cast<std::size_t>(
      std::count(adjacency.at(agent).begin(), adjacency.at(agent).end(), true));
}

std::vector<std::size_t> AgentNetwork::neighbours(std::size_t agent) const {
  std::vector<std::size_t> out;
  for (std::size_t m = 0; m < n_agents; ++m)
    if (adjacency.at(agent)[m]) out.push_back(m);
  return out;
}

Eigen::MatrixXd metropolis_weights(const std::vector<std::vector<bool>>& adj) {
  const std::size_t n = adj.size();
  std::vector<std::size_t> deg(n, 0);
  for (std::size_t l = 0; l < n; ++l)
    deg[l] = static_cast<std::size_t>(std::count(adj[l].begin(), adj[l].end(), true));
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t l = 0; l < n; ++l) {
    double off = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
      if (m == l || !adj[l][m]) continue;
      c(l, m) = 1.0 / (1.0 + static_cast<double>(std::max(deg[l], deg[m])));
      off += c(l, m);
    }
    c(l, l) = 1.0 - off;
  }
  return c;
}

AgentNetwork make_network(std::size_t n,
                          const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  if (n == 0) throw UsageError("network: need at least one agent");
  AgentNetwork net;
  net.n_agents = n;
  net.adjacency.assign(n, std::vector<bool>(n, false));
  for (const auto& [a, b] : edges) {
    if (a >= n || b >= n)
      throw UsageError("network: edge " + std::to_string(a) + "-" + std::to_string(b) +
                       " out of range");
    if (a == b) throw UsageError("network: self edge on agent " + std::to_string(a));
    net.adjacency[a][b] = net.adjacency[b][a] = true;
  }
  net.combine_weights = metropolis_weights(net.adjacency);
  return net;
}

void validate_network(const AgentNetwork& net, double tol) {
  const auto n = static_cast<Eigen::Index>(net.n_agents);
  if (net.adjacency.size() != net.n_agents || net.combine_weights.rows() != n ||
      net.combine_weights.cols() != n)
    throw UsageError("network: inconsistent dimensions");
  for (std::size_t l = 0; l < net.n_agents; ++l) {
    double sum = 0.0;
    for (std::size_t m = 0; m < net.n_agents; ++m) {
      const double c = net.combine_weights(l, m);
      if (net.adjacency[l][m] != net.adjacency[m][l])
        throw UsageError("network: adjacency is not symmetric");
      if (c < 0.0) throw UsageError("network: negative combination weight");
      if (l != m && !net.adjacency[l][m] && c != 0.0)
        throw UsageError("network: weight outside the closed neighbourhood");
      sum += c;
    }
    if (std::abs(sum - 1.0) > tol)
      throw UsageError("network: row " + std::to_string(l) + " sums to " + format_real(sum));
  }
}

bool is_connected(const AgentNetwork& net) {
  if (net.n_agents == 0) return true;
  std::vector<bool> seen(net.n_agents, false);
  std::queue<std::size_t> q;
  q.push(0);
  seen[0] = true;
  std::size_t count = 1;
  while (!q.empty()) {
    const std::size_t l = q.front();
    q.pop();
    for (std::size_t m : net.neighbours(l))
      if (!seen[m]) {
        seen[m] = true;
        ++count;
        q.push(m);
      }
  }
  return count == net.n_agents;
}

AgentNetwork read_topology(std::istream& is) {
  std::size_t n = 0;
  bool have_n = false;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    const std::string where = "topology line " + std::to_string(lineno) + ": ";
    if (key == "agents") {
      if (have_n) throw UsageError(where + "duplicate agents header");
      if (!(ls >> n) || n == 0) throw UsageError(where + "expected `agents N` with N > 0");
      have_n = true;
    } else if (key == "edge") {
      if (!have_n) throw UsageError(where + "edge before `agents` header");
      std::size_t a = 0, b = 0;
      if (!(ls >> a >> b)) throw UsageError(where + "expected `edge a b`");
      edges.emplace_back(a, b);
    } else {
      throw UsageError(where + "unknown keyword `" + key + "`");
    }
    std::string extra;
    if (ls >> extra) throw UsageError(where + "trailing text `" + extra + "`");
  }
  if (!have_n) throw UsageError("topology: missing `agents N` header");
  return make_network(n, edges);
}

void write_topology(std::ostream& os, const AgentNetwork& net) {
  os << "agents " << net.n_agents << '\n';
  for (std::size_t a = 0; a < net.n_agents; ++a)
    for (std::size_t b = a + 1; b < net.n_agents; ++b)
      if (net.adjacency[a][b]) os << "edge " << a << ' ' << b << '\n';
}

QVector fuse_weighted(const std::vector<QVector>& estimates, const std::vector<double>& weights) {
  if (estimates.empty()) throw UsageError("fuse_weighted: no estimates");
  check_weights(weights, estimates.size());
  QVector out(estimates.front().size());
  for (std::size_t l = 0; l < estimates.size(); ++l) {
    if (estimates[l].size() != out.size())
      throw UsageError("fuse_weighted: estimate " + std::to_string(l) + " has wrong length");
    for (std::size_t n = 0; n < out.size(); ++n) out[n] += weights[l] * estimates[l][n];
  }
  return out;
}

AugmentedVector fuse_weighted(const FusionInput& input, const std::vector<double>& weights) {
  std::vector<QVector> xs;
  xs.reserve(input.estimates.size());
  for (const auto& e : input.estimates) xs.push_back(e.stacked);
  if (input.estimates.empty()) throw UsageError("fuse_weighted: no estimates");
  return {input.estimates.front().base_len, fuse_weighted(xs, weights)};
}

QMatrix optimal_fusion_gain(const std::vector<QMatrix>& covariances) {
  if (covariances.empty()) throw UsageError("optimal_fusion_gain: no covariances");
  QMatrix info(covariances.front().rows(), covariances.front().cols());
  for (std::size_t l = 0; l < covariances.size(); ++l)
    info += tagged(l, [&] { return qinverse(covariances[l]); });
  return qinverse(info);
}

AugmentedVector fuse_covariance_weighted(const FusionInput& input, const AugmentedVector& prior,
                                         const QMatrix& g) {
  const auto& xs = input.estimates;
  if (xs.empty()) throw UsageError("fuse_covariance_weighted: no estimates");
  if (input.covariances.size() != xs.size())
    throw UsageError("fuse_covariance_weighted: one covariance per estimate is required");
  const std::size_t dim = prior.stacked.size();
  if (g.rows() != dim || g.cols() != dim)
    throw UsageError("fuse_covariance_weighted: gain dimension mismatch");
  QVector correction(dim);
  for (std::size_t l = 0; l < xs.size(); ++l) {
    if (xs[l].stacked.size() != dim)
      throw UsageError("fuse_covariance_weighted: estimate " + std::to_string(l) +
                       " has wrong length");
    const QMatrix inv = tagged(l, [&] {
      if (!is_hermitian_psd(input.covariances[l], 0.0))
        throw NumericError("covariance is not Hermitian positive definite");
      return qinverse(input.covariances[l]);
    });
    correction = correction + inv * (prior.stacked - xs[l].stacked);
  }
  return {prior.base_len, prior.stacked - g * correction};
}

std::vector<QVector> diffusion_combine(const AgentNetwork& net, const std::vector<QVector>& psi) {
  if (psi.size() != net.n_agents) throw UsageError("diffusion: one estimate per agent required");
  std::vector<QVector> out(net.n_agents);
  for (std::size_t l = 0; l < net.n_agents; ++l) {
    out[l].assign(psi[l].size(), Quaternion());
    for (std::size_t m = 0; m < net.n_agents; ++m) {
      const double c = net.combine_weights(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(m));
      if (c == 0.0) continue;
      if (psi[m].size() != psi[l].size())
        throw UsageError("diffusion: agent " + std::to_string(m) + " has a different dimension");
      for (std::size_t n = 0; n < psi[l].size(); ++n) out[l][n] += c * psi[m][n];
    }
  }
  return out;
}

CovarianceCombination diffusion_combine_covariance(const AgentNetwork& net,
                                                   const std::vector<QVector>& x,
                                                   const std::vector<QMatrix>& m) {
  const std::size_t n = net.n_agents;
  if (x.size() != n || m.size() != n)
    throw UsageError("diffusion_combine_covariance: one estimate and covariance per agent required");
  const std::size_t dim = x.empty() ? 0 : x[0].size();
  std::vector<QMatrix> info(n);
  std::vector<QVector> info_x(n);
  for (std::size_t l = 0; l < n; ++l) {
    if (x[l].size() != dim || m[l].rows() != dim || m[l].cols() != dim)
      throw UsageError("diffusion_combine_covariance: agent " + std::to_string(l) +
                       " has a different dimension");
    info[l] = tagged(l, [&] { return qinverse(m[l]); });
    info_x[l] = info[l] * x[l];
  }
  CovarianceCombination out;
  for (std::size_t l = 0; l < n; ++l) {
    QMatrix acc(dim, dim);
    QVector acc_x(dim);
    for (std::size_t k = 0; k < n; ++k) {
      const double c = net.combine_weights(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k));
      if (c == 0.0) continue;
      acc = acc + c * info[k];
      acc_x = acc_x + c * info_x[k];
    }
    QMatrix fused = symmetrize(tagged(l, [&] { return qinverse(acc); }));
    out.x.push_back(fused * acc_x);
    out.M.push_back(std::move(fused));
  }
  return out;
}

std::vector<LmsFilter> diffusion_round(const AgentNetwork& net,
                                       const std::vector<LmsFilter>& agents,
                                       const std::vector<LmsObservation>& obs, std::size_t step) {
  if (agents.size() != net.n_agents || obs.size() != net.n_agents)
    throw UsageError("diffusion_round: one filter and one observation per agent required");
  std::vector<LmsFilter> out = agents;
  std::vector<QVector> psi(net.n_agents);
  for (std::size_t l = 0; l < net.n_agents; ++l) {
    out[l] = tagged(l, [&] { return qlms_step(agents[l], obs[l].z, obs[l].y, step).filter; });
    psi[l] = out[l].w;
  }
  const std::vector<QVector> mixed = diffusion_combine(net, psi);
  for (std::size_t l = 0; l < net.n_agents; ++l) out[l].w = mixed[l];
  return out;
}

std::vector<KalmanState> diffusion_round(const AgentNetwork& net,
                                         const std::vector<StateSpaceModel>& models,
                                         const std::vector<KalmanState>& agents,
                                         const std::vector<QVector>& obs) {
  if (agents.size() != net.n_agents || obs.size() != net.n_agents ||
      models.size() != net.n_agents)
    throw UsageError("diffusion_round: one model, state and observation per agent required");
  std::vector<KalmanState> out(net.n_agents);
  std::vector<QVector> psi(net.n_agents);
  for (std::size_t l = 0; l < net.n_agents; ++l) {
    out[l] = tagged(l, [&] {
      return kalman_update(models[l], kalman_predict(models[l], agents[l]), obs[l]);
    });
    psi[l] = out[l].x_hat;
  }
  const std::vector<QVector> mixed = diffusion_combine(net, psi);
  for (std::size_t l = 0; l < net.n_agents; ++l) out[l].x_hat = mixed[l];
  return out;
}

FederatedResult federated_round(const QVector& center, const std::vector<LmsFilter>& agents,
                                const std::vector<bool>& active,
                                const std::vector<std::vector<LmsObservation>>& data) {
  if (active.size() != agents.size() || data.size() != agents.size())
    throw UsageError("federated_round: mask and data must have one entry per agent");
  FederatedResult res{center, agents, false};
  std::vector<QVector> updated;
  std::vector<double> counts;
  for (std::size_t l = 0; l < agents.size(); ++l) {
    if (!active[l] || data[l].empty()) continue;
    LmsFilter f = agents[l];
    tagged(l, [&] {
      for (std::size_t n = 0; n < data[l].size(); ++n)
        f = qlms_step(f, data[l][n].z, data[l][n].y, n).filter;
      return 0;
    });
    updated.push_back(f.w);
    counts.push_back(static_cast<double>(data[l].size()));
  }
  if (updated.empty()) {
    res.skipped = true;
    return res;
  }
  double total = 0.0;
  for (double c : counts) total += c;
  for (double& c : counts) c /= total;
  // Normalise exactly so the weight-sum contract holds after rounding.
  double sum = 0.0;
  for (std::size_t l = 0; l + 1 < counts.size(); ++l) sum += counts[l];
  counts.back() = 1.0 - sum;
  res.center = fuse_weighted(updated, counts);
  for (auto& a : res.agents) a.w = res.center;
  return res;
}

NetworkMetricsWriter::NetworkMetricsWriter(std::ostream& os) : os_(os) {
  os_ << "round,agent,mse,consensus_distance\n";
}

void NetworkMetricsWriter::row(std::size_t round, std::size_t agent, double mse, double cd) {
  os_ << round << ',' << agent << ',' << format_real(mse) << ',' << format_real(cd) << '\n';
}

std::vector<double> consensus_distances(const std::vector<QVector>& xs) {
  if (xs.empty()) return {};
  std::vector<double> w(xs.size(), 1.0 / static_cast<double>(xs.size()));
  QVector mean(xs.front().size());
  for (const auto& x : xs)
    for (std::size_t n = 0; n < mean.size(); ++n) mean[n] += w[0] * x.at(n);
  std::vector<double> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(norm(x - mean));
  return out;
}

}  // namespace hrcalc
