#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <iosfwd>
#include <utility>
#include <vector>

#include "hrcalc/adaptive.hpp"
#include "hrcalc/augmentation.hpp"
#include "hrcalc/kalman.hpp"

namespace hrcalc {

// Undirected agent graph with row-stochastic combination weights over closed
// neighbourhoods (self-loops implied).
struct AgentNetwork {
  std::size_t n_agents = 0;
  std::vector<std::vector<bool>> adjacency;  // symmetric, diagonal false
  Eigen::MatrixXd combine_weights;           // rows sum to 1

  std::size_t degree(std::size_t agent) const;
  std::vector<std::size_t> neighbours(std::size_t agent) const;  // excludes self
};

// Graph from an edge list; throws UsageError on out-of-range or self edges.
AgentNetwork make_network(std::size_t n_agents,
                          const std::vector<std::pair<std::size_t, std::size_t>>& edges);
// Metropolis-Hastings weights: 1 / (1 + max(deg_l, deg_m)) on edges, the
// remainder on the diagonal.
Eigen::MatrixXd metropolis_weights(const std::vector<std::vector<bool>>& adjacency);
// Row-stochastic, nonnegative and zero outside closed neighbourhoods.
void validate_network(const AgentNetwork& net, double tol = 1e-12);
bool is_connected(const AgentNetwork& net);

// Topology file: `agents N` header then `edge a b` lines; `#` comments.
AgentNetwork read_topology(std::istream& is);
void write_topology(std::ostream& os, const AgentNetwork& net);

struct FusionInput {
  std::vector<AugmentedVector> estimates;
  std::vector<QMatrix> covariances;  // optional; empty or one per estimate
};

// Σ w_l x_l with w_l >= 0 and Σ w_l = 1 (within 1e-12).
AugmentedVector fuse_weighted(const FusionInput& input, const std::vector<double>& weights);
QVector fuse_weighted(const std::vector<QVector>& estimates, const std::vector<double>& weights);

// psi - G Σ_l Σ_l^-1 (psi - x_l): gradient correction of the prior psi
// toward each sensor estimate, weighted by its inverse error covariance.
AugmentedVector fuse_covariance_weighted(const FusionInput& input, const AugmentedVector& prior,
                                         const QMatrix& g);
// (Σ_l Σ_l^-1)^-1, the gain minimising the fused error covariance.
QMatrix optimal_fusion_gain(const std::vector<QMatrix>& covariances);

// Combination stage: psi'_l = Σ_m c_lm psi_m over a frozen snapshot.
std::vector<QVector> diffusion_combine(const AgentNetwork& net, const std::vector<QVector>& psi);

struct CovarianceCombination {
  std::vector<QVector> x;  // augmented estimates
  std::vector<QMatrix> M;  // fused covariances
};

// Covariance-weighted combination: the fusion rule above with the
// neighbourhood covariances Σ_m = M_m / c_lm and the optimal gain, i.e.
// M'_l = (Σ_m c_lm M_m^-1)^-1 and x'_l = M'_l Σ_m c_lm M_m^-1 x_m. Each M_m
// is inverted once. Singular covariances raise NumericError naming the agent.
CovarianceCombination diffusion_combine_covariance(const AgentNetwork& net,
                                                   const std::vector<QVector>& x,
                                                   const std::vector<QMatrix>& m);

struct LmsObservation {
  QVector z;
  Quaternion y;
};

// Adapt-then-combine rounds. Local steps run on each agent's own data only;
// errors are rethrown with the agent index prefixed.
std::vector<LmsFilter> diffusion_round(const AgentNetwork& net,
                                       const std::vector<LmsFilter>& agents,
                                       const std::vector<LmsObservation>& observations,
                                       std::size_t step = 0);

// Kalman variant: each agent predicts and updates with its own model and
// augmented observation; the estimates are then combined, covariances stay
// local.
std::vector<KalmanState> diffusion_round(const AgentNetwork& net,
                                         const std::vector<StateSpaceModel>& models,
                                         const std::vector<KalmanState>& agents,
                                         const std::vector<QVector>& observations);

struct FederatedResult {
  QVector center;
  std::vector<LmsFilter> agents;
  bool skipped = false;  // no active agent; center unchanged
};

// Active agents run QLMS over their batch, the centre averages their weights
// with weights proportional to batch size, and the result is pushed back to
// every agent.
FederatedResult federated_round(const QVector& center, const std::vector<LmsFilter>& agents,
                                const std::vector<bool>& active,
                                const std::vector<std::vector<LmsObservation>>& data);

// Metrics CSV: round, agent, mse, consensus_distance.
class NetworkMetricsWriter {
 public:
  explicit NetworkMetricsWriter(std::ostream& os);
  void row(std::size_t round, std::size_t agent, double mse, double consensus_distance);

 private:
  std::ostream& os_;
};

// Distance of each estimate from the network mean, Euclidean over entries.
std::vector<double> consensus_distances(const std::vector<QVector>& estimates);

}  // namespace hrcalc
