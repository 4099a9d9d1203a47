#pragma once

#include <cstdint>
#include <iosfwd>

#include "hrcalc/experiments/common.hpp"

namespace hrcalc::experiments {

// Generic library runners behind the CLI. Each writes a CSV column header and
// rows (no comment header) and returns the process exit code: 0, or 1 when a
// runner-level check fails. Diagnostics go to `log`.

// Widely linear plant identification with QLMS on improper inputs.
// Columns: step, err_sq, weight_dev.
void declare_qlms(ParamSet& p);
int run_qlms(const ParamSet& p, std::uint64_t seed, std::size_t steps, std::ostream& csv,
             std::ostream& log);

// Kalman filter on a model file or a random stable real-embedded model.
// Columns from KalmanTraceWriter.
void declare_kalman(ParamSet& p);
int run_kalman(const ParamSet& p, std::uint64_t seed, std::size_t steps, std::ostream& csv,
               std::ostream& log);

// Adapt-then-combine QLMS diffusion on a ring or a topology file.
// Columns from NetworkMetricsWriter; mse is the a-priori squared error.
void declare_diffusion(ParamSet& p);
int run_diffusion(const ParamSet& p, std::uint64_t seed, std::size_t steps, std::ostream& csv,
                  std::ostream& log);

// Federated QLMS rounds on heterogeneous shards; `steps` counts rounds.
// Columns from NetworkMetricsWriter; mse is the agent's mean a-priori
// squared error over its batch, agent = agents denotes the centre.
void declare_federated(ParamSet& p);
int run_federated(const ParamSet& p, std::uint64_t seed, std::size_t steps, std::ostream& csv,
                  std::ostream& log);

// QNN training on a teacher-network regression task, backprop or numeric
// trainer, optional checkpoint load and save. Columns from TrainingLogWriter
// with J summed over the training set before each step.
void declare_qnn_train(ParamSet& p);
int run_qnn_train(const ParamSet& p, std::uint64_t seed, std::size_t steps, std::ostream& csv,
                  std::ostream& log);

// Finite-horizon LQR on a random problem with `steps` stages; writes the
// closed-loop trajectory and returns 1 when the cost certificate fails.
void declare_lqr(ParamSet& p);
int run_lqr(const ParamSet& p, std::uint64_t seed, std::size_t steps, std::ostream& csv,
            std::ostream& log);

// Numeric HR* gradient against a closed form on `steps` random instances.
// Columns: instance, residual. Returns 1 when any residual exceeds `tol`.
void declare_gradcheck(ParamSet& p);
int run_gradcheck(const ParamSet& p, std::uint64_t seed, std::size_t steps, std::ostream& csv,
                  std::ostream& log);

}  // namespace hrcalc::experiments
