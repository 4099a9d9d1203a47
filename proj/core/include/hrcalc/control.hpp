#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "hrcalc/qmatrix.hpp"

namespace hrcalc {

// Finite-horizon problem on augmented vectors, times n = 1..N:
//   x[n+1] = F x[n] + B u[n],
//   J = x[N]^H T x[N] + Σ_{n=1}^{N-1} (x[n]^H Q x[n] + u[n]^H R u[n]).
struct LqrProblem {
  QMatrix F, B, Q, R, T;
  std::size_t horizon = 0;  // N >= 1
};

// Q, T Hermitian PSD and R Hermitian PD via the real embedding; dimensions.
void validate_problem(const LqrProblem& p);

// Sequences indexed by time n; entry 0 is unused. P and S run over 1..N,
// G over 1..N-1.
struct LqrSolution {
  std::vector<QMatrix> S_seq, P_seq, G_seq;
};

// P_N = T; G_n = -(R + B^H P_{n+1} B)^-1 B^H P_{n+1} F;
// P_n = Q + F^H S_{n+1} F with S_n = (P_n^-1 + B R^-1 B^H)^-1, evaluated as
// P_n (I + B R^-1 B^H P_n)^-1 so singular P_n is allowed. P and S are
// re-symmetrised every step. Inversion failures name the stage.
LqrSolution lqr_backward(const LqrProblem& p);

// u = -R^-1 B^H S_{n+1} F x, 1 <= n < N.
QVector lqr_input(const LqrProblem& p, const LqrSolution& s, std::size_t n, const QVector& x);
// u = G_n x.
QVector lqr_gain_input(const LqrSolution& s, std::size_t n, const QVector& x);

struct Trajectory {
  std::vector<QVector> x;          // x[1..N] stored at 0..N-1
  std::vector<QVector> u;          // u[1..N-1] stored at 0..N-2
  std::vector<double> stage_cost;  // J_1..J_N
  double cost = 0.0;
};

// Rolls the closed loop from x[1] = x1. `noise`, when non-empty, holds N-1
// process-noise vectors added to each transition. `override_step` and
// `override_input` replace the policy input at one time (1-based) when set.
Trajectory simulate_closed_loop(const LqrProblem& p, const LqrSolution& s, const QVector& x1,
                                const std::vector<QVector>& noise = {},
                                std::size_t override_step = 0, const QVector& override_input = {});

// Quadratic form x^H M x (real for Hermitian M).
double quadratic_form(const QMatrix& m, const QVector& x);

struct InfiniteHorizonResult {
  QMatrix P, G;
  std::size_t iterations = 0;
  double residual = 0.0;
  double closed_loop_radius = 0.0;  // rho(F + B G)
};

// Iterates the backward recursion with fixed matrices from P = Q until the
// max-abs change is below tol; NumericError after max_iter.
InfiniteHorizonResult lqr_infinite_horizon(const QMatrix& f, const QMatrix& b, const QMatrix& q,
                                           const QMatrix& r, double tol = 1e-10,
                                           std::size_t max_iter = 100000);

// Trajectory CSV: step, x{m}_{c}, u{m}_{c}, stage_cost, cumulative_cost. The
// final row has empty input fields.
void write_trajectory_csv(std::ostream& os, const Trajectory& t);

}  // namespace hrcalc
