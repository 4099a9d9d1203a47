#include "hrcalc/control.hpp"

#include <ostream>
#include <string>

#include "hrcalc/errors.hpp"
#include "hrcalc/io.hpp"

namespace hrcalc {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw UsageError(what);
}

QMatrix stage_inverse(const QMatrix& a, std::size_t n, const char* what) {
  try {
    return qinverse(a);
  } catch (const NumericError& e) {
    throw NumericError("lqr: cannot invert " + std::string(what) + " at stage " +
                           std::to_string(n) + " (condition " + std::to_string(e.condition()) + ")",
                       e.condition());
  }
}

// One backward step from P_{n+1}: returns (P_n, G_n).
std::pair<QMatrix, QMatrix> riccati_step(const QMatrix& f, const QMatrix& b, const QMatrix& q,
                                         const QMatrix& r, const QMatrix& p_next, std::size_t n) {
  const QMatrix bh = hermitian(b);
  const QMatrix k = stage_inverse(r + bh * p_next * b, n, "R + B^H P B");
  const QMatrix g = -1.0 * (k * bh * p_next * f);
  // Optimal closed-loop form of P_n = Q + F^H P F - F^H P B (R + B^H P B)^-1 B^H P F.
  const QMatrix p = symmetrize(q + hermitian(f) * p_next * f + hermitian(f) * p_next * b * g);
  return {p, g};
}

}  // namespace

void validate_problem(const LqrProblem& p) {
  const std::size_t n = p.F.rows();
  require(n > 0 && p.F.is_square(), "lqr: F must be square and nonempty");
  require(p.B.rows() == n && p.B.cols() > 0, "lqr: B must have as many rows as F");
  const std::size_t m = p.B.cols();
  require(p.Q.rows() == n && p.Q.cols() == n, "lqr: Q must match F");
  require(p.T.rows() == n && p.T.cols() == n, "lqr: T must match F");
  require(p.R.rows() == m && p.R.cols() == m, "lqr: R must match the columns of B");
  require(p.horizon >= 1, "lqr: horizon must be at least 1");
  require(is_hermitian_psd(p.Q, 1e-10), "lqr: Q must be Hermitian PSD");
  require(is_hermitian_psd(p.T, 1e-10), "lqr: T must be Hermitian PSD");
  require(is_hermitian(p.R, 1e-10) && min_embedded_eigenvalue(p.R) > 0.0,
          "lqr: R must be Hermitian positive definite");
}

LqrSolution lqr_backward(const LqrProblem& p) {
  validate_problem(p);
  const std::size_t N = p.horizon, dim = p.F.rows();
  LqrSolution s;
  s.P_seq.assign(N + 1, QMatrix());
  s.S_seq.assign(N + 1, QMatrix());
  s.G_seq.assign(N, QMatrix());
  const QMatrix r_inv = stage_inverse(p.R, N, "R");
  const QMatrix brb = p.B * r_inv * hermitian(p.B);
  const QMatrix eye = QMatrix::identity(dim);
  auto s_from_p = [&](const QMatrix& pn, std::size_t n) {
    return symmetrize(pn * stage_inverse(eye + brb * pn, n, "I + B R^-1 B^H P"));
  };
  s.P_seq[N] = symmetrize(p.T);
  s.S_seq[N] = s_from_p(s.P_seq[N], N);
  for (std::size_t n = N - 1; n >= 1; --n) {
    auto [pn, gn] = riccati_step(p.F, p.B, p.Q, p.R, s.P_seq[n + 1], n);
    s.P_seq[n] = std::move(pn);
    s.G_seq[n] = std::move(gn);
    s.S_seq[n] = s_from_p(s.P_seq[n], n);
    if (!all_finite(s.P_seq[n])) throw DivergenceError("lqr: P is not finite", n);
  }
  return s;
}

QVector lqr_input(const LqrProblem& p, const LqrSolution& s, std::size_t n, const QVector& x) {
  if (n < 1 || n >= p.horizon)
    throw UsageError("lqr_input: time " + std::to_string(n) + " outside 1.." +
                     std::to_string(p.horizon - 1));
  return -1.0 * (qinverse(p.R) * hermitian(p.B) * s.S_seq.at(n + 1) * p.F * x);
}

QVector lqr_gain_input(const LqrSolution& s, std::size_t n, const QVector& x) {
  if (n < 1 || n >= s.G_seq.size())
    throw UsageError("lqr_gain_input: time " + std::to_string(n) + " outside the horizon");
  return s.G_seq[n] * x;
}

double quadratic_form(const QMatrix& m, const QVector& x) { return inner(x, m * x).r; }

Trajectory simulate_closed_loop(const LqrProblem& p, const LqrSolution& s, const QVector& x1,
                                const std::vector<QVector>& noise, std::size_t override_step,
                                const QVector& override_input) {
  const std::size_t N = p.horizon;
  if (x1.size() != p.F.rows()) throw UsageError("simulate: initial state dimension mismatch");
  if (!noise.empty() && noise.size() != N - 1)
    throw UsageError("simulate: need one noise vector per transition");
  if (s.P_seq.size() != N + 1) throw UsageError("simulate: solution horizon mismatch");
  Trajectory t;
  QVector x = x1;
  for (std::size_t n = 1; n < N; ++n) {
    QVector u = n == override_step ? override_input : lqr_gain_input(s, n, x);
    if (u.size() != p.B.cols()) throw UsageError("simulate: input dimension mismatch");
    const double j = quadratic_form(p.Q, x) + quadratic_form(p.R, u);
    t.x.push_back(x);
    t.stage_cost.push_back(j);
    t.cost += j;
    x = p.F * x + p.B * u;
    if (!noise.empty()) x = x + noise[n - 1];
    t.u.push_back(std::move(u));
  }
  const double jn = quadratic_form(p.T, x);
  t.x.push_back(x);
  t.stage_cost.push_back(jn);
  t.cost += jn;
  return t;
}

InfiniteHorizonResult lqr_infinite_horizon(const QMatrix& f, const QMatrix& b, const QMatrix& q,
                                           const QMatrix& r, double tol, std::size_t max_iter) {
  validate_problem({f, b, q, r, q, 1});
  InfiniteHorizonResult res;
  QMatrix pn = symmetrize(q);
  for (std::size_t it = 1; it <= max_iter; ++it) {
    auto [next, g] = riccati_step(f, b, q, r, pn, it);
    res.residual = max_abs_diff(next, pn);
    pn = std::move(next);
    res.G = std::move(g);
    if (!all_finite(pn)) throw DivergenceError("lqr_infinite_horizon: diverged", it);
    if (res.residual < tol) {
      res.P = pn;
      // Gain consistent with the converged P.
      res.G = riccati_step(f, b, q, r, pn, it).second;
      res.iterations = it;
      res.closed_loop_radius = spectral_radius(f + b * res.G);
      return res;
    }
  }
  throw NumericError("lqr_infinite_horizon: no convergence after " + std::to_string(max_iter) +
                     " iterations (last residual " + std::to_string(res.residual) + ")");
}

void write_trajectory_csv(std::ostream& os, const Trajectory& t) {
  const std::size_t nx = t.x.empty() ? 0 : t.x.front().size();
  const std::size_t nu = t.u.empty() ? 0 : t.u.front().size();
  os << "step";
  for (std::size_t m = 0; m < nx; ++m)
    for (char c : {'r', 'i', 'j', 'k'}) os << ",x" << m << '_' << c;
  for (std::size_t m = 0; m < nu; ++m)
    for (char c : {'r', 'i', 'j', 'k'}) os << ",u" << m << '_' << c;
  os << ",stage_cost,cumulative_cost\n";
  double cum = 0.0;
  for (std::size_t n = 0; n < t.x.size(); ++n) {
    os << n + 1;
    for (const auto& q : t.x[n])
      for (int c = 0; c < 4; ++c) os << ',' << format_real(q[c]);
    for (std::size_t m = 0; m < nu; ++m)
      for (int c = 0; c < 4; ++c) os << ',' << (n < t.u.size() ? format_real(t.u[n][m][c]) : "");
    cum += t.stage_cost[n];
    os << ',' << format_real(t.stage_cost[n]) << ',' << format_real(cum) << '\n';
  }
}

}  // namespace hrcalc
