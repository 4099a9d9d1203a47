#include "hrcalc/experiments/qubit.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "hrcalc/errors.hpp"
#include "hrcalc/hr_calculus.hpp"
#include "hrcalc/io.hpp"

namespace hrcalc::experiments {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr const char* kDefaultGates =
    "I 1 0 0 0; X90 1 0 0 90; Y90 0 1 0 90; Z90 0 0 1 90; H 1 0 1 180; T 0 0 1 45";
constexpr double kPenaltySchedule[] = {0.01, 0.1, 1.0, 10.0};
constexpr const char* kDefaultTarget = "X90 1 0 0 90; T 0 0 1 45";

bool parse_number(const std::string& s, double& out) {
  const char* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, out);
  return r.ec == std::errc() && r.ptr == end && std::isfinite(out);
}

Quaternion unit(const Quaternion& q) { return q / norm(q); }

Quaternion compose(const std::vector<Gate>& stages) {
  Quaternion r(1.0);
  for (const Gate& g : stages) r = g.w * r;
  return r;
}

std::size_t nearest_gate(const Quaternion& w, const std::vector<Gate>& gates) {
  const Quaternion u = unit(w);
  std::size_t best = 0;
  double best_dot = -1.0;
  for (std::size_t g = 0; g < gates.size(); ++g) {
    const double d = std::abs(dot(u, gates[g].w));  // w and -w are the same rotation
    if (d > best_dot + 1e-15) {
      best_dot = d;
      best = g;
    }
  }
  return best;
}

struct Problem {
  Quaternion target;
  std::vector<Quaternion> probes;
  const std::vector<Gate>* gates;
  double step;
  std::size_t iterations;
};

// Distance of the stages from the admissible set: sum of 1 - max_g <w, g>^2.
double gate_penalty(const QVector& w, const std::vector<Gate>& gates) {
  double acc = 0.0;
  for (const Quaternion& q : w) {
    const Quaternion u = unit(q);
    double best = 0.0;
    for (const Gate& g : gates) best = std::max(best, dot(u, g.w) * dot(u, g.w));
    acc += 1.0 - best;
  }
  return acc;
}

// Descent along -dJ/dW* on the free stages with step adaptation, where
// J = residual + rho * gate_penalty; every accepted iterate is renormalised.
void descend(const Problem& pr, QVector& w, const std::vector<bool>& fixed, double rho = 0.0) {
  const auto objective = [&](const QVector& v) {
    double j = circuit_residual(v, pr.target, pr.probes);
    if (rho > 0.0) j += rho * gate_penalty(v, *pr.gates);
    return j;
  };
  const QFunction cost = [&](const QVector& v) { return Quaternion(objective(v)); };
  double j = objective(w);
  double s = pr.step;
  for (std::size_t it = 0; it < pr.iterations && j > 1e-30; ++it) {
    const QVector g = hr_gradient(cost, w).d_q_conj;
    QVector trial = w;
    double gmax = 0.0;
    for (std::size_t d = 0; d < w.size(); ++d) {
      if (fixed[d]) continue;
      gmax = std::max(gmax, norm(g[d]));
      trial[d] = unit(w[d] - s * g[d]);
    }
    if (gmax < 1e-15) break;
    const double jt = objective(trial);
    if (jt < j) {
      w = std::move(trial);
      j = jt;
      s = std::min(2.0 * s, 16.0 * pr.step);
    } else {
      s *= 0.5;
      if (s < 1e-14) break;
    }
  }
}

struct Candidate {
  double residual = 0.0;
  std::vector<std::size_t> gates;
};

// Snaps stages one at a time in `order`, re-optimising the free ones.
Candidate progressive_projection(const Problem& pr, QVector w, const std::vector<Gate>& gates,
                                 const std::vector<std::size_t>& order) {
  std::vector<bool> fixed(w.size(), false);
  Candidate c;
  c.gates.assign(w.size(), 0);
  for (std::size_t d : order) {
    c.gates[d] = nearest_gate(w[d], gates);
    w[d] = gates[c.gates[d]].w;
    fixed[d] = true;
    descend(pr, w, fixed);
  }
  c.residual = circuit_residual(w, pr.target, pr.probes);
  return c;
}

std::string gate_names(const std::vector<std::size_t>& idx, const std::vector<Gate>& gates) {
  std::string s;
  for (std::size_t d = 0; d < idx.size(); ++d) s += (d ? "|" : "") + gates[idx[d]].name;
  return s;
}

}  // namespace

Gate make_gate(const std::string& name, double ax, double ay, double az, double angle_deg) {
  const double n = std::sqrt(ax * ax + ay * ay + az * az);
  if (!std::isfinite(n) || !std::isfinite(angle_deg))
    throw UsageError("qubit gate " + name + ": non-finite entry");
  const double half = angle_deg * kPi / 360.0;
  if (n == 0.0) {
    if (angle_deg != 0.0) throw UsageError("qubit gate " + name + ": zero axis with nonzero angle");
    return {name, Quaternion(1.0)};
  }
  const double s = std::sin(half) / n;
  return {name, Quaternion(std::cos(half), s * ax, s * ay, s * az)};
}

std::vector<Gate> parse_gates(const std::string& text) {
  std::vector<Gate> out;
  std::stringstream all(text);
  std::string item;
  while (std::getline(all, item, ';')) {
    std::istringstream is(item);
    std::vector<std::string> tok;
    for (std::string t; is >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    std::string name = "g" + std::to_string(out.size());
    double v[4];
    std::size_t first = 0;
    if (tok.size() == 5) {
      name = tok[0];
      first = 1;
    } else if (tok.size() != 4) {
      throw UsageError("qubit gate '" + item + "': expected [name] ax ay az angle_deg");
    }
    for (std::size_t k = 0; k < 4; ++k)
      if (!parse_number(tok[first + k], v[k]))
        throw UsageError("qubit gate '" + item + "': bad number '" + tok[first + k] + "'");
    out.push_back(make_gate(name, v[0], v[1], v[2], v[3]));
  }
  return out;
}

void declare_qubit(ParamSet& p) {
  const QubitParams d;
  p.declare("gates", kDefaultGates, "admissible gates: [name] ax ay az angle_deg; ...");
  p.declare("target", kDefaultTarget, "target rotations applied first to last, same syntax");
  p.declare("max_depth", std::to_string(d.max_depth), "largest circuit depth tried");
  p.declare("lambda", format_real(d.lambda), "cost per circuit stage");
  p.declare("starts", std::to_string(d.starts), "random starts per depth");
  p.declare("step", format_real(d.step), "initial descent step");
  p.declare("random_probes", std::to_string(d.random_probes), "random probe qubits beyond the cardinal six");
  p.declare("tie_tol", format_real(d.tie_tol), "objective difference treated as a tie");
}

QubitParams qubit_params(const ParamSet& s) {
  QubitParams p;
  p.gates = parse_gates(s.text("gates"));
  p.target = parse_gates(s.text("target"));
  p.max_depth = s.count("max_depth");
  p.lambda = s.real("lambda");
  p.starts = s.count("starts");
  p.step = s.real("step");
  p.random_probes = s.count("random_probes");
  p.tie_tol = s.real("tie_tol");
  validate(p);
  return p;
}

void validate(const QubitParams& p) {
  auto req = [](bool ok, const char* what) {
    if (!ok) throw UsageError(std::string("qubit-compile: ") + what);
  };
  req(!p.gates.empty(), "gate set must not be empty");
  req(!p.target.empty(), "target must contain at least one rotation");
  req(p.max_depth >= 1, "max_depth must be at least 1");
  req(p.starts >= 1, "starts must be at least 1");
  req(std::isfinite(p.lambda) && p.lambda >= 0.0, "lambda must be non-negative");
  req(std::isfinite(p.step) && p.step > 0.0, "step must be positive");
  req(std::isfinite(p.tie_tol) && p.tie_tol >= 0.0, "tie_tol must be non-negative");
}

std::vector<Quaternion> qubit_probes(std::size_t random_probes, std::uint64_t seed) {
  std::vector<Quaternion> out = {{0, 1, 0, 0}, {0, -1, 0, 0}, {0, 0, 1, 0},
                                 {0, 0, -1, 0}, {0, 0, 0, 1}, {0, 0, 0, -1}};
  Rng rng(seed);
  for (std::size_t k = 0; k < random_probes; ++k) {
    const double theta = std::acos(rng.uniform(-1.0, 1.0));
    out.push_back(qubit_to_quaternion(theta, rng.uniform(-kPi, kPi)));
  }
  return out;
}

Quaternion apply_circuit(const QVector& w, const Quaternion& q) {
  Quaternion out = q;
  for (const Quaternion& stage : w) out = rotate_by(out, stage);
  return out;
}

double circuit_residual(const QVector& w, const Quaternion& target,
                        const std::vector<Quaternion>& probes) {
  double acc = 0.0;
  for (const Quaternion& q : probes) acc += norm_squared(rotate_by(q, target) - apply_circuit(w, q));
  return acc / static_cast<double>(probes.size());
}

QubitReport run_qubit(const QubitParams& p, std::uint64_t seed, std::size_t iterations,
                      std::ostream* csv) {
  validate(p);
  const Problem pr{compose(p.target), qubit_probes(p.random_probes, child_seed(seed, 0)), &p.gates,
                   p.step, iterations};
  QubitReport rep;
  if (csv) *csv << "depth,residual_continuous,residual_projected,objective,gates,selected\n";
  for (std::size_t depth = 1; depth <= p.max_depth; ++depth) {
    Rng rng(child_seed(seed, depth));
    DepthResult best;
    best.depth = depth;
    best.residual_continuous = best.residual_projected = INFINITY;
    std::vector<std::size_t> forward(depth), backward(depth);
    for (std::size_t d = 0; d < depth; ++d) forward[d] = backward[depth - 1 - d] = d;
    for (std::size_t s = 0; s < p.starts; ++s) {
      QVector w(depth);
      for (auto& q : w) q = unit(rng.quat());
      const std::vector<bool> free(depth, false);
      descend(pr, w, free);
      best.residual_continuous =
          std::min(best.residual_continuous, circuit_residual(w, pr.target, pr.probes));
      // Continuation towards the admissible set before projecting.
      for (double rho : kPenaltySchedule) descend(pr, w, free, rho);
      for (const auto* order : {&forward, &backward}) {
        const Candidate c = progressive_projection(pr, w, p.gates, *order);
        if (c.residual < best.residual_projected) {
          best.residual_projected = c.residual;
          best.gates = c.gates;
        }
      }
    }
    if (!std::isfinite(best.residual_projected))
      throw NumericError("qubit-compile: non-finite residual at depth " + std::to_string(depth));
    best.objective = best.residual_projected + p.lambda * static_cast<double>(depth);
    rep.depths.push_back(best);
    if (depth > 1 && best.objective < rep.depths[rep.selected].objective - p.tie_tol)
      rep.selected = depth - 1;
  }
  if (csv)
    for (std::size_t k = 0; k < rep.depths.size(); ++k) {
      const DepthResult& d = rep.depths[k];
      *csv << d.depth << ',' << format_real(d.residual_continuous) << ','
           << format_real(d.residual_projected) << ',' << format_real(d.objective) << ','
           << gate_names(d.gates, p.gates) << ',' << (k == rep.selected ? 1 : 0) << '\n';
    }
  return rep;
}

}  // namespace hrcalc::experiments
