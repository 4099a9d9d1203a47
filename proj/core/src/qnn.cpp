#include "hrcalc/qnn.hpp"

#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "hrcalc/errors.hpp"
#include "hrcalc/hr_calculus.hpp"
#include "hrcalc/io.hpp"

namespace hrcalc {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double params_norm(const QVector& v) { return norm(v); }

}  // namespace

Activation activation_by_name(const std::string& name) {
  if (name == "identity") return {name, [](const Quaternion& q) { return q; }};
  if (name == "split_tanh") return {name, split_tanh};
  if (name == "split_sigmoid")
    return {name, [](const Quaternion& q) {
              return Quaternion(sigmoid(q.r), sigmoid(q.i), sigmoid(q.j), sigmoid(q.k));
            }};
  throw UsageError("unknown activation `" + name + "` (identity, split_tanh, split_sigmoid)");
}

std::size_t QnnNetwork::input_size() const { return layers.empty() ? 0 : layers.front().W.cols(); }
std::size_t QnnNetwork::output_size() const { return layers.empty() ? 0 : layers.back().W.rows(); }

void validate_network(const QnnNetwork& net) {
  if (net.layers.empty()) throw UsageError("qnn: network has no layers");
  if (!(net.gamma >= 0.0) || !std::isfinite(net.gamma))
    throw UsageError("qnn: gamma must be finite and nonnegative");
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const QnnLayer& layer = net.layers[l];
    const std::string where = "qnn: layer " + std::to_string(l + 1);
    if (layer.W.rows() == 0 || layer.W.cols() == 0) throw UsageError(where + " is empty");
    if (layer.b.size() != layer.W.rows()) throw UsageError(where + " bias length mismatch");
    if (!layer.activation.f) throw UsageError(where + " has no activation");
    if (l > 0 && layer.W.cols() != net.layers[l - 1].W.rows())
      throw UsageError(where + " input size does not match the previous layer");
  }
}

QnnNetwork init_network(const std::vector<std::size_t>& sizes, const std::string& activation,
                        double gamma, std::uint64_t seed) {
  if (sizes.size() < 2) throw UsageError("qnn: need at least input and output sizes");
  for (std::size_t s : sizes)
    if (s == 0) throw UsageError("qnn: layer sizes must be positive");
  QnnNetwork net;
  net.gamma = gamma;
  net.seed = seed;
  std::mt19937_64 gen(seed);
  const Activation act = activation_by_name(activation);
  for (std::size_t l = 1; l < sizes.size(); ++l) {
    const double a = 1.0 / std::sqrt(4.0 * static_cast<double>(sizes[l - 1]));
    std::uniform_real_distribution<double> u(-a, a);
    auto draw = [&] {
      const double r = u(gen), i = u(gen), j = u(gen), k = u(gen);
      return Quaternion(r, i, j, k);
    };
    QnnLayer layer{QMatrix(sizes[l], sizes[l - 1]), QVector(sizes[l]), act};
    for (auto& q : layer.W.data()) q = draw();
    for (auto& q : layer.b) q = draw();
    net.layers.push_back(std::move(layer));
  }
  validate_network(net);
  return net;
}

ForwardTrace forward(const QnnNetwork& net, const QVector& x0) {
  if (x0.size() != net.input_size())
    throw UsageError("qnn forward: input length " + std::to_string(x0.size()) + ", expected " +
                     std::to_string(net.input_size()));
  ForwardTrace t;
  t.x0 = x0;
  const QVector* prev = &t.x0;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const QnnLayer& layer = net.layers[l];
    QVector y = layer.W * *prev + layer.b;
    QVector x(y.size());
    for (std::size_t n = 0; n < y.size(); ++n) {
      x[n] = layer.activation.f(y[n]);
      if (!is_finite(x[n]))
        throw NumericError("qnn forward: non-finite activation in layer " + std::to_string(l + 1));
    }
    t.y.push_back(std::move(y));
    t.x.push_back(std::move(x));
    prev = &t.x.back();
  }
  return t;
}

BackwardResult backward(const QnnNetwork& net, const ForwardTrace& trace, const QVector& d) {
  const std::size_t L = net.layers.size();
  if (trace.x.size() != L) throw UsageError("qnn backward: trace does not match the network");
  if (d.size() != net.output_size())
    throw UsageError("qnn backward: target length " + std::to_string(d.size()) + ", expected " +
                     std::to_string(net.output_size()));
  BackwardResult res;
  res.deltas.resize(L);
  res.deltas[L - 1] = d - trace.x[L - 1];
  for (const auto& e : res.deltas[L - 1]) res.cost += 0.5 * norm_squared(e);
  for (std::size_t l = L - 1; l-- > 0;) {
    const QMatrix& w = net.layers[l + 1].W;
    const QVector& x_next = trace.x[l + 1];
    const QVector& delta_next = res.deltas[l + 1];
    QVector delta(w.cols());
    for (std::size_t m = 0; m < w.cols(); ++m)
      for (std::size_t n = 0; n < w.rows(); ++n) delta[m] += conj(w(n, m) * x_next[n]) * delta_next[n];
    res.deltas[l] = std::move(delta);
  }
  return res;
}

double qnn_cost(const QnnNetwork& net, const QVector& x0, const QVector& d) {
  const ForwardTrace t = forward(net, x0);
  if (d.size() != net.output_size()) throw UsageError("qnn cost: target length mismatch");
  double j = 0.0;
  for (std::size_t m = 0; m < d.size(); ++m) j += 0.5 * norm_squared(d[m] - t.x.back()[m]);
  return j;
}

TrainResult train_step(const QnnNetwork& net, const QVector& x0, const QVector& d,
                       std::size_t step) {
  validate_network(net);
  const ForwardTrace t = forward(net, x0);
  const BackwardResult br = backward(net, t, d);
  if (!std::isfinite(br.cost)) throw DivergenceError("qnn train_step: cost is not finite", step);
  TrainResult res{net, br.cost, 0.0};
  const std::size_t L = net.layers.size();
  double sq = 0.0;
  for (std::size_t l = 0; l < L; ++l) {
    QVector dir = br.deltas[l];
    if (l + 1 < L)
      for (auto& q : dir) q = Quaternion(4.0 * q.r);  // Σ_zeta delta^zeta
    const QVector& x_prev = l == 0 ? t.x0 : t.x[l - 1];
    QnnLayer& layer = res.net.layers[l];
    for (std::size_t n = 0; n < layer.W.rows(); ++n) {
      for (std::size_t m = 0; m < layer.W.cols(); ++m) {
        const Quaternion g = dir[n] * conj(x_prev[m]);
        layer.W(n, m) += net.gamma * g;
        sq += norm_squared(g);
      }
      layer.b[n] += net.gamma * dir[n];
      sq += norm_squared(dir[n]);
    }
  }
  res.grad_norm = std::sqrt(sq);
  return res;
}

QVector flatten_parameters(const QnnNetwork& net) {
  QVector p;
  for (const auto& layer : net.layers) {
    p.insert(p.end(), layer.W.data().begin(), layer.W.data().end());
    p.insert(p.end(), layer.b.begin(), layer.b.end());
  }
  return p;
}

QnnNetwork with_parameters(const QnnNetwork& net, const QVector& params) {
  QnnNetwork out = net;
  std::size_t k = 0;
  for (auto& layer : out.layers) {
    const std::size_t need = layer.W.data().size() + layer.b.size();
    if (k + need > params.size()) throw UsageError("qnn: parameter vector too short");
    for (auto& q : layer.W.data()) q = params[k++];
    for (auto& q : layer.b) q = params[k++];
  }
  if (k != params.size()) throw UsageError("qnn: parameter vector too long");
  return out;
}

TrainResult numeric_grad_train_step(const QnnNetwork& net, const std::vector<TrainingSample>& batch,
                                    std::size_t step) {
  validate_network(net);
  if (batch.empty()) throw UsageError("qnn numeric step: empty batch");
  const QFunction cost = [&](const QVector& p) {
    const QnnNetwork trial = with_parameters(net, p);
    double j = 0.0;
    for (const auto& s : batch) j += qnn_cost(trial, s.x0, s.d);
    return Quaternion(j);
  };
  const QVector p = flatten_parameters(net);
  const double j0 = cost(p).r;
  if (!std::isfinite(j0)) throw DivergenceError("qnn numeric step: cost is not finite", step);
  const HRGradient g = hr_gradient(cost, p);
  QVector next = p;
  for (std::size_t n = 0; n < p.size(); ++n) next[n] -= net.gamma * g.d_q_conj[n];
  return {with_parameters(net, next), j0, params_norm(g.d_q_conj)};
}

TrainResult numeric_grad_train_step(const QnnNetwork& net, const QVector& x0, const QVector& d,
                                    std::size_t step) {
  return numeric_grad_train_step(net, std::vector<TrainingSample>{{x0, d}}, step);
}

void write_checkpoint(std::ostream& os, const QnnNetwork& net) {
  validate_network(net);
  os << "layers = " << net.input_size();
  for (const auto& layer : net.layers) os << ',' << layer.W.rows();
  os << "\nactivation = ";
  for (std::size_t l = 0; l < net.layers.size(); ++l)
    os << (l ? "," : "") << net.layers[l].activation.name;
  os << "\nseed = " << net.seed << "\ngamma = " << format_real(net.gamma) << '\n';
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    os << "[W" << l + 1 << "]\n";
    write_qmatrix_csv(os, net.layers[l].W);
    os << "\n[b" << l + 1 << "]\n";
    write_qmatrix_csv(os, QMatrix::column(net.layers[l].b));
    os << '\n';
  }
}

QnnNetwork read_checkpoint(std::istream& is) {
  std::map<std::string, std::string> kv;
  std::map<std::string, QMatrix> blocks;
  std::string line;
  while (std::getline(is, line)) {
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw UsageError("checkpoint: bad block header `" + t + "`");
      blocks[t.substr(1, t.size() - 2)] = read_qmatrix_csv(is);
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw UsageError("checkpoint: expected key = value, got `" + t + "`");
    kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  for (const char* key : {"layers", "activation", "seed", "gamma"})
    if (!kv.count(key)) throw UsageError(std::string("checkpoint: missing `") + key + "`");
  std::vector<std::size_t> sizes;
  for (const auto& s : split(kv["layers"], ',')) sizes.push_back(std::stoul(trim(s)));
  std::vector<std::string> acts = split(kv["activation"], ',');
  if (sizes.size() < 2) throw UsageError("checkpoint: need at least two layer sizes");
  if (acts.size() == 1) acts.assign(sizes.size() - 1, acts.front());
  if (acts.size() != sizes.size() - 1) throw UsageError("checkpoint: activation count mismatch");
  QnnNetwork net;
  net.seed = std::stoull(kv["seed"]);
  net.gamma = parse_real(kv["gamma"]);
  for (std::size_t l = 1; l < sizes.size(); ++l) {
    const std::string wl = "W" + std::to_string(l), bl = "b" + std::to_string(l);
    if (!blocks.count(wl) || !blocks.count(bl))
      throw UsageError("checkpoint: missing block for layer " + std::to_string(l));
    const QMatrix& b = blocks[bl];
    if (b.cols() != 1) throw UsageError("checkpoint: bias block must be a column");
    net.layers.push_back({blocks[wl], b.column_vector(0), activation_by_name(trim(acts[l - 1]))});
    if (net.layers.back().W.rows() != sizes[l] || net.layers.back().W.cols() != sizes[l - 1])
      throw UsageError("checkpoint: layer " + std::to_string(l) + " shape does not match header");
  }
  validate_network(net);
  return net;
}

TrainingLogWriter::TrainingLogWriter(std::ostream& os) : os_(os) { os_ << "step,J,grad_norm\n"; }

void TrainingLogWriter::row(std::size_t step, double cost, double grad_norm) {
  os_ << step << ',' << format_real(cost) << ',' << format_real(grad_norm) << '\n';
}

}  // namespace hrcalc
