#include <benchmark/benchmark.h>

#include <random>

#include "hrcalc/adaptive.hpp"
#include "hrcalc/augmentation.hpp"
#include "hrcalc/control.hpp"
#include "hrcalc/fusion.hpp"
#include "hrcalc/hr_calculus.hpp"
#include "hrcalc/kalman.hpp"
#include "hrcalc/qnn.hpp"

namespace {

using namespace hrcalc;

struct Draw {
  std::mt19937_64 gen{12345};
  std::normal_distribution<double> n{0.0, 1.0};
  Quaternion quat() { return {n(gen), n(gen), n(gen), n(gen)}; }
  QVector vec(std::size_t m) {
    QVector v(m);
    for (auto& q : v) q = quat();
    return v;
  }
  QMatrix mat(std::size_t r, std::size_t c) {
    QMatrix a(r, c);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) a(i, j) = quat();
    return a;
  }
  QMatrix hpd(std::size_t m) {
    const QMatrix x = mat(m, m);
    return x * hermitian(x) + QMatrix::identity(m);
  }
};

void BM_QuaternionProduct(benchmark::State& state) {
  Draw d;
  Quaternion a = d.quat();
  const Quaternion b = d.quat() / 3.0;
  for (auto _ : state) {
    a = a * b;
    a = a / norm(a);
    benchmark::DoNotOptimize(a);
  }
}
BENCHMARK(BM_QuaternionProduct);

void BM_QMatrixProduct(benchmark::State& state) {
  Draw d;
  const auto m = static_cast<std::size_t>(state.range(0));
  const QMatrix a = d.mat(m, m), b = d.mat(m, m);
  for (auto _ : state) benchmark::DoNotOptimize(a * b);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_QMatrixProduct)->RangeMultiplier(2)->Range(2, 32)->Complexity(benchmark::oNCubed);

void BM_QMatrixInverse(benchmark::State& state) {
  Draw d;
  const QMatrix a = d.hpd(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(qinverse(a));
}
BENCHMARK(BM_QMatrixInverse)->RangeMultiplier(2)->Range(2, 16);

void BM_Augment(benchmark::State& state) {
  Draw d;
  const QVector v = d.vec(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(augment_stacked(v));
}
BENCHMARK(BM_Augment)->Arg(4)->Arg(64);

void BM_HrGradient(benchmark::State& state) {
  Draw d;
  const auto m = static_cast<std::size_t>(state.range(0));
  const QVector za = augment_stacked(d.vec(m)), w = d.vec(4 * m);
  const Quaternion y = d.quat();
  const QFunction cost = [&](const QVector& wv) { return Quaternion(norm_squared(y - dot_t(wv, za))); };
  for (auto _ : state) benchmark::DoNotOptimize(hr_gradient(cost, w));
}
BENCHMARK(BM_HrGradient)->Arg(1)->Arg(4);

void BM_QlmsStep(benchmark::State& state) {
  Draw d;
  const auto m = static_cast<std::size_t>(state.range(0));
  LmsFilter f{QVector(4 * m), 1e-3};
  const QVector z = d.vec(m);
  const Quaternion y = d.quat();
  for (auto _ : state) {
    f = qlms_step(f, z, y).filter;
    benchmark::DoNotOptimize(f.w);
  }
}
BENCHMARK(BM_QlmsStep)->Arg(2)->Arg(8);

void BM_KalmanStep(benchmark::State& state) {
  Draw d;
  const auto n = static_cast<std::size_t>(state.range(0));
  QMatrix f = d.mat(n, n);
  f *= 0.3 / static_cast<double>(n);
  const StateSpaceModel model{f, {}, d.mat(n, n), d.hpd(n), d.hpd(n)};
  KalmanState s{QVector(n), QMatrix::identity(n), {}};
  const QVector y = d.vec(n);
  for (auto _ : state) {
    s = kalman_update(model, kalman_predict(model, s), y);
    benchmark::DoNotOptimize(s.x_hat);
  }
}
BENCHMARK(BM_KalmanStep)->Arg(4)->Arg(8)->Arg(16);

void BM_LqrBackward(benchmark::State& state) {
  Draw d;
  LqrProblem p;
  p.F = d.mat(4, 4);
  p.B = d.mat(4, 2);
  p.Q = d.hpd(4);
  p.R = d.hpd(2);
  p.T = d.hpd(4);
  p.horizon = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(lqr_backward(p));
}
BENCHMARK(BM_LqrBackward)->Arg(20)->Arg(100);

void BM_DiffusionRound(benchmark::State& state) {
  Draw d;
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t l = 0; l < n; ++l) edges.emplace_back(l, (l + 1) % n);
  const AgentNetwork net = make_network(n, edges);
  std::vector<LmsFilter> agents(n, LmsFilter{QVector(8), 1e-3});
  std::vector<LmsObservation> obs;
  for (std::size_t l = 0; l < n; ++l) obs.push_back({d.vec(2), d.quat()});
  for (auto _ : state) {
    agents = diffusion_round(net, agents, obs);
    benchmark::DoNotOptimize(agents);
  }
}
BENCHMARK(BM_DiffusionRound)->Arg(8)->Arg(32);

void BM_QnnTrainStep(benchmark::State& state) {
  Draw d;
  QnnNetwork net = init_network({4, 8, 2}, "split_tanh", 1e-3, 7);
  const QVector x0 = d.vec(4), target = d.vec(2);
  for (auto _ : state) {
    net = train_step(net, x0, target).net;
    benchmark::DoNotOptimize(net.layers);
  }
}
BENCHMARK(BM_QnnTrainStep);

}  // namespace

BENCHMARK_MAIN();
