#include <benchmark/benchmark.h>

#include <random>

#include "apexrl/mlp.hpp"

using namespace apexrl;

namespace {

Mlp net_720() {
  std::mt19937_64 rng(1);
  return Mlp::make({720, 64, 64, 64, 4}, rng);
}

void BM_MlpForward(benchmark::State& state) {
  const Mlp net = net_720();
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(720, state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward(net, x));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpForward)->Arg(1)->Arg(64)->Arg(256);

void BM_MlpBackward(benchmark::State& state) {
  const Mlp net = net_720();
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(720, state.range(0));
  const Eigen::MatrixXd g = Eigen::MatrixXd::Ones(4, state.range(0));
  Tape tape;
  forward(net, x, &tape);
  Gradients grads;
  for (auto _ : state) {
    benchmark::DoNotOptimize(backward(net, tape, g, grads));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpBackward)->Arg(64)->Arg(256);

void BM_AdamStep(benchmark::State& state) {
  Mlp net = net_720();
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(720, 64);
  const Eigen::MatrixXd g = Eigen::MatrixXd::Ones(4, 64);
  AdamState opt = AdamState::zeros_like(net);
  Gradients grads;
  for (auto _ : state) {
    Tape tape;
    forward(net, x, &tape);
    backward(net, tape, g, grads);
    adam_step(net, opt, grads, 1e-4);
  }
}
BENCHMARK(BM_AdamStep);

}  // namespace

BENCHMARK_MAIN();
