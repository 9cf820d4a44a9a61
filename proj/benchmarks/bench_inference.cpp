#include <benchmark/benchmark.h>

#include "sumspike/network.hpp"
#include "sumspike/neuron.hpp"
#include "sumspike/rng.hpp"
#include "sumspike/sim.hpp"

using namespace sumspike;

namespace {

QuantizedNetwork make_model(const std::vector<int>& widths, int input_width,
                            LayerKind kind, int window, std::uint64_t seed) {
  Rng rng(seed);
  QuantizedNetwork net;
  net.window = window;
  net.input_width = input_width;
  int in = input_width;
  for (std::size_t li = 0; li < widths.size(); ++li) {
    QuantizedLayer l;
    l.kind = li == 0 && kind == LayerKind::Ann ? LayerKind::Ann : kind;
    l.in_width = in;
    l.out_width = widths[li];
    l.quant.theta_q = 64;
    l.quant.m_w = 1u << 10;
    l.quant.m_b = 1u << 10;
    l.weights.resize(static_cast<std::size_t>(l.out_width));
    for (auto& row : l.weights) {
      row.resize(static_cast<std::size_t>(in));
      for (auto& w : row) w = static_cast<std::int8_t>(rng.uniform_int(-64, 64));
    }
    l.biases.assign(static_cast<std::size_t>(l.out_width), 1);
    net.layers.push_back(std::move(l));
    in = widths[li];
  }
  return net;
}

EncodedInput make_input(const QuantizedNetwork& net, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> values(static_cast<std::size_t>(net.input_width));
  for (auto& v : values) v = rng.uniform();
  const EncodedInput::Kind kind =
      net.layers.front().kind == LayerKind::Ann ? EncodedInput::Kind::Activations
      : net.layers.front().kind == LayerKind::If ? EncodedInput::Kind::Trains
                                                 : EncodedInput::Kind::Counts;
  return encode_sample(values, net.window, kind, net.config.q);
}

void BM_CoreInferenceSsf(benchmark::State& state) {
  const auto net = make_model({32, 64, 32, 16, 64}, 128, LayerKind::Ssf,
                              static_cast<int>(state.range(0)), 1);
  Core core;
  core.load_model(net);
  const auto input = make_input(net, 2);
  for (auto _ : state) {
    auto result = core.run_inference(input);
    benchmark::DoNotOptimize(result.predicted_class);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_CoreInferenceSsf)->Arg(3)->Arg(31);

void BM_CoreInferenceIf(benchmark::State& state) {
  const auto net = make_model({32, 64, 32, 16, 64}, 128, LayerKind::If,
                              static_cast<int>(state.range(0)), 1);
  Core core;
  core.load_model(net);
  const auto input = make_input(net, 2);
  for (auto _ : state) {
    auto result = core.run_inference(input);
    benchmark::DoNotOptimize(result.predicted_class);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_CoreInferenceIf)->Arg(3)->Arg(31);

void BM_FunctionalForward(benchmark::State& state) {
  const auto net = make_model({32, 64, 32, 16, 64}, 128, LayerKind::Ssf, 31, 1);
  const auto input = make_input(net, 2);
  for (auto _ : state) {
    auto result = forward(net, input);
    benchmark::DoNotOptimize(result.predicted_class);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_FunctionalForward);

void BM_IfWindowNeuron(benchmark::State& state) {
  Rng rng(5);
  NeuronParams p;
  p.threshold = 1.0;
  std::vector<SpikeTrain> inputs;
  for (int j = 0; j < 128; ++j) {
    p.weights.push_back(rng.uniform(-0.2, 0.2));
    SpikeTrain t = SpikeTrain::zeros(31);
    for (auto& b : t.bits) b = rng.bernoulli(0.2) ? 1 : 0;
    inputs.push_back(std::move(t));
  }
  for (auto _ : state) {
    auto out = if_run_window(inputs, p, 31);
    benchmark::DoNotOptimize(out.bits.data());
  }
}
BENCHMARK(BM_IfWindowNeuron);

}  // namespace

BENCHMARK_MAIN();
