#ifndef SUMSPIKE_TESTS_HELPERS_HPP
#define SUMSPIKE_TESTS_HELPERS_HPP

#include <algorithm>
#include <vector>

#include "sumspike/network.hpp"
#include "sumspike/rng.hpp"

namespace sumspike::testing {

// Random deployable model: mixed layer kinds, widths and window within the
// core limits, integer weights across the full int8 range.
inline QuantizedNetwork random_valid_model(Rng& rng) {
  for (;;) {
    QuantizedNetwork net;
    net.window = rng.uniform_int(1, 31);
    const int layer_count = rng.uniform_int(1, 6);
    int in = rng.uniform_int(1, 128);
    net.input_width = in;
    for (int li = 0; li < layer_count; ++li) {
      QuantizedLayer l;
      l.kind = static_cast<LayerKind>(rng.uniform_int(0, 2));
      l.in_width = in;
      l.out_width = rng.uniform_int(1, 128);
      l.bias_mode = rng.bernoulli(0.5) ? BiasMode::Scaled : BiasMode::Once;
      l.weights.resize(static_cast<std::size_t>(l.out_width));
      for (auto& row : l.weights) {
        row.resize(static_cast<std::size_t>(in));
        for (auto& w : row) w = static_cast<std::int8_t>(rng.uniform_int(-128, 127));
      }
      l.biases.resize(static_cast<std::size_t>(l.out_width));
      for (auto& b : l.biases) b = rng.uniform_int(-128, 127);
      if (l.kind == LayerKind::Ann) {
        l.quant.m_w = static_cast<std::uint32_t>(rng.uniform_int(1, 1 << 16));
        l.quant.m_b = static_cast<std::uint32_t>(rng.uniform_int(1, 1 << 16));
        l.quant.n_shift = 16;
        l.quant.m_shift = 16;
      } else {
        // Mid-range thresholds keep spike counts off the rails.
        const int scale = std::max(1, in * 16 * (li == 0 ? net.window : 4) / 8);
        l.quant.theta_q = rng.uniform_int(1, scale);
      }
      net.layers.push_back(std::move(l));
      in = net.layers.back().out_width;
    }
    if (validate(net).empty()) return net;
  }
}

inline EncodedInput random_input_for(const QuantizedNetwork& net, Rng& rng) {
  std::vector<double> values(static_cast<std::size_t>(net.input_width));
  for (auto& v : values) v = rng.uniform();
  EncodedInput::Kind kind;
  switch (net.layers.front().kind) {
    case LayerKind::Ann: kind = EncodedInput::Kind::Activations; break;
    case LayerKind::If: kind = EncodedInput::Kind::Trains; break;
    default: kind = EncodedInput::Kind::Counts; break;
  }
  return encode_sample(values, net.window, kind, net.config.q);
}

// Homogeneous stack used by the latency/energy shape checks.
inline QuantizedNetwork stack_model(const std::vector<int>& widths, int input_width,
                                    const std::vector<LayerKind>& kinds, int window,
                                    std::uint64_t seed) {
  Rng rng(seed);
  QuantizedNetwork net;
  net.window = window;
  net.input_width = input_width;
  int in = input_width;
  for (std::size_t li = 0; li < widths.size(); ++li) {
    QuantizedLayer l;
    l.kind = kinds[li];
    l.in_width = in;
    l.out_width = widths[li];
    l.weights.resize(static_cast<std::size_t>(l.out_width));
    for (auto& row : l.weights) {
      row.resize(static_cast<std::size_t>(in));
      for (auto& w : row) w = static_cast<std::int8_t>(rng.uniform_int(-24, 24));
    }
    l.biases.resize(static_cast<std::size_t>(l.out_width));
    for (auto& b : l.biases) b = rng.uniform_int(-4, 4);
    if (l.kind == LayerKind::Ann) {
      l.quant.m_w = 1u << 12;
      l.quant.m_b = 1u << 12;
      l.quant.n_shift = 16;
      l.quant.m_shift = 16;
    } else {
      l.quant.theta_q = std::max(1, in * 12 * (li == 0 ? window : 4) / 6);
    }
    net.layers.push_back(std::move(l));
    in = widths[li];
  }
  return net;
}

}  // namespace sumspike::testing

#endif  // SUMSPIKE_TESTS_HELPERS_HPP
