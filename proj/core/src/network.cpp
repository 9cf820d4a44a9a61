#include "sumspike/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sumspike {

const char* to_string(LayerKind k) {
  switch (k) {
    case LayerKind::Ann: return "ANN";
    case LayerKind::If: return "IF";
    case LayerKind::Ssf: return "SSF";
  }
  return "?";
}

const char* to_string(BiasMode m) {
  return m == BiasMode::Scaled ? "scaled" : "once";
}

std::uint32_t weight_mem_footprint(const QuantizedNetwork& net) {
  std::uint64_t bytes = 0;
  for (const auto& l : net.layers)
    bytes += static_cast<std::uint64_t>(l.in_width) * l.out_width +
             4ull * static_cast<std::uint64_t>(l.out_width);
  return static_cast<std::uint32_t>(bytes);
}

namespace {

std::int64_t param_count_dims(const std::vector<std::pair<int, int>>& dims) {
  std::int64_t n = 0;
  for (auto [in, out] : dims)
    n += static_cast<std::int64_t>(in) * out + out;
  return n;
}

}  // namespace

std::int64_t param_count(const QuantizedNetwork& net) {
  std::vector<std::pair<int, int>> dims;
  for (const auto& l : net.layers) dims.emplace_back(l.in_width, l.out_width);
  return param_count_dims(dims);
}

std::int64_t param_count(const FloatNetwork& net) {
  std::vector<std::pair<int, int>> dims;
  for (const auto& l : net.layers) dims.emplace_back(l.in_width, l.out_width);
  return param_count_dims(dims);
}

// ---------------------------------------------------------------------------

int count_bits(int window) {
  int bits = 1;
  while ((1 << bits) - 1 < window) ++bits;  // ceil(log2(T+1))
  return bits;
}

// Bits per stored activation value for a layer's output representation.
// IF emits a T-bit train per neuron; SSF counts use the smallest supported
// FIFO read width that holds log2(T+1) bits; ANN activations are q=8 bit.
int count_fifo_width(int window) {
  const int bits = count_bits(window);
  for (int w : {1, 2, 4, 8, 16})
    if (w >= bits) return w;
  return 16;
}

int activation_bits(LayerKind kind, int window) {
  switch (kind) {
    case LayerKind::If: return window;
    case LayerKind::Ssf: return count_fifo_width(window);
    case LayerKind::Ann: return 8;
  }
  return 8;
}

namespace {

std::uint32_t repr_bytes(LayerKind kind, int width, int window) {
  const std::uint64_t bits =
      static_cast<std::uint64_t>(width) * activation_bits(kind, window);
  return static_cast<std::uint32_t>((bits + 7) / 8);
}

struct LayerDims {
  LayerKind kind;
  int in_width;
  int out_width;
  std::size_t weight_rows;
  std::size_t weight_cols_min;
  std::size_t weight_cols_max;
  std::size_t bias_count;
};

template <typename Layer>
LayerDims dims_of(const Layer& l) {
  std::size_t cols_min = l.in_width >= 0 ? static_cast<std::size_t>(l.in_width) : 0;
  std::size_t cols_max = cols_min;
  if (!l.weights.empty()) {
    cols_min = l.weights.front().size();
    cols_max = cols_min;
    for (const auto& row : l.weights) {
      cols_min = std::min(cols_min, row.size());
      cols_max = std::max(cols_max, row.size());
    }
  }
  return {l.kind, l.in_width, l.out_width, l.weights.size(), cols_min, cols_max,
          l.biases.size()};
}

void check_structure(int window, int input_width,
                     const std::vector<LayerDims>& layers,
                     const HardwareLimits& limits, int q,
                     std::vector<std::string>& out) {
  auto add = [&](const std::string& msg) { out.push_back(msg); };

  if (window < 1 || window > 255)
    add("window T=" + std::to_string(window) + " outside [1, 255]");
  if (layers.empty()) {
    add("network has no layers");
    return;
  }
  if (static_cast<int>(layers.size()) > limits.max_layers)
    add("layer count " + std::to_string(layers.size()) + " > " +
        std::to_string(limits.max_layers));

  int prev_out = input_width;
  std::uint64_t weight_bytes = 0;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    const std::string where = "layer " + std::to_string(i) + " (" +
                              to_string(l.kind) + ")";
    if (l.in_width < 1 || l.in_width > limits.max_width)
      add(where + ": in_width " + std::to_string(l.in_width) + " outside [1, " +
          std::to_string(limits.max_width) + "]");
    if (l.out_width < 1 || l.out_width > limits.max_width)
      add(where + ": out_width " + std::to_string(l.out_width) + " outside [1, " +
          std::to_string(limits.max_width) + "]");
    if (l.in_width != prev_out)
      add(where + ": in_width " + std::to_string(l.in_width) +
          " does not chain from previous width " + std::to_string(prev_out));
    if (l.weight_rows != static_cast<std::size_t>(l.out_width) ||
        l.weight_cols_min != static_cast<std::size_t>(l.in_width) ||
        l.weight_cols_max != static_cast<std::size_t>(l.in_width))
      add(where + ": weight matrix shape does not match declared widths");
    if (l.bias_count != static_cast<std::size_t>(l.out_width))
      add(where + ": bias count does not match out_width");
    if (l.kind == LayerKind::Ann && !accumulator_fits_32bit(l.in_width, q))
      add(where + ": accumulator overflows 32 bits at this fan-in");
    weight_bytes += static_cast<std::uint64_t>(l.in_width) * l.out_width +
                    4ull * static_cast<std::uint64_t>(l.out_width);
    prev_out = l.out_width;
  }

  if (weight_bytes > limits.weight_mem_bytes)
    add("parameters need " + std::to_string(weight_bytes) +
        " bytes > weight memory " + std::to_string(limits.weight_mem_bytes));

  // Activation memory must hold each boundary's two live representations
  // (previous output being consumed plus current output being produced).
  std::uint32_t prev_bytes = repr_bytes(layers.front().kind, input_width, window);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::uint32_t out_bytes =
        repr_bytes(layers[i].kind, layers[i].out_width, window);
    if (prev_bytes + out_bytes > limits.act_mem_bytes)
      add("layer " + std::to_string(i) + ": activation traffic " +
          std::to_string(prev_bytes + out_bytes) + " bytes > activation memory " +
          std::to_string(limits.act_mem_bytes));
    prev_bytes = out_bytes;
  }
}

}  // namespace

std::vector<std::string> validate(const QuantizedNetwork& net,
                                  const HardwareLimits& limits) {
  std::vector<std::string> out;
  std::vector<LayerDims> dims;
  for (const auto& l : net.layers) dims.push_back(dims_of(l));
  check_structure(net.window, net.input_width, dims, limits, net.config.q, out);
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& l = net.layers[i];
    if (l.kind != LayerKind::Ann && l.quant.theta_q < 1)
      out.push_back("layer " + std::to_string(i) +
                    ": quantized threshold must be >= 1");
  }
  return out;
}

std::vector<std::string> validate(const FloatNetwork& net,
                                  const HardwareLimits& limits) {
  std::vector<std::string> out;
  std::vector<LayerDims> dims;
  for (const auto& l : net.layers) dims.push_back(dims_of(l));
  check_structure(net.window, net.input_width, dims, limits, 8, out);
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& l = net.layers[i];
    if (l.kind != LayerKind::Ann && l.threshold <= 0.0)
      out.push_back("layer " + std::to_string(i) + ": threshold must be > 0");
  }
  return out;
}

// ---------------------------------------------------------------------------

int rate_encode_count(double value, int window) {
  if (value < 0.0 || value > 1.0)
    throw std::invalid_argument("rate_encode: value outside [0, 1]");
  return static_cast<int>(round_half_away(value * window));
}

SpikeTrain rate_encode_train(int count, int window) {
  if (count < 0 || count > window)
    throw std::invalid_argument("rate_encode: count outside [0, T]");
  SpikeTrain train = SpikeTrain::zeros(window);
  int prev = 0;
  for (int t = 1; t <= window; ++t) {
    const int cur = (t * count) / window;
    if (cur > prev) train.bits[static_cast<std::size_t>(t - 1)] = 1;
    prev = cur;
  }
  return train;
}

std::int32_t rate_encode_activation(double value, int q) {
  if (value < 0.0 || value > 1.0)
    throw std::invalid_argument("rate_encode: value outside [0, 1]");
  const std::int64_t act_max = (std::int64_t{1} << q) - 1;
  return static_cast<std::int32_t>(
      std::clamp(round_half_away(value * static_cast<double>(act_max)),
                 std::int64_t{0}, act_max));
}

EncodedInput encode_sample(const std::vector<double>& values, int window,
                           EncodedInput::Kind target, int q) {
  EncodedInput out;
  out.kind = target;
  switch (target) {
    case EncodedInput::Kind::Counts:
      for (double v : values) out.values.push_back(rate_encode_count(v, window));
      break;
    case EncodedInput::Kind::Trains:
      for (double v : values)
        out.trains.push_back(rate_encode_train(rate_encode_count(v, window), window));
      break;
    case EncodedInput::Kind::Activations:
      for (double v : values) out.values.push_back(rate_encode_activation(v, q));
      break;
  }
  return out;
}

// ---------------------------------------------------------------------------

int argmax_class(const std::vector<std::int64_t>& scores) {
  if (scores.empty()) throw std::invalid_argument("argmax_class: empty scores");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return static_cast<int>(best);
}

std::int32_t activation_to_count(std::int64_t activation, int window, int q) {
  const double act_max = std::pow(2.0, q) - 1.0;
  const std::int64_t c =
      round_half_away(static_cast<double>(activation) / act_max * window);
  return static_cast<std::int32_t>(std::clamp<std::int64_t>(c, 0, window));
}

namespace {

struct Repr {
  EncodedInput::Kind kind = EncodedInput::Kind::Counts;
  std::vector<SpikeTrain> trains;
  std::vector<std::int64_t> values;
};

std::vector<std::int64_t> as_counts(const Repr& r, int window, int q) {
  switch (r.kind) {
    case EncodedInput::Kind::Counts: return r.values;
    case EncodedInput::Kind::Trains: {
      std::vector<std::int64_t> c;
      for (const auto& t : r.trains) c.push_back(count_spikes(t));
      return c;
    }
    case EncodedInput::Kind::Activations: {
      std::vector<std::int64_t> c;
      for (std::int64_t a : r.values) c.push_back(activation_to_count(a, window, q));
      return c;
    }
  }
  return {};
}

std::vector<SpikeTrain> as_trains(const Repr& r, int window, int q) {
  if (r.kind == EncodedInput::Kind::Trains) return r.trains;
  std::vector<SpikeTrain> out;
  for (std::int64_t c : as_counts(r, window, q))
    out.push_back(rate_encode_train(static_cast<int>(c), window));
  return out;
}

std::vector<std::int64_t> as_activations(const Repr& r, int window, int q) {
  // Counts (and counted trains) pass through as integer activations.
  if (r.kind == EncodedInput::Kind::Activations) return r.values;
  return as_counts(r, window, q);
}

}  // namespace

ForwardResult forward(const QuantizedNetwork& net, const EncodedInput& input) {
  const auto violations = validate(net);
  if (!violations.empty())
    throw std::invalid_argument("forward: invalid network: " + violations.front());
  if (static_cast<int>(input.width()) != net.input_width)
    throw std::invalid_argument("forward: input width mismatch");

  const int window = net.window;
  const int q = net.config.q;

  Repr repr;
  repr.kind = input.kind;
  repr.trains = input.trains;
  repr.values.assign(input.values.begin(), input.values.end());

  for (const auto& layer : net.layers) {
    Repr next;
    switch (layer.kind) {
      case LayerKind::Ann: {
        const std::vector<std::int64_t> x = as_activations(repr, window, q);
        std::vector<std::int32_t> x32(x.begin(), x.end());
        std::vector<std::vector<std::int32_t>> w32(layer.weights.size());
        for (std::size_t i = 0; i < layer.weights.size(); ++i)
          w32[i].assign(layer.weights[i].begin(), layer.weights[i].end());
        const auto y =
            quantized_ann_layer(x32, w32, layer.biases, layer.quant, net.config);
        next.kind = EncodedInput::Kind::Activations;
        next.values.assign(y.begin(), y.end());
        break;
      }
      case LayerKind::Ssf: {
        const std::vector<std::int64_t> counts = as_counts(repr, window, q);
        next.kind = EncodedInput::Kind::Counts;
        next.values.resize(layer.weights.size());
        for (std::size_t i = 0; i < layer.weights.size(); ++i) {
          std::int64_t u = 0;
          for (std::size_t j = 0; j < counts.size(); ++j)
            u += static_cast<std::int64_t>(layer.weights[i][j]) * counts[j];
          const std::int64_t bias = layer.biases[i];
          u += layer.bias_mode == BiasMode::Scaled ? bias * window : bias;
          std::int64_t c = u > 0 ? u / layer.quant.theta_q : 0;
          next.values[i] = std::min<std::int64_t>(c, window);
        }
        break;
      }
      case LayerKind::If: {
        const std::vector<SpikeTrain> trains = as_trains(repr, window, q);
        next.kind = EncodedInput::Kind::Trains;
        next.trains.resize(layer.weights.size());
        for (std::size_t i = 0; i < layer.weights.size(); ++i) {
          SpikeTrain out_train = SpikeTrain::zeros(window);
          std::int64_t v = 0;
          for (int t = 0; t < window; ++t) {
            v += layer.biases[i];
            for (std::size_t j = 0; j < trains.size(); ++j)
              if (trains[j].bits[static_cast<std::size_t>(t)])
                v += layer.weights[i][j];
            if (v >= layer.quant.theta_q) {
              v -= layer.quant.theta_q;
              out_train.bits[static_cast<std::size_t>(t)] = 1;
            }
          }
          next.trains[i] = std::move(out_train);
        }
        break;
      }
    }
    repr = std::move(next);
  }

  ForwardResult result;
  result.scores = repr.kind == EncodedInput::Kind::Trains
                      ? as_counts(repr, window, q)
                      : repr.values;
  result.predicted_class = argmax_class(result.scores);
  return result;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> flatten(const std::vector<std::vector<double>>& m) {
  std::vector<double> out;
  for (const auto& row : m) out.insert(out.end(), row.begin(), row.end());
  return out;
}

}  // namespace

QuantizedNetwork quantize_network(const FloatNetwork& net,
                                  const std::vector<std::vector<double>>& calibration,
                                  const QuantConfig& cfg) {
  {
    const auto violations = validate(net);
    if (!violations.empty())
      throw std::invalid_argument("quantize_network: invalid model: " +
                                  violations.front());
  }
  const bool has_ann = std::any_of(net.layers.begin(), net.layers.end(),
                                   [](const FloatLayer& l) {
                                     return l.kind == LayerKind::Ann;
                                   });
  if (has_ann && calibration.empty())
    throw std::invalid_argument(
        "quantize_network: calibration set required for ANN layers");
  for (const auto& sample : calibration)
    if (static_cast<int>(sample.size()) != net.input_width)
      throw std::invalid_argument("quantize_network: calibration sample width mismatch");

  const int window = net.window;
  const double act_max = std::pow(2.0, cfg.q) - 1.0;

  QuantizedNetwork out;
  out.window = window;
  out.input_width = net.input_width;
  out.config = cfg;

  // Float-semantics calibration state, one vector per sample. For SNN layers
  // the values are spike counts; for ANN layers, real activations.
  std::vector<std::vector<double>> state = calibration;
  bool state_is_counts = false;
  if (!net.layers.empty() && net.layers.front().kind != LayerKind::Ann) {
    for (auto& sample : state)
      for (auto& v : sample) v = rate_encode_count(v, window);
    state_is_counts = true;
  }

  double prev_ann_r_o = 0.0;
  bool prev_was_ann = false;

  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    const FloatLayer& fl = net.layers[li];
    QuantizedLayer ql;
    ql.kind = fl.kind;
    ql.in_width = fl.in_width;
    ql.out_width = fl.out_width;
    ql.bias_mode = fl.bias_mode;

    double r_w = 0.0;
    try {
      r_w = compute_weight_scale(flatten(fl.weights), fl.biases, cfg.q);
      ql.quant.r_w = r_w;

      ql.weights.resize(fl.weights.size());
      for (std::size_t i = 0; i < fl.weights.size(); ++i) {
        const auto wq = quantize_tensor(fl.weights[i], r_w, cfg.q, true);
        ql.weights[i].assign(wq.values.begin(), wq.values.end());
      }
      const auto bq = quantize_tensor(fl.biases, r_w, cfg.q, true);
      ql.biases.assign(bq.values.begin(), bq.values.end());

      if (fl.kind == LayerKind::Ann) {
        double r_i;
        if (li == 0) {
          r_i = 1.0 / act_max;  // encoder domain is [0, 1]
        } else if (prev_was_ann) {
          r_i = prev_ann_r_o;
        } else {
          r_i = 1.0;  // counts arrive as their own quantized representation
        }
        // Float reference outputs over the calibration set.
        std::vector<std::vector<double>> y(state.size());
        std::vector<double> pooled;
        for (std::size_t s = 0; s < state.size(); ++s) {
          y[s].resize(fl.weights.size());
          for (std::size_t i = 0; i < fl.weights.size(); ++i) {
            double acc = fl.biases[i];
            for (std::size_t j = 0; j < state[s].size(); ++j)
              acc += fl.weights[i][j] * state[s][j];
            y[s][i] = std::max(0.0, acc);
            pooled.push_back(y[s][i]);
          }
        }
        const double r_o = calibrate_activation_scale(pooled, cfg.q);
        ql.quant.r_i = r_i;
        ql.quant.r_o = r_o;
        ql.quant.n_shift = cfg.n_shift;
        ql.quant.m_shift = cfg.m_shift;
        build_requant(r_i, r_w, r_o, cfg, ql.quant.m_w, ql.quant.m_b);

        const bool next_is_snn = li + 1 < net.layers.size() &&
                                 net.layers[li + 1].kind != LayerKind::Ann;
        for (std::size_t s = 0; s < state.size(); ++s) {
          if (next_is_snn) {
            std::vector<double> counts(y[s].size());
            for (std::size_t i = 0; i < y[s].size(); ++i) {
              const double v = std::clamp(y[s][i] / (act_max * r_o), 0.0, 1.0);
              counts[i] = static_cast<double>(rate_encode_count(v, window));
            }
            state[s] = std::move(counts);
          } else {
            state[s] = std::move(y[s]);
          }
        }
        state_is_counts = next_is_snn;
        prev_ann_r_o = r_o;
        prev_was_ann = true;
      } else {
        ql.quant.theta_q = quantize_threshold(fl.threshold, r_w);
        ql.quant.n_shift = cfg.n_shift;
        ql.quant.m_shift = cfg.m_shift;

        // Propagate float counts for downstream calibration.
        for (auto& sample : state) {
          std::vector<double> counts(fl.weights.size());
          if (fl.kind == LayerKind::Ssf) {
            for (std::size_t i = 0; i < fl.weights.size(); ++i) {
              double u = fl.bias_mode == BiasMode::Scaled
                             ? fl.biases[i] * window
                             : fl.biases[i];
              for (std::size_t j = 0; j < sample.size(); ++j)
                u += fl.weights[i][j] * sample[j];
              counts[i] = ssf_fire(u, fl.threshold, window);
            }
          } else {  // IF: faithful per-step float simulation
            std::vector<SpikeTrain> trains;
            trains.reserve(sample.size());
            for (double c : sample)
              trains.push_back(rate_encode_train(
                  static_cast<int>(std::clamp(c, 0.0, double(window))), window));
            for (std::size_t i = 0; i < fl.weights.size(); ++i) {
              NeuronParams p;
              p.weights = fl.weights[i];
              p.bias = fl.biases[i];
              p.threshold = fl.threshold;
              counts[i] = count_spikes(if_run_window(trains, p, window));
            }
          }
          sample = std::move(counts);
        }
        state_is_counts = true;
        prev_was_ann = false;
      }
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("layer " + std::to_string(li) + " (" +
                                  to_string(fl.kind) + "): " + e.what());
    }
    (void)state_is_counts;
    out.layers.push_back(std::move(ql));
  }

  const auto violations = validate(out);
  if (!violations.empty())
    throw std::invalid_argument("quantize_network: quantized model invalid: " +
                                violations.front());
  return out;
}

}  // namespace sumspike
