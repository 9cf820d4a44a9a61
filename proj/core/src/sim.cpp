#include "sumspike/sim.hpp"

#include <algorithm>
#include <stdexcept>

#include "sumspike/blob.hpp"
#include "sumspike/errors.hpp"

namespace sumspike {

const char* to_string(Phase p) {
  switch (p) {
    case Phase::Idle: return "Idle";
    case Phase::LoadWeights: return "LoadWeights";
    case Phase::Accumulate: return "Accumulate";
    case Phase::Bias: return "Bias";
    case Phase::Activate: return "Activate";
    case Phase::WriteBack: return "WriteBack";
    case Phase::Classify: return "Classify";
    case Phase::Done: return "Done";
  }
  return "?";
}

LayerEvents& LayerEvents::operator+=(const LayerEvents& o) {
  weight_reads += o.weight_reads;
  bias_reads += o.bias_reads;
  act_reads += o.act_reads;
  act_writes += o.act_writes;
  macs += o.macs;
  spike_accs += o.spike_accs;
  bias_accs += o.bias_accs;
  compares += o.compares;
  divides += o.divides;
  requants += o.requants;
  boundary_muls += o.boundary_muls;
  return *this;
}

LayerEvents operator+(LayerEvents a, const LayerEvents& b) { return a += b; }

LayerEvents SimTrace::totals() const {
  LayerEvents t;
  for (const auto& l : layers) t += l;
  return t;
}

EventCounts& EventCounts::operator+=(const EventCounts& o) {
  weight_read_bursts += o.weight_read_bursts;
  act_read_bursts += o.act_read_bursts;
  act_write_bursts += o.act_write_bursts;
  macs += o.macs;
  accs += o.accs;
  compares += o.compares;
  divides += o.divides;
  requants += o.requants;
  boundary_muls += o.boundary_muls;
  cycles += o.cycles;
  return *this;
}

EventCounts trace_event_counts(const SimTrace& trace) {
  const LayerEvents t = trace.totals();
  EventCounts c;
  c.weight_read_bursts = t.weight_reads + t.bias_reads;
  c.act_read_bursts = t.act_reads;
  c.act_write_bursts = t.act_writes;
  c.macs = t.macs;
  c.accs = t.spike_accs + t.bias_accs;
  c.compares = t.compares;
  c.divides = t.divides;
  c.requants = t.requants;
  c.boundary_muls = t.boundary_muls;
  c.cycles = trace.cycles;
  c.window = trace.window;
  c.port_bits = trace.port_bits;
  return c;
}

double trace_latency(const SimTrace& trace, double clock_hz) {
  if (clock_hz <= 0.0) throw std::invalid_argument("trace_latency: clock must be > 0");
  return static_cast<double>(trace.cycles) / clock_hz;
}

namespace {

// Output spike buffer: accumulates values until a full port burst is ready,
// flushing the remainder at layer end.
class OutputBuffer {
public:
  explicit OutputBuffer(int port_bits) : port_bits_(port_bits) {}

  void push(int bits, std::uint64_t& flushes) {
    pending_ += bits;
    while (pending_ >= port_bits_) {
      pending_ -= port_bits_;
      ++flushes;
    }
  }

  void layer_end(std::uint64_t& flushes) {
    if (pending_ > 0) {
      ++flushes;
      pending_ = 0;
    }
  }

private:
  int port_bits_;
  int pending_ = 0;
};

// Input FIFO: counts the port bursts needed to keep pops from ever crossing
// an unloaded chunk.
class InputFifo {
public:
  explicit InputFifo(int port_bits) : port_bits_(port_bits) {}

  void pop(int bits, std::uint64_t& loads) {
    while (available_ < bits) {
      available_ += port_bits_;
      ++loads;
    }
    available_ -= bits;
  }

private:
  int port_bits_;
  int available_ = 0;
};

bool legal_transition(Phase from, Phase to) {
  switch (from) {
    case Phase::Idle: return to == Phase::LoadWeights;
    case Phase::LoadWeights: return to == Phase::Accumulate;
    case Phase::Accumulate: return to == Phase::Bias;
    case Phase::Bias: return to == Phase::Activate;
    case Phase::Activate:
      return to == Phase::LoadWeights || to == Phase::WriteBack;
    case Phase::WriteBack:
      return to == Phase::LoadWeights || to == Phase::Classify;
    case Phase::Classify: return to == Phase::Done;
    case Phase::Done: return to == Phase::Idle;
  }
  return false;
}

std::uint64_t bursts(std::uint64_t bytes, int port_bits) {
  const std::uint64_t bits = bytes * 8;
  return (bits + static_cast<std::uint64_t>(port_bits) - 1) / port_bits;
}

// Runtime value stream between layers, in the producing layer's format.
struct ActStream {
  EncodedInput::Kind kind;
  std::vector<SpikeTrain> trains;
  std::vector<std::int64_t> values;

  std::size_t width() const {
    return kind == EncodedInput::Kind::Trains ? trains.size() : values.size();
  }
};

int stream_bits(const ActStream& s, int window) {
  switch (s.kind) {
    case EncodedInput::Kind::Trains: return window;  // 1 bit per timestep
    case EncodedInput::Kind::Counts: return count_fifo_width(window);
    case EncodedInput::Kind::Activations: return 8;
  }
  return 8;
}

}  // namespace

void Core::load_model(const QuantizedNetwork& net) {
  const bool port_ok = cfg_.port_bits == 8 || cfg_.port_bits == 16 ||
                       cfg_.port_bits == 32 || cfg_.port_bits == 64 ||
                       cfg_.port_bits == 128;
  if (!port_ok)
    throw ValidationError("core config: port width must be 8/16/32/64/128 bits");
  if (cfg_.membrane_buffer_depth < 1 || cfg_.membrane_buffer_depth > 16)
    throw ValidationError("core config: membrane buffer depth must be in [1, 16]");
  const auto violations = validate(net, cfg_.limits());
  if (!violations.empty()) {
    std::string msg = "core cannot load model:";
    for (const auto& v : violations) msg += "\n  " + v;
    throw ValidationError(msg);
  }
  model_ = net;
  state_ = FsmState{};
}

void Core::load_blob(const std::vector<std::uint8_t>& blob) {
  load_model(sumspike::load_model(blob, cfg_.limits()));
}

const QuantizedNetwork& Core::model() const {
  if (!model_) throw std::logic_error("core has no model loaded");
  return *model_;
}

SimResult Core::run_inference(const EncodedInput& input,
                              std::vector<std::string>* event_log) {
  if (!model_) throw std::logic_error("run_inference: core not configured");
  const QuantizedNetwork& net = *model_;
  if (static_cast<int>(input.width()) != net.input_width)
    throw std::invalid_argument("run_inference: input width mismatch");

  const int window = net.window;
  const int q = net.config.q;
  const int port = cfg_.port_bits;
  const int depth = cfg_.membrane_buffer_depth;

  SimResult result;
  SimTrace& trace = result.trace;
  trace.window = window;
  trace.port_bits = port;
  trace.layers.resize(net.layers.size());

  state_ = FsmState{};
  auto enter = [&](Phase p) {
    if (!legal_transition(state_.phase, p))
      throw std::logic_error(std::string("illegal FSM transition ") +
                             to_string(state_.phase) + " -> " + to_string(p));
    state_.phase = p;
    if (event_log)
      event_log->push_back("cycle " + std::to_string(trace.cycles) + " layer " +
                           std::to_string(state_.layer) + " phase " +
                           to_string(p));
  };
  auto spend = [&](std::uint64_t cycles) {
    trace.cycles += cycles;
    trace.phase_cycles[static_cast<int>(state_.phase)] += cycles;
  };

  ActStream stream;
  stream.kind = input.kind;
  stream.trains = input.trains;
  stream.values.assign(input.values.begin(), input.values.end());

  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    state_.layer = static_cast<int>(li);
    const QuantizedLayer& layer = net.layers[li];
    LayerEvents& ev = trace.layers[li];
    const int in_w = layer.in_width;
    const int out_w = layer.out_width;

    // --- Input FIFO: stream the previous representation out of activation
    // memory (or the external input port) at the producer's stored width,
    // converting at the boundary where representations differ. Loads overlap
    // compute; ANN-activation -> count conversions are real multiplies and
    // are booked as cycles below.
    InputFifo fifo(port);
    if (stream.kind == EncodedInput::Kind::Trains) {
      for (int j = 0; j < in_w; ++j)
        for (int t = 0; t < window; ++t) fifo.pop(1, ev.act_reads);
    } else {
      const int in_bits = stream_bits(stream, window);
      for (int j = 0; j < in_w; ++j) fifo.pop(in_bits, ev.act_reads);
    }

    std::vector<SpikeTrain> in_trains;
    std::vector<std::int64_t> in_values;  // counts or activations
    if (layer.kind == LayerKind::If) {
      if (stream.kind == EncodedInput::Kind::Trains) {
        in_trains = stream.trains;
      } else {
        in_trains.reserve(stream.values.size());
        for (std::int64_t v : stream.values) {
          std::int64_t c = v;
          if (stream.kind == EncodedInput::Kind::Activations) {
            c = activation_to_count(v, window, q);
            ev.boundary_muls += 1;
          }
          in_trains.push_back(rate_encode_train(static_cast<int>(c), window));
        }
      }
    } else {
      in_values.reserve(stream.width());
      if (stream.kind == EncodedInput::Kind::Trains) {
        for (const auto& t : stream.trains) in_values.push_back(count_spikes(t));
      } else if (stream.kind == EncodedInput::Kind::Activations &&
                 layer.kind == LayerKind::Ssf) {
        for (std::int64_t v : stream.values) {
          in_values.push_back(activation_to_count(v, window, q));
          ev.boundary_muls += 1;
        }
      } else {
        in_values.assign(stream.values.begin(), stream.values.end());
      }
    }

    const int passes =
        layer.kind == LayerKind::If ? (window + depth - 1) / depth : 1;
    const std::uint64_t weight_bursts =
        bursts(static_cast<std::uint64_t>(in_w) * out_w, port);
    const std::uint64_t bias_bursts = bursts(4ull * out_w, port);

    OutputBuffer out_buf(port);
    const int out_bits = activation_bits(layer.kind, window);

    std::vector<std::int64_t> v_carry(static_cast<std::size_t>(out_w), 0);
    std::vector<std::int64_t> acc(static_cast<std::size_t>(out_w), 0);
    std::vector<std::int64_t> out_values(static_cast<std::size_t>(out_w), 0);
    std::vector<SpikeTrain> out_trains;
    if (layer.kind == LayerKind::If) {
      out_trains.assign(static_cast<std::size_t>(out_w), SpikeTrain::zeros(window));
    }

    for (int pass = 0; pass < passes; ++pass) {
      const int t_begin = pass * depth;
      const int t_end = std::min(window, t_begin + depth);

      enter(Phase::LoadWeights);
      ev.weight_reads += weight_bursts;
      ev.bias_reads += bias_bursts;
      spend(weight_bursts + bias_bursts);

      enter(Phase::Accumulate);
      if (layer.kind == LayerKind::If) {
        // Membrane-potential buffer: V_buf[t] per neuron for this batch of
        // timesteps. One issue cycle per synapse; zero-valued spikes bypass
        // the addition but not the slot.
        std::vector<std::int64_t> v_buf(
            static_cast<std::size_t>(out_w) * (t_end - t_begin), 0);
        for (int i = 0; i < out_w; ++i) {
          state_.n_out = i;
          const auto& w_row = layer.weights[static_cast<std::size_t>(i)];
          for (int j = 0; j < in_w; ++j) {
            state_.n_in = j;
            const std::int8_t w = w_row[static_cast<std::size_t>(j)];
            for (int t = t_begin; t < t_end; ++t) {
              if (in_trains[static_cast<std::size_t>(j)]
                      .bits[static_cast<std::size_t>(t)]) {
                v_buf[static_cast<std::size_t>(i) * (t_end - t_begin) +
                      (t - t_begin)] += w;
                ev.spike_accs += 1;
              }
            }
          }
        }
        spend(static_cast<std::uint64_t>(out_w) * in_w);

        enter(Phase::Bias);  // IF bias is applied per timestep in Activate

        enter(Phase::Activate);
        for (int i = 0; i < out_w; ++i) {
          state_.n_out = i;
          std::int64_t v = v_carry[static_cast<std::size_t>(i)];
          for (int t = t_begin; t < t_end; ++t) {
            state_.t = t;
            v += layer.biases[static_cast<std::size_t>(i)];
            ev.bias_accs += 1;
            v += v_buf[static_cast<std::size_t>(i) * (t_end - t_begin) +
                       (t - t_begin)];
            ev.compares += 1;
            if (v >= layer.quant.theta_q) {
              v -= layer.quant.theta_q;
              out_trains[static_cast<std::size_t>(i)]
                  .bits[static_cast<std::size_t>(t)] = 1;
            }
            out_buf.push(1, ev.act_writes);
          }
          v_carry[static_cast<std::size_t>(i)] = v;
        }
        spend(static_cast<std::uint64_t>(out_w) * (t_end - t_begin));
      } else {
        // SSF and ANN share the MAC datapath: one multiply-accumulate per
        // synapse over counts or activations.
        for (int i = 0; i < out_w; ++i) {
          state_.n_out = i;
          std::int64_t a = 0;
          const auto& w_row = layer.weights[static_cast<std::size_t>(i)];
          for (int j = 0; j < in_w; ++j) {
            state_.n_in = j;
            a += static_cast<std::int64_t>(w_row[static_cast<std::size_t>(j)]) *
                 in_values[static_cast<std::size_t>(j)];
          }
          acc[static_cast<std::size_t>(i)] = a;
        }
        ev.macs += static_cast<std::uint64_t>(out_w) * in_w;
        spend(static_cast<std::uint64_t>(out_w) * in_w);

        enter(Phase::Bias);
        for (int i = 0; i < out_w; ++i) {
          const std::int64_t b = layer.biases[static_cast<std::size_t>(i)];
          if (layer.kind == LayerKind::Ssf) {
            acc[static_cast<std::size_t>(i)] +=
                layer.bias_mode == BiasMode::Scaled ? b * window : b;
          } else {
            // ANN bias joins during requantization; the addition is booked
            // here to keep one cycle per neuron in this phase.
          }
          ev.bias_accs += 1;
        }
        spend(static_cast<std::uint64_t>(out_w));

        enter(Phase::Activate);
        const std::int64_t act_max = (std::int64_t{1} << q) - 1;
        for (int i = 0; i < out_w; ++i) {
          state_.n_out = i;
          if (layer.kind == LayerKind::Ssf) {
            const std::int64_t u = acc[static_cast<std::size_t>(i)];
            std::int64_t c = u > 0 ? u / layer.quant.theta_q : 0;
            out_values[static_cast<std::size_t>(i)] =
                std::min<std::int64_t>(c, window);
            ev.divides += 1;
          } else {
            const std::int64_t scaled =
                (acc[static_cast<std::size_t>(i)] *
                 static_cast<std::int64_t>(layer.quant.m_w)) >>
                layer.quant.n_shift;
            const std::int64_t bias =
                (static_cast<std::int64_t>(layer.biases[static_cast<std::size_t>(i)]) *
                 static_cast<std::int64_t>(layer.quant.m_b)) >>
                layer.quant.m_shift;
            out_values[static_cast<std::size_t>(i)] =
                std::clamp<std::int64_t>(scaled + bias, 0, act_max);
            ev.requants += 1;
          }
          out_buf.push(out_bits, ev.act_writes);
        }
        spend(static_cast<std::uint64_t>(out_w));
      }
    }

    // Boundary conversions were performed while loading the FIFO; each one
    // is a small fixed-point multiply and costs a cycle.
    trace.cycles += ev.boundary_muls;
    trace.phase_cycles[static_cast<int>(Phase::LoadWeights)] += ev.boundary_muls;

    enter(Phase::WriteBack);
    out_buf.layer_end(ev.act_writes);

    if (layer.kind == LayerKind::If) {
      stream.kind = EncodedInput::Kind::Trains;
      stream.trains = std::move(out_trains);
      stream.values.clear();
    } else {
      stream.kind = layer.kind == LayerKind::Ssf ? EncodedInput::Kind::Counts
                                                 : EncodedInput::Kind::Activations;
      stream.values = out_values;
      stream.trains.clear();
    }
  }

  enter(Phase::Classify);
  if (stream.kind == EncodedInput::Kind::Trains) {
    result.scores.clear();
    for (const auto& t : stream.trains) result.scores.push_back(count_spikes(t));
  } else {
    result.scores = stream.values;
  }
  if (!result.scores.empty()) {
    const std::uint64_t classify_cycles = result.scores.size() - 1;
    trace.layers.back().compares += classify_cycles;
    spend(classify_cycles);
  }
  result.predicted_class = argmax_class(result.scores);

  enter(Phase::Done);
  return result;
}

}  // namespace sumspike
