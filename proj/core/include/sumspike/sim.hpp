#ifndef SUMSPIKE_SIM_HPP
#define SUMSPIKE_SIM_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sumspike/network.hpp"

namespace sumspike {

// Core configuration. Port width applies to both SRAMs; the membrane buffer
// holds up to `membrane_buffer_depth` timesteps of IF state per pass, so an
// IF layer re-reads its weights ceil(T / depth) times per inference.
struct CoreConfig {
  double clock_hz = 1e8;
  std::uint32_t weight_mem_bytes = 65536;
  std::uint32_t act_mem_bytes = 4096;
  int port_bits = 128;  // one of 8, 16, 32, 64, 128
  int membrane_buffer_depth = 16;
  int max_layers = 6;
  int max_width = 128;

  HardwareLimits limits() const {
    return {max_layers, max_width, weight_mem_bytes, act_mem_bytes};
  }
};

enum class Phase : std::uint8_t {
  Idle = 0,
  LoadWeights,
  Accumulate,
  Bias,
  Activate,
  WriteBack,
  Classify,
  Done,
};
inline constexpr int kPhaseCount = 8;
const char* to_string(Phase p);

// Controller state: current phase plus the loop indices of the Listing-style
// walk (layer, output neuron, input neuron, timestep).
struct FsmState {
  Phase phase = Phase::Idle;
  int layer = 0;
  int n_out = 0;
  int n_in = 0;
  int t = 0;
};

// Per-layer event counters. "Bursts" are full SRAM port transfers.
struct LayerEvents {
  std::uint64_t weight_reads = 0;  // weight-matrix bursts from weight memory
  std::uint64_t bias_reads = 0;    // bias-region bursts from weight memory
  std::uint64_t act_reads = 0;     // activation-memory bursts (input FIFO loads)
  std::uint64_t act_writes = 0;    // activation-memory bursts (output flushes)
  std::uint64_t macs = 0;          // weight * value multiply-accumulates
  std::uint64_t spike_accs = 0;    // IF conditional additions (zero spikes skipped)
  std::uint64_t bias_accs = 0;     // bias additions
  std::uint64_t compares = 0;      // compare-and-spike evaluations
  std::uint64_t divides = 0;       // SSF count extractions (one per neuron)
  std::uint64_t requants = 0;      // ANN requantization steps (one per neuron)
  std::uint64_t boundary_muls = 0; // ANN-activation -> spike-count conversions

  LayerEvents& operator+=(const LayerEvents& o);
};
LayerEvents operator+(LayerEvents a, const LayerEvents& b);

struct SimTrace {
  std::uint64_t cycles = 0;
  int window = 0;
  int port_bits = 128;
  std::vector<LayerEvents> layers;
  std::array<std::uint64_t, kPhaseCount> phase_cycles{};

  LayerEvents totals() const;
};

// Stable schema handed to the energy model.
struct EventCounts {
  std::uint64_t weight_read_bursts = 0;  // weight + bias traffic
  std::uint64_t act_read_bursts = 0;
  std::uint64_t act_write_bursts = 0;
  std::uint64_t macs = 0;
  std::uint64_t accs = 0;  // spike accumulations + bias additions
  std::uint64_t compares = 0;
  std::uint64_t divides = 0;
  std::uint64_t requants = 0;
  std::uint64_t boundary_muls = 0;
  std::uint64_t cycles = 0;
  int window = 0;
  int port_bits = 128;

  EventCounts& operator+=(const EventCounts& o);
};

EventCounts trace_event_counts(const SimTrace& trace);

double trace_latency(const SimTrace& trace, double clock_hz);

struct SimResult {
  int predicted_class = 0;
  std::vector<std::int64_t> scores;
  SimTrace trace;
};

// Cycle-level model of the reconfigurable core: FSM-sequenced layer walk over
// weight/activation SRAMs with 128-bit ports, input/output spike buffers, a
// membrane-potential buffer for IF batching, and the compare-and-spike /
// divide / requantize activation units.
//
// Cycle accounting: one cycle per weight-memory burst, per synapse issue
// (MAC or conditional accumulate slot), per bias addition, per
// compare-and-spike, per divide or requantize step, and per boundary
// conversion. Activation-memory bursts are prefetched or drained by the
// spike buffers concurrently with compute and cost no cycles; they are still
// counted as events and carry full energy.
class Core {
public:
  explicit Core(CoreConfig cfg = {}) : cfg_(cfg) {}

  // Populates configuration registers and weight memory. Throws
  // ValidationError when the model violates the configured limits.
  void load_model(const QuantizedNetwork& net);
  // Same from the binary format (FormatError on malformed bytes).
  void load_blob(const std::vector<std::uint8_t>& blob);

  bool loaded() const { return model_.has_value(); }
  const QuantizedNetwork& model() const;
  const CoreConfig& config() const { return cfg_; }
  Phase phase() const { return state_.phase; }

  // Runs one inference. Optionally appends a line per FSM phase change to
  // `event_log` for debugging.
  SimResult run_inference(const EncodedInput& input,
                          std::vector<std::string>* event_log = nullptr);

private:
  CoreConfig cfg_;
  std::optional<QuantizedNetwork> model_;
  FsmState state_;
};

}  // namespace sumspike

#endif  // SUMSPIKE_SIM_HPP
