#ifndef SUMSPIKE_NETWORK_HPP
#define SUMSPIKE_NETWORK_HPP

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "sumspike/neuron.hpp"
#include "sumspike/quant.hpp"

namespace sumspike {

enum class LayerKind : std::uint8_t { Ann = 0, If = 1, Ssf = 2 };
enum class BiasMode : std::uint8_t { Scaled = 0, Once = 1 };

const char* to_string(LayerKind k);
const char* to_string(BiasMode m);

// Reconfigurable-core limits the model description is validated against.
struct HardwareLimits {
  int max_layers = 6;
  int max_width = 128;
  std::uint32_t weight_mem_bytes = 65536;  // int8 weights + i32 biases
  std::uint32_t act_mem_bytes = 4096;
};

// ---------------------------------------------------------------------------
// Float model description (pre-quantization).

struct FloatLayer {
  LayerKind kind = LayerKind::Ssf;
  int in_width = 0;
  int out_width = 0;
  double threshold = 1.0;                // SNN layers
  BiasMode bias_mode = BiasMode::Scaled;
  std::vector<std::vector<double>> weights;  // [out][in]
  std::vector<double> biases;                // [out]
};

struct FloatNetwork {
  int window = 4;  // T
  int input_width = 0;
  std::vector<FloatLayer> layers;
};

// ---------------------------------------------------------------------------
// Quantized runtime model. This is what the binary blob carries and what both
// the functional forward pass and the core simulator execute.

struct QuantizedLayer {
  LayerKind kind = LayerKind::Ssf;
  int in_width = 0;
  int out_width = 0;
  BiasMode bias_mode = BiasMode::Scaled;
  QuantParams quant;                           // theta_q for SNN, m_w/m_b for ANN
  std::vector<std::vector<std::int8_t>> weights;  // [out][in]
  std::vector<std::int32_t> biases;               // [out], values within int8 range
};

struct QuantizedNetwork {
  int window = 4;
  int input_width = 0;
  QuantConfig config;  // q = 8 for blob-packable models
  std::vector<QuantizedLayer> layers;
};

// Weight-memory footprint in bytes: 1 byte per weight, 4 per bias.
std::uint32_t weight_mem_footprint(const QuantizedNetwork& net);

// Parameter count: sum over layers of in*out weights plus out biases.
std::int64_t param_count(const QuantizedNetwork& net);
std::int64_t param_count(const FloatNetwork& net);

// Checks every hardware limit; returns an empty list when the model is
// deployable. Violations name the layer and the limit.
std::vector<std::string> validate(const QuantizedNetwork& net,
                                  const HardwareLimits& limits = {});
std::vector<std::string> validate(const FloatNetwork& net,
                                  const HardwareLimits& limits = {});

// ---------------------------------------------------------------------------
// Input encoding (rate code).

// Number of spikes representing value v in [0, 1] over a T-step window.
int rate_encode_count(double value, int window);

// Deterministic even placement of `count` spikes across the window: a spike
// lands at step t exactly where floor(t * count / T) increments, so 1/2 over
// T=4 becomes [0,1,0,1].
SpikeTrain rate_encode_train(int count, int window);

// Activation-domain encoding for a quantized ANN first layer: round(v * (2^q - 1)).
std::int32_t rate_encode_activation(double value, int q);

// Boundary conversion when a quantized ANN activation feeds an SNN layer:
// count = round(a / (2^q - 1) * T), clamped to [0, T].
std::int32_t activation_to_count(std::int64_t activation, int window, int q);

// One encoded sample: spike trains (IF), spike counts (SSF), or q-bit
// activations (ANN).
struct EncodedInput {
  enum class Kind { Trains, Counts, Activations };
  Kind kind = Kind::Counts;
  std::vector<SpikeTrain> trains;
  std::vector<std::int32_t> values;  // counts or activations

  std::size_t width() const {
    return kind == Kind::Trains ? trains.size() : values.size();
  }
};

EncodedInput encode_sample(const std::vector<double>& values, int window,
                           EncodedInput::Kind target, int q = 8);

// ---------------------------------------------------------------------------
// Functional forward pass (integer semantics, no cycle accounting).

struct ForwardResult {
  std::vector<std::int64_t> scores;  // final-layer counts or activations
  int predicted_class = 0;           // argmax, ties broken by lowest index
};

// Executes the layers in order with representation adapters at the
// boundaries: quantized ANN activations a convert to counts
// round(a / (2^q - 1) * T) when feeding an SNN layer, counts pass through as
// integer activations when feeding an ANN layer, and counts expand to evenly
// placed trains when feeding an IF layer.
ForwardResult forward(const QuantizedNetwork& net, const EncodedInput& input);

// argmax with lowest-index tie-break.
int argmax_class(const std::vector<std::int64_t>& scores);

// ---------------------------------------------------------------------------
// Post-training quantization of a float model (scale calibration, weight /
// bias / threshold quantization, requantization constants).

// Propagates the calibration set through the float model layer by layer,
// calibrating each ANN boundary from the observed values. The first ANN
// layer's input scale is pinned to 1/(2^q - 1) to match the encoder's [0, 1]
// domain, and an ANN layer fed by an SNN layer uses input scale 1 because
// spike counts pass through as their own quantized representation.
QuantizedNetwork quantize_network(const FloatNetwork& net,
                                  const std::vector<std::vector<double>>& calibration,
                                  const QuantConfig& cfg = {});

// Bits needed for a [0, T] spike count: ceil(log2(T + 1)).
int count_bits(int window);

// Smallest supported activation FIFO read width ({1,2,4,8,16} bits) holding
// a [0, T] spike count, and the stored bits per value for each layer kind.
int count_fifo_width(int window);
int activation_bits(LayerKind kind, int window);

}  // namespace sumspike

#endif  // SUMSPIKE_NETWORK_HPP
