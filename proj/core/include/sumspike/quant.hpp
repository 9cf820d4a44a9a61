#ifndef SUMSPIKE_QUANT_HPP
#define SUMSPIKE_QUANT_HPP

#include <cstdint>
#include <vector>

namespace sumspike {

// Fallback scale when a tensor or calibration range has zero spread.
inline constexpr double kEpsilonScale = 1.0 / 65536.0;  // 2^-16

struct QuantConfig {
  int q = 8;        // bit-width, 1..16
  int n_shift = 16; // weight-multiplier shift bits, 0..31
  int m_shift = 16; // bias-multiplier shift bits, 0..31
};

// Per-layer scales and the fixed-point requantization constants derived from
// them. The real-valued scales are kept for reference math; only the integer
// fields participate in runtime arithmetic.
struct QuantParams {
  double r_w = 1.0;          // weight/bias scale
  double r_i = 1.0;          // input activation scale
  double r_o = 1.0;          // output activation scale
  std::uint32_t m_w = 0;     // round(r_i * r_w / r_o * 2^n_shift)
  std::uint32_t m_b = 0;     // round(r_w / r_o * 2^m_shift)
  int n_shift = 16;
  int m_shift = 16;
  std::int32_t theta_q = 0;  // round(theta / r_w), SNN layers only
};

struct QuantizedTensor {
  std::vector<std::int32_t> values;
  int bit_width = 8;
  bool is_signed = true;
};

// Round-half-away-from-zero, the rounding rule used everywhere in this
// module (pinned by test vectors).
std::int64_t round_half_away(double x);

// r_w = (max - min) / (2^q - 1) over the union of weights and biases.
// A zero spread falls back to kEpsilonScale.
double compute_weight_scale(const std::vector<double>& weights,
                            const std::vector<double>& biases, int q);

// Element-wise round-to-nearest then clamp to the q-bit signed or unsigned
// range.
QuantizedTensor quantize_tensor(const std::vector<double>& values, double scale,
                                int q, bool is_signed);

std::vector<double> dequantize_tensor(const QuantizedTensor& t, double scale);

// Scale for one activation boundary: (max - min) / (2^q - 1) over the
// observed values, with the kEpsilonScale fallback for constant data.
double calibrate_activation_scale(const std::vector<double>& observed, int q);

// Integer requantization multipliers:
//   m_w = round(r_i * r_w / r_o * 2^n_shift), m_b = round(r_w / r_o * 2^m_shift).
void build_requant(double r_i, double r_w, double r_o, const QuantConfig& cfg,
                   std::uint32_t& m_w, std::uint32_t& m_b);

// theta_q = round(theta / r_w). Throws if the result is 0, since a quantized
// threshold must stay positive.
std::int32_t quantize_threshold(double threshold, double r_w);

// One quantized fully-connected layer with fixed-point requantization:
//   acc_i = sum_j w_q[i][j] * x_q[j]
//   out_i = clamp(((acc_i * m_w) >> n_shift) + ((b_q[i] * m_b) >> m_shift),
//                 0, 2^q - 1)
// The clamp realizes both the ReLU and the saturation to the activation
// range. Shifts are arithmetic on signed 64-bit intermediates.
std::vector<std::int32_t> quantized_ann_layer(
    const std::vector<std::int32_t>& x_q,
    const std::vector<std::vector<std::int32_t>>& w_q,
    const std::vector<std::int32_t>& b_q, const QuantParams& params,
    const QuantConfig& cfg);

// Reference for the layer above computed in doubles with the same realized
// multipliers, isolating the shift/floor arithmetic as the only difference.
std::vector<double> quantized_ann_layer_reference(
    const std::vector<std::int32_t>& x_q,
    const std::vector<std::vector<std::int32_t>>& w_q,
    const std::vector<std::int32_t>& b_q, const QuantParams& params,
    const QuantConfig& cfg);

// Worst-case |accumulator| for a layer of the given fan-in at bit-width q.
// Models with a worst case beyond 32-bit range must be rejected at load
// time rather than silently wrapped.
std::int64_t worst_case_accumulator(int fan_in, int q);
bool accumulator_fits_32bit(int fan_in, int q);

}  // namespace sumspike

#endif  // SUMSPIKE_QUANT_HPP
