#include "sumspike/quant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sumspike {

namespace {

void check_q(int q) {
  if (q < 1 || q > 16) throw std::invalid_argument("bit-width q must be in [1, 16]");
}

}  // namespace

std::int64_t round_half_away(double x) {
  return static_cast<std::int64_t>(x >= 0.0 ? std::floor(x + 0.5)
                                            : std::ceil(x - 0.5));
}

double compute_weight_scale(const std::vector<double>& weights,
                            const std::vector<double>& biases, int q) {
  check_q(q);
  if (weights.empty() && biases.empty())
    throw std::invalid_argument("compute_weight_scale: empty tensor");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : weights) { lo = std::min(lo, v); hi = std::max(hi, v); }
  for (double v : biases) { lo = std::min(lo, v); hi = std::max(hi, v); }
  const double span = hi - lo;
  if (span <= 0.0) return kEpsilonScale;
  return span / (std::pow(2.0, q) - 1.0);
}

QuantizedTensor quantize_tensor(const std::vector<double>& values, double scale,
                                int q, bool is_signed) {
  check_q(q);
  if (scale <= 0.0) throw std::invalid_argument("quantize_tensor: scale must be > 0");
  const std::int64_t lo = is_signed ? -(std::int64_t{1} << (q - 1)) : 0;
  const std::int64_t hi = is_signed ? (std::int64_t{1} << (q - 1)) - 1
                                    : (std::int64_t{1} << q) - 1;
  QuantizedTensor out;
  out.bit_width = q;
  out.is_signed = is_signed;
  out.values.reserve(values.size());
  for (double v : values) {
    const std::int64_t r = std::clamp(round_half_away(v / scale), lo, hi);
    out.values.push_back(static_cast<std::int32_t>(r));
  }
  return out;
}

std::vector<double> dequantize_tensor(const QuantizedTensor& t, double scale) {
  std::vector<double> out;
  out.reserve(t.values.size());
  for (std::int32_t v : t.values) out.push_back(static_cast<double>(v) * scale);
  return out;
}

double calibrate_activation_scale(const std::vector<double>& observed, int q) {
  check_q(q);
  if (observed.empty())
    throw std::invalid_argument("calibrate_activation_scale: empty calibration set");
  const auto [lo, hi] = std::minmax_element(observed.begin(), observed.end());
  const double span = *hi - *lo;
  if (span <= 0.0) return kEpsilonScale;
  return span / (std::pow(2.0, q) - 1.0);
}

void build_requant(double r_i, double r_w, double r_o, const QuantConfig& cfg,
                   std::uint32_t& m_w, std::uint32_t& m_b) {
  if (r_i <= 0.0 || r_w <= 0.0 || r_o <= 0.0)
    throw std::invalid_argument("build_requant: scales must be > 0");
  if (cfg.n_shift < 0 || cfg.n_shift > 31 || cfg.m_shift < 0 || cfg.m_shift > 31)
    throw std::invalid_argument("build_requant: shifts must be in [0, 31]");
  const std::int64_t w = round_half_away(r_i * r_w / r_o *
                                         std::pow(2.0, cfg.n_shift));
  const std::int64_t b = round_half_away(r_w / r_o * std::pow(2.0, cfg.m_shift));
  if (w < 0 || b < 0 || w > std::numeric_limits<std::uint32_t>::max() ||
      b > std::numeric_limits<std::uint32_t>::max())
    throw std::invalid_argument("build_requant: multiplier out of u32 range");
  m_w = static_cast<std::uint32_t>(w);
  m_b = static_cast<std::uint32_t>(b);
}

std::int32_t quantize_threshold(double threshold, double r_w) {
  if (threshold <= 0.0) throw std::invalid_argument("quantize_threshold: theta must be > 0");
  if (r_w <= 0.0) throw std::invalid_argument("quantize_threshold: scale must be > 0");
  const std::int64_t t = round_half_away(threshold / r_w);
  if (t == 0)
    throw std::invalid_argument(
        "quantize_threshold: threshold rounds to 0 at this scale");
  if (t > std::numeric_limits<std::int32_t>::max())
    throw std::invalid_argument("quantize_threshold: quantized threshold overflows i32");
  return static_cast<std::int32_t>(t);
}

namespace {

void check_layer_shapes(const std::vector<std::int32_t>& x_q,
                        const std::vector<std::vector<std::int32_t>>& w_q,
                        const std::vector<std::int32_t>& b_q) {
  if (w_q.empty()) throw std::invalid_argument("quantized layer: empty weights");
  if (b_q.size() != w_q.size())
    throw std::invalid_argument("quantized layer: one bias per output required");
  for (const auto& row : w_q) {
    if (row.size() != x_q.size())
      throw std::invalid_argument("quantized layer: weight row / input size mismatch");
  }
}

}  // namespace

std::vector<std::int32_t> quantized_ann_layer(
    const std::vector<std::int32_t>& x_q,
    const std::vector<std::vector<std::int32_t>>& w_q,
    const std::vector<std::int32_t>& b_q, const QuantParams& params,
    const QuantConfig& cfg) {
  check_layer_shapes(x_q, w_q, b_q);
  if (!accumulator_fits_32bit(static_cast<int>(x_q.size()), cfg.q))
    throw std::invalid_argument(
        "quantized layer: accumulator width insufficient for this fan-in");
  const std::int64_t act_max = (std::int64_t{1} << cfg.q) - 1;
  std::vector<std::int32_t> out(w_q.size());
  for (std::size_t i = 0; i < w_q.size(); ++i) {
    std::int64_t acc = 0;
    const auto& row = w_q[i];
    for (std::size_t j = 0; j < row.size(); ++j)
      acc += static_cast<std::int64_t>(row[j]) * x_q[j];
    const std::int64_t scaled =
        (acc * static_cast<std::int64_t>(params.m_w)) >> params.n_shift;
    const std::int64_t bias =
        (static_cast<std::int64_t>(b_q[i]) * static_cast<std::int64_t>(params.m_b)) >>
        params.m_shift;
    out[i] = static_cast<std::int32_t>(std::clamp<std::int64_t>(scaled + bias, 0, act_max));
  }
  return out;
}

std::vector<double> quantized_ann_layer_reference(
    const std::vector<std::int32_t>& x_q,
    const std::vector<std::vector<std::int32_t>>& w_q,
    const std::vector<std::int32_t>& b_q, const QuantParams& params,
    const QuantConfig& cfg) {
  check_layer_shapes(x_q, w_q, b_q);
  const double act_max = std::pow(2.0, cfg.q) - 1.0;
  const double s_w = static_cast<double>(params.m_w) / std::pow(2.0, params.n_shift);
  const double s_b = static_cast<double>(params.m_b) / std::pow(2.0, params.m_shift);
  std::vector<double> out(w_q.size());
  for (std::size_t i = 0; i < w_q.size(); ++i) {
    double acc = 0.0;
    const auto& row = w_q[i];
    for (std::size_t j = 0; j < row.size(); ++j)
      acc += static_cast<double>(row[j]) * static_cast<double>(x_q[j]);
    out[i] = std::clamp(acc * s_w + static_cast<double>(b_q[i]) * s_b, 0.0, act_max);
  }
  return out;
}

std::int64_t worst_case_accumulator(int fan_in, int q) {
  const std::int64_t w_max = std::int64_t{1} << (q - 1);       // |-2^(q-1)|
  const std::int64_t x_max = (std::int64_t{1} << q) - 1;
  return static_cast<std::int64_t>(fan_in) * w_max * x_max;
}

bool accumulator_fits_32bit(int fan_in, int q) {
  return worst_case_accumulator(fan_in, q) <=
         std::numeric_limits<std::int32_t>::max();
}

}  // namespace sumspike
