#include "sumspike/energy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sumspike {

double PortWidthCurve::rel_energy_per_bit(int port_bits) const {
  check();
  if (port_bits <= anchors.front().first) return anchors.front().second;
  if (port_bits >= anchors.back().first) return anchors.back().second;
  for (std::size_t i = 1; i < anchors.size(); ++i) {
    if (port_bits <= anchors[i].first) {
      const auto [x0, y0] = anchors[i - 1];
      const auto [x1, y1] = anchors[i];
      const double f = static_cast<double>(port_bits - x0) / (x1 - x0);
      return y0 + f * (y1 - y0);
    }
  }
  return anchors.back().second;
}

void PortWidthCurve::check() const {
  if (anchors.empty())
    throw std::invalid_argument("port-width curve: no anchors");
  for (std::size_t i = 1; i < anchors.size(); ++i) {
    if (anchors[i].first <= anchors[i - 1].first)
      throw std::invalid_argument("port-width curve: widths must increase");
    if (anchors[i].second > anchors[i - 1].second)
      throw std::invalid_argument(
          "port-width curve: energy per bit must be non-increasing in width");
  }
  bool has_128 = false;
  for (const auto& [w, rel] : anchors) {
    if (rel <= 0.0)
      throw std::invalid_argument("port-width curve: values must be > 0");
    if (w == 128 && std::abs(rel - 1.0) < 1e-12) has_128 = true;
  }
  if (!has_128)
    throw std::invalid_argument(
        "port-width curve: must be anchored at (128, 1.0) to match the "
        "per-byte coefficients");
}

double crossover_compute_only(const EnergyCoefficients& c) {
  if (c.e_acc <= 0.0)
    throw std::invalid_argument("crossover: e_acc must be > 0");
  return c.e_mac / c.e_acc;
}

double crossover_total(const EnergyCoefficients& c) {
  const double denom = c.e_acc + c.e_read_w + c.e_read_v + c.e_write_v;
  if (denom <= 0.0)
    throw std::invalid_argument("crossover: zero denominator");
  return (c.e_mac + c.e_read_w + c.e_read_v + c.e_write_v + c.e_read_act +
          c.e_write_act) /
         denom;
}

double if_window_energy(double spikes_per_input, const EnergyCoefficients& c) {
  if (spikes_per_input < 0.0)
    throw std::invalid_argument("if_window_energy: spike count must be >= 0");
  return spikes_per_input * c.e_acc + spikes_per_input * c.e_read_w +
         std::max(spikes_per_input - 1.0, 0.0) * (c.e_read_v + c.e_write_v);
}

double ann_energy(const EnergyCoefficients& c) {
  return c.e_mac + c.e_read_w + c.e_read_act + c.e_write_act;
}

EnergyLedger& EnergyLedger::operator+=(const EnergyLedger& o) {
  weight_mem_pj += o.weight_mem_pj;
  act_mem_pj += o.act_mem_pj;
  mac_pj += o.mac_pj;
  acc_pj += o.acc_pj;
  control_pj += o.control_pj;
  return *this;
}

EnergyLedger operator+(EnergyLedger a, const EnergyLedger& b) { return a += b; }

EnergyLedger ledger_from_counts(const EventCounts& counts,
                                const EnergyCoefficients& c,
                                const PortWidthCurve& curve, double clock_hz) {
  curve.check();
  const double bytes_per_burst = counts.port_bits / 8.0;
  const double port_mult = curve.rel_energy_per_bit(counts.port_bits);

  EnergyLedger ledger;
  ledger.weight_mem_pj =
      static_cast<double>(counts.weight_read_bursts) * bytes_per_burst *
      c.e_read_w * port_mult;
  ledger.act_mem_pj =
      static_cast<double>(counts.act_read_bursts) * bytes_per_burst *
          c.e_read_act * port_mult +
      static_cast<double>(counts.act_write_bursts) * bytes_per_burst *
          c.e_write_act * port_mult;
  ledger.mac_pj = static_cast<double>(counts.macs) * c.e_mac +
                  static_cast<double>(counts.boundary_muls) * c.e_mul +
                  static_cast<double>(counts.requants) * 2.0 * c.e_mul;
  const double divide_steps =
      counts.window > 0 ? static_cast<double>(count_bits(counts.window)) : 0.0;
  ledger.acc_pj = static_cast<double>(counts.accs) * c.e_acc +
                  static_cast<double>(counts.compares) * c.e_acc +
                  static_cast<double>(counts.divides) * divide_steps * c.e_acc;
  ledger.control_pj =
      static_cast<double>(counts.cycles) * c.control_pj_per_cycle;
  if (c.idle_power_uw > 0.0 && clock_hz > 0.0) {
    const double seconds = static_cast<double>(counts.cycles) / clock_hz;
    ledger.control_pj += c.idle_power_uw * seconds * 1e6;  // uW * s -> pJ
  }
  return ledger;
}

EnergyLedger ledger_from_trace(const SimTrace& trace, const EnergyCoefficients& c,
                               const PortWidthCurve& curve, double clock_hz) {
  return ledger_from_counts(trace_event_counts(trace), c, curve, clock_hz);
}

SparseDenseReport sparse_vs_dense_report(const QuantizedNetwork& net,
                                         double sparsity,
                                         const EnergyCoefficients& c,
                                         const PortWidthCurve& curve) {
  if (sparsity < 0.0 || sparsity > 1.0)
    throw std::invalid_argument("sparsity must lie in [0, 1]");
  curve.check();
  const double rel_dense = curve.rel_energy_per_bit(128);
  const double rel_narrow = curve.rel_energy_per_bit(8);

  double synapses = 0.0;
  double inputs = 0.0;
  for (const auto& l : net.layers) {
    synapses += static_cast<double>(l.in_width) * l.out_width;
    inputs += static_cast<double>(l.in_width);
  }

  const double dense_per_synapse = c.e_read_w * rel_dense + c.e_mac;
  const double sparse_per_synapse = c.e_read_w * rel_narrow + c.e_mac;

  SparseDenseReport report;
  report.sparsity = sparsity;
  report.dense_pj = synapses * dense_per_synapse;
  report.sparse_pj = (1.0 - sparsity) * synapses * sparse_per_synapse +
                     inputs * c.e_zero_detect;
  report.threshold_sparsity = std::clamp(
      1.0 - (synapses * dense_per_synapse - inputs * c.e_zero_detect) /
                (synapses * sparse_per_synapse),
      0.0, 1.0);
  report.dense_wins = report.dense_pj <= report.sparse_pj;
  return report;
}

}  // namespace sumspike
