#ifndef SUMSPIKE_ENERGY_HPP
#define SUMSPIKE_ENERGY_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "sumspike/network.hpp"
#include "sumspike/sim.hpp"

namespace sumspike {

// Per-operation event energies in pJ. The defaults are synthesis figures for
// a 22 nm node at 0.85 V: 8b->16b integer accumulate 0.05 pJ, 8b multiply
// 0.1 pJ, MAC 0.13 pJ, 64 KB SRAM 0.25/0.5 pJ per byte read/write through a
// 128-bit port, 4 KB SRAM 0.18/0.31 pJ per byte.
struct EnergyCoefficients {
  double e_acc = 0.05;
  double e_mul = 0.1;
  double e_mac = 0.13;
  double e_read_w = 0.25;   // large SRAM (weights), per byte
  double e_write_w = 0.5;
  double e_read_v = 0.18;   // small SRAM (membrane state), per byte
  double e_write_v = 0.31;
  double e_read_act = 0.18; // small SRAM (activations), per byte
  double e_write_act = 0.31;

  double e_zero_detect = 0.01;      // sparse-variant comparator, per element
  double control_pj_per_cycle = 0.0;
  double idle_power_uw = 0.0;       // optional static term, off by default
};

// Normalized energy-per-bit versus SRAM port width. Wider ports amortize the
// fixed array-access cost. Anchored so that a 128-bit port reproduces the
// per-byte coefficients exactly; the narrow-width points are synthesized to
// be monotone non-increasing per bit. Linear interpolation between anchors,
// clamped outside them.
struct PortWidthCurve {
  std::vector<std::pair<int, double>> anchors = {
      {8, 4.0}, {16, 2.5}, {32, 1.8}, {64, 1.3}, {128, 1.0}};

  double rel_energy_per_bit(int port_bits) const;
  // Throws std::invalid_argument when anchors are empty, not sorted, not
  // non-increasing per bit, or the 128-bit anchor is not 1.
  void check() const;
};

// Average spikes per input per window below which an IF update chain beats a
// MAC, compute energies only: s* = e_mac / e_acc (2.6 with defaults).
double crossover_compute_only(const EnergyCoefficients& c);

// Crossover including per-spike weight and membrane traffic
// (~1.722 with defaults):
//   s* = (e_mac + e_read_w + e_read_v + e_write_v + e_read_act + e_write_act)
//        / (e_acc + e_read_w + e_read_v + e_write_v)
double crossover_total(const EnergyCoefficients& c);

// Per-synapse per-window event energies behind the crossover:
//   IF:  s*e_acc + s*e_read_w + max(s-1, 0)*(e_read_v + e_write_v)
//   ANN: e_mac + e_read_w + e_read_act + e_write_act
double if_window_energy(double spikes_per_input, const EnergyCoefficients& c);
double ann_energy(const EnergyCoefficients& c);

struct EnergyLedger {
  double weight_mem_pj = 0.0;
  double act_mem_pj = 0.0;
  double mac_pj = 0.0;   // MACs, requant and boundary multiplies
  double acc_pj = 0.0;   // accumulates, compares, divide subtract-steps
  double control_pj = 0.0;

  double total_pj() const {
    return weight_mem_pj + act_mem_pj + mac_pj + acc_pj + control_pj;
  }
  double total_nj() const { return total_pj() / 1000.0; }

  EnergyLedger& operator+=(const EnergyLedger& o);
};
EnergyLedger operator+(EnergyLedger a, const EnergyLedger& b);

// Prices the counted events. SRAM bursts cost bytes-per-burst times the
// per-byte coefficient times the port-width multiplier; an SSF divide costs
// one subtract-step per count bit (a shift-subtract divider, at most T
// accumulate-equivalents); an ANN requantization costs two multiplies.
EnergyLedger ledger_from_counts(const EventCounts& counts,
                                const EnergyCoefficients& c,
                                const PortWidthCurve& curve,
                                double clock_hz = 1e8);
EnergyLedger ledger_from_trace(const SimTrace& trace, const EnergyCoefficients& c,
                               const PortWidthCurve& curve,
                               double clock_hz = 1e8);

// Dense 128-bit weight bursts with no skipping, versus a sparse variant that
// narrows the weight bus to 8 bits to read only the weights of non-zero
// activations, paying a zero-detect check per element. The break-even
// sparsity is an output of the two models, not an assumption.
struct SparseDenseReport {
  double sparsity = 0.0;
  double dense_pj = 0.0;
  double sparse_pj = 0.0;
  double threshold_sparsity = 0.0;  // sparse wins above this fraction
  bool dense_wins = false;
};

SparseDenseReport sparse_vs_dense_report(const QuantizedNetwork& net,
                                         double sparsity,
                                         const EnergyCoefficients& c,
                                         const PortWidthCurve& curve);

}  // namespace sumspike

#endif  // SUMSPIKE_ENERGY_HPP
