#ifndef SUMSPIKE_IO_HPP
#define SUMSPIKE_IO_HPP

#include <string>
#include <vector>

#include "sumspike/energy.hpp"
#include "sumspike/nas.hpp"
#include "sumspike/network.hpp"
#include "sumspike/sim.hpp"

namespace sumspike {

// --- CSV ------------------------------------------------------------------
// Plain comma-separated numeric rows. Parse errors carry 1-based line
// numbers. A labeled CSV ends each row with an integer class label.

std::vector<std::vector<double>> load_values_csv(const std::string& path);
Dataset load_labeled_csv(const std::string& path);

// --- Encoded input files ----------------------------------------------------
// Deterministic text format:
//   sumspike-encoded v1
//   target count|train|ann
//   T <window>
//   width <neurons>
//   q <bits>
//   samples <n>
// followed by one line per sample: space-separated integers for count/ann
// targets, or one T-character bitstring per neuron for the train target.

struct EncodedFile {
  EncodedInput::Kind kind = EncodedInput::Kind::Counts;
  int window = 0;
  int width = 0;
  int q = 8;
  std::vector<EncodedInput> samples;
};

std::string encoded_file_to_text(const EncodedFile& file);
void write_encoded_file(const std::string& path, const EncodedFile& file);
EncodedFile read_encoded_file(const std::string& path);

// --- Energy configuration ---------------------------------------------------
// JSON object with the coefficient names as keys plus an optional
// "port_width_curve" array of [bits, relative energy per bit] anchor pairs.
// Missing keys keep their defaults.

struct EnergyConfig {
  EnergyCoefficients coefficients;
  PortWidthCurve curve;
};

EnergyConfig load_energy_config(const std::string& path);
std::string energy_config_to_json(const EnergyConfig& cfg);

// --- Float model description -------------------------------------------------
// JSON: {"window": T, "input_width": n, "layers": [{"kind": "ANN|IF|SSF",
// "out_width": n, "threshold": x, "bias_mode": "scaled|once",
// "weights": [[...]], "biases": [...]}]}. Input widths chain automatically.

FloatNetwork load_float_network_json(const std::string& path);
void save_float_network_json(const std::string& path, const FloatNetwork& net);

// --- Search configuration and history ---------------------------------------

struct NasFileConfig {
  NasConfig config;
  SearchSpace space;
};

NasFileConfig load_nas_config(const std::string& path);

std::string arch_to_string(const Architecture& arch);   // e.g. 32x64x16
Architecture arch_from_string(const std::string& text);

// One candidate per line, key=value fields, fixed decimal formatting.
std::string history_lines(const std::vector<Candidate>& history);

// --- Report rendering --------------------------------------------------------

std::string format_fixed(double value, int decimals);

std::string render_ledger(const EnergyLedger& ledger);
std::string render_run_report(int predicted_class, const SimTrace& trace,
                              const EnergyLedger& ledger, double clock_hz);

// Machine-readable run report: class, cycles, latency, ledger components and
// the event-count record as one JSON object.
std::string run_report_json(int predicted_class, const SimTrace& trace,
                            const EnergyLedger& ledger, double clock_hz);

}  // namespace sumspike

#endif  // SUMSPIKE_IO_HPP
