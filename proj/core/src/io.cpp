#include "sumspike/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sumspike/errors.hpp"

namespace sumspike {

namespace {

using nlohmann::json;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write file: " + path);
  out << text;
}

double parse_double(const std::string& token, int line_no) {
  double value = 0.0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end)
    throw FormatError("line " + std::to_string(line_no) +
                      ": not a number: '" + token + "'");
  return value;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string token;
  std::istringstream ss(line);
  while (std::getline(ss, token, sep)) {
    // trim spaces
    std::size_t a = token.find_first_not_of(" \t\r");
    std::size_t b = token.find_last_not_of(" \t\r");
    out.push_back(a == std::string::npos ? "" : token.substr(a, b - a + 1));
  }
  return out;
}

}  // namespace

std::vector<std::vector<double>> load_values_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    std::vector<double> row;
    for (const auto& token : split(line, ','))
      row.push_back(parse_double(token, line_no));
    if (width == 0) width = row.size();
    if (row.size() != width)
      throw FormatError("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(width) + " columns, got " +
                        std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty())
    throw FormatError(path + ": line 1: no data rows");
  return rows;
}

Dataset load_labeled_csv(const std::string& path) {
  const auto rows = load_values_csv(path);
  if (rows.front().size() < 2)
    throw FormatError(path + ": labeled rows need at least one feature column");
  Dataset data;
  data.feature_dim = static_cast<int>(rows.front().size()) - 1;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double raw = rows[i].back();
    const int label = static_cast<int>(std::llround(raw));
    if (std::abs(raw - label) > 1e-9 || label < 0)
      throw FormatError("line " + std::to_string(i + 1) +
                        ": final column must be a nonnegative integer label");
    data.features.emplace_back(rows[i].begin(), rows[i].end() - 1);
    data.labels.push_back(label);
  }
  return data;
}

// ---------------------------------------------------------------------------

namespace {

const char* target_name(EncodedInput::Kind kind) {
  switch (kind) {
    case EncodedInput::Kind::Counts: return "count";
    case EncodedInput::Kind::Trains: return "train";
    case EncodedInput::Kind::Activations: return "ann";
  }
  return "?";
}

EncodedInput::Kind target_from_name(const std::string& name) {
  if (name == "count") return EncodedInput::Kind::Counts;
  if (name == "train") return EncodedInput::Kind::Trains;
  if (name == "ann") return EncodedInput::Kind::Activations;
  throw FormatError("unknown encoding target: " + name);
}

}  // namespace

std::string encoded_file_to_text(const EncodedFile& file) {
  std::ostringstream out;
  out << "sumspike-encoded v1\n";
  out << "target " << target_name(file.kind) << "\n";
  out << "T " << file.window << "\n";
  out << "width " << file.width << "\n";
  out << "q " << file.q << "\n";
  out << "samples " << file.samples.size() << "\n";
  for (const auto& sample : file.samples) {
    bool first = true;
    if (file.kind == EncodedInput::Kind::Trains) {
      for (const auto& train : sample.trains) {
        if (!first) out << ' ';
        first = false;
        for (std::uint8_t b : train.bits) out << (b ? '1' : '0');
      }
    } else {
      for (std::int32_t v : sample.values) {
        if (!first) out << ' ';
        first = false;
        out << v;
      }
    }
    out << "\n";
  }
  return out.str();
}

void write_encoded_file(const std::string& path, const EncodedFile& file) {
  write_text_file(path, encoded_file_to_text(file));
}

EncodedFile read_encoded_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open file: " + path);
  std::string line;
  auto next_line = [&](int line_no) {
    if (!std::getline(in, line))
      throw FormatError("line " + std::to_string(line_no) + ": unexpected end of file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };

  if (next_line(1) != "sumspike-encoded v1")
    throw FormatError("line 1: not an encoded-input file");
  EncodedFile file;
  int samples = 0;
  for (int i = 2; i <= 6; ++i) {
    const auto fields = split(next_line(i), ' ');
    if (fields.size() != 2)
      throw FormatError("line " + std::to_string(i) + ": bad header field");
    if (fields[0] == "target") file.kind = target_from_name(fields[1]);
    else if (fields[0] == "T") file.window = static_cast<int>(parse_double(fields[1], i));
    else if (fields[0] == "width") file.width = static_cast<int>(parse_double(fields[1], i));
    else if (fields[0] == "q") file.q = static_cast<int>(parse_double(fields[1], i));
    else if (fields[0] == "samples") samples = static_cast<int>(parse_double(fields[1], i));
    else throw FormatError("line " + std::to_string(i) + ": unknown header field");
  }
  if (file.window < 1 || file.width < 1)
    throw FormatError("encoded file: window and width must be >= 1");

  for (int s = 0; s < samples; ++s) {
    const int line_no = 7 + s;
    const auto tokens = split(next_line(line_no), ' ');
    if (static_cast<int>(tokens.size()) != file.width)
      throw FormatError("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(file.width) + " values");
    EncodedInput sample;
    sample.kind = file.kind;
    if (file.kind == EncodedInput::Kind::Trains) {
      for (const auto& token : tokens) {
        if (static_cast<int>(token.size()) != file.window)
          throw FormatError("line " + std::to_string(line_no) +
                            ": train length != T");
        SpikeTrain train = SpikeTrain::zeros(file.window);
        for (int t = 0; t < file.window; ++t) {
          if (token[static_cast<std::size_t>(t)] == '1')
            train.bits[static_cast<std::size_t>(t)] = 1;
          else if (token[static_cast<std::size_t>(t)] != '0')
            throw FormatError("line " + std::to_string(line_no) +
                              ": train must be 0/1");
        }
        sample.trains.push_back(std::move(train));
      }
    } else {
      for (const auto& token : tokens)
        sample.values.push_back(
            static_cast<std::int32_t>(parse_double(token, line_no)));
    }
    file.samples.push_back(std::move(sample));
  }
  return file;
}

// ---------------------------------------------------------------------------

EnergyConfig load_energy_config(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
  EnergyConfig cfg;
  auto& c = cfg.coefficients;
  auto get = [&](const char* key, double& field) {
    if (j.contains(key)) field = j.at(key).get<double>();
  };
  get("e_acc", c.e_acc);
  get("e_mul", c.e_mul);
  get("e_mac", c.e_mac);
  get("e_read_w", c.e_read_w);
  get("e_write_w", c.e_write_w);
  get("e_read_v", c.e_read_v);
  get("e_write_v", c.e_write_v);
  get("e_read_act", c.e_read_act);
  get("e_write_act", c.e_write_act);
  get("e_zero_detect", c.e_zero_detect);
  get("control_pj_per_cycle", c.control_pj_per_cycle);
  get("idle_power_uw", c.idle_power_uw);
  if (j.contains("port_width_curve")) {
    cfg.curve.anchors.clear();
    for (const auto& pair : j.at("port_width_curve"))
      cfg.curve.anchors.emplace_back(pair.at(0).get<int>(),
                                     pair.at(1).get<double>());
  }
  try {
    cfg.curve.check();
  } catch (const std::invalid_argument& e) {
    throw ValidationError(path + ": " + e.what());
  }
  return cfg;
}

std::string energy_config_to_json(const EnergyConfig& cfg) {
  json j;
  const auto& c = cfg.coefficients;
  j["e_acc"] = c.e_acc;
  j["e_mul"] = c.e_mul;
  j["e_mac"] = c.e_mac;
  j["e_read_w"] = c.e_read_w;
  j["e_write_w"] = c.e_write_w;
  j["e_read_v"] = c.e_read_v;
  j["e_write_v"] = c.e_write_v;
  j["e_read_act"] = c.e_read_act;
  j["e_write_act"] = c.e_write_act;
  j["e_zero_detect"] = c.e_zero_detect;
  j["control_pj_per_cycle"] = c.control_pj_per_cycle;
  j["idle_power_uw"] = c.idle_power_uw;
  json curve = json::array();
  for (const auto& [bits, rel] : cfg.curve.anchors)
    curve.push_back({bits, rel});
  j["port_width_curve"] = curve;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

namespace {

LayerKind kind_from_name(const std::string& name) {
  if (name == "ANN") return LayerKind::Ann;
  if (name == "IF") return LayerKind::If;
  if (name == "SSF") return LayerKind::Ssf;
  throw FormatError("unknown layer kind: " + name);
}

BiasMode bias_mode_from_name(const std::string& name) {
  if (name == "scaled") return BiasMode::Scaled;
  if (name == "once") return BiasMode::Once;
  throw FormatError("unknown bias mode: " + name);
}

}  // namespace

FloatNetwork load_float_network_json(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
  try {
    FloatNetwork net;
    net.window = j.at("window").get<int>();
    net.input_width = j.at("input_width").get<int>();
    int in = net.input_width;
    for (const auto& jl : j.at("layers")) {
      FloatLayer l;
      l.kind = kind_from_name(jl.at("kind").get<std::string>());
      l.in_width = in;
      l.out_width = jl.at("out_width").get<int>();
      if (jl.contains("threshold")) l.threshold = jl.at("threshold").get<double>();
      if (jl.contains("bias_mode"))
        l.bias_mode = bias_mode_from_name(jl.at("bias_mode").get<std::string>());
      l.weights = jl.at("weights").get<std::vector<std::vector<double>>>();
      l.biases = jl.at("biases").get<std::vector<double>>();
      in = l.out_width;
      net.layers.push_back(std::move(l));
    }
    return net;
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void save_float_network_json(const std::string& path, const FloatNetwork& net) {
  json j;
  j["window"] = net.window;
  j["input_width"] = net.input_width;
  json layers = json::array();
  for (const auto& l : net.layers) {
    json jl;
    jl["kind"] = to_string(l.kind);
    jl["out_width"] = l.out_width;
    jl["threshold"] = l.threshold;
    jl["bias_mode"] = to_string(l.bias_mode);
    jl["weights"] = l.weights;
    jl["biases"] = l.biases;
    layers.push_back(std::move(jl));
  }
  j["layers"] = std::move(layers);
  write_text_file(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------

NasFileConfig load_nas_config(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
  NasFileConfig out;
  auto& c = out.config;
  auto get_int = [&](const char* key, int& field) {
    if (j.contains(key)) field = j.at(key).get<int>();
  };
  get_int("n_init", c.n_init);
  get_int("rounds", c.rounds);
  get_int("k_best", c.k_best);
  get_int("offspring", c.offspring);
  get_int("proxy_epochs", c.proxy_epochs);
  get_int("k_folds", c.k_folds);
  get_int("window", c.window);
  get_int("input_width", c.input_width);
  get_int("threads", c.threads);
  if (j.contains("mutation_prob")) c.mutation_prob = j.at("mutation_prob").get<double>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("min_accuracy")) c.min_accuracy = j.at("min_accuracy").get<double>();
  if (j.contains("max_params")) c.max_params = j.at("max_params").get<std::int64_t>();
  if (j.contains("energy_weight")) c.energy_weight = j.at("energy_weight").get<double>();
  if (j.contains("depths")) out.space.depths = j.at("depths").get<std::vector<int>>();
  if (j.contains("widths")) out.space.widths = j.at("widths").get<std::vector<int>>();
  return out;
}

std::string arch_to_string(const Architecture& arch) {
  std::string out;
  for (std::size_t i = 0; i < arch.size(); ++i) {
    if (i) out += 'x';
    out += std::to_string(arch[i]);
  }
  return out;
}

Architecture arch_from_string(const std::string& text) {
  Architecture arch;
  std::string token;
  std::istringstream ss(text);
  while (std::getline(ss, token, 'x')) {
    if (token.empty()) throw FormatError("bad architecture string: " + text);
    arch.push_back(static_cast<int>(parse_double(token, 1)));
  }
  if (arch.empty()) throw FormatError("bad architecture string: " + text);
  return arch;
}

std::string history_lines(const std::vector<Candidate>& history) {
  std::ostringstream out;
  for (const auto& c : history) {
    out << "id=" << c.id << " round=" << c.round << " parent=" << c.parent_id
        << " arch=" << arch_to_string(c.arch)
        << " acc=" << format_fixed(c.accuracy, 6)
        << " energy_pj=" << format_fixed(c.energy_pj, 3)
        << " score=" << format_fixed(c.score, 6)
        << " feasible=" << (c.feasible ? 1 : 0) << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------

std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return buf;
}

std::string render_ledger(const EnergyLedger& ledger) {
  std::ostringstream out;
  out << "energy_total_nJ " << format_fixed(ledger.total_nj(), 6) << "\n";
  out << "  weight_mem_pJ " << format_fixed(ledger.weight_mem_pj, 3) << "\n";
  out << "  act_mem_pJ    " << format_fixed(ledger.act_mem_pj, 3) << "\n";
  out << "  mac_pJ        " << format_fixed(ledger.mac_pj, 3) << "\n";
  out << "  acc_pJ        " << format_fixed(ledger.acc_pj, 3) << "\n";
  out << "  control_pJ    " << format_fixed(ledger.control_pj, 3) << "\n";
  return out.str();
}

std::string run_report_json(int predicted_class, const SimTrace& trace,
                            const EnergyLedger& ledger, double clock_hz) {
  const EventCounts counts = trace_event_counts(trace);
  json j;
  j["class"] = predicted_class;
  j["cycles"] = trace.cycles;
  j["latency_s"] = trace_latency(trace, clock_hz);
  j["energy_pj"] = {{"weight_mem", ledger.weight_mem_pj},
                    {"act_mem", ledger.act_mem_pj},
                    {"mac", ledger.mac_pj},
                    {"acc", ledger.acc_pj},
                    {"control", ledger.control_pj},
                    {"total", ledger.total_pj()}};
  j["events"] = {{"weight_read_bursts", counts.weight_read_bursts},
                 {"act_read_bursts", counts.act_read_bursts},
                 {"act_write_bursts", counts.act_write_bursts},
                 {"macs", counts.macs},
                 {"accs", counts.accs},
                 {"compares", counts.compares},
                 {"divides", counts.divides},
                 {"requants", counts.requants},
                 {"boundary_muls", counts.boundary_muls}};
  j["window"] = trace.window;
  j["port_bits"] = trace.port_bits;
  return j.dump(2) + "\n";
}

std::string render_run_report(int predicted_class, const SimTrace& trace,
                              const EnergyLedger& ledger, double clock_hz) {
  const EventCounts counts = trace_event_counts(trace);
  std::ostringstream out;
  out << "class " << predicted_class << "\n";
  out << "cycles " << trace.cycles << "\n";
  out << "latency_ms " << format_fixed(trace_latency(trace, clock_hz) * 1e3, 6)
      << "\n";
  out << render_ledger(ledger);
  out << "trace weight_reads=" << counts.weight_read_bursts
      << " act_reads=" << counts.act_read_bursts
      << " act_writes=" << counts.act_write_bursts << " macs=" << counts.macs
      << " accs=" << counts.accs << " compares=" << counts.compares
      << " divides=" << counts.divides << " requants=" << counts.requants
      << " boundary_muls=" << counts.boundary_muls << "\n";
  std::ostringstream phases;
  for (int p = 0; p < kPhaseCount; ++p) {
    if (trace.phase_cycles[static_cast<std::size_t>(p)] == 0) continue;
    phases << ' ' << to_string(static_cast<Phase>(p)) << '='
           << trace.phase_cycles[static_cast<std::size_t>(p)];
  }
  out << "phase_cycles" << phases.str() << "\n";
  return out.str();
}

}  // namespace sumspike
