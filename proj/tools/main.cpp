// Command-line pipeline: encode -> quantize -> simulate -> energy report,
// plus architecture search and the self-check suite.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sumspike/blob.hpp"
#include "sumspike/energy.hpp"
#include "sumspike/errors.hpp"
#include "sumspike/io.hpp"
#include "sumspike/nas.hpp"
#include "sumspike/network.hpp"
#include "sumspike/neuron.hpp"
#include "sumspike/sim.hpp"

namespace {

using namespace sumspike;

struct GlobalOptions {
  std::uint64_t seed = 1;
  std::string coeffs_path;
  double clock_hz = 1e8;
  bool quiet = false;

  EnergyConfig energy() const {
    return coeffs_path.empty() ? EnergyConfig{} : load_energy_config(coeffs_path);
  }
};

std::ostream& info(const GlobalOptions& g) {
  static std::ofstream null_stream;
  if (g.quiet) {
    null_stream.setstate(std::ios::badbit);
    return null_stream;
  }
  return std::cout;
}

// --- encode -----------------------------------------------------------------

int cmd_encode(const GlobalOptions& g, const std::string& input_path,
               const std::string& output_path, int window,
               std::string target, bool target_given, bool window_given,
               const std::string& model_path, bool normalize, int q) {
  // With a model at hand, its first layer picks the encoder and its window
  // the T; explicit flags override.
  if (!model_path.empty()) {
    Core core;
    core.load_blob(read_file_bytes(model_path));
    if (!target_given) {
      switch (core.model().layers.front().kind) {
        case LayerKind::Ann: target = "ann"; break;
        case LayerKind::If: target = "train"; break;
        case LayerKind::Ssf: target = "count"; break;
      }
    }
    if (!window_given) window = core.model().window;
  }
  auto rows = load_values_csv(input_path);
  if (normalize) {
    // Per-column min-max to [0, 1]; constant columns map to 0.
    const std::size_t cols = rows.front().size();
    for (std::size_t cidx = 0; cidx < cols; ++cidx) {
      double lo = rows.front()[cidx], hi = rows.front()[cidx];
      for (const auto& row : rows) {
        lo = std::min(lo, row[cidx]);
        hi = std::max(hi, row[cidx]);
      }
      for (auto& row : rows)
        row[cidx] = hi > lo ? (row[cidx] - lo) / (hi - lo) : 0.0;
    }
  } else {
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (std::size_t cidx = 0; cidx < rows[r].size(); ++cidx)
        if (rows[r][cidx] < 0.0 || rows[r][cidx] > 1.0)
          throw ValidationError("row " + std::to_string(r + 1) + " column " +
                                std::to_string(cidx + 1) +
                                ": value outside [0, 1]; rerun with --normalize");
  }

  EncodedFile file;
  if (target == "count") file.kind = EncodedInput::Kind::Counts;
  else if (target == "train") file.kind = EncodedInput::Kind::Trains;
  else if (target == "ann") file.kind = EncodedInput::Kind::Activations;
  else throw ValidationError("unknown --target: " + target);
  file.window = window;
  file.width = static_cast<int>(rows.front().size());
  file.q = q;
  for (const auto& row : rows)
    file.samples.push_back(encode_sample(row, window, file.kind, q));
  write_encoded_file(output_path, file);
  info(g) << "encoded " << file.samples.size() << " samples (" << target
          << ", T=" << window << ") -> " << output_path << "\n";
  return 0;
}

// --- quantize ----------------------------------------------------------------

int cmd_quantize(const GlobalOptions& g, const std::string& model_path,
                 const std::string& calib_path, const std::string& output_path,
                 const QuantConfig& qcfg) {
  const FloatNetwork fnet = load_float_network_json(model_path);
  std::vector<std::vector<double>> calib;
  if (!calib_path.empty()) calib = load_values_csv(calib_path);
  QuantizedNetwork qnet;
  try {
    qnet = quantize_network(fnet, calib, qcfg);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  const auto blob = pack_model(qnet);
  write_file_bytes(output_path, blob);
  info(g) << "packed " << qnet.layers.size() << " layers, "
          << param_count(qnet) << " parameters, " << blob.size()
          << " bytes -> " << output_path << "\n";
  return 0;
}

// --- simulate ----------------------------------------------------------------

int cmd_simulate(const GlobalOptions& g, const std::string& model_path,
                 const std::string& input_path, const std::string& trace_path,
                 const std::string& json_path, int only_sample) {
  const EnergyConfig energy = g.energy();
  Core core;
  core.load_blob(read_file_bytes(model_path));
  const EncodedFile input = read_encoded_file(input_path);
  if (input.width != core.model().input_width)
    throw ValidationError("encoded width " + std::to_string(input.width) +
                          " != model input width " +
                          std::to_string(core.model().input_width));
  if (input.window != core.model().window)
    throw ValidationError("encoded T=" + std::to_string(input.window) +
                          " != model T=" + std::to_string(core.model().window));

  std::ofstream trace_out;
  if (!trace_path.empty()) {
    trace_out.open(trace_path, std::ios::trunc);
    if (!trace_out) throw FormatError("cannot write file: " + trace_path);
  }
  std::ofstream json_out;
  if (!json_path.empty()) {
    json_out.open(json_path, std::ios::trunc);
    if (!json_out) throw FormatError("cannot write file: " + json_path);
  }

  for (std::size_t s = 0; s < input.samples.size(); ++s) {
    if (only_sample >= 0 && static_cast<std::size_t>(only_sample) != s) continue;
    std::vector<std::string> log;
    const SimResult result = core.run_inference(
        input.samples[s], trace_path.empty() ? nullptr : &log);
    const EnergyLedger ledger = ledger_from_trace(
        result.trace, energy.coefficients, energy.curve, g.clock_hz);
    std::cout << "sample " << s << "\n"
              << render_run_report(result.predicted_class, result.trace, ledger,
                                   g.clock_hz);
    if (trace_out.is_open()) {
      trace_out << "sample " << s << "\n";
      for (const auto& line : log) trace_out << line << "\n";
    }
    if (json_out.is_open())
      json_out << run_report_json(result.predicted_class, result.trace, ledger,
                                  g.clock_hz);
  }
  return 0;
}

// --- energy ------------------------------------------------------------------

int cmd_energy(const GlobalOptions& g, double spikes, const std::string& model_path,
               double sparsity) {
  const EnergyConfig energy = g.energy();
  const auto& c = energy.coefficients;
  std::cout << "coefficients_pJ acc=" << format_fixed(c.e_acc, 3)
            << " mul=" << format_fixed(c.e_mul, 3)
            << " mac=" << format_fixed(c.e_mac, 3)
            << " read_w=" << format_fixed(c.e_read_w, 3)
            << " write_w=" << format_fixed(c.e_write_w, 3)
            << " read_v=" << format_fixed(c.e_read_v, 3)
            << " write_v=" << format_fixed(c.e_write_v, 3)
            << " read_act=" << format_fixed(c.e_read_act, 3)
            << " write_act=" << format_fixed(c.e_write_act, 3) << "\n";
  std::cout << "crossover_compute_only "
            << format_fixed(crossover_compute_only(c), 6) << "\n";
  std::cout << "crossover_total " << format_fixed(crossover_total(c), 6) << "\n";
  if (spikes >= 0.0) {
    std::cout << "if_window_energy_pJ(s=" << format_fixed(spikes, 3) << ") "
              << format_fixed(if_window_energy(spikes, c), 6) << "\n";
    std::cout << "ann_energy_pJ " << format_fixed(ann_energy(c), 6) << "\n";
  }
  if (!model_path.empty()) {
    Core core;
    core.load_blob(read_file_bytes(model_path));
    const SparseDenseReport r =
        sparse_vs_dense_report(core.model(), sparsity, c, energy.curve);
    std::cout << "sparse_vs_dense sparsity=" << format_fixed(r.sparsity, 3)
              << " dense_pJ=" << format_fixed(r.dense_pj, 3)
              << " sparse_pJ=" << format_fixed(r.sparse_pj, 3)
              << " threshold=" << format_fixed(r.threshold_sparsity, 4)
              << " verdict=" << (r.dense_wins ? "dense" : "sparse") << "\n";
  }
  return 0;
}

// --- search --------------------------------------------------------------------

int cmd_search(const GlobalOptions& g, const std::string& dataset_path,
               const std::string& config_path, const std::string& history_path,
               bool quantized_proxy) {
  const Dataset dataset = load_labeled_csv(dataset_path);
  NasFileConfig file_cfg;
  if (!config_path.empty()) file_cfg = load_nas_config(config_path);
  NasConfig cfg = file_cfg.config;
  if (cfg.seed == NasConfig{}.seed) cfg.seed = g.seed;
  if (cfg.input_width == 0) cfg.input_width = dataset.feature_dim;

  SearchResult result;
  if (quantized_proxy) {
    const EnergyConfig energy = g.energy();
    Evaluator evaluator = [&](const Architecture& arch, std::uint64_t seed) {
      EvalResult r;
      r.accuracy = proxy_evaluate_quantized(arch, dataset, cfg, seed);
      r.energy_pj = estimate_ssf_energy_pj(arch, cfg.input_width, cfg.window,
                                           energy.coefficients, energy.curve);
      return r;
    };
    result = search(file_cfg.space, cfg, evaluator);
  } else {
    result = search(file_cfg.space, dataset, cfg);
  }

  if (!history_path.empty()) {
    std::ofstream out(history_path, std::ios::trunc);
    if (!out) throw FormatError("cannot write file: " + history_path);
    out << history_lines(result.history);
    info(g) << "history (" << result.history.size() << " candidates) -> "
            << history_path << "\n";
  }
  std::cout << "evaluations " << result.evaluations << "\n";
  std::cout << "best_arch " << arch_to_string(result.best.arch) << "\n";
  std::cout << "best_accuracy " << format_fixed(result.best.accuracy, 6) << "\n";
  std::cout << "best_energy_nJ " << format_fixed(result.best.energy_pj / 1000.0, 6)
            << "\n";
  std::cout << "best_score " << format_fixed(result.best.score, 6) << "\n";
  if (!result.constraints_satisfiable) {
    std::cout << "constraints infeasible: no candidate satisfied the hard "
                 "constraints; best-effort candidate reported\n";
    return 1;
  }
  return 0;
}

// --- verify -------------------------------------------------------------------

bool verify_theorem(std::ostream& out) {
  std::uint64_t instances = 0, violations = 0;
  for (int window = 1; window <= 6; ++window) {
    std::vector<int> levels(static_cast<std::size_t>(window), 0);
    for (double theta : {1.0, 2.0}) {
      // Enumerate x(t) over {0,1,2,3,4}^T.
      std::fill(levels.begin(), levels.end(), 0);
      while (true) {
        std::vector<double> x(levels.begin(), levels.end());
        const RepresentabilityReport r = representability_check(x, theta);
        ++instances;
        long long total = 0;
        for (int v : levels) total += v;
        const long long expected_ssf =
            std::min<long long>(window, total / static_cast<long long>(theta));
        if (r.n_if > r.n_ssf || r.n_ssf != expected_ssf ||
            r.equal != r.condition_holds)
          ++violations;
        int pos = window - 1;
        while (pos >= 0 && ++levels[static_cast<std::size_t>(pos)] > 4) {
          levels[static_cast<std::size_t>(pos)] = 0;
          --pos;
        }
        if (pos < 0) break;
      }
    }
  }
  out << "theorem: " << instances << " instances, " << violations
      << " violations -> " << (violations == 0 ? "PASS" : "FAIL") << "\n";
  return violations == 0;
}

bool verify_crossover(std::ostream& out, const EnergyConfig& energy) {
  const auto& c = energy.coefficients;
  const double compute_only = crossover_compute_only(c);
  const double total = crossover_total(c);
  bool ok = true;

  // Memory terms can only shrink the advantage.
  if (c.e_read_w > 0 || c.e_read_v > 0 || c.e_write_v > 0)
    ok = ok && total <= compute_only + 1e-12;
  // Both ratios are invariant under uniform scaling.
  EnergyCoefficients doubled = c;
  doubled.e_acc *= 2; doubled.e_mul *= 2; doubled.e_mac *= 2;
  doubled.e_read_w *= 2; doubled.e_write_w *= 2;
  doubled.e_read_v *= 2; doubled.e_write_v *= 2;
  doubled.e_read_act *= 2; doubled.e_write_act *= 2;
  ok = ok && std::abs(crossover_compute_only(doubled) - compute_only) < 1e-9;
  ok = ok && std::abs(crossover_total(doubled) - total) < 1e-9;

  const EnergyCoefficients defaults;
  const bool is_default =
      c.e_acc == defaults.e_acc && c.e_mac == defaults.e_mac &&
      c.e_read_w == defaults.e_read_w && c.e_read_v == defaults.e_read_v &&
      c.e_write_v == defaults.e_write_v && c.e_read_act == defaults.e_read_act &&
      c.e_write_act == defaults.e_write_act;
  if (is_default) {
    ok = ok && std::abs(compute_only - 13.0 / 5.0) < 1e-9;
    ok = ok && std::abs(total - 136.0 / 79.0) < 1e-9;
  }
  out << "crossover: compute_only=" << format_fixed(compute_only, 6)
      << " total=" << format_fixed(total, 6) << " -> " << (ok ? "PASS" : "FAIL")
      << "\n";
  return ok;
}

bool verify_space(std::ostream& out, const SearchSpace& space) {
  // Formula count: sum over depths of widths^depth.
  std::uint64_t formula = 0;
  for (int depth : space.depths) {
    std::uint64_t n = 1;
    for (int i = 0; i < depth; ++i) n *= space.widths.size();
    formula += n;
  }
  const auto archs = enumerate_space(space);
  bool ok = archs.size() == formula;
  // Every architecture exactly once.
  std::vector<Architecture> sorted = archs;
  std::sort(sorted.begin(), sorted.end());
  ok = ok && std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
  out << "space: enumerated=" << archs.size() << " formula=" << formula
      << " -> " << (ok ? "PASS" : "FAIL") << "\n";
  return ok;
}

int cmd_verify(const GlobalOptions& g, const std::string& mode,
               const std::vector<int>& depths, const std::vector<int>& widths) {
  SearchSpace space;
  if (!depths.empty()) space.depths = depths;
  if (!widths.empty()) space.widths = widths;
  bool ok = true;
  if (mode == "theorem" || mode == "all") ok = verify_theorem(std::cout) && ok;
  if (mode == "crossover" || mode == "all")
    ok = verify_crossover(std::cout, g.energy()) && ok;
  if (mode == "space" || mode == "all") ok = verify_space(std::cout, space) && ok;
  std::cout << (ok ? "verify: PASS" : "verify: FAIL") << "\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hybrid spiking/quantized network toolchain"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions global;
  app.add_option("--seed", global.seed, "random seed");
  app.add_option("--coeffs", global.coeffs_path, "energy coefficients JSON file");
  app.add_option("--clock-hz", global.clock_hz, "core clock in Hz");
  app.add_flag("--quiet", global.quiet, "suppress progress output");

  // encode
  auto* encode = app.add_subcommand("encode", "rate-encode a CSV of values");
  std::string in_path, out_path, encode_model;
  int window = 4, q = 8;
  std::string target = "count";
  bool normalize = false;
  encode->add_option("--input", in_path, "values CSV")->required();
  encode->add_option("--output", out_path, "encoded output file")->required();
  auto* t_opt = encode->add_option("--t", window, "window size T")
                    ->check(CLI::Range(1, 255));
  auto* target_opt = encode->add_option("--target", target, "count | train | ann");
  encode->add_option("--model", encode_model,
                     "model blob; derives target and T from its first layer");
  encode->add_option("--q", q, "activation bit-width for --target ann");
  encode->add_flag("--normalize", normalize, "min-max normalize columns to [0,1]");

  // quantize
  auto* quantize = app.add_subcommand("quantize", "quantize a float model into a blob");
  std::string model_json, calib_csv, blob_out;
  QuantConfig qcfg;
  quantize->add_option("--model", model_json, "float model JSON")->required();
  quantize->add_option("--calibration", calib_csv, "calibration CSV");
  quantize->add_option("--output", blob_out, "model blob path")->required();
  quantize->add_option("--q", qcfg.q, "bit-width");
  quantize->add_option("--n-shift", qcfg.n_shift, "weight multiplier shift");
  quantize->add_option("--m-shift", qcfg.m_shift, "bias multiplier shift");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "run the core simulator on a blob");
  std::string sim_model, sim_input, trace_out, report_json;
  int only_sample = -1;
  simulate->add_option("--model", sim_model, "model blob")->required();
  simulate->add_option("--input", sim_input, "encoded input file")->required();
  simulate->add_option("--trace-out", trace_out, "write FSM event log here");
  simulate->add_option("--report-json", report_json, "write JSON run reports here");
  simulate->add_option("--sample", only_sample, "simulate only this sample index");

  // energy
  auto* energy = app.add_subcommand("energy", "crossover analysis and energy report");
  double spikes = -1.0, sparsity = 0.4;
  std::string energy_model;
  energy->add_option("--spikes", spikes, "average spikes per input per window");
  energy->add_option("--model", energy_model, "model blob for sparse-vs-dense");
  energy->add_option("--sparsity", sparsity, "activation sparsity in [0,1]");

  // search
  auto* searchc = app.add_subcommand("search", "evolutionary architecture search");
  std::string dataset_path, nas_config_path, history_path = "history.txt";
  bool quantized_proxy = false;
  searchc->add_option("--dataset", dataset_path, "labeled CSV")->required();
  searchc->add_option("--config", nas_config_path, "search config JSON");
  searchc->add_option("--history-out", history_path, "history output file");
  searchc->add_flag("--quantized-proxy", quantized_proxy,
                    "evaluate candidates with the quantized proxy");

  // verify
  auto* verify = app.add_subcommand("verify", "self-checks: theorem, crossover, space");
  std::string mode = "all";
  std::vector<int> v_depths, v_widths;
  verify->add_option("--mode", mode, "theorem | crossover | space | all");
  verify->add_option("--depths", v_depths, "override space depths")->delimiter(',');
  verify->add_option("--widths", v_widths, "override space widths")->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (*encode)
      return cmd_encode(global, in_path, out_path, window, target,
                        target_opt->count() > 0, t_opt->count() > 0,
                        encode_model, normalize, q);
    if (*quantize)
      return cmd_quantize(global, model_json, calib_csv, blob_out, qcfg);
    if (*simulate)
      return cmd_simulate(global, sim_model, sim_input, trace_out,
                          report_json, only_sample);
    if (*energy) return cmd_energy(global, spikes, energy_model, sparsity);
    if (*searchc)
      return cmd_search(global, dataset_path, nas_config_path, history_path,
                        quantized_proxy);
    if (*verify) return cmd_verify(global, mode, v_depths, v_widths);
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
