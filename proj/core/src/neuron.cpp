#include "sumspike/neuron.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sumspike {

SpikeTrain::SpikeTrain(std::vector<std::uint8_t> b) : bits(std::move(b)) {
  for (std::uint8_t v : bits) {
    if (v > 1) throw std::invalid_argument("SpikeTrain: elements must be 0 or 1");
  }
}

SpikeTrain SpikeTrain::zeros(int t) {
  SpikeTrain s;
  s.bits.assign(static_cast<std::size_t>(t), 0);
  return s;
}

int if_step(MembraneState& state, double weighted_input, double threshold) {
  if (threshold <= 0.0) throw std::invalid_argument("if_step: threshold must be > 0");
  state.potential += weighted_input;
  if (state.potential >= threshold) {
    state.potential -= threshold;  // subtractive reset, one theta per step
    state.spikes_emitted += 1;
    return 1;
  }
  return 0;
}

namespace {

void check_window_inputs(const std::vector<SpikeTrain>& inputs,
                         const NeuronParams& params, int window) {
  if (inputs.size() != params.weights.size())
    throw std::invalid_argument("run_window: one weight per input train required");
  for (const SpikeTrain& train : inputs) {
    if (train.length() != window)
      throw std::invalid_argument("run_window: input train length " +
                                  std::to_string(train.length()) +
                                  " != window " + std::to_string(window));
  }
}

SpikeTrain run_window(const std::vector<SpikeTrain>& inputs,
                      const NeuronParams& params, int window, double decay) {
  check_window_inputs(inputs, params, window);
  MembraneState state;
  SpikeTrain out = SpikeTrain::zeros(window);
  for (int t = 0; t < window; ++t) {
    state.potential *= decay;
    double x = params.bias;
    for (std::size_t j = 0; j < inputs.size(); ++j) {
      if (inputs[j].bits[static_cast<std::size_t>(t)])
        x += params.weights[j];
    }
    out.bits[static_cast<std::size_t>(t)] =
        static_cast<std::uint8_t>(if_step(state, x, params.threshold));
  }
  return out;
}

}  // namespace

SpikeTrain if_run_window(const std::vector<SpikeTrain>& inputs,
                         const NeuronParams& params, int window) {
  return run_window(inputs, params, window, 1.0);
}

SpikeTrain lif_run_window(const std::vector<SpikeTrain>& inputs,
                          const NeuronParams& params, int window) {
  if (!(params.decay > 0.0 && params.decay <= 1.0))
    throw std::invalid_argument("lif_run_window: decay must be in (0, 1]");
  return run_window(inputs, params, window, params.decay);
}

int count_spikes(const SpikeTrain& train) {
  int count = 0;
  for (std::uint8_t b : train.bits) count += b;
  return count;
}

double ssf_integrate(const std::vector<int>& counts, const NeuronParams& params,
                     int window) {
  if (counts.size() != params.weights.size())
    throw std::invalid_argument("ssf_integrate: one weight per count required");
  double u = static_cast<double>(window) * params.bias;
  for (std::size_t j = 0; j < counts.size(); ++j)
    u += static_cast<double>(counts[j]) * params.weights[j];
  return u;
}

int ssf_fire(double integrated, double threshold, int window) {
  if (threshold <= 0.0) throw std::invalid_argument("ssf_fire: threshold must be > 0");
  if (integrated <= 0.0) return 0;
  const double q = std::floor(integrated / threshold);
  if (q >= static_cast<double>(window)) return window;
  return static_cast<int>(q);
}

RepresentabilityReport representability_check(const std::vector<double>& per_step_inputs,
                              double threshold) {
  if (threshold <= 0.0)
    throw std::invalid_argument("representability_check: threshold must be > 0");
  for (double x : per_step_inputs) {
    if (x < 0.0)
      throw std::invalid_argument("representability_check: inputs must be nonnegative");
  }
  const int window = static_cast<int>(per_step_inputs.size());

  RepresentabilityReport report;

  // Window-summed count.
  double total = 0.0;
  for (double x : per_step_inputs) total += x;
  report.n_ssf = ssf_fire(total, threshold, window);

  // Per-step IF simulation, at most one spike per timestep.
  MembraneState state;
  for (double x : per_step_inputs) if_step(state, x, threshold);
  report.n_if = state.spikes_emitted;
  report.equal = (report.n_if == report.n_ssf);

  // Level-crossing feasibility from cumulative sums alone. Level k is first
  // reached at timestep tau_k (1-based); one spike per step means the k-th
  // spike can land no earlier than tau_k and no two spikes share a step, so
  // all n_ssf levels fit the window iff tau_k + (n_ssf - k) <= T for each k.
  report.condition_holds = true;
  double running = 0.0;
  int level = 1;
  for (int t = 1; t <= window && level <= report.n_ssf; ++t) {
    running += per_step_inputs[static_cast<std::size_t>(t - 1)];
    while (level <= report.n_ssf &&
           running >= static_cast<double>(level) * threshold) {
      if (t + (report.n_ssf - level) > window) {
        report.condition_holds = false;
        break;
      }
      ++level;
    }
    if (!report.condition_holds) break;
  }
  if (level <= report.n_ssf && report.condition_holds) {
    // Some level was never reached within the window; with x >= 0 this can
    // only happen through floating error, and it means the tail of the
    // backlog is not realizable.
    report.condition_holds = false;
  }

  return report;
}

}  // namespace sumspike
