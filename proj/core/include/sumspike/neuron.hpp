#ifndef SUMSPIKE_NEURON_HPP
#define SUMSPIKE_NEURON_HPP

#include <cstdint>
#include <vector>

namespace sumspike {

// Binary spike train over a window of T timesteps. Every element is 0 or 1.
struct SpikeTrain {
  std::vector<std::uint8_t> bits;

  SpikeTrain() = default;
  explicit SpikeTrain(std::vector<std::uint8_t> b);
  static SpikeTrain zeros(int t);

  int length() const { return static_cast<int>(bits.size()); }
};

// Per-neuron parameters for window-level simulation. decay = 1.0 is pure IF.
struct NeuronParams {
  std::vector<double> weights;
  double bias = 0.0;
  double threshold = 1.0;  // > 0
  double decay = 1.0;      // in (0, 1]
};

// Mutable per-neuron integration state, owned by the caller.
struct MembraneState {
  double potential = 0.0;
  int spikes_emitted = 0;
};

// One integrate/fire/subtract step. At most one spike per call; a potential
// that crosses several thresholds at once still sheds only a single theta,
// leaving the rest as backlog.
//
// Returns 1 if the neuron fired, else 0.
int if_step(MembraneState& state, double weighted_input, double threshold);

// Runs the IF recurrence over a T-step window from V = 0 with
// weighted_input(t) = sum_j inputs[j].bits[t] * w[j] + bias.
// All input trains must have length T.
SpikeTrain if_run_window(const std::vector<SpikeTrain>& inputs,
                         const NeuronParams& params, int window);

// Same as if_run_window but the carried potential is multiplied by
// params.decay before each integration step. decay = 1 reproduces
// if_run_window bit-exactly. decay must lie in (0, 1].
SpikeTrain lif_run_window(const std::vector<SpikeTrain>& inputs,
                          const NeuronParams& params, int window);

// Number of 1s in the train; lies in [0, T].
int count_spikes(const SpikeTrain& train);

// Window-level integration over spike counts: u = sum_j counts[j] * w[j] + T*b.
// Algebraically equal to summing the per-step IF increments over the window.
double ssf_integrate(const std::vector<int>& counts, const NeuronParams& params,
                     int window);

// Converts integrated input to an output spike count:
//   count = clip(floor(max(0, u) / theta), 0, T).
// Negative u maps to 0; theta must be > 0.
int ssf_fire(double integrated, double threshold, int window);

// Result of comparing IF and SSF spike counts on one nonnegative-input window.
struct RepresentabilityReport {
  int n_if = 0;
  int n_ssf = 0;
  bool equal = false;            // n_if == n_ssf, from simulation
  bool condition_holds = false;  // level-crossing feasibility, from cumulative sums
};

// Compares the spike count of a per-step IF simulation against the
// window-summed count on the same inputs. per_step_inputs[t] is the already
// weighted input x(t) and must be >= 0.
//
// n_ssf = min(T, floor(sum x / theta)).
//
// condition_holds is computed without running the IF recurrence: with
// tau_k the first timestep at which the cumulative sum reaches k*theta, all
// n_ssf spikes are realizable one-per-step within the window iff
// tau_k <= T - (n_ssf - k) for every level k. The report's `equal` flag and
// `condition_holds` must always agree; the two are computed by independent
// routes precisely so that tests can check this.
RepresentabilityReport representability_check(const std::vector<double>& per_step_inputs,
                              double threshold);

}  // namespace sumspike

#endif  // SUMSPIKE_NEURON_HPP
