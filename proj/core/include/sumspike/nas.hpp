#ifndef SUMSPIKE_NAS_HPP
#define SUMSPIKE_NAS_HPP

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "sumspike/energy.hpp"
#include "sumspike/rng.hpp"

namespace sumspike {

// One architecture: one width per layer; the depth is the vector length.
using Architecture = std::vector<int>;

// Bounded search space: every layer width drawn independently from `widths`,
// depth from `depths`. The default space holds sum over L of 4^L = 5440
// architectures.
struct SearchSpace {
  std::vector<int> depths = {3, 4, 5, 6};
  std::vector<int> widths = {16, 32, 64, 128};

  bool contains(const Architecture& arch) const;
};

std::uint64_t space_size(const SearchSpace& space);

// Yields every architecture exactly once: depths ascending, widths in
// lexicographic order within a depth.
std::vector<Architecture> enumerate_space(const SearchSpace& space);

Architecture random_architecture(const SearchSpace& space, Rng& rng);

// Resamples each layer width independently with probability p (the resample
// may coincide with the old width). Depth never changes.
Architecture mutate(const Architecture& arch, double p, Rng& rng,
                    const SearchSpace& space);

// Weights plus biases for the stack input_width -> arch[0] -> ... -> arch.back().
std::int64_t arch_param_count(const Architecture& arch, int input_width);

// ---------------------------------------------------------------------------

struct Dataset {
  int feature_dim = 0;
  std::vector<std::vector<double>> features;
  std::vector<int> labels;

  int num_classes() const;
  std::size_t size() const { return features.size(); }
};

struct NasConfig {
  int n_init = 500;
  int rounds = 50;
  int k_best = 3;
  int offspring = 10;       // mutants per parent per round
  double mutation_prob = 0.2;
  int proxy_epochs = 3;
  int k_folds = 3;
  std::uint64_t seed = 1;
  int window = 31;          // T for the energy estimate
  int input_width = 0;      // 0: take the dataset's feature width

  // Hard constraints, filtered before ranking.
  double min_accuracy = -std::numeric_limits<double>::infinity();
  std::int64_t max_params = std::numeric_limits<std::int64_t>::max();

  // score = accuracy - energy_weight * (estimated energy / largest-arch energy)
  double energy_weight = 0.0;

  int threads = 1;  // candidate evaluations per round may run concurrently

  std::int64_t expected_evaluations() const {
    return static_cast<std::int64_t>(n_init) +
           static_cast<std::int64_t>(rounds) * k_best * offspring;
  }
};

struct EvalResult {
  double accuracy = 0.0;
  double energy_pj = 0.0;
};

// Must be pure given (architecture, seed); evaluations may run concurrently.
using Evaluator = std::function<EvalResult(const Architecture&, std::uint64_t)>;

struct Candidate {
  int id = 0;
  int round = 0;       // 0 = initial population
  int parent_id = -1;
  Architecture arch;
  double accuracy = 0.0;
  double energy_pj = 0.0;
  double score = 0.0;
  bool feasible = true;
};

struct SearchResult {
  Candidate best;
  std::vector<Candidate> history;  // every candidate ever evaluated, id order
  std::int64_t evaluations = 0;
  bool constraints_satisfiable = true;
};

// Evolutionary search: evaluates n_init random candidates, then for each
// round selects the k_best top-scoring candidates that satisfy the hard
// constraints, spawns `offspring` mutants from each, evaluates and merges
// them. Parents stay in the pool, so the best score never decreases. Total
// evaluator calls are exactly n_init + rounds * k_best * offspring.
//
// When no candidate ever satisfies the constraints the result carries
// constraints_satisfiable = false and the best-effort candidate by score.
SearchResult search(const SearchSpace& space, const NasConfig& cfg,
                    const Evaluator& evaluator);

// search() with the built-in evaluator: proxy_evaluate for accuracy plus
// estimate_ssf_energy_pj for the energy term.
SearchResult search(const SearchSpace& space, const Dataset& dataset,
                    const NasConfig& cfg);

// Trains a float MLP proxy (ReLU hidden layers, linear logits, plain SGD at
// learning rate 0.01, cross-entropy) for proxy_epochs per fold over k_folds
// stratified folds and returns the mean validation accuracy.
double proxy_evaluate(const Architecture& arch, const Dataset& dataset,
                      const NasConfig& cfg, std::uint64_t seed);

// Same, with post-training quantization applied to the trained proxy before
// each fold's validation pass (opt-in alternative to the float proxy).
double proxy_evaluate_quantized(const Architecture& arch, const Dataset& dataset,
                                const NasConfig& cfg, std::uint64_t seed);

// Per-inference energy of the architecture instantiated as an all-SSF model
// on the core: runs the cycle simulator on a zero model/input, so the
// data-independent event counts match the real datapath exactly.
double estimate_ssf_energy_pj(const Architecture& arch, int input_width,
                              int window, const EnergyCoefficients& c,
                              const PortWidthCurve& curve);

}  // namespace sumspike

#endif  // SUMSPIKE_NAS_HPP
