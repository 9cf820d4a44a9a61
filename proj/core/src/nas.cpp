#include "sumspike/nas.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "sumspike/errors.hpp"
#include "sumspike/network.hpp"
#include "sumspike/sim.hpp"

namespace sumspike {

bool SearchSpace::contains(const Architecture& arch) const {
  if (std::find(depths.begin(), depths.end(), static_cast<int>(arch.size())) ==
      depths.end())
    return false;
  for (int w : arch)
    if (std::find(widths.begin(), widths.end(), w) == widths.end()) return false;
  return true;
}

std::uint64_t space_size(const SearchSpace& space) {
  std::uint64_t total = 0;
  for (int depth : space.depths) {
    std::uint64_t n = 1;
    for (int i = 0; i < depth; ++i) n *= space.widths.size();
    total += n;
  }
  return total;
}

std::vector<Architecture> enumerate_space(const SearchSpace& space) {
  std::vector<int> depths = space.depths;
  std::sort(depths.begin(), depths.end());
  std::vector<Architecture> out;
  out.reserve(space_size(space));
  for (int depth : depths) {
    Architecture arch(static_cast<std::size_t>(depth), space.widths.front());
    std::vector<std::size_t> idx(static_cast<std::size_t>(depth), 0);
    while (true) {
      for (int i = 0; i < depth; ++i)
        arch[static_cast<std::size_t>(i)] = space.widths[idx[static_cast<std::size_t>(i)]];
      out.push_back(arch);
      int pos = depth - 1;
      while (pos >= 0) {
        if (++idx[static_cast<std::size_t>(pos)] < space.widths.size()) break;
        idx[static_cast<std::size_t>(pos)] = 0;
        --pos;
      }
      if (pos < 0) break;
    }
  }
  return out;
}

Architecture random_architecture(const SearchSpace& space, Rng& rng) {
  const int depth = space.depths[rng.uniform_index(space.depths.size())];
  Architecture arch(static_cast<std::size_t>(depth));
  for (auto& w : arch) w = space.widths[rng.uniform_index(space.widths.size())];
  return arch;
}

Architecture mutate(const Architecture& arch, double p, Rng& rng,
                    const SearchSpace& space) {
  if (p < 0.0 || p > 1.0)
    throw std::invalid_argument("mutate: probability outside [0, 1]");
  Architecture out = arch;
  for (auto& w : out)
    if (rng.bernoulli(p)) w = space.widths[rng.uniform_index(space.widths.size())];
  return out;
}

std::int64_t arch_param_count(const Architecture& arch, int input_width) {
  std::int64_t n = 0;
  int in = input_width;
  for (int w : arch) {
    n += static_cast<std::int64_t>(in) * w + w;
    in = w;
  }
  return n;
}

int Dataset::num_classes() const {
  int classes = 0;
  for (int label : labels) classes = std::max(classes, label + 1);
  return classes;
}

// ---------------------------------------------------------------------------
// Proxy trainer: plain SGD on a float MLP, ReLU hidden layers, linear logits.

namespace {

struct Mlp {
  std::vector<int> dims;                   // input, then one per layer
  std::vector<std::vector<double>> w;      // [layer][out*in]
  std::vector<std::vector<double>> b;      // [layer][out]

  Mlp(int input_dim, const Architecture& arch, Rng& rng) {
    dims.push_back(input_dim);
    for (int width : arch) dims.push_back(width);
    const std::size_t layers = arch.size();
    w.resize(layers);
    b.resize(layers);
    for (std::size_t l = 0; l < layers; ++l) {
      const int in = dims[l];
      const int out = dims[l + 1];
      const double limit = std::sqrt(6.0 / in);
      w[l].resize(static_cast<std::size_t>(in) * out);
      // Hidden layers start at He-uniform scale. The classifier head starts
      // at zero so the first updates fit a linear readout of the random
      // features instead of tearing through the hidden stack; at a few
      // proxy epochs that keeps narrow-deep candidates from wedging into
      // dead-ReLU states.
      if (l + 1 < layers) {
        for (auto& v : w[l]) v = rng.uniform(-limit, limit);
      } else {
        for (auto& v : w[l]) v = 0.0;
      }
      b[l].assign(static_cast<std::size_t>(out), 0.0);
    }
  }

  std::size_t layer_count() const { return w.size(); }
};

// Forward pass keeping pre-activations for backprop; returns the logits.
const std::vector<double>& mlp_forward(const Mlp& net, const double* x,
                                       std::vector<std::vector<double>>& acts) {
  acts.resize(net.layer_count() + 1);
  acts[0].assign(x, x + net.dims[0]);
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const int in = net.dims[l];
    const int out = net.dims[l + 1];
    auto& y = acts[l + 1];
    y.assign(static_cast<std::size_t>(out), 0.0);
    const auto& prev = acts[l];
    for (int i = 0; i < out; ++i) {
      const double* row = net.w[l].data() + static_cast<std::size_t>(i) * in;
      double a = net.b[l][static_cast<std::size_t>(i)];
      for (int j = 0; j < in; ++j) a += row[j] * prev[static_cast<std::size_t>(j)];
      // Hidden layers rectify; the last layer stays linear (logits).
      y[static_cast<std::size_t>(i)] =
          (l + 1 < net.layer_count() && a < 0.0) ? 0.0 : a;
    }
  }
  return acts.back();
}

void mlp_train_step(Mlp& net, const double* x, int label, double lr,
                    std::vector<std::vector<double>>& acts,
                    std::vector<double>& grad, std::vector<double>& grad_prev) {
  const auto& logits = mlp_forward(net, x, acts);
  const int out = static_cast<int>(logits.size());

  // Softmax cross-entropy gradient on the logits.
  double peak = logits[0];
  for (double v : logits) peak = std::max(peak, v);
  double z = 0.0;
  grad.assign(static_cast<std::size_t>(out), 0.0);
  for (int i = 0; i < out; ++i) {
    grad[static_cast<std::size_t>(i)] = std::exp(logits[static_cast<std::size_t>(i)] - peak);
    z += grad[static_cast<std::size_t>(i)];
  }
  for (auto& g : grad) g /= z;
  grad[static_cast<std::size_t>(label)] -= 1.0;

  for (std::size_t l = net.layer_count(); l-- > 0;) {
    const int in = net.dims[l];
    const int width = net.dims[l + 1];
    const auto& prev = acts[l];
    if (l > 0) grad_prev.assign(static_cast<std::size_t>(in), 0.0);
    for (int i = 0; i < width; ++i) {
      const double g = grad[static_cast<std::size_t>(i)];
      if (g == 0.0) continue;
      double* row = net.w[l].data() + static_cast<std::size_t>(i) * in;
      if (l > 0) {
        for (int j = 0; j < in; ++j) {
          grad_prev[static_cast<std::size_t>(j)] += row[j] * g;
          row[j] -= lr * g * prev[static_cast<std::size_t>(j)];
        }
      } else {
        for (int j = 0; j < in; ++j) row[j] -= lr * g * prev[static_cast<std::size_t>(j)];
      }
      net.b[l][static_cast<std::size_t>(i)] -= lr * g;
    }
    if (l > 0) {
      // ReLU mask of the previous hidden layer.
      grad.swap(grad_prev);
      for (std::size_t j = 0; j < grad.size(); ++j)
        if (acts[l][j] <= 0.0) grad[j] = 0.0;
    }
  }
}

int mlp_predict(const Mlp& net, const double* x,
                std::vector<std::vector<double>>& acts) {
  const auto& logits = mlp_forward(net, x, acts);
  std::size_t best = 0;
  for (std::size_t i = 1; i < logits.size(); ++i)
    if (logits[i] > logits[best]) best = i;
  return static_cast<int>(best);
}

// Fold id per sample: within each class, samples are shuffled and dealt
// round-robin so every fold sees every class.
std::vector<int> stratified_folds(const Dataset& data, int k, Rng& rng) {
  const int classes = data.num_classes();
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(classes));
  for (std::size_t i = 0; i < data.labels.size(); ++i)
    by_class[static_cast<std::size_t>(data.labels[i])].push_back(i);
  std::vector<int> fold(data.size(), 0);
  for (auto& members : by_class) {
    if (static_cast<int>(members.size()) < k)
      throw ValidationError(
          "dataset too small to stratify: a class has fewer samples than folds");
    rng.shuffle(members);
    for (std::size_t i = 0; i < members.size(); ++i)
      fold[members[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
  }
  return fold;
}

void check_proxy_inputs(const Architecture& arch, const Dataset& data,
                        const NasConfig& cfg) {
  if (data.size() == 0) throw ValidationError("proxy_evaluate: empty dataset");
  if (data.num_classes() < 2)
    throw ValidationError("proxy_evaluate: need at least two classes");
  if (arch.empty()) throw std::invalid_argument("proxy_evaluate: empty architecture");
  if (arch.back() < data.num_classes())
    throw ValidationError(
        "proxy_evaluate: final layer narrower than the class count");
  if (cfg.k_folds < 2) throw std::invalid_argument("proxy_evaluate: k_folds must be >= 2");
}

constexpr double kProxyLearningRate = 0.01;

}  // namespace

double proxy_evaluate(const Architecture& arch, const Dataset& data,
                      const NasConfig& cfg, std::uint64_t seed) {
  check_proxy_inputs(arch, data, cfg);

  double accuracy_sum = 0.0;
  std::vector<std::vector<double>> acts;
  std::vector<double> grad, grad_prev;
  for (int f = 0; f < cfg.k_folds; ++f) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(f)));
    const std::vector<int> fold = stratified_folds(data, cfg.k_folds, rng);
    std::vector<std::size_t> train_idx;
    for (std::size_t i = 0; i < data.size(); ++i)
      if (fold[i] != f) train_idx.push_back(i);

    Mlp net(data.feature_dim, arch, rng);
    for (int epoch = 0; epoch < cfg.proxy_epochs; ++epoch) {
      rng.shuffle(train_idx);
      for (std::size_t i : train_idx)
        mlp_train_step(net, data.features[i].data(), data.labels[i],
                       kProxyLearningRate, acts, grad, grad_prev);
    }

    std::size_t correct = 0, total = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (fold[i] != f) continue;
      ++total;
      if (mlp_predict(net, data.features[i].data(), acts) == data.labels[i])
        ++correct;
    }
    accuracy_sum += total == 0 ? 0.0 : static_cast<double>(correct) / total;
  }
  return accuracy_sum / cfg.k_folds;
}

double proxy_evaluate_quantized(const Architecture& arch, const Dataset& data,
                                const NasConfig& cfg, std::uint64_t seed) {
  check_proxy_inputs(arch, data, cfg);

  double accuracy_sum = 0.0;
  std::vector<std::vector<double>> acts;
  std::vector<double> grad, grad_prev;
  for (int f = 0; f < cfg.k_folds; ++f) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(f)));
    const std::vector<int> fold = stratified_folds(data, cfg.k_folds, rng);
    std::vector<std::size_t> train_idx;
    for (std::size_t i = 0; i < data.size(); ++i)
      if (fold[i] != f) train_idx.push_back(i);

    Mlp net(data.feature_dim, arch, rng);
    for (int epoch = 0; epoch < cfg.proxy_epochs; ++epoch) {
      rng.shuffle(train_idx);
      for (std::size_t i : train_idx)
        mlp_train_step(net, data.features[i].data(), data.labels[i],
                       kProxyLearningRate, acts, grad, grad_prev);
    }

    // Post-training quantization of the trained proxy; features are clamped
    // to the encoder's [0, 1] domain.
    FloatNetwork fnet;
    fnet.window = cfg.window;
    fnet.input_width = data.feature_dim;
    int in = data.feature_dim;
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
      FloatLayer layer;
      layer.kind = LayerKind::Ann;
      layer.in_width = in;
      layer.out_width = net.dims[l + 1];
      layer.weights.resize(static_cast<std::size_t>(layer.out_width));
      for (int i = 0; i < layer.out_width; ++i)
        layer.weights[static_cast<std::size_t>(i)].assign(
            net.w[l].begin() + static_cast<std::ptrdiff_t>(i) * in,
            net.w[l].begin() + static_cast<std::ptrdiff_t>(i + 1) * in);
      layer.biases = net.b[l];
      fnet.layers.push_back(std::move(layer));
      in = net.dims[l + 1];
    }
    std::vector<std::vector<double>> calib;
    for (std::size_t i : train_idx) {
      std::vector<double> sample = data.features[i];
      for (auto& v : sample) v = std::clamp(v, 0.0, 1.0);
      calib.push_back(std::move(sample));
    }
    const QuantizedNetwork qnet =
        quantize_network(fnet, calib, QuantConfig{8, 16, 16});

    std::size_t correct = 0, total = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (fold[i] != f) continue;
      ++total;
      std::vector<double> sample = data.features[i];
      for (auto& v : sample) v = std::clamp(v, 0.0, 1.0);
      const EncodedInput input = encode_sample(
          sample, cfg.window, EncodedInput::Kind::Activations, 8);
      if (forward(qnet, input).predicted_class == data.labels[i]) ++correct;
    }
    accuracy_sum += total == 0 ? 0.0 : static_cast<double>(correct) / total;
  }
  return accuracy_sum / cfg.k_folds;
}

// ---------------------------------------------------------------------------

double estimate_ssf_energy_pj(const Architecture& arch, int input_width,
                              int window, const EnergyCoefficients& c,
                              const PortWidthCurve& curve) {
  if (arch.empty()) throw std::invalid_argument("estimate: empty architecture");
  // Event counts of an SSF layer stack are data-independent, so a zero model
  // on a zero input prices exactly like a deployed one. Capacity limits are
  // lifted here: the estimate must exist even for candidates the hard
  // constraints will reject.
  QuantizedNetwork net;
  net.window = window;
  net.input_width = std::min(input_width > 0 ? input_width : arch.front(), 128);
  int in = net.input_width;
  for (int width : arch) {
    QuantizedLayer l;
    l.kind = LayerKind::Ssf;
    l.in_width = in;
    l.out_width = width;
    l.quant.theta_q = 1;
    l.weights.assign(static_cast<std::size_t>(width),
                     std::vector<std::int8_t>(static_cast<std::size_t>(in), 0));
    l.biases.assign(static_cast<std::size_t>(width), 0);
    net.layers.push_back(std::move(l));
    in = width;
  }

  CoreConfig cfg;
  cfg.weight_mem_bytes = 1u << 30;
  cfg.act_mem_bytes = 1u << 30;
  cfg.max_layers = 64;
  Core core(cfg);
  core.load_model(net);

  EncodedInput input;
  input.kind = EncodedInput::Kind::Counts;
  input.values.assign(static_cast<std::size_t>(net.input_width), 0);
  const SimResult result = core.run_inference(input);
  return ledger_from_trace(result.trace, c, curve).total_pj();
}

// ---------------------------------------------------------------------------

namespace {

// Ranking order: score descending, then lexicographic architecture order
// (depth first, then widths), then id.
bool ranks_before(const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.arch.size() != b.arch.size()) return a.arch.size() < b.arch.size();
  if (a.arch != b.arch) return a.arch < b.arch;
  return a.id < b.id;
}

void evaluate_batch(std::vector<Candidate>& batch, const Evaluator& evaluator,
                    const NasConfig& cfg, double energy_norm) {
  auto eval_one = [&](Candidate& cand) {
    const EvalResult r =
        evaluator(cand.arch, mix_seed(cfg.seed, static_cast<std::uint64_t>(cand.id)));
    cand.accuracy = r.accuracy;
    cand.energy_pj = r.energy_pj;
    cand.score = r.accuracy - cfg.energy_weight * (r.energy_pj / energy_norm);
    cand.feasible =
        r.accuracy >= cfg.min_accuracy &&
        arch_param_count(cand.arch, cfg.input_width) <= cfg.max_params;
  };
  const int threads = std::max(1, cfg.threads);
  if (threads == 1 || batch.size() <= 1) {
    for (auto& cand : batch) eval_one(cand);
    return;
  }
  // Evaluations are pure given (arch, seed); results land at fixed indices,
  // so the merge is order-independent.
  std::vector<std::thread> pool;
  std::size_t next = 0;
  const std::size_t chunk = (batch.size() + threads - 1) / threads;
  for (int t = 0; t < threads && next < batch.size(); ++t) {
    const std::size_t begin = next;
    const std::size_t end = std::min(batch.size(), begin + chunk);
    next = end;
    pool.emplace_back([&, begin, end] {
      for (std::size_t i = begin; i < end; ++i) eval_one(batch[i]);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

SearchResult search(const SearchSpace& space, const NasConfig& cfg,
                    const Evaluator& evaluator) {
  if (cfg.n_init < 1 || cfg.rounds < 0 || cfg.k_best < 1 || cfg.offspring < 1)
    throw std::invalid_argument("search: counts must be >= 1");
  if (cfg.mutation_prob < 0.0 || cfg.mutation_prob > 1.0)
    throw std::invalid_argument("search: mutation_prob outside [0, 1]");

  double energy_norm = 1.0;
  if (cfg.energy_weight != 0.0) {
    Architecture largest(static_cast<std::size_t>(
                             *std::max_element(space.depths.begin(), space.depths.end())),
                         *std::max_element(space.widths.begin(), space.widths.end()));
    energy_norm = estimate_ssf_energy_pj(
        largest, cfg.input_width > 0 ? cfg.input_width : largest.front(),
        cfg.window, EnergyCoefficients{}, PortWidthCurve{});
  }

  Rng rng(cfg.seed);
  SearchResult result;
  result.history.reserve(static_cast<std::size_t>(cfg.expected_evaluations()));

  int next_id = 0;
  std::vector<Candidate> batch;
  for (int i = 0; i < cfg.n_init; ++i) {
    Candidate cand;
    cand.id = next_id++;
    cand.round = 0;
    cand.arch = random_architecture(space, rng);
    batch.push_back(std::move(cand));
  }
  evaluate_batch(batch, evaluator, cfg, energy_norm);
  result.evaluations += static_cast<std::int64_t>(batch.size());
  for (auto& cand : batch) result.history.push_back(std::move(cand));

  for (int round = 1; round <= cfg.rounds; ++round) {
    // Parents: best feasible candidates; topped up with best-effort ones if
    // fewer than k_best are feasible, so every round spawns the same number
    // of offspring.
    std::vector<const Candidate*> order;
    order.reserve(result.history.size());
    for (const auto& cand : result.history) order.push_back(&cand);
    std::sort(order.begin(), order.end(),
              [](const Candidate* a, const Candidate* b) {
                if (a->feasible != b->feasible) return a->feasible;
                return ranks_before(*a, *b);
              });
    const int parent_count = std::min<std::size_t>(cfg.k_best, order.size());

    batch.clear();
    for (int p = 0; p < parent_count; ++p) {
      for (int m = 0; m < cfg.offspring; ++m) {
        Candidate cand;
        cand.id = next_id++;
        cand.round = round;
        cand.parent_id = order[static_cast<std::size_t>(p)]->id;
        cand.arch = mutate(order[static_cast<std::size_t>(p)]->arch,
                           cfg.mutation_prob, rng, space);
        batch.push_back(std::move(cand));
      }
    }
    evaluate_batch(batch, evaluator, cfg, energy_norm);
    result.evaluations += static_cast<std::int64_t>(batch.size());
    for (auto& cand : batch) result.history.push_back(std::move(cand));
  }

  const Candidate* best_feasible = nullptr;
  const Candidate* best_any = nullptr;
  for (const auto& cand : result.history) {
    if (!best_any || ranks_before(cand, *best_any)) best_any = &cand;
    if (cand.feasible && (!best_feasible || ranks_before(cand, *best_feasible)))
      best_feasible = &cand;
  }
  result.constraints_satisfiable = best_feasible != nullptr;
  result.best = best_feasible ? *best_feasible : *best_any;
  return result;
}

SearchResult search(const SearchSpace& space, const Dataset& dataset,
                    const NasConfig& cfg) {
  NasConfig effective = cfg;
  if (effective.input_width == 0) effective.input_width = dataset.feature_dim;
  const EnergyCoefficients coeffs;
  const PortWidthCurve curve;
  Evaluator evaluator = [&](const Architecture& arch, std::uint64_t seed) {
    EvalResult r;
    r.accuracy = proxy_evaluate(arch, dataset, effective, seed);
    r.energy_pj = estimate_ssf_energy_pj(arch, effective.input_width,
                                         effective.window, coeffs, curve);
    return r;
  };
  return search(space, effective, evaluator);
}

}  // namespace sumspike
