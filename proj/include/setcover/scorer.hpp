#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "setcover/dataset.hpp"
#include "setcover/label_set.hpp"
#include "setcover/rng.hpp"

namespace setcover {

enum class Architecture { linear, mlp };

std::string to_string(Architecture arch);
Architecture parse_architecture(const std::string& name);

/// Scratch buffers for allocation-free forward/backward passes.
struct ScorerWorkspace {
  std::vector<double> pre;
  std::vector<double> act;
  std::vector<double> delta;
};

/// Per-label score functions h_y(x), either linear (W x + b) or a two-layer
/// rectifier MLP (W2 relu(W1 x + b1) + b2). Parameters live in one flat
/// vector so gradients and SGD steps share its layout:
///   linear: W (L x d, row-major), b (L)
///   mlp:    W1 (H x d), b1 (H), W2 (L x H), b2 (L)
class Scorer {
 public:
  Scorer() = default;

  /// Linear scorer with all parameters zero.
  static Scorer linear(std::size_t dim, int num_labels);
  /// MLP with weights and biases uniform on +-1/sqrt(fan_in).
  static Scorer mlp(std::size_t dim, int num_labels, std::size_t hidden, Rng& rng);
  /// MLP with all parameters zero (for hand-set weights).
  static Scorer mlp_zero(std::size_t dim, int num_labels, std::size_t hidden);

  Architecture architecture() const { return arch_; }
  std::size_t dim() const { return dim_; }
  int num_labels() const { return num_labels_; }
  std::size_t hidden() const { return hidden_; }
  std::size_t num_params() const { return params_.size(); }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  /// Linear: W; MLP: W2. Row-major (L x d) or (L x H).
  std::span<double> output_weights();
  std::span<double> output_biases();
  std::span<const double> output_biases() const;
  /// MLP only: first layer W1 (H x d) and b1 (H).
  std::span<double> hidden_weights();
  std::span<double> hidden_biases();

  /// Writes h_y(x) for all y into `out` (length L).
  void forward(std::span<const double> x, std::span<double> out, ScorerWorkspace& ws) const;

  /// Adds d/dtheta sum_y upstream[y] * h_y(x) to `grad`. Must follow
  /// `forward` on the same `x` with the same workspace. The rectifier's
  /// subgradient at 0 is 0.
  void backward(std::span<const double> x, std::span<const double> upstream,
                std::span<double> grad, ScorerWorkspace& ws) const;

  bool all_finite() const;

  friend bool operator==(const Scorer&, const Scorer&) = default;

 private:
  Scorer(Architecture arch, std::size_t dim, int num_labels, std::size_t hidden);
  void check_input(std::span<const double> x) const;

  Architecture arch_ = Architecture::linear;
  std::size_t dim_ = 0;
  int num_labels_ = 0;
  std::size_t hidden_ = 0;
  std::vector<double> params_;
};

/// Default hidden width for generic data: max(5, d / 2).
std::size_t default_hidden(std::size_t dim);

std::vector<double> score(const Scorer& scorer, std::span<const double> x);

/// { y : h_y(x) >= 0 }. Zero scores are included.
LabelSet predict_set(const Scorer& scorer, std::span<const double> x);
LabelSet set_from_scores(std::span<const double> scores);

/// Gradient of upstream * h_y(x) with respect to every parameter.
std::vector<double> grad_params(const Scorer& scorer, std::span<const double> x, int label,
                                double upstream);

struct LossAndGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

/// Base classifier whose scores are treated as logits.
struct SoftmaxClassifier {
  Scorer net;

  std::vector<double> logits(std::span<const double> x) const { return score(net, x); }
};

/// Mean softmax cross-entropy over `batch` with its analytic gradient
/// (max-logit shifted for stability).
LossAndGrad softmax_loss_and_grad(const Scorer& scorer, const MultiDomainDataset& data,
                                  std::span<const InstanceRef> batch);

/// argmax of the logits; the lowest index wins ties.
int erm_predict_singleton(const SoftmaxClassifier& classifier, std::span<const double> x);
int argmax_first(std::span<const double> values);

/// JSON checkpoint: architecture tag, shapes and row-major parameter arrays.
nlohmann::json scorer_to_json(const Scorer& scorer);
Scorer scorer_from_json(const nlohmann::json& j);
void save_scorer(const Scorer& scorer, const std::filesystem::path& path);
Scorer load_scorer(const std::filesystem::path& path);

}  // namespace setcover
