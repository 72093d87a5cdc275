#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "setcover/dataset.hpp"
#include "setcover/erm.hpp"
#include "setcover/label_set.hpp"
#include "setcover/scorer.hpp"

namespace setcover {

enum class ThresholdMode { robust, pooled };

struct DomainLabelThreshold {
  int domain_id = 0;
  int label = 0;
  double threshold = 0.0;

  friend bool operator==(const DomainLabelThreshold&, const DomainLabelThreshold&) = default;
};

/// Calibrated score thresholds. Robust mode keeps one threshold per training
/// (domain, label) group; pooled mode keeps one per label.
struct ThresholdTable {
  ThresholdMode mode = ThresholdMode::robust;
  std::string variant;  // "robust", "trainc" or "cvc"
  double gamma = 0.1;
  int num_labels = 0;
  std::vector<DomainLabelThreshold> robust;
  std::vector<double> pooled;

  /// Per-label inclusion threshold: the minimum over domains in robust mode
  /// (+inf for a label with no calibrated group), t_y in pooled mode.
  std::vector<double> effective_thresholds() const;

  friend bool operator==(const ThresholdTable&, const ThresholdTable&) = default;
};

/// Smallest count c with c / n >= 1 - gamma, i.e. ceil((1 - gamma) n), in [1, n].
std::size_t required_count(std::size_t n, double gamma);

/// Largest t with #{s >= t} / n >= 1 - gamma: the ceil((1-gamma) n)-th largest score.
double robust_threshold(std::span<const double> scores, double gamma);

/// Largest candidate t such that the unweighted mean over domains of
/// #{s in domain : s >= t} / |domain| is >= 1 - gamma. Empty domains are
/// ignored. gamma == 0 yields (min score - 1).
double pooled_threshold(const std::vector<std::vector<double>>& per_domain_scores, double gamma);

/// scores[block][label] = f(x)_label for every label-`label` instance of the block.
std::vector<std::vector<std::vector<double>>> group_scores(const Scorer& model,
                                                           const MultiDomainDataset& data);

ThresholdTable calibrate_robust(const SoftmaxClassifier& classifier,
                                const MultiDomainDataset& data, double gamma);

/// TrainC: thresholds from the base model's scores on all training domains.
ThresholdTable calibrate_pooling_trainc(const SoftmaxClassifier& classifier,
                                        const MultiDomainDataset& data, double gamma);

/// CVC: domains are shuffled (by `erm.seed`) into `folds` folds; each fold is
/// scored by a model retrained with `erm` on the other folds, and thresholds
/// come from the union of held-out scores.
ThresholdTable calibrate_pooling_cvc(const MultiDomainDataset& data, double gamma,
                                     std::size_t folds, const ErmConfig& erm);

/// y is included iff scores[y] >= thresholds[y].
LabelSet threshold_set(std::span<const double> scores, std::span<const double> thresholds);

/// y is included iff f(x)_y clears t_{e,y} for some training domain e.
LabelSet predict_robust(const SoftmaxClassifier& classifier, const ThresholdTable& table,
                        std::span<const double> x);
LabelSet predict_pooling(const SoftmaxClassifier& classifier, const ThresholdTable& table,
                         std::span<const double> x);

nlohmann::json thresholds_to_json(const ThresholdTable& table);
ThresholdTable thresholds_from_json(const nlohmann::json& j);
void save_thresholds(const ThresholdTable& table, const std::filesystem::path& path);
ThresholdTable load_thresholds(const std::filesystem::path& path);

}  // namespace setcover
