#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "setcover/dataset.hpp"
#include "setcover/kv_config.hpp"
#include "setcover/scorer.hpp"

namespace setcover {

/// Which instances the set-size hinge term penalizes.
enum class PenaltyVariant {
  wrong_prediction,  // only instances whose label differs from y
  full_set,          // every instance, including Y_i = y
};

std::string to_string(PenaltyVariant v);
PenaltyVariant parse_penalty_variant(const std::string& name);

inline constexpr double kMultiplierFloor = 1e-6;
inline constexpr double kMultiplierCap = 1e6;

/// Lagrange multipliers C[e][y] > 0, one row per training domain.
class MultiplierMatrix {
 public:
  MultiplierMatrix() = default;
  MultiplierMatrix(std::vector<int> domain_ids, int num_labels, double initial);

  std::size_t rows() const { return ids_.size(); }
  int num_labels() const { return num_labels_; }
  const std::vector<int>& domain_ids() const { return ids_; }

  /// Row of `domain_id`; throws DataError for an unknown domain.
  std::size_t row_of(int domain_id) const;

  double at(std::size_t row, int label) const { return values_.at(index(row, label)); }
  double& at(std::size_t row, int label) { return values_.at(index(row, label)); }

  friend bool operator==(const MultiplierMatrix&, const MultiplierMatrix&) = default;

 private:
  std::size_t index(std::size_t row, int label) const {
    return row * static_cast<std::size_t>(num_labels_) + static_cast<std::size_t>(label);
  }
  std::vector<int> ids_;
  std::map<int, std::size_t> row_of_;
  int num_labels_ = 0;
  std::vector<double> values_;
};

/// Per-(domain, label) coverage; NaN marks an empty group.
struct CoverageTable {
  std::vector<int> domain_ids;
  int num_labels = 0;
  std::vector<double> values;

  double at(std::size_t row, int label) const {
    return values.at(row * static_cast<std::size_t>(num_labels) + static_cast<std::size_t>(label));
  }
};

struct SetCoverConfig {
  double gamma = 0.1;
  double initial_c = 5.0;
  std::size_t c_update_frequency = 500;
  std::size_t batch_size = 128;
  double learning_rate = 0.001;
  std::size_t epochs = 30;
  std::uint64_t seed = 0;
  PenaltyVariant penalty = PenaltyVariant::wrong_prediction;
  Architecture architecture = Architecture::mlp;
  std::size_t hidden = 0;  // 0 selects default_hidden(dim)

  void validate() const;
};

/// Keys: gamma, initial_c, c_update_frequency, batch_size, learning_rate,
/// epochs, seed, penalty_variant, architecture, hidden.
SetCoverConfig setcover_config_from(const KeyValueConfig& kv, SetCoverConfig base = {});

struct LagrangianLoss {
  double loss = 0.0;
  std::vector<double> per_label;  // L_y
  std::vector<double> grad;
};

/// Sum over the batch and labels of
///   [Y_i != y] max(0, 1 + h_y(X_i)) + [Y_i == y] C[e_i][y] max(0, 1 - h_y(X_i)),
/// with the full_set variant also charging max(0, 1 + h_y(X_i)) when Y_i == y.
/// The theta-free -gamma term of the Lagrangian is omitted.
LagrangianLoss lagrangian_batch_loss(const Scorer& scorer, const MultiDomainDataset& data,
                                     std::span<const InstanceRef> batch,
                                     const MultiplierMatrix& multipliers,
                                     PenaltyVariant variant);

/// Fraction of `rows` (instances of `label` in `block`) with h_label(x) > 0.
double empirical_coverage(const Scorer& scorer, const MultiDomainDataset& data,
                          std::size_t block, std::span<const std::size_t> rows, int label);

CoverageTable compute_coverages(const Scorer& scorer, const MultiDomainDataset& data,
                                const GroupIndex& groups);

/// nu = 1 - (coverage - (1 - gamma)); s = 2 if nu > 1 else 1; C <- C * s * nu,
/// clamped to [kMultiplierFloor, kMultiplierCap]. NaN coverages leave C as is.
MultiplierMatrix update_multipliers(const MultiplierMatrix& multipliers,
                                    const CoverageTable& coverages, double gamma);

struct TraceRow {
  std::size_t update_index = 0;
  std::size_t epoch = 0;
  int domain_id = 0;
  int label = 0;
  double coverage = 0.0;
  double multiplier = 0.0;  // value after the update
};

struct SetCoverResult {
  Scorer scorer;
  MultiplierMatrix multipliers;
  std::vector<TraceRow> trace;
  std::vector<double> epoch_loss;  // mean batch Lagrangian per epoch
};

/// Gradient descent on theta over globally shuffled pooled batches; the
/// multipliers are updated every `c_update_frequency` batches (global count)
/// and at the end of each epoch, from coverages over the full training set.
SetCoverResult train_setcover(const MultiDomainDataset& data, const SetCoverConfig& config);
/// Same, starting from a given scorer.
SetCoverResult train_setcover(const MultiDomainDataset& data, const SetCoverConfig& config,
                              Scorer initial);

/// CSV columns: update_index,domain_id,label,coverage,multiplier.
void write_trace_csv(std::ostream& out, std::span<const TraceRow> trace);

}  // namespace setcover
