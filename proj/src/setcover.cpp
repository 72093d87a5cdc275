#include "setcover/setcover.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "setcover/csv_io.hpp"
#include "setcover/erm.hpp"
#include "setcover/error.hpp"

namespace setcover {

std::string to_string(PenaltyVariant v) {
  return v == PenaltyVariant::wrong_prediction ? "wrong_prediction" : "full_set";
}

PenaltyVariant parse_penalty_variant(const std::string& name) {
  if (name == "wrong_prediction") return PenaltyVariant::wrong_prediction;
  if (name == "full_set") return PenaltyVariant::full_set;
  throw ConfigError("unknown penalty_variant '" + name + "'");
}

MultiplierMatrix::MultiplierMatrix(std::vector<int> domain_ids, int num_labels, double initial)
    : ids_(std::move(domain_ids)), num_labels_(num_labels) {
  if (!(initial > 0.0) || !std::isfinite(initial)) {
    throw ConfigError("initial multiplier must be positive and finite");
  }
  for (std::size_t r = 0; r < ids_.size(); ++r) {
    if (!row_of_.emplace(ids_[r], r).second) {
      throw DataError("duplicate domain id in multiplier matrix");
    }
  }
  values_.assign(ids_.size() * static_cast<std::size_t>(num_labels), initial);
}

std::size_t MultiplierMatrix::row_of(int domain_id) const {
  const auto it = row_of_.find(domain_id);
  if (it == row_of_.end()) {
    throw DataError("no multiplier row for domain " + std::to_string(domain_id));
  }
  return it->second;
}

void SetCoverConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
  if (!(initial_c > 0.0)) throw ConfigError("initial_c must be positive");
  if (c_update_frequency < 1) throw ConfigError("c_update_frequency must be at least 1");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
}

SetCoverConfig setcover_config_from(const KeyValueConfig& kv, SetCoverConfig base) {
  auto count = [&](const char* key, std::size_t fallback) {
    const auto v = kv.get_int(key, static_cast<std::int64_t>(fallback));
    if (v < 0) throw ConfigError(std::string(key) + " must be non-negative");
    return static_cast<std::size_t>(v);
  };
  base.gamma = kv.get_double("gamma", base.gamma);
  base.initial_c = kv.get_double("initial_c", base.initial_c);
  base.c_update_frequency = count("c_update_frequency", base.c_update_frequency);
  base.batch_size = count("batch_size", base.batch_size);
  base.learning_rate = kv.get_double("learning_rate", base.learning_rate);
  base.epochs = count("epochs", base.epochs);
  base.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<std::int64_t>(base.seed)));
  if (kv.has("penalty_variant")) {
    base.penalty = parse_penalty_variant(kv.get_string("penalty_variant", ""));
  }
  if (kv.has("architecture")) base.architecture = parse_architecture(kv.get_string("architecture", ""));
  base.hidden = count("hidden", base.hidden);
  base.validate();
  return base;
}

LagrangianLoss lagrangian_batch_loss(const Scorer& scorer, const MultiDomainDataset& data,
                                     std::span<const InstanceRef> batch,
                                     const MultiplierMatrix& multipliers,
                                     PenaltyVariant variant) {
  if (batch.empty()) throw DataError("Lagrangian loss needs a non-empty batch");
  const auto L = static_cast<std::size_t>(scorer.num_labels());
  LagrangianLoss out;
  out.per_label.assign(L, 0.0);
  out.grad.assign(scorer.num_params(), 0.0);
  std::vector<double> h(L);
  std::vector<double> upstream(L);
  ScorerWorkspace ws;
  for (const auto& ref : batch) {
    const auto inst = data.instance(ref);
    const std::size_t row = multipliers.row_of(inst.domain_id);
    scorer.forward(inst.features, h, ws);
    for (std::size_t y = 0; y < L; ++y) {
      double u = 0.0;
      const bool own = static_cast<std::size_t>(inst.label) == y;
      if (!own || variant == PenaltyVariant::full_set) {
        const double m = 1.0 + h[y];
        if (m > 0.0) {
          out.per_label[y] += m;
          u += 1.0;
        }
      }
      if (own) {
        const double c = multipliers.at(row, static_cast<int>(y));
        const double m = 1.0 - h[y];
        if (m > 0.0) {
          out.per_label[y] += c * m;
          u -= c;
        }
      }
      upstream[y] = u;
    }
    scorer.backward(inst.features, upstream, out.grad, ws);
  }
  for (double l : out.per_label) out.loss += l;
  return out;
}

double empirical_coverage(const Scorer& scorer, const MultiDomainDataset& data,
                          std::size_t block, std::span<const std::size_t> rows, int label) {
  if (rows.empty()) throw DataError("coverage of an empty group is undefined");
  const auto& b = data.domain(block);
  std::vector<double> h(static_cast<std::size_t>(scorer.num_labels()));
  ScorerWorkspace ws;
  std::size_t covered = 0;
  for (std::size_t r : rows) {
    scorer.forward(b.row(r, data.dim()), h, ws);
    if (h[static_cast<std::size_t>(label)] > 0.0) ++covered;
  }
  return static_cast<double>(covered) / static_cast<double>(rows.size());
}

CoverageTable compute_coverages(const Scorer& scorer, const MultiDomainDataset& data,
                                const GroupIndex& groups) {
  const int L = data.num_labels();
  const auto Lz = static_cast<std::size_t>(L);
  CoverageTable table;
  table.domain_ids = data.domain_ids();
  table.num_labels = L;
  table.values.assign(data.num_domains() * Lz, std::numeric_limits<double>::quiet_NaN());
  std::vector<double> h(Lz);
  std::vector<std::size_t> covered(Lz);
  ScorerWorkspace ws;
  for (std::size_t b = 0; b < data.num_domains(); ++b) {
    const auto& block = data.domain(b);
    std::fill(covered.begin(), covered.end(), 0);
    for (std::size_t r = 0; r < block.size(); ++r) {
      scorer.forward(block.row(r, data.dim()), h, ws);
      const auto y = static_cast<std::size_t>(block.labels[r]);
      if (h[y] > 0.0) ++covered[y];
    }
    for (int y = 0; y < L; ++y) {
      const auto n = groups.group(b, y).size();
      if (n == 0) continue;
      table.values[b * Lz + static_cast<std::size_t>(y)] =
          static_cast<double>(covered[static_cast<std::size_t>(y)]) / static_cast<double>(n);
    }
  }
  return table;
}

MultiplierMatrix update_multipliers(const MultiplierMatrix& multipliers,
                                    const CoverageTable& coverages, double gamma) {
  MultiplierMatrix next = multipliers;
  for (std::size_t r = 0; r < coverages.domain_ids.size(); ++r) {
    const std::size_t row = multipliers.row_of(coverages.domain_ids[r]);
    for (int y = 0; y < coverages.num_labels; ++y) {
      const double coverage = coverages.at(r, y);
      if (std::isnan(coverage)) continue;
      const double nu = 1.0 - (coverage - (1.0 - gamma));
      const double s = nu > 1.0 ? 2.0 : 1.0;
      next.at(row, y) = std::clamp(multipliers.at(row, y) * s * nu, kMultiplierFloor, kMultiplierCap);
    }
  }
  return next;
}

SetCoverResult train_setcover(const MultiDomainDataset& data, const SetCoverConfig& config) {
  return train_setcover(data, config,
                        initial_scorer(config.architecture, data.dim(), data.num_labels(),
                                       config.hidden, config.seed));
}

SetCoverResult train_setcover(const MultiDomainDataset& data, const SetCoverConfig& config,
                              Scorer initial) {
  config.validate();
  if (data.empty()) throw DataError("cannot train on an empty dataset");
  if (initial.dim() != data.dim() || initial.num_labels() != data.num_labels()) {
    throw ConfigError("initial scorer shape does not match the dataset");
  }
  SetCoverResult result;
  result.scorer = std::move(initial);
  result.multipliers = MultiplierMatrix(data.domain_ids(), data.num_labels(), config.initial_c);
  const auto groups = build_group_index(data);
  const auto all = data.all_instances();
  Rng shuffle_rng = make_rng(config.seed, 1);

  std::size_t update_index = 0;
  std::size_t global_batch = 0;
  auto update = [&](std::size_t epoch) {
    const auto cov = compute_coverages(result.scorer, data, groups);
    result.multipliers = update_multipliers(result.multipliers, cov, config.gamma);
    for (std::size_t r = 0; r < cov.domain_ids.size(); ++r) {
      for (int y = 0; y < cov.num_labels; ++y) {
        const double c = cov.at(r, y);
        if (std::isnan(c)) continue;
        result.trace.push_back({update_index, epoch, cov.domain_ids[r], y, c,
                                result.multipliers.at(r, y)});
      }
    }
    ++update_index;
  };

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto batches = epoch_batches(all, config.batch_size, shuffle_rng);
    double total = 0.0;
    for (const auto& batch : batches) {
      const auto step = lagrangian_batch_loss(result.scorer, data, batch, result.multipliers,
                                              config.penalty);
      auto p = result.scorer.params();
      for (std::size_t i = 0; i < p.size(); ++i) p[i] -= config.learning_rate * step.grad[i];
      total += step.loss;
      ++global_batch;
      if (global_batch % config.c_update_frequency == 0) update(epoch);
    }
    update(epoch);
    result.epoch_loss.push_back(total / static_cast<double>(batches.size()));
  }
  if (!result.scorer.all_finite()) throw Error("SET-COVER training diverged (non-finite parameters)");
  return result;
}

void write_trace_csv(std::ostream& out, std::span<const TraceRow> trace) {
  out << "update_index,domain_id,label,coverage,multiplier\n";
  for (const auto& t : trace) {
    out << t.update_index << ',' << t.domain_id << ',' << t.label << ','
        << format_double(t.coverage) << ',' << format_double(t.multiplier) << '\n';
  }
}

}  // namespace setcover
