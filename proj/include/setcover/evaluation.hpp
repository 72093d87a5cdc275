#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "setcover/dataset.hpp"
#include "setcover/label_set.hpp"

namespace setcover {

using SetPredictor = std::function<LabelSet(std::span<const double>)>;

struct DomainMetrics {
  int domain_id = 0;
  std::size_t n = 0;
  std::vector<double> per_label_recall;  // NaN where the label has no support
  std::vector<std::size_t> label_support;
  double min_recall = 0.0;  // over labels present in the domain
  double avg_set_size = 0.0;
};

struct Quartiles {
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
};

struct AggregateMetrics {
  std::size_t n_domains = 0;
  double gamma = 0.0;
  Quartiles min_recall;
  Quartiles avg_set_size;
  double success_pct = 0.0;  // fraction of domains with min_recall >= 1 - gamma
};

/// Quantile by linear interpolation between order statistics at q (n - 1).
double quantile_linear(std::vector<double> values, double q);
Quartiles quartiles(std::span<const double> values);

DomainMetrics evaluate_domain(const SetPredictor& predictor, const DomainBlock& block,
                              std::size_t dim, const LabelSpace& labels);
std::vector<DomainMetrics> evaluate_domains(const SetPredictor& predictor,
                                            const MultiDomainDataset& data);

AggregateMetrics aggregate(std::span<const DomainMetrics> domains, double gamma);

/// Metrics of one method on one evaluation set.
struct MethodReport {
  std::string method;
  std::vector<DomainMetrics> domains;
  AggregateMetrics aggregate;
};

MethodReport make_report(std::string method, std::vector<DomainMetrics> domains, double gamma);

void write_per_domain_csv(std::ostream& out, std::span<const MethodReport> reports,
                          int num_labels);
void write_aggregate_csv(std::ostream& out, std::span<const MethodReport> reports);
/// One row per method: set-size quartiles (x) and min-recall quartiles (y).
void write_crossplot_csv(std::ostream& out, std::span<const MethodReport> reports);

/// Writes per_domain.csv, aggregate.csv and crossplot.csv into `dir`.
void emit_report(const std::filesystem::path& dir, std::span<const MethodReport> reports,
                 int num_labels);

/// One aggregate.csv row as read back from disk.
struct AggregateRow {
  std::string method;
  AggregateMetrics metrics;
};
std::vector<AggregateRow> read_aggregate_csv(const std::filesystem::path& path);

/// Mean and sample standard deviation (n - 1; 0 for one value).
struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};
MeanStd mean_std(std::span<const double> values);

struct SeedSummaryRow {
  std::string method;
  std::size_t n_seeds = 0;
  MeanStd median_min_recall;
  MeanStd median_avg_set_size;
  MeanStd success_pct;
};

/// Averages each method's aggregate across seeds; methods keep first-seen order.
std::vector<SeedSummaryRow> summarize_seeds(const std::vector<std::vector<AggregateRow>>& per_seed);
void write_summary_csv(std::ostream& out, std::span<const SeedSummaryRow> rows);

}  // namespace setcover
