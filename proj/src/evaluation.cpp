#include "setcover/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "setcover/csv_io.hpp"
#include "setcover/error.hpp"
#include "setcover/kv_config.hpp"
#include "setcover/recall.hpp"

namespace setcover {

double quantile_linear(std::vector<double> values, double q) {
  if (values.empty()) throw DataError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

Quartiles quartiles(std::span<const double> values) {
  std::vector<double> v(values.begin(), values.end());
  return {quantile_linear(v, 0.25), quantile_linear(v, 0.5), quantile_linear(v, 0.75)};
}

DomainMetrics evaluate_domain(const SetPredictor& predictor, const DomainBlock& block,
                              std::size_t dim, const LabelSpace& labels) {
  if (block.size() == 0) throw DataError("cannot evaluate an empty domain");
  const auto L = static_cast<std::size_t>(labels.size());
  DomainMetrics m;
  m.domain_id = block.domain_id;
  m.n = block.size();
  m.label_support.assign(L, 0);
  std::vector<std::size_t> hits(L, 0);
  std::size_t total_size = 0;
  for (std::size_t r = 0; r < block.size(); ++r) {
    const LabelSet set = predictor(block.row(r, dim));
    const auto y = static_cast<std::size_t>(block.labels[r]);
    ++m.label_support[y];
    if (set.contains(block.labels[r])) ++hits[y];
    total_size += static_cast<std::size_t>(set.size());
  }
  m.per_label_recall.assign(L, std::numeric_limits<double>::quiet_NaN());
  m.min_recall = 1.0;
  for (std::size_t y = 0; y < L; ++y) {
    if (m.label_support[y] == 0) continue;
    m.per_label_recall[y] =
        static_cast<double>(hits[y]) / static_cast<double>(m.label_support[y]);
    m.min_recall = std::min(m.min_recall, m.per_label_recall[y]);
  }
  m.avg_set_size = static_cast<double>(total_size) / static_cast<double>(m.n);
  return m;
}

std::vector<DomainMetrics> evaluate_domains(const SetPredictor& predictor,
                                            const MultiDomainDataset& data) {
  std::vector<DomainMetrics> out;
  out.reserve(data.num_domains());
  for (const auto& block : data.domains()) {
    out.push_back(evaluate_domain(predictor, block, data.dim(), data.label_space()));
  }
  return out;
}

AggregateMetrics aggregate(std::span<const DomainMetrics> domains, double gamma) {
  if (domains.empty()) throw DataError("cannot aggregate an empty list of domains");
  std::vector<double> recall;
  std::vector<double> size;
  std::size_t successes = 0;
  for (const auto& d : domains) {
    recall.push_back(d.min_recall);
    size.push_back(d.avg_set_size);
    if (meets_recall_target(d.min_recall, gamma)) ++successes;
  }
  AggregateMetrics a;
  a.n_domains = domains.size();
  a.gamma = gamma;
  a.min_recall = quartiles(recall);
  a.avg_set_size = quartiles(size);
  a.success_pct = static_cast<double>(successes) / static_cast<double>(domains.size());
  return a;
}

MethodReport make_report(std::string method, std::vector<DomainMetrics> domains, double gamma) {
  MethodReport r;
  r.method = std::move(method);
  if (!domains.empty()) r.aggregate = aggregate(domains, gamma);
  r.aggregate.gamma = gamma;
  r.domains = std::move(domains);
  return r;
}

void write_per_domain_csv(std::ostream& out, std::span<const MethodReport> reports,
                          int num_labels) {
  out << "method,domain_id,n,min_recall,avg_set_size";
  for (int y = 0; y < num_labels; ++y) out << ",recall_" << y;
  out << '\n';
  for (const auto& r : reports) {
    for (const auto& d : r.domains) {
      out << r.method << ',' << d.domain_id << ',' << d.n << ',' << format_double(d.min_recall)
          << ',' << format_double(d.avg_set_size);
      for (double v : d.per_label_recall) {
        out << ',';
        if (!std::isnan(v)) out << format_double(v);
      }
      out << '\n';
    }
  }
}

void write_aggregate_csv(std::ostream& out, std::span<const MethodReport> reports) {
  out << "method,n_domains,gamma,min_recall_q25,min_recall_median,min_recall_q75,"
         "avg_set_size_q25,avg_set_size_median,avg_set_size_q75,success_pct\n";
  for (const auto& r : reports) {
    if (r.domains.empty()) continue;
    const auto& a = r.aggregate;
    out << r.method << ',' << a.n_domains << ',' << format_double(a.gamma) << ','
        << format_double(a.min_recall.q25) << ',' << format_double(a.min_recall.median) << ','
        << format_double(a.min_recall.q75) << ',' << format_double(a.avg_set_size.q25) << ','
        << format_double(a.avg_set_size.median) << ',' << format_double(a.avg_set_size.q75)
        << ',' << format_double(a.success_pct) << '\n';
  }
}

void write_crossplot_csv(std::ostream& out, std::span<const MethodReport> reports) {
  out << "method,x_q25,x_median,x_q75,y_q25,y_median,y_q75\n";
  for (const auto& r : reports) {
    if (r.domains.empty()) continue;
    const auto& a = r.aggregate;
    out << r.method << ',' << format_double(a.avg_set_size.q25) << ','
        << format_double(a.avg_set_size.median) << ',' << format_double(a.avg_set_size.q75)
        << ',' << format_double(a.min_recall.q25) << ',' << format_double(a.min_recall.median)
        << ',' << format_double(a.min_recall.q75) << '\n';
  }
}

namespace {

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& fn) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  fn(out);
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace

void emit_report(const std::filesystem::path& dir, std::span<const MethodReport> reports,
                 int num_labels) {
  std::filesystem::create_directories(dir);
  write_file(dir / "per_domain.csv",
             [&](std::ostream& o) { write_per_domain_csv(o, reports, num_labels); });
  write_file(dir / "aggregate.csv", [&](std::ostream& o) { write_aggregate_csv(o, reports); });
  write_file(dir / "crossplot.csv", [&](std::ostream& o) { write_crossplot_csv(o, reports); });
}

std::vector<AggregateRow> read_aggregate_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<AggregateRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 10) throw DataError("malformed aggregate row in " + path.string());
    AggregateRow r;
    r.method = cells[0];
    auto& m = r.metrics;
    m.n_domains = static_cast<std::size_t>(parse_int(cells[1], "n_domains"));
    m.gamma = parse_double(cells[2], "gamma");
    m.min_recall = {parse_double(cells[3], "q25"), parse_double(cells[4], "median"),
                    parse_double(cells[5], "q75")};
    m.avg_set_size = {parse_double(cells[6], "q25"), parse_double(cells[7], "median"),
                      parse_double(cells[8], "q75")};
    m.success_pct = parse_double(cells[9], "success_pct");
    rows.push_back(std::move(r));
  }
  return rows;
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd r;
  if (values.empty()) return r;
  r.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return r;
}

std::vector<SeedSummaryRow> summarize_seeds(
    const std::vector<std::vector<AggregateRow>>& per_seed) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const AggregateMetrics*>> by_method;
  for (const auto& seed : per_seed) {
    for (const auto& row : seed) {
      auto [it, inserted] = by_method.try_emplace(row.method);
      if (inserted) order.push_back(row.method);
      it->second.push_back(&row.metrics);
    }
  }
  std::vector<SeedSummaryRow> out;
  for (const auto& method : order) {
    const auto& ms = by_method[method];
    std::vector<double> recall;
    std::vector<double> size;
    std::vector<double> success;
    for (const auto* m : ms) {
      recall.push_back(m->min_recall.median);
      size.push_back(m->avg_set_size.median);
      success.push_back(m->success_pct);
    }
    out.push_back({method, ms.size(), mean_std(recall), mean_std(size), mean_std(success)});
  }
  return out;
}

void write_summary_csv(std::ostream& out, std::span<const SeedSummaryRow> rows) {
  out << "method,n_seeds,median_min_recall_mean,median_min_recall_std,"
         "median_avg_set_size_mean,median_avg_set_size_std,success_pct_mean,success_pct_std\n";
  for (const auto& r : rows) {
    out << r.method << ',' << r.n_seeds << ',' << format_double(r.median_min_recall.mean) << ','
        << format_double(r.median_min_recall.std) << ','
        << format_double(r.median_avg_set_size.mean) << ','
        << format_double(r.median_avg_set_size.std) << ',' << format_double(r.success_pct.mean)
        << ',' << format_double(r.success_pct.std) << '\n';
  }
}

}  // namespace setcover
