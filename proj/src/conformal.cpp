#include "setcover/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "setcover/error.hpp"
#include "setcover/recall.hpp"

namespace setcover {
std::vector<double> ThresholdTable::effective_thresholds() const {
  const auto L = static_cast<std::size_t>(num_labels);
  if (mode == ThresholdMode::pooled) {
    if (pooled.size() != L) throw DataError("pooled threshold table has wrong length");
    return pooled;
  }
  std::vector<double> t(L, std::numeric_limits<double>::infinity());
  for (const auto& r : robust) {
    auto& slot = t.at(static_cast<std::size_t>(r.label));
    slot = std::min(slot, r.threshold);
  }
  return t;
}

std::size_t required_count(std::size_t n, double gamma) {
  if (n == 0) return 0;
  auto meets = [&](std::size_t c) {
    return meets_recall_target(static_cast<double>(c) / static_cast<double>(n), gamma);
  };
  auto k = static_cast<std::size_t>(std::ceil((1.0 - gamma) * static_cast<double>(n)));
  k = std::clamp<std::size_t>(k, 1, n);
  while (k > 1 && meets(k - 1)) --k;
  while (k < n && !meets(k)) ++k;
  return k;
}

double robust_threshold(std::span<const double> scores, double gamma) {
  if (scores.empty()) throw DataError("cannot calibrate an empty group");
  std::vector<double> s(scores.begin(), scores.end());
  const std::size_t k = required_count(s.size(), gamma);
  std::nth_element(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(k - 1), s.end(),
                   std::greater<>());
  return s[k - 1];
}

double pooled_threshold(const std::vector<std::vector<double>>& per_domain_scores,
                        double gamma) {
  struct Entry {
    double score;
    std::size_t domain;
  };
  std::vector<Entry> entries;
  std::vector<std::size_t> sizes;
  std::vector<std::size_t> active;
  for (std::size_t e = 0; e < per_domain_scores.size(); ++e) {
    const auto& s = per_domain_scores[e];
    if (s.empty()) continue;
    for (double v : s) entries.push_back({v, active.size()});
    active.push_back(e);
    sizes.push_back(s.size());
  }
  if (entries.empty()) throw DataError("cannot calibrate a label with no instances");
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.score > b.score; });
  if (gamma <= 0.0) return entries.back().score - 1.0;

  const double domains = static_cast<double>(active.size());
  std::vector<std::size_t> counts(active.size(), 0);
  std::size_t i = 0;
  while (i < entries.size()) {
    const double candidate = entries[i].score;
    while (i < entries.size() && entries[i].score == candidate) {
      ++counts[entries[i].domain];
      ++i;
    }
    double mean = 0.0;
    for (std::size_t e = 0; e < counts.size(); ++e) {
      mean += static_cast<double>(counts[e]) / static_cast<double>(sizes[e]);
    }
    mean /= domains;
    if (meets_recall_target(mean, gamma)) return candidate;
  }
  return entries.back().score;
}

std::vector<std::vector<std::vector<double>>> group_scores(const Scorer& model,
                                                           const MultiDomainDataset& data) {
  const auto L = static_cast<std::size_t>(data.num_labels());
  std::vector<std::vector<std::vector<double>>> out(data.num_domains(),
                                                    std::vector<std::vector<double>>(L));
  std::vector<double> f(L);
  ScorerWorkspace ws;
  for (std::size_t b = 0; b < data.num_domains(); ++b) {
    const auto& block = data.domain(b);
    for (std::size_t r = 0; r < block.size(); ++r) {
      model.forward(block.row(r, data.dim()), f, ws);
      const auto y = static_cast<std::size_t>(block.labels[r]);
      out[b][y].push_back(f[y]);
    }
  }
  return out;
}

ThresholdTable calibrate_robust(const SoftmaxClassifier& classifier,
                                const MultiDomainDataset& data, double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
  ThresholdTable table;
  table.mode = ThresholdMode::robust;
  table.variant = "robust";
  table.gamma = gamma;
  table.num_labels = data.num_labels();
  const auto scores = group_scores(classifier.net, data);
  for (std::size_t b = 0; b < data.num_domains(); ++b) {
    for (int y = 0; y < data.num_labels(); ++y) {
      const auto& s = scores[b][static_cast<std::size_t>(y)];
      if (s.empty()) continue;
      table.robust.push_back({data.domain(b).domain_id, y, robust_threshold(s, gamma)});
    }
  }
  return table;
}

namespace {

ThresholdTable pooled_from_scores(
    const std::vector<std::vector<std::vector<double>>>& scores, int num_labels, double gamma,
    const std::string& variant) {
  ThresholdTable table;
  table.mode = ThresholdMode::pooled;
  table.variant = variant;
  table.gamma = gamma;
  table.num_labels = num_labels;
  for (int y = 0; y < num_labels; ++y) {
    std::vector<std::vector<double>> per_domain;
    per_domain.reserve(scores.size());
    for (const auto& by_label : scores) per_domain.push_back(by_label[static_cast<std::size_t>(y)]);
    table.pooled.push_back(pooled_threshold(per_domain, gamma));
  }
  return table;
}

}  // namespace

ThresholdTable calibrate_pooling_trainc(const SoftmaxClassifier& classifier,
                                        const MultiDomainDataset& data, double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
  return pooled_from_scores(group_scores(classifier.net, data), data.num_labels(), gamma,
                            "trainc");
}

ThresholdTable calibrate_pooling_cvc(const MultiDomainDataset& data, double gamma,
                                     std::size_t folds, const ErmConfig& erm) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
  if (folds < 2) throw ConfigError("cvc needs at least 2 folds");
  if (data.num_domains() < folds) {
    throw ConfigError("cvc needs at least as many domains (" +
                      std::to_string(data.num_domains()) + ") as folds (" +
                      std::to_string(folds) + ")");
  }
  std::vector<std::size_t> order(data.num_domains());
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_rng(erm.seed, 7);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::size_t> fold_of(data.num_domains());
  for (std::size_t i = 0; i < order.size(); ++i) fold_of[order[i]] = i % folds;

  std::vector<std::vector<std::vector<double>>> held_out;
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> train_blocks;
    std::vector<std::size_t> test_blocks;
    for (std::size_t b = 0; b < data.num_domains(); ++b) {
      (fold_of[b] == f ? test_blocks : train_blocks).push_back(b);
    }
    const auto model = train_erm(data.select_domains(train_blocks), erm);
    const auto scores = group_scores(model.classifier.net, data.select_domains(test_blocks));
    held_out.insert(held_out.end(), scores.begin(), scores.end());
  }
  return pooled_from_scores(held_out, data.num_labels(), gamma, "cvc");
}

LabelSet threshold_set(std::span<const double> scores, std::span<const double> thresholds) {
  LabelSet s(static_cast<int>(scores.size()));
  for (std::size_t y = 0; y < scores.size(); ++y) {
    if (scores[y] >= thresholds[y]) s.insert(static_cast<int>(y));
  }
  return s;
}

LabelSet predict_robust(const SoftmaxClassifier& classifier, const ThresholdTable& table,
                        std::span<const double> x) {
  if (table.mode != ThresholdMode::robust) throw ConfigError("threshold table is not robust");
  return threshold_set(classifier.logits(x), table.effective_thresholds());
}

LabelSet predict_pooling(const SoftmaxClassifier& classifier, const ThresholdTable& table,
                         std::span<const double> x) {
  if (table.mode != ThresholdMode::pooled) throw ConfigError("threshold table is not pooled");
  return threshold_set(classifier.logits(x), table.pooled);
}

nlohmann::json thresholds_to_json(const ThresholdTable& table) {
  nlohmann::json j;
  j["mode"] = table.mode == ThresholdMode::robust ? "robust" : "pooled";
  j["variant"] = table.variant;
  j["gamma"] = table.gamma;
  j["num_labels"] = table.num_labels;
  if (table.mode == ThresholdMode::robust) {
    auto arr = nlohmann::json::array();
    for (const auto& r : table.robust) {
      arr.push_back({{"domain_id", r.domain_id}, {"label", r.label}, {"threshold", r.threshold}});
    }
    j["thresholds"] = std::move(arr);
  } else {
    j["thresholds"] = table.pooled;
  }
  return j;
}

ThresholdTable thresholds_from_json(const nlohmann::json& j) {
  try {
    ThresholdTable t;
    const auto mode = j.at("mode").get<std::string>();
    t.variant = j.value("variant", std::string{});
    t.gamma = j.at("gamma").get<double>();
    t.num_labels = j.at("num_labels").get<int>();
    if (mode == "robust") {
      t.mode = ThresholdMode::robust;
      for (const auto& r : j.at("thresholds")) {
        t.robust.push_back({r.at("domain_id").get<int>(), r.at("label").get<int>(),
                            r.at("threshold").get<double>()});
      }
    } else if (mode == "pooled") {
      t.mode = ThresholdMode::pooled;
      t.pooled = j.at("thresholds").get<std::vector<double>>();
      if (t.pooled.size() != static_cast<std::size_t>(t.num_labels)) {
        throw DataError("pooled threshold count does not match num_labels");
      }
    } else {
      throw DataError("unknown threshold mode '" + mode + "'");
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed threshold table: ") + e.what());
  }
}

void save_thresholds(const ThresholdTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write thresholds " + path.string());
  out << thresholds_to_json(table).dump(1) << '\n';
}

ThresholdTable load_thresholds(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open thresholds " + path.string());
  try {
    return thresholds_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("thresholds file is not valid JSON: " + std::string(e.what()));
  }
}

}  // namespace setcover
