#include "setcover/app/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "setcover/conformal.hpp"
#include "setcover/csv_io.hpp"
#include "setcover/error.hpp"

namespace setcover::app {

std::string to_string(Method m) {
  switch (m) {
    case Method::erm: return "erm";
    case Method::setcover: return "setcover";
    case Method::robust_conformal: return "robust_conformal";
    case Method::pooling_trainc: return "pooling_trainc";
    case Method::pooling_cvc: return "pooling_cvc";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  for (Method m : {Method::erm, Method::setcover, Method::robust_conformal,
                   Method::pooling_trainc, Method::pooling_cvc}) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown method '" + name + "'");
}

void ExperimentConfig::validate() const {
  if (methods.empty()) throw ConfigError("at least one method is required");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
  if (output_dir.empty()) throw ConfigError("output_dir is required");
  if (threads == 0) throw ConfigError("threads must be positive");
  if (!synthetic && (train_csv.empty() || test_csv.empty())) {
    throw ConfigError("csv data needs data.train_csv and data.test_csv");
  }
  if (synthetic) synthetic->validate();
  erm.validate();
  setcover.validate();
  if (std::find(methods.begin(), methods.end(), Method::pooling_cvc) != methods.end() &&
      cvc_folds < 2) {
    throw ConfigError("cvc_folds must be at least 2");
  }
}

ExperimentConfig experiment_config_from(const KeyValueConfig& kv) {
  ExperimentConfig c;
  c.source = kv;
  if (kv.has("methods")) {
    c.methods.clear();
    for (const auto& name : kv.get_strings("methods")) c.methods.push_back(parse_method(name));
  }
  c.gamma = kv.get_double("gamma", c.gamma);
  if (kv.has("seeds")) {
    c.seeds.clear();
    for (const auto& s : kv.get_strings("seeds")) {
      const auto v = parse_int(s, "seeds");
      if (v < 0) throw ConfigError("seeds must be non-negative");
      c.seeds.push_back(static_cast<std::uint64_t>(v));
    }
  }
  c.output_dir = kv.get_string("output_dir", c.output_dir.string());
  const auto folds = kv.get_int("cvc_folds", static_cast<std::int64_t>(c.cvc_folds));
  const auto threads = kv.get_int("threads", static_cast<std::int64_t>(c.threads));
  if (folds < 0 || threads < 0) throw ConfigError("cvc_folds and threads must be non-negative");
  c.cvc_folds = static_cast<std::size_t>(folds);
  c.threads = static_cast<std::size_t>(threads);

  const std::string source = kv.get_string("data.source", "synthetic");
  if (source == "synthetic") {
    c.synthetic = synthetic_config_from(kv.section("synthetic"));
  } else if (source == "csv") {
    c.synthetic.reset();
    c.train_csv = kv.get_string("data.train_csv", "");
    c.test_csv = kv.get_string("data.test_csv", "");
  } else {
    throw ConfigError("data.source must be synthetic or csv");
  }
  c.erm = erm_config_from(kv.section("erm"));
  KeyValueConfig sc = kv.section("setcover");
  if (!sc.has("gamma")) sc.set("gamma", kv.get_string("gamma", "0.1"));
  c.setcover = setcover_config_from(sc);
  c.validate();
  return c;
}

std::size_t ExperimentOutcome::failed() const {
  return static_cast<std::size_t>(
      std::count_if(seeds.begin(), seeds.end(), [](const SeedOutcome& s) { return !s.ok; }));
}

std::string file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

namespace {

bool wants(const ExperimentConfig& c, Method m) {
  return std::find(c.methods.begin(), c.methods.end(), m) != c.methods.end();
}

struct SeedData {
  MultiDomainDataset train;
  MultiDomainDataset test;
};

SeedData load_seed_data(const ExperimentConfig& c, std::uint64_t seed) {
  if (c.synthetic) {
    SyntheticConfig sc = *c.synthetic;
    sc.seed = seed;
    auto data = generate_synthetic(sc);
    return {std::move(data.train), std::move(data.test)};
  }
  auto train = load_csv(c.train_csv);
  auto test = load_csv(c.test_csv, train.num_labels());
  if (train.dim() != test.dim()) throw DataError("train and test CSVs differ in dimension");
  return {std::move(train), std::move(test)};
}

SeedOutcome run_seed(const ExperimentConfig& c, std::uint64_t seed, std::ostream& log,
                     std::mutex& log_mutex) {
  auto say = [&](const std::string& msg) {
    std::lock_guard<std::mutex> lock(log_mutex);
    log << "[seed " << seed << "] " << msg << '\n';
  };
  SeedOutcome out;
  out.seed = seed;
  const auto dir = c.output_dir / ("seed_" + std::to_string(seed));
  try {
    std::filesystem::create_directories(dir);
    const SeedData data = load_seed_data(c, seed);
    const int labels = data.train.num_labels();
    say("data: " + std::to_string(data.train.num_domains()) + " train / " +
        std::to_string(data.test.num_domains()) + " test domains");

    auto evaluate = [&](Method m, const SetPredictor& predictor) {
      out.reports.push_back(
          make_report(to_string(m), evaluate_domains(predictor, data.test), c.gamma));
    };

    const bool need_erm = wants(c, Method::erm) || wants(c, Method::robust_conformal) ||
                          wants(c, Method::pooling_trainc) || wants(c, Method::pooling_cvc);
    if (need_erm) {
      ErmConfig ec = c.erm;
      ec.seed = seed;
      const auto erm = train_erm(data.train, ec);
      const auto path = dir / "erm.json";
      save_scorer(erm.classifier.net, path);
      out.erm_checkpoint_hash = file_hash(path);
      say("erm trained, checkpoint " + out.erm_checkpoint_hash);
      // Conformal rows use the checkpoint as written, so they share its hash.
      const SoftmaxClassifier base{load_scorer(path)};
      if (wants(c, Method::erm)) {
        evaluate(Method::erm, [&](std::span<const double> x) {
          LabelSet s(labels);
          s.insert(erm_predict_singleton(base, x));
          return s;
        });
      }
      if (wants(c, Method::robust_conformal)) {
        const auto table = calibrate_robust(base, data.train, c.gamma);
        save_thresholds(table, dir / "thresholds_robust.json");
        evaluate(Method::robust_conformal,
                 [&](std::span<const double> x) { return predict_robust(base, table, x); });
      }
      if (wants(c, Method::pooling_trainc)) {
        const auto table = calibrate_pooling_trainc(base, data.train, c.gamma);
        save_thresholds(table, dir / "thresholds_trainc.json");
        evaluate(Method::pooling_trainc,
                 [&](std::span<const double> x) { return predict_pooling(base, table, x); });
      }
      if (wants(c, Method::pooling_cvc)) {
        const auto table = calibrate_pooling_cvc(data.train, c.gamma, c.cvc_folds, ec);
        save_thresholds(table, dir / "thresholds_cvc.json");
        evaluate(Method::pooling_cvc,
                 [&](std::span<const double> x) { return predict_pooling(base, table, x); });
      }
    }
    if (wants(c, Method::setcover)) {
      SetCoverConfig sc = c.setcover;
      sc.seed = seed;
      sc.gamma = c.gamma;
      const auto result = train_setcover(data.train, sc);
      save_scorer(result.scorer, dir / "setcover.json");
      std::ofstream trace(dir / "setcover_trace.csv");
      write_trace_csv(trace, result.trace);
      evaluate(Method::setcover,
               [&](std::span<const double> x) { return predict_set(result.scorer, x); });
      say("setcover trained");
    }

    // Keep report rows in the configured method order.
    std::vector<MethodReport> ordered;
    for (Method m : c.methods) {
      for (auto& r : out.reports) {
        if (r.method == to_string(m)) ordered.push_back(r);
      }
    }
    out.reports = std::move(ordered);
    emit_report(dir, out.reports, labels);
    out.ok = true;
    say("done");
  } catch (const std::exception& e) {
    out.ok = false;
    out.error = e.what();
    out.reports.clear();
    say(std::string("failed: ") + e.what());
  }
  return out;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  std::filesystem::create_directories(config.output_dir);
  ExperimentOutcome outcome;
  outcome.seeds.resize(config.seeds.size());
  std::mutex log_mutex;

  const std::size_t workers = std::min(config.threads, config.seeds.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < config.seeds.size(); ++i) {
      outcome.seeds[i] = run_seed(config, config.seeds[i], log, log_mutex);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < config.seeds.size(); i = next++) {
          outcome.seeds[i] = run_seed(config, config.seeds[i], log, log_mutex);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  // The summary is recomputed from the aggregate files on disk.
  std::vector<std::vector<AggregateRow>> per_seed;
  for (const auto& s : outcome.seeds) {
    if (!s.ok) continue;
    per_seed.push_back(read_aggregate_csv(config.output_dir / ("seed_" + std::to_string(s.seed)) /
                                          "aggregate.csv"));
  }
  outcome.summary = summarize_seeds(per_seed);
  {
    std::ofstream out(config.output_dir / "summary.csv");
    if (!out) throw Error("cannot write summary.csv");
    write_summary_csv(out, outcome.summary);
  }

  nlohmann::json manifest;
  manifest["timestamp"] = utc_timestamp();
  manifest["config"] = config.source.entries();
  manifest["gamma"] = config.gamma;
  std::vector<std::string> methods;
  for (Method m : config.methods) methods.push_back(to_string(m));
  manifest["methods"] = methods;
  nlohmann::json seeds = nlohmann::json::array();
  for (const auto& s : outcome.seeds) {
    nlohmann::json j;
    j["seed"] = s.seed;
    j["status"] = s.ok ? "ok" : "failed";
    if (!s.ok) j["error"] = s.error;
    if (!s.erm_checkpoint_hash.empty()) {
      j["erm_checkpoint"] = "seed_" + std::to_string(s.seed) + "/erm.json";
      j["erm_checkpoint_fnv1a"] = s.erm_checkpoint_hash;
      std::vector<std::string> shared;
      for (const auto& r : s.reports) {
        if (r.method != "setcover") {
          shared.push_back(r.method);
        }
      }
      j["methods_from_erm_checkpoint"] = shared;
    }
    seeds.push_back(std::move(j));
  }
  manifest["seeds"] = seeds;
  std::ofstream out(config.output_dir / "manifest.json");
  if (!out) throw Error("cannot write manifest.json");
  out << manifest.dump(2) << '\n';
  return outcome;
}

}  // namespace setcover::app
