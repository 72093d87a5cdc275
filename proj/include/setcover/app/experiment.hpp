#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "setcover/erm.hpp"
#include "setcover/evaluation.hpp"
#include "setcover/kv_config.hpp"
#include "setcover/setcover.hpp"
#include "setcover/synthetic.hpp"

namespace setcover::app {

enum class Method { erm, setcover, robust_conformal, pooling_trainc, pooling_cvc };

std::string to_string(Method m);
Method parse_method(const std::string& name);

struct ExperimentConfig {
  /// Synthetic data is regenerated per seed; CSV data is shared by all seeds.
  std::optional<SyntheticConfig> synthetic = SyntheticConfig::benchmark_10d();
  std::filesystem::path train_csv;
  std::filesystem::path test_csv;

  std::vector<Method> methods{Method::erm, Method::setcover, Method::robust_conformal,
                              Method::pooling_trainc};
  double gamma = 0.1;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::filesystem::path output_dir = "results";
  ErmConfig erm;
  SetCoverConfig setcover;
  std::size_t cvc_folds = 5;
  std::size_t threads = 1;

  /// Echo of the flat configuration, stored in the manifest.
  KeyValueConfig source;

  void validate() const;
};

/// Keys: methods, gamma, seeds, output_dir, cvc_folds, threads,
/// data.source (synthetic | csv), data.train_csv, data.test_csv,
/// synthetic.* (see synthetic_config_from), erm.*, setcover.*.
ExperimentConfig experiment_config_from(const KeyValueConfig& kv);

struct SeedOutcome {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::string erm_checkpoint_hash;  // empty when no ERM model was trained
  std::vector<MethodReport> reports;
};

struct ExperimentOutcome {
  std::vector<SeedOutcome> seeds;
  std::vector<SeedSummaryRow> summary;
  std::size_t failed() const;
};

/// Runs every seed, writes seed_<s>/{per_domain,aggregate,crossplot}.csv,
/// model files, summary.csv and manifest.json under output_dir. A failing
/// seed is logged and skipped.
ExperimentOutcome run_experiment(const ExperimentConfig& config, std::ostream& log);

/// FNV-1a 64-bit hash of a file's bytes, as 16 hex digits.
std::string file_hash(const std::filesystem::path& path);

}  // namespace setcover::app
