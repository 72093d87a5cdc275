#include "setcover/erm.hpp"

#include <algorithm>

#include "setcover/error.hpp"

namespace setcover {

void ErmConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
}

ErmConfig erm_config_from(const KeyValueConfig& kv, ErmConfig base) {
  auto positive = [&](const char* key, std::size_t fallback) {
    const auto v = kv.get_int(key, static_cast<std::int64_t>(fallback));
    if (v < 0) throw ConfigError(std::string(key) + " must be non-negative");
    return static_cast<std::size_t>(v);
  };
  base.batch_size = positive("batch_size", base.batch_size);
  base.learning_rate = kv.get_double("learning_rate", base.learning_rate);
  base.epochs = positive("epochs", base.epochs);
  base.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<std::int64_t>(base.seed)));
  if (kv.has("architecture")) base.architecture = parse_architecture(kv.get_string("architecture", ""));
  base.hidden = positive("hidden", base.hidden);
  base.validate();
  return base;
}

Scorer initial_scorer(Architecture arch, std::size_t dim, int num_labels, std::size_t hidden,
                      std::uint64_t seed) {
  if (arch == Architecture::linear) return Scorer::linear(dim, num_labels);
  Rng rng = make_rng(seed, 0);
  return Scorer::mlp(dim, num_labels, hidden == 0 ? default_hidden(dim) : hidden, rng);
}

std::vector<std::vector<InstanceRef>> epoch_batches(const std::vector<InstanceRef>& all,
                                                    std::size_t batch_size, Rng& rng) {
  std::vector<InstanceRef> order = all;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<InstanceRef>> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(), start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

ErmResult train_erm(const MultiDomainDataset& dataset, const ErmConfig& config) {
  config.validate();
  if (dataset.empty()) throw DataError("cannot train on an empty dataset");
  ErmResult result;
  Scorer net = initial_scorer(config.architecture, dataset.dim(), dataset.num_labels(),
                              config.hidden, config.seed);
  Rng shuffle_rng = make_rng(config.seed, 1);
  const auto all = dataset.all_instances();
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto batches = epoch_batches(all, config.batch_size, shuffle_rng);
    double total = 0.0;
    for (const auto& batch : batches) {
      const auto step = softmax_loss_and_grad(net, dataset, batch);
      auto p = net.params();
      for (std::size_t i = 0; i < p.size(); ++i) p[i] -= config.learning_rate * step.grad[i];
      total += step.loss;
    }
    result.epoch_loss.push_back(total / static_cast<double>(batches.size()));
  }
  if (!net.all_finite()) throw Error("ERM training diverged (non-finite parameters)");
  result.classifier.net = std::move(net);
  return result;
}

}  // namespace setcover
