#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "setcover/dataset.hpp"
#include "setcover/kv_config.hpp"
#include "setcover/scorer.hpp"

namespace setcover {

struct ErmConfig {
  std::size_t batch_size = 128;
  double learning_rate = 0.001;
  std::size_t epochs = 30;
  std::uint64_t seed = 0;
  Architecture architecture = Architecture::mlp;
  std::size_t hidden = 0;  // 0 selects default_hidden(dim)

  void validate() const;
};

/// Keys: batch_size, learning_rate, epochs, seed, architecture, hidden.
ErmConfig erm_config_from(const KeyValueConfig& kv, ErmConfig base = {});

struct ErmResult {
  SoftmaxClassifier classifier;
  std::vector<double> epoch_loss;  // mean batch loss per epoch
};

/// Initial parameters for a model on `dataset` (linear: zeros).
Scorer initial_scorer(Architecture arch, std::size_t dim, int num_labels, std::size_t hidden,
                      std::uint64_t seed);

/// One permutation of every instance per epoch, consumed in consecutive batches.
std::vector<std::vector<InstanceRef>> epoch_batches(const std::vector<InstanceRef>& all,
                                                    std::size_t batch_size, Rng& rng);

/// Plain mini-batch SGD on mean cross-entropy over the pooled, shuffled data.
ErmResult train_erm(const MultiDomainDataset& dataset, const ErmConfig& config);

}  // namespace setcover
