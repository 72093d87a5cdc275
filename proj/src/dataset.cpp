#include "setcover/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "setcover/error.hpp"

namespace setcover {

LabelSpace::LabelSpace(int num_labels) : num_labels_(num_labels) {
  if (num_labels < 2) {
    throw ConfigError("label space needs at least 2 labels, got " +
                      std::to_string(num_labels));
  }
}

MultiDomainDataset::MultiDomainDataset(std::size_t dim, LabelSpace labels)
    : dim_(dim), labels_(labels) {
  if (dim == 0) throw ConfigError("dataset dimension must be positive");
}

void MultiDomainDataset::add_domain(DomainBlock block) {
  if (block.domain_id < 0) {
    throw DataError("negative domain id " + std::to_string(block.domain_id));
  }
  if (block.labels.empty()) {
    throw DataError("domain " + std::to_string(block.domain_id) + " is empty");
  }
  if (block.features.size() != block.labels.size() * dim_) {
    throw DataError("domain " + std::to_string(block.domain_id) +
                    ": feature count does not match dimension");
  }
  for (int y : block.labels) {
    if (!labels_.contains(y)) {
      throw DataError("unknown label " + std::to_string(y) + " in domain " +
                      std::to_string(block.domain_id));
    }
  }
  if (find_domain(block.domain_id) >= 0) {
    throw DataError("duplicate domain id " + std::to_string(block.domain_id));
  }
  blocks_.push_back(std::move(block));
}

std::size_t MultiDomainDataset::num_instances() const {
  std::size_t n = 0;
  for (const auto& b : blocks_) n += b.size();
  return n;
}

std::ptrdiff_t MultiDomainDataset::find_domain(int domain_id) const {
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (blocks_[i].domain_id == domain_id) return static_cast<std::ptrdiff_t>(i);
  }
  return -1;
}

std::vector<int> MultiDomainDataset::domain_ids() const {
  std::vector<int> ids;
  ids.reserve(blocks_.size());
  for (const auto& b : blocks_) ids.push_back(b.domain_id);
  return ids;
}

InstanceView MultiDomainDataset::instance(InstanceRef ref) const {
  const auto& b = blocks_.at(ref.block);
  return {b.row(ref.row, dim_), b.labels.at(ref.row), b.domain_id};
}

std::vector<InstanceRef> MultiDomainDataset::all_instances() const {
  std::vector<InstanceRef> refs;
  refs.reserve(num_instances());
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    for (std::size_t r = 0; r < blocks_[b].size(); ++r) refs.push_back({b, r});
  }
  return refs;
}

MultiDomainDataset MultiDomainDataset::select_domains(
    std::span<const std::size_t> blocks) const {
  MultiDomainDataset out(dim_, labels_);
  for (std::size_t b : blocks) out.add_domain(blocks_.at(b));
  return out;
}

std::size_t GroupIndex::label_count(int label) const {
  std::size_t n = 0;
  for (const auto& per_label : groups_) n += per_label.at(static_cast<std::size_t>(label)).size();
  return n;
}

GroupIndex build_group_index(const MultiDomainDataset& dataset) {
  GroupIndex index;
  index.num_labels_ = dataset.num_labels();
  index.groups_.resize(dataset.num_domains());
  for (std::size_t b = 0; b < dataset.num_domains(); ++b) {
    auto& per_label = index.groups_[b];
    per_label.resize(static_cast<std::size_t>(dataset.num_labels()));
    const auto& labels = dataset.domain(b).labels;
    for (std::size_t r = 0; r < labels.size(); ++r) {
      per_label[static_cast<std::size_t>(labels[r])].push_back(r);
    }
  }
  return index;
}

MultiDomainDataset filter_min_group_size(const MultiDomainDataset& dataset,
                                         std::size_t threshold) {
  MultiDomainDataset out(dataset.dim(), dataset.label_space());
  const auto index = build_group_index(dataset);
  const std::size_t d = dataset.dim();
  for (std::size_t b = 0; b < dataset.num_domains(); ++b) {
    const auto& src = dataset.domain(b);
    DomainBlock kept;
    kept.domain_id = src.domain_id;
    for (std::size_t r = 0; r < src.size(); ++r) {
      if (index.group(b, src.labels[r]).size() < threshold) continue;
      kept.labels.push_back(src.labels[r]);
      auto row = src.row(r, d);
      kept.features.insert(kept.features.end(), row.begin(), row.end());
    }
    if (!kept.labels.empty()) out.add_domain(std::move(kept));
  }
  return out;
}

}  // namespace setcover
