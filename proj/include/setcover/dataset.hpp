#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace setcover {

/// The finite label set {0, ..., num_labels - 1}.
class LabelSpace {
 public:
  LabelSpace() = default;
  explicit LabelSpace(int num_labels);

  int size() const { return num_labels_; }
  bool contains(int label) const { return label >= 0 && label < num_labels_; }

  friend bool operator==(const LabelSpace&, const LabelSpace&) = default;

 private:
  int num_labels_ = 2;
};

/// Read-only view of one labelled instance.
struct InstanceView {
  std::span<const double> features;
  int label;
  int domain_id;
};

/// All instances observed from a single domain. Features are row-major n x d.
struct DomainBlock {
  int domain_id = 0;
  std::vector<double> features;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  std::span<const double> row(std::size_t i, std::size_t dim) const {
    return {features.data() + i * dim, dim};
  }

  friend bool operator==(const DomainBlock&, const DomainBlock&) = default;
};

/// Position of an instance inside a dataset: (block index, row within block).
struct InstanceRef {
  std::size_t block;
  std::size_t row;
};

/// Labelled data grouped by domain. Blocks are non-empty and domain ids unique.
class MultiDomainDataset {
 public:
  MultiDomainDataset() = default;
  MultiDomainDataset(std::size_t dim, LabelSpace labels);

  /// Appends a domain block after validating it against the dataset shape.
  void add_domain(DomainBlock block);

  std::size_t dim() const { return dim_; }
  const LabelSpace& label_space() const { return labels_; }
  int num_labels() const { return labels_.size(); }
  std::size_t num_domains() const { return blocks_.size(); }
  std::size_t num_instances() const;
  bool empty() const { return blocks_.empty(); }

  const std::vector<DomainBlock>& domains() const { return blocks_; }
  const DomainBlock& domain(std::size_t block) const { return blocks_.at(block); }
  /// Block index of `domain_id`, or -1 when absent.
  std::ptrdiff_t find_domain(int domain_id) const;
  std::vector<int> domain_ids() const;

  InstanceView instance(InstanceRef ref) const;
  /// Every instance position, blocks in order.
  std::vector<InstanceRef> all_instances() const;

  /// Sub-dataset holding the listed blocks (by block index), order preserved.
  MultiDomainDataset select_domains(std::span<const std::size_t> blocks) const;

  friend bool operator==(const MultiDomainDataset&, const MultiDomainDataset&) = default;

 private:
  std::size_t dim_ = 0;
  LabelSpace labels_;
  std::vector<DomainBlock> blocks_;
};

/// Rows of each (domain, label) group: groups[block][label] lists row indices.
class GroupIndex {
 public:
  const std::vector<std::size_t>& group(std::size_t block, int label) const {
    return groups_.at(block).at(static_cast<std::size_t>(label));
  }
  std::size_t num_blocks() const { return groups_.size(); }
  int num_labels() const { return num_labels_; }
  /// Total number of label-`label` instances over all domains (|G_y|).
  std::size_t label_count(int label) const;

 private:
  friend GroupIndex build_group_index(const MultiDomainDataset&);
  int num_labels_ = 0;
  std::vector<std::vector<std::vector<std::size_t>>> groups_;
};

GroupIndex build_group_index(const MultiDomainDataset& dataset);

/// Drops every (domain, label) group with fewer than `threshold` instances,
/// then drops domains left empty.
MultiDomainDataset filter_min_group_size(const MultiDomainDataset& dataset,
                                         std::size_t threshold);

}  // namespace setcover
