#pragma once

#include <cstdint>
#include <vector>

namespace setcover {

/// Subset of the label space {0, ..., universe-1}.
class LabelSet {
 public:
  LabelSet() = default;
  explicit LabelSet(int universe) : member_(static_cast<std::size_t>(universe), 0) {}

  static LabelSet full(int universe) {
    LabelSet s(universe);
    for (auto& m : s.member_) m = 1;
    return s;
  }
  static LabelSet of(int universe, std::initializer_list<int> labels) {
    LabelSet s(universe);
    for (int y : labels) s.insert(y);
    return s;
  }

  void insert(int label) { member_.at(static_cast<std::size_t>(label)) = 1; }
  void erase(int label) { member_.at(static_cast<std::size_t>(label)) = 0; }
  bool contains(int label) const { return member_.at(static_cast<std::size_t>(label)) != 0; }
  int universe() const { return static_cast<int>(member_.size()); }
  int size() const {
    int n = 0;
    for (auto m : member_) n += m;
    return n;
  }
  bool empty() const { return size() == 0; }
  std::vector<int> labels() const {
    std::vector<int> out;
    for (std::size_t y = 0; y < member_.size(); ++y) {
      if (member_[y]) out.push_back(static_cast<int>(y));
    }
    return out;
  }

  friend bool operator==(const LabelSet&, const LabelSet&) = default;

 private:
  std::vector<std::uint8_t> member_;
};

}  // namespace setcover
