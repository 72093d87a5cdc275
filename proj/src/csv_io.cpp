#include "setcover/csv_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "setcover/error.hpp"
#include "setcover/kv_config.hpp"

namespace setcover {
namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

std::string format_double(double value) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

MultiDomainDataset read_dataset_csv(std::istream& in, int num_labels) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("dataset CSV is missing its header");
  const auto header = split_row(line);
  if (header.size() < 3 || header[0] != "domain_id" || header[1] != "label") {
    throw DataError("dataset CSV header must start with domain_id,label,f0");
  }
  const std::size_t dim = header.size() - 2;
  for (std::size_t k = 0; k < dim; ++k) {
    if (header[k + 2] != "f" + std::to_string(k)) {
      throw DataError("unexpected feature column '" + header[k + 2] + "'");
    }
  }

  std::vector<DomainBlock> blocks;
  std::map<int, std::size_t> block_of;
  int max_label = -1;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_row(line);
    const std::string where = "line " + std::to_string(line_no);
    if (cells.size() != dim + 2) {
      throw DataError(where + ": expected " + std::to_string(dim + 2) + " columns, got " +
                      std::to_string(cells.size()));
    }
    std::int64_t domain_id = 0;
    std::int64_t label = 0;
    try {
      domain_id = parse_int(cells[0], "domain_id");
      label = parse_int(cells[1], "label");
    } catch (const ConfigError& e) {
      throw DataError(where + ": " + e.what());
    }
    if (domain_id < 0) throw DataError(where + ": negative domain_id");
    if (label < 0 || (num_labels > 0 && label >= num_labels)) {
      throw DataError(where + ": unknown label " + std::to_string(label));
    }
    auto [it, inserted] = block_of.try_emplace(static_cast<int>(domain_id), blocks.size());
    if (inserted) {
      blocks.emplace_back();
      blocks.back().domain_id = static_cast<int>(domain_id);
    }
    auto& block = blocks[it->second];
    block.labels.push_back(static_cast<int>(label));
    for (std::size_t k = 0; k < dim; ++k) {
      try {
        block.features.push_back(parse_double(cells[k + 2], "f" + std::to_string(k)));
      } catch (const ConfigError& e) {
        throw DataError(where + ": " + e.what());
      }
    }
    max_label = std::max(max_label, static_cast<int>(label));
  }
  if (blocks.empty()) throw DataError("dataset CSV has no instances");

  const int labels = num_labels > 0 ? num_labels : std::max(2, max_label + 1);
  MultiDomainDataset dataset(dim, LabelSpace(labels));
  for (auto& b : blocks) dataset.add_domain(std::move(b));
  return dataset;
}

MultiDomainDataset load_csv(const std::filesystem::path& path, int num_labels) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset " + path.string());
  return read_dataset_csv(in, num_labels);
}

void write_dataset_csv(std::ostream& out, const MultiDomainDataset& dataset) {
  out << "domain_id,label";
  for (std::size_t k = 0; k < dataset.dim(); ++k) out << ",f" << k;
  out << '\n';
  const std::size_t d = dataset.dim();
  for (const auto& block : dataset.domains()) {
    for (std::size_t r = 0; r < block.size(); ++r) {
      out << block.domain_id << ',' << block.labels[r];
      for (double v : block.row(r, d)) out << ',' << format_double(v);
      out << '\n';
    }
  }
}

void save_csv(const MultiDomainDataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write dataset " + path.string());
  write_dataset_csv(out, dataset);
  if (!out) throw Error("failed writing dataset " + path.string());
}

}  // namespace setcover
