#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "setcover/dataset.hpp"

namespace setcover {

/// Dataset CSV: header `domain_id,label,f0,...,f{d-1}`, one instance per row.
/// Rows of a domain need not be contiguous; blocks are ordered by first
/// appearance. Doubles are written in shortest round-trip form.
///
/// `num_labels` <= 0 infers |Y| as max label + 1 (at least 2).
MultiDomainDataset read_dataset_csv(std::istream& in, int num_labels = 0);
MultiDomainDataset load_csv(const std::filesystem::path& path, int num_labels = 0);

void write_dataset_csv(std::ostream& out, const MultiDomainDataset& dataset);
void save_csv(const MultiDomainDataset& dataset, const std::filesystem::path& path);

/// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace setcover
