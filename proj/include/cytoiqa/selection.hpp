#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <utility>
#include <vector>

namespace cytoiqa {

struct LogitMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> rows;  // one logit per label
};

/// Header of class names, then one row of logits per probe sample.
/// Comma-delimited; throws kParse on ragged or non-numeric rows.
LogitMatrix read_logit_matrix(std::istream& in);
LogitMatrix read_logit_matrix(const std::filesystem::path& path);

/// Classes ordered by mean logit, highest first. Means within a relative 1e-9
/// of each other count as tied and are ordered by ascending name;
/// the first top_k are returned.
std::vector<std::pair<std::string, double>> rank_classes(const LogitMatrix& m, std::size_t top_k);

}  // namespace cytoiqa
