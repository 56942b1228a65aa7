#include "cytoiqa/selection.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cytoiqa/error.hpp"

namespace cytoiqa {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

LogitMatrix read_logit_matrix(std::istream& in) {
  LogitMatrix m;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (m.labels.empty()) {
      m.labels = std::move(fields);
      continue;
    }
    if (fields.size() != m.labels.size()) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + " has " +
                                         std::to_string(fields.size()) + " fields, header has " +
                                         std::to_string(m.labels.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v)) {
        throw Error(ErrorCode::kParse,
                    "line " + std::to_string(line_no) + ": not a finite number: '" + f + "'");
      }
      row.push_back(v);
    }
    m.rows.push_back(std::move(row));
  }
  return m;
}

LogitMatrix read_logit_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return read_logit_matrix(in);
}

std::vector<std::pair<std::string, double>> rank_classes(const LogitMatrix& m,
                                                         std::size_t top_k) {
  if (m.rows.empty() || m.labels.empty()) {
    throw Error(ErrorCode::kEmptyInput, "logit matrix has no rows");
  }
  if (top_k == 0 || top_k > m.labels.size()) {
    throw Error(ErrorCode::kInvalidArgument, "top_k " + std::to_string(top_k) + " outside 1.." +
                                                 std::to_string(m.labels.size()));
  }
  std::vector<std::pair<std::string, double>> ranked;
  ranked.reserve(m.labels.size());
  for (std::size_t c = 0; c < m.labels.size(); ++c) {
    long double sum = 0.0L;
    for (const auto& row : m.rows) {
      if (row.size() != m.labels.size()) {
        throw Error(ErrorCode::kInvalidArgument, "ragged logit matrix");
      }
      sum += row[c];
    }
    ranked.emplace_back(m.labels[c],
                        static_cast<double>(sum / static_cast<long double>(m.rows.size())));
  }
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.second > b.second; });
  // Means within kTieTolerance (relative) of a run's leading mean are ties,
  // ordered by name; this keeps the order stable under rounding noise.
  constexpr double kTieTolerance = 1e-9;
  for (std::size_t begin = 0; begin < ranked.size();) {
    const double lead = ranked[begin].second;
    const double tol = kTieTolerance * std::max(1.0, std::abs(lead));
    std::size_t end = begin + 1;
    while (end < ranked.size() && lead - ranked[end].second <= tol) ++end;
    std::sort(ranked.begin() + static_cast<std::ptrdiff_t>(begin),
              ranked.begin() + static_cast<std::ptrdiff_t>(end),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    begin = end;
  }
  ranked.resize(top_k);
  return ranked;
}

}  // namespace cytoiqa
