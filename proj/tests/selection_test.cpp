#include <gtest/gtest.h>

#include <sstream>

#include "cytoiqa/error.hpp"
#include "cytoiqa/rng.hpp"
#include "cytoiqa/selection.hpp"

namespace cytoiqa {
namespace {

std::vector<std::string> names(const std::vector<std::pair<std::string, double>>& ranked) {
  std::vector<std::string> out;
  for (const auto& [n, v] : ranked) out.push_back(n);
  return out;
}

TEST(RankClassesTest, TiesBrokenByName) {
  const LogitMatrix m{{"c", "b", "a"}, {{1, 0, 0}, {0, 1, 0}}};
  const auto top = rank_classes(m, 2);
  EXPECT_EQ(names(top), (std::vector<std::string>{"b", "c"}));
  EXPECT_DOUBLE_EQ(top[0].second, 0.5);
}

TEST(RankClassesTest, SingleRowIsDescendingOrder) {
  const LogitMatrix m{{"x", "y", "z", "w"}, {{0.1, 3.0, -2.0, 1.0}}};
  EXPECT_EQ(names(rank_classes(m, 4)), (std::vector<std::string>{"y", "w", "x", "z"}));
}

TEST(RankClassesTest, MeansFromTableValues) {
  const LogitMatrix m{{"bubble", "jellyfish", "cauliflower", "velvet"},
                      {{0.030, 0.100, 0.050, 0.01}, {0.050, 0.080, 0.046, 0.02}}};
  const auto ranked = rank_classes(m, 3);
  EXPECT_EQ(names(ranked), (std::vector<std::string>{"jellyfish", "cauliflower", "bubble"}));
  EXPECT_NEAR(ranked[0].second, 0.090, 1e-12);
  EXPECT_NEAR(ranked[1].second, 0.048, 1e-12);
  EXPECT_NEAR(ranked[2].second, 0.040, 1e-12);
}

TEST(RankClassesTest, PrefixAndShiftInvariance) {
  SeededRng rng(17);
  for (int t = 0; t < 100; ++t) {
    LogitMatrix m;
    const auto classes = 2 + rng.below(20);
    for (std::size_t c = 0; c < classes; ++c) m.labels.push_back("class" + std::to_string(c));
    for (std::size_t r = 0, rows = 1 + rng.below(10); r < rows; ++r) {
      std::vector<double> row;
      // Coarse values so exact ties occur.
      for (std::size_t c = 0; c < classes; ++c) row.push_back(static_cast<double>(rng.below(5)));
      m.rows.push_back(row);
    }
    const auto full = names(rank_classes(m, classes));
    for (std::size_t k = 1; k < classes; ++k) {
      const auto prefix = names(rank_classes(m, k));
      EXPECT_TRUE(std::equal(prefix.begin(), prefix.end(), full.begin()));
    }
    auto shifted = m;
    const double c = rng.uniform() * 100 - 50;
    for (auto& row : shifted.rows) {
      for (auto& v : row) v += c;
    }
    EXPECT_EQ(names(rank_classes(shifted, classes)), full);
  }
}

TEST(RankClassesTest, Errors) {
  const LogitMatrix empty{{"a"}, {}};
  try {
    rank_classes(empty, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyInput);
  }
  const LogitMatrix m{{"a", "b"}, {{1, 2}}};
  EXPECT_THROW(rank_classes(m, 3), Error);
  EXPECT_THROW(rank_classes(m, 0), Error);
}

TEST(ReadLogitMatrixTest, ParsesCsv) {
  std::istringstream in("jellyfish, bubble\n0.5,1\n\n-1.5,2e-1\n");
  const auto m = read_logit_matrix(in);
  EXPECT_EQ(m.labels, (std::vector<std::string>{"jellyfish", "bubble"}));
  ASSERT_EQ(m.rows.size(), 2u);
  EXPECT_EQ(m.rows[1], (std::vector<double>{-1.5, 0.2}));
}

TEST(ReadLogitMatrixTest, RejectsMalformedRows) {
  for (const char* text : {"a,b\n1\n", "a,b\n1,x\n", "a,b\n1,2,3\n", "a,b\n1,nan\n"}) {
    std::istringstream in(text);
    try {
      read_logit_matrix(in);
      ADD_FAILURE() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kParse) << text;
    }
  }
  EXPECT_THROW(read_logit_matrix(std::filesystem::path("/nonexistent/logits.csv")), Error);
}

}  // namespace
}  // namespace cytoiqa
