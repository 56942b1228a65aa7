#pragma once

#include <filesystem>
#include <istream>
#include <ostream>
#include <vector>

#include "cytoiqa/datasets.hpp"

namespace cytoiqa {

// Line-delimited JSON. Manifest rows carry sample_id, pair_id (null when
// unpaired), label, origin, path. Split plans carry fold, sample_id.

void write_manifest(std::ostream& out, const std::vector<SampleRecord>& records);
std::vector<SampleRecord> read_manifest(std::istream& in);
void write_manifest(const std::filesystem::path& path, const std::vector<SampleRecord>& records);
std::vector<SampleRecord> read_manifest(const std::filesystem::path& path);

/// Rows are written in sample_id order.
void write_split_plan(std::ostream& out, const SplitPlan& plan);
/// k is recovered as 1 + the largest fold index.
SplitPlan read_split_plan(std::istream& in);

void write_experiment_plan(std::ostream& out, const ExperimentPlan& plan);
ExperimentPlan read_experiment_plan(std::istream& in);

}  // namespace cytoiqa
