#include "cytoiqa/serialization.hpp"

#include <fstream>
#include <string>

#include "json.hpp"

#include "cytoiqa/error.hpp"

namespace cytoiqa {
namespace {

using nlohmann::json;

template <typename Fn>
void for_each_json_line(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      fn(json::parse(line));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

template <typename T, typename Parse>
T parse_enum(const json& j, const char* key, Parse parse) {
  const auto text = j.at(key).get<std::string>();
  const auto v = parse(text);
  if (!v) throw Error(ErrorCode::kParse, std::string("bad ") + key + " '" + text + "'");
  return *v;
}

}  // namespace

void write_manifest(std::ostream& out, const std::vector<SampleRecord>& records) {
  for (const auto& r : records) {
    json j;
    j["sample_id"] = r.sample_id;
    j["pair_id"] = r.pair_id ? json(*r.pair_id) : json(nullptr);
    j["label"] = to_string(r.label);
    j["origin"] = to_string(r.origin);
    j["path"] = r.path;
    out << j.dump() << "\n";
  }
}

std::vector<SampleRecord> read_manifest(std::istream& in) {
  std::vector<SampleRecord> records;
  for_each_json_line(in, [&](const json& j) {
    SampleRecord r;
    r.sample_id = j.at("sample_id").get<std::string>();
    if (j.contains("pair_id") && !j.at("pair_id").is_null()) {
      r.pair_id = j.at("pair_id").get<std::string>();
    }
    r.label = parse_enum<Label>(j, "label", parse_label);
    r.origin = parse_enum<Origin>(j, "origin", parse_origin);
    r.path = j.at("path").get<std::string>();
    records.push_back(std::move(r));
  });
  check_unique_ids(records);
  return records;
}

void write_manifest(const std::filesystem::path& path, const std::vector<SampleRecord>& records) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  write_manifest(out, records);
  if (!out) throw Error(ErrorCode::kIo, "error writing " + path.string());
}

std::vector<SampleRecord> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open manifest " + path.string());
  return read_manifest(in);
}

void write_split_plan(std::ostream& out, const SplitPlan& plan) {
  for (const auto& [id, fold] : plan.assignment) {
    out << json{{"fold", fold}, {"sample_id", id}}.dump() << "\n";
  }
}

SplitPlan read_split_plan(std::istream& in) {
  SplitPlan plan;
  for_each_json_line(in, [&](const json& j) {
    const int fold = j.at("fold").get<int>();
    if (fold < 0) throw Error(ErrorCode::kParse, "negative fold index");
    const auto id = j.at("sample_id").get<std::string>();
    if (!plan.assignment.emplace(id, fold).second) {
      throw Error(ErrorCode::kParse, "sample assigned twice: " + id);
    }
    plan.k = std::max(plan.k, fold + 1);
  });
  return plan;
}

void write_experiment_plan(std::ostream& out, const ExperimentPlan& plan) {
  json weights = json::object();
  for (const auto& [label, w] : plan.class_weights) weights[std::string(to_string(label))] = w;
  const json j = {{"learning_rate", plan.learning_rate},
                  {"momentum", plan.momentum},
                  {"batch_size", plan.batch_size},
                  {"patience_epochs", plan.patience_epochs},
                  {"k_folds", plan.k_folds},
                  {"validation_fraction", plan.validation_fraction},
                  {"class_weights", weights}};
  out << j.dump() << "\n";
}

ExperimentPlan read_experiment_plan(std::istream& in) {
  PlanOverrides o;
  bool seen = false;
  for_each_json_line(in, [&](const json& j) {
    if (seen) throw Error(ErrorCode::kParse, "experiment plan holds a single record");
    seen = true;
    o.learning_rate = j.at("learning_rate").get<double>();
    o.momentum = j.at("momentum").get<double>();
    o.batch_size = j.at("batch_size").get<int>();
    o.patience_epochs = j.at("patience_epochs").get<int>();
    o.k_folds = j.at("k_folds").get<int>();
    o.validation_fraction = j.at("validation_fraction").get<double>();
    std::map<Label, double> weights;
    for (const auto& [name, w] : j.at("class_weights").items()) {
      const auto label = parse_label(name);
      if (!label) throw Error(ErrorCode::kParse, "bad class weight label '" + name + "'");
      weights[*label] = w.get<double>();
    }
    o.class_weights = weights;
  });
  if (!seen) throw Error(ErrorCode::kParse, "empty experiment plan");
  return emit_experiment_plan(o);
}

}  // namespace cytoiqa
