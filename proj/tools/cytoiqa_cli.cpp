// cytoiqa command-line driver.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cytoiqa/classifier.hpp"
#include "cytoiqa/datasets.hpp"
#include "cytoiqa/error.hpp"
#include "cytoiqa/harness.hpp"
#include "cytoiqa/metrics.hpp"
#include "cytoiqa/selection.hpp"
#include "cytoiqa/serialization.hpp"

namespace fs = std::filesystem;
using namespace cytoiqa;

namespace {

struct GateOptions {
  std::string manifest;
  std::string scorer = "baseline";
  std::string model;
  std::vector<double> calibration;
  std::string strategy = "rgb_var";
  int patch_size = 500;
  std::string edge_mode;
  int crop_size = 0;
  std::uint64_t seed = 0;
  double threshold = 0.5;
  int workers = 1;
  std::string out;
};

void add_gate_flags(CLI::App* cmd, GateOptions& o, bool with_strategy) {
  cmd->add_option("--manifest", o.manifest, "Manifest (JSONL)")->required()->check(
      CLI::ExistingFile);
  cmd->add_option("--scorer", o.scorer, "baseline or model")
      ->check(CLI::IsMember({"baseline", "model"}));
  cmd->add_option("--model", o.model, "ONNX model file (with a .json metadata sidecar)");
  cmd->add_option("--calibration", o.calibration,
                  "Baseline midpoint and scale; fitted on the manifest when omitted")
      ->expected(2);
  if (with_strategy) cmd->add_option("--strategy", o.strategy, "Aggregation strategy");
  cmd->add_option("--patch-size", o.patch_size, "Fragment side in pixels");
  cmd->add_option("--edge-mode", o.edge_mode, "drop_partial or pad_partial");
  cmd->add_option("--crop-size", o.crop_size, "Random square crop before slicing");
  cmd->add_option("--seed", o.seed, "Seed");
  cmd->add_option("--threshold", o.threshold, "Decision threshold");
  cmd->add_option("--workers", o.workers, "Scoring threads");
  cmd->add_option("--out", o.out, "Output directory for reports and decision logs");
}

RunConfig to_config(const GateOptions& o) {
  RunConfig c;
  c.manifest = o.manifest;
  const auto strategy = parse_strategy(o.strategy);
  if (!strategy) throw Error(ErrorCode::kInvalidConfiguration, "unknown strategy " + o.strategy);
  c.strategy = *strategy;
  c.patch_size = o.patch_size;
  if (!o.edge_mode.empty()) {
    const auto mode = parse_edge_mode(o.edge_mode);
    if (!mode) throw Error(ErrorCode::kInvalidConfiguration, "unknown edge mode " + o.edge_mode);
    c.edge_mode = *mode;
  }
  if (o.crop_size != 0) c.crop_size = o.crop_size;
  c.seed = o.seed;
  c.threshold = o.threshold;
  c.workers = o.workers;
  c.validate();
  return c;
}

std::unique_ptr<QualityScorer> make_scorer(const GateOptions& o,
                                           const std::vector<SampleRecord>& records,
                                           const ImageLoader& loader) {
  if (o.scorer == "model") {
    if (o.model.empty()) throw Error(ErrorCode::kInvalidConfiguration, "--model is required");
    return std::make_unique<OnnxModelScorer>(o.model);
  }
  LogisticCalibration cal;
  if (o.calibration.size() == 2) {
    cal = {o.calibration[0], o.calibration[1]};
    if (!(cal.scale > 0)) throw Error(ErrorCode::kInvalidConfiguration, "scale must be > 0");
  } else {
    cal = calibrate_baseline(records, loader);
    std::fprintf(stderr, "baseline calibration: midpoint %.6g scale %.6g\n", cal.midpoint,
                 cal.scale);
  }
  return std::make_unique<SharpnessScorer>(cal);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "error writing " + path.string());
}

fs::path ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::kIo, "cannot create " + dir);
  return dir;
}

void report_excluded(const GateResult& r) {
  for (const auto& e : r.excluded) std::fprintf(stderr, "excluded %s\n", e.c_str());
}

void emit_reports(const std::vector<ReportRow>& rows, const std::string& out_dir) {
  const auto table = format_table(rows);
  std::cout << table;
  if (out_dir.empty()) return;
  const auto dir = ensure_dir(out_dir);
  write_text(dir / "report.jsonl", format_jsonl(rows));
  write_text(dir / "report.txt", table);
}

void write_decisions(const GateResult& r, const std::string& out_dir, const std::string& name) {
  if (out_dir.empty()) return;
  write_text(ensure_dir(out_dir) / ("decisions_" + name + ".jsonl"),
             format_decision_log(r.decisions));
}

struct Loaded {
  std::vector<SampleRecord> records;
  ImageLoader loader;
};

Loaded load_manifest(const std::string& manifest) {
  const fs::path path(manifest);
  return {read_manifest(path), disk_loader(path.parent_path())};
}

int cmd_run_gate(const GateOptions& o) {
  const auto config = to_config(o);
  const auto in = load_manifest(o.manifest);
  const auto scorer = make_scorer(o, in.records, in.loader);
  const auto r = run_gate(config, in.records, *scorer, in.loader);
  report_excluded(r);
  emit_reports({{std::string(to_string(config.strategy)), r.summary}}, o.out);
  write_decisions(r, o.out, std::string(to_string(config.strategy)));
  return 0;
}

int cmd_compare(const GateOptions& o) {
  const auto config = to_config(o);
  const auto in = load_manifest(o.manifest);
  const auto scorer = make_scorer(o, in.records, in.loader);
  const auto runs = compare_strategies(config, in.records, *scorer, in.loader);
  std::vector<ReportRow> rows;
  for (const auto& run : runs) {
    const std::string name(to_string(run.strategy));
    rows.push_back({name, run.result.summary});
    write_decisions(run.result, o.out, name);
  }
  report_excluded(runs.front().result);
  emit_reports(rows, o.out);
  return 0;
}

int cmd_sweep(const GateOptions& o, const std::vector<int>& sizes) {
  const auto config = to_config(o);
  const auto in = load_manifest(o.manifest);
  const auto scorer = make_scorer(o, in.records, in.loader);
  const auto sweep = sweep_crop_sizes(config, sizes, in.records, *scorer, in.loader);
  std::vector<ReportRow> rows;
  std::ostringstream curve;
  curve << "crop_size,accuracy,f1\n";
  for (const auto& row : sweep) {
    const auto name = "crop_" + std::to_string(row.crop_size);
    rows.push_back({name, row.result.summary});
    curve << row.crop_size << "," << row.accuracy << "," << row.f1 << "\n";
    write_decisions(row.result, o.out, name);
  }
  report_excluded(sweep.front().result);
  emit_reports(rows, o.out);
  if (!o.out.empty()) write_text(ensure_dir(o.out) / "curve.csv", curve.str());
  return 0;
}

struct SplitOptions {
  int k = 5;
  std::string split = "sameidx";
  std::string shuffle = "pair";
  int batch_size = 16;
  double validation_fraction = 0.15;
  bool evaluate = false;
};

int cmd_plan_split(const GateOptions& o, const SplitOptions& s) {
  const auto split = parse_split_strategy(s.split);
  const auto shuffle = parse_shuffle_mode(s.shuffle);
  if (!split) throw Error(ErrorCode::kInvalidConfiguration, "unknown split " + s.split);
  if (!shuffle) throw Error(ErrorCode::kInvalidConfiguration, "unknown shuffle " + s.shuffle);
  const auto in = load_manifest(o.manifest);

  if (!s.evaluate) {
    const auto plan = plan_kfold(in.records, s.k, *split, o.seed);
    if (o.out.empty()) {
      write_split_plan(std::cout, plan);
    } else {
      std::ostringstream text;
      write_split_plan(text, plan);
      write_text(ensure_dir(o.out) / "split.jsonl", text.str());
    }
    return 0;
  }

  const auto config = to_config(o);
  const auto scorer = make_scorer(o, in.records, in.loader);
  const CvOptions cv_opts{s.k, *split, *shuffle, s.batch_size, s.validation_fraction};
  const auto cv = run_cv(in.records, cv_opts, config, *scorer, in.loader);
  const std::string name = std::string(to_string(*split)) + "/" + std::string(to_string(*shuffle));
  emit_reports({{name, cv.summary}}, o.out);
  if (o.out.empty()) return 0;

  const auto dir = ensure_dir(o.out);
  std::ostringstream plan;
  write_split_plan(plan, cv.plan);
  write_text(dir / "split.jsonl", plan.str());
  std::ostringstream batches;
  for (const auto& fold : cv.folds) {
    write_decisions(fold.result, o.out, "fold" + std::to_string(fold.fold));
    for (std::size_t b = 0; b < fold.train_batches.size(); ++b) {
      for (const auto& r : fold.train_batches[b]) {
        batches << nlohmann::json{{"fold", fold.fold}, {"batch", b}, {"sample_id", r.sample_id}}
                       .dump()
                << "\n";
      }
    }
    for (const auto& id : fold.validation_ids) {
      batches << nlohmann::json{{"fold", fold.fold}, {"batch", nullptr}, {"sample_id", id}}.dump()
              << "\n";
    }
  }
  write_text(dir / "training_layout.jsonl", batches.str());
  return 0;
}

int cmd_build_manifest(const std::string& high, const std::string& low, const std::string& out) {
  const auto records = build_paired_manifest(fs::absolute(high), fs::absolute(low));
  if (out.empty()) {
    write_manifest(std::cout, records);
  } else {
    write_manifest(fs::path(out), records);
  }
  std::fprintf(stderr, "%zu records, %zu pairs\n", records.size(), records.size() / 2);
  return 0;
}

int cmd_synth(const std::string& manifest, const std::string& distractors,
              const std::string& dark_out, const VignetteParams& params, const std::string& out) {
  const fs::path path(manifest);
  auto cells = read_manifest(path);
  for (auto& r : cells) {
    if (fs::path(r.path).is_relative()) r.path = (path.parent_path() / r.path).string();
  }
  const auto v = build_validity_manifest(cells, fs::absolute(distractors), params,
                                         fs::absolute(dark_out));
  for (const auto& w : v.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  if (out.empty()) {
    write_manifest(std::cout, v.records);
  } else {
    write_manifest(fs::path(out), v.records);
  }
  return 0;
}

int cmd_rank(const std::string& logits, std::size_t top_k, const std::string& out) {
  const auto ranked = rank_classes(read_logit_matrix(fs::path(logits)), top_k);
  std::ostringstream text;
  text << "rank,class,mean_logit\n";
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    char mean[32];
    std::snprintf(mean, sizeof mean, "%.6f", ranked[i].second);
    text << i + 1 << "," << ranked[i].first << "," << mean << "\n";
  }
  std::cout << text.str();
  if (!out.empty()) write_text(out, text.str());
  return 0;
}

struct PlanFlags {
  std::optional<double> learning_rate;
  std::optional<double> momentum;
  std::optional<int> batch_size;
  std::optional<int> patience;
  std::optional<int> k;
  std::optional<double> validation_fraction;
  std::string manifest;
};

int cmd_emit_plan(const PlanFlags& f, const std::string& out) {
  PlanOverrides o{f.learning_rate, f.momentum, f.batch_size, f.patience, f.k,
                  f.validation_fraction, std::nullopt};
  if (!f.manifest.empty()) o.class_weights = class_weights(read_manifest(fs::path(f.manifest)));
  const auto plan = emit_experiment_plan(o);
  if (out.empty()) {
    write_experiment_plan(std::cout, plan);
  } else {
    std::ostringstream text;
    write_experiment_plan(text, plan);
    write_text(out, text.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Image-quality gate for cytology micrographs"};
  app.require_subcommand(1);

  GateOptions gate;

  auto* run_gate_cmd = app.add_subcommand("run-gate", "Score a manifest with one strategy");
  add_gate_flags(run_gate_cmd, gate, true);

  GateOptions compare;
  auto* compare_cmd =
      app.add_subcommand("compare-strategies", "Score a manifest with every strategy");
  add_gate_flags(compare_cmd, compare, false);

  GateOptions sweep;
  std::vector<int> sizes;
  auto* sweep_cmd = app.add_subcommand("sweep-crops", "Accuracy and F1 per random crop size");
  add_gate_flags(sweep_cmd, sweep, true);
  sweep_cmd->add_option("--sizes", sizes, "Crop sizes in pixels")->required()->delimiter(',');

  GateOptions split_gate;
  SplitOptions split;
  auto* split_cmd = app.add_subcommand("plan-split", "k-fold plan, optionally evaluated");
  add_gate_flags(split_cmd, split_gate, true);
  split_cmd->add_option("--k", split.k, "Fold count");
  split_cmd->add_option("--split", split.split, "sameidx or diffidx");
  split_cmd->add_option("--shuffle", split.shuffle, "none, normal or pair");
  split_cmd->add_option("--batch-size", split.batch_size, "Training batch size");
  split_cmd->add_option("--validation-fraction", split.validation_fraction,
                        "Share of training pairs held out for validation");
  split_cmd->add_flag("--evaluate", split.evaluate, "Score each held-out fold");

  std::string high_dir, low_dir, manifest_out;
  auto* build_cmd = app.add_subcommand("build-manifest", "Pair high/low quality directories");
  build_cmd->add_option("--high-dir", high_dir, "High-quality images")->required();
  build_cmd->add_option("--low-dir", low_dir, "Low-quality images")->required();
  build_cmd->add_option("--out", manifest_out, "Manifest output (stdout when omitted)");

  std::string cell_manifest, distractor_dir, dark_out, validity_out;
  VignetteParams vignette;
  auto* synth_cmd =
      app.add_subcommand("synth-dark-edges", "Dark-edge copies plus distractors manifest");
  synth_cmd->add_option("--manifest", cell_manifest, "Cell manifest")->required()->check(
      CLI::ExistingFile);
  synth_cmd->add_option("--distractor-dir", distractor_dir, "Non-cell images")->required();
  synth_cmd->add_option("--dark-out", dark_out, "Directory for the dark-edge copies")
      ->required();
  synth_cmd->add_option("--radius", vignette.radius_fraction, "Clear radius fraction");
  synth_cmd->add_option("--feather", vignette.feather_fraction, "Feather band fraction");
  synth_cmd->add_option("--floor", vignette.floor_level, "Gain outside the band");
  synth_cmd->add_option("--seed", vignette.seed, "Seed");
  synth_cmd->add_option("--out", validity_out, "Manifest output (stdout when omitted)");

  std::string logits, rank_out;
  std::size_t top_k = 10;
  auto* rank_cmd = app.add_subcommand("rank-classes", "Classes with the highest mean logit");
  rank_cmd->add_option("--logits", logits, "CSV logit matrix")->required();
  rank_cmd->add_option("--top-k", top_k, "Classes to keep");
  rank_cmd->add_option("--out", rank_out, "CSV output");

  PlanFlags plan;
  std::string plan_out;
  auto* plan_cmd = app.add_subcommand("emit-plan", "Training hyperparameters as JSON");
  plan_cmd->add_option("--lr", plan.learning_rate, "Learning rate");
  plan_cmd->add_option("--momentum", plan.momentum, "SGD momentum");
  plan_cmd->add_option("--batch-size", plan.batch_size, "Batch size");
  plan_cmd->add_option("--patience", plan.patience, "Early-stopping patience in epochs");
  plan_cmd->add_option("--k", plan.k, "Fold count");
  plan_cmd->add_option("--validation-fraction", plan.validation_fraction, "Validation share");
  plan_cmd->add_option("--manifest", plan.manifest, "Derive class weights from this manifest");
  plan_cmd->add_option("--out", plan_out, "JSON output (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_gate_cmd) return cmd_run_gate(gate);
    if (*compare_cmd) return cmd_compare(compare);
    if (*sweep_cmd) return cmd_sweep(sweep, sizes);
    if (*split_cmd) return cmd_plan_split(split_gate, split);
    if (*build_cmd) return cmd_build_manifest(high_dir, low_dir, manifest_out);
    if (*synth_cmd) return cmd_synth(cell_manifest, distractor_dir, dark_out, vignette,
                                     validity_out);
    if (*rank_cmd) return cmd_rank(logits, top_k, rank_out);
    if (*plan_cmd) return cmd_emit_plan(plan, plan_out);
  } catch (const Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", std::string(to_string(e.code())).c_str(), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 1;
}
