#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "cqr/labeling.hpp"
#include "cqr/ranker.hpp"
#include "cqr/split.hpp"
#include "cqr/synthgen.hpp"

namespace cqr {

enum class LossKind { rank, square };

LossKind loss_from_string(const std::string& name);
std::string to_string(LossKind kind);

// Fully resolved settings for one command run. Values come from defaults,
// then an optional config file (flat `section.key = value` lines), then
// command-line flags, in that order. The resolved form echoes back in the
// same syntax so a run can be reproduced from its own echo.
struct RunConfig {
  std::uint64_t seed = 7;

  std::string corpus_path = "corpus.jsonl";
  std::string checkpoint_path = "model.ckpt";
  std::string log_path = "train_log.csv";
  std::string report_path = "eval_report.json";
  std::string scores_path;  // empty writes scores to stdout

  SynthConfig synth;
  SplitRatios split_ratios;
  LabelWeights label_weights;
  bool use_human_score = true;
  LabelDistortion distortion = LabelDistortion::none;

  double pair_delta = 0.1;
  bool pair_include_ties = false;
  int train_pair_count = 10000;
  int eval_pair_count = 2000;

  RankerConfig ranker;
  LossKind loss = LossKind::rank;
  bool with_baseline = false;

  // Applies one `key = value` setting; throws ConfigError for unknown keys
  // or unparseable values, naming the key.
  void apply(const std::string& key, const std::string& value);

  // Pushes the shared seed into the per-module configs.
  void finalize();

  // Canonical key=value listing of every setting.
  std::string echo() const;

  // Hash of the canonical echo, as 16 hex characters.
  std::string fingerprint() const;
};

RunConfig parse_config_file(const std::filesystem::path& path);

}  // namespace cqr
