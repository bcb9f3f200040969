#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cqr/corpus.hpp"
#include "cqr/labeling.hpp"
#include "cqr/nextvlad.hpp"
#include "cqr/param_block.hpp"

namespace cqr {

enum class OptimizerKind { adam, sgd };

OptimizerKind optimizer_from_string(const std::string& name);
std::string to_string(OptimizerKind kind);

struct RankerConfig {
  std::vector<int> hidden_widths{128, 32};  // a final scalar layer is always appended
  double sigma = 1.0;                       // score-difference scale in the pair probability
  OptimizerKind optimizer = OptimizerKind::adam;
  double lr = 1e-4;
  double lr_decay_factor = 1.0;  // multiplied in every decay_every iterations
  int decay_every = 10000;
  int total_iterations = 3000;
  int batch_pairs = 32;
  std::uint64_t seed = 7;
  int m_max = 4;  // images kept per item
  NextVladConfig nextvlad;  // input_dim is filled from the corpus

  void validate() const;

  // SGD schedule: lr 1e-5, x0.08 every 10000 iterations, 50000 total.
  static RankerConfig sgd_schedule_preset();
};

// The scoring model. One parameter set serves both Siamese branches; the
// branches are two forward passes through this same block.
struct RankerModel {
  RankerConfig config;
  int d_text = 0;
  ParamBlock params;
  NextVladSlots nextvlad_slots;
  std::vector<std::pair<int, int>> head_slots;  // (W, b) per affine layer
};

// Builds slots without initializing values (used by the checkpoint loader).
RankerModel build_ranker_structure(const RankerConfig& config, int d_text, int d_image);

// Seeded He-style initialization from config.seed.
RankerModel make_ranker(const RankerConfig& config, int d_text, int d_image);

// concat(text embedding, aggregated image descriptor) -> affine/ReLU stack
// -> scalar. Truncates the image list to config.m_max first.
double score_item(const RankerModel& model, const ContentItem& item);

// Scores in input order; errors are re-raised with the offending item id.
std::vector<double> predict_batch(const RankerModel& model, std::span<const ContentItem> items);

// 1 / (1 + exp(-sigma (s_i - s_j))), stable for large |s_i - s_j|.
double pair_prob(double s_i, double s_j, double sigma);

struct PairLossTerms {
  double s_i = 0.0;
  double s_j = 0.0;
  double o = 0.0;      // sigma * (s_i - s_j)
  double p = 0.0;      // modeled probability that i outranks j
  double p_bar = 0.0;  // ground-truth probability (1 + x) / 2
  double c = 0.0;      // cross-entropy rank loss
  double dc_ds_i = 0.0;  // gradient w.r.t. s_i; s_j gets the negation
};

PairLossTerms pair_loss(double s_i, double s_j, int x_ij, double sigma);

// Loss of one pair through the whole model. The _with_grad variant
// accumulates analytic gradients for every parameter into `grads`.
double pair_loss_value(const RankerModel& model, const ContentItem& a, const ContentItem& b,
                       int x_ij);
double pair_loss_with_grad(const RankerModel& model, const ContentItem& a, const ContentItem& b,
                           int x_ij, ParamBlock& grads);

// 1/2 (score - target)^2 for one item, gradients accumulated into `grads`.
double square_loss_with_grad(const RankerModel& model, const ContentItem& item, double target,
                             ParamBlock& grads);

struct TrainLogRow {
  int iteration = 0;
  double loss = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  RankerModel model;
  std::vector<TrainLogRow> log;
};

// Pairwise rank training: every batch pair runs two shared-weight forward
// passes, both branch gradients are summed into the single parameter set,
// then one optimizer step is applied. Deterministic for a fixed config.
// Throws DataError when a pair references an id missing from `items`,
// DivergenceError when the mean batch loss goes non-finite.
TrainResult train_ranker(const std::vector<ContentItem>& items,
                         const std::vector<PairSample>& pairs, const RankerConfig& config,
                         int d_text, int d_image);

// Pointwise 1/2 (score - target)^2 baseline; identical architecture and
// optimizer, targets expected in [0, 1].
TrainResult train_square_baseline(const std::vector<ContentItem>& items,
                                  const std::vector<double>& targets, const RankerConfig& config,
                                  int d_text, int d_image);

void write_train_log(const std::filesystem::path& path, const std::vector<TrainLogRow>& log,
                     const std::string& header_comment = "");

// Checkpoint = core parameter manifest plus a "model" object holding the
// architecture, so a saved model reloads without outside configuration.
void save_ranker(const std::filesystem::path& path, const RankerModel& model);
RankerModel load_ranker(const std::filesystem::path& path);

}  // namespace cqr
