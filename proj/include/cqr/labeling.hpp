#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cqr/corpus.hpp"

namespace cqr {

struct LabelWeights {
  double likes = 1.0;
  double retweets = 1.5;
  double comments = 1.2;

  void validate() const;  // non-negative, at least one positive
};

// Optional strictly monotone warp of raw quality scores, used to probe how
// sensitive a trained model is to the label scale. `cubic` recenters the
// min-max normalized score and cubes it, which flattens the bulk of the
// distribution without changing any ordering.
enum class LabelDistortion { none, cubic };

LabelDistortion label_distortion_from_string(const std::string& name);
std::string to_string(LabelDistortion distortion);

// w_l*log1p(likes) + w_r*log1p(retweets) + w_c*log1p(comments).
// When use_human_score is set and the item carries an audited score, that
// score replaces the engagement value.
double engagement_score(const ContentItem& item, const LabelWeights& weights,
                        bool use_human_score);

// Raw per-item quality labels for a set of items, distortion applied last.
std::vector<double> raw_labels(const std::vector<ContentItem>& items, const LabelWeights& weights,
                               bool use_human_score, LabelDistortion distortion);

// Maps scores to [0, 1] by rank, averaging tied ranks. A single element
// maps to 0.5. Invariant under strictly increasing transforms of the input.
std::vector<double> rank_normalize(const std::vector<double>& scores);

// Affine squeeze onto [0, 1]; a constant input maps to all 0.5.
std::vector<double> minmax_normalize(const std::vector<double>& scores);

// Ordered pair with ground-truth direction: +1 when a outranks b, -1 when b
// outranks a, 0 for a tie.
struct PairSample {
  std::string a;
  std::string b;
  int x = 0;
};

struct PairConfig {
  double delta = 0.1;        // minimum normalized-label gap for a decisive pair
  bool include_ties = false; // emit |gap| < delta pairs as x = 0 instead of resampling
  int count = 10000;
  std::uint64_t seed = 7;
};

// Samples `count` ordered pairs uniformly at random. Labels must already be
// rank-normalized so delta is portable across corpora. Deterministic for a
// fixed seed; throws when fewer than two items exist or when tie exclusion
// exhausts its resampling budget.
std::vector<PairSample> make_pairs(const std::vector<std::string>& ids,
                                   const std::vector<double>& normalized_labels,
                                   const PairConfig& config);

// Debug dump, one {"a":...,"b":...,"x":...} object per line.
void dump_pairs(const std::filesystem::path& path, const std::vector<PairSample>& pairs);

}  // namespace cqr
