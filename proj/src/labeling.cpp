#include "cqr/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "cqr/rng.hpp"

namespace cqr {

void LabelWeights::validate() const {
  if (likes < 0.0 || retweets < 0.0 || comments < 0.0) {
    throw ConfigError("label weights must be non-negative");
  }
  if (likes == 0.0 && retweets == 0.0 && comments == 0.0) {
    throw ConfigError("at least one label weight must be positive");
  }
}

LabelDistortion label_distortion_from_string(const std::string& name) {
  if (name == "none") return LabelDistortion::none;
  if (name == "cubic") return LabelDistortion::cubic;
  throw ConfigError("unknown label distortion '" + name + "' (expected none|cubic)");
}

std::string to_string(LabelDistortion distortion) {
  return distortion == LabelDistortion::cubic ? "cubic" : "none";
}

double engagement_score(const ContentItem& item, const LabelWeights& weights,
                        bool use_human_score) {
  weights.validate();
  if (use_human_score && item.human_score.has_value()) return *item.human_score;
  return weights.likes * std::log1p(static_cast<double>(item.engagement.likes)) +
         weights.retweets * std::log1p(static_cast<double>(item.engagement.retweets)) +
         weights.comments * std::log1p(static_cast<double>(item.engagement.comments));
}

std::vector<double> raw_labels(const std::vector<ContentItem>& items, const LabelWeights& weights,
                               bool use_human_score, LabelDistortion distortion) {
  std::vector<double> labels;
  labels.reserve(items.size());
  for (const auto& item : items) {
    labels.push_back(engagement_score(item, weights, use_human_score));
  }
  if (distortion == LabelDistortion::cubic && !labels.empty()) {
    const std::vector<double> squeezed = minmax_normalize(labels);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const double centered = squeezed[i] - 0.5;
      labels[i] = centered * centered * centered;
    }
  }
  return labels;
}

std::vector<double> rank_normalize(const std::vector<double>& scores) {
  if (scores.empty()) throw ConfigError("rank_normalize: input must be non-empty");
  const std::size_t n = scores.size();
  if (n == 1) return {0.5};

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  std::vector<double> out(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    // 1-based ranks i+1 .. j+1 share the average rank
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j + 1);
    const double value = (avg_rank - 1.0) / static_cast<double>(n - 1);
    for (std::size_t k = i; k <= j; ++k) out[order[k]] = value;
    i = j + 1;
  }
  return out;
}

std::vector<double> minmax_normalize(const std::vector<double>& scores) {
  if (scores.empty()) throw ConfigError("minmax_normalize: input must be non-empty");
  const auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (lo == hi) return std::vector<double>(scores.size(), 0.5);
  std::vector<double> out;
  out.reserve(scores.size());
  for (double s : scores) out.push_back((s - lo) / (hi - lo));
  return out;
}

std::vector<PairSample> make_pairs(const std::vector<std::string>& ids,
                                   const std::vector<double>& normalized_labels,
                                   const PairConfig& config) {
  if (ids.size() != normalized_labels.size()) {
    throw ShapeError("make_pairs: ids and labels differ in length");
  }
  if (ids.size() < 2) throw ConfigError("make_pairs: need at least 2 items");
  if (config.delta < 0.0 || config.delta >= 1.0) {
    throw ConfigError("make_pairs: delta must lie in [0, 1)");
  }
  if (config.count < 1) throw ConfigError("make_pairs: count must be >= 1");

  Rng rng(config.seed);
  const auto n = static_cast<std::int64_t>(ids.size());
  std::vector<PairSample> pairs;
  pairs.reserve(static_cast<std::size_t>(config.count));

  const long budget = 1000L * config.count + 10000L;
  long attempts = 0;
  while (pairs.size() < static_cast<std::size_t>(config.count)) {
    if (++attempts > budget) {
      throw DataError("make_pairs: exhausted resampling budget without finding enough decisive "
                      "pairs (labels too close together?)");
    }
    const auto i = static_cast<std::size_t>(rng.uniform_int(0, n - 1));
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, n - 1));
    if (i == j) continue;
    const double gap = normalized_labels[i] - normalized_labels[j];
    int x = 0;
    if (gap > 0.0 && gap >= config.delta) {
      x = 1;
    } else if (gap < 0.0 && -gap >= config.delta) {
      x = -1;
    } else if (!config.include_ties) {
      continue;
    }
    pairs.push_back(PairSample{ids[i], ids[j], x});
  }
  return pairs;
}

void dump_pairs(const std::filesystem::path& path, const std::vector<PairSample>& pairs) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open pair dump for writing: " + path.string());
  for (const auto& pair : pairs) {
    nlohmann::ordered_json rec;
    rec["a"] = pair.a;
    rec["b"] = pair.b;
    rec["x"] = pair.x;
    out << rec.dump() << '\n';
  }
}

}  // namespace cqr
