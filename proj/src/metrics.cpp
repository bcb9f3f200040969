#include "cqr/metrics.hpp"

#include <cmath>

namespace cqr {

double lcc(std::span<const double> y, std::span<const double> y_hat) {
  if (y.size() != y_hat.size()) {
    throw ShapeError("lcc: inputs differ in length (" + std::to_string(y.size()) + " vs " +
                     std::to_string(y_hat.size()) + ")");
  }
  if (y.size() < 2) throw ConfigError("lcc: need at least 2 points");

  const double n = static_cast<double>(y.size());
  double mean_y = 0.0;
  double mean_h = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    mean_y += y[i];
    mean_h += y_hat[i];
  }
  mean_y /= n;
  mean_h /= n;

  double cross = 0.0;
  double ss_y = 0.0;
  double ss_h = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double dy = y[i] - mean_y;
    const double dh = y_hat[i] - mean_h;
    cross += dy * dh;
    ss_y += dy * dy;
    ss_h += dh * dh;
  }
  if (ss_y == 0.0 || ss_h == 0.0) {
    throw DegenerateVarianceError("lcc: " + std::string(ss_y == 0.0 ? "ground truth" : "prediction") +
                                  " has zero variance");
  }
  return cross / (std::sqrt(ss_y) * std::sqrt(ss_h));
}

double pairwise_accuracy(const std::vector<PairSample>& pairs,
                         const std::unordered_map<std::string, double>& score_by_id) {
  double credit = 0.0;
  int decisive = 0;
  for (const auto& pair : pairs) {
    if (pair.x == 0) continue;
    const auto a = score_by_id.find(pair.a);
    const auto b = score_by_id.find(pair.b);
    if (a == score_by_id.end()) throw DataError("pairwise_accuracy: no score for id '" + pair.a + "'");
    if (b == score_by_id.end()) throw DataError("pairwise_accuracy: no score for id '" + pair.b + "'");
    ++decisive;
    const double gap = a->second - b->second;
    if (gap == 0.0) {
      credit += 0.5;
    } else if ((gap > 0.0) == (pair.x > 0)) {
      credit += 1.0;
    }
  }
  if (decisive == 0) throw DataError("pairwise_accuracy: no decisive pairs");
  return credit / static_cast<double>(decisive);
}

EvalReport evaluate(const RankerModel& model, const std::vector<ContentItem>& items,
                    const std::vector<double>& labels, const std::vector<PairSample>& pairs,
                    const std::string& config_fingerprint) {
  if (items.size() != labels.size()) throw ShapeError("evaluate: items and labels differ in length");
  if (items.empty()) throw ConfigError("evaluate: split is empty");

  const std::vector<double> scores = predict_batch(model, items);
  std::unordered_map<std::string, double> score_by_id;
  score_by_id.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) score_by_id.emplace(items[i].id, scores[i]);

  EvalReport report;
  report.lcc_value = lcc(labels, scores);
  report.pairwise_acc = pairwise_accuracy(pairs, score_by_id);
  report.n_items = static_cast<int>(items.size());
  report.n_pairs = static_cast<int>(pairs.size());
  report.config_fingerprint = config_fingerprint;
  return report;
}

nlohmann::ordered_json report_to_json(const EvalReport& report) {
  nlohmann::ordered_json out;
  out["lcc"] = report.lcc_value;
  out["pairwise_accuracy"] = report.pairwise_acc;
  out["n_items"] = report.n_items;
  out["n_pairs"] = report.n_pairs;
  out["config_fingerprint"] = report.config_fingerprint;
  return out;
}

}  // namespace cqr
