#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "cqr/labeling.hpp"
#include "cqr/ranker.hpp"

namespace cqr {

// Pearson linear correlation. Throws DegenerateVarianceError instead of
// returning NaN when either input is constant.
double lcc(std::span<const double> y, std::span<const double> y_hat);

// Fraction of decisive pairs (x != 0) ordered correctly by the scores;
// exact score ties count one half. Throws when no decisive pair exists or
// a pair id has no score.
double pairwise_accuracy(const std::vector<PairSample>& pairs,
                         const std::unordered_map<std::string, double>& score_by_id);

struct EvalReport {
  double lcc_value = 0.0;
  double pairwise_acc = 0.0;
  int n_items = 0;
  int n_pairs = 0;
  std::string config_fingerprint;
};

// Scores every item, correlates against the labels, and checks ordering on
// the held-out pairs.
EvalReport evaluate(const RankerModel& model, const std::vector<ContentItem>& items,
                    const std::vector<double>& labels, const std::vector<PairSample>& pairs,
                    const std::string& config_fingerprint);

nlohmann::ordered_json report_to_json(const EvalReport& report);

}  // namespace cqr
