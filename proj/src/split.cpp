#include "cqr/split.hpp"

#include <cmath>
#include <string>

#include "cqr/rng.hpp"

namespace cqr {

void SplitRatios::validate() const {
  if (train <= 0.0 || val < 0.0 || test < 0.0) {
    throw ConfigError("split ratios must be positive (train) and non-negative (val, test)");
  }
  if (std::abs(train + val + test - 1.0) > 1e-9) {
    throw ConfigError("split ratios must sum to 1, got " + std::to_string(train + val + test));
  }
}

SplitBucket SplitAssignment::bucket(const std::string& id) const {
  auto it = by_id.find(id);
  if (it == by_id.end()) throw DataError("id '" + id + "' has no split assignment");
  return it->second;
}

namespace {

SplitBucket bucket_for(const std::string& id, const SplitRatios& ratios, std::uint64_t seed) {
  const std::uint64_t h = derive_seed(seed, id);
  const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
  if (u < ratios.train) return SplitBucket::train;
  if (u < ratios.train + ratios.val) return SplitBucket::val;
  return SplitBucket::test;
}

}  // namespace

SplitAssignment split_corpus(const std::vector<ContentItem>& items, const SplitRatios& ratios,
                             std::uint64_t seed) {
  ratios.validate();
  SplitAssignment assignment;
  assignment.ratios = ratios;
  assignment.seed = seed;
  assignment.by_id.reserve(items.size());
  for (const auto& item : items) {
    assignment.by_id.emplace(item.id, bucket_for(item.id, ratios, seed));
  }
  return assignment;
}

std::vector<ContentItem> select_bucket(const std::vector<ContentItem>& items,
                                       const SplitAssignment& assignment, SplitBucket bucket) {
  std::vector<ContentItem> out;
  for (const auto& item : items) {
    if (assignment.bucket(item.id) == bucket) out.push_back(item);
  }
  return out;
}

}  // namespace cqr
