#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "cqr/corpus.hpp"

namespace cqr {

enum class SplitBucket { train, val, test };

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;

  void validate() const;  // positive, sum to 1 within 1e-9
};

// Bucket per id. The assignment is a pure function of (id, seed): each id is
// hashed together with the seed, so reordering the corpus or appending new
// items never moves an existing id.
struct SplitAssignment {
  std::unordered_map<std::string, SplitBucket> by_id;
  SplitRatios ratios;
  std::uint64_t seed = 0;

  SplitBucket bucket(const std::string& id) const;
};

SplitAssignment split_corpus(const std::vector<ContentItem>& items, const SplitRatios& ratios,
                             std::uint64_t seed);

std::vector<ContentItem> select_bucket(const std::vector<ContentItem>& items,
                                       const SplitAssignment& assignment, SplitBucket bucket);

}  // namespace cqr
