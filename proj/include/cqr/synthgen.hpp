#pragma once

#include <array>
#include <cstdint>

#include "cqr/corpus.hpp"

namespace cqr {

// Synthetic corpus with a planted latent quality q per item: both embedding
// modalities point along fixed unit directions with strength rho * q, and
// engagement counts grow log-linearly in q. q is recorded as human_score so
// evaluation has an exact oracle label.
struct SynthConfig {
  int n_items = 2500;
  int d_text = 64;
  int d_image = 32;
  int images_min = 1;
  int images_max = 6;
  double rho = 0.8;          // signal strength in [0, 1]
  double noise_scale = 0.75;
  std::array<double, 3> engagement_scale{6.0, 4.5, 3.5};  // likes, retweets, comments
  double engagement_noise = 0.5;
  std::uint64_t seed = 7;

  void validate() const;
};

Corpus generate_corpus(const SynthConfig& config);

}  // namespace cqr
