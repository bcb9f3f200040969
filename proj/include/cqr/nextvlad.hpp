#pragma once

#include <span>
#include <string>
#include <vector>

#include "cqr/param_block.hpp"
#include "cqr/rng.hpp"
#include "cqr/vec.hpp"

namespace cqr {

// Set-to-vector aggregation: each input is expanded, split into groups, each
// group soft-assigned to clusters and gated by a per-group attention weight,
// and the residuals against cluster anchors are summed over all inputs.
struct NextVladConfig {
  int input_dim = 0;   // N
  int expansion = 2;   // lambda
  int groups = 4;      // G
  int clusters = 8;    // K
  bool normalize = true;  // intra-cluster L2 then global L2

  int expanded_dim() const { return expansion * input_dim; }
  int group_dim() const { return expanded_dim() / groups; }
  int output_dim() const { return clusters * group_dim(); }

  void validate() const;
};

struct NextVladSlots {
  int expand_W = -1;
  int expand_b = -1;
  int assign_W = -1;
  int assign_b = -1;
  int attn_W = -1;
  int attn_b = -1;
  int anchors = -1;  // clusters x group_dim
};

NextVladSlots add_nextvlad_slots(ParamBlock& block, const NextVladConfig& config,
                                 const std::string& prefix = "nextvlad.");

void init_nextvlad_params(ParamBlock& block, const NextVladSlots& slots,
                          const NextVladConfig& config, Rng& rng);

// Intermediate values a matching backward call needs.
struct NextVladCache {
  int n_images = 0;
  int input_dim = 0;
  std::vector<Vector> expanded;      // per image, expanded_dim
  std::vector<Vector> assignments;   // per image, groups*clusters softmax weights
  std::vector<Vector> attention;     // per image, groups sigmoid gates
  Vector raw;                        // pre-normalization descriptor
  Vector cluster_normed;             // after intra-cluster L2
  std::vector<double> cluster_norms;
  double global_norm = 0.0;
  bool normalized = false;
};

// Descriptor of length clusters * group_dim. An empty image list yields the
// zero descriptor and skips normalization.
Vector nextvlad_forward(std::span<const Vector> images, const ParamBlock& params,
                        const NextVladSlots& slots, const NextVladConfig& config,
                        NextVladCache* cache = nullptr);

// Exact gradients w.r.t. all parameters (accumulated into `grads`, which must
// share the parameter block layout) and optionally the input images. The
// cache must come from a forward call over the same images and parameters.
void nextvlad_backward(CVecRef grad_out, std::span<const Vector> images, const ParamBlock& params,
                       const NextVladSlots& slots, const NextVladConfig& config,
                       const NextVladCache& cache, ParamBlock& grads,
                       std::vector<Vector>* grad_images = nullptr);

}  // namespace cqr
