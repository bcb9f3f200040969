#include "cqr/nextvlad.hpp"

#include <cmath>
#include <string>

#include "cqr/ops.hpp"

namespace cqr {

void NextVladConfig::validate() const {
  if (input_dim < 1) throw ConfigError("nextvlad: input_dim must be >= 1");
  if (expansion < 1) throw ConfigError("nextvlad: expansion must be >= 1");
  if (groups < 1) throw ConfigError("nextvlad: groups must be >= 1");
  if (clusters < 1) throw ConfigError("nextvlad: clusters must be >= 1");
  if (expanded_dim() % groups != 0) {
    throw ConfigError("nextvlad: expansion * input_dim (" + std::to_string(expanded_dim()) +
                      ") must be divisible by groups (" + std::to_string(groups) + ")");
  }
}

NextVladSlots add_nextvlad_slots(ParamBlock& block, const NextVladConfig& config,
                                 const std::string& prefix) {
  config.validate();
  const int expanded = config.expanded_dim();
  NextVladSlots slots;
  slots.expand_W = block.add_matrix(prefix + "expand.W", expanded, config.input_dim);
  slots.expand_b = block.add_vector(prefix + "expand.b", expanded);
  slots.assign_W = block.add_matrix(prefix + "assign.W", config.groups * config.clusters, expanded);
  slots.assign_b = block.add_vector(prefix + "assign.b", config.groups * config.clusters);
  slots.attn_W = block.add_matrix(prefix + "attn.W", config.groups, expanded);
  slots.attn_b = block.add_vector(prefix + "attn.b", config.groups);
  slots.anchors = block.add_matrix(prefix + "anchors", config.clusters, config.group_dim());
  return slots;
}

namespace {

void he_init(MatRef W, Rng& rng) {
  const double stddev = std::sqrt(2.0 / static_cast<double>(W.cols));
  for (int r = 0; r < W.rows; ++r) {
    for (int c = 0; c < W.cols; ++c) W.at(r, c) = rng.normal(0.0, stddev);
  }
}

}  // namespace

void init_nextvlad_params(ParamBlock& block, const NextVladSlots& slots,
                          const NextVladConfig& config, Rng& rng) {
  he_init(block.mat(slots.expand_W), rng);
  he_init(block.mat(slots.assign_W), rng);
  he_init(block.mat(slots.attn_W), rng);
  const double anchor_scale = 1.0 / std::sqrt(static_cast<double>(config.group_dim()));
  MatRef anchors = block.mat(slots.anchors);
  for (int k = 0; k < anchors.rows; ++k) {
    for (int j = 0; j < anchors.cols; ++j) anchors.at(k, j) = rng.normal(0.0, anchor_scale);
  }
  // biases stay zero: attention gates start at 1/2, assignments uniform
}

Vector nextvlad_forward(std::span<const Vector> images, const ParamBlock& params,
                        const NextVladSlots& slots, const NextVladConfig& config,
                        NextVladCache* cache) {
  config.validate();
  const int n = config.input_dim;
  const int expanded = config.expanded_dim();
  const int d = config.group_dim();
  const int G = config.groups;
  const int K = config.clusters;
  const CMatRef anchors = params.mat(slots.anchors);

  NextVladCache local;
  NextVladCache& c = cache ? *cache : local;
  c = NextVladCache{};
  c.n_images = static_cast<int>(images.size());
  c.input_dim = n;
  c.raw = Vector(config.output_dim());

  for (std::size_t i = 0; i < images.size(); ++i) {
    const Vector& x = images[i];
    require_shape(x.size() == n, "nextvlad_forward: image " + std::to_string(i) +
                                     " has dimension " + std::to_string(x.size()) +
                                     ", config expects " + std::to_string(n));

    Vector e(expanded);
    affine_forward(x, params.mat(slots.expand_W), params.vec(slots.expand_b), e);

    Vector logits(G * K);
    affine_forward(e, params.mat(slots.assign_W), params.vec(slots.assign_b), logits);
    Vector assign(G * K);
    for (int g = 0; g < G; ++g) {
      softmax_forward(CVecRef(logits.data() + g * K, K), VecRef(assign.data() + g * K, K));
    }

    Vector attn_logits(G);
    affine_forward(e, params.mat(slots.attn_W), params.vec(slots.attn_b), attn_logits);
    Vector attn(G);
    sigmoid_forward(attn_logits, attn);

    for (int g = 0; g < G; ++g) {
      const double* group = e.data() + g * d;
      for (int k = 0; k < K; ++k) {
        const double w = attn[g] * assign[g * K + k];
        double* out = c.raw.data() + k * d;
        const double* anchor_row = anchors.p + static_cast<std::size_t>(k) * d;
        for (int j = 0; j < d; ++j) out[j] += w * (group[j] - anchor_row[j]);
      }
    }

    c.expanded.push_back(std::move(e));
    c.assignments.push_back(std::move(assign));
    c.attention.push_back(std::move(attn));
  }

  if (!config.normalize || images.empty()) {
    c.normalized = false;
    return c.raw;
  }

  c.normalized = true;
  c.cluster_normed = c.raw;
  c.cluster_norms.assign(static_cast<std::size_t>(K), 0.0);
  for (int k = 0; k < K; ++k) {
    double sq = 0.0;
    const double* seg = c.raw.data() + k * d;
    for (int j = 0; j < d; ++j) sq += seg[j] * seg[j];
    const double norm = std::sqrt(sq);
    c.cluster_norms[static_cast<std::size_t>(k)] = norm;
    if (norm > 0.0) {
      double* out = c.cluster_normed.data() + k * d;
      for (int j = 0; j < d; ++j) out[j] /= norm;
    }
  }
  double sq = 0.0;
  for (double v : c.cluster_normed.v) sq += v * v;
  c.global_norm = std::sqrt(sq);
  Vector y = c.cluster_normed;
  if (c.global_norm > 0.0) {
    for (double& v : y.v) v /= c.global_norm;
  }
  return y;
}

void nextvlad_backward(CVecRef grad_out, std::span<const Vector> images, const ParamBlock& params,
                       const NextVladSlots& slots, const NextVladConfig& config,
                       const NextVladCache& cache, ParamBlock& grads,
                       std::vector<Vector>* grad_images) {
  config.validate();
  const int n = config.input_dim;
  const int expanded = config.expanded_dim();
  const int d = config.group_dim();
  const int G = config.groups;
  const int K = config.clusters;

  if (cache.n_images != static_cast<int>(images.size()) || cache.input_dim != n ||
      static_cast<int>(cache.expanded.size()) != cache.n_images ||
      cache.raw.size() != config.output_dim()) {
    throw Error("nextvlad_backward: cache does not match the given images and config");
  }
  require_shape(grad_out.n == config.output_dim(),
                "nextvlad_backward: grad_out has length " + std::to_string(grad_out.n) +
                    ", descriptor length is " + std::to_string(config.output_dim()));
  if (grads.size() != params.size()) {
    throw ShapeError("nextvlad_backward: gradient block does not match parameter block");
  }

  const CMatRef anchors = params.mat(slots.anchors);
  const CMatRef assign_W = params.mat(slots.assign_W);
  const CMatRef attn_W = params.mat(slots.attn_W);

  // backward through the two-stage normalization
  Vector graw(config.output_dim());
  if (cache.normalized) {
    Vector y = cache.cluster_normed;
    if (cache.global_norm > 0.0) {
      for (double& v : y.v) v /= cache.global_norm;
    }
    Vector gz(config.output_dim());
    if (cache.global_norm > 0.0) {
      double dot = 0.0;
      for (int i = 0; i < grad_out.n; ++i) dot += y[i] * grad_out[i];
      for (int i = 0; i < grad_out.n; ++i) gz[i] = (grad_out[i] - dot * y[i]) / cache.global_norm;
    } else {
      for (int i = 0; i < grad_out.n; ++i) gz[i] = grad_out[i];
    }
    for (int k = 0; k < K; ++k) {
      const double norm = cache.cluster_norms[static_cast<std::size_t>(k)];
      const double* zk = cache.cluster_normed.data() + k * d;
      const double* gzk = gz.data() + k * d;
      double* out = graw.data() + k * d;
      if (norm > 0.0) {
        double dot = 0.0;
        for (int j = 0; j < d; ++j) dot += zk[j] * gzk[j];
        for (int j = 0; j < d; ++j) out[j] = (gzk[j] - dot * zk[j]) / norm;
      } else {
        for (int j = 0; j < d; ++j) out[j] = gzk[j];
      }
    }
  } else {
    for (int i = 0; i < grad_out.n; ++i) graw[i] = grad_out[i];
  }

  if (grad_images) {
    grad_images->assign(images.size(), Vector(n));
  }

  MatRef g_anchors = grads.mat(slots.anchors);
  MatRef g_assign_W = grads.mat(slots.assign_W);
  VecRef g_assign_b = grads.vec(slots.assign_b);
  MatRef g_attn_W = grads.mat(slots.attn_W);
  VecRef g_attn_b = grads.vec(slots.attn_b);
  Vector residual_dot(G * K);  // per image: sum_j graw[k,j] * (e[g,j] - c[k,j])
  Vector g_assign(G * K);
  Vector g_attn(G);
  Vector g_logits(G * K);
  Vector g_attn_logits(G);
  Vector g_expanded(expanded);
  Vector g_x(n);

  for (std::size_t i = 0; i < images.size(); ++i) {
    const Vector& e = cache.expanded[i];
    const Vector& assign = cache.assignments[i];
    const Vector& attn = cache.attention[i];

    for (int g = 0; g < G; ++g) {
      const double* group = e.data() + g * d;
      for (int k = 0; k < K; ++k) {
        const double* anchor_row = anchors.p + static_cast<std::size_t>(k) * d;
        const double* graw_k = graw.data() + k * d;
        double acc = 0.0;
        for (int j = 0; j < d; ++j) acc += graw_k[j] * (group[j] - anchor_row[j]);
        residual_dot[g * K + k] = acc;
      }
    }

    for (int g = 0; g < G; ++g) {
      double acc = 0.0;
      for (int k = 0; k < K; ++k) {
        acc += assign[g * K + k] * residual_dot[g * K + k];
        g_assign[g * K + k] = attn[g] * residual_dot[g * K + k];
      }
      g_attn[g] = acc;
    }

    // residual path into the expanded vector, plus anchor gradients
    for (int g = 0; g < G; ++g) {
      double* ge_group = g_expanded.data() + g * d;
      for (int j = 0; j < d; ++j) ge_group[j] = 0.0;
      for (int k = 0; k < K; ++k) {
        const double w = attn[g] * assign[g * K + k];
        const double* graw_k = graw.data() + k * d;
        double* ganchor_row = g_anchors.p + static_cast<std::size_t>(k) * d;
        for (int j = 0; j < d; ++j) {
          ge_group[j] += w * graw_k[j];
          ganchor_row[j] -= w * graw_k[j];
        }
      }
    }

    // soft-assignment softmax, per group
    for (int g = 0; g < G; ++g) {
      softmax_backward(CVecRef(assign.data() + g * K, K), CVecRef(g_assign.data() + g * K, K),
                       VecRef(g_logits.data() + g * K, K));
    }
    sigmoid_backward(attn, g_attn, g_attn_logits);

    // g_expanded currently holds the residual path; add the two logit paths
    for (int r = 0; r < G * K; ++r) {
      const double g = g_logits[r];
      g_assign_b[r] += g;
      const double* row = assign_W.p + static_cast<std::size_t>(r) * expanded;
      double* grow = g_assign_W.p + static_cast<std::size_t>(r) * expanded;
      for (int c2 = 0; c2 < expanded; ++c2) {
        grow[c2] += g * e[c2];
        g_expanded[c2] += row[c2] * g;
      }
    }
    for (int r = 0; r < G; ++r) {
      const double g = g_attn_logits[r];
      g_attn_b[r] += g;
      const double* row = attn_W.p + static_cast<std::size_t>(r) * expanded;
      double* grow = g_attn_W.p + static_cast<std::size_t>(r) * expanded;
      for (int c2 = 0; c2 < expanded; ++c2) {
        grow[c2] += g * e[c2];
        g_expanded[c2] += row[c2] * g;
      }
    }

    affine_backward(images[i], params.mat(slots.expand_W), g_expanded, g_x,
                    grads.mat(slots.expand_W), grads.vec(slots.expand_b));
    if (grad_images) (*grad_images)[i] = g_x;
  }
}

}  // namespace cqr
