#include "cqr/ranker.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include "cqr/ops.hpp"
#include "cqr/optim.hpp"

namespace cqr {

OptimizerKind optimizer_from_string(const std::string& name) {
  if (name == "adam") return OptimizerKind::adam;
  if (name == "sgd") return OptimizerKind::sgd;
  throw ConfigError("unknown optimizer '" + name + "' (expected adam|sgd)");
}

std::string to_string(OptimizerKind kind) {
  return kind == OptimizerKind::adam ? "adam" : "sgd";
}

void RankerConfig::validate() const {
  if (sigma <= 0.0) throw ConfigError("ranker: sigma must be positive");
  if (hidden_widths.empty()) throw ConfigError("ranker: hidden_widths must be non-empty");
  for (int w : hidden_widths) {
    if (w < 1) throw ConfigError("ranker: hidden widths must be >= 1");
  }
  if (lr <= 0.0) throw ConfigError("ranker: lr must be positive");
  if (lr_decay_factor <= 0.0) throw ConfigError("ranker: lr_decay_factor must be positive");
  if (decay_every < 1) throw ConfigError("ranker: decay_every must be >= 1");
  if (total_iterations < 1) throw ConfigError("ranker: total_iterations must be >= 1");
  if (batch_pairs < 1) throw ConfigError("ranker: batch_pairs must be >= 1");
  if (m_max < 1) throw ConfigError("ranker: m_max must be >= 1");
}

RankerConfig RankerConfig::sgd_schedule_preset() {
  RankerConfig config;
  config.optimizer = OptimizerKind::sgd;
  config.lr = 1e-5;
  config.lr_decay_factor = 0.08;
  config.decay_every = 10000;
  config.total_iterations = 50000;
  return config;
}

RankerModel build_ranker_structure(const RankerConfig& config, int d_text, int d_image) {
  if (d_text < 1) throw ConfigError("ranker: text embedding dimension must be >= 1");
  if (d_image < 1) throw ConfigError("ranker: image embedding dimension must be >= 1");
  RankerModel model;
  model.config = config;
  model.config.nextvlad.input_dim = d_image;
  model.config.validate();
  model.config.nextvlad.validate();
  model.d_text = d_text;

  model.nextvlad_slots = add_nextvlad_slots(model.params, model.config.nextvlad);

  int in_width = d_text + model.config.nextvlad.output_dim();
  std::vector<int> widths = model.config.hidden_widths;
  widths.push_back(1);
  for (std::size_t layer = 0; layer < widths.size(); ++layer) {
    const std::string base = "head.L" + std::to_string(layer) + ".";
    const int w_slot = model.params.add_matrix(base + "W", widths[layer], in_width);
    const int b_slot = model.params.add_vector(base + "b", widths[layer]);
    model.head_slots.emplace_back(w_slot, b_slot);
    in_width = widths[layer];
  }
  return model;
}

RankerModel make_ranker(const RankerConfig& config, int d_text, int d_image) {
  RankerModel model = build_ranker_structure(config, d_text, d_image);
  Rng rng(derive_seed(config.seed, "init"));
  init_nextvlad_params(model.params, model.nextvlad_slots, model.config.nextvlad, rng);
  for (const auto& [w_slot, b_slot] : model.head_slots) {
    MatRef W = model.params.mat(w_slot);
    const double stddev = std::sqrt(2.0 / static_cast<double>(W.cols));
    for (int r = 0; r < W.rows; ++r) {
      for (int c = 0; c < W.cols; ++c) W.at(r, c) = rng.normal(0.0, stddev);
    }
  }
  return model;
}

namespace {

struct ScoreCache {
  std::vector<Vector> images;  // after truncation; backward needs them
  NextVladCache nextvlad;
  Vector fused;
  std::vector<Vector> pre;   // affine outputs per layer
  std::vector<Vector> post;  // relu outputs per hidden layer
};

double score_forward(const RankerModel& model, const ContentItem& item, ScoreCache& cache) {
  require_shape(item.text_embedding.size() == model.d_text,
                "score: text embedding has dimension " +
                    std::to_string(item.text_embedding.size()) + ", model expects " +
                    std::to_string(model.d_text));

  const auto keep = std::min<std::size_t>(item.image_embeddings.size(),
                                          static_cast<std::size_t>(model.config.m_max));
  cache.images.assign(item.image_embeddings.begin(),
                      item.image_embeddings.begin() + static_cast<std::ptrdiff_t>(keep));

  Vector descriptor = nextvlad_forward(cache.images, model.params, model.nextvlad_slots,
                                       model.config.nextvlad, &cache.nextvlad);

  cache.fused = Vector(model.d_text + descriptor.size());
  std::copy(item.text_embedding.v.begin(), item.text_embedding.v.end(), cache.fused.v.begin());
  std::copy(descriptor.v.begin(), descriptor.v.end(),
            cache.fused.v.begin() + model.d_text);

  cache.pre.clear();
  cache.post.clear();
  const Vector* input = &cache.fused;
  for (std::size_t layer = 0; layer < model.head_slots.size(); ++layer) {
    const auto& [w_slot, b_slot] = model.head_slots[layer];
    CMatRef W = model.params.mat(w_slot);
    Vector out(W.rows);
    affine_forward(*input, W, model.params.vec(b_slot), out);
    cache.pre.push_back(std::move(out));
    if (layer + 1 < model.head_slots.size()) {
      Vector activated(cache.pre.back().size());
      relu_forward(cache.pre.back(), activated);
      cache.post.push_back(std::move(activated));
      input = &cache.post.back();
    }
  }
  return cache.pre.back()[0];
}

void score_backward(const RankerModel& model, const ScoreCache& cache, double grad_score,
                    ParamBlock& grads) {
  const std::size_t n_layers = model.head_slots.size();
  Vector grad_pre{grad_score};
  for (std::size_t layer = n_layers; layer-- > 0;) {
    const auto& [w_slot, b_slot] = model.head_slots[layer];
    const CVecRef input = layer == 0 ? CVecRef(cache.fused) : CVecRef(cache.post[layer - 1]);
    Vector grad_input(input.n);
    affine_backward(input, model.params.mat(w_slot), grad_pre, grad_input, grads.mat(w_slot),
                    grads.vec(b_slot));
    if (layer == 0) {
      // text embedding is an input, not a parameter; only the descriptor
      // part propagates further
      const int desc_len = cache.fused.size() - model.d_text;
      CVecRef grad_desc(grad_input.data() + model.d_text, desc_len);
      nextvlad_backward(grad_desc, cache.images, model.params, model.nextvlad_slots,
                        model.config.nextvlad, cache.nextvlad, grads, nullptr);
    } else {
      Vector next(grad_input.size());
      relu_backward(cache.pre[layer - 1], grad_input, next);
      grad_pre = std::move(next);
    }
  }
}

}  // namespace

double score_item(const RankerModel& model, const ContentItem& item) {
  ScoreCache cache;
  return score_forward(model, item, cache);
}

std::vector<double> predict_batch(const RankerModel& model, std::span<const ContentItem> items) {
  std::vector<double> scores;
  scores.reserve(items.size());
  for (const auto& item : items) {
    try {
      scores.push_back(score_item(model, item));
    } catch (const ShapeError& e) {
      throw ShapeError("item '" + item.id + "': " + e.what());
    }
  }
  return scores;
}

double pair_prob(double s_i, double s_j, double sigma) {
  if (sigma <= 0.0) throw ConfigError("pair_prob: sigma must be positive");
  return sigmoid(sigma * (s_i - s_j));
}

PairLossTerms pair_loss(double s_i, double s_j, int x_ij, double sigma) {
  if (sigma <= 0.0) throw ConfigError("pair_loss: sigma must be positive");
  if (x_ij < -1 || x_ij > 1) throw ConfigError("pair_loss: x_ij must be -1, 0 or +1");
  PairLossTerms terms;
  terms.s_i = s_i;
  terms.s_j = s_j;
  terms.o = sigma * (s_i - s_j);
  terms.p = sigmoid(terms.o);
  terms.p_bar = 0.5 * (1.0 + static_cast<double>(x_ij));
  // softplus(o) = max(o, 0) + log1p(exp(-|o|)) keeps the loss finite for
  // score gaps far beyond exp overflow
  const double softplus = std::max(terms.o, 0.0) + std::log1p(std::exp(-std::abs(terms.o)));
  terms.c = -terms.p_bar * terms.o + softplus;
  terms.dc_ds_i = sigma * (terms.p - terms.p_bar);
  return terms;
}

double pair_loss_value(const RankerModel& model, const ContentItem& a, const ContentItem& b,
                       int x_ij) {
  const double s_i = score_item(model, a);
  const double s_j = score_item(model, b);
  return pair_loss(s_i, s_j, x_ij, model.config.sigma).c;
}

double pair_loss_with_grad(const RankerModel& model, const ContentItem& a, const ContentItem& b,
                           int x_ij, ParamBlock& grads) {
  ScoreCache cache_a;
  ScoreCache cache_b;
  const double s_i = score_forward(model, a, cache_a);
  const double s_j = score_forward(model, b, cache_b);
  const PairLossTerms terms = pair_loss(s_i, s_j, x_ij, model.config.sigma);
  score_backward(model, cache_a, terms.dc_ds_i, grads);
  score_backward(model, cache_b, -terms.dc_ds_i, grads);
  return terms.c;
}

double square_loss_with_grad(const RankerModel& model, const ContentItem& item, double target,
                             ParamBlock& grads) {
  ScoreCache cache;
  const double s = score_forward(model, item, cache);
  const double err = s - target;
  score_backward(model, cache, err, grads);
  return 0.5 * err * err;
}

namespace {

class Stepper {
 public:
  Stepper(const RankerConfig& config, std::size_t n_params) : config_(config), lr_(config.lr) {
    if (config.optimizer == OptimizerKind::adam) {
      adam_ = AdamState::create(n_params, config.lr);
    }
  }

  void step(std::span<double> params, std::span<const double> grads) {
    if (config_.optimizer == OptimizerKind::adam) {
      adam_.lr = lr_;
      adam_step(params, grads, adam_);
    } else {
      sgd_step(params, grads, lr_);
    }
  }

  void maybe_decay(int finished_iterations) {
    if (config_.lr_decay_factor != 1.0 && finished_iterations % config_.decay_every == 0) {
      lr_ *= config_.lr_decay_factor;
    }
  }

  double lr() const { return lr_; }

 private:
  const RankerConfig& config_;
  double lr_;
  AdamState adam_;
};

}  // namespace

TrainResult train_ranker(const std::vector<ContentItem>& items,
                         const std::vector<PairSample>& pairs, const RankerConfig& config,
                         int d_text, int d_image) {
  config.validate();
  if (pairs.empty()) throw ConfigError("train_ranker: pair list is empty");

  std::unordered_map<std::string, std::size_t> index_of;
  index_of.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) index_of.emplace(items[i].id, i);
  struct ResolvedPair {
    std::size_t a;
    std::size_t b;
    int x;
  };
  std::vector<ResolvedPair> resolved;
  resolved.reserve(pairs.size());
  for (const auto& pair : pairs) {
    const auto ia = index_of.find(pair.a);
    const auto ib = index_of.find(pair.b);
    if (ia == index_of.end()) throw DataError("pair references missing id '" + pair.a + "'");
    if (ib == index_of.end()) throw DataError("pair references missing id '" + pair.b + "'");
    resolved.push_back({ia->second, ib->second, pair.x});
  }

  TrainResult result;
  result.model = make_ranker(config, d_text, d_image);
  RankerModel& model = result.model;

  ParamBlock grads = model.params.zeros_like();
  Stepper stepper(model.config, model.params.size());
  Rng rng(derive_seed(config.seed, "train"));
  const double inv_batch = 1.0 / static_cast<double>(config.batch_pairs);

  ScoreCache cache_a;
  ScoreCache cache_b;
  for (int iteration = 0; iteration < config.total_iterations; ++iteration) {
    grads.fill(0.0);
    double loss_sum = 0.0;
    for (int b = 0; b < config.batch_pairs; ++b) {
      const auto& pick = resolved[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(resolved.size()) - 1))];
      const double s_i = score_forward(model, items[pick.a], cache_a);
      const double s_j = score_forward(model, items[pick.b], cache_b);
      const PairLossTerms terms = pair_loss(s_i, s_j, pick.x, model.config.sigma);
      loss_sum += terms.c;
      score_backward(model, cache_a, terms.dc_ds_i * inv_batch, grads);
      score_backward(model, cache_b, -terms.dc_ds_i * inv_batch, grads);
    }
    const double mean_loss = loss_sum * inv_batch;
    if (!std::isfinite(mean_loss)) {
      throw DivergenceError("training loss went non-finite at iteration " +
                            std::to_string(iteration));
    }
    result.log.push_back({iteration, mean_loss, stepper.lr()});
    stepper.step(model.params.flat(), grads.flat());
    stepper.maybe_decay(iteration + 1);
  }
  return result;
}

TrainResult train_square_baseline(const std::vector<ContentItem>& items,
                                  const std::vector<double>& targets, const RankerConfig& config,
                                  int d_text, int d_image) {
  config.validate();
  if (items.empty()) throw ConfigError("train_square_baseline: item list is empty");
  if (items.size() != targets.size()) {
    throw ShapeError("train_square_baseline: items and targets differ in length");
  }

  TrainResult result;
  result.model = make_ranker(config, d_text, d_image);
  RankerModel& model = result.model;

  ParamBlock grads = model.params.zeros_like();
  Stepper stepper(model.config, model.params.size());
  Rng rng(derive_seed(config.seed, "train"));
  const double inv_batch = 1.0 / static_cast<double>(config.batch_pairs);

  ScoreCache cache;
  for (int iteration = 0; iteration < config.total_iterations; ++iteration) {
    grads.fill(0.0);
    double loss_sum = 0.0;
    for (int b = 0; b < config.batch_pairs; ++b) {
      const auto idx = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(items.size()) - 1));
      const double s = score_forward(model, items[idx], cache);
      const double err = s - targets[idx];
      loss_sum += 0.5 * err * err;
      score_backward(model, cache, err * inv_batch, grads);
    }
    const double mean_loss = loss_sum * inv_batch;
    if (!std::isfinite(mean_loss)) {
      throw DivergenceError("baseline loss went non-finite at iteration " +
                            std::to_string(iteration));
    }
    result.log.push_back({iteration, mean_loss, stepper.lr()});
    stepper.step(model.params.flat(), grads.flat());
    stepper.maybe_decay(iteration + 1);
  }
  return result;
}

void write_train_log(const std::filesystem::path& path, const std::vector<TrainLogRow>& log,
                     const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open training log for writing: " + path.string());
  if (!header_comment.empty()) {
    std::size_t start = 0;
    while (start < header_comment.size()) {
      auto end = header_comment.find('\n', start);
      if (end == std::string::npos) end = header_comment.size();
      out << "# " << header_comment.substr(start, end - start) << '\n';
      start = end + 1;
    }
  }
  out << "iteration,loss,lr\n";
  out.precision(17);
  for (const auto& row : log) {
    out << row.iteration << ',' << row.loss << ',' << row.lr << '\n';
  }
  if (!out) throw IoError("failed writing training log: " + path.string());
}

void save_ranker(const std::filesystem::path& path, const RankerModel& model) {
  nlohmann::ordered_json info;
  info["d_text"] = model.d_text;
  info["d_image"] = model.config.nextvlad.input_dim;
  info["m_max"] = model.config.m_max;
  info["sigma"] = model.config.sigma;
  info["hidden_widths"] = model.config.hidden_widths;
  info["nextvlad"] = {{"expansion", model.config.nextvlad.expansion},
                      {"groups", model.config.nextvlad.groups},
                      {"clusters", model.config.nextvlad.clusters},
                      {"normalize", model.config.nextvlad.normalize}};
  save_param_block(path, model.params, {{"model", info}});
}

RankerModel load_ranker(const std::filesystem::path& path) {
  LoadedParamBlock loaded = load_param_block(path);
  if (!loaded.manifest.contains("model")) {
    throw DataError("checkpoint has no model section: " + path.string());
  }
  const auto& info = loaded.manifest.at("model");
  RankerConfig config;
  try {
    config.m_max = info.at("m_max").get<int>();
    config.sigma = info.at("sigma").get<double>();
    config.hidden_widths = info.at("hidden_widths").get<std::vector<int>>();
    const auto& nv = info.at("nextvlad");
    config.nextvlad.expansion = nv.at("expansion").get<int>();
    config.nextvlad.groups = nv.at("groups").get<int>();
    config.nextvlad.clusters = nv.at("clusters").get<int>();
    config.nextvlad.normalize = nv.at("normalize").get<bool>();
    RankerModel model = build_ranker_structure(config, info.at("d_text").get<int>(),
                                               info.at("d_image").get<int>());
    // the rebuilt slot table must agree with the serialized one
    if (model.params.slots().size() != loaded.params.slots().size()) {
      throw DataError("checkpoint slot table does not match its model section");
    }
    for (std::size_t i = 0; i < model.params.slots().size(); ++i) {
      const auto& ours = model.params.slots()[i];
      const auto& theirs = loaded.params.slots()[i];
      if (ours.name != theirs.name || ours.rows != theirs.rows || ours.cols != theirs.cols ||
          ours.offset != theirs.offset) {
        throw DataError("checkpoint slot '" + theirs.name + "' does not match its model section");
      }
    }
    model.params.set_flat(loaded.params.flat());
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad model section in checkpoint " + path.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw DataError("checkpoint " + path.string() + " declares an invalid model: " + e.what());
  }
}

}  // namespace cqr
