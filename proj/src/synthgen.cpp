#include "cqr/synthgen.hpp"

#include <cmath>
#include <cstdio>

#include "cqr/rng.hpp"

namespace cqr {

void SynthConfig::validate() const {
  if (n_items < 1) throw ConfigError("synth: n_items must be >= 1");
  if (d_text < 1 || d_image < 1) throw ConfigError("synth: embedding dimensions must be >= 1");
  if (images_min < 0) throw ConfigError("synth: images_min must be >= 0");
  if (images_max < images_min) throw ConfigError("synth: images_max must be >= images_min");
  if (images_max > 8) throw ConfigError("synth: images_max must be <= 8");
  if (rho < 0.0 || rho > 1.0) throw ConfigError("synth: rho must lie in [0, 1]");
  if (noise_scale < 0.0) throw ConfigError("synth: noise_scale must be >= 0");
  if (engagement_noise < 0.0) throw ConfigError("synth: engagement_noise must be >= 0");
  for (double a : engagement_scale) {
    if (a < 0.0) throw ConfigError("synth: engagement_scale entries must be >= 0");
  }
}

namespace {

Vector unit_direction(int dim, Rng& rng) {
  Vector u(dim);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (int i = 0; i < dim; ++i) {
      u[i] = rng.normal();
      norm += u[i] * u[i];
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (int i = 0; i < dim; ++i) u[i] /= norm;
  return u;
}

std::int64_t sample_count(double scale, double q, double noise, Rng& rng) {
  const double value = std::exp(scale * q + noise * rng.normal());
  return static_cast<std::int64_t>(std::llround(value));
}

}  // namespace

Corpus generate_corpus(const SynthConfig& config) {
  config.validate();
  Rng rng(config.seed);

  const Vector u_text = unit_direction(config.d_text, rng);
  const Vector u_image = unit_direction(config.d_image, rng);

  Corpus corpus;
  corpus.header.d_text = config.d_text;
  corpus.header.d_image = config.d_image;
  corpus.header.item_count = config.n_items;

  char id_buf[32];
  for (int i = 0; i < config.n_items; ++i) {
    const double q = rng.uniform();
    ContentItem item;
    std::snprintf(id_buf, sizeof(id_buf), "synth-%06d", i);
    item.id = id_buf;

    item.text_embedding = Vector(config.d_text);
    for (int j = 0; j < config.d_text; ++j) {
      item.text_embedding[j] =
          config.rho * q * u_text[j] + (1.0 - config.rho) * config.noise_scale * rng.normal();
    }

    const auto n_images = static_cast<int>(rng.uniform_int(config.images_min, config.images_max));
    for (int k = 0; k < n_images; ++k) {
      Vector img(config.d_image);
      for (int j = 0; j < config.d_image; ++j) {
        img[j] = config.rho * q * u_image[j] + (1.0 - config.rho) * config.noise_scale * rng.normal();
      }
      item.image_embeddings.push_back(std::move(img));
    }

    item.engagement.likes = sample_count(config.engagement_scale[0], q, config.engagement_noise, rng);
    item.engagement.retweets =
        sample_count(config.engagement_scale[1], q, config.engagement_noise, rng);
    item.engagement.comments =
        sample_count(config.engagement_scale[2], q, config.engagement_noise, rng);
    item.human_score = q;
    corpus.items.push_back(std::move(item));
  }
  return corpus;
}

}  // namespace cqr
