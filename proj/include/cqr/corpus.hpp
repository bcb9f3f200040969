#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cqr/vec.hpp"

namespace cqr {

struct Engagement {
  std::int64_t likes = 0;
  std::int64_t retweets = 0;
  std::int64_t comments = 0;
};

// One blog/tweet: a text embedding, zero or more image embeddings, the
// engagement counters used for labeling, and an optional audited score.
struct ContentItem {
  std::string id;
  Vector text_embedding;
  std::vector<Vector> image_embeddings;
  Engagement engagement;
  std::optional<double> human_score;
};

struct CorpusHeader {
  int format_version = 1;
  int d_text = 0;
  int d_image = 0;
  std::int64_t item_count = 0;
};

struct Corpus {
  CorpusHeader header;
  std::vector<ContentItem> items;
};

// Line-delimited JSON: one header line, one record line per item.
// Validates the whole file and rejects it on the first violation:
// malformed lines are reported with their line number, embedding dimension
// mismatches and bad values with the offending item id.
Corpus load_corpus(const std::filesystem::path& path);

void save_corpus(const std::filesystem::path& path, const Corpus& corpus);

// Keeps the first min(count, m_max) image embeddings in file order.
ContentItem truncate_images(ContentItem item, int m_max);

}  // namespace cqr
