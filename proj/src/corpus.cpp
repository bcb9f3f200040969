#include "cqr/corpus.hpp"

#include <cmath>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

namespace cqr {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

json parse_line(const std::string& line, std::size_t line_no, const std::filesystem::path& path) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw DataError("malformed JSON at " + path.string() + ":" + std::to_string(line_no) + ": " +
                    e.what());
  }
}

Vector read_embedding(const json& arr, int expected_dim, const std::string& id,
                      const std::string& field) {
  if (!arr.is_array()) throw DataError("item '" + id + "': " + field + " must be an array");
  Vector out(static_cast<int>(arr.size()));
  int i = 0;
  for (const auto& v : arr) {
    if (!v.is_number()) throw DataError("item '" + id + "': " + field + " has a non-numeric entry");
    out[i] = v.get<double>();
    if (!std::isfinite(out[i])) {
      throw DataError("item '" + id + "': " + field + " has a non-finite entry");
    }
    ++i;
  }
  if (out.size() != expected_dim) {
    throw DataError("item '" + id + "': " + field + " has dimension " +
                    std::to_string(out.size()) + ", corpus declares " +
                    std::to_string(expected_dim));
  }
  return out;
}

std::int64_t read_count(const json& rec, const char* field, const std::string& id) {
  const auto& v = rec.at(field);
  if (!v.is_number_integer()) {
    throw DataError("item '" + id + "': " + std::string(field) + " must be an integer");
  }
  const auto count = v.get<std::int64_t>();
  if (count < 0) throw DataError("item '" + id + "': " + std::string(field) + " must be >= 0");
  return count;
}

}  // namespace

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus: " + path.string());

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw DataError("corpus is empty (no header line): " + path.string());
  ++line_no;

  const json header_json = parse_line(line, line_no, path);
  Corpus corpus;
  try {
    corpus.header.format_version = header_json.at("format_version").get<int>();
    corpus.header.d_text = header_json.at("d_text").get<int>();
    corpus.header.d_image = header_json.at("d_image").get<int>();
    corpus.header.item_count = header_json.at("item_count").get<std::int64_t>();
  } catch (const json::exception& e) {
    throw DataError("bad corpus header in " + path.string() + ": " + e.what());
  }
  if (corpus.header.format_version != 1) {
    throw DataError("unsupported corpus format_version " +
                    std::to_string(corpus.header.format_version));
  }
  if (corpus.header.d_text <= 0 || corpus.header.d_image <= 0) {
    throw DataError("corpus header dimensions must be positive");
  }

  std::unordered_set<std::string> seen_ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const json rec = parse_line(line, line_no, path);

    ContentItem item;
    try {
      item.id = rec.at("id").get<std::string>();
    } catch (const json::exception& e) {
      throw DataError("record at " + path.string() + ":" + std::to_string(line_no) +
                      " has no usable id: " + e.what());
    }
    if (item.id.empty()) {
      throw DataError("record at " + path.string() + ":" + std::to_string(line_no) +
                      " has an empty id");
    }
    if (!seen_ids.insert(item.id).second) throw DataError("duplicate item id '" + item.id + "'");

    try {
      item.text_embedding =
          read_embedding(rec.at("text_embedding"), corpus.header.d_text, item.id, "text_embedding");
      const auto& images = rec.at("image_embeddings");
      if (!images.is_array()) {
        throw DataError("item '" + item.id + "': image_embeddings must be an array");
      }
      for (const auto& img : images) {
        item.image_embeddings.push_back(
            read_embedding(img, corpus.header.d_image, item.id, "image_embeddings"));
      }
      item.engagement.likes = read_count(rec, "likes", item.id);
      item.engagement.retweets = read_count(rec, "retweets", item.id);
      item.engagement.comments = read_count(rec, "comments", item.id);
      const auto& hs = rec.at("human_score");
      if (!hs.is_null()) {
        if (!hs.is_number()) throw DataError("item '" + item.id + "': human_score must be a number or null");
        const double score = hs.get<double>();
        if (!std::isfinite(score) || score < 0.0 || score > 1.0) {
          throw DataError("item '" + item.id + "': human_score must lie in [0, 1]");
        }
        item.human_score = score;
      }
    } catch (const json::exception& e) {
      throw DataError("bad record for item '" + item.id + "' at " + path.string() + ":" +
                      std::to_string(line_no) + ": " + e.what());
    }
    corpus.items.push_back(std::move(item));
  }

  if (corpus.header.item_count != static_cast<std::int64_t>(corpus.items.size())) {
    throw DataError("corpus header declares " + std::to_string(corpus.header.item_count) +
                    " items but file contains " + std::to_string(corpus.items.size()));
  }
  return corpus;
}

void save_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  if (corpus.header.item_count != static_cast<std::int64_t>(corpus.items.size())) {
    throw DataError("corpus header item_count does not match item list");
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open corpus for writing: " + path.string());

  ordered_json header;
  header["format_version"] = corpus.header.format_version;
  header["d_text"] = corpus.header.d_text;
  header["d_image"] = corpus.header.d_image;
  header["item_count"] = corpus.header.item_count;
  out << header.dump() << '\n';

  for (const auto& item : corpus.items) {
    ordered_json rec;
    rec["id"] = item.id;
    rec["text_embedding"] = item.text_embedding.v;
    auto images = ordered_json::array();
    for (const auto& img : item.image_embeddings) images.push_back(img.v);
    rec["image_embeddings"] = std::move(images);
    rec["likes"] = item.engagement.likes;
    rec["retweets"] = item.engagement.retweets;
    rec["comments"] = item.engagement.comments;
    if (item.human_score.has_value()) {
      rec["human_score"] = *item.human_score;
    } else {
      rec["human_score"] = nullptr;
    }
    out << rec.dump() << '\n';
  }
  if (!out) throw IoError("failed writing corpus: " + path.string());
}

ContentItem truncate_images(ContentItem item, int m_max) {
  if (m_max < 1) throw ConfigError("truncate_images: m_max must be >= 1");
  if (static_cast<int>(item.image_embeddings.size()) > m_max) {
    item.image_embeddings.resize(static_cast<std::size_t>(m_max));
  }
  return item;
}

}  // namespace cqr
