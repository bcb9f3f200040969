#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "cqr/labeling.hpp"
#include "cqr/rng.hpp"

using namespace cqr;

namespace {

ContentItem item_with_counts(std::int64_t likes, std::int64_t retweets, std::int64_t comments) {
  ContentItem item;
  item.id = "x";
  item.engagement = {likes, retweets, comments};
  return item;
}

}  // namespace

TEST_CASE("all-zero counts score zero") {
  CHECK(engagement_score(item_with_counts(0, 0, 0), LabelWeights{}, false) == 0.0);
}

TEST_CASE("likes-only weighting evaluates log1p directly") {
  // log(1 + (e - 1)) = 1
  const auto likes = static_cast<std::int64_t>(std::llround(std::exp(1.0) - 1.0));
  ContentItem item = item_with_counts(likes, 123, 456);
  const double score = engagement_score(item, LabelWeights{1.0, 0.0, 0.0}, false);
  CHECK(score == doctest::Approx(std::log1p(static_cast<double>(likes))));
  CHECK(score == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("doubling counts never decreases the score") {
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const auto l = rng.uniform_int(0, 2000);
    const auto r = rng.uniform_int(0, 400);
    const auto c = rng.uniform_int(0, 100);
    const LabelWeights weights{rng.uniform(), rng.uniform(), rng.uniform(0.1, 2.0)};
    const double base = engagement_score(item_with_counts(l, r, c), weights, false);
    const double doubled = engagement_score(item_with_counts(2 * l, 2 * r, 2 * c), weights, false);
    CHECK(doubled >= base);
  }
}

TEST_CASE("all-zero weights are a configuration error") {
  CHECK_THROWS_AS(engagement_score(item_with_counts(1, 2, 3), LabelWeights{0.0, 0.0, 0.0}, false),
                  ConfigError);
}

TEST_CASE("human score overrides engagement when enabled") {
  ContentItem item = item_with_counts(100, 50, 10);
  item.human_score = 0.42;
  CHECK(engagement_score(item, LabelWeights{}, true) == 0.42);
  CHECK(engagement_score(item, LabelWeights{}, false) > 1.0);
}

TEST_CASE("rank_normalize ties map to one half") {
  const std::vector<double> scores{3.3, 3.3, 3.3, 3.3};
  for (double v : rank_normalize(scores)) CHECK(v == 0.5);
  CHECK(rank_normalize({9.0}) == std::vector<double>{0.5});
}

TEST_CASE("rank_normalize matches a brute-force sort") {
  const std::vector<double> scores{3.0, 1.0, 2.0};
  const std::vector<double> expected{1.0, 0.0, 0.5};
  CHECK(rank_normalize(scores) == expected);
}

TEST_CASE("rank_normalize is invariant under monotone transforms") {
  Rng rng(31);
  std::vector<double> scores(40);
  for (double& s : scores) s = rng.uniform(-5.0, 5.0);
  const auto base = rank_normalize(scores);

  std::vector<double> warped(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) warped[i] = std::exp(0.3 * scores[i]) + 7.0;
  CHECK(rank_normalize(warped) == base);

  for (std::size_t i = 0; i < scores.size(); ++i) warped[i] = scores[i] * scores[i] * scores[i];
  CHECK(rank_normalize(warped) == base);
}

TEST_CASE("minmax_normalize squeezes onto the unit interval") {
  const auto out = minmax_normalize({2.0, 6.0, 4.0});
  CHECK(out == std::vector<double>{0.0, 1.0, 0.5});
  const auto flat = minmax_normalize({5.0, 5.0});
  CHECK(flat == std::vector<double>{0.5, 0.5});
}

TEST_CASE("cubic distortion preserves ordering") {
  std::vector<ContentItem> items;
  Rng rng(5);
  for (int i = 0; i < 30; ++i) {
    ContentItem item = item_with_counts(rng.uniform_int(0, 5000), rng.uniform_int(0, 900),
                                        rng.uniform_int(0, 200));
    item.id = "i" + std::to_string(i);
    items.push_back(item);
  }
  const auto plain = raw_labels(items, LabelWeights{}, false, LabelDistortion::none);
  const auto warped = raw_labels(items, LabelWeights{}, false, LabelDistortion::cubic);
  CHECK(rank_normalize(plain) == rank_normalize(warped));
}

TEST_CASE("wide delta on binary labels keeps every pair decisive") {
  std::vector<std::string> ids{"a", "b", "c", "d"};
  std::vector<double> labels{0.0, 1.0, 0.0, 1.0};
  PairConfig config;
  config.delta = 0.9;
  config.count = 200;
  const auto pairs = make_pairs(ids, labels, config);
  CHECK(pairs.size() == 200);
  for (const auto& pair : pairs) CHECK(pair.x != 0);
}

TEST_CASE("equal labels with ties excluded exhaust the resampling budget") {
  std::vector<std::string> ids{"a", "b"};
  std::vector<double> labels{0.5, 0.5};
  PairConfig config;
  config.count = 10;
  CHECK_THROWS_AS(make_pairs(ids, labels, config), DataError);
}

TEST_CASE("equal labels with ties included emit x = 0") {
  std::vector<std::string> ids{"a", "b"};
  std::vector<double> labels{0.5, 0.5};
  PairConfig config;
  config.count = 16;
  config.include_ties = true;
  const auto pairs = make_pairs(ids, labels, config);
  CHECK(pairs.size() == 16);
  for (const auto& pair : pairs) CHECK(pair.x == 0);
}

TEST_CASE("pair sampling replays identically for a fixed seed") {
  Rng rng(77);
  std::vector<std::string> ids;
  std::vector<double> scores;
  for (int i = 0; i < 120; ++i) {
    ids.push_back("n" + std::to_string(i));
    scores.push_back(rng.uniform());
  }
  const auto labels = rank_normalize(scores);
  PairConfig config;
  config.count = 1000;
  config.seed = 99;
  const auto first = make_pairs(ids, labels, config);
  const auto second = make_pairs(ids, labels, config);
  REQUIRE(first.size() == second.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    CHECK(first[i].a == second[i].a);
    CHECK(first[i].b == second[i].b);
    CHECK(first[i].x == second[i].x);
  }
}

TEST_CASE("swapping a pair's endpoints negates its direction") {
  Rng rng(13);
  std::vector<std::string> ids;
  std::vector<double> scores;
  for (int i = 0; i < 60; ++i) {
    ids.push_back("n" + std::to_string(i));
    scores.push_back(rng.uniform());
  }
  const auto labels = rank_normalize(scores);
  PairConfig config;
  config.count = 500;
  config.include_ties = true;
  config.delta = 0.2;
  const auto pairs = make_pairs(ids, labels, config);

  auto label_of = [&](const std::string& id) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (ids[i] == id) return labels[i];
    }
    FAIL("unknown id");
    return 0.0;
  };
  auto direction = [&](double la, double lb) {
    const double gap = la - lb;
    if (gap > 0.0 && gap >= config.delta) return 1;
    if (gap < 0.0 && -gap >= config.delta) return -1;
    return 0;
  };
  for (const auto& pair : pairs) {
    CHECK(pair.x == direction(label_of(pair.a), label_of(pair.b)));
    CHECK(direction(label_of(pair.b), label_of(pair.a)) == -pair.x);
  }
}

TEST_CASE("pair sets are invariant under monotone transforms of raw scores") {
  Rng rng(41);
  std::vector<std::string> ids;
  std::vector<double> scores;
  for (int i = 0; i < 80; ++i) {
    ids.push_back("n" + std::to_string(i));
    scores.push_back(rng.uniform(0.0, 10.0));
  }
  std::vector<double> warped(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) warped[i] = std::pow(scores[i], 3.0) + 2.0;

  PairConfig config;
  config.count = 400;
  const auto base = make_pairs(ids, rank_normalize(scores), config);
  const auto transformed = make_pairs(ids, rank_normalize(warped), config);
  REQUIRE(base.size() == transformed.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    CHECK(base[i].a == transformed[i].a);
    CHECK(base[i].b == transformed[i].b);
    CHECK(base[i].x == transformed[i].x);
  }
}

TEST_CASE("fewer than two items is an error") {
  CHECK_THROWS_AS(make_pairs({"only"}, {0.5}, PairConfig{}), ConfigError);
}

TEST_CASE("pair dumps are one JSON object per line") {
  namespace fs = std::filesystem;
  const std::vector<PairSample> pairs{{"a", "b", 1}, {"c", "d", -1}, {"e", "f", 0}};
  const fs::path path = fs::temp_directory_path() / "cqr_pairs.jsonl";
  dump_pairs(path, pairs);
  std::ifstream in(path);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == R"({"a":"a","b":"b","x":1})");
  REQUIRE(std::getline(in, line));
  CHECK(line == R"({"a":"c","b":"d","x":-1})");
  REQUIRE(std::getline(in, line));
  CHECK(line == R"({"a":"e","b":"f","x":0})");
  CHECK_FALSE(std::getline(in, line));
  fs::remove(path);
}
