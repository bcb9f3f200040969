#include "cqr/run_config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cqr/rng.hpp"

namespace cqr {

LossKind loss_from_string(const std::string& name) {
  if (name == "rank") return LossKind::rank;
  if (name == "square") return LossKind::square;
  throw ConfigError("unknown loss '" + name + "' (expected rank|square)");
}

std::string to_string(LossKind kind) { return kind == LossKind::rank ? "rank" : "square"; }

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double out = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse '" + value + "' as a number");
  }
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
  std::int64_t out = 0;
  const auto* begin = value.data();
  const auto* end = value.data() + value.size();
  const auto result = std::from_chars(begin, end, out);
  if (result.ec != std::errc() || result.ptr != end) {
    throw ConfigError("config key '" + key + "': cannot parse '" + value + "' as an integer");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("config key '" + key + "': cannot parse '" + value + "' as a bool");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  std::stringstream ss(value);
  std::string part;
  while (std::getline(ss, part, ',')) {
    out.push_back(static_cast<int>(parse_int(key, trim(part))));
  }
  if (out.empty()) throw ConfigError("config key '" + key + "': expected a comma-separated list");
  return out;
}

// shortest round-trip formatting, so the echo reparses to the same bits
std::string fmt(double value) { return nlohmann::json(value).dump(); }

std::string fmt(const std::vector<int>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(values[i]);
  }
  return out;
}

}  // namespace

void RunConfig::apply(const std::string& key, const std::string& value) {
  if (key == "seed") {
    seed = static_cast<std::uint64_t>(parse_int(key, value));
  } else if (key == "paths.corpus") {
    corpus_path = value;
  } else if (key == "paths.checkpoint") {
    checkpoint_path = value;
  } else if (key == "paths.log") {
    log_path = value;
  } else if (key == "paths.report") {
    report_path = value;
  } else if (key == "paths.scores") {
    scores_path = value;
  } else if (key == "synth.n_items") {
    synth.n_items = static_cast<int>(parse_int(key, value));
  } else if (key == "synth.d_text") {
    synth.d_text = static_cast<int>(parse_int(key, value));
  } else if (key == "synth.d_image") {
    synth.d_image = static_cast<int>(parse_int(key, value));
  } else if (key == "synth.images_min") {
    synth.images_min = static_cast<int>(parse_int(key, value));
  } else if (key == "synth.images_max") {
    synth.images_max = static_cast<int>(parse_int(key, value));
  } else if (key == "synth.rho") {
    synth.rho = parse_double(key, value);
  } else if (key == "synth.noise_scale") {
    synth.noise_scale = parse_double(key, value);
  } else if (key == "synth.engagement_scale_likes") {
    synth.engagement_scale[0] = parse_double(key, value);
  } else if (key == "synth.engagement_scale_retweets") {
    synth.engagement_scale[1] = parse_double(key, value);
  } else if (key == "synth.engagement_scale_comments") {
    synth.engagement_scale[2] = parse_double(key, value);
  } else if (key == "synth.engagement_noise") {
    synth.engagement_noise = parse_double(key, value);
  } else if (key == "split.train") {
    split_ratios.train = parse_double(key, value);
  } else if (key == "split.val") {
    split_ratios.val = parse_double(key, value);
  } else if (key == "split.test") {
    split_ratios.test = parse_double(key, value);
  } else if (key == "label.w_likes") {
    label_weights.likes = parse_double(key, value);
  } else if (key == "label.w_retweets") {
    label_weights.retweets = parse_double(key, value);
  } else if (key == "label.w_comments") {
    label_weights.comments = parse_double(key, value);
  } else if (key == "label.use_human_score") {
    use_human_score = parse_bool(key, value);
  } else if (key == "label.distortion") {
    distortion = label_distortion_from_string(value);
  } else if (key == "pairs.delta") {
    pair_delta = parse_double(key, value);
  } else if (key == "pairs.include_ties") {
    pair_include_ties = parse_bool(key, value);
  } else if (key == "pairs.train_count") {
    train_pair_count = static_cast<int>(parse_int(key, value));
  } else if (key == "pairs.eval_count") {
    eval_pair_count = static_cast<int>(parse_int(key, value));
  } else if (key == "model.hidden_widths") {
    ranker.hidden_widths = parse_int_list(key, value);
  } else if (key == "model.sigma") {
    ranker.sigma = parse_double(key, value);
  } else if (key == "model.m_max") {
    ranker.m_max = static_cast<int>(parse_int(key, value));
  } else if (key == "model.nextvlad_expansion") {
    ranker.nextvlad.expansion = static_cast<int>(parse_int(key, value));
  } else if (key == "model.nextvlad_groups") {
    ranker.nextvlad.groups = static_cast<int>(parse_int(key, value));
  } else if (key == "model.nextvlad_clusters") {
    ranker.nextvlad.clusters = static_cast<int>(parse_int(key, value));
  } else if (key == "model.nextvlad_normalize") {
    ranker.nextvlad.normalize = parse_bool(key, value);
  } else if (key == "train.optimizer") {
    ranker.optimizer = optimizer_from_string(value);
  } else if (key == "train.lr") {
    ranker.lr = parse_double(key, value);
  } else if (key == "train.lr_decay_factor") {
    ranker.lr_decay_factor = parse_double(key, value);
  } else if (key == "train.decay_every") {
    ranker.decay_every = static_cast<int>(parse_int(key, value));
  } else if (key == "train.iterations") {
    ranker.total_iterations = static_cast<int>(parse_int(key, value));
  } else if (key == "train.batch_pairs") {
    ranker.batch_pairs = static_cast<int>(parse_int(key, value));
  } else if (key == "train.loss") {
    loss = loss_from_string(value);
  } else if (key == "eval.with_baseline") {
    with_baseline = parse_bool(key, value);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

void RunConfig::finalize() {
  synth.seed = seed;
  ranker.seed = seed;
}

std::string RunConfig::echo() const {
  std::ostringstream out;
  out << "seed = " << seed << '\n';
  out << "paths.corpus = " << corpus_path << '\n';
  out << "paths.checkpoint = " << checkpoint_path << '\n';
  out << "paths.log = " << log_path << '\n';
  out << "paths.report = " << report_path << '\n';
  out << "paths.scores = " << scores_path << '\n';
  out << "synth.n_items = " << synth.n_items << '\n';
  out << "synth.d_text = " << synth.d_text << '\n';
  out << "synth.d_image = " << synth.d_image << '\n';
  out << "synth.images_min = " << synth.images_min << '\n';
  out << "synth.images_max = " << synth.images_max << '\n';
  out << "synth.rho = " << fmt(synth.rho) << '\n';
  out << "synth.noise_scale = " << fmt(synth.noise_scale) << '\n';
  out << "synth.engagement_scale_likes = " << fmt(synth.engagement_scale[0]) << '\n';
  out << "synth.engagement_scale_retweets = " << fmt(synth.engagement_scale[1]) << '\n';
  out << "synth.engagement_scale_comments = " << fmt(synth.engagement_scale[2]) << '\n';
  out << "synth.engagement_noise = " << fmt(synth.engagement_noise) << '\n';
  out << "split.train = " << fmt(split_ratios.train) << '\n';
  out << "split.val = " << fmt(split_ratios.val) << '\n';
  out << "split.test = " << fmt(split_ratios.test) << '\n';
  out << "label.w_likes = " << fmt(label_weights.likes) << '\n';
  out << "label.w_retweets = " << fmt(label_weights.retweets) << '\n';
  out << "label.w_comments = " << fmt(label_weights.comments) << '\n';
  out << "label.use_human_score = " << (use_human_score ? "true" : "false") << '\n';
  out << "label.distortion = " << to_string(distortion) << '\n';
  out << "pairs.delta = " << fmt(pair_delta) << '\n';
  out << "pairs.include_ties = " << (pair_include_ties ? "true" : "false") << '\n';
  out << "pairs.train_count = " << train_pair_count << '\n';
  out << "pairs.eval_count = " << eval_pair_count << '\n';
  out << "model.hidden_widths = " << fmt(ranker.hidden_widths) << '\n';
  out << "model.sigma = " << fmt(ranker.sigma) << '\n';
  out << "model.m_max = " << ranker.m_max << '\n';
  out << "model.nextvlad_expansion = " << ranker.nextvlad.expansion << '\n';
  out << "model.nextvlad_groups = " << ranker.nextvlad.groups << '\n';
  out << "model.nextvlad_clusters = " << ranker.nextvlad.clusters << '\n';
  out << "model.nextvlad_normalize = " << (ranker.nextvlad.normalize ? "true" : "false") << '\n';
  out << "train.optimizer = " << to_string(ranker.optimizer) << '\n';
  out << "train.lr = " << fmt(ranker.lr) << '\n';
  out << "train.lr_decay_factor = " << fmt(ranker.lr_decay_factor) << '\n';
  out << "train.decay_every = " << ranker.decay_every << '\n';
  out << "train.iterations = " << ranker.total_iterations << '\n';
  out << "train.batch_pairs = " << ranker.batch_pairs << '\n';
  out << "train.loss = " << to_string(loss) << '\n';
  out << "eval.with_baseline = " << (with_baseline ? "true" : "false") << '\n';
  return out.str();
}

std::string RunConfig::fingerprint() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(stable_hash64(echo())));
  return buf;
}

RunConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path.string());
  RunConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config file " + path.string() + ":" + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    config.apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return config;
}

}  // namespace cqr
