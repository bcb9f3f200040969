// Acceptance suite: runs every release criterion end to end and prints one
// pass/fail line per criterion. Criteria that exercise the command-line
// surface need the CQR_CLI environment variable to point at the cqr binary.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <json.hpp>

#include "cqr/grad_check.hpp"
#include "cqr/labeling.hpp"
#include "cqr/metrics.hpp"
#include "cqr/ranker.hpp"
#include "cqr/rng.hpp"
#include "cqr/synthgen.hpp"

using namespace cqr;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string format(const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  return buf;
}

// ---------------------------------------------------------------------------
// criterion 1: analytic gradients of the full pair loss vs central differences

Outcome gradient_integrity() {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  int redraws = 0;
  const int kConfigs = 20;

  // One full check of a random configuration: random shapes, random items,
  // analytic pair-loss gradient vs central differences over every parameter.
  auto attempt = [](std::uint64_t seed) {
    Rng rng(seed);
    RankerConfig config;
    const int g_choices[] = {1, 2, 4};
    config.nextvlad.groups = g_choices[rng.uniform_int(0, 2)];
    config.nextvlad.expansion = static_cast<int>(rng.uniform_int(1, 2));
    config.nextvlad.clusters = static_cast<int>(rng.uniform_int(1, 4));
    const int n_choices[] = {4, 8, 12, 16};
    const int d_image = n_choices[rng.uniform_int(0, 3)];
    config.hidden_widths.clear();
    const int depth = static_cast<int>(rng.uniform_int(1, 2));
    for (int i = 0; i < depth; ++i) {
      config.hidden_widths.push_back(static_cast<int>(rng.uniform_int(2, 16)));
    }
    config.sigma = rng.uniform(0.5, 2.0);
    config.seed = seed;
    const int d_text = static_cast<int>(rng.uniform_int(2, 8));

    RankerModel model = make_ranker(config, d_text, d_image);
    auto random_item = [&](const std::string& id, int n_images) {
      ContentItem item;
      item.id = id;
      item.text_embedding = Vector(d_text);
      for (int i = 0; i < d_text; ++i) item.text_embedding[i] = rng.normal();
      for (int k = 0; k < n_images; ++k) {
        Vector img(d_image);
        for (int i = 0; i < d_image; ++i) img[i] = rng.normal();
        item.image_embeddings.push_back(std::move(img));
      }
      return item;
    };
    const ContentItem a = random_item("a", static_cast<int>(rng.uniform_int(0, 3)));
    const ContentItem b = random_item("b", static_cast<int>(rng.uniform_int(1, 3)));
    const int x = static_cast<int>(rng.uniform_int(-1, 1));

    ParamBlock grads = model.params.zeros_like();
    pair_loss_with_grad(model, a, b, x, grads);
    auto f = [&](const ParamBlock&) { return pair_loss_value(model, a, b, x); };
    return grad_check(f, model.params, grads.flat(), 1e-5, 1e-4);
  };

  for (int trial = 0; trial < kConfigs; ++trial) {
    // A draw can park a ReLU unit within h of its kink, where the secant
    // disagrees with the (correct) one-sided derivative. Such hits are
    // draw-specific, so the config is redrawn a bounded number of times; a
    // genuine gradient bug fails every redraw.
    GradCheckReport report;
    bool passed = false;
    for (int round = 0; round < 3 && !passed; ++round) {
      if (round > 0) ++redraws;
      report = attempt(3000 + static_cast<std::uint64_t>(trial) +
                       static_cast<std::uint64_t>(round) * 10000);
      passed = report.pass;
    }
    worst = std::max(worst, report.max_rel_err);
    if (!passed) {
      return {false, format("config %d failed all redraws: max rel err %.3e at coordinate %zu "
                            "(analytic %.6e, numeric %.6e)",
                            trial, report.max_rel_err, report.worst_coord,
                            report.analytic_at_worst, report.numeric_at_worst)};
    }
  }
  const double elapsed = seconds_since(start);
  if (elapsed >= 60.0) {
    return {false, format("gradients ok but runtime %.1fs exceeds 60s", elapsed)};
  }
  return {true, format("max rel err %.3e over %d configs (%d kink redraws), %.1fs", worst,
                       kConfigs, redraws, elapsed)};
}

// ---------------------------------------------------------------------------
// criterion 2: lcc vs an independently coded Pearson implementation

double brute_force_pearson(const std::vector<double>& y, const std::vector<double>& h) {
  const double n = static_cast<double>(y.size());
  double sum_y = 0.0, sum_h = 0.0, sum_yy = 0.0, sum_hh = 0.0, sum_yh = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    sum_y += y[i];
    sum_h += h[i];
    sum_yy += y[i] * y[i];
    sum_hh += h[i] * h[i];
    sum_yh += y[i] * h[i];
  }
  const double num = n * sum_yh - sum_y * sum_h;
  const double den = std::sqrt(n * sum_yy - sum_y * sum_y) * std::sqrt(n * sum_hh - sum_h * sum_h);
  return num / den;
}

Outcome lcc_oracle_equivalence() {
  Rng rng(7);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> y(50);
    std::vector<double> h(50);
    for (std::size_t i = 0; i < y.size(); ++i) {
      y[i] = rng.normal(0.0, 3.0);
      h[i] = rng.uniform() < 0.5 ? 0.7 * y[i] + rng.normal() : rng.normal();
    }
    const double difference = std::abs(lcc(y, h) - brute_force_pearson(y, h));
    worst = std::max(worst, difference);
    if (difference > 1e-10) {
      return {false, format("trial %d: |lcc - oracle| = %.3e > 1e-10", trial, difference)};
    }
  }
  std::vector<double> y(50);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = rng.normal();
  std::vector<double> neg(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) neg[i] = -y[i];
  if (std::abs(lcc(y, y) - 1.0) > 1e-12) return {false, "lcc(y, y) missed 1.0"};
  if (std::abs(lcc(y, neg) + 1.0) > 1e-12) return {false, "lcc(y, -y) missed -1.0"};
  return {true, format("max |lcc - oracle| %.3e over 100 pairs; analytic cases exact", worst)};
}

// ---------------------------------------------------------------------------
// criterion 3: permutation invariance of the aggregated descriptor

Outcome permutation_invariance() {
  Rng rng(11);
  double worst = 0.0;
  struct Shape {
    int groups, expansion, clusters;
    bool normalize;
  };
  const Shape shapes[] = {{4, 2, 8, true}, {1, 1, 2, true}, {2, 2, 4, false}, {4, 1, 3, true}};
  for (const auto& shape : shapes) {
    NextVladConfig config;
    config.input_dim = 8;
    config.groups = shape.groups;
    config.expansion = shape.expansion;
    config.clusters = shape.clusters;
    config.normalize = shape.normalize;

    ParamBlock params;
    const NextVladSlots slots = add_nextvlad_slots(params, config);
    init_nextvlad_params(params, slots, config, rng);

    std::vector<Vector> images;
    for (int i = 0; i < 6; ++i) {
      Vector x(config.input_dim);
      for (int j = 0; j < config.input_dim; ++j) x[j] = rng.normal();
      images.push_back(std::move(x));
    }
    const Vector base = nextvlad_forward(images, params, slots, config);

    std::vector<std::size_t> order(images.size());
    std::iota(order.begin(), order.end(), 0);
    for (int trial = 0; trial < 100; ++trial) {
      for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[static_cast<std::size_t>(
                                    rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
      }
      std::vector<Vector> permuted;
      for (std::size_t idx : order) permuted.push_back(images[idx]);
      const Vector y = nextvlad_forward(permuted, params, slots, config);
      for (int j = 0; j < y.size(); ++j) {
        worst = std::max(worst, std::abs(y[j] - base[j]));
      }
    }
  }
  if (worst > 1e-9) return {false, format("max deviation %.3e > 1e-9", worst)};
  return {true, format("max deviation %.3e over 4 shapes x 100 permutations", worst)};
}

// ---------------------------------------------------------------------------
// CLI-driven criteria

std::string g_cli;
fs::path g_scratch;

struct CmdResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CmdResult run_cli(const std::string& args) {
  const fs::path out_path = g_scratch / "_stdout.txt";
  const fs::path err_path = g_scratch / "_stderr.txt";
  const std::string command = "cd '" + g_scratch.string() + "' && '" + g_cli + "' " + args +
                              " > '" + out_path.string() + "' 2> '" + err_path.string() + "'";
  const int status = std::system(command.c_str());
  CmdResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = slurp(out_path);
  result.err = slurp(err_path);
  return result;
}

nlohmann::json read_report(const std::string& name) {
  return nlohmann::json::parse(slurp(g_scratch / name));
}

// criterion 4: synthetic end-to-end run reaches LCC >= 0.90 inside 5 minutes
Outcome end_to_end_synthetic(double* rank_accuracy_out) {
  const auto start = std::chrono::steady_clock::now();
  // defaults: n=2500, rho=0.8, seed 7, 80/10/10 split, adam, 3000 iterations
  auto gen = run_cli("gen --seed 7");
  if (gen.exit_code != 0) return {false, "gen failed: " + gen.err};
  auto train = run_cli("train --seed 7 --checkpoint rank.ckpt --log rank.csv");
  if (train.exit_code != 0) return {false, "train failed: " + train.err};
  auto eval = run_cli("eval --seed 7 --checkpoint rank.ckpt --report rank.json");
  if (eval.exit_code != 0) return {false, "eval failed: " + eval.err};

  const auto report = read_report("rank.json");
  const double lcc_value = report.at("lcc").get<double>();
  *rank_accuracy_out = report.at("pairwise_accuracy").get<double>();
  const double elapsed = seconds_since(start);
  if (elapsed >= 300.0) {
    return {false, format("ran in %.0fs, budget is 300s", elapsed)};
  }
  if (lcc_value < 0.90) return {false, format("test LCC %.4f < 0.90", lcc_value)};
  return {true, format("test LCC %.4f (>= 0.90) in %.0fs", lcc_value, elapsed)};
}

// criterion 5: monotone label distortion leaves the rank model untouched and
// hurts the square-loss baseline
Outcome rank_vs_square_separation(double rank_accuracy) {
  auto train = run_cli("train --seed 7 --distort-labels cubic --checkpoint rank_cubic.ckpt "
                       "--log rank_cubic.csv");
  if (train.exit_code != 0) return {false, "distorted rank train failed: " + train.err};
  if (slurp(g_scratch / "rank.ckpt") != slurp(g_scratch / "rank_cubic.ckpt")) {
    return {false, "rank checkpoints differ under the cubic label distortion"};
  }

  auto sq = run_cli("train --seed 7 --loss square --checkpoint sq.ckpt --log sq.csv");
  if (sq.exit_code != 0) return {false, "square train failed: " + sq.err};
  auto sq_eval = run_cli("eval --seed 7 --checkpoint sq.ckpt --report sq.json");
  if (sq_eval.exit_code != 0) return {false, "square eval failed: " + sq_eval.err};

  auto sq_cubic = run_cli("train --seed 7 --loss square --distort-labels cubic "
                          "--checkpoint sq_cubic.ckpt --log sq_cubic.csv");
  if (sq_cubic.exit_code != 0) return {false, "distorted square train failed: " + sq_cubic.err};
  auto sq_cubic_eval = run_cli("eval --seed 7 --checkpoint sq_cubic.ckpt --report sq_cubic.json");
  if (sq_cubic_eval.exit_code != 0) {
    return {false, "distorted square eval failed: " + sq_cubic_eval.err};
  }

  const double acc_plain = read_report("sq.json").at("pairwise_accuracy").get<double>();
  const double acc_cubic = read_report("sq_cubic.json").at("pairwise_accuracy").get<double>();
  if (!(acc_cubic < acc_plain)) {
    return {false, format("baseline accuracy did not drop: %.4f -> %.4f", acc_plain, acc_cubic)};
  }
  if (rank_accuracy - acc_cubic < 0.02) {
    return {false, format("rank %.4f vs distorted baseline %.4f: gap %.4f < 0.02", rank_accuracy,
                          acc_cubic, rank_accuracy - acc_cubic)};
  }
  return {true, format("rank %.4f, baseline %.4f -> %.4f distorted; checkpoint bit-identical",
                       rank_accuracy, acc_plain, acc_cubic)};
}

// criterion 6: gen/train/eval replays are bitwise identical
Outcome determinism_replay() {
  const std::string corpus_before = slurp(g_scratch / "corpus.jsonl");
  auto gen = run_cli("gen --seed 7");
  if (gen.exit_code != 0) return {false, "gen replay failed: " + gen.err};
  if (slurp(g_scratch / "corpus.jsonl") != corpus_before) return {false, "corpus bytes changed"};

  const std::string ckpt_before = slurp(g_scratch / "rank.ckpt");
  const std::string log_before = slurp(g_scratch / "rank.csv");
  auto train = run_cli("train --seed 7 --checkpoint rank.ckpt --log rank.csv");
  if (train.exit_code != 0) return {false, "train replay failed: " + train.err};
  if (slurp(g_scratch / "rank.ckpt") != ckpt_before) return {false, "checkpoint bytes changed"};
  if (slurp(g_scratch / "rank.csv") != log_before) return {false, "training log bytes changed"};

  const std::string report_before = slurp(g_scratch / "rank.json");
  auto eval = run_cli("eval --seed 7 --checkpoint rank.ckpt --report rank.json");
  if (eval.exit_code != 0) return {false, "eval replay failed: " + eval.err};
  if (slurp(g_scratch / "rank.json") != report_before) return {false, "report bytes changed"};
  return {true, "corpus, checkpoint, log and report all replay bit-identically"};
}

// criterion 7: zero-image items score cleanly; constant predictions surface
// the degenerate-variance error as exit 5 rather than NaN
Outcome degenerate_handling() {
  SynthConfig text_only;
  text_only.n_items = 40;
  text_only.d_text = 8;
  text_only.d_image = 6;
  text_only.images_min = 0;
  text_only.images_max = 2;
  text_only.seed = 3;
  const Corpus corpus = generate_corpus(text_only);
  int zero_image_items = 0;
  for (const auto& item : corpus.items) {
    if (item.image_embeddings.empty()) ++zero_image_items;
  }
  if (zero_image_items == 0) return {false, "fixture corpus has no zero-image item"};

  RankerConfig config;
  config.hidden_widths = {8};
  config.nextvlad.expansion = 1;
  config.nextvlad.groups = 2;
  config.nextvlad.clusters = 2;
  RankerModel model = make_ranker(config, text_only.d_text, text_only.d_image);
  for (const auto& item : corpus.items) {
    if (!std::isfinite(score_item(model, item))) {
      return {false, "item '" + item.id + "' scored non-finite"};
    }
  }

  save_corpus(g_scratch / "textonly.jsonl", corpus);
  model.params.fill(0.0);
  save_ranker(g_scratch / "zero.ckpt", model);
  std::ofstream cfg(g_scratch / "degen.cfg");
  cfg << "synth.d_text = 8\nsynth.d_image = 6\npairs.eval_count = 100\n";
  cfg.close();
  auto score = run_cli("score --config degen.cfg --corpus textonly.jsonl --checkpoint zero.ckpt "
                       "--out zero_scores.jsonl");
  if (score.exit_code != 0) {
    return {false, "scoring zero-image items failed: " + score.err};
  }
  if (slurp(g_scratch / "zero_scores.jsonl").find("nan") != std::string::npos) {
    return {false, "score output contains NaN"};
  }
  auto eval = run_cli("eval --config degen.cfg --corpus textonly.jsonl --checkpoint zero.ckpt "
                      "--report degen.json");
  if (eval.exit_code != 5) {
    return {false, format("constant-prediction eval exited %d, expected 5", eval.exit_code)};
  }
  if (eval.err.find("variance") == std::string::npos) {
    return {false, "exit 5 did not name the degenerate variance"};
  }
  return {true, format("%d zero-image items scored finite; constant eval exits 5",
                       zero_image_items)};
}

}  // namespace

int main(int argc, char** argv) {
  const char* cli_env = std::getenv("CQR_CLI");
  if (!cli_env) {
    std::cerr << "CQR_CLI must point at the cqr binary\n";
    return 64;
  }
  g_cli = cli_env;
  g_scratch = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "cqr_acceptance";
  fs::remove_all(g_scratch);
  fs::create_directories(g_scratch);

  double rank_accuracy = 0.0;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient integrity", gradient_integrity},
      {"LCC oracle equivalence", lcc_oracle_equivalence},
      {"permutation invariance", permutation_invariance},
      {"end-to-end synthetic run", [&] { return end_to_end_synthetic(&rank_accuracy); }},
      {"rank-loss vs square-loss separation",
       [&] { return rank_vs_square_separation(rank_accuracy); }},
      {"determinism", determinism_replay},
      {"degenerate handling", degenerate_handling},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] criterion %zu: %s — %s\n", outcome.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), outcome.detail.c_str());
    std::fflush(stdout);
    if (!outcome.pass) ++failures;
  }
  if (failures == 0) fs::remove_all(g_scratch);
  return failures;
}
