#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cqr/metrics.hpp"
#include "cqr/run_config.hpp"
#include "cqr/rng.hpp"

namespace {

using namespace cqr;

struct FlagOverrides {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> corpus;
  std::optional<std::string> checkpoint;
  std::optional<std::string> optimizer;
  std::optional<double> lr;
  std::optional<int> iterations;
  bool with_baseline = false;
  std::optional<std::string> loss;
  std::optional<std::string> distortion;
  std::optional<std::string> out;
  std::optional<std::string> log;
  std::optional<std::string> report;
};

void add_common_flags(CLI::App* cmd, FlagOverrides& flags) {
  cmd->add_option("--config", flags.config_path, "config file (key = value lines)");
  cmd->add_option("--seed", flags.seed, "run seed");
  cmd->add_option("--corpus", flags.corpus, "corpus path");
  cmd->add_option("--checkpoint", flags.checkpoint, "checkpoint path");
  cmd->add_option("--optimizer", flags.optimizer, "adam|sgd");
  cmd->add_option("--lr", flags.lr, "learning rate");
  cmd->add_option("--iterations", flags.iterations, "training iterations");
  cmd->add_flag("--with-baseline", flags.with_baseline, "also train and report the square-loss baseline");
  cmd->add_option("--loss", flags.loss, "training loss: rank|square");
  cmd->add_option("--distort-labels", flags.distortion, "label distortion: none|cubic");
  cmd->add_option("--out", flags.out, "scores output path (default: stdout)");
  cmd->add_option("--log", flags.log, "training log path");
  cmd->add_option("--report", flags.report, "evaluation report path");
}

RunConfig resolve_config(const FlagOverrides& flags) {
  RunConfig config = flags.config_path ? parse_config_file(*flags.config_path) : RunConfig{};
  if (flags.seed) config.seed = *flags.seed;
  if (flags.corpus) config.corpus_path = *flags.corpus;
  if (flags.checkpoint) config.checkpoint_path = *flags.checkpoint;
  if (flags.optimizer) config.apply("train.optimizer", *flags.optimizer);
  if (flags.lr) config.ranker.lr = *flags.lr;
  if (flags.iterations) config.ranker.total_iterations = *flags.iterations;
  if (flags.with_baseline) config.with_baseline = true;
  if (flags.loss) config.apply("train.loss", *flags.loss);
  if (flags.distortion) config.apply("label.distortion", *flags.distortion);
  if (flags.out) config.scores_path = *flags.out;
  if (flags.log) config.log_path = *flags.log;
  if (flags.report) config.report_path = *flags.report;
  config.finalize();

  std::cerr << "# resolved configuration (fingerprint " << config.fingerprint() << ")\n"
            << config.echo();
  return config;
}

int run_gen(const RunConfig& config) {
  const Corpus corpus = generate_corpus(config.synth);
  save_corpus(config.corpus_path, corpus);
  std::cout << "wrote " << corpus.items.size() << " items to " << config.corpus_path << '\n';
  return 0;
}

struct LabeledSplit {
  std::vector<ContentItem> items;
  std::vector<double> raw;  // post-override, post-distortion quality labels
  std::vector<std::string> ids;
};

LabeledSplit labeled_bucket(const Corpus& corpus, const RunConfig& config, SplitBucket bucket) {
  const auto assignment =
      split_corpus(corpus.items, config.split_ratios, derive_seed(config.seed, "split"));
  LabeledSplit split;
  split.items = select_bucket(corpus.items, assignment, bucket);
  split.raw =
      raw_labels(split.items, config.label_weights, config.use_human_score, config.distortion);
  split.ids.reserve(split.items.size());
  for (const auto& item : split.items) split.ids.push_back(item.id);
  return split;
}

int run_train(const RunConfig& config) {
  const Corpus corpus = load_corpus(config.corpus_path);
  LabeledSplit train_split = labeled_bucket(corpus, config, SplitBucket::train);
  if (train_split.items.size() < 2) {
    throw DataError("train split has " + std::to_string(train_split.items.size()) +
                    " items; need at least 2");
  }

  TrainResult result;
  if (config.loss == LossKind::rank) {
    PairConfig pair_config;
    pair_config.delta = config.pair_delta;
    pair_config.include_ties = config.pair_include_ties;
    pair_config.count = config.train_pair_count;
    pair_config.seed = derive_seed(config.seed, "pairs.train");
    const auto pairs = make_pairs(train_split.ids, rank_normalize(train_split.raw), pair_config);
    result = train_ranker(train_split.items, pairs, config.ranker, corpus.header.d_text,
                          corpus.header.d_image);
  } else {
    result = train_square_baseline(train_split.items, minmax_normalize(train_split.raw),
                                   config.ranker, corpus.header.d_text, corpus.header.d_image);
  }

  save_ranker(config.checkpoint_path, result.model);
  write_train_log(config.log_path, result.log,
                  "resolved configuration (fingerprint " + config.fingerprint() + ")\n" +
                      config.echo());

  const std::size_t window = std::min<std::size_t>(100, result.log.size());
  double first = 0.0;
  double last = 0.0;
  for (std::size_t i = 0; i < window; ++i) {
    first += result.log[i].loss;
    last += result.log[result.log.size() - window + i].loss;
  }
  std::cout << "trained " << to_string(config.loss) << " model for "
            << config.ranker.total_iterations << " iterations on " << train_split.items.size()
            << " items\n";
  std::printf("mean loss: first %zu iterations %.6f, last %zu iterations %.6f\n", window,
              first / static_cast<double>(window), window, last / static_cast<double>(window));
  std::cout << "checkpoint: " << config.checkpoint_path << "\nlog: " << config.log_path << '\n';
  return 0;
}

int run_eval(const RunConfig& config) {
  const Corpus corpus = load_corpus(config.corpus_path);
  const RankerModel model = load_ranker(config.checkpoint_path);
  LabeledSplit test_split = labeled_bucket(corpus, config, SplitBucket::test);
  if (test_split.items.size() < 2) {
    throw DataError("test split has " + std::to_string(test_split.items.size()) +
                    " items; need at least 2");
  }

  PairConfig pair_config;
  pair_config.delta = config.pair_delta;
  pair_config.include_ties = config.pair_include_ties;
  pair_config.count = config.eval_pair_count;
  pair_config.seed = derive_seed(config.seed, "pairs.eval");
  const auto pairs = make_pairs(test_split.ids, rank_normalize(test_split.raw), pair_config);

  const EvalReport report =
      evaluate(model, test_split.items, test_split.raw, pairs, config.fingerprint());
  nlohmann::ordered_json out = report_to_json(report);

  std::optional<EvalReport> baseline;
  if (config.with_baseline) {
    LabeledSplit train_split = labeled_bucket(corpus, config, SplitBucket::train);
    const auto trained =
        train_square_baseline(train_split.items, minmax_normalize(train_split.raw), config.ranker,
                              corpus.header.d_text, corpus.header.d_image);
    baseline =
        evaluate(trained.model, test_split.items, test_split.raw, pairs, config.fingerprint());
    out["baseline"] = report_to_json(*baseline);
  }

  {
    std::ofstream report_file(config.report_path);
    if (!report_file) throw IoError("cannot open report for writing: " + config.report_path);
    report_file << out.dump(2) << '\n';
  }

  std::printf("%-22s %10s %14s %9s %9s\n", "model", "lcc", "pairwise_acc", "n_items", "n_pairs");
  std::printf("%-22s %10.4f %14.4f %9d %9d\n", "checkpoint", report.lcc_value,
              report.pairwise_acc, report.n_items, report.n_pairs);
  if (baseline) {
    std::printf("%-22s %10.4f %14.4f %9d %9d\n", "square_loss_baseline", baseline->lcc_value,
                baseline->pairwise_acc, baseline->n_items, baseline->n_pairs);
  }
  std::cout << "report: " << config.report_path << '\n';
  return 0;
}

int run_score(const RunConfig& config) {
  const Corpus corpus = load_corpus(config.corpus_path);
  const RankerModel model = load_ranker(config.checkpoint_path);
  const std::vector<double> scores = predict_batch(model, corpus.items);

  std::ofstream file;
  if (!config.scores_path.empty()) {
    file.open(config.scores_path);
    if (!file) throw IoError("cannot open scores output: " + config.scores_path);
  }
  std::ostream& out = config.scores_path.empty() ? std::cout : file;
  for (std::size_t i = 0; i < corpus.items.size(); ++i) {
    nlohmann::ordered_json rec;
    rec["id"] = corpus.items[i].id;
    rec["score"] = scores[i];
    out << rec.dump() << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multimodal content quality ranker"};
  app.require_subcommand(1);

  FlagOverrides gen_flags;
  FlagOverrides train_flags;
  FlagOverrides eval_flags;
  FlagOverrides score_flags;
  CLI::App* gen = app.add_subcommand("gen", "generate a synthetic corpus");
  CLI::App* train = app.add_subcommand("train", "train a scorer on the train split");
  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
  CLI::App* score = app.add_subcommand("score", "score every item in a corpus");
  add_common_flags(gen, gen_flags);
  add_common_flags(train, train_flags);
  add_common_flags(eval, eval_flags);
  add_common_flags(score, score_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) return run_gen(resolve_config(gen_flags));
    if (train->parsed()) return run_train(resolve_config(train_flags));
    if (eval->parsed()) return run_eval(resolve_config(eval_flags));
    if (score->parsed()) return run_score(resolve_config(score_flags));
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ShapeError& e) {
    // in CLI context a shape mismatch means incompatible input files
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << '\n';
    return 4;
  } catch (const DegenerateVarianceError& e) {
    std::cerr << "degenerate metric: " << e.what() << '\n';
    return 5;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << '\n';
    return 1;
  }
}
