// ctm: train, evaluate, sweep and inspect contracting Tsetlin machines.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ctm/ctm.hpp"

namespace {

struct TrainArgs {
  std::string data;
  std::string test;
  std::uint32_t clauses = 20;
  std::int32_t threshold = 10;
  double specificity = 3.9;
  long long barrier = 0;
  long long include_barrier = 0;
  std::int32_t states = 128;
  std::uint32_t budget = 0;
  double sample_fraction = 1.0;
  std::uint32_t epochs = 50;
  std::uint64_t seed = 1;
  bool boost = false;
  bool shuffle = false;
  std::string out_model;
  std::string metrics_csv;
  std::optional<double> power_c;
  std::optional<double> power_vs;
  std::optional<double> power_f;
  bool quiet = false;
};

int run_train(const TrainArgs& a) {
  const ctm::Dataset train = ctm::load_dataset(a.data);
  const ctm::Dataset test = a.test.empty() ? train : ctm::load_dataset(a.test);
  if (test.n_features != train.n_features) throw std::invalid_argument("--test feature count differs from --data");

  ctm::AutomatonConfig config;
  config.states_per_action = a.states;
  config.exclude_barrier = ctm::bench::barrier_from_setting(a.barrier);
  if (a.include_barrier != 0) config.include_barrier = static_cast<ctm::TaState>(a.include_barrier);

  ctm::HyperParams hyper;
  hyper.clauses_per_class = a.clauses;
  hyper.threshold = a.threshold;
  hyper.specificity = a.specificity;
  if (a.budget != 0) hyper.max_included_literals = a.budget;
  hyper.literal_sample_fraction = a.sample_fraction;
  hyper.boost_true_positive = a.boost;

  ctm::Model model(train.n_features, config, hyper);
  const ctm::RandomSource rng(a.seed);

  std::ofstream csv;
  if (!a.metrics_csv.empty()) {
    csv.open(a.metrics_csv);
    if (!csv) throw std::runtime_error("cannot write '" + a.metrics_csv + "'");
    ctm::bench::write_csv_header(csv);
  }

  ctm::FitOptions options;
  options.epochs = a.epochs;
  options.shuffle = a.shuffle;
  options.observer = [&](ctm::EpochMetrics& m, const ctm::Model& trained) {
    m.test_accuracy = ctm::accuracy(trained, test);
    if (csv.is_open()) ctm::bench::write_epoch_row(csv, m, config.exclude_barrier, hyper.literal_sample_fraction);
    if (!a.quiet) {
      std::printf("epoch %u  time %.3fs  accuracy %.4f  live %llu  updates %llu\n", m.epoch + 1, m.train_wall_time,
                  m.test_accuracy, static_cast<unsigned long long>(m.live_ta_count),
                  static_cast<unsigned long long>(m.ta_update_events));
    }
  };
  const auto history = ctm::fit(model, train, options, rng);

  const auto summary = ctm::bench::summarize(history, 25);
  if (csv.is_open()) {
    ctm::bench::write_summary_row(csv, summary, config.exclude_barrier, hyper.literal_sample_fraction);
    csv.close();
    if (!csv) throw std::runtime_error("write failed for '" + a.metrics_csv + "'");
  }
  if (!a.out_model.empty()) ctm::save_model(model, a.out_model);

  std::printf("mean over last %zu epochs: accuracy %.4f  time %.4fs\n", summary.window, summary.test_accuracy,
              summary.train_wall_time_s);
  std::printf("absorption rate %.4f\n", ctm::bench::absorption_rate(model));
  if (!history.empty()) {
    const auto initial = model.counters().initial_live_ta;
    const double first = ctm::bench::activity_factor(history.front(), initial, train.samples.size());
    const double last = ctm::bench::activity_factor(history.back(), initial, train.samples.size());
    std::printf("activity proxy: first epoch %.6g, last epoch %.6g", first, last);
    if (first > 0) std::printf(" (%.2f%% of first)", 100.0 * last / first);
    std::printf("\n");
    if (a.power_c && a.power_vs && a.power_f) {
      std::printf("estimated dynamic power, last epoch: %.6g W\n",
                  ctm::bench::dynamic_power(*a.power_c, *a.power_vs, *a.power_f, last));
    }
  }
  return 0;
}

std::vector<std::string> read_vocab(const std::string& path) {
  std::vector<std::string> names;
  if (path.empty()) return names;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vocabulary '" + path + "'");
  std::string line;
  while (std::getline(in, line)) names.push_back(line);
  return names;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contracting Tsetlin machine"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* cmd_train = app.add_subcommand("train", "Train a model");
  cmd_train->add_option("--data", train.data, "Training dataset")->required();
  cmd_train->add_option("--test", train.test, "Evaluation dataset (defaults to --data)");
  cmd_train->add_option("--clauses", train.clauses, "Clauses per class (even)")->capture_default_str();
  cmd_train->add_option("--threshold,-T", train.threshold, "Voting margin T")->capture_default_str();
  cmd_train->add_option("--specificity,-s", train.specificity, "Specificity s")->capture_default_str();
  cmd_train->add_option("--barrier", train.barrier, "Exclude absorbing state (0 = none)")->capture_default_str();
  cmd_train->add_option("--include-barrier", train.include_barrier, "Include absorbing state (0 = none)")
      ->capture_default_str();
  cmd_train->add_option("--states", train.states, "States per action N")->capture_default_str();
  cmd_train->add_option("--budget", train.budget, "Max included literals per clause (0 = none)")->capture_default_str();
  cmd_train->add_option("--sample-fraction", train.sample_fraction, "Literal subsampling fraction")
      ->capture_default_str();
  cmd_train->add_option("--epochs", train.epochs)->capture_default_str();
  cmd_train->add_option("--seed", train.seed)->capture_default_str();
  cmd_train->add_flag("--boost", train.boost, "Boost true positive feedback");
  cmd_train->add_flag("--shuffle", train.shuffle, "Shuffle samples every epoch");
  cmd_train->add_option("--out-model", train.out_model);
  cmd_train->add_option("--metrics-csv", train.metrics_csv);
  cmd_train->add_option("--power-c", train.power_c, "Load capacitance (F) for a power estimate");
  cmd_train->add_option("--power-vs", train.power_vs, "Supply voltage (V) for a power estimate");
  cmd_train->add_option("--power-f", train.power_f, "Clock frequency (Hz) for a power estimate");
  cmd_train->add_flag("--quiet,-q", train.quiet, "No per-epoch output");

  std::string eval_model, eval_data;
  auto* cmd_eval = app.add_subcommand("eval", "Evaluate a saved model");
  cmd_eval->add_option("--model", eval_model)->required();
  cmd_eval->add_option("--data", eval_data)->required();

  std::string sweep_spec, sweep_csv;
  auto* cmd_sweep = app.add_subcommand("sweep", "Barrier / subsampling sweep");
  cmd_sweep->add_option("--spec", sweep_spec, "key = value sweep file")->required();
  cmd_sweep->add_option("--out-csv", sweep_csv)->required();

  std::string bool_train, bool_test, bool_out;
  std::size_t vocab_size = 2000;
  auto* cmd_bool = app.add_subcommand("booleanize", "Turn <label>\\t<text> corpora into datasets");
  cmd_bool->add_option("--train-texts", bool_train)->required();
  cmd_bool->add_option("--test-texts", bool_test)->required();
  cmd_bool->add_option("--vocab-size", vocab_size)->capture_default_str();
  cmd_bool->add_option("--out", bool_out, "Output prefix: <out>.train.txt, <out>.test.txt, <out>.vocab.txt")
      ->required();

  std::string explain_path, explain_vocab;
  auto* cmd_explain = app.add_subcommand("explain", "Print learned clauses");
  cmd_explain->add_option("--model", explain_path)->required();
  cmd_explain->add_option("--vocab", explain_vocab, "Feature names, one per line");

  std::string synth_kind = "noisy-conjunction", synth_out;
  std::size_t synth_k = 20, synth_n = 5000;
  double synth_noise = 0.1;
  std::uint64_t synth_seed = 42;
  auto* cmd_synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  cmd_synth->add_option("--kind", synth_kind)->check(CLI::IsMember({"noisy-conjunction"}))->capture_default_str();
  cmd_synth->add_option("--k", synth_k)->capture_default_str();
  cmd_synth->add_option("--n", synth_n)->capture_default_str();
  cmd_synth->add_option("--noise", synth_noise)->capture_default_str();
  cmd_synth->add_option("--seed", synth_seed)->capture_default_str();
  cmd_synth->add_option("--out", synth_out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_train) return run_train(train);

    if (*cmd_eval) {
      const auto model = ctm::load_model(eval_model);
      const auto data = ctm::load_dataset(eval_data);
      if (data.n_features != model.n_features()) throw std::invalid_argument("dataset width does not match model");
      std::printf("accuracy %.6f (%zu samples)\n", ctm::accuracy(model, data), data.samples.size());
      return 0;
    }

    if (*cmd_sweep) {
      const auto spec = ctm::bench::load_sweep_spec(sweep_spec);
      if (spec.train_path.empty()) throw std::invalid_argument("sweep spec needs 'train = <path>'");
      const auto train_set = ctm::load_dataset(spec.train_path);
      const auto test_set = spec.test_path.empty() ? train_set : ctm::load_dataset(spec.test_path);
      const auto report = ctm::bench::run_sweep(spec, train_set, test_set, sweep_csv);
      for (const auto& c : report.cells) {
        std::printf("barrier %-5s fraction %-4g accuracy %.4f time %.4fs absorption %.4f\n",
                    ctm::bench::barrier_label(c.barrier).c_str(), c.sample_fraction, c.summary.test_accuracy,
                    c.summary.train_wall_time_s, c.absorption_rate);
      }
      return 0;
    }

    if (*cmd_bool) {
      const auto corpora = ctm::assign_labels(ctm::read_text_lines(bool_train), ctm::read_text_lines(bool_test));
      auto out = ctm::booleanize_corpus(corpora.train, corpora.test, {vocab_size});
      out.train.label_names = corpora.label_names;
      out.test.label_names = corpora.label_names;
      ctm::save_dataset(out.train, bool_out + ".train.txt");
      ctm::save_dataset(out.test, bool_out + ".test.txt");
      std::ofstream vocab(bool_out + ".vocab.txt");
      for (const auto& t : out.vocabulary.tokens()) vocab << t << '\n';
      if (!vocab) throw std::runtime_error("cannot write vocabulary");
      std::printf("%zu features, %zu train / %zu test documents\n", out.train.n_features, out.train.samples.size(),
                  out.test.samples.size());
      return 0;
    }

    if (*cmd_explain) {
      const auto model = ctm::load_model(explain_path);
      std::cout << ctm::bench::explain_model(model, read_vocab(explain_vocab));
      return 0;
    }

    if (*cmd_synth) {
      ctm::save_dataset(ctm::synth_noisy_conjunction(synth_n, synth_k, synth_noise, synth_seed), synth_out);
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
