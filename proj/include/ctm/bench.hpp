// Benchmark harness: per-epoch CSV, barrier / subsampling sweeps, rule
// listings and the switching-activity proxy.

#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ctm/data.hpp"
#include "ctm/errors.hpp"
#include "ctm/learner.hpp"
#include "ctm/model_io.hpp"

namespace ctm::bench {

inline constexpr std::string_view kCsvHeader =
    "epoch,barrier,sample_fraction,train_wall_time_s,test_accuracy,absorbed_exclude,absorbed_include,live_ta,ta_updates";

/// Experiment-style barrier value: 0 means "no absorption".
inline std::optional<TaState> barrier_from_setting(long long value) {
  if (value < 0) throw std::invalid_argument("barrier must be >= 0");
  if (value == 0) return std::nullopt;
  return static_cast<TaState>(value);
}

inline std::string barrier_label(const std::optional<TaState>& b) {
  return b ? std::to_string(*b) : std::string("none");
}

/// (absorbed exclude + absorbed include) / automata alive at initialisation.
inline double absorption_rate(const Model& model) {
  const auto& c = model.counters();
  if (c.initial_live_ta == 0) return 0.0;
  return static_cast<double>(c.absorbed_exclude + c.absorbed_include) / static_cast<double>(c.initial_live_ta);
}

/// Average share of the initial automata updated per training step, used as
/// a stand-in for a circuit's activity factor.
inline double activity_factor(const EpochMetrics& m, std::uint64_t initial_live_ta, std::size_t n_steps) {
  if (initial_live_ta == 0 || n_steps == 0) return 0.0;
  return static_cast<double>(m.ta_update_events) /
         (static_cast<double>(initial_live_ta) * static_cast<double>(n_steps));
}

/// P = 0.5 * C * V^2 * f * alpha.
constexpr double dynamic_power(double capacitance, double supply_voltage, double frequency, double alpha) {
  return 0.5 * capacitance * supply_voltage * supply_voltage * frequency * alpha;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

struct CellSummary {
  std::size_t window = 0;
  double train_wall_time_s = 0;
  double test_accuracy = 0;
  double absorbed_exclude = 0;
  double absorbed_include = 0;
  double live_ta = 0;
  double ta_updates = 0;
};

/// Means over the last `window` epochs (all of them if fewer).
inline CellSummary summarize(const std::vector<EpochMetrics>& history, std::size_t window) {
  CellSummary s;
  const std::size_t n = std::min(window, history.size());
  s.window = n;
  if (n == 0) return s;
  for (std::size_t i = history.size() - n; i < history.size(); ++i) {
    const auto& m = history[i];
    s.train_wall_time_s += m.train_wall_time;
    s.test_accuracy += m.test_accuracy;
    s.absorbed_exclude += static_cast<double>(m.absorbed_exclude_total);
    s.absorbed_include += static_cast<double>(m.absorbed_include_total);
    s.live_ta += static_cast<double>(m.live_ta_count);
    s.ta_updates += static_cast<double>(m.ta_update_events);
  }
  const double d = static_cast<double>(n);
  s.train_wall_time_s /= d;
  s.test_accuracy /= d;
  s.absorbed_exclude /= d;
  s.absorbed_include /= d;
  s.live_ta /= d;
  s.ta_updates /= d;
  return s;
}

namespace detail {

inline std::string fixed6(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace detail

inline void write_csv_header(std::ostream& out) { out << kCsvHeader << '\n'; }

inline void write_epoch_row(std::ostream& out, const EpochMetrics& m, const std::optional<TaState>& barrier,
                            double sample_fraction) {
  out << (m.epoch + 1) << ',' << barrier_label(barrier) << ',' << ctm::detail::format_real(sample_fraction) << ','
      << detail::fixed6(m.train_wall_time) << ',' << detail::fixed6(m.test_accuracy) << ','
      << m.absorbed_exclude_total << ',' << m.absorbed_include_total << ',' << m.live_ta_count << ','
      << m.ta_update_events << '\n';
}

inline void write_summary_row(std::ostream& out, const CellSummary& s, const std::optional<TaState>& barrier,
                              double sample_fraction) {
  out << "mean_last_" << s.window << ',' << barrier_label(barrier) << ','
      << ctm::detail::format_real(sample_fraction) << ',' << detail::fixed6(s.train_wall_time_s) << ','
      << detail::fixed6(s.test_accuracy) << ',' << detail::fixed6(s.absorbed_exclude) << ','
      << detail::fixed6(s.absorbed_include) << ',' << detail::fixed6(s.live_ta) << ','
      << detail::fixed6(s.ta_updates) << '\n';
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

struct SweepSpec {
  std::vector<std::optional<TaState>> barriers{std::nullopt};
  std::vector<double> sample_fractions{1.0};
  std::uint32_t epochs = 50;
  std::uint64_t seed = 1;
  HyperParams hyper;
  TaState states_per_action = 128;
  std::optional<TaState> include_barrier;
  std::size_t summary_window = 25;
  bool shuffle = false;
  /// Dataset paths; relative paths are resolved against the spec file.
  std::string train_path;
  std::string test_path;

  void validate() const {
    if (barriers.empty()) throw std::invalid_argument("sweep needs at least one barrier value");
    if (sample_fractions.empty()) throw std::invalid_argument("sweep needs at least one sample fraction");
    if (summary_window == 0) throw std::invalid_argument("summary window must be positive");
  }
};

/// Parses a `key = value` sweep description. Lists are comma separated;
/// '#' starts a comment. Barrier entries accept `none` or an integer, with 0
/// meaning no absorption.
///
///   barriers = 0, 25, 50, 75, 100, 125
///   sample_fractions = 0.1, 0.3, 0.6, 0.9
///   epochs = 50
///   seed = 1
///   clauses = 20
///   threshold = 10
///   specificity = 3.9
///   budget = none
///   include_barrier = none
///   states = 128
///   boost = 0
///   shuffle = 0
///   summary_window = 25
///   train = data/train.txt
///   test = data/test.txt
inline SweepSpec parse_sweep_spec(std::istream& in, const std::filesystem::path& base_dir = {}) {
  SweepSpec spec;
  std::string raw;
  std::size_t line_no = 0;
  auto list_of = [](std::string_view v) {
    std::vector<std::string> items;
    std::size_t start = 0;
    while (start <= v.size()) {
      auto comma = v.find(',', start);
      if (comma == std::string_view::npos) comma = v.size();
      auto item = ctm::detail::trim(v.substr(start, comma - start));
      if (!item.empty()) items.emplace_back(item);
      start = comma + 1;
    }
    return items;
  };
  auto resolve = [&](std::string_view p) {
    std::filesystem::path path{std::string(p)};
    if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
    return path.string();
  };
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = ctm::detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw FormatError("expected key = value", line_no);
    const auto key = ctm::detail::trim(line.substr(0, eq));
    const auto value = ctm::detail::trim(line.substr(eq + 1));
    auto bad = [&]() -> FormatError { return FormatError("bad value for '" + std::string(key) + "'", line_no); };
    auto integer = [&](auto& out) {
      if (!ctm::detail::parse_int(value, out)) throw bad();
    };
    auto real = [&](std::string_view s) {
      try {
        std::size_t used = 0;
        const double v = std::stod(std::string(s), &used);
        if (used != s.size()) throw bad();
        return v;
      } catch (const std::logic_error&) {
        throw bad();
      }
    };
    auto optional_int = [&](auto& out) {
      if (value == "none") {
        out.reset();
        return;
      }
      long long v = 0;
      if (!ctm::detail::parse_int(value, v) || v < 0) throw bad();
      if (v == 0) {
        out.reset();
      } else {
        out = static_cast<std::remove_reference_t<decltype(*out)>>(v);
      }
    };

    if (key == "barriers") {
      spec.barriers.clear();
      for (const auto& item : list_of(value)) {
        if (item == "none") {
          spec.barriers.emplace_back(std::nullopt);
          continue;
        }
        long long v = 0;
        if (!ctm::detail::parse_int(std::string_view(item), v) || v < 0) throw bad();
        spec.barriers.push_back(barrier_from_setting(v));
      }
    } else if (key == "sample_fractions") {
      spec.sample_fractions.clear();
      for (const auto& item : list_of(value)) spec.sample_fractions.push_back(real(item));
    } else if (key == "epochs") {
      integer(spec.epochs);
    } else if (key == "seed") {
      integer(spec.seed);
    } else if (key == "clauses") {
      integer(spec.hyper.clauses_per_class);
    } else if (key == "threshold") {
      integer(spec.hyper.threshold);
    } else if (key == "specificity") {
      spec.hyper.specificity = real(value);
    } else if (key == "budget") {
      optional_int(spec.hyper.max_included_literals);
    } else if (key == "boost") {
      int v = 0;
      integer(v);
      spec.hyper.boost_true_positive = v != 0;
    } else if (key == "include_barrier") {
      optional_int(spec.include_barrier);
    } else if (key == "states") {
      integer(spec.states_per_action);
    } else if (key == "summary_window") {
      integer(spec.summary_window);
    } else if (key == "shuffle") {
      int v = 0;
      integer(v);
      spec.shuffle = v != 0;
    } else if (key == "train") {
      spec.train_path = resolve(value);
    } else if (key == "test") {
      spec.test_path = resolve(value);
    } else {
      throw FormatError("unknown key '" + std::string(key) + "'", line_no);
    }
  }
  spec.validate();
  return spec;
}

inline SweepSpec load_sweep_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sweep spec '" + path + "'");
  try {
    return parse_sweep_spec(in, std::filesystem::path(path).parent_path());
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

struct CellResult {
  std::optional<TaState> barrier;
  double sample_fraction = 1.0;
  std::vector<EpochMetrics> epochs;
  CellSummary summary;
  double absorption_rate = 0.0;
};

struct SweepReport {
  std::vector<CellResult> cells;

  const CellResult* find(const std::optional<TaState>& barrier, double fraction) const {
    for (const auto& c : cells) {
      if (c.barrier == barrier && c.sample_fraction == fraction) return &c;
    }
    return nullptr;
  }
};

/// Trains one fresh model and records every epoch, evaluating on `test`.
inline CellResult run_cell(const std::optional<TaState>& barrier, double sample_fraction, const SweepSpec& spec,
                           const Dataset& train, const Dataset& test) {
  AutomatonConfig config;
  config.states_per_action = spec.states_per_action;
  config.exclude_barrier = barrier;
  config.include_barrier = spec.include_barrier;
  HyperParams hyper = spec.hyper;
  hyper.literal_sample_fraction = sample_fraction;

  Model model(train.n_features, config, hyper);
  const RandomSource rng(spec.seed);
  FitOptions options;
  options.epochs = spec.epochs;
  options.shuffle = spec.shuffle;
  options.observer = [&](EpochMetrics& m, const Model& trained) { m.test_accuracy = accuracy(trained, test); };

  CellResult cell;
  cell.barrier = barrier;
  cell.sample_fraction = sample_fraction;
  cell.epochs = fit(model, train, options, rng);
  cell.summary = summarize(cell.epochs, spec.summary_window);
  cell.absorption_rate = absorption_rate(model);
  return cell;
}

inline void write_cell(std::ostream& out, const CellResult& cell) {
  for (const auto& m : cell.epochs) write_epoch_row(out, m, cell.barrier, cell.sample_fraction);
  write_summary_row(out, cell.summary, cell.barrier, cell.sample_fraction);
}

/// Runs every (barrier, fraction) cell in spec order, barriers outermost,
/// and writes the CSV to `out` as cells complete.
inline SweepReport run_sweep(const SweepSpec& spec, const Dataset& train, const Dataset& test, std::ostream& out) {
  spec.validate();
  if (train.samples.empty()) throw std::invalid_argument("training set is empty");
  if (train.n_features != test.n_features) {
    throw std::invalid_argument("train and test sets have different feature counts (" +
                                std::to_string(train.n_features) + " vs " + std::to_string(test.n_features) + ")");
  }
  SweepReport report;
  write_csv_header(out);
  for (const auto& barrier : spec.barriers) {
    for (double fraction : spec.sample_fractions) {
      report.cells.push_back(run_cell(barrier, fraction, spec, train, test));
      write_cell(out, report.cells.back());
      out.flush();
    }
  }
  return report;
}

inline SweepReport run_sweep(const SweepSpec& spec, const Dataset& train, const Dataset& test,
                             const std::string& out_path) {
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
  auto report = run_sweep(spec, train, test, out);
  if (!out) throw std::runtime_error("write failed for '" + out_path + "'");
  return report;
}

// ---------------------------------------------------------------------------
// Rule listing
// ---------------------------------------------------------------------------

/// One line per clause:
///   class <label> clause <j> <+|->: <lit> AND <lit> ...
/// where a literal renders as `<name>` or `NOT <name>`, permanent ones get a
/// trailing ` [permanent]`, and literals are ordered by feature then sign.
/// A clause with nothing included renders as `TRUE (empty)`. Features are
/// named `f<k>` unless `feature_names` covers them.
inline std::string explain_model(const Model& model, const std::vector<std::string>& feature_names = {}) {
  if (model.classes().empty()) throw std::logic_error("model has no classes");
  const std::size_t k = model.n_features();
  auto name = [&](std::size_t f) { return f < feature_names.size() ? feature_names[f] : "f" + std::to_string(f); };
  std::ostringstream out;
  for (const auto& [label, bank] : model.classes()) {
    std::uint32_t j = 0;
    auto line = [&](const SparseClause& c) {
      std::vector<std::pair<LiteralId, bool>> lits;  // (literal, permanent)
      for (auto l : c.permanent()) lits.emplace_back(l, true);
      for (const auto& t : c.included()) lits.emplace_back(t.literal, false);
      std::sort(lits.begin(), lits.end(), [&](const auto& a, const auto& b) {
        const auto fa = a.first % k, fb = b.first % k;
        return fa != fb ? fa < fb : a.first < b.first;
      });
      out << "class " << label << " clause " << j++ << ' ' << (c.polarity() == Polarity::Positive ? '+' : '-') << ": ";
      if (lits.empty()) {
        out << "TRUE (empty)\n";
        return;
      }
      for (std::size_t i = 0; i < lits.size(); ++i) {
        const auto [l, perm] = lits[i];
        if (i) out << " AND ";
        if (l >= k) out << "NOT ";
        out << name(l % k);
        if (perm) out << " [permanent]";
      }
      out << '\n';
    };
    for (const auto& c : bank.positive) line(c);
    for (const auto& c : bank.negative) line(c);
  }
  return out.str();
}

}  // namespace ctm::bench
