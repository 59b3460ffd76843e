// Tsetlin machine learning over contracting sparse clauses.
//
// Feedback tables (s = specificity, c = clause output under training rules):
//
//   Type I, applied to every live automaton of the clause
//     c = 1, literal true   -> increase with prob (s-1)/s  (1 when boosted)
//     c = 1, literal false  -> decrease with prob 1/s
//     c = 0                 -> decrease with prob 1/s
//   Type II, only when c = 1
//     excluded automaton whose literal is false -> increase
//
// Permanent literals take no feedback. With a literal budget, Type I does
// not raise excluded automata of a clause whose included + permanent count
// had already reached the budget when the feedback started.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctm/automata.hpp"
#include "ctm/clause.hpp"
#include "ctm/data.hpp"
#include "ctm/random.hpp"
#include "ctm/sample.hpp"

namespace ctm {

struct HyperParams {
  /// S. Half of the clauses of each class are positive, half negative.
  std::uint32_t clauses_per_class = 20;
  /// T. Class sums are clamped to [-T, T] before computing feedback odds.
  std::int32_t threshold = 10;
  /// s.
  double specificity = 3.9;
  std::optional<std::uint32_t> max_included_literals;
  double literal_sample_fraction = 1.0;
  bool boost_true_positive = false;

  void validate() const {
    if (clauses_per_class == 0 || clauses_per_class % 2 != 0) {
      throw std::invalid_argument("clauses per class must be a positive even number, got " +
                                  std::to_string(clauses_per_class));
    }
    if (threshold < 1) throw std::invalid_argument("threshold must be >= 1");
    if (!(specificity >= 1.0)) throw std::invalid_argument("specificity must be >= 1");
    if (max_included_literals && *max_included_literals == 0) {
      throw std::invalid_argument("literal budget must be positive");
    }
    if (!(literal_sample_fraction > 0.0 && literal_sample_fraction <= 1.0)) {
      throw std::invalid_argument("literal sample fraction must lie in (0, 1]");
    }
  }

  friend bool operator==(const HyperParams&, const HyperParams&) = default;
};

struct ClassBank {
  std::vector<SparseClause> positive;
  std::vector<SparseClause> negative;

  friend bool operator==(const ClassBank&, const ClassBank&) = default;
};

/// Absorption bookkeeping carried with the model.
struct AbsorptionCounters {
  std::uint64_t initial_live_ta = 0;
  std::uint64_t absorbed_exclude = 0;
  std::uint64_t absorbed_include = 0;

  friend bool operator==(const AbsorptionCounters&, const AbsorptionCounters&) = default;
};

class Model {
 public:
  Model(std::size_t n_features, AutomatonConfig config, HyperParams hyper)
      : n_features_(n_features), config_(config), hyper_(hyper) {
    if (n_features == 0) throw std::invalid_argument("model needs at least one feature");
    config_.validate();
    hyper_.validate();
  }

  std::size_t n_features() const { return n_features_; }
  const AutomatonConfig& automaton_config() const { return config_; }
  const HyperParams& hyper() const { return hyper_; }

  const std::map<Label, ClassBank>& classes() const { return classes_; }
  std::map<Label, ClassBank>& classes() { return classes_; }

  bool has_class(Label y) const { return classes_.contains(y); }

  const ClassBank& bank(Label y) const {
    auto it = classes_.find(y);
    if (it == classes_.end()) throw std::out_of_range("unknown class " + std::to_string(y));
    return it->second;
  }

  /// Registers `y` with freshly initialised clauses; no-op if already known.
  /// Literal subsampling draws are keyed by (class, clause, literal) only,
  /// so the resulting bank does not depend on when the class shows up.
  ClassBank& add_class(Label y, const RandomSource& rng) {
    auto it = classes_.find(y);
    if (it != classes_.end()) return it->second;
    ClassBank bank;
    const std::uint32_t half = hyper_.clauses_per_class / 2;
    bank.positive.reserve(half);
    bank.negative.reserve(half);
    for (std::uint32_t j = 0; j < hyper_.clauses_per_class; ++j) {
      const auto polarity = j < half ? Polarity::Positive : Polarity::Negative;
      auto sampler = rng.stream({0, 0, y, j, DrawPurpose::LiteralSample});
      auto clause = init_clause(polarity, n_features_, hyper_.literal_sample_fraction, config_, sampler);
      counters_.initial_live_ta += clause.counts().live();
      (j < half ? bank.positive : bank.negative).push_back(std::move(clause));
    }
    return classes_.emplace(y, std::move(bank)).first->second;
  }

  /// Inserts a fully built bank, e.g. when loading from disk.
  void put_class(Label y, ClassBank bank) {
    const std::uint32_t half = hyper_.clauses_per_class / 2;
    if (bank.positive.size() != half || bank.negative.size() != half) {
      throw ContractViolation("class bank must hold S/2 clauses of each polarity");
    }
    classes_.insert_or_assign(y, std::move(bank));
  }

  AbsorptionCounters& counters() { return counters_; }
  const AbsorptionCounters& counters() const { return counters_; }

  friend bool operator==(const Model&, const Model&) = default;

 private:
  std::size_t n_features_;
  AutomatonConfig config_;
  HyperParams hyper_;
  std::map<Label, ClassBank> classes_;
  AbsorptionCounters counters_;
};

/// Per-step (or aggregated) learning activity.
struct StepMetrics {
  /// Every increase/decrease applied to an automaton counts once.
  std::uint64_t ta_updates = 0;
  std::uint64_t discarded = 0;
  std::uint64_t permanently_included = 0;
  std::uint64_t type_i_clauses = 0;
  std::uint64_t type_ii_clauses = 0;

  StepMetrics& operator+=(const StepMetrics& o) {
    ta_updates += o.ta_updates;
    discarded += o.discarded;
    permanently_included += o.permanently_included;
    type_i_clauses += o.type_i_clauses;
    type_ii_clauses += o.type_ii_clauses;
    return *this;
  }

  friend bool operator==(const StepMetrics&, const StepMetrics&) = default;
};

struct NullEffectSink {
  void operator()(UpdateEffect) const {}
};

namespace detail {

template <typename Sink>
struct CountingSink {
  StepMetrics& metrics;
  Sink& inner;

  void operator()(UpdateEffect e) {
    ++metrics.ta_updates;
    if (e == UpdateEffect::Discarded) ++metrics.discarded;
    if (e == UpdateEffect::PermanentlyIncluded) ++metrics.permanently_included;
    inner(e);
  }
};

}  // namespace detail

inline std::int64_t class_sum(const ClassBank& bank, const InputView& x, EvalMode mode) {
  std::int64_t sum = 0;
  for (const auto& c : bank.positive) sum += c.evaluate(x, mode) ? 1 : 0;
  for (const auto& c : bank.negative) sum -= c.evaluate(x, mode) ? 1 : 0;
  return sum;
}

/// Unit step on a vote sum: 1 iff v >= 0.
constexpr bool vote_step(std::int64_t v) { return v >= 0; }

/// Arg-max class under inference rules; ties go to the smallest label.
inline Label predict(const Model& model, const InputView& x) {
  if (model.classes().empty()) throw std::logic_error("predict on a model without classes");
  Label best = 0;
  std::int64_t best_sum = std::numeric_limits<std::int64_t>::min();
  for (const auto& [label, bank] : model.classes()) {
    const auto s = class_sum(bank, x, EvalMode::Inference);
    if (s > best_sum) {
      best_sum = s;
      best = label;
    }
  }
  return best;
}

inline Label predict(const Model& model, const BoolSample& x) {
  return predict(model, InputView(x, model.n_features()));
}

/// Type I feedback. `draws` supplies one keyed draw per probabilistic
/// decision, addressed by literal id.
template <typename Sink>
void type_i_feedback(SparseClause& clause, const InputView& x, const HyperParams& hyper,
                     const AutomatonConfig& config, const KeyedStream& draws, Sink&& sink) {
  const bool fires = clause.evaluate(x, EvalMode::Training);
  const double p_low = 1.0 / hyper.specificity;
  const double p_high = hyper.boost_true_positive ? 1.0 : (hyper.specificity - 1.0) / hyper.specificity;
  const auto counts = clause.counts();
  const bool at_budget = hyper.max_included_literals &&
                         counts.included + counts.permanent >= *hyper.max_included_literals;

  // Walk each list from the back: a swap-remove at i pulls in an element
  // that has already been visited, and tuples moved into `included` land
  // past the snapshot so they are not visited twice in one step.
  const std::size_t n_included = counts.included;
  for (std::size_t i = counts.excluded; i-- > 0;) {
    const LiteralId l = clause.excluded()[i].literal;
    if (fires && x.literal(l)) {
      if (!at_budget && draws.bernoulli(l, p_high)) sink(clause.increase_excluded_at(i, config));
    } else if (draws.bernoulli(l, p_low)) {
      sink(clause.decrease_excluded_at(i, config));
    }
  }
  for (std::size_t i = n_included; i-- > 0;) {
    const LiteralId l = clause.included()[i].literal;
    if (fires && x.literal(l)) {
      if (draws.bernoulli(l, p_high)) sink(clause.increase_included_at(i, config));
    } else if (draws.bernoulli(l, p_low)) {
      sink(clause.decrease_included_at(i, config));
    }
  }
}

inline std::vector<UpdateEffect> type_i_feedback(SparseClause& clause, const InputView& x,
                                                 const HyperParams& hyper,
                                                 const AutomatonConfig& config,
                                                 const KeyedStream& draws) {
  std::vector<UpdateEffect> effects;
  type_i_feedback(clause, x, hyper, config, draws, [&](UpdateEffect e) { effects.push_back(e); });
  return effects;
}

/// Type II feedback. Deterministic.
template <typename Sink>
void type_ii_feedback(SparseClause& clause, const InputView& x, const AutomatonConfig& config,
                      Sink&& sink) {
  if (!clause.evaluate(x, EvalMode::Training)) return;
  for (std::size_t i = clause.excluded().size(); i-- > 0;) {
    if (!x.literal(clause.excluded()[i].literal)) sink(clause.increase_excluded_at(i, config));
  }
}

inline std::vector<UpdateEffect> type_ii_feedback(SparseClause& clause, const InputView& x,
                                                  const AutomatonConfig& config) {
  std::vector<UpdateEffect> effects;
  type_ii_feedback(clause, x, config, [&](UpdateEffect e) { effects.push_back(e); });
  return effects;
}

/// Probability that a clause of the target class is updated for class sum v.
inline double target_update_probability(std::int64_t v, std::int32_t threshold) {
  const auto t = static_cast<std::int64_t>(threshold);
  v = std::clamp(v, -t, t);
  return static_cast<double>(t - v) / static_cast<double>(2 * t);
}

/// Probability that a clause of the sampled non-target class is updated.
inline double non_target_update_probability(std::int64_t v, std::int32_t threshold) {
  const auto t = static_cast<std::int64_t>(threshold);
  v = std::clamp(v, -t, t);
  return static_cast<double>(t + v) / static_cast<double>(2 * t);
}

/// Picks the non-target class uniformly among the other registered classes.
inline std::optional<Label> sample_other_class(const Model& model, Label y, std::uint32_t epoch,
                                               std::uint32_t sample_index, const RandomSource& rng) {
  const std::size_t m = model.classes().size();
  if (m < 2) return std::nullopt;
  const double u = rng.uniform({epoch, sample_index, y, 0, DrawPurpose::NegativeClass});
  auto pick = std::min(static_cast<std::size_t>(u * static_cast<double>(m - 1)), m - 2);
  for (const auto& [label, bank] : model.classes()) {
    if (label == y) continue;
    if (pick-- == 0) return label;
  }
  return std::nullopt;
}

namespace detail {

// `toward_one` selects Type I for positive clauses and Type II for negative
// ones; otherwise the roles swap.
template <typename Sink>
void reinforce_bank(ClassBank& bank, Label label, const InputView& x, double p, bool toward_one,
                    const Model& model, std::uint32_t epoch, std::uint32_t sample_index,
                    const RandomSource& rng, StepMetrics& metrics, Sink& sink) {
  const auto& hyper = model.hyper();
  const auto& config = model.automaton_config();
  const std::uint32_t half = hyper.clauses_per_class / 2;
  const auto select = rng.stream({epoch, sample_index, label, 0, DrawPurpose::ClauseSelect});
  CountingSink<Sink> counting{metrics, sink};

  auto visit = [&](SparseClause& clause, std::uint32_t j, bool type_i) {
    if (!select.bernoulli(j, p)) return;
    if (type_i) {
      ++metrics.type_i_clauses;
      type_i_feedback(clause, x, hyper, config,
                      rng.stream({epoch, sample_index, label, j, DrawPurpose::TypeI}), counting);
    } else {
      ++metrics.type_ii_clauses;
      type_ii_feedback(clause, x, config, counting);
    }
  };
  for (std::uint32_t j = 0; j < half; ++j) visit(bank.positive[j], j, toward_one);
  for (std::uint32_t j = 0; j < half; ++j) visit(bank.negative[j], half + j, !toward_one);
}

}  // namespace detail

/// One online learning step on sample `x` with label `y`. Unknown labels
/// are registered on the fly. `sink` sees every UpdateEffect produced.
template <typename Sink = NullEffectSink>
StepMetrics train_step(Model& model, const InputView& x, Label y, std::uint32_t epoch,
                       std::uint32_t sample_index, const RandomSource& rng, Sink&& sink = {}) {
  if (x.n_features() != model.n_features()) {
    throw ContractViolation("sample width " + std::to_string(x.n_features()) +
                            " does not match model width " + std::to_string(model.n_features()));
  }
  StepMetrics metrics;
  const auto t = model.hyper().threshold;

  ClassBank& target = model.add_class(y, rng);
  const double p_target = target_update_probability(class_sum(target, x, EvalMode::Training), t);
  detail::reinforce_bank(target, y, x, p_target, true, model, epoch, sample_index, rng, metrics, sink);

  if (auto other = sample_other_class(model, y, epoch, sample_index, rng)) {
    ClassBank& bank = model.classes().at(*other);
    const double p_other = non_target_update_probability(class_sum(bank, x, EvalMode::Training), t);
    detail::reinforce_bank(bank, *other, x, p_other, false, model, epoch, sample_index, rng, metrics, sink);
  }

  model.counters().absorbed_exclude += metrics.discarded;
  model.counters().absorbed_include += metrics.permanently_included;
  return metrics;
}

inline std::uint64_t live_ta_count(const Model& model) {
  std::uint64_t live = 0;
  for (const auto& [label, bank] : model.classes()) {
    for (const auto& c : bank.positive) live += c.counts().live();
    for (const auto& c : bank.negative) live += c.counts().live();
  }
  return live;
}

inline double accuracy(const Model& model, const Dataset& data) {
  if (data.samples.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& s : data.samples) correct += predict(model, s) == s.label ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(data.samples.size());
}

struct EpochMetrics {
  std::uint32_t epoch = 0;
  /// Seconds spent inside the train_step loop only.
  double train_wall_time = 0.0;
  /// NaN until an observer evaluates the model.
  double test_accuracy = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t absorbed_exclude_total = 0;
  std::uint64_t absorbed_include_total = 0;
  std::uint64_t live_ta_count = 0;
  /// TA updates performed during this epoch.
  std::uint64_t ta_update_events = 0;
  StepMetrics activity;
};

struct FitOptions {
  std::uint32_t epochs = 1;
  /// Epoch number used for the first epoch's draws.
  std::uint32_t first_epoch = 0;
  /// Visit samples in a permutation keyed by (seed, epoch) instead of file order.
  bool shuffle = false;
  /// Called after every epoch; may fill in test_accuracy.
  std::function<void(EpochMetrics&, const Model&)> observer;
};

/// Sample visiting order for one epoch.
inline std::vector<std::uint32_t> epoch_order(std::size_t n, std::uint32_t epoch, bool shuffle,
                                              const RandomSource& rng) {
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0U);
  if (!shuffle) return order;
  const auto draws = rng.stream({epoch, 0, 0, 0, DrawPurpose::Shuffle});
  for (std::size_t i = n; i > 1; --i) {
    auto j = static_cast<std::size_t>(draws.uniform(static_cast<std::uint32_t>(i)) * static_cast<double>(i));
    std::swap(order[i - 1], order[std::min(j, i - 1)]);
  }
  return order;
}

template <typename Sink = NullEffectSink>
std::vector<EpochMetrics> fit(Model& model, const Dataset& train, const FitOptions& options,
                              const RandomSource& rng, Sink&& sink = {}) {
  if (train.samples.empty()) throw std::invalid_argument("training set is empty");
  if (train.n_features != model.n_features()) {
    throw std::invalid_argument("dataset has " + std::to_string(train.n_features) +
                                " features, model expects " + std::to_string(model.n_features()));
  }
  if (options.epochs == 0) return {};
  std::vector<InputView> views;
  views.reserve(train.samples.size());
  for (const auto& s : train.samples) views.emplace_back(s, train.n_features);

  for (Label y : train.labels()) model.add_class(y, rng);

  std::vector<EpochMetrics> history;
  history.reserve(options.epochs);
  for (std::uint32_t e = 0; e < options.epochs; ++e) {
    const std::uint32_t epoch = options.first_epoch + e;
    const auto order = epoch_order(views.size(), epoch, options.shuffle, rng);
    StepMetrics activity;

    const auto start = std::chrono::steady_clock::now();
    for (std::uint32_t i : order) {
      activity += train_step(model, views[i], train.samples[i].label, epoch, i, rng, sink);
    }
    const auto stop = std::chrono::steady_clock::now();

    EpochMetrics m;
    m.epoch = epoch;
    m.train_wall_time = std::chrono::duration<double>(stop - start).count();
    m.absorbed_exclude_total = model.counters().absorbed_exclude;
    m.absorbed_include_total = model.counters().absorbed_include;
    m.live_ta_count = live_ta_count(model);
    m.ta_update_events = activity.ta_updates;
    m.activity = activity;
    if (options.observer) options.observer(m, model);
    history.push_back(m);
  }
  return history;
}

}  // namespace ctm
