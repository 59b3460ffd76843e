// Dense array-backed Tsetlin machine without absorption.
//
// Serves as a test oracle for the sparse learner: with barriers disabled and
// the same seed, both must end up with identical automaton states for every
// (class, clause, literal). Not meant for timed runs.

#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <tuple>
#include <vector>

#include "ctm/automata.hpp"
#include "ctm/clause.hpp"
#include "ctm/learner.hpp"
#include "ctm/random.hpp"
#include "ctm/sample.hpp"

namespace ctm::reference {

struct DenseClause {
  Polarity polarity = Polarity::Positive;
  /// One slot per literal; empty when the literal is not in this clause's pool.
  std::vector<std::optional<TaState>> states;
};

inline bool dense_evaluate(const DenseClause& clause, const InputView& x, EvalMode mode,
                           const AutomatonConfig& config) {
  bool any_included = false;
  bool all_true = true;
  for (std::size_t l = 0; l < clause.states.size(); ++l) {
    const auto& s = clause.states[l];
    if (!s || action(*s, config) != Action::Include) continue;
    any_included = true;
    if (!x.literal_checked(static_cast<LiteralId>(l))) all_true = false;
  }
  if (!any_included) return mode == EvalMode::Training;
  return all_true;
}

struct DenseBank {
  std::vector<DenseClause> positive;
  std::vector<DenseClause> negative;
};

class DenseModel {
 public:
  DenseModel(std::size_t n_features, AutomatonConfig config, HyperParams hyper)
      : n_features_(n_features), config_(config), hyper_(hyper) {
    config_.validate();
    hyper_.validate();
  }

  std::size_t n_features() const { return n_features_; }
  const AutomatonConfig& automaton_config() const { return config_; }
  const HyperParams& hyper() const { return hyper_; }
  const std::map<Label, DenseBank>& classes() const { return classes_; }
  std::map<Label, DenseBank>& classes() { return classes_; }

  DenseBank& add_class(Label y, const RandomSource& rng) {
    if (auto it = classes_.find(y); it != classes_.end()) return it->second;
    DenseBank bank;
    const std::uint32_t half = hyper_.clauses_per_class / 2;
    const auto n_literals = static_cast<LiteralId>(2 * n_features_);
    for (std::uint32_t j = 0; j < hyper_.clauses_per_class; ++j) {
      DenseClause c;
      c.polarity = j < half ? Polarity::Positive : Polarity::Negative;
      c.states.resize(n_literals);
      const auto sampler = rng.stream({0, 0, y, j, DrawPurpose::LiteralSample});
      for (LiteralId l = 0; l < n_literals; ++l) {
        if (sampler.bernoulli(l, hyper_.literal_sample_fraction)) c.states[l] = initial_state(config_);
      }
      (j < half ? bank.positive : bank.negative).push_back(std::move(c));
    }
    return classes_.emplace(y, std::move(bank)).first->second;
  }

 private:
  std::size_t n_features_;
  AutomatonConfig config_;
  HyperParams hyper_;
  std::map<Label, DenseBank> classes_;
};

inline std::int64_t dense_class_sum(const DenseBank& bank, const InputView& x, EvalMode mode,
                                    const AutomatonConfig& config) {
  std::int64_t sum = 0;
  for (const auto& c : bank.positive) sum += dense_evaluate(c, x, mode, config) ? 1 : 0;
  for (const auto& c : bank.negative) sum -= dense_evaluate(c, x, mode, config) ? 1 : 0;
  return sum;
}

inline Label dense_predict(const DenseModel& model, const InputView& x) {
  if (model.classes().empty()) throw std::logic_error("predict on a model without classes");
  Label best = 0;
  std::int64_t best_sum = std::numeric_limits<std::int64_t>::min();
  for (const auto& [label, bank] : model.classes()) {
    const auto s = dense_class_sum(bank, x, EvalMode::Inference, model.automaton_config());
    if (s > best_sum) {
      best_sum = s;
      best = label;
    }
  }
  return best;
}

namespace detail {

inline void step_automaton(std::optional<TaState>& slot, bool up, const AutomatonConfig& config,
                           StepMetrics& metrics) {
  const auto out = up ? increase(*slot, config) : decrease(*slot, config);
  *slot = out.state;
  ++metrics.ta_updates;
}

inline void dense_type_i(DenseClause& clause, const InputView& x, const HyperParams& hyper,
                         const AutomatonConfig& config, const KeyedStream& draws, StepMetrics& metrics) {
  const bool fires = dense_evaluate(clause, x, EvalMode::Training, config);
  const double p_low = 1.0 / hyper.specificity;
  const double p_high = hyper.boost_true_positive ? 1.0 : (hyper.specificity - 1.0) / hyper.specificity;
  std::size_t included = 0;
  for (const auto& s : clause.states) included += (s && action(*s, config) == Action::Include) ? 1 : 0;
  const bool at_budget = hyper.max_included_literals && included >= *hyper.max_included_literals;

  for (std::size_t i = 0; i < clause.states.size(); ++i) {
    auto& slot = clause.states[i];
    if (!slot) continue;
    const auto l = static_cast<LiteralId>(i);
    if (fires && x.literal(l)) {
      if (at_budget && action(*slot, config) == Action::Exclude) continue;
      if (draws.bernoulli(l, p_high)) step_automaton(slot, true, config, metrics);
    } else if (draws.bernoulli(l, p_low)) {
      step_automaton(slot, false, config, metrics);
    }
  }
}

inline void dense_type_ii(DenseClause& clause, const InputView& x, const AutomatonConfig& config,
                          StepMetrics& metrics) {
  if (!dense_evaluate(clause, x, EvalMode::Training, config)) return;
  for (std::size_t i = 0; i < clause.states.size(); ++i) {
    auto& slot = clause.states[i];
    if (!slot || action(*slot, config) != Action::Exclude) continue;
    if (!x.literal(static_cast<LiteralId>(i))) step_automaton(slot, true, config, metrics);
  }
}

inline void dense_reinforce(DenseBank& bank, Label label, const InputView& x, double p, bool toward_one,
                            const DenseModel& model, std::uint32_t epoch, std::uint32_t sample_index,
                            const RandomSource& rng, StepMetrics& metrics) {
  const auto& hyper = model.hyper();
  const auto& config = model.automaton_config();
  const std::uint32_t half = hyper.clauses_per_class / 2;
  for (std::uint32_t j = 0; j < hyper.clauses_per_class; ++j) {
    DenseClause& clause = j < half ? bank.positive[j] : bank.negative[j - half];
    if (!rng.bernoulli({epoch, sample_index, label, 0, DrawPurpose::ClauseSelect}, j, p)) continue;
    const bool type_i = (j < half) == toward_one;
    if (type_i) {
      ++metrics.type_i_clauses;
      dense_type_i(clause, x, hyper, config, rng.stream({epoch, sample_index, label, j, DrawPurpose::TypeI}), metrics);
    } else {
      ++metrics.type_ii_clauses;
      dense_type_ii(clause, x, config, metrics);
    }
  }
}

}  // namespace detail

/// Mirrors ctm::train_step on dense storage. Rejects absorbing configs.
inline StepMetrics dense_train_step(DenseModel& model, const InputView& x, Label y, std::uint32_t epoch,
                                    std::uint32_t sample_index, const RandomSource& rng) {
  if (model.automaton_config().absorbing()) {
    throw std::invalid_argument("dense reference models the non-absorbing machine only");
  }
  if (x.n_features() != model.n_features()) throw ContractViolation("sample width mismatch");
  StepMetrics metrics;
  const auto t = model.hyper().threshold;
  const auto& config = model.automaton_config();

  DenseBank& target = model.add_class(y, rng);
  const double p = target_update_probability(dense_class_sum(target, x, EvalMode::Training, config), t);
  detail::dense_reinforce(target, y, x, p, true, model, epoch, sample_index, rng, metrics);

  const std::size_t m = model.classes().size();
  if (m >= 2) {
    const double u = rng.uniform({epoch, sample_index, y, 0, DrawPurpose::NegativeClass});
    std::size_t pick = std::min(static_cast<std::size_t>(u * static_cast<double>(m - 1)), m - 2);
    for (auto& [label, bank] : model.classes()) {
      if (label == y) continue;
      if (pick-- != 0) continue;
      const double q = non_target_update_probability(dense_class_sum(bank, x, EvalMode::Training, config), t);
      detail::dense_reinforce(bank, label, x, q, false, model, epoch, sample_index, rng, metrics);
      break;
    }
  }
  return metrics;
}

/// (class, clause index, literal) -> automaton state.
using StateMap = std::map<std::tuple<Label, std::uint32_t, LiteralId>, TaState>;

inline StateMap state_map(const DenseModel& model) {
  StateMap out;
  const std::uint32_t half = model.hyper().clauses_per_class / 2;
  for (const auto& [label, bank] : model.classes()) {
    for (std::uint32_t j = 0; j < model.hyper().clauses_per_class; ++j) {
      const auto& c = j < half ? bank.positive[j] : bank.negative[j - half];
      for (std::size_t l = 0; l < c.states.size(); ++l) {
        if (c.states[l]) out.emplace(std::tuple{label, j, static_cast<LiteralId>(l)}, *c.states[l]);
      }
    }
  }
  return out;
}

/// Live automata of a sparse model. Permanent literals carry no state and
/// are left out.
inline StateMap state_map(const Model& model) {
  StateMap out;
  const std::uint32_t half = model.hyper().clauses_per_class / 2;
  for (const auto& [label, bank] : model.classes()) {
    for (std::uint32_t j = 0; j < model.hyper().clauses_per_class; ++j) {
      const auto& c = j < half ? bank.positive[j] : bank.negative[j - half];
      for (const auto& t : c.excluded()) out.emplace(std::tuple{label, j, t.literal}, t.state);
      for (const auto& t : c.included()) out.emplace(std::tuple{label, j, t.literal}, t.state);
    }
  }
  return out;
}

}  // namespace ctm::reference
