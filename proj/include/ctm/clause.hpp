// Contracting sparse clause.
//
// A clause owns three lists:
//   excluded  - (literal, state) for automata currently choosing Exclude
//   included  - (literal, state) for automata currently choosing Include
//   permanent - literals whose automaton was absorbed on the Include side
// A literal absorbed on the Exclude side is dropped from every list and
// never comes back. Moves between lists remove the tuple by overwriting it
// with the last element and popping, then append to the destination.
//
// A per-clause slot table maps literal -> (list, position) so that the
// literal-addressed operations run in constant time. Positional variants
// are exposed for the learner, which walks the lists directly.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ctm/automata.hpp"
#include "ctm/errors.hpp"
#include "ctm/random.hpp"
#include "ctm/sample.hpp"

namespace ctm {

enum class Polarity : std::int8_t { Positive = 1, Negative = -1 };

enum class EvalMode : std::uint8_t { Training, Inference };

enum class UpdateEffect : std::uint8_t {
  StateChanged,
  MovedToInclude,
  MovedToExclude,
  PermanentlyIncluded,
  Discarded,
  Saturated,
};

enum class ClauseList : std::uint8_t { None, Excluded, Included, Permanent };

struct LiteralState {
  LiteralId literal;
  TaState state;

  friend bool operator==(const LiteralState&, const LiteralState&) = default;
};

struct ClauseCounts {
  std::size_t excluded = 0;
  std::size_t included = 0;
  std::size_t permanent = 0;

  /// Automata still taking part in learning.
  std::size_t live() const { return excluded + included; }

  friend bool operator==(const ClauseCounts&, const ClauseCounts&) = default;
};

inline const char* to_string(UpdateEffect e) {
  switch (e) {
    case UpdateEffect::StateChanged: return "StateChanged";
    case UpdateEffect::MovedToInclude: return "MovedToInclude";
    case UpdateEffect::MovedToExclude: return "MovedToExclude";
    case UpdateEffect::PermanentlyIncluded: return "PermanentlyIncluded";
    case UpdateEffect::Discarded: return "Discarded";
    case UpdateEffect::Saturated: return "Saturated";
  }
  return "?";
}

class SparseClause {
 public:
  SparseClause() = default;

  SparseClause(Polarity polarity, std::size_t n_features)
      : polarity_(polarity), n_features_(n_features), slots_(2 * n_features) {}

  /// Rebuilds a clause from explicit lists, e.g. when loading a model.
  /// Throws ContractViolation if the lists break any clause invariant.
  static SparseClause from_lists(Polarity polarity, std::size_t n_features,
                                 std::vector<LiteralState> excluded,
                                 std::vector<LiteralState> included,
                                 std::vector<LiteralId> permanent,
                                 const AutomatonConfig& config) {
    SparseClause c(polarity, n_features);
    c.excluded_ = std::move(excluded);
    c.included_ = std::move(included);
    c.permanent_ = std::move(permanent);
    c.rebuild_slots();
    c.check_invariants(config);
    return c;
  }

  Polarity polarity() const { return polarity_; }
  std::size_t n_features() const { return n_features_; }

  std::span<const LiteralState> excluded() const { return excluded_; }
  std::span<const LiteralState> included() const { return included_; }
  std::span<const LiteralId> permanent() const { return permanent_; }

  ClauseCounts counts() const { return {excluded_.size(), included_.size(), permanent_.size()}; }

  ClauseList where(LiteralId literal) const {
    return literal < slots_.size() ? slots_[literal].list : ClauseList::None;
  }

  bool evaluate(const InputView& x, EvalMode mode) const {
    if (permanent_.empty() && included_.empty()) return mode == EvalMode::Training;
    for (LiteralId l : permanent_) {
      if (!x.literal_checked(l)) return false;
    }
    for (const auto& t : included_) {
      if (!x.literal_checked(t.literal)) return false;
    }
    return true;
  }

  UpdateEffect increase_literal(LiteralId literal, const AutomatonConfig& config) {
    const Slot s = live_slot(literal);
    return apply(s.list, s.pos, increase(state_at(s), config), config);
  }

  UpdateEffect decrease_literal(LiteralId literal, const AutomatonConfig& config) {
    const Slot s = live_slot(literal);
    return apply(s.list, s.pos, decrease(state_at(s), config), config);
  }

  UpdateEffect increase_excluded_at(std::size_t pos, const AutomatonConfig& config) {
    return apply(ClauseList::Excluded, pos, increase(excluded_[pos].state, config), config);
  }
  UpdateEffect decrease_excluded_at(std::size_t pos, const AutomatonConfig& config) {
    return apply(ClauseList::Excluded, pos, decrease(excluded_[pos].state, config), config);
  }
  UpdateEffect increase_included_at(std::size_t pos, const AutomatonConfig& config) {
    return apply(ClauseList::Included, pos, increase(included_[pos].state, config), config);
  }
  UpdateEffect decrease_included_at(std::size_t pos, const AutomatonConfig& config) {
    return apply(ClauseList::Included, pos, decrease(included_[pos].state, config), config);
  }

  /// Throws ContractViolation describing the first broken invariant.
  void check_invariants(const AutomatonConfig& config) const {
    const TaState n = config.states_per_action;
    std::vector<std::uint8_t> seen(2 * n_features_, 0);
    auto mark = [&](LiteralId l, const char* list) {
      if (l >= seen.size()) fail(std::string(list) + " literal " + std::to_string(l) + " out of range");
      if (seen[l]) fail("literal " + std::to_string(l) + " appears twice");
      seen[l] = 1;
    };
    for (std::size_t i = 0; i < excluded_.size(); ++i) {
      const auto& t = excluded_[i];
      mark(t.literal, "excluded");
      if (t.state < 0 || t.state > n - 1) fail("excluded state " + std::to_string(t.state) + " not on Exclude side");
      if (config.exclude_barrier && t.state <= *config.exclude_barrier) fail("excluded state at or below barrier");
      check_slot(t.literal, ClauseList::Excluded, i);
    }
    for (std::size_t i = 0; i < included_.size(); ++i) {
      const auto& t = included_[i];
      mark(t.literal, "included");
      if (t.state < n || t.state > 2 * n - 1) fail("included state " + std::to_string(t.state) + " not on Include side");
      if (config.include_barrier && t.state >= *config.include_barrier) fail("included state at or above barrier");
      check_slot(t.literal, ClauseList::Included, i);
    }
    for (std::size_t i = 0; i < permanent_.size(); ++i) {
      mark(permanent_[i], "permanent");
      check_slot(permanent_[i], ClauseList::Permanent, i);
    }
    for (std::size_t l = 0; l < seen.size(); ++l) {
      if (!seen[l] && slots_[l].list != ClauseList::None) fail("stale slot for literal " + std::to_string(l));
    }
  }

  friend bool operator==(const SparseClause& a, const SparseClause& b) {
    return a.polarity_ == b.polarity_ && a.n_features_ == b.n_features_ &&
           a.excluded_ == b.excluded_ && a.included_ == b.included_ && a.permanent_ == b.permanent_;
  }

  friend SparseClause init_clause(Polarity, std::size_t, double, const AutomatonConfig&,
                                  const KeyedStream&);

 private:
  struct Slot {
    ClauseList list = ClauseList::None;
    std::uint32_t pos = 0;
  };

  [[noreturn]] static void fail(const std::string& what) {
    throw ContractViolation("clause invariant: " + what);
  }

  void check_slot(LiteralId l, ClauseList list, std::size_t pos) const {
    if (slots_[l].list != list || slots_[l].pos != pos) fail("slot mismatch for literal " + std::to_string(l));
  }

  void rebuild_slots() {
    slots_.assign(2 * n_features_, Slot{});
    auto put = [&](LiteralId l, ClauseList list, std::size_t pos) {
      if (l >= slots_.size()) fail("literal " + std::to_string(l) + " out of range");
      if (slots_[l].list != ClauseList::None) fail("literal " + std::to_string(l) + " appears twice");
      slots_[l] = {list, static_cast<std::uint32_t>(pos)};
    };
    for (std::size_t i = 0; i < excluded_.size(); ++i) put(excluded_[i].literal, ClauseList::Excluded, i);
    for (std::size_t i = 0; i < included_.size(); ++i) put(included_[i].literal, ClauseList::Included, i);
    for (std::size_t i = 0; i < permanent_.size(); ++i) put(permanent_[i], ClauseList::Permanent, i);
  }

  Slot live_slot(LiteralId literal) const {
    const ClauseList list = where(literal);
    if (list != ClauseList::Excluded && list != ClauseList::Included) {
      throw ContractViolation("literal " + std::to_string(literal) +
                              " has no live automaton in this clause");
    }
    return slots_[literal];
  }

  TaState state_at(Slot s) const {
    return s.list == ClauseList::Excluded ? excluded_[s.pos].state : included_[s.pos].state;
  }

  std::vector<LiteralState>& tuples(ClauseList list) {
    return list == ClauseList::Excluded ? excluded_ : included_;
  }

  // Overwrite with the last element, then pop.
  LiteralState take(ClauseList list, std::size_t pos) {
    auto& v = tuples(list);
    const LiteralState taken = v[pos];
    if (pos + 1 != v.size()) {
      v[pos] = v.back();
      slots_[v[pos].literal].pos = static_cast<std::uint32_t>(pos);
    }
    v.pop_back();
    slots_[taken.literal] = Slot{};
    return taken;
  }

  void append(ClauseList list, LiteralState t) {
    auto& v = tuples(list);
    slots_[t.literal] = {list, static_cast<std::uint32_t>(v.size())};
    v.push_back(t);
  }

  UpdateEffect apply(ClauseList list, std::size_t pos, TransitionOutcome out,
                     const AutomatonConfig& config) {
    using K = TransitionOutcome::Kind;
    switch (out.kind) {
      case K::Stayed: {
        TaState& s = tuples(list)[pos].state;
        if (s == out.state) return UpdateEffect::Saturated;
        s = out.state;
        return UpdateEffect::StateChanged;
      }
      case K::SwitchedToInclude: {
        LiteralState t = take(list, pos);
        append(ClauseList::Included, {t.literal, config.states_per_action});
        return UpdateEffect::MovedToInclude;
      }
      case K::SwitchedToExclude: {
        LiteralState t = take(list, pos);
        append(ClauseList::Excluded, {t.literal, config.states_per_action - 1});
        return UpdateEffect::MovedToExclude;
      }
      case K::AbsorbedInclude: {
        LiteralState t = take(list, pos);
        slots_[t.literal] = {ClauseList::Permanent, static_cast<std::uint32_t>(permanent_.size())};
        permanent_.push_back(t.literal);
        return UpdateEffect::PermanentlyIncluded;
      }
      case K::AbsorbedExclude:
        take(list, pos);
        return UpdateEffect::Discarded;
    }
    return UpdateEffect::Saturated;
  }

  Polarity polarity_ = Polarity::Positive;
  std::size_t n_features_ = 0;
  std::vector<LiteralState> excluded_;
  std::vector<LiteralState> included_;
  std::vector<LiteralId> permanent_;
  std::vector<Slot> slots_;
};

/// Fresh clause: each of the 2K literals joins the excluded list at the
/// initial state independently with probability `sample_fraction`, using
/// `sampler.uniform(literal)` as the draw.
inline SparseClause init_clause(Polarity polarity, std::size_t n_features, double sample_fraction,
                                const AutomatonConfig& config, const KeyedStream& sampler) {
  if (n_features == 0) throw std::invalid_argument("clause needs at least one feature");
  if (!(sample_fraction > 0.0 && sample_fraction <= 1.0)) {
    throw std::invalid_argument("sample fraction must lie in (0, 1], got " + std::to_string(sample_fraction));
  }
  SparseClause c(polarity, n_features);
  const TaState start = initial_state(config);
  const auto n_literals = static_cast<LiteralId>(2 * n_features);
  c.excluded_.reserve(sample_fraction >= 1.0 ? n_literals : static_cast<std::size_t>(n_literals * sample_fraction * 1.2) + 8);
  for (LiteralId l = 0; l < n_literals; ++l) {
    if (sampler.bernoulli(l, sample_fraction)) c.append(ClauseList::Excluded, {l, start});
  }
  return c;
}

}  // namespace ctm
