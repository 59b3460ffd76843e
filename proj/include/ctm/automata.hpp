// Tsetlin automaton with optional absorbing barriers on either side.
//
// States are 0-indexed: 0..N-1 select Exclude, N..2N-1 select Include.
// A fresh automaton sits at N-1, the Exclude state closest to the centre.
// When a barrier is configured, stepping onto it absorbs the automaton and
// the caller is expected to retire it; there is no way back.

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace ctm {

using TaState = std::int32_t;

enum class Action : std::uint8_t { Exclude, Include };

struct AutomatonConfig {
  /// N. Exclude and Include each own N states.
  TaState states_per_action = 128;
  /// Must lie in [0, N-2]. Unset disables Exclude absorption.
  std::optional<TaState> exclude_barrier;
  /// Must lie in [N+1, 2N-1]. Unset disables Include absorption.
  std::optional<TaState> include_barrier;

  TaState total_states() const { return 2 * states_per_action; }

  bool absorbing() const { return exclude_barrier.has_value() || include_barrier.has_value(); }

  void validate() const {
    const TaState n = states_per_action;
    if (n < 1) {
      throw std::invalid_argument("states_per_action must be >= 1, got " + std::to_string(n));
    }
    if (exclude_barrier && (*exclude_barrier < 0 || *exclude_barrier > n - 2)) {
      throw std::invalid_argument("exclude barrier " + std::to_string(*exclude_barrier) +
                                  " outside [0, " + std::to_string(n - 2) + "]");
    }
    if (include_barrier && (*include_barrier < n + 1 || *include_barrier > 2 * n - 1)) {
      throw std::invalid_argument("include barrier " + std::to_string(*include_barrier) +
                                  " outside [" + std::to_string(n + 1) + ", " +
                                  std::to_string(2 * n - 1) + "]");
    }
  }

  friend bool operator==(const AutomatonConfig&, const AutomatonConfig&) = default;
};

inline TaState initial_state(const AutomatonConfig& config) { return config.states_per_action - 1; }

inline Action action(TaState state, const AutomatonConfig& config) {
  return state >= config.states_per_action ? Action::Include : Action::Exclude;
}

struct TransitionOutcome {
  enum class Kind : std::uint8_t {
    Stayed,
    SwitchedToInclude,
    SwitchedToExclude,
    AbsorbedExclude,
    AbsorbedInclude,
  };

  Kind kind;
  /// Post-transition state. For absorptions this is the barrier state.
  TaState state;

  friend bool operator==(const TransitionOutcome&, const TransitionOutcome&) = default;
};

inline TransitionOutcome increase(TaState state, const AutomatonConfig& config) {
  using K = TransitionOutcome::Kind;
  const TaState n = config.states_per_action;
  if (config.include_barrier && state + 1 == *config.include_barrier) {
    return {K::AbsorbedInclude, state + 1};
  }
  if (state == n - 1) return {K::SwitchedToInclude, n};
  if (state >= 2 * n - 1) return {K::Stayed, 2 * n - 1};
  return {K::Stayed, state + 1};
}

inline TransitionOutcome decrease(TaState state, const AutomatonConfig& config) {
  using K = TransitionOutcome::Kind;
  const TaState n = config.states_per_action;
  if (config.exclude_barrier && state - 1 == *config.exclude_barrier) {
    return {K::AbsorbedExclude, state - 1};
  }
  if (state == n) return {K::SwitchedToExclude, n - 1};
  if (state <= 0) return {K::Stayed, 0};
  return {K::Stayed, state - 1};
}

}  // namespace ctm
