#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ctm/data.hpp"
#include "ctm/learner.hpp"

namespace ctm {
namespace {

AutomatonConfig config_with(std::optional<TaState> b_ex = {}) {
  AutomatonConfig c;
  c.exclude_barrier = b_ex;
  return c;
}

HyperParams hyper_with(std::uint32_t clauses, std::int32_t t, double s) {
  HyperParams h;
  h.clauses_per_class = clauses;
  h.threshold = t;
  h.specificity = s;
  return h;
}

// Clause over K = 1 that always fires (permanent x_0, inputs set x_0 = 1).
SparseClause firing(Polarity p) { return SparseClause::from_lists(p, 1, {}, {}, {0}, config_with()); }
// Clause over K = 1 that never fires on x_0 = 1.
SparseClause silent(Polarity p) { return SparseClause::from_lists(p, 1, {}, {}, {1}, config_with()); }

ClassBank bank_with(std::uint32_t half, std::uint32_t pos_firing, std::uint32_t neg_firing) {
  ClassBank b;
  for (std::uint32_t j = 0; j < half; ++j) {
    b.positive.push_back(j < pos_firing ? firing(Polarity::Positive) : silent(Polarity::Positive));
    b.negative.push_back(j < neg_firing ? firing(Polarity::Negative) : silent(Polarity::Negative));
  }
  return b;
}

const InputView kOn(std::vector<std::uint32_t>{0}, 1);

TEST(HyperParamsTest, Validation) {
  EXPECT_NO_THROW(HyperParams{}.validate());
  EXPECT_THROW(hyper_with(3, 1, 2).validate(), std::invalid_argument);
  EXPECT_THROW(hyper_with(0, 1, 2).validate(), std::invalid_argument);
  EXPECT_THROW(hyper_with(2, 0, 2).validate(), std::invalid_argument);
  EXPECT_THROW(hyper_with(2, 1, 0.5).validate(), std::invalid_argument);
}

TEST(ClassSumTest, EmptyClausesVoteZeroInBothModes) {
  Model m(4, config_with(), hyper_with(10, 5, 3));
  const auto& bank = m.add_class(0, RandomSource(1));
  const InputView x(std::vector<std::uint32_t>{1}, 4);
  EXPECT_EQ(class_sum(bank, x, EvalMode::Inference), 0);
  EXPECT_EQ(class_sum(bank, x, EvalMode::Training), 0);
}

TEST(ClassSumTest, PositiveMinusNegative) {
  EXPECT_EQ(class_sum(bank_with(4, 3, 1), kOn, EvalMode::Inference), 2);
}

TEST(PredictTest, ArgmaxAndTieBreak) {
  Model m(1, config_with(), hyper_with(10, 5, 3));
  EXPECT_THROW(predict(m, kOn), std::logic_error);
  m.put_class(7, bank_with(5, 5, 0));  // +5
  m.put_class(3, bank_with(5, 0, 2));  // -2
  EXPECT_EQ(predict(m, kOn), 7u);

  Model tie(1, config_with(), hyper_with(10, 5, 3));
  tie.put_class(9, bank_with(5, 3, 0));
  tie.put_class(4, bank_with(5, 4, 1));
  EXPECT_EQ(predict(tie, kOn), 4u);
}

TEST(PredictTest, UnitStepVote) {
  EXPECT_TRUE(vote_step(0));
  EXPECT_TRUE(vote_step(3));
  EXPECT_FALSE(vote_step(-1));
}

TEST(UpdateProbabilityTest, ClampedToUnitInterval) {
  EXPECT_DOUBLE_EQ(target_update_probability(5, 5), 0.0);
  EXPECT_DOUBLE_EQ(target_update_probability(-5, 5), 1.0);
  EXPECT_DOUBLE_EQ(target_update_probability(0, 5), 0.5);
  EXPECT_DOUBLE_EQ(target_update_probability(40, 5), 0.0);
  EXPECT_DOUBLE_EQ(target_update_probability(-40, 5), 1.0);
  EXPECT_DOUBLE_EQ(non_target_update_probability(5, 5), 1.0);
  EXPECT_DOUBLE_EQ(non_target_update_probability(-9, 5), 0.0);
  for (std::int64_t v = -30; v <= 30; ++v) {
    const double p = target_update_probability(v, 7);
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
  }
}

TEST(TypeIFeedbackTest, BoostIncludesEveryTrueLiteral) {
  const std::size_t k = 6;
  const auto cfg = config_with();
  auto h = hyper_with(2, 2, 4);
  h.boost_true_positive = true;
  auto clause = init_clause(Polarity::Positive, k, 1.0, cfg, RandomSource(3).stream({}));
  const InputView all_on(std::vector<std::uint32_t>{0, 1, 2, 3, 4, 5}, k);
  type_i_feedback(clause, all_on, h, cfg, RandomSource(3).stream({}));
  for (LiteralId l = 0; l < k; ++l) EXPECT_EQ(clause.where(l), ClauseList::Included) << l;
  for (LiteralId l = k; l < 2 * k; ++l) EXPECT_EQ(clause.where(l), ClauseList::Excluded) << l;
  clause.check_invariants(cfg);
}

TEST(TypeIFeedbackTest, NonFiringClauseDecreasesAboutOneInS) {
  const auto cfg = config_with();
  const std::size_t k = 1000;
  // Literal 0 included but false, so the clause outputs 0; 999 other
  // excluded automata plus the included one are candidates.
  std::vector<LiteralState> excluded;
  for (LiteralId l = 1; l <= 1000; ++l) excluded.push_back({l, 127});
  auto clause = SparseClause::from_lists(Polarity::Positive, k, excluded, {{0, 130}}, {}, cfg);
  const InputView x(std::vector<std::uint32_t>{}, k);
  ASSERT_FALSE(clause.evaluate(x, EvalMode::Training));
  const auto draws = RandomSource(11).stream({0, 0, 0, 0, DrawPurpose::TypeI});
  const auto effects = type_i_feedback(clause, x, hyper_with(2, 2, 2.0), cfg, draws);

  std::size_t decreased = 0;
  for (const auto& t : clause.excluded()) decreased += t.state == 126 ? 1 : 0;
  EXPECT_GE(decreased, 430u);
  EXPECT_LE(decreased, 570u);
  // Exact count from the keyed draws.
  std::size_t expected = 0;
  for (LiteralId l = 1; l <= 1000; ++l) expected += draws.uniform(l) < 0.5 ? 1 : 0;
  EXPECT_EQ(decreased, expected);
  EXPECT_EQ(effects.size(), expected + (draws.uniform(0) < 0.5 ? 1 : 0));
}

TEST(TypeIFeedbackTest, BudgetSuppressesNewInclusions) {
  const auto cfg = config_with();
  auto h = hyper_with(2, 2, 4);
  h.boost_true_positive = true;
  h.max_included_literals = 1;
  // Permanent x_0 already fills the budget; x_1 is true and excluded.
  auto clause = SparseClause::from_lists(Polarity::Positive, 2, {{1, 127}, {3, 127}}, {}, {0}, cfg);
  const InputView x(std::vector<std::uint32_t>{0, 1}, 2);
  ASSERT_TRUE(clause.evaluate(x, EvalMode::Training));
  type_i_feedback(clause, x, h, cfg, RandomSource(5).stream({}));
  EXPECT_EQ(clause.where(1), ClauseList::Excluded);
  EXPECT_EQ(clause.excluded()[0].state, 127);

  h.max_included_literals = 2;
  type_i_feedback(clause, x, h, cfg, RandomSource(5).stream({}));
  EXPECT_EQ(clause.where(1), ClauseList::Included);
}

TEST(TypeIFeedbackTest, PermanentLiteralsGetNoFeedback) {
  const auto cfg = config_with(100);
  auto clause = SparseClause::from_lists(Polarity::Positive, 2, {}, {}, {2, 1}, cfg);
  const InputView x(std::vector<std::uint32_t>{1}, 2);
  const auto effects = type_i_feedback(clause, x, hyper_with(2, 2, 1.0), cfg, RandomSource(1).stream({}));
  EXPECT_TRUE(effects.empty());
}

TEST(TypeIIFeedbackTest, NoOpWhenClauseSilent) {
  const auto cfg = config_with();
  auto clause = SparseClause::from_lists(Polarity::Negative, 3, {{1, 127}, {4, 127}}, {{0, 128}}, {}, cfg);
  const auto before = clause;
  EXPECT_TRUE(type_ii_feedback(clause, InputView(std::vector<std::uint32_t>{}, 3), cfg).empty());
  EXPECT_EQ(clause, before);
}

TEST(TypeIIFeedbackTest, IncludesFalseExcludedLiterals) {
  const auto cfg = config_with();
  const std::size_t k = 3;
  // NOT x_2 (id 5) is false when x_2 = 1.
  auto clause = SparseClause::from_lists(Polarity::Negative, k, {{5, 120}, {2, 120}}, {}, {}, cfg);
  const InputView x(std::vector<std::uint32_t>{2}, k);
  const auto effects = type_ii_feedback(clause, x, cfg);
  ASSERT_EQ(effects.size(), 1u);
  EXPECT_EQ(effects[0], UpdateEffect::StateChanged);
  EXPECT_EQ(clause.excluded()[0], (LiteralState{5, 121}));
  EXPECT_EQ(clause.excluded()[1], (LiteralState{2, 120}));
}

TEST(TypeIIFeedbackTest, NothingToDoWhenAllLiteralsTrue) {
  const auto cfg = config_with();
  auto clause = SparseClause::from_lists(Polarity::Negative, 2, {{0, 100}, {3, 100}}, {}, {}, cfg);
  const InputView x(std::vector<std::uint32_t>{0}, 2);
  EXPECT_TRUE(type_ii_feedback(clause, x, cfg).empty());
}

TEST(TrainStepTest, SatisfiedMarginMeansNoFeedback) {
  Model m(1, config_with(), hyper_with(2, 1, 3));
  m.put_class(0, bank_with(1, 1, 0));  // training sum +1 = T
  const auto before = m;
  const auto metrics = train_step(m, kOn, 0, 0, 0, RandomSource(1));
  EXPECT_EQ(metrics, StepMetrics{});
  EXPECT_EQ(m, before);
}

TEST(TrainStepTest, FullCorrectionWhenSumAtMinusT) {
  Model m(1, config_with(), hyper_with(2, 1, 3));
  ClassBank b;
  b.positive.push_back(silent(Polarity::Positive));
  b.negative.push_back(SparseClause(Polarity::Negative, 1));  // empty, fires in training
  m.put_class(0, std::move(b));
  const auto metrics = train_step(m, kOn, 0, 0, 0, RandomSource(1));
  EXPECT_EQ(metrics.type_i_clauses, 1u);
  EXPECT_EQ(metrics.type_ii_clauses, 1u);
}

TEST(TrainStepTest, UnknownLabelIsRegistered) {
  Model m(4, config_with(), hyper_with(4, 2, 3));
  const InputView x(std::vector<std::uint32_t>{1}, 4);
  train_step(m, x, 5, 0, 0, RandomSource(1));
  ASSERT_TRUE(m.has_class(5));
  EXPECT_EQ(m.bank(5).positive.size(), 2u);
  EXPECT_EQ(m.bank(5).negative.size(), 2u);
  EXPECT_EQ(m.counters().initial_live_ta, 4u * 8u);
  EXPECT_THROW(train_step(m, InputView(std::vector<std::uint32_t>{}, 3), 5, 0, 1, RandomSource(1)),
               ContractViolation);
}

TEST(TrainStepTest, TouchesAtMostTwoBanks) {
  Model m(6, config_with(), hyper_with(6, 3, 3));
  const RandomSource rng(9);
  for (Label y : {0u, 1u, 2u, 3u}) m.add_class(y, rng);
  const auto data = synth_noisy_conjunction(200, 6, 0.1, 3);
  for (std::uint32_t i = 0; i < data.samples.size(); ++i) {
    const auto before = m;
    const auto& s = data.samples[i];
    train_step(m, InputView(s, 6), s.label, 0, i, rng);
    int changed = 0;
    for (const auto& [label, bank] : m.classes()) changed += bank == before.bank(label) ? 0 : 1;
    ASSERT_LE(changed, 2);
  }
}

TEST(TrainStepTest, EffectSinkSeesEveryCountedUpdate) {
  Model m(8, config_with(100), hyper_with(10, 4, 3));
  const RandomSource rng(4);
  const auto data = synth_noisy_conjunction(300, 8, 0.1, 8);
  std::uint64_t seen = 0, discarded = 0;
  StepMetrics total;
  for (std::uint32_t i = 0; i < data.samples.size(); ++i) {
    total += train_step(m, InputView(data.samples[i], 8), data.samples[i].label, 0, i, rng, [&](UpdateEffect e) {
      ++seen;
      discarded += e == UpdateEffect::Discarded ? 1 : 0;
    });
  }
  EXPECT_GT(seen, 0u);
  EXPECT_EQ(total.ta_updates, seen);
  EXPECT_EQ(total.discarded, discarded);
  EXPECT_EQ(m.counters().absorbed_exclude, discarded);
}

FitOptions options(std::uint32_t epochs, bool shuffle = false) {
  FitOptions o;
  o.epochs = epochs;
  o.shuffle = shuffle;
  return o;
}

Dataset noisy_set() { return synth_noisy_conjunction(2000, 12, 0.1, 42); }

TEST(FitTest, ZeroEpochsIsNoOp) {
  Model m(12, config_with(100), hyper_with(10, 5, 3.9));
  const Model before = m;
  EXPECT_TRUE(fit(m, noisy_set(), options(0), RandomSource(1)).empty());
  EXPECT_EQ(m, before);
}

TEST(FitTest, RejectsWidthMismatchBeforeMutating) {
  Model m(10, config_with(), hyper_with(10, 5, 3.9));
  EXPECT_THROW(fit(m, noisy_set(), options(1), RandomSource(1)), std::invalid_argument);
  EXPECT_TRUE(m.classes().empty());
  Dataset empty;
  empty.n_features = 10;
  EXPECT_THROW(fit(m, empty, options(1), RandomSource(1)), std::invalid_argument);
}

TEST(FitTest, NoBarrierKeepsEveryAutomatonAlive) {
  Model m(12, config_with(), hyper_with(10, 5, 3.9));
  const auto history = fit(m, noisy_set(), options(3), RandomSource(1));
  ASSERT_EQ(history.size(), 3u);
  for (const auto& e : history) {
    EXPECT_EQ(e.live_ta_count, m.counters().initial_live_ta);
    EXPECT_EQ(e.absorbed_exclude_total, 0u);
  }
}

TEST(FitTest, BarrierContractsAfterFirstEpoch) {
  const auto data = synth_noisy_conjunction(5000, 20, 0.1, 42);
  Model m(20, config_with(100), hyper_with(20, 10, 3.9));
  const auto history = fit(m, data, options(1), RandomSource(42));
  EXPECT_LT(history[0].live_ta_count, m.counters().initial_live_ta);
  EXPECT_EQ(m.counters().initial_live_ta, 2u * 20u * 40u);
}

TEST(FitTest, AbsorptionAccountingIdentity) {
  Model m(12, config_with(110), hyper_with(10, 5, 3.9));
  const auto history = fit(m, noisy_set(), options(5), RandomSource(3));
  std::uint64_t removed = 0;
  for (const auto& e : history) removed += e.activity.discarded + e.activity.permanently_included;
  EXPECT_EQ(removed, m.counters().initial_live_ta - live_ta_count(m));
  EXPECT_EQ(history.back().absorbed_exclude_total + history.back().absorbed_include_total, removed);
  for (std::size_t i = 1; i < history.size(); ++i) {
    EXPECT_LE(history[i].live_ta_count, history[i - 1].live_ta_count);
  }
}

TEST(FitTest, SameSeedSameModel) {
  for (bool shuffle : {false, true}) {
    Model a(12, config_with(100), hyper_with(10, 5, 3.9));
    Model b(12, config_with(100), hyper_with(10, 5, 3.9));
    const auto ha = fit(a, noisy_set(), options(3, shuffle), RandomSource(8));
    const auto hb = fit(b, noisy_set(), options(3, shuffle), RandomSource(8));
    EXPECT_EQ(a, b);
    for (std::size_t i = 0; i < ha.size(); ++i) {
      EXPECT_EQ(ha[i].activity, hb[i].activity);
      EXPECT_EQ(ha[i].live_ta_count, hb[i].live_ta_count);
    }
  }
}

TEST(FitTest, ShuffleIsAPermutation) {
  const auto order = epoch_order(1000, 3, true, RandomSource(1));
  std::vector<bool> seen(1000, false);
  for (auto i : order) seen[i] = true;
  EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }));
  EXPECT_NE(order, epoch_order(1000, 4, true, RandomSource(1)));
}

TEST(FitTest, LearnsNoisyConjunction) {
  const auto train = synth_noisy_conjunction(3000, 12, 0.1, 42);
  const auto test = synth_noisy_conjunction(1000, 12, 0.0, 43);
  Model m(12, config_with(), hyper_with(20, 10, 3.9));
  fit(m, train, options(15), RandomSource(1));
  EXPECT_GE(accuracy(m, test), 0.95);
}

}  // namespace
}  // namespace ctm
