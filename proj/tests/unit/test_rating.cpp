#include "citeeval/errors.hpp"
#include "citeeval/rating.hpp"
#include "helpers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace citeeval;
using citeeval::testing::categories;
using citeeval::testing::make_instance;
using citeeval::testing::quick_gateway;
using citeeval::testing::ScriptedJudge;

namespace {

constexpr std::size_t idx(ActionKind k) { return static_cast<std::size_t>(k); }

EditAction del(int c, ActionReason r) { return make_action(ActionOp::Delete, c, r); }
EditAction add(int c, ActionReason r) { return make_action(ActionOp::Add, c, r); }

std::string edit_block(int id, const std::string& body, int rating) {
    return "<editing sentence_id=\"" + std::to_string(id) + "\">" + body + "</editing>\n<rating sentence_id=\"" +
           std::to_string(id) + "\"> " + std::to_string(rating) + " </rating>\n";
}

EditDistModel keep_model() {
    EditDistModel m;
    m.distance[idx(ActionKind::Keep)] = 4.0;
    m.bias = 1.0;
    return m;
}

}  // namespace

TEST(ActionFeatures, WorkedExample) {
    const std::vector<EditAction> actions{del(6, ActionReason::Misleading), add(7, ActionReason::Credibility)};
    const int kept = kept_citation_count({1, 6}, actions);
    EXPECT_EQ(kept, 1);
    const auto f = action_features(actions, kept);
    EXPECT_NEAR(f[ActionKind::DeleteMisleading], 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(f[ActionKind::AddCredibility], 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(f[ActionKind::Keep], 1.0 / 3.0, 1e-12);
    EXPECT_EQ(f[ActionKind::DeleteSubstandard], 0.0);
    EXPECT_FALSE(f.parametric_flag);
}

TEST(ActionFeatures, KeepOnlyAndEmpty) {
    const auto keep = action_features({}, 2);
    EXPECT_DOUBLE_EQ(keep[ActionKind::Keep], 1.0);
    const auto zero = action_features({}, 0);
    for (double v : zero.freq) EXPECT_EQ(v, 0.0);
    EXPECT_THROW(action_features({}, -1), DomainError);
}

TEST(ActionFeatures, ParametricAddGoesToEvidence) {
    const auto f = action_features(std::vector<EditAction>{add(0, ActionReason::Evidence)}, 0);
    EXPECT_TRUE(f.parametric_flag);
    EXPECT_DOUBLE_EQ(f[ActionKind::AddEvidence], 1.0);
}

TEST(ActionFeatures, DeleteOfUncitedIdDoesNotReduceKeep) {
    EXPECT_EQ(kept_citation_count({1, 2}, std::vector<EditAction>{del(5, ActionReason::Redundant)}), 2);
    EXPECT_EQ(kept_citation_count({1, 2}, std::vector<EditAction>{del(2, ActionReason::Redundant),
                                                                   del(2, ActionReason::Misleading)}),
              1);
}

TEST(ActionFeatures, RandomActionsFormADistributionMatchingCounts) {
    std::mt19937 rng(3);
    const std::array<ActionReason, 3> dels{ActionReason::Misleading, ActionReason::Substandard, ActionReason::Redundant};
    const std::array<ActionReason, 3> adds{ActionReason::Evidence, ActionReason::Refinement, ActionReason::Credibility};
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<EditAction> actions;
        std::array<int, kActionKinds> counts{};
        const int n = static_cast<int>(rng() % 6);
        for (int i = 0; i < n; ++i) {
            const bool is_add = rng() % 2;
            const auto r = rng() % 3;
            actions.push_back(is_add ? add(1 + int(rng() % 10), adds[r]) : del(1 + int(rng() % 10), dels[r]));
            ++counts[is_add ? 3 + r : r];
        }
        const int kept = static_cast<int>(rng() % 4);
        counts[idx(ActionKind::Keep)] = kept;
        const auto f = action_features(actions, kept);
        const int total = n + kept;
        double sum = 0.0;
        for (std::size_t k = 0; k < kActionKinds; ++k) {
            EXPECT_GE(f.freq[k], 0.0);
            EXPECT_NEAR(f.freq[k], total ? double(counts[k]) / total : 0.0, 1e-12);
            sum += f.freq[k];
        }
        EXPECT_NEAR(sum, total ? 1.0 : 0.0, 1e-12);
    }
}

TEST(RateEditDist, Examples) {
    EditDistModel bias_only;
    bias_only.bias = 3.0;
    EXPECT_DOUBLE_EQ(rate_editdist(action_features({}, 0), bias_only), 0.5);
    EXPECT_DOUBLE_EQ(rate_editdist(action_features({}, 3), keep_model()), 1.0);
    EditDistModel high;
    high.bias = 7.2;
    EXPECT_DOUBLE_EQ(rate_editdist(action_features({}, 1), high), 1.0);
    EditDistModel low;
    low.bias = -4.0;
    EXPECT_DOUBLE_EQ(rate_editdist(action_features({}, 1), low), 0.0);
}

TEST(RateEditDist, AlwaysInUnitIntervalForRandomModels) {
    std::mt19937 rng(5);
    std::normal_distribution<double> coef(0.0, 10.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        EditDistModel m;
        for (auto& d : m.distance) d = coef(rng);
        m.bias = coef(rng);
        ActionFeatureVector f;
        double s = 0.0;
        for (auto& v : f.freq) s += (v = u(rng));
        for (auto& v : f.freq) v /= s;
        const double r = rate_editdist(f, m);
        EXPECT_GE(r, 0.0);
        EXPECT_LE(r, 1.0);
        const double raw = std::clamp(m.raw(f), 1.0, 5.0);
        EXPECT_NEAR(r, (raw - 1.0) / 4.0, 1e-12);
    }
}

TEST(RateEnsemble, Examples) {
    EXPECT_DOUBLE_EQ(*rate_ensemble(1.0, 0.5, EnsembleModel::make(0.5)), 0.75);
    for (double lambda : {0.0, 0.3, 1.0}) EXPECT_DOUBLE_EQ(*rate_ensemble(0.4, 0.4, EnsembleModel::make(lambda)), 0.4);
    EXPECT_FALSE(rate_ensemble(std::nullopt, std::nullopt, EnsembleModel::make(0.5)).has_value());
    EXPECT_THROW(rate_ensemble(std::nullopt, 0.5, EnsembleModel::make(0.5)), AlignmentError);
    EXPECT_THROW(EnsembleModel::make(1.5), DomainError);
}

TEST(RateEnsemble, EndpointsReproduceComponentsExactly) {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const double a = u(rng), b = u(rng);
        EXPECT_EQ(*rate_ensemble(a, b, EnsembleModel::make(1.0)), a);
        EXPECT_EQ(*rate_ensemble(a, b, EnsembleModel::make(0.0)), b);
    }
}

TEST(ParseEditing, ActionsAndRatings) {
    const std::string text = edit_block(1,
                                        "<DELETE citation=\"6\"> DELETE REASON 1 </DELETE>"
                                        "<ADD citation=\"7\"> ADD REASON 3 </ADD>",
                                        2) +
                             edit_block(2, " N/A ", 5);
    const auto j = parse_editing_output(text, 3);
    ASSERT_EQ(j.size(), 3u);
    EXPECT_TRUE(j[0].has_editing);
    EXPECT_EQ(j[0].actions,
              (std::vector<EditAction>{del(6, ActionReason::Misleading), add(7, ActionReason::Credibility)}));
    EXPECT_EQ(j[0].likert, 2);
    EXPECT_TRUE(j[1].actions.empty());
    EXPECT_EQ(j[1].likert, 5);
    EXPECT_FALSE(j[2].likert.has_value());
    EXPECT_THROW(parse_editing_output(edit_block(1, "N/A", 6), 1), ParseError);
    EXPECT_THROW(parse_editing_output(edit_block(1, "N/A", 0), 1), ParseError);
}

TEST(RateIterCoE, WorkedExample) {
    auto inst = make_instance("Time dilation occurs because light speed is constant [1][6].");
    ScriptedJudge judge{categories({2}),
                        {edit_block(1,
                                    "<DELETE citation=\"6\"> DELETE REASON 1 </DELETE>"
                                    "<ADD citation=\"7\"> ADD REASON 3 </ADD>",
                                    2)}};
    Gateway gw(quick_gateway(), judge.provider());
    const std::vector<ContextLabel> labels{ContextLabel::Retrieval};
    const auto r = rate_itercoe(inst, labels, gw, JudgeConfig{});
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0].actions,
              (std::vector<EditAction>{del(6, ActionReason::Misleading), add(7, ActionReason::Credibility)}));
    EXPECT_EQ(r[0].likert, 2);
    EXPECT_DOUBLE_EQ(*r[0].normalized, 0.25);
    EXPECT_EQ(judge.editing_calls, 1);
}

TEST(RateIterCoE, NotApplicableEditingAndMaskedQuery) {
    auto inst = make_instance("You asked about inertia [2]. Inertia keeps things moving [1].");
    ScriptedJudge judge{"", {edit_block(1, "N/A", 3) + edit_block(2, " N/A ", 5)}};
    Gateway gw(quick_gateway(), judge.provider());
    const std::vector<ContextLabel> labels{ContextLabel::Query, ContextLabel::Retrieval};
    const auto r = rate_itercoe(inst, labels, gw, JudgeConfig{});
    EXPECT_FALSE(r[0].normalized.has_value());
    EXPECT_FALSE(r[0].likert.has_value());
    EXPECT_FALSE(r[0].applicable_full);
    EXPECT_TRUE(r[1].actions.empty());
    EXPECT_EQ(r[1].likert, 5);
    EXPECT_DOUBLE_EQ(*r[1].normalized, 1.0);
}

TEST(RateIterCoE, MissingRatingRetriedOnceThenFails) {
    auto inst = make_instance("Claim one [1]. Claim two [2].");
    const std::vector<ContextLabel> labels{ContextLabel::Retrieval, ContextLabel::Retrieval};
    ScriptedJudge judge{"", {edit_block(1, "N/A", 4), edit_block(1, "N/A", 4) + edit_block(2, "N/A", 3)}};
    Gateway gw(quick_gateway(), judge.provider());
    const auto r = rate_itercoe(inst, labels, gw, JudgeConfig{});
    EXPECT_EQ(r[1].likert, 3);
    EXPECT_EQ(judge.editing_calls, 2);

    ScriptedJudge broken{"", {edit_block(1, "N/A", 4)}};
    Gateway gw2(quick_gateway(), broken.provider());
    EXPECT_THROW(rate_itercoe(inst, labels, gw2, JudgeConfig{}), RatingIncompleteError);
    EXPECT_EQ(broken.editing_calls, 2);
}

TEST(RateIterCoE, NoCallWhenNothingIsApplicable) {
    auto inst = make_instance("You asked about inertia.");
    ScriptedJudge judge{"", {"unused"}};
    Gateway gw(quick_gateway(), judge.provider());
    const auto r = rate_itercoe(inst, std::vector<ContextLabel>{ContextLabel::Query}, gw, JudgeConfig{});
    EXPECT_FALSE(r[0].normalized.has_value());
    EXPECT_EQ(judge.editing_calls, 0);
    EXPECT_THROW(rate_itercoe(inst, std::vector<ContextLabel>{}, gw, JudgeConfig{}), AlignmentError);
}

TEST(EvaluateInstance, AllQueryGivesNoScores) {
    auto inst = make_instance("You asked about inertia [1]. You want to know about Newton [2].");
    ScriptedJudge judge{categories({1, 1}), {edit_block(1, "N/A", 5) + edit_block(2, "N/A", 5)}};
    Gateway gw(quick_gateway(), judge.provider());
    Evaluator ev{gw, JudgeConfig{}, {keep_model(), EnsembleModel::make(0.5)}};
    const auto out = evaluate_instance(inst, ev);
    for (auto m : {RatingMethod::IterCoE, RatingMethod::EditDist, RatingMethod::Ensemble}) {
        EXPECT_FALSE(out.scores(m).full.has_value());
        EXPECT_FALSE(out.scores(m).cited.has_value());
    }
}

TEST(EvaluateInstance, SingleStatementRatedFour) {
    auto inst = make_instance("Inertia keeps objects moving [1].");
    ScriptedJudge judge{categories({2}), {edit_block(1, "N/A", 4)}};
    Gateway gw(quick_gateway(), judge.provider());
    Evaluator ev{gw, JudgeConfig{}, {keep_model(), EnsembleModel::make(0.5)}};
    const auto out = evaluate_instance(inst, ev);
    EXPECT_DOUBLE_EQ(*out.itercoe.full, 0.75);
    EXPECT_DOUBLE_EQ(*out.itercoe.cited, 0.75);
    EXPECT_DOUBLE_EQ(*out.editdist.full, 1.0);
    EXPECT_DOUBLE_EQ(*out.ensemble.full, 0.875);
    EXPECT_EQ(judge.attribution_calls, 1);
    EXPECT_EQ(judge.editing_calls, 1);
}

TEST(EvaluateInstance, UncitedStatementRatedOnlyInFull) {
    auto inst = make_instance("Inertia keeps objects moving [1]. Friction slows them down.");
    ScriptedJudge judge{categories({2, 2}),
                        {edit_block(1, "N/A", 5) + edit_block(2, "<ADD citation=\"3\"> ADD REASON 1 </ADD>", 1)}};
    Gateway gw(quick_gateway(), judge.provider());
    Evaluator ev{gw, JudgeConfig{}, {keep_model(), EnsembleModel::make(0.5)}};
    const auto out = evaluate_instance(inst, ev);
    EXPECT_DOUBLE_EQ(*out.itercoe.full, 0.5);
    EXPECT_DOUBLE_EQ(*out.itercoe.cited, 1.0);
    const auto full = out.statement_scores(RatingMethod::IterCoE, Scenario::Full);
    const auto cited = out.statement_scores(RatingMethod::IterCoE, Scenario::Cited);
    EXPECT_TRUE(full[1].has_value());
    EXPECT_FALSE(cited[1].has_value());
}

TEST(EvaluateInstance, MasksAgreeAcrossMethods) {
    auto inst = make_instance("Q restated [1]. Claim [2][3]. Uncited claim. Parametric claim [4].");
    ScriptedJudge judge{categories({1, 2, 2, 4}),
                        {edit_block(1, "N/A", 3) +
                         edit_block(2, "<DELETE citation=\"3\"> DELETE REASON 3 </DELETE>", 4) +
                         edit_block(3, "<ADD citation=\"0\"> ADD REASON 1 </ADD>", 2) + edit_block(4, "N/A", 5)}};
    Gateway gw(quick_gateway(), judge.provider());
    EditDistModel m;
    m.distance = {-1.0, -2.0, -0.5, -3.0, -1.5, -1.0, 3.0};
    m.bias = 2.0;
    Evaluator ev{gw, JudgeConfig{}, {m, EnsembleModel::make(0.3)}};
    const auto out = evaluate_instance(inst, ev);
    for (auto s : {Scenario::Full, Scenario::Cited}) {
        const auto a = out.statement_scores(RatingMethod::IterCoE, s);
        const auto b = out.statement_scores(RatingMethod::EditDist, s);
        const auto c = out.statement_scores(RatingMethod::Ensemble, s);
        for (std::size_t i = 0; i < a.size(); ++i) {
            EXPECT_EQ(a[i].has_value(), b[i].has_value());
            EXPECT_EQ(a[i].has_value(), c[i].has_value());
        }
    }
    EXPECT_TRUE(out.statements[2].features.parametric_flag);
}

TEST(EvaluateInstance, DeterministicAcrossRuns) {
    auto inst = make_instance("Claim [1][2]. Second claim [3].");
    const std::string reply =
        edit_block(1, "<DELETE citation=\"2\"> DELETE REASON 2 </DELETE>", 3) + edit_block(2, "N/A", 5);
    auto run = [&] {
        ScriptedJudge judge{categories({2, 2}), {reply}};
        Gateway gw(quick_gateway(), judge.provider());
        Evaluator ev{gw, JudgeConfig{}, {keep_model(), EnsembleModel::make(0.5)}};
        return evaluate_instance(inst, ev);
    };
    const auto a = run();
    const auto b = run();
    EXPECT_EQ(a.itercoe.full, b.itercoe.full);
    EXPECT_EQ(a.editdist.full, b.editdist.full);
    EXPECT_EQ(a.ensemble.cited, b.ensemble.cited);
}

TEST(EvaluateInstance, StageErrorsCarryInstanceId) {
    auto inst = make_instance("Claim [1].", 8, "bad-one");
    ScriptedJudge judge{categories({2}), {edit_block(1, "N/A", 9)}};
    Gateway gw(quick_gateway(), judge.provider());
    Evaluator ev{gw, JudgeConfig{}, {}};
    try {
        evaluate_instance(inst, ev);
        FAIL();
    } catch (const InstanceError& e) {
        EXPECT_EQ(e.instance_id(), "bad-one");
        EXPECT_EQ(e.kind(), "parse");
    }
}

TEST(EvaluateInstance, RefinementWithoutDeleteIsWarned) {
    auto inst = make_instance("Claim [1].");
    ScriptedJudge judge{categories({2}), {edit_block(1, "<ADD citation=\"2\"> ADD REASON 2 </ADD>", 3)}};
    Gateway gw(quick_gateway(), judge.provider());
    Evaluator ev{gw, JudgeConfig{}, {}};
    const auto out = evaluate_instance(inst, ev);
    ASSERT_EQ(out.warnings.size(), 1u);
    EXPECT_NE(out.warnings[0].find("refinement"), std::string::npos);
}
