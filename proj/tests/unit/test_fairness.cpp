#include <gtest/gtest.h>

#include <random>

#include "fairsq/fairness.hpp"

#include "../support/fixtures.hpp"

using namespace fairsq;

namespace {

ProbabilityBounds pb(double lo, double hi)
{
    ProbabilityBounds b;
    b.lower = lo;
    b.upper = hi;
    return b;
}

} // namespace

TEST(Ratio, PointIntervals)
{
    // (0.2 / 0.4) / (0.3 / 0.6) = 1
    const auto r = ratio_bounds(pb(0.2, 0.2), pb(0.3, 0.3), pb(0.4, 0.4), pb(0.6, 0.6));
    EXPECT_DOUBLE_EQ(r.lower, 1.0);
    EXPECT_DOUBLE_EQ(r.upper, 1.0);
}

TEST(Ratio, IntervalArithmetic)
{
    const auto r = ratio_bounds(pb(0.1, 0.2), pb(0.3, 0.4), pb(0.4, 0.5), pb(0.5, 0.6));
    EXPECT_DOUBLE_EQ(r.lower, (0.1 / 0.5) * (0.5 / 0.4));
    EXPECT_DOUBLE_EQ(r.upper, (0.2 / 0.4) * (0.6 / 0.3));
}

TEST(Ratio, ZeroDenominators)
{
    // nothing known about Pr[s]: the ratio is unbounded above
    const auto open = ratio_bounds(pb(0, 0.5), pb(0.1, 0.2), pb(0, 0.5), pb(0.5, 0.6));
    EXPECT_EQ(open.lower, 0.0);
    EXPECT_TRUE(std::isinf(open.upper));
    // 0/0 counts as 0 in the lower bound
    const auto zero = ratio_bounds(pb(0, 0), pb(0.1, 0.2), pb(0, 0), pb(0.5, 0.6));
    EXPECT_EQ(zero.lower, 0.0);
    EXPECT_TRUE(std::isinf(zero.upper));
}

TEST(Ratio, RejectsInvalidIntervals)
{
    EXPECT_THROW(ratio_bounds(pb(0.3, 0.2), pb(0, 1), pb(0, 1), pb(0, 1)), InvalidBounds);
    EXPECT_THROW(ratio_bounds(pb(0, 1), pb(-0.1, 1), pb(0, 1), pb(0, 1)), InvalidBounds);
    EXPECT_THROW(ratio_bounds(pb(0, 1), pb(0, 1), pb(0, 1.5), pb(0, 1)), InvalidBounds);
    EXPECT_THROW(ratio_bounds(pb(0, 1), pb(0, 1), pb(0, 1), pb(NAN, 1)), InvalidBounds);
}

// Widening any input interval widens the ratio interval.
TEST(Ratio, MonotoneUnderWidening)
{
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> unif(0.01, 0.99);
    for (int i = 0; i < 10000; ++i) {
        std::array<ProbabilityBounds, 4> narrow, wide;
        for (int k = 0; k < 4; ++k) {
            double a = unif(rng), b = unif(rng);
            if (a > b)
                std::swap(a, b);
            narrow[k] = pb(a, b);
            wide[k] = pb(a * unif(rng), b + (1 - b) * unif(rng));
        }
        const auto rn = ratio_bounds(narrow[0], narrow[1], narrow[2], narrow[3]);
        const auto rw = ratio_bounds(wide[0], wide[1], wide[2], wide[3]);
        ASSERT_LE(rw.lower, rn.lower);
        ASSERT_GE(rw.upper, rn.upper);
    }
}

TEST(Decide, ThresholdIsStrictForFair)
{
    EXPECT_EQ(decide({0.95, 1.2}, 0.1), Outcome::Fair);
    EXPECT_EQ(decide({0.9, 1.2}, 0.1), Outcome::Unknown);
    EXPECT_EQ(decide({0.5, 0.9}, 0.1), Outcome::Unfair);
    EXPECT_EQ(decide({0.5, 0.95}, 0.1), Outcome::Unknown);
    EXPECT_EQ(decide({0.0, infinity}, 0.1), Outcome::Unknown);
    EXPECT_EQ(to_string(Outcome::Unfair), "unfair");
}

TEST(Allocate, RoundRobinWithinBudget)
{
    const RefinementBudget budget{2500, 1e-4};
    std::vector<RegionProgress> p(4);
    p[0] = {0, 0.5, false};
    p[1] = {2000, 0.5, false};
    p[2] = {100, 1e-5, false};
    p[3] = {100, 0.5, true};
    EXPECT_EQ(allocate_round(p, budget, 1000), (std::vector<std::size_t>{1000, 500, 0, 0}));
    p[0].splits_used = 2500;
    p[1].splits_used = 2500;
    EXPECT_EQ(allocate_round(p, budget, 1000), (std::vector<std::size_t>(4, 0)));
}

TEST(Verdicts, ConstantTrueIsFair)
{
    const auto v = check_fairness(test::load_fixture("const_true.fg"));
    EXPECT_EQ(v.outcome, Outcome::Fair);
    EXPECT_TRUE(v.ratio.contains(1.0));
}

TEST(Verdicts, ConstantFalseIsUnknown)
{
    // Pr[q | s] = 0 exactly, so the ratio is 0/0
    const auto v = check_fairness(test::load_fixture("const_false.fg"));
    EXPECT_EQ(v.outcome, Outcome::Unknown);
    EXPECT_EQ(v.at(Event::QualifiedSensitive).upper, 0.0);
    EXPECT_EQ(v.at(Event::QualifiedNotSensitive).upper, 0.0);
}

TEST(Verdicts, SymmetricProgramIsFair)
{
    const auto v = check_fairness(test::load_fixture("symmetric.fg"));
    EXPECT_EQ(v.outcome, Outcome::Fair);
    EXPECT_TRUE(v.ratio.contains(1.0));
}

TEST(Verdicts, CaseStudyIsUnfair)
{
    const auto v = check_fairness(test::load_fixture("casestudy.fg"));
    EXPECT_EQ(v.outcome, Outcome::Unfair);
    EXPECT_TRUE(v.ratio.contains(0.484116780720222359));
    EXPECT_LE(v.ratio.upper, 0.9);
    for (Event e : all_events)
        EXPECT_LE(v.at(e).lower, v.at(e).upper);
}

TEST(Verdicts, BernoulliIsUnfair)
{
    const auto v = check_fairness(test::load_fixture("bernoulli.fg"));
    EXPECT_EQ(v.outcome, Outcome::Unfair);
    EXPECT_EQ(v.measure.components.size(), 2u);
}

TEST(Verdicts, EpsilonOverride)
{
    // at epsilon 0.6 the case study ratio (about 0.484) clears 1 - eps
    FairnessOptions opts;
    opts.epsilon = 0.6;
    const auto v = check_fairness(test::load_fixture("casestudy.fg"), opts);
    EXPECT_EQ(v.epsilon, 0.6);
    EXPECT_EQ(v.outcome, Outcome::Fair);
    opts.epsilon = 1.5;
    EXPECT_THROW(check_fairness(test::load_fixture("casestudy.fg"), opts), std::invalid_argument);
}

// A larger budget never turns a decided verdict into Unknown or flips it.
TEST(Verdicts, BudgetMonotone)
{
    for (const auto& name : test::valid_fixtures()) {
        const auto task = test::load_fixture(name);
        Outcome previous = Outcome::Unknown;
        for (std::size_t splits : {10u, 1000u, 20000u}) {
            FairnessOptions opts;
            opts.budget.max_splits = splits;
            const auto v = check_fairness(task, opts);
            if (previous != Outcome::Unknown) {
                EXPECT_EQ(v.outcome, previous) << name << " at " << splits;
            }
            previous = v.outcome;
        }
    }
}
