#include <gtest/gtest.h>

#include <map>
#include <random>

#include "fairsq/symexec.hpp"

#include "../support/differential.hpp"
#include "../support/fixtures.hpp"
#include "../support/random_task.hpp"

using namespace fairsq;

TEST(Paths, CaseStudyEnumeration)
{
    const auto paths = enumerate_paths(test::load_fixture("casestudy.fg"));
    EXPECT_EQ(paths.model_paths.size(), 2u);
    ASSERT_EQ(paths.paths.size(), 6u);
    EXPECT_EQ(paths.dimension_labels, (std::vector<std::string>{"ethnicity", "colRank", "yExp"}));
    EXPECT_EQ(paths.means, (std::vector<double>{0, 25, 10}));
    EXPECT_EQ(paths.stddevs, (std::vector<double>{10, 10, 5}));
    std::size_t hires = 0;
    for (const auto& p : paths.paths)
        hires += p.return_value;
    EXPECT_EQ(hires, 4u);

    // the protected branch shifts colRank by 5, so `colRank <= 5` becomes `colRank <= 0`
    EXPECT_EQ(format_path(paths.paths[0], paths), "[component w=1] (ethnicity - 10 > 0) \xE2\x88\xA7 (colRank <= 0) \xE2\x87\x92 return true");
    EXPECT_EQ(format_path(paths.paths[5], paths),
        "[component w=1] (ethnicity - 10 <= 0) \xE2\x88\xA7 (colRank - 5 > 0) \xE2\x88\xA7 (-colRank + yExp + 5 <= 0) "
        "\xE2\x87\x92 return false");
}

TEST(Paths, BernoulliForksAreComponents)
{
    const auto paths = enumerate_paths(test::load_fixture("bernoulli.fg"));
    EXPECT_EQ(paths.model_paths.size(), 2u);
    EXPECT_EQ(paths.paths.size(), 4u);
    for (const auto& p : paths.paths) {
        ASSERT_EQ(p.bernoulli_choices.size(), 1u);
        EXPECT_DOUBLE_EQ(p.weight, 0.5);
    }
    const auto comps = bernoulli_components(paths.bernoulli_probabilities);
    ASSERT_EQ(comps.size(), 2u);
    EXPECT_EQ(comps[0].first, std::vector<bool>{false});
    EXPECT_EQ(comps[1].first, std::vector<bool>{true});
}

TEST(Paths, ZeroProbabilityForksAreSkipped)
{
    const auto task = test::load_text("define popModel()\n  x ~ gauss(0,1)\n  b ~ bernoulli(0)\n  if (b == 1)\n    x <- x + 1\n"
                                      "  return x\n\ndefine dec(x)\n  return x > 0\n\n"
                                      "spec {\n  sensitive: b == 1;\n  qualified: dec;\n  epsilon: 0.1;\n}\n");
    const auto paths = enumerate_paths(task);
    EXPECT_EQ(paths.model_paths.size(), 1u);
    EXPECT_EQ(bernoulli_components(paths.bernoulli_probabilities).size(), 1u);
    const auto s = build_event_region(paths, Event::Sensitive);
    ASSERT_EQ(s.components.size(), 1u);
    EXPECT_TRUE(s.components[0].region.empty());
}

TEST(Paths, ExplosionIsReported)
{
    std::string body;
    for (int i = 0; i < 12; ++i)
        body += "  if (x > " + std::to_string(i) + ")\n    y <- y + 1\n";
    const auto task = test::load_text("define popModel()\n  x ~ gauss(0,1)\n  return x\n\ndefine dec(x)\n  y <- x\n" + body
        + "  return y > 3\n\nspec {\n  sensitive: x > 0;\n  qualified: dec;\n  epsilon: 0.1;\n}\n");
    SymexecOptions small;
    small.max_paths = 100;
    EXPECT_THROW(enumerate_paths(task, small), PathExplosion);
}

TEST(Paths, DnfCapIsReported)
{
    std::string cond;
    for (int i = 0; i < 8; ++i)
        cond += std::string(i ? " and " : "") + "(x > " + std::to_string(i) + " or y > " + std::to_string(i) + ")";
    const auto task = test::load_text("define popModel()\n  x ~ gauss(0,1)\n  y ~ gauss(0,1)\n  return x, y\n\n"
                                      "define dec(x, y)\n  return true\n\nspec {\n  sensitive: "
        + cond + ";\n  qualified: dec;\n  epsilon: 0.1;\n}\n");
    SymexecOptions small;
    small.max_dnf = 16;
    EXPECT_THROW(enumerate_paths(task, small), DnfExplosion);
}

TEST(Paths, CoefficientOverflowIsReported)
{
    const auto task = test::load_text("define popModel()\n  x ~ gauss(0,1)\n  return x\n\n"
                                      "define dec(x)\n  y <- 1e300 * x\n  z <- 1e300 * y\n  return z > 0\n\n"
                                      "spec {\n  sensitive: x > 0;\n  qualified: dec;\n  epsilon: 0.1;\n}\n");
    EXPECT_THROW(enumerate_paths(task), CoefficientOverflow);
}

// Program paths partition each Bernoulli component: every sampled point
// satisfies exactly one of them (checked inside differential()), and the
// result matches the concrete interpreter.
TEST(Paths, DifferentialOnFixtures)
{
    for (const auto& name : test::valid_fixtures()) {
        const auto task = test::load_fixture(name);
        const auto r = test::differential(task, enumerate_paths(task), 2000, 17);
        EXPECT_EQ(r.disagreements, 0u) << name;
        EXPECT_GT(r.compared, 1900u) << name;
    }
}

TEST(Paths, DifferentialOnRandomTasks)
{
    test::TaskGenerator gen(99);
    for (int i = 0; i < 300; ++i) {
        const std::string src = gen.next();
        const auto task = test::load_text(src);
        const auto r = test::differential(task, enumerate_paths(task), 300, 1000 + i);
        ASSERT_EQ(r.disagreements, 0u) << src;
    }
}

// Sensitive and not-sensitive DNFs of a model path are complementary: each
// sampled point satisfies exactly one conjunction across the two lists.
TEST(Paths, SensitiveSplitIsAPartition)
{
    test::TaskGenerator gen(5);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal;
    for (int i = 0; i < 100; ++i) {
        const auto paths = enumerate_paths(test::load_text(gen.next()));
        for (const auto& mp : paths.model_paths) {
            for (int k = 0; k < 50; ++k) {
                std::vector<double> pt(paths.gaussian_dimension());
                for (std::size_t d = 0; d < pt.size(); ++d)
                    pt[d] = paths.means[d] + paths.stddevs[d] * normal(rng);
                std::size_t hits = 0;
                for (const auto* list : {&mp.sensitive_dnf, &mp.not_sensitive_dnf})
                    for (const auto& c : *list)
                        hits += std::all_of(c.begin(), c.end(), [&](const Atom& a) { return a.holds_at(pt); });
                ASSERT_EQ(hits, 1u);
            }
        }
    }
}

TEST(Events, RegionsPerComponent)
{
    const auto paths = enumerate_paths(test::load_fixture("bernoulli.fg"));
    for (Event e : all_events) {
        const auto region = build_event_region(paths, e);
        EXPECT_EQ(region.components.size(), 2u);
        EXPECT_EQ(region.dimension, 1u);
    }
    // gender == 1 is decided by the component alone
    const auto s = build_event_region(paths, Event::Sensitive);
    EXPECT_TRUE(s.components[0].region.empty());
    ASSERT_EQ(s.components[1].region.conjunctions.size(), 1u);
    EXPECT_TRUE(s.components[1].region.conjunctions[0].empty());
}

TEST(Formula, DisjointDnf)
{
    const Formula a = Formula::of_atom({LinearForm::dimension(0), Relation::Gt});
    const Formula b = Formula::of_atom({LinearForm::dimension(1), Relation::Gt});
    const auto dnf = disjoint_dnf(Formula::disjunction({a, b}));
    ASSERT_EQ(dnf.size(), 2u);
    EXPECT_EQ(dnf[0].size(), 1u);
    EXPECT_EQ(dnf[1].size(), 2u); // not a and b
    EXPECT_TRUE(disjoint_dnf(Formula::conjunction({a, negate(a)})).empty());
    EXPECT_EQ(disjoint_dnf(Formula::constant(true)).size(), 1u);
}
