#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <filesystem>
#include <fstream>

#include "transferlab/errors.hpp"
#include "transferlab/gallery.hpp"
#include "transferlab/system.hpp"

using namespace transferlab;

namespace {

PiecewiseAffineMap doubling() {
    PiecewiseAffineMap f;
    f.breakpoints = {0.0, 0.5, 1.0};
    f.pieces = {{2.0, 0.0}, {2.0, -1.0}};
    f.wrap = true;
    return f;
}

RandomSystem additive(PiecewiseAffineMap f0, NoiseSpec noise) {
    RandomSystem s;
    s.domain = DomainKind::Circle;
    s.kind = SystemKind::AdditiveNoise;
    s.base = std::move(f0);
    s.noise = std::move(noise);
    return validate_system(s);
}

RandomSystem bernoulli() {
    RandomSystem s;
    s.kind = SystemKind::FiniteIFS;
    s.branches = {affine_map(0.5, 0.0), affine_map(0.5, 0.5)};
    s.weights = {0.5, 0.5};
    return validate_system(s);
}

}  // namespace

TEST(EvalBranch, Examples) {
    EXPECT_DOUBLE_EQ(eval_branch(doubling(), 0.75), 0.5);
    EXPECT_DOUBLE_EQ(eval_branch(affine_map(0.5, 0.0), 0.0), 0.0);
    EXPECT_DOUBLE_EQ(eval_branch(doubling(), 0.5), 0.0);
}

TEST(EvalBranch, RightClosedPieces) {
    PiecewiseAffineMap f;
    f.breakpoints = {0.0, 0.5, 1.0};
    f.pieces = {{0.0, 0.25}, {0.0, 0.75}};
    EXPECT_DOUBLE_EQ(eval_branch(f, 0.5), 0.75);
    EXPECT_DOUBLE_EQ(eval_branch(f, 1.0), 0.75);
    EXPECT_DOUBLE_EQ(eval_branch(f, 0.4999), 0.25);
}

TEST(EvalBranch, EscapeOnInterval) {
    EXPECT_THROW(eval_branch(affine_map(2.0, 0.0), 0.75), DomainEscape);
}

TEST(ApplyRandom, Examples) {
    RandomSystem mult;
    mult.kind = SystemKind::MultiplicativeNoise;
    mult.base = affine_map(0.5, 0.0);
    mult.noise = uniform_noise();
    mult.epsilon = 0.5;
    mult = validate_system(mult);
    EXPECT_DOUBLE_EQ(apply_random(mult, 1.0, 0.8), 0.2);

    const auto add = additive(doubling(), uniform_noise());
    EXPECT_DOUBLE_EQ(apply_random(add, 0.25, 0.5), 0.25);

    EXPECT_DOUBLE_EQ(apply_random(bernoulli(), 0.7, 0.5), 0.75);
}

TEST(TransitionDensity, Examples) {
    const auto quarter = additive(doubling(), NoiseSpec{{0.0, 0.25, 1.0}, {4.0, 0.0}});
    EXPECT_DOUBLE_EQ(*transition_density(quarter, 0.0, 0.1), 4.0);
    EXPECT_FALSE(transition_density(bernoulli(), 0.3, 0.4).has_value());
    const auto flat = additive(doubling(), uniform_noise());
    EXPECT_DOUBLE_EQ(*transition_density(flat, 0.3, 0.9), 1.0);
}

TEST(TransitionDensity, MultiplicativeAtomAtZero) {
    RandomSystem mult;
    mult.kind = SystemKind::MultiplicativeNoise;
    mult.base = affine_map(0.5, 0.0);
    mult.noise = uniform_noise();
    mult.epsilon = 0.5;
    mult = validate_system(mult);
    EXPECT_FALSE(transition_density(mult, 0.0, 0.0).has_value());
    // y uniform on [0.2, 0.4] for x = 0.8: density 1/(eps f0) = 5
    EXPECT_NEAR(*transition_density(mult, 0.8, 0.3), 5.0, 1e-12);
    EXPECT_EQ(*transition_density(mult, 0.8, 0.5), 0.0);
}

TEST(TransitionDensity, AdditiveRowsIntegrateToOne) {
    const auto s = additive(doubling(), NoiseSpec{{0.0, 0.1, 0.6, 1.0}, {3.0, 0.5, 1.125}});
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int r = 0; r < 1000; ++r) {
        const double x = u(rng);
        // midpoint rule; the integrand has three jumps, so the error is O(1/M)
        const int M = 20000;
        double total = 0.0;
        for (int k = 0; k < M; ++k) total += *transition_density(s, x, (k + 0.5) / M);
        EXPECT_NEAR(total / M, 1.0, 1e-3);
    }
}

TEST(TransitionDensity, AdditiveRowsIntegrateToOneExactly) {
    // integrate piecewise: the density in y is piecewise constant with breaks at f0(x) + noise breakpoints
    const auto s = additive(doubling(), NoiseSpec{{0.0, 0.1, 0.6, 1.0}, {3.0, 0.5, 1.125}});
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int r = 0; r < 1000; ++r) {
        const double x = u(rng);
        const double c = eval_branch(s.base, x, s.domain);
        std::vector<double> cuts{0.0, 1.0};
        for (double b : s.noise.breakpoints) {
            double y = c + b;
            y -= std::floor(y);
            cuts.push_back(y);
        }
        std::sort(cuts.begin(), cuts.end());
        double total = 0.0;
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            const double a = cuts[k], b = cuts[k + 1];
            if (b <= a) continue;
            total += *transition_density(s, x, 0.5 * (a + b)) * (b - a);
        }
        EXPECT_NEAR(total, 1.0, 1e-8);
    }
}

TEST(ValidateSystem, ExpandingMargin) {
    PiecewiseAffineMap tripling;
    tripling.breakpoints = {0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0};
    tripling.pieces = {{3.0, 0.0}, {3.0, -1.0}, {3.0, -2.0}};
    tripling.wrap = true;
    RandomSystem s;
    s.domain = DomainKind::Circle;
    s.kind = SystemKind::FiniteIFS;
    s.branches = {doubling(), tripling};
    s.weights = {0.5, 0.5};
    s = validate_system(s);
    ASSERT_TRUE(s.expanding_margin.has_value());
    EXPECT_NEAR(*s.expanding_margin, 5.0 / 12.0, 1e-15);
    EXPECT_TRUE(s.expanding_on_average);
}

TEST(ValidateSystem, WeightSum) {
    RandomSystem s;
    s.kind = SystemKind::FiniteIFS;
    s.branches = {affine_map(0.5, 0.0), affine_map(0.5, 0.5)};
    s.weights = {0.6, 0.5};
    EXPECT_THROW(validate_system(s), WeightSumError);
}

TEST(ValidateSystem, DeterministicIsAtomic) {
    RandomSystem s;
    s.domain = DomainKind::Circle;
    s.kind = SystemKind::Deterministic;
    s.branches = {doubling()};
    s = validate_system(s);
    EXPECT_TRUE(s.declared_atomic());
}

TEST(ValidateSystem, Errors) {
    RandomSystem esc;
    esc.kind = SystemKind::Deterministic;
    esc.branches = {affine_map(2.0, 0.0)};
    EXPECT_THROW(validate_system(esc), DomainEscape);

    RandomSystem bad;
    bad.domain = DomainKind::Circle;
    bad.kind = SystemKind::AdditiveNoise;
    bad.base = doubling();
    bad.noise = NoiseSpec{{0.0, 0.5, 1.0}, {1.0, 0.5}};
    EXPECT_THROW(validate_system(bad), NoiseNormalizationError);

    RandomSystem wrong_fixed = bad;
    wrong_fixed.noise = uniform_noise();
    wrong_fixed.fixed_points = {0.0};
    EXPECT_THROW(validate_system(wrong_fixed), SpecError);
}

TEST(SystemJson, RoundTripPreservesEvaluation) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const auto& e : list_gallery()) {
        const RandomSystem back = system_from_json(system_to_json(e.system));
        EXPECT_EQ(back.kind, e.system.kind);
        for (int k = 0; k < 200; ++k) {
            const double t = u(rng), x = u(rng);
            EXPECT_EQ(apply_random(back, t, x), apply_random(e.system, t, x)) << e.id;
        }
    }
}

TEST(SystemJson, MissingFile) {
    try {
        load_system("/nonexistent/sys.json");
        FAIL();
    } catch (const SpecError& e) {
        EXPECT_NE(std::string(e.what()).find("system spec not found"), std::string::npos);
    }
}

TEST(SystemJson, SymbolicConstants) {
    nlohmann::json j = {{"kind", "deterministic"},
                        {"domain", "circle"},
                        {"map", {{"breakpoints", {0.0, 1.0}}, {"pieces", {{1.0, "sqrt2_over_2"}}}, {"wrap", true}}}};
    const auto s = system_from_json(j);
    EXPECT_EQ(s.branches[0].pieces[0].intercept, static_cast<double>(std::sqrt(2.0L) / 2.0L));
    j["map"]["pieces"][0][1] = "pi_over_7";
    EXPECT_THROW(system_from_json(j), SpecError);
}

TEST(SystemProperty, OutputsStayInDomain) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const auto& e : list_gallery())
        for (int k = 0; k < 10000; ++k) {
            const double y = apply_random(e.system, u(rng), u(rng));
            ASSERT_GE(y, 0.0) << e.id;
            ASSERT_LE(y, 1.0) << e.id;
        }
}

TEST(SystemProperty, DeclaredFixedPointsAreExact) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const auto& e : list_gallery())
        for (double x : e.system.fixed_points)
            for (int k = 0; k < 1000; ++k) ASSERT_EQ(apply_random(e.system, u(rng), x), x) << e.id;
}
