#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "tsirelson/pef.hpp"

using namespace tsirelson;

namespace {

const SettingsDistribution kUniform = SettingsDistribution::uniform();

TrialDistribution tilted_trial(double alpha) { return {tilted_maximizer(alpha), kUniform}; }

Behavior random_mixture(const PolytopeModel& m, std::mt19937_64& rng)
{
    std::gamma_distribution<double> gamma(0.3, 1.0);
    std::vector<double> w(m.size());
    double total = 0.0;
    for (double& x : w)
        total += (x = gamma(rng));
    Vec16 v{};
    for (std::size_t j = 0; j < m.size(); ++j)
        for (std::size_t i = 0; i < kCells; ++i)
            v[i] += w[j] / total * m.points[j].behavior[i];
    return Behavior(v, 1e-12);
}

} // namespace

TEST(ConstraintValue, ConstantOneOnDeterministic)
{
    const Pef one = Pef::constant(1.0, 0.05);
    for (const Behavior& l : all_locals())
        EXPECT_NEAR(constraint_value(one, l, kUniform), 1.0, 1e-15);
}

TEST(ConstraintValue, ConstantOneOnPrBox)
{
    for (double beta : {0.01, 0.05, 0.1}) {
        const Pef one = Pef::constant(1.0, beta);
        EXPECT_NEAR(constraint_value(one, pr_box(2), kUniform), std::pow(2.0, -beta), 1e-15);
    }
}

TEST(ConstraintValue, ZeroPef)
{
    EXPECT_EQ(constraint_value(Pef::constant(0.0, 0.1), tilted_maximizer(2.0), kUniform), 0.0);
}

TEST(Validity, ConstantOneValidEverywhere)
{
    for (const PolytopeModel& m : {double_bound_extremes(2.0), eight_chsh_polytope()})
        EXPECT_TRUE(is_valid_pef(Pef::constant(1.0, 0.03), m, kUniform));
}

TEST(Validity, SlightlyAboveOneInvalid)
{
    EXPECT_FALSE(is_valid_pef(Pef::constant(1.01, 0.03), double_bound_extremes(2.0), kUniform));
}

TEST(Validity, EmptyModelRejected)
{
    EXPECT_THROW(is_valid_pef(Pef::constant(1.0, 0.1), PolytopeModel{}, kUniform), InvalidArgument);
}

TEST(PefType, RejectsBadInputs)
{
    EXPECT_THROW(Pef::constant(1.0, 0.0), InvalidArgument);
    EXPECT_THROW(Pef::constant(-1.0, 0.1), InvalidArgument);
}

TEST(ExpectedLog, Constants)
{
    const TrialDistribution t = tilted_trial(2.0);
    EXPECT_NEAR(expected_log(Pef::constant(1.0, 0.1), t), 0.0, 1e-15);
    EXPECT_NEAR(expected_log(Pef::constant(2.5, 0.1), t), std::log(2.5), 1e-14);
}

TEST(ExpectedLog, ZeroOnSupportRejected)
{
    Vec16 f{};
    f.fill(1.0);
    f[0] = 0.0;
    EXPECT_THROW(expected_log(Pef(f, 0.1), tilted_trial(2.0)), InvalidArgument);
}

TEST(Bits, Formula)
{
    const CertificationConfig cfg{1e-6, 10000};
    EXPECT_NEAR(bits_from_expected_log(cfg, 0.5, 0.0), std::log2(1e-6) / 0.5, 1e-12);
    EXPECT_EQ(bits_from_expected_log({1.0 - 1e-300, 10}, 0.1, 0.0), 0.0);
    EXPECT_NEAR(bits_from_expected_log(cfg, 0.02, 0.01),
                (std::log2(1e-6) + 10000 * 0.01 / std::log(2.0)) / 0.02, 1e-9);
}

TEST(Bits, StrictlyIncreasingInExpectedLog)
{
    const CertificationConfig cfg{1e-6, 10000};
    double prev = -1e300;
    for (double el = -0.01; el <= 0.01; el += 0.001) {
        const double b = bits_from_expected_log(cfg, 0.03, el);
        EXPECT_GT(b, prev);
        prev = b;
    }
}

TEST(Config, Validation)
{
    EXPECT_THROW((CertificationConfig{0.0, 10}.validate()), InvalidArgument);
    EXPECT_THROW((CertificationConfig{1.0, 10}.validate()), InvalidArgument);
    EXPECT_THROW((CertificationConfig{0.5, 0}.validate()), InvalidArgument);
}

TEST(Optimize, OutputValidAndPositive)
{
    const PolytopeModel m = single_bound_extremes(chsh_tsirelson_constraint());
    const PefSolution s = optimize_pef(m, tilted_trial(2.0), 0.05);
    EXPECT_TRUE(is_valid_pef(s.pef, m, kUniform));
    for (double f : s.pef.values())
        EXPECT_GT(f, 0.0);
    EXPECT_GE(s.expected_log, 0.0);
}

TEST(Optimize, MatchesDualOracle)
{
    const PolytopeModel m = double_bound_extremes(2.0);
    const TrialDistribution t = tilted_trial(2.0);
    for (double beta : {0.01, 0.05}) {
        const PefSolution s = optimize_pef(m, t, beta);
        const auto prog = pef_program(m, t, beta);
        const auto ref = oracle::projected_gradient(prog.q, prog.A);
        EXPECT_NEAR(s.expected_log, ref.primal_value, 1e-6) << beta;
    }
}

TEST(Optimize, ClassicalTrialGivesNoRandomness)
{
    const PolytopeModel m = double_bound_extremes(2.0);
    const CertificationConfig cfg{1e-6, 10000};
    for (const Behavior& b : {uniform_noise(), local_deterministic(6u)}) {
        // Deterministic trials leave zero-probability cells; the optimizer
        // needs q > 0 only on the variables it keeps positive.
        const TrialDistribution t{b, kUniform};
        const PefSolution s = optimize_pef(m, t, 0.05);
        EXPECT_NEAR(s.expected_log, 0.0, 1e-8);
        EXPECT_LE(bits_from_expected_log(cfg, 0.05, s.expected_log), 0.0);
    }
}

TEST(OptimizeProperty, ValidOnRandomMixtures)
{
    std::mt19937_64 rng(31);
    const PolytopeModel m = double_bound_extremes(2.0);
    const PefSolution s = optimize_pef(m, tilted_trial(2.0), 0.018);
    for (int t = 0; t < 300; ++t)
        ASSERT_LE(constraint_value(s.pef, random_mixture(m, rng), kUniform), 1.0 + 1e-9);
}

TEST(OptimizeProperty, ScalingDownStaysValid)
{
    const PolytopeModel m = eight_chsh_polytope();
    const PefSolution s = optimize_pef(m, tilted_trial(1.5), 0.03);
    for (double c : {1.0, 0.9, 0.5, 0.01})
        EXPECT_TRUE(is_valid_pef(s.pef.scaled(c), m, kUniform)) << c;
}

TEST(Sweep, InteriorOptimumAndDeterminism)
{
    const PolytopeModel m = single_bound_extremes(chsh_tsirelson_constraint());
    const CertificationConfig cfg{1e-6, 10000};
    const auto grid = default_beta_grid();
    ASSERT_EQ(grid.size(), 100u);
    EXPECT_DOUBLE_EQ(grid.front(), 0.001);
    EXPECT_DOUBLE_EQ(grid.back(), 0.1);
    const CertificationReport a = sweep_beta(m, tilted_trial(2.0), cfg, grid, 4);
    const CertificationReport b = sweep_beta(m, tilted_trial(2.0), cfg, grid, 1);
    ASSERT_TRUE(a.found);
    EXPECT_EQ(a.failures, 0u);
    EXPECT_GT(a.beta, grid.front());
    EXPECT_LT(a.beta, grid.back());
    EXPECT_EQ(a.bits, b.bits);
    for (std::size_t i = 0; i < grid.size(); ++i)
        EXPECT_EQ(a.trace[i].bits, b.trace[i].bits);
}

TEST(Sweep, RejectsBadGrid)
{
    const PolytopeModel m = double_bound_extremes(2.0);
    const CertificationConfig cfg{};
    EXPECT_THROW(sweep_beta(m, tilted_trial(2.0), cfg, {}), InvalidArgument);
    EXPECT_THROW(sweep_beta(m, tilted_trial(2.0), cfg, {0.01, -0.1}), InvalidArgument);
}

TEST(Sweep, AlphaRowMatchesDirectSweep)
{
    const CertificationConfig cfg{1e-6, 10000};
    const std::vector<double> betas{0.01, 0.018, 0.03};
    const auto rows = sweep_alpha({2.0}, 2.0, cfg, betas);
    const auto direct = sweep_beta(double_bound_extremes(2.0), tilted_trial(2.0), cfg, betas);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].report.bits, direct.bits);
    EXPECT_THROW(sweep_alpha({1.0}, 2.0, cfg, betas), InvalidArgument);
}
