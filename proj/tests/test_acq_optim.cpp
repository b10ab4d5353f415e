#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "figbo/acq_optim.hpp"
#include "test_support.hpp"

using namespace figbo;

TEST(ScrambledSobol, UnitCubeAndDeterministic)
{
    const Eigen::MatrixXd a = scrambled_sobol(3, 256, 11);
    EXPECT_EQ(a.rows(), 256);
    EXPECT_TRUE((a.array() >= 0.0).all() && (a.array() < 1.0).all());
    EXPECT_EQ(a, scrambled_sobol(3, 256, 11));
    EXPECT_NE(a, scrambled_sobol(3, 256, 12));
    for (Eigen::Index j = 0; j < 3; ++j)
        EXPECT_NEAR(a.col(j).mean(), 0.5, 0.01);
}

TEST(OptimizeAcquisition, RecoversQuadraticPeak)
{
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::Index d = 1 + trial % 4;
        const Eigen::VectorXd c = test::random_vector(rng, d, 0.1, 0.9);
        auto f = [&](const Eigen::VectorXd& x) { return -(x - c).squaredNorm(); };
        OptimBudget budget;
        budget.local_evals = 200;
        const auto r = optimize_acquisition(f, Box::unit(d), budget, static_cast<std::uint64_t>(trial));
        EXPECT_LE((r.x - c).cwiseAbs().maxCoeff(), 1e-3) << "d=" << d;
        EXPECT_GE(r.score, r.raw_best);
    }
}

TEST(OptimizeAcquisition, PeakOnBoundary)
{
    auto f = [](const Eigen::VectorXd& x) { return x.sum(); };
    const auto r = optimize_acquisition(f, Box::unit(2), OptimBudget{}, 1);
    EXPECT_NEAR(r.x[0], 1.0, 1e-3);
    EXPECT_NEAR(r.x[1], 1.0, 1e-3);
    EXPECT_LE(r.x.maxCoeff(), 1.0);
}

TEST(OptimizeAcquisition, ResultAlwaysInsideBox)
{
    std::mt19937_64 rng(3);
    OptimBudget budget{64, 3, 40};
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index d = 1 + trial % 5;
        const Eigen::VectorXd lo = test::random_vector(rng, d, -5.0, 0.0);
        const Eigen::VectorXd hi = lo + test::random_vector(rng, d, 0.1, 5.0);
        const Box box(lo, hi);
        const Eigen::VectorXd c = test::random_vector(rng, d, -10.0, 10.0); // often outside
        auto f = [&](const Eigen::VectorXd& x) {
            EXPECT_TRUE(box.contains(x));
            return -(x - c).squaredNorm();
        };
        const auto r = optimize_acquisition(f, box, budget, static_cast<std::uint64_t>(trial));
        EXPECT_TRUE(box.contains(r.x));
    }
}

TEST(OptimizeAcquisition, NeverWorseThanBestRawCandidate)
{
    auto bumpy = [](const Eigen::VectorXd& x) { return std::sin(40.0 * x[0]) * std::cos(37.0 * x[1]); };
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto r = optimize_acquisition(bumpy, Box::unit(2), OptimBudget{128, 5, 30}, s);
        EXPECT_GE(r.score, r.raw_best);
        EXPECT_EQ(r.score, bumpy(r.x));
    }
    // no refinement budget: the raw best is returned as is
    const auto r0 = optimize_acquisition(bumpy, Box::unit(2), OptimBudget{128, 5, 0}, 4);
    EXPECT_EQ(r0.score, r0.raw_best);
}

TEST(OptimizeAcquisition, DeterministicGivenSeed)
{
    auto f = [](const Eigen::VectorXd& x) { return std::cos(9.0 * x[0]) + x[1] * x[1]; };
    const auto a = optimize_acquisition(f, Box::unit(2), OptimBudget{}, 77);
    const auto b = optimize_acquisition(f, Box::unit(2), OptimBudget{}, 77);
    EXPECT_EQ(a.x, b.x);
    EXPECT_EQ(a.score, b.score);
    EXPECT_EQ(a.evaluations, b.evaluations);
}

TEST(OptimizeAcquisition, MostlyNonFiniteScoresAreANumericalFailure)
{
    auto nan_score = [](const Eigen::VectorXd& x) {
        return x[0] < 0.8 ? std::numeric_limits<double>::quiet_NaN() : x[0];
    };
    EXPECT_THROW(optimize_acquisition(nan_score, Box::unit(1), OptimBudget{}, 1), NumericalError);
    auto some_nan = [](const Eigen::VectorXd& x) {
        return x[0] < 0.2 ? std::numeric_limits<double>::quiet_NaN() : -x[0];
    };
    const auto r = optimize_acquisition(some_nan, Box::unit(1), OptimBudget{}, 1);
    EXPECT_TRUE(std::isfinite(r.score));
    EXPECT_GE(r.x[0], 0.2);
}

TEST(OptimizeAcquisition, RejectsBadInputs)
{
    auto f = [](const Eigen::VectorXd& x) { return x.sum(); };
    EXPECT_THROW(optimize_acquisition(f, Box::unit(2), OptimBudget{4, 8, 10}, 1), InputError);
    const Box flat(Eigen::VectorXd::Zero(2), (Eigen::VectorXd(2) << 1, 0).finished());
    EXPECT_THROW(optimize_acquisition(f, flat, OptimBudget{}, 1), InputError);
}
