#include <gtest/gtest.h>

#include <optional>
#include <random>

#include <boost/multiprecision/cpp_int.hpp>

#include "tsirelson/solver/simplex.hpp"

using namespace tsirelson::solver;
using Rational = boost::multiprecision::cpp_rational;

namespace {

// Exact optimum of min c.x, A x = b, x >= 0 by enumerating every basis.
// Only used with c >= 0, so the program is never unbounded.
std::optional<Rational> brute_force_optimum(const std::vector<std::vector<int>>& A,
                                            const std::vector<int>& b, const std::vector<int>& c)
{
    const std::size_t m = A.size();
    const std::size_t n = c.size();
    std::optional<Rational> best;
    std::vector<std::size_t> cols(m);
    std::vector<bool> pick(n, false);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(m), true);
    do {
        std::size_t k = 0;
        for (std::size_t j = 0; j < n; ++j)
            if (pick[j])
                cols[k++] = j;
        // Gauss-Jordan on [B | b].
        std::vector<std::vector<Rational>> M(m, std::vector<Rational>(m + 1));
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j)
                M[i][j] = A[i][cols[j]];
            M[i][m] = b[i];
        }
        bool singular = false;
        for (std::size_t col = 0; col < m && !singular; ++col) {
            std::size_t piv = col;
            while (piv < m && M[piv][col] == 0)
                ++piv;
            if (piv == m) {
                singular = true;
                break;
            }
            std::swap(M[piv], M[col]);
            const Rational d = M[col][col];
            for (auto& v : M[col])
                v /= d;
            for (std::size_t i = 0; i < m; ++i) {
                if (i == col || M[i][col] == 0)
                    continue;
                const Rational f = M[i][col];
                for (std::size_t j = 0; j <= m; ++j)
                    M[i][j] -= f * M[col][j];
            }
        }
        if (singular)
            continue;
        bool feasible = true;
        Rational value = 0;
        for (std::size_t i = 0; i < m; ++i) {
            if (M[i][m] < 0)
                feasible = false;
            value += c[cols[i]] * M[i][m];
        }
        if (feasible && (!best || value < *best))
            best = value;
    } while (std::prev_permutation(pick.begin(), pick.end()));
    return best;
}

} // namespace

TEST(Simplex, SmallKnownOptimum)
{
    // min -x1 - x2 s.t. x1 + 2 x2 + s1 = 4, 3 x1 + x2 + s2 = 6.
    LinearProgram lp;
    lp.A.resize(2, 4);
    lp.A << 1, 2, 1, 0, 3, 1, 0, 1;
    lp.b = Eigen::Vector2d(4, 6);
    lp.c = Eigen::Vector4d(-1, -1, 0, 0);
    const LpResult r = solve_lp(lp);
    ASSERT_EQ(r.status, LpStatus::optimal);
    EXPECT_NEAR(r.objective, -2.8, 1e-12);
    EXPECT_NEAR(r.x(0), 1.6, 1e-12);
    EXPECT_NEAR(r.x(1), 1.2, 1e-12);
}

TEST(Simplex, Infeasible)
{
    LinearProgram lp;
    lp.A.resize(2, 2);
    lp.A << 1, 1, 1, 1;
    lp.b = Eigen::Vector2d(1, 2);
    lp.c = Eigen::Vector2d(0, 0);
    EXPECT_EQ(solve_lp(lp).status, LpStatus::infeasible);
}

TEST(Simplex, Unbounded)
{
    LinearProgram lp;
    lp.A.resize(1, 2);
    lp.A << 1, -1;
    lp.b = Eigen::VectorXd::Constant(1, 1.0);
    lp.c = Eigen::Vector2d(-1, 0);
    EXPECT_EQ(solve_lp(lp).status, LpStatus::unbounded);
}

TEST(Simplex, RedundantRowsAreDropped)
{
    LinearProgram lp;
    lp.A.resize(3, 3);
    lp.A << 1, 1, 1, 2, 2, 2, 1, 0, 0;
    lp.b = Eigen::Vector3d(1, 2, 0.25);
    lp.c = Eigen::Vector3d(0, 1, 2);
    const LpResult r = solve_lp(lp);
    ASSERT_EQ(r.status, LpStatus::optimal);
    EXPECT_NEAR(r.objective, 0.75, 1e-12);
    EXPECT_NEAR((lp.A * r.x - lp.b).cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(Simplex, NegativeRightHandSide)
{
    LinearProgram lp;
    lp.A.resize(1, 2);
    lp.A << -1, -1;
    lp.b = Eigen::VectorXd::Constant(1, -3.0);
    lp.c = Eigen::Vector2d(2, 1);
    const LpResult r = solve_lp(lp);
    ASSERT_EQ(r.status, LpStatus::optimal);
    EXPECT_NEAR(r.objective, 3.0, 1e-12);
}

TEST(Simplex, DimensionMismatch)
{
    LinearProgram lp;
    lp.A = Eigen::MatrixXd::Zero(2, 3);
    lp.b = Eigen::VectorXd::Zero(3);
    lp.c = Eigen::VectorXd::Zero(3);
    EXPECT_THROW(solve_lp(lp), tsirelson::InvalidArgument);
}

TEST(Simplex, Deterministic)
{
    LinearProgram lp;
    lp.A = Eigen::MatrixXd::Ones(2, 5);
    lp.A(1, 0) = 0.0;
    lp.b = Eigen::Vector2d(1, 0.5);
    lp.c = Eigen::VectorXd::Zero(5);
    const LpResult a = solve_lp(lp);
    const LpResult b = solve_lp(lp);
    EXPECT_EQ(a.x, b.x);
    EXPECT_EQ(a.iterations, b.iterations);
}

TEST(SimplexOracle, AgreesWithExactBasisEnumeration)
{
    std::mt19937 rng(12345);
    std::uniform_int_distribution<int> coef(-3, 3);
    std::uniform_int_distribution<int> rhs(0, 5);
    std::uniform_int_distribution<int> cost(0, 6);
    int feasible = 0;
    int infeasible = 0;
    for (int instance = 0; instance < 20; ++instance) {
        std::vector<std::vector<int>> A(5, std::vector<int>(8));
        std::vector<int> b(5), c(8);
        for (auto& row : A)
            for (int& v : row)
                v = coef(rng);
        for (int& v : b)
            v = rhs(rng);
        for (int& v : c)
            v = cost(rng);

        LinearProgram lp;
        lp.A.resize(5, 8);
        lp.b.resize(5);
        lp.c.resize(8);
        for (int i = 0; i < 5; ++i) {
            for (int j = 0; j < 8; ++j)
                lp.A(i, j) = A[i][j];
            lp.b(i) = b[i];
        }
        for (int j = 0; j < 8; ++j)
            lp.c(j) = c[j];

        const auto exact = brute_force_optimum(A, b, c);
        const LpResult r = solve_lp(lp);
        if (exact) {
            ++feasible;
            ASSERT_EQ(r.status, LpStatus::optimal) << "instance " << instance;
            EXPECT_NEAR(r.objective, exact->convert_to<double>(), 1e-9) << "instance " << instance;
            EXPECT_LE((lp.A * r.x - lp.b).cwiseAbs().maxCoeff(), 1e-9);
            EXPECT_GE(r.x.minCoeff(), 0.0);
        } else {
            ++infeasible;
            EXPECT_EQ(r.status, LpStatus::infeasible) << "instance " << instance;
        }
    }
    // The generator should exercise both answers.
    EXPECT_GT(feasible, 0);
    EXPECT_GT(infeasible, 0);
}
