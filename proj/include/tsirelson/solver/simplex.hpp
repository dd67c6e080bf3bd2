#ifndef TSIRELSON_SOLVER_SIMPLEX_HPP
#define TSIRELSON_SOLVER_SIMPLEX_HPP

/**
 * Dense two-phase primal simplex for small standard-form programs
 *
 *     minimize  c.x   subject to  A x = b,  x >= 0.
 *
 * Pivoting follows Bland's rule (lowest eligible column enters, ties in
 * the ratio test go to the lowest basic variable), so runs are
 * deterministic and cannot cycle. Intended for the membership and
 * extremality queries of the polytope module: tens of rows, a few hundred
 * columns at most.
 */

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "tsirelson/errors.hpp"

namespace tsirelson::solver {

struct LinearProgram
{
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    Eigen::VectorXd c;
};

enum class LpStatus { optimal, infeasible, unbounded };

inline const char* to_string(LpStatus s)
{
    switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    }
    return "unknown";
}

struct LpOptions
{
    double feasibility_tolerance = 1e-9;
    double pivot_tolerance = 1e-12;
    double cost_tolerance = 1e-12;
    std::size_t max_iterations = 100000;
};

struct LpResult
{
    LpStatus status = LpStatus::infeasible;
    Eigen::VectorXd x;             // primal point (phase-1 point when infeasible)
    double objective = 0.0;        // c.x, meaningful when optimal
    double infeasibility = 0.0;    // phase-1 optimum: sum of artificial variables
    std::size_t iterations = 0;
};

namespace detail {

class Tableau
{
public:
    Tableau(const LinearProgram& lp)
        : m_(static_cast<std::size_t>(lp.A.rows())),
          n_(static_cast<std::size_t>(lp.A.cols())),
          T_(Eigen::MatrixXd::Zero(lp.A.rows(), lp.A.cols() + lp.A.rows() + 1)),
          basis_(m_),
          active_(m_, true)
    {
        for (std::size_t i = 0; i < m_; ++i) {
            const double sign = lp.b(i) < 0.0 ? -1.0 : 1.0;
            T_.row(i).head(n_) = sign * lp.A.row(i);
            T_(i, n_ + i) = 1.0;
            T_(i, rhs()) = sign * lp.b(i);
            basis_[i] = n_ + i;
        }
    }

    std::size_t rhs() const { return n_ + m_; }
    bool is_artificial(std::size_t j) const { return j >= n_; }

    /// Runs simplex iterations for the given column costs. Columns with
    /// eligible[j] == false never enter. Returns false on unboundedness.
    bool optimize(const Eigen::VectorXd& cost, const std::vector<bool>& eligible,
                  const LpOptions& opt, std::size_t& iterations)
    {
        const std::size_t cols = n_ + m_;
        while (true) {
            if (iterations >= opt.max_iterations)
                throw SolverError("simplex iteration limit reached");

            std::size_t enter = cols;
            for (std::size_t j = 0; j < cols && enter == cols; ++j) {
                if (!eligible[j] || is_basic(j))
                    continue;
                double reduced = cost(j);
                for (std::size_t i = 0; i < m_; ++i)
                    if (active_[i])
                        reduced -= cost(basis_[i]) * T_(i, j);
                if (reduced < -opt.cost_tolerance)
                    enter = j;
            }
            if (enter == cols)
                return true;

            std::size_t leave = m_;
            double best_ratio = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < m_; ++i) {
                if (!active_[i] || T_(i, enter) <= opt.pivot_tolerance)
                    continue;
                const double ratio = T_(i, rhs()) / T_(i, enter);
                if (leave == m_ || ratio < best_ratio - kRatioTie) {
                    best_ratio = ratio;
                    leave = i;
                } else if (ratio <= best_ratio + kRatioTie && basis_[i] < basis_[leave]) {
                    leave = i;
                }
            }
            if (leave == m_)
                return false;
            pivot(leave, enter);
            ++iterations;
        }
    }

    /// After phase 1: pivot zero-level artificials out of the basis, or
    /// drop their rows when they are linear combinations of the others.
    void expel_artificials(const LpOptions& opt)
    {
        for (std::size_t i = 0; i < m_; ++i) {
            if (!active_[i] || !is_artificial(basis_[i]))
                continue;
            std::size_t col = n_;
            double best = opt.pivot_tolerance;
            for (std::size_t j = 0; j < n_; ++j) {
                if (!is_basic(j) && std::abs(T_(i, j)) > best) {
                    best = std::abs(T_(i, j));
                    col = j;
                }
            }
            if (col < n_)
                pivot(i, col);
            else
                active_[i] = false;
        }
    }

    Eigen::VectorXd solution() const
    {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_));
        for (std::size_t i = 0; i < m_; ++i)
            if (active_[i] && basis_[i] < n_)
                x(basis_[i]) = std::max(0.0, T_(i, rhs()));
        return x;
    }

    double artificial_sum() const
    {
        double s = 0.0;
        for (std::size_t i = 0; i < m_; ++i)
            if (active_[i] && is_artificial(basis_[i]))
                s += T_(i, rhs());
        return s;
    }

    std::size_t rows() const { return m_; }
    std::size_t structural() const { return n_; }

private:
    bool is_basic(std::size_t j) const
    {
        for (std::size_t i = 0; i < m_; ++i)
            if (active_[i] && basis_[i] == j)
                return true;
        return false;
    }

    void pivot(std::size_t row, std::size_t col)
    {
        T_.row(row) /= T_(row, col);
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == row)
                continue;
            const double factor = T_(i, col);
            if (factor != 0.0)
                T_.row(i) -= factor * T_.row(row);
        }
        basis_[row] = col;
    }

    static constexpr double kRatioTie = 1e-15;

    std::size_t m_;
    std::size_t n_;
    Eigen::MatrixXd T_;
    std::vector<std::size_t> basis_;
    std::vector<bool> active_;
};

} // namespace detail

/**
 * Solves min c.x s.t. A x = b, x >= 0. Infeasible and unbounded programs
 * are reported through the status, not thrown: both are legitimate answers
 * to a membership query.
 */
inline LpResult solve_lp(const LinearProgram& lp, const LpOptions& opt = {})
{
    const auto m = lp.A.rows();
    const auto n = lp.A.cols();
    if (lp.b.size() != m || lp.c.size() != n)
        throw InvalidArgument("linear program dimensions are inconsistent");
    if (!lp.A.allFinite() || !lp.b.allFinite() || !lp.c.allFinite())
        throw InvalidArgument("linear program has non-finite data");

    detail::Tableau tab(lp);
    LpResult out;
    const auto total = static_cast<std::size_t>(n + m);

    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(total));
    phase1.tail(m).setOnes();
    std::vector<bool> eligible(total, true);
    tab.optimize(phase1, eligible, opt, out.iterations);

    out.infeasibility = tab.artificial_sum();
    if (out.infeasibility > opt.feasibility_tolerance) {
        out.status = LpStatus::infeasible;
        out.x = tab.solution();
        return out;
    }

    tab.expel_artificials(opt);
    for (std::size_t j = static_cast<std::size_t>(n); j < total; ++j)
        eligible[j] = false;
    Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(total));
    phase2.head(n) = lp.c;
    const bool bounded = tab.optimize(phase2, eligible, opt, out.iterations);

    out.x = tab.solution();
    out.objective = lp.c.dot(out.x);
    out.status = bounded ? LpStatus::optimal : LpStatus::unbounded;
    return out;
}

} // namespace tsirelson::solver

#endif
