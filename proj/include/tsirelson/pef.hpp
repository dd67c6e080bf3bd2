#ifndef TSIRELSON_PEF_HPP
#define TSIRELSON_PEF_HPP

/**
 * Probability estimation factors for the (2,2,2) scenario.
 *
 * A PEF with power beta is a nonnegative score F(oA, oB, sA, sB) such that
 *
 *     sum_s pi(s) sum_o P(o|s)^(1 + beta) F(o, s) <= 1
 *
 * for every behavior P in the model. The left side is convex in P, so it is
 * enough to check the model's extreme points. Given n trials and error
 * bound epsilon, the anticipated outcome-probability bound is
 * (epsilon exp(n E[ln F]))^(-1/beta); it is reported here as -log2 of
 * that quantity ("bits").
 */

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "tsirelson/bell.hpp"
#include "tsirelson/polytope.hpp"
#include "tsirelson/scenarios.hpp"
#include "tsirelson/solver/barrier.hpp"

namespace tsirelson {

class Pef
{
public:
    Pef(const Vec16& values, double beta) : values_(values), beta_(beta)
    {
        if (!(beta_ > 0.0) || !std::isfinite(beta_))
            throw InvalidArgument("PEF power must be positive");
        for (double v : values_)
            if (!std::isfinite(v) || v < 0.0)
                throw InvalidArgument("PEF values must be finite and nonnegative");
    }

    static Pef constant(double value, double beta)
    {
        Vec16 v;
        v.fill(value);
        return {v, beta};
    }

    const Vec16& values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    double beta() const { return beta_; }

    Pef scaled(double c) const
    {
        Vec16 v = values_;
        for (double& x : v)
            x *= c;
        return {v, beta_};
    }

private:
    Vec16 values_;
    double beta_;
};

struct CertificationConfig
{
    double epsilon = 1e-6;
    std::uint64_t trials = 10000;

    void validate() const
    {
        if (!(epsilon > 0.0 && epsilon < 1.0))
            throw InvalidArgument("epsilon must lie in (0, 1)");
        if (trials < 1)
            throw InvalidArgument("trial count must be positive");
    }
};

/// Left side of the PEF condition for behavior e; 0^(1+beta) is taken as 0.
inline double constraint_value(const Pef& pef, const Behavior& e, const SettingsDistribution& pi)
{
    double v = 0.0;
    for (std::size_t i = 0; i < kCells; ++i) {
        const double p = e[i];
        if (p > 0.0)
            v += pi[i / 4] * std::pow(p, 1.0 + pef.beta()) * pef[i];
    }
    return v;
}

inline bool is_valid_pef(const Pef& pef, const PolytopeModel& model, const SettingsDistribution& pi)
{
    if (model.points.empty())
        throw InvalidArgument("model has no points");
    return std::all_of(model.points.begin(), model.points.end(), [&](const LabeledPoint& pt) {
        return constraint_value(pef, pt.behavior, pi) <= 1.0 + kSolverTolerance;
    });
}

/// E[ln F] under the trial distribution (natural log).
inline double expected_log(const Pef& pef, const TrialDistribution& trial)
{
    double v = 0.0;
    for (std::size_t i = 0; i < kCells; ++i) {
        const double q = trial.joint(i);
        if (q > 0.0) {
            if (pef[i] <= 0.0)
                throw InvalidArgument("PEF vanishes on a trial result of positive probability");
            v += q * std::log(pef[i]);
        }
    }
    return v;
}

/// -log2 of (epsilon exp(n expected_log))^(-1/beta).
inline double bits_from_expected_log(const CertificationConfig& cfg, double beta, double expected_log)
{
    if (!(beta > 0.0))
        throw InvalidArgument("beta must be positive");
    return (std::log2(cfg.epsilon) +
            static_cast<double>(cfg.trials) * expected_log / std::numbers::ln2) / beta;
}

// ---------------------------------------------------------------------------
// Optimization

/// Constraint rows pi(s) e(o|s)^(1+beta), one per model point.
inline solver::ConcaveProgram pef_program(const PolytopeModel& model, const TrialDistribution& trial,
                                          double beta)
{
    if (!(beta > 0.0))
        throw InvalidArgument("beta must be positive");
    if (model.points.empty())
        throw InvalidArgument("model has no points");
    solver::ConcaveProgram prog;
    prog.q = Eigen::VectorXd(static_cast<Eigen::Index>(kCells));
    for (std::size_t i = 0; i < kCells; ++i)
        prog.q(static_cast<Eigen::Index>(i)) = trial.joint(i);
    prog.A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(model.points.size()),
                                   static_cast<Eigen::Index>(kCells));
    for (std::size_t j = 0; j < model.points.size(); ++j) {
        const Behavior& e = model.points[j].behavior;
        for (std::size_t i = 0; i < kCells; ++i)
            if (e[i] > 0.0)
                prog.A(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
                    trial.settings[i / 4] * std::pow(e[i], 1.0 + beta);
    }
    return prog;
}

struct PefSolution
{
    Pef pef;
    double expected_log = 0.0;
    solver::ConcaveResult solver;
};

/**
 * Maximizes E[ln F] over PEFs with power beta valid for the model. Throws
 * SolverError when the barrier solve does not converge or the result fails
 * the validity re-check.
 */
inline PefSolution optimize_pef(const PolytopeModel& model, const TrialDistribution& trial,
                                double beta, const solver::ConcaveOptions& options = {})
{
    const solver::ConcaveProgram prog = pef_program(model, trial, beta);
    solver::ConcaveResult res = solver::solve_concave(prog, options);
    if (res.status != solver::ConcaveStatus::converged)
        throw SolverError(std::string("PEF optimization did not converge: ") +
                          solver::to_string(res.status) +
                          " (kkt residual " + std::to_string(res.kkt.max()) + ")");
    Vec16 f{};
    for (std::size_t i = 0; i < kCells; ++i)
        f[i] = res.x(static_cast<Eigen::Index>(i));
    Pef pef(f, beta);
    if (!is_valid_pef(pef, model, trial.settings))
        throw SolverError("optimized PEF fails the validity check");
    const double el = expected_log(pef, trial);
    return {pef, el, std::move(res)};
}

struct BetaTracePoint
{
    double beta = 0.0;
    double expected_log = std::numeric_limits<double>::quiet_NaN();
    double bits = std::numeric_limits<double>::quiet_NaN();
    std::string status; // solver status, or the error message of a failed point
    bool ok = false;
};

struct CertificationReport
{
    double beta = std::numeric_limits<double>::quiet_NaN();
    double expected_log = std::numeric_limits<double>::quiet_NaN();
    double bits = -std::numeric_limits<double>::infinity();
    bool found = false; // at least one grid point succeeded
    std::vector<BetaTracePoint> trace;
    std::size_t failures = 0;
};

/// count equally spaced values from lo to hi inclusive.
inline std::vector<double> linspace(double lo, double hi, std::size_t count)
{
    if (count == 0)
        throw InvalidArgument("grid must be nonempty");
    std::vector<double> g(count);
    for (std::size_t i = 0; i < count; ++i)
        g[i] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    return g;
}

/// 100 equally spaced powers in [0.001, 0.100].
inline std::vector<double> default_beta_grid() { return linspace(0.001, 0.100, 100); }

namespace detail {

/// Runs fn(i) for i in [0, count) on up to `jobs` threads.
template <class Fn>
void parallel_for(std::size_t count, unsigned jobs, Fn&& fn)
{
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(count)));
    if (jobs == 1) {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> workers;
    for (unsigned w = 0; w < jobs; ++w)
        workers.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++)
                fn(i);
        });
}

} // namespace detail

/// Optimizes a PEF at every beta of the grid and keeps the best bits.
/// Failed grid points stay in the trace with ok == false.
inline CertificationReport sweep_beta(const PolytopeModel& model, const TrialDistribution& trial,
                                      const CertificationConfig& cfg, const std::vector<double>& grid,
                                      unsigned jobs = 1, const solver::ConcaveOptions& options = {})
{
    cfg.validate();
    if (grid.empty())
        throw InvalidArgument("beta grid must be nonempty");
    for (double b : grid)
        if (!(b > 0.0))
            throw InvalidArgument("beta values must be positive");

    CertificationReport report;
    report.trace.resize(grid.size());
    detail::parallel_for(grid.size(), jobs, [&](std::size_t i) {
        BetaTracePoint& pt = report.trace[i];
        pt.beta = grid[i];
        try {
            const PefSolution sol = optimize_pef(model, trial, grid[i], options);
            pt.expected_log = sol.expected_log;
            pt.bits = bits_from_expected_log(cfg, grid[i], sol.expected_log);
            pt.status = solver::to_string(sol.solver.status);
            pt.ok = true;
        } catch (const Error& e) {
            pt.status = std::string("failed: ") + e.what();
        }
    });

    for (const BetaTracePoint& pt : report.trace) {
        if (!pt.ok) {
            ++report.failures;
            continue;
        }
        if (!report.found || pt.bits > report.bits) {
            report.found = true;
            report.beta = pt.beta;
            report.expected_log = pt.expected_log;
            report.bits = pt.bits;
        }
    }
    return report;
}

struct AlphaRow
{
    double alpha = 0.0;
    CertificationReport report;
};

/// Best bits of the double-bound polytope at each alpha, for a fixed trial.
inline std::vector<AlphaRow> sweep_alpha(const std::vector<double>& alpha_grid,
                                         const TrialDistribution& trial,
                                         const CertificationConfig& cfg,
                                         const std::vector<double>& beta_grid, unsigned jobs = 1,
                                         const solver::ConcaveOptions& options = {})
{
    if (alpha_grid.empty())
        throw InvalidArgument("alpha grid must be nonempty");
    for (double a : alpha_grid)
        if (!(a > 1.0))
            throw InvalidArgument("alpha values must exceed 1");

    std::vector<AlphaRow> rows(alpha_grid.size());
    detail::parallel_for(alpha_grid.size(), jobs, [&](std::size_t i) {
        rows[i].alpha = alpha_grid[i];
        rows[i].report = sweep_beta(double_bound_extremes(alpha_grid[i]), trial, cfg, beta_grid, 1, options);
    });
    return rows;
}

inline std::vector<AlphaRow> sweep_alpha(const std::vector<double>& alpha_grid, double trial_alpha,
                                         const CertificationConfig& cfg,
                                         const std::vector<double>& beta_grid = default_beta_grid(),
                                         unsigned jobs = 1)
{
    const TrialDistribution trial{tilted_maximizer(trial_alpha), SettingsDistribution::uniform()};
    return sweep_alpha(alpha_grid, trial, cfg, beta_grid, jobs);
}

} // namespace tsirelson

#endif
