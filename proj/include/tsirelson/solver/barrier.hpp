#ifndef TSIRELSON_SOLVER_BARRIER_HPP
#define TSIRELSON_SOLVER_BARRIER_HPP

/**
 * Log-barrier path following for
 *
 *     maximize  sum_i q_i ln x_i   subject to  A x <= 1,  x >= 0,
 *
 * with A nonnegative. This is the shape of the PEF optimization: one
 * variable per trial result, one row per extreme point.
 *
 * The iterates follow the central path of the log barrier
 *
 *     phi_t(x) = -t sum_i q_i ln x_i - sum_i ln x_i - sum_j ln(1 - a_j.x),
 *
 * i.e. the points where lambda_j s_j = mu_i x_i = 1/t with s = 1 - A x.
 * Slacks s and multipliers (lambda, mu) are carried as iterates next to x
 * (primal-dual form), so the multipliers stay accurate when slacks reach
 * 1e-14. Each outer iteration re-centers with damped Newton steps and then
 * multiplies t by a fixed factor; the duality gap on the path is (m + n)/t.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <string>

#include <Eigen/Dense>

#include "tsirelson/errors.hpp"

namespace tsirelson::solver {

struct ConcaveProgram
{
    Eigen::VectorXd q; // objective weights of ln x_i, nonnegative
    Eigen::MatrixXd A; // m x n, nonnegative; constraint A x <= 1
};

struct ConcaveOptions
{
    double tolerance = 1e-8;      // KKT residual tolerance
    double gap_tolerance = 1e-10; // stop once (m + n)/t falls below this
    double t0 = 1.0;
    double t_factor = 10.0;
    int max_outer = 60;
    int max_newton = 100;
    double start_shrink = 1e-3;   // start at x = (1 - shrink) * 1 / max row sum
    std::ostream* trace = nullptr; // CSV iterate dump when set
};

enum class ConcaveStatus { converged, max_iterations, numerical_breakdown };

inline const char* to_string(ConcaveStatus s)
{
    switch (s) {
    case ConcaveStatus::converged: return "converged";
    case ConcaveStatus::max_iterations: return "max_iterations";
    case ConcaveStatus::numerical_breakdown: return "numerical_breakdown";
    }
    return "unknown";
}

struct KktResiduals
{
    double stationarity = 0.0;       // max |q_i/x_i + mu_i - (A^T lambda)_i|
    double primal_feasibility = 0.0; // max(0, max_j (a_j.x - 1), max_i -x_i)
    double complementarity = 0.0;    // max(lambda_j s_j, mu_i x_i)

    double max() const { return std::max({stationarity, primal_feasibility, complementarity}); }
};

struct ConcaveResult
{
    ConcaveStatus status = ConcaveStatus::max_iterations;
    Eigen::VectorXd x;
    Eigen::VectorXd lambda; // multipliers of A x <= 1
    Eigen::VectorXd mu;     // multipliers of x >= 0
    double objective = 0.0;
    double dual_objective = 0.0;
    double gap_bound = 0.0;
    KktResiduals kkt;
    int outer_iterations = 0;
    int newton_iterations = 0;
};

namespace detail {

// Residual level below which a centering step is not attempted; rounding
// in q/x and A x dominates beyond it.
inline constexpr double kCenteringFloor = 1e-14;

inline double log_objective(const Eigen::VectorXd& q, const Eigen::VectorXd& x)
{
    double v = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (q(i) > 0.0)
            v += q(i) * std::log(x(i));
    return v;
}

/// Lagrangian dual value at (lambda, mu); +inf when the dual point is not
/// admissible.
inline double dual_value(const ConcaveProgram& prog, const Eigen::VectorXd& lambda,
                         const Eigen::VectorXd& mu)
{
    const Eigen::VectorXd c = prog.A.transpose() * lambda - mu;
    double v = lambda.sum();
    for (Eigen::Index i = 0; i < c.size(); ++i) {
        const double qi = prog.q(i);
        if (qi > 0.0) {
            if (c(i) <= 0.0)
                return std::numeric_limits<double>::infinity();
            v += qi * std::log(qi / c(i)) - qi;
        } else if (c(i) < 0.0) {
            return std::numeric_limits<double>::infinity();
        }
    }
    return v;
}

} // namespace detail

inline ConcaveResult solve_concave(const ConcaveProgram& prog, const ConcaveOptions& opt = {})
{
    const Eigen::Index n = prog.q.size();
    const Eigen::Index m = prog.A.rows();
    if (prog.A.cols() != n || n == 0)
        throw InvalidArgument("concave program dimensions are inconsistent");
    if (!prog.q.allFinite() || (prog.q.array() < 0.0).any())
        throw InvalidArgument("objective weights must be finite and nonnegative");
    if (!prog.A.allFinite() || (prog.A.array() < 0.0).any())
        throw InvalidArgument("constraint matrix must be finite and nonnegative");
    for (Eigen::Index i = 0; i < n; ++i)
        if (m == 0 || prog.A.col(i).maxCoeff() <= 0.0)
            throw InvalidArgument("variable " + std::to_string(i) +
                                  " is not bounded by any constraint");

    using Vec = Eigen::VectorXd;
    const Vec& q = prog.q;
    const Eigen::MatrixXd& A = prog.A;

    // Strictly feasible start on the tau = 1/t0 complementarity surface.
    const double row_max = std::max(1.0, A.rowwise().sum().maxCoeff());
    double tau = 1.0 / opt.t0;
    Vec x = Vec::Constant(n, (1.0 - opt.start_shrink) / row_max);
    Vec s = Vec::Ones(m) - A * x;
    Vec lambda = (tau / s.array()).matrix();
    Vec mu = (tau / x.array()).matrix();

    struct Residuals
    {
        Vec dual, primal, comp_s, comp_x;
        double norm() const
        {
            return std::max({dual.cwiseAbs().maxCoeff(), primal.cwiseAbs().maxCoeff(),
                             comp_s.cwiseAbs().maxCoeff(), comp_x.cwiseAbs().maxCoeff()});
        }
    };
    auto residuals = [&](const Vec& x_, const Vec& s_, const Vec& l_, const Vec& m_, double tau_) {
        Residuals r;
        r.dual = q.cwiseQuotient(x_) + m_ - A.transpose() * l_;
        r.primal = A * x_ + s_ - Vec::Ones(m);
        r.comp_s = (l_.array() * s_.array() - tau_).matrix();
        r.comp_x = (m_.array() * x_.array() - tau_).matrix();
        return r;
    };
    auto max_step = [](const Vec& v, const Vec& dv) {
        double a = 1.0;
        for (Eigen::Index i = 0; i < v.size(); ++i)
            if (dv(i) < 0.0)
                a = std::min(a, -0.99 * v(i) / dv(i));
        return a;
    };

    ConcaveResult out;
    out.status = ConcaveStatus::max_iterations;
    const double constraint_count = static_cast<double>(m + n);

    if (opt.trace)
        *opt.trace << "outer,newton,t,objective,residual,step\n";

    for (int outer = 0; outer < opt.max_outer; ++outer) {
        ++out.outer_iterations;
        const double target = std::max(0.1 * tau, detail::kCenteringFloor);
        bool centered = false;
        for (int it = 0; it < opt.max_newton; ++it) {
            const Residuals r = residuals(x, s, lambda, mu, tau);
            const double rho = r.norm();
            if (opt.trace)
                *opt.trace << outer << ',' << it << ',' << 1.0 / tau << ','
                           << detail::log_objective(q, x) << ',' << rho << ',';
            if (rho <= target) {
                if (opt.trace)
                    *opt.trace << "0\n";
                centered = true;
                break;
            }
            ++out.newton_iterations;

            // Newton step on the perturbed KKT system, reduced to x:
            //   M dx = r_d + (tau/x - mu) - A^T (tau/s - lambda + (lambda/s) r_p)
            //   M = diag(q/x^2 + mu/x) + A^T diag(lambda/s) A
            const Vec ls = lambda.cwiseQuotient(s);
            Eigen::MatrixXd M = A.transpose() * ls.asDiagonal() * A;
            M.diagonal() += q.cwiseQuotient(x.cwiseAbs2()) + mu.cwiseQuotient(x);
            const Vec rhs = r.dual + (tau / x.array()).matrix() - mu -
                            A.transpose() * ((tau / s.array()).matrix() - lambda +
                                             ls.cwiseProduct(r.primal));

            const Vec d = M.diagonal().cwiseSqrt().cwiseInverse();
            Eigen::LLT<Eigen::MatrixXd> llt(d.asDiagonal() * M * d.asDiagonal());
            if (llt.info() != Eigen::Success)
                throw SolverError("barrier Newton system is not positive definite");
            const Vec dx = d.cwiseProduct(llt.solve(d.cwiseProduct(rhs)));
            const Vec ds = -r.primal - A * dx;
            const Vec dl = (tau / s.array()).matrix() - lambda - ls.cwiseProduct(ds);
            const Vec dm = (tau / x.array()).matrix() - mu - mu.cwiseQuotient(x).cwiseProduct(dx);
            if (!dx.allFinite() || !dl.allFinite() || !dm.allFinite())
                throw SolverError("barrier Newton step is not finite");

            // Fraction-to-boundary, then backtrack on the residual norm.
            double step = std::min({max_step(x, dx), max_step(s, ds), max_step(lambda, dl),
                                    max_step(mu, dm)});
            while (step > 1e-12) {
                const Residuals trial = residuals(x + step * dx, s + step * ds,
                                                  lambda + step * dl, mu + step * dm, tau);
                if (trial.norm() <= (1.0 - 0.01 * step) * rho)
                    break;
                step *= 0.5;
            }
            if (opt.trace)
                *opt.trace << step << '\n';
            if (step <= 1e-12)
                break;
            x += step * dx;
            s += step * ds;
            lambda += step * dl;
            mu += step * dm;
        }
        if (!centered) {
            // Rounding can stall centering near the end of the path; the
            // iterate is still usable if its measured gap already meets the target.
            if (lambda.dot(s) + mu.dot(x) <= opt.gap_tolerance && s.minCoeff() >= 0.0)
                out.status = ConcaveStatus::converged;
            break;
        }
        if (constraint_count * tau <= opt.gap_tolerance) {
            out.status = ConcaveStatus::converged;
            break;
        }
        tau /= opt.t_factor;
    }

    out.x = x;
    out.lambda = lambda;
    out.mu = mu;
    out.objective = detail::log_objective(q, x);
    out.dual_objective = detail::dual_value(prog, lambda, mu);
    out.gap_bound = lambda.dot(s) + mu.dot(x);

    const Vec slack = Vec::Ones(m) - A * x;
    out.kkt.stationarity = (q.cwiseQuotient(x) + mu - A.transpose() * lambda).cwiseAbs().maxCoeff();
    out.kkt.primal_feasibility = std::max({0.0, -slack.minCoeff(), -x.minCoeff()});
    out.kkt.complementarity = std::max(lambda.cwiseProduct(s).cwiseAbs().maxCoeff(),
                                       mu.cwiseProduct(x).cwiseAbs().maxCoeff());
    if (out.status == ConcaveStatus::converged && out.kkt.max() > opt.tolerance)
        out.status = ConcaveStatus::max_iterations;
    return out;
}

} // namespace tsirelson::solver

#endif
