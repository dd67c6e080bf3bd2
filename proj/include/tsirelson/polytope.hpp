#ifndef TSIRELSON_POLYTOPE_HPP
#define TSIRELSON_POLYTOPE_HPP

/**
 * Tsirelson polytopes: the no-signaling polytope cut by one or more
 * half-spaces B.P <= TB*, described by their extreme points.
 *
 * Three constructions are provided:
 *   - single_bound_extremes: any functional with LB < NSB and one bound;
 *   - eight_chsh_polytope: all eight CHSH versions at 2 sqrt(2);
 *   - double_bound_extremes: CHSH at 2 sqrt(2) together with the tilted
 *     CHSH functional at 2 sqrt(1 + alpha^2), which are maximized by the
 *     same PR box and therefore interact.
 *
 * Membership (decompose) and extremality (verify_extremality) are answered
 * by the dense simplex in solver/simplex.hpp. For the single- and
 * double-bound models, behaviors given as PR box + saturating locals
 * weights are decomposed by explicit weight substitution instead.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tsirelson/bell.hpp"
#include "tsirelson/solver/simplex.hpp"

namespace tsirelson {

/// Extremality margin (L1 distance to the hull of the other points)
/// required for a point to count as extreme.
inline constexpr double kExtremalityMargin = 1e-9;
/// Reconstruction accuracy demanded of a decomposition.
inline constexpr double kDecompositionTolerance = 1e-10;

/// The half-space functional . P <= bound. Construction checks
/// LB <= bound < NSB; whether bound >= TB is left to the caller.
class TsirelsonConstraint
{
public:
    TsirelsonConstraint(std::string name, BellFunctional functional, double bound)
        : name_(std::move(name)), functional_(std::move(functional)), bound_(bound)
    {
        const BoundsSummary b = compute_bounds(functional_);
        if (!std::isfinite(bound_) || bound_ < b.lb - kStructuralTolerance || bound_ >= b.nsb)
            throw InvalidArgument("constraint bound must lie in [LB, NSB) = [" +
                                  std::to_string(b.lb) + ", " + std::to_string(b.nsb) + ")");
        bounds_ = b;
    }

    const std::string& name() const { return name_; }
    const BellFunctional& functional() const { return functional_; }
    double bound() const { return bound_; }
    const BoundsSummary& bounds() const { return bounds_; }

    double value(const Behavior& p) const { return evaluate(functional_, p); }
    double excess(const Behavior& p) const { return value(p) - bound_; }

    friend bool operator==(const TsirelsonConstraint& a, const TsirelsonConstraint& b)
    {
        return a.name_ == b.name_ && a.functional_ == b.functional_ && a.bound_ == b.bound_;
    }

private:
    std::string name_;
    BellFunctional functional_;
    double bound_;
    BoundsSummary bounds_;
};

inline TsirelsonConstraint chsh_tsirelson_constraint()
{
    return {"chsh", chsh_functional(), 2.0 * std::sqrt(2.0)};
}

inline TsirelsonConstraint tilted_tsirelson_constraint(double alpha)
{
    return {"tilted", tilted_functional(alpha), 2.0 * std::sqrt(1.0 + alpha * alpha)};
}

enum class Construction { single_bound, eight_chsh, double_bound, custom };

inline const char* to_string(Construction c)
{
    switch (c) {
    case Construction::single_bound: return "single";
    case Construction::eight_chsh: return "eight-chsh";
    case Construction::double_bound: return "double";
    case Construction::custom: return "custom";
    }
    return "custom";
}

inline Construction construction_from_string(const std::string& s)
{
    if (s == "single")
        return Construction::single_bound;
    if (s == "eight-chsh")
        return Construction::eight_chsh;
    if (s == "double")
        return Construction::double_bound;
    if (s == "custom")
        return Construction::custom;
    throw InvalidArgument("unknown construction: " + s);
}

struct Provenance
{
    Construction kind = Construction::custom;
    std::optional<double> alpha; // double-bound models only
};

struct LabeledPoint
{
    std::string label;
    Behavior behavior;

    friend bool operator==(const LabeledPoint&, const LabeledPoint&) = default;
};

struct PolytopeModel
{
    std::vector<LabeledPoint> points;
    std::vector<TsirelsonConstraint> constraints;
    Provenance provenance;

    std::size_t size() const { return points.size(); }

    std::optional<std::size_t> index_of(const std::string& label) const
    {
        for (std::size_t i = 0; i < points.size(); ++i)
            if (points[i].label == label)
                return i;
        return std::nullopt;
    }

    /// First point within tolerance (max norm) of p.
    std::optional<std::size_t> find_point(const Behavior& p,
                                          double tolerance = kStructuralTolerance) const
    {
        for (std::size_t i = 0; i < points.size(); ++i)
            if (points[i].behavior.distance(p) <= tolerance)
                return i;
        return std::nullopt;
    }

    /// Appends unless an equal point (within tolerance) is already present.
    bool add_point(std::string label, const Behavior& p)
    {
        if (find_point(p))
            return false;
        points.push_back({std::move(label), p});
        return true;
    }
};

/// Convex combination of behaviors; weights are not renormalized.
inline Behavior combine(std::initializer_list<std::pair<double, const Behavior*>> terms)
{
    Vec16 v{};
    for (const auto& [w, p] : terms)
        for (std::size_t i = 0; i < kCells; ++i)
            v[i] += w * (*p)[i];
    return Behavior(v);
}

// ---------------------------------------------------------------------------
// Constructions

/// lambda_i = (TB* - B_i)/(NSB - B_i) for the eight locals saturating the
/// CHSH version of the constraint's maximizing PR box, in
/// saturating_local_indices order.
inline std::array<double, 8> split_coefficients(const TsirelsonConstraint& c)
{
    const BoundsSummary& b = c.bounds();
    const auto locals = saturating_local_indices(b.max_pr_index);
    std::array<double, 8> out{};
    for (std::size_t i = 0; i < 8; ++i) {
        const double bi = evaluate(c.functional(), local_deterministic(locals[i]));
        out[i] = (c.bound() - bi) / (b.nsb - bi);
    }
    return out;
}

inline std::string split_label(unsigned pr_index, unsigned local_index)
{
    return "E" + std::to_string(pr_index) + "/" + local_label(local_index);
}

namespace detail {

inline void add_locals(PolytopeModel& model)
{
    for (unsigned i = 0; i < kLocalCount; ++i)
        model.add_point(local_label(i), local_deterministic(i));
}

inline void add_split_points(PolytopeModel& model, const TsirelsonConstraint& c)
{
    const unsigned k = c.bounds().max_pr_index;
    const Behavior pr = pr_box(k);
    const auto locals = saturating_local_indices(k);
    const auto lambda = split_coefficients(c);
    for (std::size_t i = 0; i < 8; ++i) {
        const Behavior l = local_deterministic(locals[i]);
        model.add_point(split_label(k, locals[i]), combine({{lambda[i], &pr}, {1.0 - lambda[i], &l}}));
    }
}

} // namespace detail

/**
 * Extreme points of NS cut by a single constraint: the 16 locals, the 7 PR
 * boxes other than the maximizer PR_1, and
 *
 *     E_i = lambda_i PR_1 + (1 - lambda_i) L_i,
 *
 * one per CHSH-saturating local L_i of PR_1. Points that coincide (E_i ==
 * L_i when TB* == B_i) are stored once.
 */
inline PolytopeModel single_bound_extremes(const TsirelsonConstraint& c)
{
    PolytopeModel model;
    model.constraints.push_back(c);
    model.provenance.kind = Construction::single_bound;
    const unsigned k = c.bounds().max_pr_index;
    detail::add_locals(model);
    for (unsigned j = 0; j < kPrBoxCount; ++j)
        if (j != k)
            model.add_point(pr_label(j), pr_box(j));
    detail::add_split_points(model, c);
    return model;
}

/// All eight CHSH versions at 2 sqrt(2): 16 locals and 8 split points per PR box.
inline PolytopeModel eight_chsh_polytope()
{
    PolytopeModel model;
    model.provenance.kind = Construction::eight_chsh;
    detail::add_locals(model);
    for (unsigned k = 0; k < kPrBoxCount; ++k) {
        TsirelsonConstraint c("chsh" + std::to_string(k), chsh_version(k), 2.0 * std::sqrt(2.0));
        detail::add_split_points(model, c);
        model.constraints.push_back(std::move(c));
    }
    return model;
}

/// Weights (PR box, top local, bottom local) of the points saturating both
/// the CHSH and the tilted bound.
struct DoubleBoundCoefficients
{
    double pr = 0.0;
    double top = 0.0;
    double bottom = 0.0;
};

/**
 * Closed-form solution of
 *
 *     (2 + 2a) l_pr + 2 l_top + 2a l_bot = 2 sqrt(1 + a^2)
 *            4 l_pr + 2 l_top +  2 l_bot = 2 sqrt(2)
 *              l_pr +   l_top +    l_bot = 1
 *
 * The fractions in l_top = 1 - (sqrt(1+a^2) - sqrt 2)/(a - 1) and
 * l_bot = 1 - (a sqrt 2 - sqrt(1+a^2))/(a - 1) are rationalized so that
 * the (a - 1) factor cancels and nothing is lost near a = 1.
 */
inline DoubleBoundCoefficients double_bound_coefficients(double alpha)
{
    if (!(alpha > 1.0))
        throw InvalidArgument("double-bound polytope requires alpha > 1");
    const double r = std::sqrt(1.0 + alpha * alpha);
    const double s2 = std::sqrt(2.0);
    DoubleBoundCoefficients c;
    c.pr = s2 - 1.0;
    c.top = 1.0 - (alpha + 1.0) / (r + s2);
    c.bottom = 1.0 - (alpha + 1.0) / (alpha * s2 + r);
    return c;
}

inline std::string double_label(unsigned top_local, unsigned bottom_local)
{
    return "D/" + local_label(top_local) + "/" + local_label(bottom_local);
}

/**
 * CHSH <= 2 sqrt(2) together with tilted CHSH <= 2 sqrt(1 + alpha^2).
 *
 * Points: 16 locals, PR boxes 1..7, four split points over the top locals
 * built with the CHSH quantities, four over the bottom locals built with
 * the tilted quantities, and the 16 doubly saturating points
 * l_pr PR_0 + l_top L_top_i + l_bot L_bot_j.
 */
inline PolytopeModel double_bound_extremes(double alpha)
{
    if (!(alpha > 1.0))
        throw InvalidArgument("double-bound polytope requires alpha > 1");
    const TsirelsonConstraint chsh = chsh_tsirelson_constraint();
    const TsirelsonConstraint tilted = tilted_tsirelson_constraint(alpha);
    if (chsh.bounds().max_pr_index != 0 || tilted.bounds().max_pr_index != 0)
        throw Error("CHSH and tilted CHSH are expected to share PR box 0");

    PolytopeModel model;
    model.constraints = {chsh, tilted};
    model.provenance.kind = Construction::double_bound;
    model.provenance.alpha = alpha;

    detail::add_locals(model);
    for (unsigned j = 1; j < kPrBoxCount; ++j)
        model.add_point(pr_label(j), pr_box(j));

    const Behavior pr = pr_box(0);
    const auto sat = saturating_local_indices(0);
    const TopBottomSplit split = classify_top_bottom(std::span<const unsigned, 8>(sat), alpha);

    auto add_split = [&](const TsirelsonConstraint& c, unsigned local) {
        const double bi = c.value(local_deterministic(local));
        const double lambda = (c.bound() - bi) / (c.bounds().nsb - bi);
        const Behavior l = local_deterministic(local);
        model.add_point(split_label(0, local), combine({{lambda, &pr}, {1.0 - lambda, &l}}));
    };
    for (unsigned t : split.top)
        add_split(chsh, t);
    for (unsigned b : split.bottom)
        add_split(tilted, b);

    const DoubleBoundCoefficients lam = double_bound_coefficients(alpha);
    for (unsigned t : split.top) {
        const Behavior lt = local_deterministic(t);
        for (unsigned b : split.bottom) {
            const Behavior lb = local_deterministic(b);
            model.add_point(double_label(t, b),
                            combine({{lam.pr, &pr}, {lam.top, &lt}, {lam.bottom, &lb}}));
        }
    }
    return model;
}

// ---------------------------------------------------------------------------
// Audits

struct PointAudit
{
    bool nonnegative = true;
    bool normalized = true;
    bool no_signaling = true;
    bool within_constraints = true;
    double max_constraint_excess = -std::numeric_limits<double>::infinity();

    bool passed() const { return nonnegative && normalized && no_signaling && within_constraints; }
};

/// Structural checks on raw values (which need not form a valid Behavior).
inline PointAudit audit_point(const Vec16& v, const std::vector<TsirelsonConstraint>& constraints,
                              double tolerance = kStructuralTolerance)
{
    PointAudit a;
    for (std::size_t s = 0; s < 4; ++s) {
        double row = 0.0;
        for (std::size_t o = 0; o < 4; ++o) {
            const double x = v[cell_index(s, o)];
            if (!std::isfinite(x) || x < -tolerance || x > 1.0 + tolerance)
                a.nonnegative = false;
            row += x;
        }
        if (!(std::abs(row - 1.0) <= tolerance))
            a.normalized = false;
    }
    auto alice_plus = [&](std::size_t s) { return v[cell_index(s, 0)] + v[cell_index(s, 1)]; };
    auto bob_plus = [&](std::size_t s) { return v[cell_index(s, 0)] + v[cell_index(s, 2)]; };
    const double sig = std::max({std::abs(alice_plus(0) - alice_plus(1)),
                                 std::abs(alice_plus(2) - alice_plus(3)),
                                 std::abs(bob_plus(0) - bob_plus(2)),
                                 std::abs(bob_plus(1) - bob_plus(3))});
    a.no_signaling = sig <= tolerance;
    for (const auto& c : constraints) {
        double value = 0.0;
        for (std::size_t i = 0; i < kCells; ++i)
            value += c.functional()[i] * v[i];
        a.max_constraint_excess = std::max(a.max_constraint_excess, value - c.bound());
    }
    a.within_constraints = !(a.max_constraint_excess > tolerance);
    return a;
}

// ---------------------------------------------------------------------------
// Decomposition

struct DecompositionWeights
{
    std::map<std::string, double> weights; // positive weights only
    double reconstruction_error = 0.0;     // max-norm
    bool used_substitution = false;
    std::size_t substitution_steps = 0;

    double total() const
    {
        double s = 0.0;
        for (const auto& [label, w] : weights)
            s += w;
        return s;
    }

    Vec16 reconstruct(const PolytopeModel& model) const
    {
        Vec16 v{};
        for (const auto& [label, w] : weights) {
            const auto idx = model.index_of(label);
            if (!idx)
                throw InvalidArgument("decomposition refers to unknown point " + label);
            for (std::size_t i = 0; i < kCells; ++i)
                v[i] += w * model.points[*idx].behavior[i];
        }
        return v;
    }
};

namespace detail {

inline void check_constraints(const Behavior& p, const PolytopeModel& model)
{
    for (const auto& c : model.constraints) {
        const double excess = c.excess(p);
        if (excess > kSolverTolerance)
            throw ConstraintViolated("behavior violates constraint '" + c.name() + "' by " +
                                     std::to_string(excess));
    }
}

inline double max_error(const Vec16& a, const Behavior& b)
{
    double e = 0.0;
    for (std::size_t i = 0; i < kCells; ++i)
        e = std::max(e, std::abs(a[i] - b[i]));
    return e;
}

/// L1 distance from p to the convex hull of the model points whose mask
/// entry is set, with weights summing to one. Returns the LP result over
/// columns [weights | u | v].
inline solver::LpResult hull_distance_lp(const PolytopeModel& model, const Behavior& p,
                                         const std::vector<bool>& use)
{
    std::vector<std::size_t> cols;
    for (std::size_t j = 0; j < model.points.size(); ++j)
        if (use[j])
            cols.push_back(j);
    const auto k = static_cast<Eigen::Index>(cols.size());
    constexpr Eigen::Index rows = kCells + 1;

    solver::LinearProgram lp;
    lp.A = Eigen::MatrixXd::Zero(rows, k + 2 * rows);
    lp.b = Eigen::VectorXd::Zero(rows);
    lp.c = Eigen::VectorXd::Zero(k + 2 * rows);
    for (Eigen::Index j = 0; j < k; ++j) {
        const Behavior& e = model.points[cols[static_cast<std::size_t>(j)]].behavior;
        for (std::size_t i = 0; i < kCells; ++i)
            lp.A(static_cast<Eigen::Index>(i), j) = e[i];
        lp.A(kCells, j) = 1.0;
    }
    for (Eigen::Index r = 0; r < rows; ++r) {
        lp.A(r, k + r) = 1.0;
        lp.A(r, k + rows + r) = -1.0;
        lp.c(k + r) = 1.0;
        lp.c(k + rows + r) = 1.0;
        lp.b(r) = r < static_cast<Eigen::Index>(kCells) ? p[static_cast<std::size_t>(r)] : 1.0;
    }
    return solver::solve_lp(lp);
}

} // namespace detail

/**
 * Convex weights over the model's points reproducing p, found by an LP
 * feasibility solve.
 *
 * Throws InvalidArgument when p is signaling, ConstraintViolated when p
 * exceeds a model bound by more than kSolverTolerance, and NotInPolytope
 * when no convex combination matches to kDecompositionTolerance.
 */
inline DecompositionWeights decompose(const Behavior& p, const PolytopeModel& model)
{
    if (!p.is_no_signaling(kSolverTolerance))
        throw InvalidArgument("behavior is signaling");
    detail::check_constraints(p, model);
    if (model.points.empty())
        throw NotInPolytope("model has no points");

    const auto k = static_cast<Eigen::Index>(model.points.size());
    constexpr Eigen::Index rows = kCells + 1;
    solver::LinearProgram lp;
    lp.A = Eigen::MatrixXd::Zero(rows, k);
    lp.b = Eigen::VectorXd::Zero(rows);
    lp.c = Eigen::VectorXd::Zero(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        const Behavior& e = model.points[static_cast<std::size_t>(j)].behavior;
        for (std::size_t i = 0; i < kCells; ++i)
            lp.A(static_cast<Eigen::Index>(i), j) = e[i];
        lp.A(kCells, j) = 1.0;
    }
    for (std::size_t i = 0; i < kCells; ++i)
        lp.b(static_cast<Eigen::Index>(i)) = p[i];
    lp.b(kCells) = 1.0;

    const solver::LpResult res = solver::solve_lp(lp);
    if (res.status != solver::LpStatus::optimal)
        throw NotInPolytope("behavior is not a convex combination of the model points");

    DecompositionWeights out;
    const double total = res.x.sum();
    for (Eigen::Index j = 0; j < k; ++j)
        if (res.x(j) > 0.0)
            out.weights[model.points[static_cast<std::size_t>(j)].label] = res.x(j) / total;
    out.reconstruction_error = detail::max_error(out.reconstruct(model), p);
    if (out.reconstruction_error > kDecompositionTolerance)
        throw NotInPolytope("decomposition residual " + std::to_string(out.reconstruction_error) +
                            " exceeds tolerance");
    return out;
}

/**
 * A behavior written as p_pr PR_1 + sum_i p_i L_i, where PR_1 is the PR box
 * cut by the model's constraints and L_1..L_8 are its CHSH-saturating
 * locals in saturating_local_indices order.
 */
struct ConeWeights
{
    double pr = 0.0;
    std::array<double, 8> locals{};

    Behavior behavior(unsigned pr_index) const
    {
        const Behavior box = pr_box(pr_index);
        const auto idx = saturating_local_indices(pr_index);
        Vec16 v{};
        for (std::size_t i = 0; i < kCells; ++i)
            v[i] = pr * box[i];
        for (std::size_t j = 0; j < 8; ++j) {
            const Behavior l = local_deterministic(idx[j]);
            for (std::size_t i = 0; i < kCells; ++i)
                v[i] += locals[j] * l[i];
        }
        return Behavior(v);
    }
};

namespace detail {

struct SubstitutionState
{
    double pr = 0.0;
    std::map<unsigned, double> locals; // local index -> weight
    std::map<std::string, double> out;
    std::size_t steps = 0;
};

inline void credit(std::map<std::string, double>& m, const std::string& label, double w)
{
    if (w > 0.0)
        m[label] += w;
}

/**
 * Trades PR weight against the listed locals, in order, for split points of
 * the constraint (bound tb, maximum nsb). For each local L with weight p_l
 * and value b_l:
 *
 *   if tb > b_l and p_l >= (nsb - tb)/(tb - b_l) p_pr:
 *       p_pr PR + p_l L = p_pr (nsb - b_l)/(tb - b_l) E + [p_l - (nsb - tb)/(tb - b_l) p_pr] L
 *       and the PR weight is gone;
 *   otherwise:
 *       p_pr PR + p_l L = p_l (nsb - b_l)/(nsb - tb) E + [p_pr - (tb - b_l)/(nsb - tb) p_l] PR.
 */
inline void substitute_cycle(SubstitutionState& st, const PolytopeModel& model,
                             const TsirelsonConstraint& c, unsigned pr_index,
                             const std::vector<unsigned>& order)
{
    const double nsb = c.bounds().nsb;
    const double tb = c.bound();
    const Behavior pr = pr_box(pr_index);
    for (unsigned idx : order) {
        if (st.pr <= 0.0)
            break;
        const Behavior l = local_deterministic(idx);
        const double bl = c.value(l);
        const double lambda = (tb - bl) / (nsb - bl);
        const auto e_pos = model.find_point(combine({{lambda, &pr}, {1.0 - lambda, &l}}));
        if (!e_pos)
            throw Error("split point for " + local_label(idx) + " is missing from the model");
        const std::string& e_label = model.points[*e_pos].label;
        double& pl = st.locals[idx];
        ++st.steps;

        if (tb - bl > 0.0 && pl >= (nsb - tb) / (tb - bl) * st.pr) {
            credit(st.out, e_label, st.pr * (nsb - bl) / (tb - bl));
            pl = std::max(0.0, pl - (nsb - tb) / (tb - bl) * st.pr);
            st.pr = 0.0;
        } else {
            credit(st.out, e_label, pl * (nsb - bl) / (nsb - tb));
            st.pr = std::max(0.0, st.pr - (tb - bl) / (nsb - tb) * pl);
            pl = 0.0;
        }
    }
}

} // namespace detail

/**
 * Decomposes a behavior given in cone form. Single- and double-bound
 * models use weight substitution; other models fall back to the LP.
 */
inline DecompositionWeights decompose(const ConeWeights& cone, const PolytopeModel& model)
{
    double sum = cone.pr;
    bool nonneg = cone.pr >= 0.0;
    for (double w : cone.locals) {
        sum += w;
        nonneg = nonneg && w >= 0.0;
    }
    if (!nonneg || std::abs(sum - 1.0) > kStructuralTolerance)
        throw InvalidArgument("cone weights must be nonnegative and sum to 1");

    const Construction kind = model.provenance.kind;
    if (kind != Construction::single_bound && kind != Construction::double_bound)
        return decompose(cone.behavior(0), model);

    const unsigned k = model.constraints.front().bounds().max_pr_index;
    const Behavior p = cone.behavior(k);
    detail::check_constraints(p, model);

    const auto sat = saturating_local_indices(k);
    detail::SubstitutionState st;
    st.pr = cone.pr;
    for (std::size_t i = 0; i < 8; ++i)
        st.locals[sat[i]] = cone.locals[i];

    if (kind == Construction::single_bound) {
        detail::substitute_cycle(st, model, model.constraints.front(), k,
                                 std::vector<unsigned>(sat.begin(), sat.end()));
    } else {
        const double alpha = model.provenance.alpha.value_or(0.0);
        const TsirelsonConstraint& chsh = model.constraints.at(0);
        const TsirelsonConstraint& tilted = model.constraints.at(1);
        const TopBottomSplit split = classify_top_bottom(std::span<const unsigned, 8>(sat), alpha);
        const DoubleBoundCoefficients lam = double_bound_coefficients(alpha);

        // Doubly saturating points while PR, top and bottom weight all remain.
        while (st.pr > 0.0) {
            const auto top = std::find_if(split.top.begin(), split.top.end(),
                                          [&](unsigned i) { return st.locals[i] > 0.0; });
            const auto bot = std::find_if(split.bottom.begin(), split.bottom.end(),
                                          [&](unsigned i) { return st.locals[i] > 0.0; });
            if (top == split.top.end() || bot == split.bottom.end())
                break;
            double& wt = st.locals[*top];
            double& wb = st.locals[*bot];
            const double amount = std::min({st.pr / lam.pr, wt / lam.top, wb / lam.bottom});
            detail::credit(st.out, double_label(*top, *bot), amount);
            ++st.steps;
            if (amount == st.pr / lam.pr) {
                st.pr = 0.0;
                wt = std::max(0.0, wt - amount * lam.top);
                wb = std::max(0.0, wb - amount * lam.bottom);
            } else if (amount == wt / lam.top) {
                wt = 0.0;
                st.pr = std::max(0.0, st.pr - amount * lam.pr);
                wb = std::max(0.0, wb - amount * lam.bottom);
            } else {
                wb = 0.0;
                st.pr = std::max(0.0, st.pr - amount * lam.pr);
                wt = std::max(0.0, wt - amount * lam.top);
            }
        }
        if (st.pr > 0.0) {
            const bool top_left = std::any_of(split.top.begin(), split.top.end(),
                                              [&](unsigned i) { return st.locals[i] > 0.0; });
            if (top_left)
                detail::substitute_cycle(st, model, chsh, k,
                                         std::vector<unsigned>(split.top.begin(), split.top.end()));
            else
                detail::substitute_cycle(st, model, tilted, k,
                                         std::vector<unsigned>(split.bottom.begin(), split.bottom.end()));
        }
    }

    // Leftover PR weight at rounding level comes from behaviors sitting on
    // the bound; anything larger means the cycle ran out of locals.
    if (st.pr > kDecompositionTolerance)
        throw ConstraintViolated("PR weight remains after substitution: " + std::to_string(st.pr));
    for (const auto& [idx, w] : st.locals)
        detail::credit(st.out, local_label(idx), w);

    DecompositionWeights out;
    out.used_substitution = true;
    out.substitution_steps = st.steps;
    const double total = [&] {
        double s = 0.0;
        for (const auto& [label, w] : st.out)
            s += w;
        return s;
    }();
    for (const auto& [label, w] : st.out) {
        if (!model.index_of(label))
            throw Error("substitution produced unknown point " + label);
        out.weights[label] = w / total;
    }
    out.reconstruction_error = detail::max_error(out.reconstruct(model), p);
    return out;
}

// ---------------------------------------------------------------------------
// Extremality

struct PointExtremality
{
    std::string label;
    double margin = 0.0; // L1 distance to the hull of the other points
    bool passed = false;
};

struct ExtremalityReport
{
    std::vector<PointExtremality> points;

    bool all_passed() const
    {
        return std::all_of(points.begin(), points.end(), [](const auto& p) { return p.passed; });
    }

    double min_margin() const
    {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& p : points)
            m = std::min(m, p.margin);
        return m;
    }
};

/// For each point, the L1 distance to the convex hull of all the others;
/// the point passes when that distance is at least kExtremalityMargin.
inline ExtremalityReport verify_extremality(const PolytopeModel& model)
{
    ExtremalityReport report;
    std::vector<bool> use(model.points.size(), true);
    for (std::size_t j = 0; j < model.points.size(); ++j) {
        PointExtremality pe;
        pe.label = model.points[j].label;
        use[j] = false;
        if (model.points.size() == 1) {
            pe.margin = std::numeric_limits<double>::infinity();
        } else {
            const solver::LpResult res = detail::hull_distance_lp(model, model.points[j].behavior, use);
            if (res.status != solver::LpStatus::optimal)
                throw SolverError("hull distance LP did not reach an optimum");
            pe.margin = res.objective;
        }
        use[j] = true;
        pe.passed = pe.margin >= kExtremalityMargin;
        report.points.push_back(std::move(pe));
    }
    return report;
}

} // namespace tsirelson

#endif
