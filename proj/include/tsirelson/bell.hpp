#ifndef TSIRELSON_BELL_HPP
#define TSIRELSON_BELL_HPP

/**
 * Behaviors and Bell functionals of the (2,2,2) Bell scenario.
 *
 * A behavior is the vector of 16 conditional probabilities P(oA oB | sA sB).
 * Entries are stored row-major: the row is the setting pair, in the order
 * ab, ab', a'b, a'b', and the column is the outcome pair, in the order
 * ++, +0, 0+, 00.
 *
 * Settings and outcomes are coded as bits where needed: a = b = 0,
 * a' = b' = 1, outcome "0" = 0 and outcome "+" = 1.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>

#include "tsirelson/errors.hpp"

namespace tsirelson {

inline constexpr std::size_t kCells = 16;
using Vec16 = std::array<double, kCells>;

/// Absolute tolerance for structural checks on exactly representable data.
inline constexpr double kStructuralTolerance = 1e-12;
/// Absolute tolerance for checks on optimizer output.
inline constexpr double kSolverTolerance = 1e-9;

enum class Outcome : unsigned { zero = 0, plus = 1 };

inline constexpr std::array<std::string_view, 4> kSettingNames{"ab", "ab'", "a'b", "a'b'"};
inline constexpr std::array<std::string_view, 4> kOutcomeNames{"++", "+0", "0+", "00"};

constexpr std::size_t setting_index(unsigned alice_bit, unsigned bob_bit)
{
    return 2 * alice_bit + bob_bit;
}

constexpr std::size_t outcome_index(unsigned alice_bit, unsigned bob_bit)
{
    return 2 * (1 - alice_bit) + (1 - bob_bit);
}

constexpr std::size_t cell_index(std::size_t setting, std::size_t outcome)
{
    return 4 * setting + outcome;
}

/// Outcome bits (alice, bob) of an outcome-pair index.
constexpr std::array<unsigned, 2> outcome_bits(std::size_t outcome)
{
    return {outcome < 2 ? 1u : 0u, outcome % 2 == 0 ? 1u : 0u};
}

/// Setting bits (alice, bob) of a setting-pair index.
constexpr std::array<unsigned, 2> setting_bits(std::size_t setting)
{
    return {static_cast<unsigned>(setting / 2), static_cast<unsigned>(setting % 2)};
}

/**
 * A point in R^16 whose four setting rows are probability distributions.
 *
 * Construction validates nonnegativity and row normalization to
 * kStructuralTolerance. No-signaling is not required; query it with
 * is_no_signaling().
 */
class Behavior
{
public:
    explicit Behavior(const Vec16& values, double tolerance = kStructuralTolerance)
        : values_(values)
    {
        for (std::size_t s = 0; s < 4; ++s) {
            double row = 0.0;
            for (std::size_t o = 0; o < 4; ++o) {
                double v = values_[cell_index(s, o)];
                if (!std::isfinite(v) || v < -tolerance || v > 1.0 + tolerance)
                    throw InvalidBehavior("behavior entry out of [0, 1] in row " +
                                          std::string(kSettingNames[s]));
                row += v;
            }
            if (std::abs(row - 1.0) > tolerance)
                throw InvalidBehavior("behavior row " + std::string(kSettingNames[s]) +
                                      " does not sum to 1");
        }
    }

    const Vec16& values() const noexcept { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    double at(std::size_t setting, std::size_t outcome) const
    {
        return values_[cell_index(setting, outcome)];
    }

    /// Largest violation of the four marginal equalities.
    double signaling_residual() const
    {
        auto alice_plus = [&](std::size_t s) { return at(s, 0) + at(s, 1); };
        auto bob_plus = [&](std::size_t s) { return at(s, 0) + at(s, 2); };
        double r = 0.0;
        r = std::max(r, std::abs(alice_plus(0) - alice_plus(1)));
        r = std::max(r, std::abs(alice_plus(2) - alice_plus(3)));
        r = std::max(r, std::abs(bob_plus(0) - bob_plus(2)));
        r = std::max(r, std::abs(bob_plus(1) - bob_plus(3)));
        return r;
    }

    bool is_no_signaling(double tolerance = kStructuralTolerance) const
    {
        return signaling_residual() <= tolerance;
    }

    /// Max-norm distance between two behaviors.
    double distance(const Behavior& other) const
    {
        double d = 0.0;
        for (std::size_t i = 0; i < kCells; ++i)
            d = std::max(d, std::abs(values_[i] - other.values_[i]));
        return d;
    }

    friend bool operator==(const Behavior&, const Behavior&) = default;

private:
    Vec16 values_;
};

/// Linear functional on behaviors, same index convention as Behavior.
class BellFunctional
{
public:
    BellFunctional() { coefficients_.fill(0.0); }

    explicit BellFunctional(const Vec16& coefficients) : coefficients_(coefficients)
    {
        for (double c : coefficients_)
            if (!std::isfinite(c))
                throw InvalidArgument("Bell functional has a non-finite coefficient");
    }

    const Vec16& values() const noexcept { return coefficients_; }
    double operator[](std::size_t i) const { return coefficients_[i]; }

    friend bool operator==(const BellFunctional&, const BellFunctional&) = default;

private:
    Vec16 coefficients_;
};

inline double evaluate(const BellFunctional& b, const Behavior& p)
{
    double sum = 0.0;
    for (std::size_t i = 0; i < kCells; ++i)
        sum += b[i] * p[i];
    return sum;
}

// ---------------------------------------------------------------------------
// Extreme points of the no-signaling polytope

inline constexpr unsigned kLocalCount = 16;
inline constexpr unsigned kPrBoxCount = 8;

/// Deterministic behavior where Alice answers f(a), f(a') and Bob g(b), g(b').
inline Behavior local_deterministic(Outcome f_a, Outcome f_ap, Outcome g_b, Outcome g_bp)
{
    const std::array<unsigned, 2> f{static_cast<unsigned>(f_a), static_cast<unsigned>(f_ap)};
    const std::array<unsigned, 2> g{static_cast<unsigned>(g_b), static_cast<unsigned>(g_bp)};
    Vec16 v{};
    for (unsigned sa = 0; sa < 2; ++sa)
        for (unsigned sb = 0; sb < 2; ++sb)
            v[cell_index(setting_index(sa, sb), outcome_index(f[sa], g[sb]))] = 1.0;
    return Behavior(v);
}

/// Local deterministic behavior by 4-bit index (f(a), f(a'), g(b), g(b')),
/// most significant bit first, with "+" coded as 1.
inline Behavior local_deterministic(unsigned index)
{
    if (index >= kLocalCount)
        throw InvalidArgument("local deterministic index out of range: " + std::to_string(index));
    auto bit = [&](unsigned shift) { return static_cast<Outcome>((index >> shift) & 1u); };
    return local_deterministic(bit(3), bit(2), bit(1), bit(0));
}

/// "L" followed by the answers f(a) f(a') g(b) g(b'), e.g. "L++0+".
inline std::string local_label(unsigned index)
{
    if (index >= kLocalCount)
        throw InvalidArgument("local deterministic index out of range: " + std::to_string(index));
    std::string s = "L";
    for (int shift = 3; shift >= 0; --shift)
        s += ((index >> shift) & 1u) ? '+' : '0';
    return s;
}

/// Parity bits (mu, nu, gamma) of PR box k, most significant first.
constexpr std::array<unsigned, 3> pr_parity_bits(unsigned k)
{
    return {(k >> 2) & 1u, (k >> 1) & 1u, k & 1u};
}

/// True iff outcome bits (oa, ob) under setting bits (sa, sb) lie in the
/// support of PR box k: oa ^ ob == sa*sb ^ mu*sa ^ nu*sb ^ gamma.
constexpr bool pr_support(unsigned k, unsigned sa, unsigned sb, unsigned oa, unsigned ob)
{
    const auto [mu, nu, gamma] = pr_parity_bits(k);
    return (oa ^ ob) == ((sa & sb) ^ (mu & sa) ^ (nu & sb) ^ gamma);
}

inline Behavior pr_box(unsigned k)
{
    if (k >= kPrBoxCount)
        throw InvalidArgument("PR box index out of range: " + std::to_string(k));
    Vec16 v{};
    for (std::size_t s = 0; s < 4; ++s) {
        const auto [sa, sb] = setting_bits(s);
        for (std::size_t o = 0; o < 4; ++o) {
            const auto [oa, ob] = outcome_bits(o);
            if (pr_support(k, sa, sb, oa, ob))
                v[cell_index(s, o)] = 0.5;
        }
    }
    return Behavior(v);
}

inline std::string pr_label(unsigned k)
{
    if (k >= kPrBoxCount)
        throw InvalidArgument("PR box index out of range: " + std::to_string(k));
    return "PR" + std::to_string(k);
}

inline std::array<Behavior, kLocalCount> all_locals()
{
    return [&]<std::size_t... I>(std::index_sequence<I...>) {
        return std::array<Behavior, kLocalCount>{local_deterministic(static_cast<unsigned>(I))...};
    }(std::make_index_sequence<kLocalCount>{});
}

inline std::array<Behavior, kPrBoxCount> all_pr_boxes()
{
    return [&]<std::size_t... I>(std::index_sequence<I...>) {
        return std::array<Behavior, kPrBoxCount>{pr_box(static_cast<unsigned>(I))...};
    }(std::make_index_sequence<kPrBoxCount>{});
}

// ---------------------------------------------------------------------------
// CHSH family

/// The CHSH version maximized (value 4) by pr_box(k). k = 0 is the
/// textbook CHSH functional; other versions are outcome relabelings of it.
inline BellFunctional chsh_version(unsigned k)
{
    if (k >= kPrBoxCount)
        throw InvalidArgument("PR box index out of range: " + std::to_string(k));
    Vec16 v{};
    for (std::size_t s = 0; s < 4; ++s) {
        const auto [sa, sb] = setting_bits(s);
        for (std::size_t o = 0; o < 4; ++o) {
            const auto [oa, ob] = outcome_bits(o);
            v[cell_index(s, o)] = pr_support(k, sa, sb, oa, ob) ? 1.0 : -1.0;
        }
    }
    return BellFunctional(v);
}

inline BellFunctional chsh_functional() { return chsh_version(0); }

/// Tilted CHSH: the ab and ab' correlator terms weighted by alpha.
inline BellFunctional tilted_functional(double alpha)
{
    if (!(alpha >= 1.0))
        throw InvalidArgument("tilted CHSH requires alpha >= 1");
    Vec16 v = chsh_functional().values();
    for (std::size_t s : {std::size_t{0}, std::size_t{1}})
        for (std::size_t o = 0; o < 4; ++o)
            v[cell_index(s, o)] *= alpha;
    return BellFunctional(v);
}

// ---------------------------------------------------------------------------
// Bounds

struct BoundsSummary
{
    double lb = 0.0;
    double nsb = 0.0;
    unsigned max_pr_index = 0;
};

/**
 * Local and no-signaling maxima of a functional, taken over the 16 local
 * deterministic behaviors and the 24 no-signaling extreme points.
 *
 * Throws DegenerateFunctional when NSB - LB <= kStructuralTolerance.
 */
inline BoundsSummary compute_bounds(const BellFunctional& b)
{
    BoundsSummary out;
    out.lb = -std::numeric_limits<double>::infinity();
    for (unsigned i = 0; i < kLocalCount; ++i)
        out.lb = std::max(out.lb, evaluate(b, local_deterministic(i)));

    double best_pr = -std::numeric_limits<double>::infinity();
    unsigned above_lb = 0;
    for (unsigned k = 0; k < kPrBoxCount; ++k) {
        double v = evaluate(b, pr_box(k));
        if (v > best_pr) {
            best_pr = v;
            out.max_pr_index = k;
        }
        if (v > out.lb + kStructuralTolerance)
            ++above_lb;
    }
    out.nsb = std::max(out.lb, best_pr);
    if (out.nsb - out.lb <= kStructuralTolerance)
        throw DegenerateFunctional("Bell functional has LB == NSB");
    if (above_lb != 1)
        throw Error("more than one PR box exceeds the local bound");
    return out;
}

/// Indices of the 8 local deterministic behaviors saturating (value 2) the
/// CHSH version maximized by pr_box(k), in ascending index order.
inline std::array<unsigned, 8> saturating_local_indices(unsigned k)
{
    const BellFunctional chsh = chsh_version(k);
    std::array<unsigned, 8> out{};
    std::size_t n = 0;
    for (unsigned i = 0; i < kLocalCount; ++i) {
        if (std::abs(evaluate(chsh, local_deterministic(i)) - 2.0) <= kStructuralTolerance) {
            if (n == out.size())
                throw Error("too many saturating local behaviors");
            out[n++] = i;
        }
    }
    if (n != out.size())
        throw Error("expected 8 saturating local behaviors");
    return out;
}

inline std::array<Behavior, 8> saturating_locals(unsigned k)
{
    const auto idx = saturating_local_indices(k);
    return [&]<std::size_t... I>(std::index_sequence<I...>) {
        return std::array<Behavior, 8>{local_deterministic(idx[I])...};
    }(std::make_index_sequence<8>{});
}

/// The single cell where a saturating local has support outside pr_box(k).
inline std::size_t extra_support_cell(const Behavior& local, unsigned k)
{
    const Behavior pr = pr_box(k);
    std::size_t found = kCells;
    for (std::size_t i = 0; i < kCells; ++i) {
        if (local[i] > 0.5 && pr[i] == 0.0) {
            if (found != kCells)
                throw InvalidArgument("behavior has more than one cell outside the PR support");
            found = i;
        }
    }
    if (found == kCells)
        throw InvalidArgument("behavior has no cell outside the PR support");
    return found;
}

/// Index of a local deterministic behavior, or throws if p is not one.
inline unsigned local_index_of(const Behavior& p)
{
    for (unsigned i = 0; i < kLocalCount; ++i)
        if (p == local_deterministic(i))
            return i;
    throw InvalidArgument("behavior is not local deterministic");
}

struct TopBottomSplit
{
    std::array<unsigned, 4> top{};    // tilted value 2
    std::array<unsigned, 4> bottom{}; // tilted value 2 alpha
};

/**
 * Split the CHSH-saturating locals of pr_box(0) by their tilted-CHSH value.
 *
 * The split is read off the row holding each local's extra support cell
 * (ab or ab' -> top, a'b or a'b' -> bottom), so it stays defined as
 * alpha -> 1. The tilted values are then checked against 2 and 2 alpha.
 */
inline TopBottomSplit classify_top_bottom(std::span<const unsigned, 8> local_indices, double alpha)
{
    const BellFunctional tilted = tilted_functional(alpha);
    TopBottomSplit out;
    std::size_t n_top = 0;
    std::size_t n_bot = 0;
    for (unsigned idx : local_indices) {
        const Behavior l = local_deterministic(idx);
        const std::size_t row = extra_support_cell(l, 0) / 4;
        const bool top = row < 2;
        const double expected = top ? 2.0 : 2.0 * alpha;
        if (std::abs(evaluate(tilted, l) - expected) > kStructuralTolerance * std::max(1.0, alpha))
            throw InvalidArgument("local " + local_label(idx) +
                                  " has tilted value neither 2 nor 2*alpha");
        if (top) {
            if (n_top == 4)
                throw InvalidArgument("more than 4 top locals");
            out.top[n_top++] = idx;
        } else {
            if (n_bot == 4)
                throw InvalidArgument("more than 4 bottom locals");
            out.bottom[n_bot++] = idx;
        }
    }
    return out;
}

inline std::pair<std::array<Behavior, 4>, std::array<Behavior, 4>>
classify_top_bottom(std::span<const Behavior, 8> locals, double alpha)
{
    std::array<unsigned, 8> idx{};
    for (std::size_t i = 0; i < 8; ++i)
        idx[i] = local_index_of(locals[i]);
    const TopBottomSplit split = classify_top_bottom(std::span<const unsigned, 8>(idx), alpha);
    auto behaviors = [](const std::array<unsigned, 4>& ids) {
        return std::array<Behavior, 4>{local_deterministic(ids[0]), local_deterministic(ids[1]),
                                       local_deterministic(ids[2]), local_deterministic(ids[3])};
    };
    return {behaviors(split.top), behaviors(split.bottom)};
}

} // namespace tsirelson

#endif
