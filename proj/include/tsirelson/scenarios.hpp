#ifndef TSIRELSON_SCENARIOS_HPP
#define TSIRELSON_SCENARIOS_HPP

// Reference behaviors used as optimization targets.

#include <array>
#include <cmath>
#include <span>
#include <string>

#include "tsirelson/bell.hpp"

namespace tsirelson {

/// Probability of each setting pair, in the order ab, ab', a'b, a'b'.
class SettingsDistribution
{
public:
    SettingsDistribution() : weights_{0.25, 0.25, 0.25, 0.25} {}

    explicit SettingsDistribution(const std::array<double, 4>& weights) : weights_(weights)
    {
        double sum = 0.0;
        for (double w : weights_) {
            if (!std::isfinite(w) || w < 0.0)
                throw InvalidArgument("settings probabilities must be nonnegative");
            sum += w;
        }
        if (std::abs(sum - 1.0) > kStructuralTolerance)
            throw InvalidArgument("settings probabilities must sum to 1");
    }

    static SettingsDistribution uniform() { return {}; }

    double operator[](std::size_t setting) const { return weights_[setting]; }
    const std::array<double, 4>& weights() const { return weights_; }

private:
    std::array<double, 4> weights_;
};

struct TrialDistribution
{
    Behavior behavior;
    SettingsDistribution settings;

    /// q(o, s) = pi(s) P(o|s) for the flattened cell index.
    double joint(std::size_t cell) const { return settings[cell / 4] * behavior[cell]; }

    Vec16 joint() const
    {
        Vec16 q{};
        for (std::size_t i = 0; i < kCells; ++i)
            q[i] = joint(i);
        return q;
    }
};

/// E_s = P(same outcome | s) - P(different outcome | s) for each setting pair.
inline std::array<double, 4> correlators(const Behavior& p)
{
    std::array<double, 4> e{};
    for (std::size_t s = 0; s < 4; ++s)
        e[s] = p.at(s, 0) - p.at(s, 1) - p.at(s, 2) + p.at(s, 3);
    return e;
}

/// Uniform-marginal behavior with the given correlators:
/// P(o|s) = (1 +/- E_s)/4, "+" for equal outcomes.
inline Behavior behavior_from_correlators(const std::array<double, 4>& e)
{
    Vec16 v{};
    for (std::size_t s = 0; s < 4; ++s) {
        v[cell_index(s, 0)] = (1.0 + e[s]) / 4.0;
        v[cell_index(s, 1)] = (1.0 - e[s]) / 4.0;
        v[cell_index(s, 2)] = (1.0 - e[s]) / 4.0;
        v[cell_index(s, 3)] = (1.0 + e[s]) / 4.0;
    }
    return Behavior(v);
}

/**
 * The quantum behavior attaining the tilted CHSH bound 2 sqrt(1 + alpha^2):
 * uniform marginals with E_ab = E_ab' = alpha/r, E_a'b = 1/r and
 * E_a'b' = -1/r, where r = sqrt(1 + alpha^2). alpha = 1 gives the CHSH
 * maximizer.
 */
inline Behavior tilted_maximizer(double alpha)
{
    if (!(alpha >= 1.0))
        throw InvalidArgument("tilted maximizer requires alpha >= 1");
    const double r = std::sqrt(1.0 + alpha * alpha);
    return behavior_from_correlators({alpha / r, alpha / r, 1.0 / r, -1.0 / r});
}

inline Behavior chsh_maximizer() { return tilted_maximizer(1.0); }

/// Every outcome pair equally likely under every setting pair.
inline Behavior uniform_noise()
{
    return behavior_from_correlators({0.0, 0.0, 0.0, 0.0});
}

inline Behavior mix(std::span<const Behavior> behaviors, std::span<const double> weights)
{
    if (behaviors.size() != weights.size() || behaviors.empty())
        throw InvalidArgument("mix needs one weight per behavior");
    double sum = 0.0;
    for (double w : weights) {
        if (!std::isfinite(w) || w < 0.0)
            throw InvalidArgument("mixture weights must be nonnegative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > kStructuralTolerance)
        throw InvalidArgument("mixture weights must sum to 1");
    Vec16 v{};
    for (std::size_t k = 0; k < behaviors.size(); ++k)
        for (std::size_t i = 0; i < kCells; ++i)
            v[i] += weights[k] * behaviors[k][i];
    return Behavior(v);
}

/**
 * Named scenarios:
 *   "chsh-max"                         CHSH maximizer
 *   "tilted:alpha=A", "tilted:α=A",
 *   "tilted:A"                         tilted maximizer at alpha = A
 *   "uniform"                          uniform noise (a local behavior)
 *   "local:L++0+" or "local:N"         a local deterministic behavior
 *   "pr:K"                             PR box K
 */
inline Behavior scenario_by_name(const std::string& name)
{
    auto parse_number = [&](const std::string& text) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(text, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != text.size())
            throw InvalidArgument("bad number in scenario '" + name + "'");
        return v;
    };
    auto parse_index = [&](const std::string& text) {
        const double v = parse_number(text);
        if (v < 0.0 || v != std::floor(v) || v > 1e6)
            throw InvalidArgument("scenario '" + name + "' needs a nonnegative integer index");
        return static_cast<unsigned>(v);
    };

    if (name == "chsh-max")
        return chsh_maximizer();
    if (name == "uniform")
        return uniform_noise();
    if (name.rfind("tilted:", 0) == 0) {
        std::string rest = name.substr(7);
        for (const std::string prefix : {"alpha=", "α=", "a="})
            if (rest.rfind(prefix, 0) == 0) {
                rest = rest.substr(prefix.size());
                break;
            }
        return tilted_maximizer(parse_number(rest));
    }
    if (name.rfind("local:", 0) == 0) {
        const std::string rest = name.substr(6);
        for (unsigned i = 0; i < kLocalCount; ++i)
            if (local_label(i) == rest)
                return local_deterministic(i);
        return local_deterministic(parse_index(rest));
    }
    if (name.rfind("pr:", 0) == 0)
        return pr_box(parse_index(name.substr(3)));
    throw InvalidArgument("unknown scenario '" + name + "'");
}

} // namespace tsirelson

#endif
