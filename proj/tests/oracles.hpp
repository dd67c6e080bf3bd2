// Reference computations used by the tests. None of them call into the
// library code they are compared against.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Cells = std::array<double, 16>;

// Row-major 4x4 tables written out by hand, rows ab, ab', a'b, a'b',
// columns ++, +0, 0+, 00.
inline Cells table(std::initializer_list<std::initializer_list<double>> rows)
{
    Cells c{};
    std::size_t i = 0;
    for (auto r : rows)
        for (double v : r)
            c[i++] = v;
    return c;
}

/// Deterministic strategy: Alice outputs alice[x], Bob bob[y] ('+' = true).
inline Cells deterministic(std::array<bool, 2> alice, std::array<bool, 2> bob)
{
    Cells c{};
    const int settings[4][2] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    for (int s = 0; s < 4; ++s) {
        const bool oa = alice[settings[s][0]];
        const bool ob = bob[settings[s][1]];
        // ++ -> 0, +0 -> 1, 0+ -> 2, 00 -> 3
        const int col = (oa ? 0 : 2) + (ob ? 0 : 1);
        c[4 * s + col] = 1.0;
    }
    return c;
}

inline std::vector<Cells> all_deterministic()
{
    std::vector<Cells> out;
    for (int m = 0; m < 16; ++m)
        out.push_back(deterministic({bool(m & 8), bool(m & 4)}, {bool(m & 2), bool(m & 1)}));
    return out;
}

inline double dot(const Cells& a, const Cells& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < 16; ++i)
        s += a[i] * b[i];
    return s;
}

/// Two-qubit model: |Phi+> = (|00> + |11>)/sqrt2 with real projective
/// measurements in the x-z plane. The "+" outcome of the measurement at
/// angle phi is the projector onto cos(phi/2)|0> + sin(phi/2)|1>.
inline Cells qubit_behavior(std::array<double, 2> alice_angles, std::array<double, 2> bob_angles)
{
    using Vec2 = Eigen::Vector2d;
    auto basis = [](double phi, bool plus) {
        return plus ? Vec2(std::cos(phi / 2), std::sin(phi / 2))
                    : Vec2(-std::sin(phi / 2), std::cos(phi / 2));
    };
    Eigen::Vector4d psi(1.0, 0.0, 0.0, 1.0);
    psi /= std::sqrt(2.0);
    Cells c{};
    const int settings[4][2] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    const bool outcomes[4][2] = {{true, true}, {true, false}, {false, true}, {false, false}};
    for (int s = 0; s < 4; ++s)
        for (int o = 0; o < 4; ++o) {
            const Vec2 u = basis(alice_angles[settings[s][0]], outcomes[o][0]);
            const Vec2 v = basis(bob_angles[settings[s][1]], outcomes[o][1]);
            Eigen::Vector4d uv;
            uv << u(0) * v(0), u(0) * v(1), u(1) * v(0), u(1) * v(1);
            const double amp = uv.dot(psi);
            c[4 * s + o] = amp * amp;
        }
    return c;
}

/// Qubit realization of the tilted-CHSH maximizer: A0 at 0, A1 at pi/2,
/// B0/B1 at +-theta with tan(theta) = 1/alpha.
inline Cells qubit_tilted_maximizer(double alpha)
{
    const double theta = std::atan(1.0 / alpha);
    return qubit_behavior({0.0, M_PI / 2}, {theta, -theta});
}

// ---------------------------------------------------------------------------
// Maximizer of sum_i q_i ln x_i s.t. A x <= 1, x >= 0, through its dual:
//   min over y >= 0 of sum(y) - sum_i q_i ln (A^T y)_i  (+ constants).
// On the simplex sum(y) = 1 this is projected gradient ascent on
// g(y) = sum_i q_i ln (A^T y)_i; the primal optimum is x_i = q_i / (A^T y)_i
// with value sum_i q_i ln q_i - g(y*).

inline Eigen::VectorXd project_simplex(const Eigen::VectorXd& v)
{
    std::vector<double> u(v.data(), v.data() + v.size());
    std::sort(u.begin(), u.end(), std::greater<>());
    double cum = 0.0, theta = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        cum += u[k];
        const double t = (cum - 1.0) / static_cast<double>(k + 1);
        if (u[k] - t > 0.0)
            theta = t;
    }
    return (v.array() - theta).cwiseMax(0.0).matrix();
}

struct DualResult
{
    double primal_value = 0.0;
    Eigen::VectorXd x;
};

inline DualResult projected_gradient(const Eigen::VectorXd& q, const Eigen::MatrixXd& A,
                                     int iterations = 200000)
{
    const Eigen::Index m = A.rows();
    Eigen::VectorXd y = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
    auto g = [&](const Eigen::VectorXd& yy) {
        const Eigen::VectorXd c = A.transpose() * yy;
        double v = 0.0;
        for (Eigen::Index i = 0; i < q.size(); ++i)
            v += q(i) * std::log(c(i));
        return v;
    };
    double step = 1.0;
    double gy = g(y);
    for (int it = 0; it < iterations; ++it) {
        const Eigen::VectorXd c = A.transpose() * y;
        const Eigen::VectorXd grad = A * q.cwiseQuotient(c);
        // Backtracking on the projected arc.
        while (true) {
            const Eigen::VectorXd trial = project_simplex(y + step * grad);
            const Eigen::VectorXd ct = A.transpose() * trial;
            if ((ct.array() > 0.0).all()) {
                const double gt = g(trial);
                const Eigen::VectorXd d = trial - y;
                if (gt >= gy + grad.dot(d) - d.squaredNorm() / (2.0 * step)) {
                    const bool stalled = d.lpNorm<Eigen::Infinity>() < 1e-15;
                    y = trial;
                    gy = gt;
                    step *= 1.5;
                    if (stalled)
                        it = iterations;
                    break;
                }
            }
            step *= 0.5;
            if (step < 1e-20) {
                it = iterations;
                break;
            }
        }
    }
    DualResult out;
    const Eigen::VectorXd c = A.transpose() * y;
    out.x = q.cwiseQuotient(c);
    double qlnq = 0.0;
    for (Eigen::Index i = 0; i < q.size(); ++i)
        if (q(i) > 0.0)
            qlnq += q(i) * std::log(q(i));
    out.primal_value = qlnq - gy;
    return out;
}

} // namespace oracle
