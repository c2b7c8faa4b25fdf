#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "lakevortex/depth.hpp"
#include "lakevortex/errors.hpp"
#include "lakevortex/kernel_table.hpp"
#include "lakevortex/vec2.hpp"

namespace lakevortex {

enum class Regime { Physical, Rescaled };

inline const char* regime_name(Regime r) {
    return r == Regime::Physical ? "physical" : "rescaled";
}

/// alpha = |ln eps| / (4 pi N), the self-interaction strength of a vortex
/// core of size eps among N vortices.
inline double alpha_from_epsilon(double eps, int N) {
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("alpha_from_epsilon: eps must lie in (0,1)");
    if (N < 1) throw DomainError("alpha_from_epsilon: N must be >= 1");
    return std::abs(std::log(eps)) / (2.0 * kTwoPi * N);
}

/// N point vortices of strength 1/N each.
struct VortexEnsemble {
    std::vector<Vec2> positions;
    double alpha = 0.0;
    Regime regime = Regime::Physical;
    double time = 0.0;

    int N() const { return int(positions.size()); }
};

inline double min_separation(const std::vector<Vec2>& q) {
    if (q.size() < 2) throw DomainError("min_separation: need at least two vortices");
    double m2 = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < q.size(); ++i)
        for (size_t j = i + 1; j < q.size(); ++j) m2 = std::min(m2, (q[i] - q[j]).norm2());
    return std::sqrt(m2);
}

inline double min_separation(const VortexEnsemble& s) { return min_separation(s.positions); }

/// Right-hand side of the vortex ODE at the given positions.
///
/// physical:  dq_i/dt = -alpha grad^perp b/b - (1/N) sum_{j!=i} (1/b) grad^perp_x g_b(q_i,q_j)
/// rescaled:  dq_i/dt = -grad^perp b/b - (1/(N alpha)) sum_{j!=i} (1/b) grad^perp_x g_b(q_i,q_j)
inline std::vector<Vec2> pv_rhs(const std::vector<Vec2>& q, double alpha, Regime regime,
                                const KernelTable& table, const DepthField& depth,
                                double collision_threshold) {
    const int N = int(q.size());
    std::vector<PointDepth> pd(N);
    for (int i = 0; i < N; ++i) pd[i] = point_depth(depth, q[i]);

    std::vector<Vec2> v(N, Vec2{0.0, 0.0});
    const double thr2 = collision_threshold * collision_threshold;
    for (int i = 0; i < N; ++i) {
        for (int j = i + 1; j < N; ++j) {
            if ((q[i] - q[j]).norm2() < thr2)
                throw CollisionImminent("vortices " + std::to_string(i) + " and " +
                                        std::to_string(j) + " closer than threshold at t-step");
            const KernelPair kp = table.eval_pair(q[i], q[j], pd[i], pd[j]);
            v[i] += kp.grad_x_xy.perp() / pd[i].b;
            v[j] += kp.grad_x_yx.perp() / pd[j].b;
        }
    }

    const double drift_coef = (regime == Regime::Physical) ? alpha : 1.0;
    const double inter_coef =
        (regime == Regime::Physical) ? 1.0 / N : 1.0 / (N * alpha);
    for (int i = 0; i < N; ++i) {
        v[i] = -inter_coef * v[i] - (drift_coef / pd[i].b) * pd[i].grad_b.perp();
    }
    return v;
}

inline std::vector<Vec2> pv_rhs(const VortexEnsemble& s, const KernelTable& table,
                                const DepthField& depth) {
    return pv_rhs(s.positions, s.alpha, s.regime, table, depth, 1e-10 * table.geom().L);
}

/// Classical fixed-step RK4. Collision checks run in every stage.
inline VortexEnsemble step_rk4(const VortexEnsemble& s, double dt, const KernelTable& table,
                               const DepthField& depth) {
    if (dt == 0.0) throw DomainError("step_rk4: dt must be nonzero");
    const double thr = 1e-10 * table.geom().L;
    const int N = s.N();

    auto shifted = [&](const std::vector<Vec2>& k, double c) {
        std::vector<Vec2> q(N);
        for (int i = 0; i < N; ++i) q[i] = s.positions[i] + c * k[i];
        return q;
    };

    const std::vector<Vec2> k1 = pv_rhs(s.positions, s.alpha, s.regime, table, depth, thr);
    const std::vector<Vec2> k2 = pv_rhs(shifted(k1, dt / 2), s.alpha, s.regime, table, depth, thr);
    const std::vector<Vec2> k3 = pv_rhs(shifted(k2, dt / 2), s.alpha, s.regime, table, depth, thr);
    const std::vector<Vec2> k4 = pv_rhs(shifted(k3, dt), s.alpha, s.regime, table, depth, thr);

    VortexEnsemble out = s;
    for (int i = 0; i < N; ++i)
        out.positions[i] += (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    out.time += dt;
    return out;
}

/// Default step size: the fastest timescale is the co-rotation of the
/// closest pair, which scales like separation^2 for log interactions.
inline double default_dt(const VortexEnsemble& s) {
    if (s.N() < 2) return 1e-2;
    const double d = min_separation(s);
    return std::min(1e-2, 0.1 * d * d * kTwoPi);
}

} // namespace lakevortex
