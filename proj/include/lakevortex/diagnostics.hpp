#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

#include "lakevortex/continuum.hpp"
#include "lakevortex/depth.hpp"
#include "lakevortex/dynamics.hpp"
#include "lakevortex/elliptic.hpp"
#include "lakevortex/kernel_table.hpp"
#include "lakevortex/poisson.hpp"
#include "lakevortex/vec2.hpp"

namespace lakevortex {

/// E_N = (1/N^2) sum_i sum_{j != i} g_b(q_i, q_j)
inline double interaction_energy(const std::vector<Vec2>& q, const KernelTable& table,
                                 const DepthField& depth) {
    const int N = int(q.size());
    std::vector<PointDepth> pd(N);
    for (int i = 0; i < N; ++i) pd[i] = point_depth(depth, q[i]);
    double e = 0.0;
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j)
            e += 2.0 * table.eval_pair(q[i], q[j], pd[i], pd[j]).g_b; // both ordered pairs
    return e / (double(N) * N);
}

/// I_N = (1/N) sum_i |q_i|^2
inline double moment_inertia(const std::vector<Vec2>& q) {
    double s = 0.0;
    for (const Vec2& p : q) s += p.norm2();
    return q.empty() ? 0.0 : s / double(q.size());
}

/// Both total-energy candidates E_N + c (alpha/N) sum_i b(q_i), c in {1, 2}.
/// Which one the flow conserves is an experimental output.
inline std::pair<double, double> total_energy_candidates(const std::vector<Vec2>& q,
                                                         const KernelTable& table,
                                                         const DepthField& depth, double alpha) {
    const double e = interaction_energy(q, table, depth);
    double sb = 0.0;
    for (const Vec2& p : q) sb += depth.value(p);
    const double unit = alpha * sb / double(q.size());
    return {e + unit, e + 2.0 * unit};
}

/// Truncated log kernel: g(eta) inside the ball of radius eta, g outside.
inline double g_eta(Vec2 x, double eta) {
    if (!(eta > 0.0 && eta < 1.0)) throw DomainError("g_eta: eta must lie in (0,1)");
    const double r = x.norm();
    return log_kernel(std::max(r, eta));
}

/// m_b(y, eta) = 1 / (ring average of 1/sqrt(b) over the circle of radius
/// eta around y); periodic trapezoid rule, spectrally accurate in M.
inline double m_b(Vec2 y, double eta, const DepthField& depth, int M = 64) {
    if (M < 8) throw DomainError("m_b: need at least 8 quadrature nodes");
    double avg = 0.0;
    for (int k = 0; k < M; ++k) {
        const double th = kTwoPi * k / M;
        const Vec2 z{y.x + eta * std::cos(th), y.y + eta * std::sin(th)};
        avg += 1.0 / std::sqrt(depth.value(z));
    }
    return double(M) / avg;
}

/// Ring mean-value identity: the trapezoid average of g(x - .) over the
/// circle of radius eta around y versus the closed form g_eta(x - y).
inline std::pair<double, double> ring_average_identity(Vec2 x, Vec2 y, double eta, int M = 256) {
    double quad = 0.0;
    for (int k = 0; k < M; ++k) {
        const double th = kTwoPi * k / M;
        const Vec2 z{y.x + eta * std::cos(th), y.y + eta * std::sin(th)};
        const Vec2 d = x - z;
        quad += (d.norm() < 1e-300) ? 0.0 : log_kernel(d.norm());
    }
    quad /= M;
    return {quad, g_eta(x - y, eta)};
}

/// Number of ordered pairs i != j with |q_i - q_j| <= eps.
inline long count_close_pairs(const std::vector<Vec2>& q, double eps) {
    if (eps <= 0.0) throw DomainError("count_close_pairs: eps must be positive");
    const double e2 = eps * eps;
    long c = 0;
    for (size_t i = 0; i < q.size(); ++i)
        for (size_t j = i + 1; j < q.size(); ++j)
            if ((q[i] - q[j]).norm2() <= e2) c += 2;
    return c;
}

// ---------------------------------------------------------------------------
// modulated energy

/// Stream function of the continuum vorticity with the additive constant
/// fixed by matching the direct kernel sum at a probe point far from the
/// support (so the grid psi agrees with the kernel normalization S(0,0)=0,
/// which the modulated energy is sensitive to).
inline ScalarGrid stream_function_kernel_normalized(const ContinuumVorticity& omega,
                                                    LakeEllipticSolver& solver,
                                                    const KernelTable& table,
                                                    const DepthField& depth, Vec2 probe) {
    EllipticOptions opt;
    opt.pin_mean = false;
    ScalarGrid w = omega.deposit(solver.geom());
    ScalarGrid psi = solver.solve(w, opt);

    const PointDepth pdp = point_depth(depth, probe);
    double kernel_route = 0.0;
    for (int k = 0; k < omega.M(); ++k) {
        const Vec2 xk = omega.positions()[k];
        kernel_route += omega.weights()[k] *
                        table.eval_pair(probe, xk, pdp, point_depth(depth, xk)).g_b;
    }
    psi.shift(kernel_route - psi.interpolate(probe));
    return psi;
}

inline Vec2 default_probe(const GridGeometry& geom) {
    // far from the unit-ball support but inside the kernel table's box
    return {0.45 * geom.L, 0.0};
}

/// F_b(Q, omega) = int psi domega - (2/N) sum_i psi(q_i) + E_N with
/// psi = G_b[omega]; one elliptic solve plus the pair sum.
inline double modulated_energy(const std::vector<Vec2>& q, const ContinuumVorticity& omega,
                               const DepthField& depth, LakeEllipticSolver& solver,
                               const KernelTable& table) {
    const GridGeometry geom = solver.geom();
    const ScalarGrid psi =
        stream_function_kernel_normalized(omega, solver, table, depth, default_probe(geom));

    const ScalarGrid w = omega.deposit(geom);
    const double h2 = geom.h() * geom.h();
    double term1 = 0.0;
    for (size_t k = 0; k < w.values().size(); ++k) term1 += w.values()[k] * psi.values()[k];
    term1 *= h2;

    double term2 = 0.0;
    for (const Vec2& p : q) term2 += psi.interpolate(p);
    term2 *= 2.0 / double(q.size());

    return term1 - term2 + interaction_energy(q, table, depth);
}

/// Brute-force double quadrature of the omega-omega term,
/// sum_k sum_l w_k w_l g_b(x_k, x_l), with coincident/sub-cell pairs
/// regularized by the exact cell average of the log (the same rule the
/// Poisson kernel uses at its self cell).
inline double modulated_energy_term1_bruteforce(const ContinuumVorticity& omega,
                                                const KernelTable& table, const DepthField& depth,
                                                double h) {
    const int M = omega.M();
    std::vector<PointDepth> pd(M);
    for (int k = 0; k < M; ++k) pd[k] = point_depth(depth, omega.positions()[k]);
    const double reg = FreeSpacePoisson::self_cell_value(h);
    double acc = 0.0;
    for (int k = 0; k < M; ++k) {
        const Vec2 xk = omega.positions()[k];
        // diagonal: g regularized, S evaluated on the diagonal (continuous there)
        acc += omega.weights()[k] * omega.weights()[k] *
               (pd[k].b * reg + table.eval_S(xk, xk));
        for (int l = k + 1; l < M; ++l) {
            const Vec2 d = xk - omega.positions()[l];
            double gb;
            if (d.norm() < 0.5 * h) {
                gb = pd[k].sqrt_b * pd[l].sqrt_b * reg + table.eval_S(xk, omega.positions()[l]);
            } else {
                gb = table.eval_pair(xk, omega.positions()[l], pd[k], pd[l]).g_b;
            }
            acc += 2.0 * omega.weights()[k] * omega.weights()[l] * gb;
        }
    }
    return acc;
}

// ---------------------------------------------------------------------------
// negative Sobolev distance

namespace detail {

/// Continuous Fourier transform of the deposited grid density at the
/// frequency lattice xi_k = pi k / L, computed with one complex FFT:
/// omega_hat(k1,k2) = h^2 (-1)^(k1+k2) DFT[omega]_(k1 mod n, k2 mod n).
inline std::vector<std::complex<double>> grid_fourier(const ScalarGrid& w) {
    const int n = w.n();
    std::vector<std::complex<double>> in(size_t(n) * n), out(size_t(n) * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) in[size_t(j) * n + i] = w.at(i, j);
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        fftw_plan p = fftw_plan_dft_2d(n, n, reinterpret_cast<fftw_complex*>(in.data()),
                                       reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD,
                                       FFTW_ESTIMATE);
        fftw_execute(p);
        fftw_destroy_plan(p);
    }
    const double h2 = w.h() * w.h();
    std::vector<std::complex<double>> hat(size_t(n) * n);
    for (int k2 = -n / 2; k2 < n / 2; ++k2) {
        for (int k1 = -n / 2; k1 < n / 2; ++k1) {
            const int i = (k1 + n) % n, j = (k2 + n) % n;
            const double sign = ((k1 + k2) & 1) ? -1.0 : 1.0;
            hat[size_t(k2 + n / 2) * n + (k1 + n / 2)] = sign * h2 * out[size_t(j) * n + i];
        }
    }
    return hat; // indexed by (k1 + n/2, k2 + n/2)
}

} // namespace detail

/// || (1/N) sum delta_{q_i} - omega ||_{H^s} estimated on the grid's
/// frequency lattice xi = (pi/L)(k1, k2), truncated at |xi| <= cutoff:
/// ( sum (1+|xi|^2)^s |mu_hat(xi)|^2 (pi/L)^2 )^{1/2}, with the particle
/// transform evaluated exactly and omega through its deposited grid.
inline double sobolev_distance(const std::vector<Vec2>& q, const ScalarGrid& omega, double s,
                               double cutoff) {
    if (s >= -1.0) throw DomainError("sobolev_distance: s must be < -1");
    const int n = omega.n();
    const double L = omega.L();
    if (cutoff > kTwoPi / 2.0 / omega.h() + 1e-12)
        throw DomainError("sobolev_distance: cutoff beyond the grid Nyquist frequency");
    const auto what = detail::grid_fourier(omega);

    const int N = int(q.size());
    const double dxi = kTwoPi / 2.0 / L; // pi / L
    // per-particle 1D phase tables e^{-i xi1 x} and e^{-i xi2 y}
    std::vector<std::complex<double>> mu(size_t(n) * n);
    for (size_t k = 0; k < mu.size(); ++k) mu[k] = -what[k];
    std::vector<std::complex<double>> px(n), py(n);
    for (const Vec2& p : q) {
        const std::complex<double> sx = std::exp(std::complex<double>(0.0, -dxi * p.x));
        const std::complex<double> sy = std::exp(std::complex<double>(0.0, -dxi * p.y));
        std::complex<double> cx = std::exp(std::complex<double>(0.0, dxi * (n / 2) * p.x));
        std::complex<double> cy = std::exp(std::complex<double>(0.0, dxi * (n / 2) * p.y));
        for (int k = 0; k < n; ++k, cx *= sx) px[k] = cx;
        for (int k = 0; k < n; ++k, cy *= sy) py[k] = cy;
        const double invN = 1.0 / N;
        for (int k2 = 0; k2 < n; ++k2) {
            const std::complex<double> row = invN * py[k2];
            std::complex<double>* m = &mu[size_t(k2) * n];
            for (int k1 = 0; k1 < n; ++k1) m[k1] += row * px[k1];
        }
    }

    const double c2 = cutoff * cutoff;
    double acc = 0.0;
    for (int k2 = 0; k2 < n; ++k2) {
        const double xi2 = dxi * (k2 - n / 2);
        for (int k1 = 0; k1 < n; ++k1) {
            const double xi1 = dxi * (k1 - n / 2);
            const double x2 = xi1 * xi1 + xi2 * xi2;
            if (x2 > c2) continue;
            acc += std::pow(1.0 + x2, s) * std::norm(mu[size_t(k2) * n + k1]);
        }
    }
    return std::sqrt(acc * dxi * dxi);
}

// ---------------------------------------------------------------------------
// energy derivative and pre-coercivity

/// Closed-form dE_N/dt:
/// -(2 alpha / N^2) sum_i (grad^perp b(q_i)/b(q_i)) . sum_{j != i} grad_x g_b(q_i, q_j)
/// (full kernel gradient, including the g(x-y) sqrt(b(y)) grad sqrt(b(x)) term;
/// the interaction part of the velocity is orthogonal to the inner sum and drops)
inline double energy_derivative_closed_form(const std::vector<Vec2>& q, const KernelTable& table,
                                            const DepthField& depth, double alpha) {
    const int N = int(q.size());
    std::vector<PointDepth> pd(N);
    for (int i = 0; i < N; ++i) pd[i] = point_depth(depth, q[i]);
    double acc = 0.0;
    for (int i = 0; i < N; ++i) {
        Vec2 inner{0.0, 0.0};
        for (int j = 0; j < N; ++j) {
            if (j == i) continue;
            inner += table.eval_pair(q[i], q[j], pd[i], pd[j]).grad_x_xy;
        }
        acc += (pd[i].grad_b.perp() / pd[i].b).dot(inner);
    }
    return -2.0 * alpha * acc / (double(N) * N);
}

/// Median over interior samples of |centered-difference dE_N/dt - closed form|
/// along a uniformly spaced trajectory. The median rather than the max: E(t)
/// has slope kinks wherever a vortex crosses a bilinear-interpolation cell
/// edge, and a centered stencil straddling such a kink carries an O(1)-in-dt
/// error; those straddles hit a vanishing fraction of samples as dt shrinks,
/// so the median exposes the O(dt^2) truncation order while the max saturates.
inline double energy_derivative_defect(const std::vector<std::vector<Vec2>>& trajectory, double dt,
                                       const KernelTable& table, const DepthField& depth,
                                       double alpha) {
    if (trajectory.size() < 3)
        throw DomainError("energy_derivative_defect: need at least 3 samples");
    std::vector<double> e(trajectory.size());
    for (size_t k = 0; k < trajectory.size(); ++k)
        e[k] = interaction_energy(trajectory[k], table, depth);
    std::vector<double> defects;
    defects.reserve(trajectory.size() - 2);
    for (size_t k = 1; k + 1 < trajectory.size(); ++k) {
        const double fd = (e[k + 1] - e[k - 1]) / (2.0 * dt);
        const double cf = energy_derivative_closed_form(trajectory[k], table, depth, alpha);
        defects.push_back(std::abs(fd - cf));
    }
    std::nth_element(defects.begin(), defects.begin() + defects.size() / 2, defects.end());
    return defects[defects.size() / 2];
}

/// Dirichlet energy int (1/b) |grad H|^2 of the stream function H of the
/// ring-regularized difference (1/N) sum delta-tilde^eta_{q_i} - omega.
/// Each delta-tilde is realized as ring_nodes weighted nodes of total mass
/// ~ m_b(q,eta) ring-average(1/sqrt b) = 1.
inline double dirichlet_energy_regularized(const std::vector<Vec2>& q,
                                           const ContinuumVorticity& omega,
                                           const DepthField& depth, LakeEllipticSolver& solver,
                                           double eta, int ring_nodes = 64) {
    const GridGeometry geom = solver.geom();
    ScalarGrid f = omega.deposit(geom);
    for (auto& v : f.values()) v = -v;
    const double invN = 1.0 / double(q.size());
    for (const Vec2& p : q) {
        const double mb = m_b(p, eta, depth, ring_nodes);
        for (int k = 0; k < ring_nodes; ++k) {
            const double th = kTwoPi * k / ring_nodes;
            const Vec2 z{p.x + eta * std::cos(th), p.y + eta * std::sin(th)};
            f.deposit(z, invN * mb / (std::sqrt(depth.value(z)) * ring_nodes));
        }
    }
    EllipticOptions opt;
    opt.pin_mean = false;
    const ScalarGrid H = solver.solve(f, opt);
    const VectorGrid g = gradient(H);
    const int n = geom.n;
    double acc = 0.0;
    for (int j = 1; j < n - 1; ++j)
        for (int i = 1; i < n - 1; ++i)
            acc += (g.u1.at(i, j) * g.u1.at(i, j) + g.u2.at(i, j) * g.u2.at(i, j)) /
                   solver.depth_values().at(i, j);
    return acc * geom.h() * geom.h();
}

/// One sampled row of the run diagnostics.
struct DiagnosticsSample {
    double t = 0.0;
    double E_N = 0.0;
    double I_N = 0.0;
    double Etot1 = 0.0;
    double Etot2 = 0.0;
    double F_b = 0.0;
    double Hs = 0.0;
    double min_sep = 0.0;
    long close_pairs = 0;
};

struct DiagnosticsRecord {
    std::vector<DiagnosticsSample> samples;
    int N = 0;
    Regime regime = Regime::Physical;
    double alpha = 0.0;
    GridGeometry grid;
    uint64_t seed = 0;
    bool complete = true;
    std::string abort_reason;
};

} // namespace lakevortex
