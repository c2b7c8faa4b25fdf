#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "lakevortex/depth.hpp"
#include "lakevortex/elliptic.hpp"
#include "lakevortex/errors.hpp"
#include "lakevortex/grid.hpp"
#include "lakevortex/vec2.hpp"

namespace lakevortex {

/// Initial vorticity profile: smooth compactly supported bump
/// omega0(x) = (3/(pi R^2)) (1 - |x-c|^2/R^2)^2 on B(c,R), a probability
/// density (the normalization integrates the radial profile exactly).
struct Omega0Spec {
    double radius = 1.0;
    Vec2 center{0.0, 0.0};

    double density(Vec2 p) const {
        const double r2 = (p - center).norm2() / (radius * radius);
        if (r2 >= 1.0) return 0.0;
        const double s = 1.0 - r2;
        const double norm = 6.0 / (kTwoPi * radius * radius); // 3/(pi R^2)
        return norm * s * s;
    }

    double max_density() const { return 6.0 / (kTwoPi * radius * radius); }

    Vec2 box_lo() const { return {center.x - radius, center.y - radius}; }
    Vec2 box_hi() const { return {center.x + radius, center.y + radius}; }
};

enum class SampleMode { Quadrature, Iid };

namespace detail {

/// Fine-raster atom list of a density on its bounding box; the systematic
/// sampler partitions these atoms (splitting fractionally at stratum
/// boundaries) instead of integrating the density analytically.
struct Atom {
    Vec2 p;
    double mass;
};

inline std::vector<Atom> rasterize(const std::function<double(Vec2)>& density, Vec2 lo, Vec2 hi,
                                   int ng) {
    std::vector<Atom> atoms;
    atoms.reserve(size_t(ng) * ng);
    const double hx = (hi.x - lo.x) / ng, hy = (hi.y - lo.y) / ng;
    double total = 0.0;
    for (int j = 0; j < ng; ++j) {
        for (int i = 0; i < ng; ++i) {
            const Vec2 c{lo.x + (i + 0.5) * hx, lo.y + (j + 0.5) * hy};
            const double m = density(c) * hx * hy;
            if (m > 0.0) {
                atoms.push_back({c, m});
                total += m;
            }
        }
    }
    if (total <= 0.0) throw DomainError("sample: density has zero mass in the box");
    for (auto& a : atoms) a.mass /= total;
    return atoms;
}

/// Splits a run of atoms (already sorted along one axis) into `parts`
/// consecutive equal-mass strata and returns each stratum's mass-weighted
/// centroid. Boundary atoms contribute fractionally to both sides.
inline std::vector<Vec2> equal_mass_centroids(const std::vector<Atom>& atoms, int parts) {
    double total = 0.0;
    for (const auto& a : atoms) total += a.mass;
    std::vector<Vec2> out;
    out.reserve(parts);
    const double target = total / parts;
    size_t k = 0;
    double carried = 0.0; // mass of atoms[k] already consumed by earlier strata
    for (int s = 0; s < parts; ++s) {
        double need = target;
        double mx = 0.0, my = 0.0, m = 0.0;
        while (need > 1e-15 * total && k < atoms.size()) {
            const double avail = atoms[k].mass - carried;
            const double take = std::min(avail, need);
            mx += take * atoms[k].p.x;
            my += take * atoms[k].p.y;
            m += take;
            need -= take;
            carried += take;
            if (carried >= atoms[k].mass - 1e-300) {
                ++k;
                carried = 0.0;
            }
        }
        out.push_back(m > 0.0 ? Vec2{mx / m, my / m} : Vec2{0.0, 0.0});
    }
    return out;
}

} // namespace detail

/// Systematic equal-mass stratification: ~sqrt(N) columns along x, each
/// split into equal-mass rows along y, one point per stratum at its
/// centroid. Deterministic; reduces to the k x k lattice of cell centers for
/// a uniform density and N = k^2.
inline std::vector<Vec2> sample_quadrature(const std::function<double(Vec2)>& density, Vec2 lo,
                                           Vec2 hi, int N, int raster = 512) {
    if (N < 1) throw DomainError("sample_quadrature: N must be >= 1");
    auto atoms = detail::rasterize(density, lo, hi, raster);
    std::stable_sort(atoms.begin(), atoms.end(),
                     [](const detail::Atom& a, const detail::Atom& b) { return a.p.x < b.p.x; });

    const int k = std::max(1, int(std::lround(std::sqrt(double(N)))));
    std::vector<int> rows(k, N / k);
    for (int c = 0; c < N % k; ++c) ++rows[c];

    // split the x-sorted atom stream into k strata of mass n_c/N each
    double total = 0.0;
    for (const auto& a : atoms) total += a.mass;
    std::vector<Vec2> points;
    points.reserve(N);
    size_t a0 = 0;
    double carried = 0.0;
    for (int c = 0; c < k; ++c) {
        const double target = total * rows[c] / double(N);
        std::vector<detail::Atom> column;
        double need = target;
        while (need > 1e-15 * total && a0 < atoms.size()) {
            const double avail = atoms[a0].mass - carried;
            const double take = std::min(avail, need);
            column.push_back({atoms[a0].p, take});
            need -= take;
            carried += take;
            if (carried >= atoms[a0].mass - 1e-300) {
                ++a0;
                carried = 0.0;
            }
        }
        std::stable_sort(column.begin(), column.end(),
                         [](const detail::Atom& a, const detail::Atom& b) { return a.p.y < b.p.y; });
        for (Vec2 p : detail::equal_mass_centroids(column, rows[c])) points.push_back(p);
    }
    return points;
}

/// Seeded rejection sampling; bit-reproducible for a fixed seed.
inline std::vector<Vec2> sample_iid(const std::function<double(Vec2)>& density, Vec2 lo, Vec2 hi,
                                    double density_max, int N, uint64_t seed) {
    if (N < 1) throw DomainError("sample_iid: N must be >= 1");
    if (density_max <= 0.0) throw DomainError("sample_iid: density bound must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(lo.x, hi.x), uy(lo.y, hi.y), uu(0.0, density_max);
    std::vector<Vec2> points;
    points.reserve(N);
    while (int(points.size()) < N) {
        const Vec2 p{ux(rng), uy(rng)};
        if (uu(rng) < density(p)) points.push_back(p);
    }
    return points;
}

inline std::vector<Vec2> sample_vortices(const Omega0Spec& omega0, int N, SampleMode mode,
                                         uint64_t seed = 0) {
    auto dens = [&omega0](Vec2 p) { return omega0.density(p); };
    if (mode == SampleMode::Quadrature)
        return sample_quadrature(dens, omega0.box_lo(), omega0.box_hi(), N);
    return sample_iid(dens, omega0.box_lo(), omega0.box_hi(), omega0.max_density(), N, seed);
}

/// Weighted particle cloud carrying the continuum vorticity; weights are
/// conserved masses summing to 1.
class ContinuumVorticity {
public:
    ContinuumVorticity() = default;

    /// Equal-weight quadrature discretization of omega0 with M particles.
    static ContinuumVorticity from_omega0(const Omega0Spec& omega0, int M) {
        ContinuumVorticity c;
        c.positions_ = sample_vortices(omega0, M, SampleMode::Quadrature);
        c.weights_.assign(M, 1.0 / M);
        return c;
    }

    static ContinuumVorticity from_particles(std::vector<Vec2> pos, std::vector<double> w) {
        if (pos.size() != w.size())
            throw DomainError("continuum particles: positions/weights size mismatch");
        ContinuumVorticity c;
        c.positions_ = std::move(pos);
        c.weights_ = std::move(w);
        return c;
    }

    int M() const { return int(positions_.size()); }
    const std::vector<Vec2>& positions() const { return positions_; }
    const std::vector<double>& weights() const { return weights_; }
    double time() const { return time_; }

    double total_mass() const { return std::accumulate(weights_.begin(), weights_.end(), 0.0); }

    Vec2 center_of_mass() const {
        Vec2 c{0.0, 0.0};
        for (int k = 0; k < M(); ++k) c += weights_[k] * positions_[k];
        return c;
    }

    /// Bilinear deposit of the particle masses as a grid density.
    ScalarGrid deposit(GridGeometry geom) const {
        ScalarGrid w(geom);
        for (int k = 0; k < M(); ++k) w.deposit(positions_[k], weights_[k]);
        return w;
    }

    bool inside_safety_box(double half_width) const {
        for (const Vec2& p : positions_)
            if (std::abs(p.x) > half_width || std::abs(p.y) > half_width) return false;
        return true;
    }

    /// One RK2 (midpoint) step of the forced lake dynamics: particles move
    /// along u - alpha grad^perp b / b, with u reconstructed by
    /// deposit -> lake elliptic solve -> -(1/b) grad^perp psi -> interpolate.
    /// Weights are untouched (the field transports masses).
    void advance_lake(LakeEllipticSolver& solver, const DepthField& depth, double alpha,
                      double dt, const EllipticOptions& opt = {}) {
        if (dt <= 0.0) throw DomainError("advance_lake: dt must be positive");
        const GridGeometry geom = solver.geom();
        const double safety = geom.L / 2.0;

        auto field_at = [&](const std::vector<Vec2>& pos) {
            ScalarGrid om(geom);
            for (int k = 0; k < M(); ++k) om.deposit(pos[k], weights_[k]);
            const ScalarGrid psi = solver.solve(om, opt);
            const VectorGrid u = solver.velocity_from_stream(psi);
            std::vector<Vec2> v(M());
            for (int k = 0; k < M(); ++k) {
                const Vec2 p = pos[k];
                v[k] = u.interpolate(p) - (alpha / depth.value(p)) * depth.gradient(p).perp();
            }
            return v;
        };

        const std::vector<Vec2> v1 = field_at(positions_);
        std::vector<Vec2> mid(M());
        for (int k = 0; k < M(); ++k) mid[k] = positions_[k] + (dt / 2) * v1[k];
        const std::vector<Vec2> v2 = field_at(mid);
        for (int k = 0; k < M(); ++k) positions_[k] += dt * v2[k];
        time_ += dt;

        if (!inside_safety_box(safety))
            throw SupportEscape("continuum support left the safety box at t = " +
                                std::to_string(time_));
    }

    /// One RK4 step of the pure level-set transport dq/dt = -grad^perp b / b.
    /// The field is divergence-free, so weights are conserved.
    void advance_transport(const DepthField& depth, double dt) {
        if (dt <= 0.0) throw DomainError("advance_transport: dt must be positive");
        auto vel = [&depth](Vec2 p) { return -(1.0 / depth.value(p)) * depth.gradient(p).perp(); };
        for (Vec2& q : positions_) {
            const Vec2 k1 = vel(q);
            const Vec2 k2 = vel(q + (dt / 2) * k1);
            const Vec2 k3 = vel(q + (dt / 2) * k2);
            const Vec2 k4 = vel(q + dt * k3);
            q += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        time_ += dt;
    }

private:
    std::vector<Vec2> positions_;
    std::vector<double> weights_;
    double time_ = 0.0;
};

} // namespace lakevortex
