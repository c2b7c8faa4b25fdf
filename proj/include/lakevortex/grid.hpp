#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "lakevortex/errors.hpp"
#include "lakevortex/vec2.hpp"

namespace lakevortex {

/// Uniform node-centered square grid on [-L, L)^2 with n nodes per side,
/// spacing h = 2L/n. Node (i,j) sits at (-L + i h, -L + j h); the origin is
/// the node (n/2, n/2). n must be a power of two (padded spectral
/// convolution relies on it).
struct GridGeometry {
    int n = 0;
    double L = 0.0;

    GridGeometry() = default;
    GridGeometry(int n_, double L_) : n(n_), L(L_) {
        if (n < 4 || (n & (n - 1)) != 0) throw DomainError("grid n must be a power of two >= 4");
        if (L <= 0.0) throw DomainError("grid half-width L must be positive");
    }

    double h() const { return 2.0 * L / n; }
    Vec2 node(int i, int j) const { return {-L + i * h(), -L + j * h()}; }
    bool operator==(const GridGeometry& o) const { return n == o.n && L == o.L; }
    bool operator!=(const GridGeometry& o) const { return !(*this == o); }

    bool contains(Vec2 p) const {
        return p.x >= -L && p.x <= L - h() && p.y >= -L && p.y <= L - h();
    }
};

class ScalarGrid {
public:
    ScalarGrid() = default;
    explicit ScalarGrid(GridGeometry geom) : geom_(geom), values_(size_t(geom.n) * geom.n, 0.0) {}

    const GridGeometry& geom() const { return geom_; }
    int n() const { return geom_.n; }
    double L() const { return geom_.L; }
    double h() const { return geom_.h(); }

    double& at(int i, int j) { return values_[size_t(j) * geom_.n + i]; }
    double at(int i, int j) const { return values_[size_t(j) * geom_.n + i]; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    double max_abs() const {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }

    double mean() const {
        double s = 0.0;
        for (double v : values_) s += v;
        return s / double(values_.size());
    }

    void shift(double c) {
        for (double& v : values_) v += c;
    }

    /// max |.| over the interior, excluding a boundary ring of given width.
    double max_abs_interior(int ring = 1) const {
        double m = 0.0;
        for (int j = ring; j < geom_.n - ring; ++j)
            for (int i = ring; i < geom_.n - ring; ++i) m = std::max(m, std::abs(at(i, j)));
        return m;
    }

    /// max |.| over the outermost ring of nodes.
    double max_abs_boundary_ring() const {
        double m = 0.0;
        const int n = geom_.n;
        for (int i = 0; i < n; ++i) {
            m = std::max({m, std::abs(at(i, 0)), std::abs(at(i, n - 1)), std::abs(at(0, i)),
                          std::abs(at(n - 1, i))});
        }
        return m;
    }

    /// Bilinear interpolation at p; p must be inside the node hull.
    double interpolate(Vec2 p) const {
        const double h = geom_.h();
        const double fx = (p.x + geom_.L) / h;
        const double fy = (p.y + geom_.L) / h;
        int i = int(std::floor(fx));
        int j = int(std::floor(fy));
        if (i < 0 || j < 0 || i >= geom_.n - 1 || j >= geom_.n - 1)
            throw OutOfDomain("interpolation point outside grid");
        const double t = fx - i, u = fy - j;
        return (1 - t) * (1 - u) * at(i, j) + t * (1 - u) * at(i + 1, j) +
               (1 - t) * u * at(i, j + 1) + t * u * at(i + 1, j + 1);
    }

    /// Gradient of the bilinear interpolant (exact derivative of
    /// interpolate(), piecewise per cell).
    Vec2 interpolate_gradient(Vec2 p) const {
        const double h = geom_.h();
        const double fx = (p.x + geom_.L) / h;
        const double fy = (p.y + geom_.L) / h;
        int i = int(std::floor(fx));
        int j = int(std::floor(fy));
        if (i < 0 || j < 0 || i >= geom_.n - 1 || j >= geom_.n - 1)
            throw OutOfDomain("interpolation point outside grid");
        const double t = fx - i, u = fy - j;
        const double s00 = at(i, j), s10 = at(i + 1, j), s01 = at(i, j + 1), s11 = at(i + 1, j + 1);
        const double dx = ((1 - u) * (s10 - s00) + u * (s11 - s01)) / h;
        const double dy = ((1 - t) * (s01 - s00) + t * (s11 - s10)) / h;
        return {dx, dy};
    }

    /// Value and exact gradient of the bilinear interpolant in one pass
    /// (shares the four node loads).
    void interpolate_value_gradient(Vec2 p, double& v, Vec2& g) const {
        const double h = geom_.h();
        const double fx = (p.x + geom_.L) / h;
        const double fy = (p.y + geom_.L) / h;
        int i = int(std::floor(fx));
        int j = int(std::floor(fy));
        if (i < 0 || j < 0 || i >= geom_.n - 1 || j >= geom_.n - 1)
            throw OutOfDomain("interpolation point outside grid");
        const double t = fx - i, u = fy - j;
        const double s00 = at(i, j), s10 = at(i + 1, j), s01 = at(i, j + 1), s11 = at(i + 1, j + 1);
        v = (1 - t) * (1 - u) * s00 + t * (1 - u) * s10 + (1 - t) * u * s01 + t * u * s11;
        g.x = ((1 - u) * (s10 - s00) + u * (s11 - s01)) / h;
        g.y = ((1 - t) * (s01 - s00) + t * (s11 - s10)) / h;
    }

    /// Bilinear deposit of a weighted point mass; weight is a measure mass,
    /// deposited as density (divided by the cell area).
    void deposit(Vec2 p, double mass) {
        const double h = geom_.h();
        const double fx = (p.x + geom_.L) / h;
        const double fy = (p.y + geom_.L) / h;
        int i = int(std::floor(fx));
        int j = int(std::floor(fy));
        if (i < 0 || j < 0 || i >= geom_.n - 1 || j >= geom_.n - 1)
            throw OutOfDomain("deposit point outside grid");
        const double t = fx - i, u = fy - j;
        const double d = mass / (h * h);
        at(i, j) += (1 - t) * (1 - u) * d;
        at(i + 1, j) += t * (1 - u) * d;
        at(i, j + 1) += (1 - t) * u * d;
        at(i + 1, j + 1) += t * u * d;
    }

private:
    GridGeometry geom_;
    std::vector<double> values_;
};

struct VectorGrid {
    ScalarGrid u1;
    ScalarGrid u2;

    VectorGrid() = default;
    explicit VectorGrid(GridGeometry geom) : u1(geom), u2(geom) {}
    const GridGeometry& geom() const { return u1.geom(); }

    Vec2 interpolate(Vec2 p) const { return {u1.interpolate(p), u2.interpolate(p)}; }
};

/// Centered-difference gradient; one-sided at the boundary ring.
inline VectorGrid gradient(const ScalarGrid& f) {
    const int n = f.n();
    const double h = f.h();
    VectorGrid g(f.geom());
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            double dx, dy;
            if (i == 0) dx = (f.at(1, j) - f.at(0, j)) / h;
            else if (i == n - 1) dx = (f.at(n - 1, j) - f.at(n - 2, j)) / h;
            else dx = (f.at(i + 1, j) - f.at(i - 1, j)) / (2 * h);
            if (j == 0) dy = (f.at(i, 1) - f.at(i, 0)) / h;
            else if (j == n - 1) dy = (f.at(i, n - 1) - f.at(i, n - 2)) / h;
            else dy = (f.at(i, j + 1) - f.at(i, j - 1)) / (2 * h);
            g.u1.at(i, j) = dx;
            g.u2.at(i, j) = dy;
        }
    }
    return g;
}

inline void require_same_geometry(const GridGeometry& a, const GridGeometry& b, const char* where) {
    if (a != b) throw GeometryMismatch(std::string(where) + ": grid geometries differ");
}

} // namespace lakevortex
