#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "lakevortex/depth.hpp"
#include "lakevortex/grid.hpp"
#include "lakevortex/poisson.hpp"

namespace lakevortex {

struct EllipticOptions {
    double tol = 1e-10;
    int max_iter = 200;
    double theta = 1.0;   // under-relaxation; < 1 helps strong depth contrast
    bool pin_mean = true; // shift so the grid mean of psi is 0
};

/// Solves -div((1/b) grad psi) = omega on the truncated plane by Picard
/// iteration on the rewriting -Delta psi = b*omega + b grad(1/b) . grad psi,
/// each step inverting the Laplacian with the free-space convolution. The
/// correction coefficient b grad(1/b) = -grad(b)/b decays fast under the
/// depth decay assumption, so plain iteration contracts for moderate
/// contrast; NonConvergence is reported otherwise.
class LakeEllipticSolver {
public:
    LakeEllipticSolver(const DepthField& depth, GridGeometry geom)
        : depth_(&depth), geom_(geom), poisson_(geom), b_(geom), cx_(geom), cy_(geom) {
        const int n = geom.n;
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                const Vec2 p = geom.node(i, j);
                const double b = depth.value(p);
                const Vec2 g = depth.gradient(p);
                b_.at(i, j) = b;
                // b grad(1/b) = -grad b / b
                cx_.at(i, j) = -g.x / b;
                cy_.at(i, j) = -g.y / b;
            }
        }
        constant_depth_ = depth.is_constant();
    }

    const GridGeometry& geom() const { return geom_; }
    const ScalarGrid& depth_values() const { return b_; }
    int last_iterations() const { return last_iterations_; }
    bool boundary_warning() const { return poisson_.boundary_warning(); }

    ScalarGrid solve(const ScalarGrid& omega, const EllipticOptions& opt = {}) {
        require_same_geometry(omega.geom(), geom_, "solve_lake_elliptic");
        if (opt.tol <= 0.0) throw DomainError("solve_lake_elliptic: tol must be positive");

        const int n = geom_.n;
        ScalarGrid rhs(geom_);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) rhs.at(i, j) = b_.at(i, j) * omega.at(i, j);

        if (rhs.max_abs() == 0.0) {
            last_iterations_ = 0;
            return ScalarGrid(geom_); // zero RHS has the zero solution
        }

        ScalarGrid psi = poisson_.solve(rhs);
        last_iterations_ = 1;
        if (constant_depth_) {
            if (opt.pin_mean) psi.shift(-psi.mean());
            return psi; // correction term vanishes identically
        }

        ScalarGrid work(geom_);
        for (int iter = 1; iter < opt.max_iter; ++iter) {
            // rhs + b grad(1/b) . grad psi with centered differences
            for (int j = 0; j < n; ++j) {
                for (int i = 0; i < n; ++i) {
                    double dx = 0.0, dy = 0.0;
                    const double h = geom_.h();
                    if (i > 0 && i < n - 1) dx = (psi.at(i + 1, j) - psi.at(i - 1, j)) / (2 * h);
                    if (j > 0 && j < n - 1) dy = (psi.at(i, j + 1) - psi.at(i, j - 1)) / (2 * h);
                    work.at(i, j) = rhs.at(i, j) + cx_.at(i, j) * dx + cy_.at(i, j) * dy;
                }
            }
            ScalarGrid next = poisson_.solve(work);
            if (opt.theta != 1.0) {
                for (size_t k = 0; k < next.values().size(); ++k)
                    next.values()[k] = (1.0 - opt.theta) * psi.values()[k] + opt.theta * next.values()[k];
            }
            double diff = 0.0;
            for (size_t k = 0; k < next.values().size(); ++k)
                diff = std::max(diff, std::abs(next.values()[k] - psi.values()[k]));
            const double denom = std::max(psi.max_abs(), 1e-300);
            psi = std::move(next);
            ++last_iterations_;
            if (diff / denom <= opt.tol) {
                if (opt.pin_mean) psi.shift(-psi.mean());
                return psi;
            }
        }
        throw NonConvergence("solve_lake_elliptic: fixed point not reached in " +
                             std::to_string(opt.max_iter) +
                             " iterations (depth contrast too strong for plain iteration; "
                             "try under-relaxation theta < 1)");
    }

    /// a-posteriori residual || -div_h((1/b) grad_h psi) - omega ||_inf over
    /// the interior, with the same centered stencils as the solver.
    double residual(const ScalarGrid& psi, const ScalarGrid& omega) const {
        require_same_geometry(psi.geom(), geom_, "residual_lake");
        require_same_geometry(omega.geom(), geom_, "residual_lake");
        const int n = geom_.n;
        const double h = geom_.h();
        double res = 0.0;
        // expanded form -(1/b) Delta psi + (grad b / b^2) . grad psi, with the
        // 5-point Laplacian and centered gradients used by the solver
        for (int j = 2; j < n - 2; ++j) {
            for (int i = 2; i < n - 2; ++i) {
                const double lap = (psi.at(i + 1, j) + psi.at(i - 1, j) + psi.at(i, j + 1) +
                                    psi.at(i, j - 1) - 4.0 * psi.at(i, j)) /
                                   (h * h);
                const double dx = (psi.at(i + 1, j) - psi.at(i - 1, j)) / (2 * h);
                const double dy = (psi.at(i, j + 1) - psi.at(i, j - 1)) / (2 * h);
                const double b = b_.at(i, j);
                // cx,cy hold -grad b / b, so (grad b / b^2) . grad psi = -(cx dx + cy dy)/b
                const double lhs = -lap / b - (cx_.at(i, j) * dx + cy_.at(i, j) * dy) / b;
                res = std::max(res, std::abs(lhs - omega.at(i, j)));
            }
        }
        return res;
    }

    /// u = -(1/b) grad^perp psi with centered differences.
    VectorGrid velocity_from_stream(const ScalarGrid& psi) const {
        require_same_geometry(psi.geom(), geom_, "velocity_from_stream");
        VectorGrid g = gradient(psi);
        const int n = geom_.n;
        VectorGrid u(geom_);
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                const double ib = 1.0 / b_.at(i, j);
                // -(1/b) (grad psi)^perp = (1/b) (d2 psi, -d1 psi)
                u.u1.at(i, j) = ib * g.u2.at(i, j);
                u.u2.at(i, j) = -ib * g.u1.at(i, j);
            }
        }
        return u;
    }

    /// max interior |div_h(b u)|, the discrete anelastic constraint.
    double div_bu_max(const VectorGrid& u) const {
        require_same_geometry(u.geom(), geom_, "div_bu_max");
        const int n = geom_.n;
        const double h = geom_.h();
        double m = 0.0;
        for (int j = 2; j < n - 2; ++j) {
            for (int i = 2; i < n - 2; ++i) {
                const double d =
                    (b_.at(i + 1, j) * u.u1.at(i + 1, j) - b_.at(i - 1, j) * u.u1.at(i - 1, j) +
                     b_.at(i, j + 1) * u.u2.at(i, j + 1) - b_.at(i, j - 1) * u.u2.at(i, j - 1)) /
                    (2 * h);
                m = std::max(m, std::abs(d));
            }
        }
        return m;
    }

private:
    const DepthField* depth_;
    GridGeometry geom_;
    FreeSpacePoisson poisson_;
    ScalarGrid b_;
    ScalarGrid cx_, cy_;
    bool constant_depth_ = false;
    int last_iterations_ = 0;
};

} // namespace lakevortex
