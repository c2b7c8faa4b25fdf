#include <catch2/catch_amalgamated.hpp>

#include "lakevortex/poisson.hpp"

using namespace lakevortex;

namespace {

double linf_after_mean_shift(const ScalarGrid& a, const ScalarGrid& b) {
    const double shift = b.mean() - a.mean();
    double e = 0.0;
    for (size_t k = 0; k < a.values().size(); ++k)
        e = std::max(e, std::abs(a.values()[k] + shift - b.values()[k]));
    return e;
}

} // namespace

TEST_CASE("self-cell value equals the exact cell average of the log") {
    // closed form: -(1/4pi) (ln(h^2/2) - 3 + pi/2), checked against high-order
    // numerical quadrature before the build
    const double h = 0.0625;
    const double expected =
        -(1.0 / (2.0 * kTwoPi)) * (std::log(h * h / 2.0) - 3.0 + kTwoPi / 4.0);
    CHECK(FreeSpacePoisson::self_cell_value(h) == Catch::Approx(expected).epsilon(1e-15));
    // sanity: it is larger than the value one cell away
    CHECK(FreeSpacePoisson::self_cell_value(h) > log_kernel(h));
}

TEST_CASE("zero input gives zero output") {
    const GridGeometry geom(64, 4.0);
    FreeSpacePoisson solver(geom);
    const ScalarGrid psi = solver.solve(ScalarGrid(geom));
    CHECK(psi.max_abs() == 0.0);
    CHECK_FALSE(solver.boundary_warning());
}

TEST_CASE("manufactured gaussian laplacian") {
    const GridGeometry geom(256, 8.0);
    FreeSpacePoisson solver(geom);
    ScalarGrid f(geom), exact(geom);
    for (int j = 0; j < geom.n; ++j) {
        for (int i = 0; i < geom.n; ++i) {
            const Vec2 p = geom.node(i, j);
            const double e = std::exp(-p.norm2());
            exact.at(i, j) = e;
            f.at(i, j) = (4.0 - 4.0 * p.norm2()) * e; // -Delta exp(-|x|^2)
        }
    }
    const ScalarGrid psi = solver.solve(f);
    const double h = geom.h();
    CHECK(linf_after_mean_shift(psi, exact) <= 2.0 * h * h * std::log(geom.n));
}

TEST_CASE("point source reproduces the log potential") {
    const GridGeometry geom(256, 8.0);
    ScalarGrid f(geom);
    f.deposit({0.0, 0.0}, 1.0); // unit mass in one cell
    const ScalarGrid psi = poisson_free_space(f);
    // -ln(2)/(2 pi), frozen
    CHECK(psi.interpolate({2.0, 0.0}) == Catch::Approx(-0.1103178000763258).margin(1e-3));
    CHECK(psi.interpolate({0.0, 2.0}) == Catch::Approx(-0.1103178000763258).margin(1e-3));
}

TEST_CASE("boundary mass raises the warning flag") {
    const GridGeometry geom(64, 4.0);
    FreeSpacePoisson solver(geom);
    ScalarGrid f(geom);
    f.at(0, 10) = 1.0;
    solver.solve(f);
    CHECK(solver.boundary_warning());
}

TEST_CASE("geometry mismatch is rejected") {
    FreeSpacePoisson solver(GridGeometry(64, 4.0));
    CHECK_THROWS_AS(solver.solve(ScalarGrid(GridGeometry(32, 4.0))), GeometryMismatch);
}
