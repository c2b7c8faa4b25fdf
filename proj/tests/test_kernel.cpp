#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <random>

#include "lakevortex/continuum.hpp"
#include "lakevortex/diagnostics.hpp"
#include "lakevortex/kernel_table.hpp"

using namespace lakevortex;

namespace {

const DepthField& bump() {
    static DepthField b = DepthField::default_bump();
    return b;
}

// small shared table; sources at spacing 2 on [-4,4]^2, grid h = 0.25
const KernelTable& bump_table() {
    static KernelTable t = KernelTable::build(bump(), GridGeometry(64, 8.0), 5);
    return t;
}

} // namespace

TEST_CASE("constant depth yields an identically zero correction") {
    const DepthField flat = DepthField::constant(1.0);
    const KernelTable t = KernelTable::build(flat, GridGeometry(64, 8.0), 5);
    CHECK(t.all_zero());
    CHECK(t.eval_S({1.0, 0.5}, {-0.3, 0.2}) == 0.0);
    CHECK(t.grad_x_S({1.0, 0.5}, {-0.3, 0.2}).norm() == 0.0);

    CHECK(t.eval_g_b(flat, {0.5, 0.0}, {-0.5, 0.0}) == Catch::Approx(0.0).margin(1e-15));
    const DepthField four = DepthField::constant(4.0);
    const KernelTable t4 = KernelTable::build(four, GridGeometry(64, 8.0), 5);
    const double d = std::exp(-kTwoPi); // g(d) = 1
    CHECK(t4.eval_g_b(four, {d, 0.0}, {0.0, 0.0}) == Catch::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("velocity_sum degenerate examples") {
    const DepthField flat = DepthField::constant(1.0);
    const KernelTable t = KernelTable::build(flat, GridGeometry(64, 8.0), 5);

    auto u = t.velocity_sum(flat, {{1.0, 0.0}}, {{{0.0, 0.0}, 1.0}});
    CHECK(u[0].x == Catch::Approx(0.0).margin(1e-15));
    CHECK(u[0].y == Catch::Approx(1.0 / kTwoPi).epsilon(1e-13));

    // two symmetric half-strength sources: tangential speed 1/(4 pi d), self skipped
    const double d = 1.0;
    std::vector<std::pair<Vec2, double>> srcs = {{{d / 2, 0.0}, 0.5}, {{-d / 2, 0.0}, 0.5}};
    auto v = t.velocity_sum(flat, {{d / 2, 0.0}, {-d / 2, 0.0}}, srcs);
    CHECK(v[0].norm() == Catch::Approx(1.0 / (2.0 * kTwoPi * d)).epsilon(1e-13));
    CHECK(v[0].x == Catch::Approx(0.0).margin(1e-15));
    CHECK(v[1].y == Catch::Approx(-v[0].y).epsilon(1e-13));

    CHECK(t.velocity_sum(flat, {{1.0, 0.0}}, {})[0].norm() == 0.0);
}

TEST_CASE("normalization and symmetry of the bump table") {
    const KernelTable& t = bump_table();
    CHECK(t.eval_S({0.0, 0.0}, {0.0, 0.0}) == 0.0);

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-3.5, 3.5);
    for (int k = 0; k < 1000; ++k) {
        const Vec2 x{u(rng), u(rng)}, y{u(rng), u(rng)};
        CHECK(t.eval_S(x, y) == t.eval_S(y, x)); // exact by construction
        if ((x - y).norm() > 1e-6)
            CHECK(t.eval_g_b(bump(), x, y) ==
                  Catch::Approx(t.eval_g_b(bump(), y, x)).margin(1e-12));
    }
}

TEST_CASE("node-pair values are reproduced and symmetric") {
    const KernelTable& t = bump_table();
    for (int k = 0; k < t.m() * t.m(); ++k) {
        for (int j = 0; j < t.m() * t.m(); ++j) {
            const Vec2 yk = t.source(k), yj = t.source(j);
            const double skj = t.slice(k).interpolate(yj);
            const double sjk = t.slice(j).interpolate(yk);
            CHECK(skj == Catch::Approx(sjk).margin(1e-14)); // hard node averaging
            CHECK(t.eval_S(yj, yk) == Catch::Approx(skj).margin(1e-13));
        }
    }
}

TEST_CASE("asymmetry regression anchors") {
    const KernelTable& t = bump_table();
    const double smax = t.max_abs_S();
    INFO("raw " << t.raw_asymmetry() << " post-fit " << t.presym_asymmetry() << " max|S| " << smax);
    CHECK(smax > 0.0);
    CHECK(t.presym_asymmetry() <= t.raw_asymmetry() + 1e-15);
    CHECK(t.presym_asymmetry() <= 0.05 * smax);
}

TEST_CASE("gradient consistency with the potential") {
    const KernelTable& t = bump_table();
    const double h = 1e-4;
    for (Vec2 x : {Vec2{0.6, 0.3}, Vec2{-1.1, 0.8}, Vec2{2.1, -1.4}}) {
        for (Vec2 y : {Vec2{0.1, -0.4}, Vec2{-0.9, -1.2}}) {
            const Vec2 g = t.grad_x_g_b(bump(), x, y);
            const double fdx = (t.eval_g_b(bump(), {x.x + h, x.y}, y) -
                                t.eval_g_b(bump(), {x.x - h, x.y}, y)) /
                               (2 * h);
            const double fdy = (t.eval_g_b(bump(), {x.x, x.y + h}, y) -
                                t.eval_g_b(bump(), {x.x, x.y - h}, y)) /
                               (2 * h);
            CHECK(g.x == Catch::Approx(fdx).margin(1e-6));
            CHECK(g.y == Catch::Approx(fdy).margin(1e-6));
        }
    }
    // tabulated centered-difference gradients agree with the interpolant's
    // exact gradient to stencil accuracy
    const Vec2 ge = t.grad_x_S({0.6, 0.3}, {0.1, -0.4});
    const Vec2 gt = t.grad_x_S_tabulated({0.6, 0.3}, {0.1, -0.4});
    CHECK((ge - gt).norm() <= 0.05 * (1.0 + ge.norm()));
}

TEST_CASE("constant-depth gradient reduces to grad g") {
    const DepthField flat = DepthField::constant(1.0);
    const KernelTable t = KernelTable::build(flat, GridGeometry(64, 8.0), 5);
    const Vec2 g = t.grad_x_g_b(flat, {1.0, 0.0}, {0.0, 0.0});
    CHECK(g.x == Catch::Approx(-1.0 / kTwoPi).epsilon(1e-14));
    CHECK(g.y == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("pair evaluation matches the single-sided calls") {
    const KernelTable& t = bump_table();
    const Vec2 x{0.7, -0.2}, y{-0.5, 0.9};
    const KernelPair kp =
        t.eval_pair(x, y, point_depth(bump(), x), point_depth(bump(), y));
    CHECK(kp.g_b == Catch::Approx(t.eval_g_b(bump(), x, y)).margin(1e-15));
    CHECK((kp.grad_x_xy - t.grad_x_g_b(bump(), x, y)).norm() <= 1e-15);
    CHECK((kp.grad_x_yx - t.grad_x_g_b(bump(), y, x)).norm() <= 1e-15);
}

TEST_CASE("quadratic growth bound with a refinement-stable constant") {
    auto fit_C = [](const KernelTable& t) {
        std::mt19937_64 rng(23);
        std::uniform_real_distribution<double> u(-3.8, 3.8);
        double C = 0.0;
        for (int k = 0; k < 1000; ++k) {
            const Vec2 x{u(rng), u(rng)}, y{u(rng), u(rng)};
            C = std::max(C, std::abs(t.eval_S(x, y)) / (1.0 + x.norm2() + y.norm2()));
        }
        return C;
    };
    const double c64 = fit_C(bump_table());
    const KernelTable t128 = KernelTable::build(bump(), GridGeometry(128, 8.0), 5);
    const double c128 = fit_C(t128);
    INFO("C at n=64: " << c64 << ", n=128: " << c128);
    CHECK(c64 > 0.0);
    CHECK(std::abs(c128 - c64) <= 0.2 * std::max(c64, c128));
}

TEST_CASE("kernel and grid velocity routes agree") {
    const GridGeometry geom(128, 8.0);
    const KernelTable t = KernelTable::build(bump(), geom, 5);
    const ContinuumVorticity omega = ContinuumVorticity::from_omega0(Omega0Spec{}, 1024);

    LakeEllipticSolver solver(bump(), geom);
    EllipticOptions opt;
    opt.pin_mean = false;
    const ScalarGrid psi = solver.solve(omega.deposit(geom), opt);
    const VectorGrid u_grid = solver.velocity_from_stream(psi);

    std::vector<std::pair<Vec2, double>> sources(omega.M());
    for (int k = 0; k < omega.M(); ++k)
        sources[k] = {omega.positions()[k], omega.weights()[k]};

    std::vector<Vec2> probes;
    for (int k = 0; k < 20; ++k) {
        const double th = kTwoPi * k / 20.0;
        const double r = 1.5 + 0.7 * (k % 3); // outside the unit-disk support
        probes.push_back({r * std::cos(th), r * std::sin(th)});
    }
    const auto u_kernel = t.velocity_sum(bump(), probes, sources);
    double worst = 0.0;
    for (size_t k = 0; k < probes.size(); ++k) {
        const Vec2 ug = u_grid.interpolate(probes[k]);
        worst = std::max(worst, (ug - u_kernel[k]).norm() / std::max(1e-3, ug.norm()));
    }
    INFO("worst relative probe disagreement " << worst);
    CHECK(worst <= 5e-2);
}

TEST_CASE("cache roundtrip and fingerprint rejection") {
    const KernelTable& t = bump_table();
    const std::string path = "kernel_test_cache.bin";
    t.save(path);

    const KernelTable loaded = KernelTable::load(path, bump());
    CHECK(loaded.c0() == t.c0());
    CHECK(loaded.m() == t.m());
    CHECK(loaded.geom() == t.geom());
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    std::vector<Vec2> q;
    for (int i = 0; i < 12; ++i) q.push_back({u(rng), u(rng)});
    CHECK(interaction_energy(q, loaded, bump()) ==
          Catch::Approx(interaction_energy(q, t, bump())).margin(1e-15));

    // different depth -> fingerprint mismatch
    CHECK_THROWS_AS(KernelTable::load(path, DepthField::radial_bump(0.4, 1.0, 1.0)),
                    CacheMismatch);

    // flipped byte inside the fingerprint region
    {
        std::FILE* f = std::fopen(path.c_str(), "r+b");
        REQUIRE(f != nullptr);
        std::fseek(f, 8 + 4 + 4 + 8 + 8 + 5, SEEK_SET);
        int c = std::fgetc(f);
        std::fseek(f, -1, SEEK_CUR);
        std::fputc(c ^ 0xff, f);
        std::fclose(f);
    }
    CHECK_THROWS_AS(KernelTable::load(path, bump()), CacheMismatch);
    std::remove(path.c_str());
}

TEST_CASE("out-of-box and diagonal errors") {
    const KernelTable& t = bump_table();
    CHECK_THROWS_AS(t.eval_S({5.0, 0.0}, {0.0, 0.0}), OutOfDomain);
    CHECK_THROWS_AS(t.eval_g_b(bump(), {1.0, 1.0}, {1.0, 1.0}), DiagonalSingularity);
}
