#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "lakevortex/depth.hpp"
#include "lakevortex/elliptic.hpp"
#include "lakevortex/fingerprint.hpp"
#include "lakevortex/grid.hpp"
#include "lakevortex/poisson.hpp"
#include "lakevortex/vec2.hpp"

namespace lakevortex {

/// Per-point depth data cached once per particle set / RK stage so the pair
/// loops do not re-evaluate exponentials.
struct PointDepth {
    double b = 1.0;
    double sqrt_b = 1.0;
    Vec2 grad_b;
};

inline PointDepth point_depth(const DepthField& depth, Vec2 p) {
    PointDepth d;
    d.b = depth.value(p);
    d.sqrt_b = std::sqrt(d.b);
    d.grad_b = depth.gradient(p);
    return d;
}

/// One pair of kernel evaluations sharing the interpolation gathers:
/// g_b(x,y) plus the x-gradients at (x,y) and at (y,x).
struct KernelPair {
    double g_b = 0.0;
    Vec2 grad_x_xy;
    Vec2 grad_x_yx;
};

/// Tabulation of the symmetric correction S_b on an m x m source lattice
/// covering [-L/2, L/2]^2, one elliptic solve per source. Evaluation is the
/// average of the two interpolation orders, so eval_S(x,y) == eval_S(y,x)
/// holds by construction; gradients are the exact derivatives of that
/// interpolant, which makes the pair forces exact gradients of the pair
/// energies (the conservation identities then hold to integrator order).
class KernelTable {
public:
    KernelTable() = default;

    static double source_half_width(const GridGeometry& geom) { return geom.L / 2.0; }

    /// Builds the table: one lake-elliptic solve per source with right-hand
    /// side -g(.-y_k) sqrt(b(y_k)) Delta(1/sqrt(b)), per-slice constants
    /// fitted by least squares to symmetrize the source-pair matrix, node
    /// pairs averaged exactly, then everything shifted so S(0,0) = 0.
    static KernelTable build(const DepthField& depth, GridGeometry geom, int m,
                             const EllipticOptions& opt_in = {}) {
        if (m < 2) throw DomainError("build_kernel_table: m must be >= 2");
        KernelTable t;
        t.geom_ = geom;
        t.m_ = m;
        t.Ls_ = source_half_width(geom);
        t.hs_ = 2.0 * t.Ls_ / (m - 1);
        t.fingerprint_ = depth_fingerprint(depth);
        t.all_zero_ = depth.is_constant();
        t.slices_.assign(size_t(m) * m, ScalarGrid(geom));

        if (!t.all_zero_) {
            LakeEllipticSolver solver(depth, geom);
            EllipticOptions opt = opt_in;
            opt.pin_mean = false; // constants are fitted below
            const int n = geom.n;
            const double h = geom.h();
            ScalarGrid rhs(geom);
            for (int k = 0; k < m * m; ++k) {
                const Vec2 y = t.source(k);
                const double sb_y = std::sqrt(depth.value(y));
                for (int j = 0; j < n; ++j) {
                    for (int i = 0; i < n; ++i) {
                        const Vec2 x = geom.node(i, j);
                        const double r = (x - y).norm();
                        const double gval =
                            (r < 0.5 * h) ? FreeSpacePoisson::self_cell_value(h) : log_kernel(r);
                        rhs.at(i, j) = -gval * sb_y * depth.lap_inv_sqrt(x);
                    }
                }
                try {
                    t.slices_[k] = solver.solve(rhs, opt);
                } catch (const NonConvergence& e) {
                    throw NonConvergence("kernel table source " + std::to_string(k) + ": " +
                                         e.what());
                }
            }
            t.symmetrize();
        }

        // normalization S(0,0) = 0
        t.c0_ = -t.eval_S({0.0, 0.0}, {0.0, 0.0});
        if (t.c0_ != 0.0)
            for (auto& s : t.slices_) s.shift(t.c0_);

        t.build_gradient_slices();
        return t;
    }

    const GridGeometry& geom() const { return geom_; }
    int m() const { return m_; }
    double source_box_half_width() const { return Ls_; }
    double c0() const { return c0_; }
    const Fingerprint& fingerprint() const { return fingerprint_; }
    bool all_zero() const { return all_zero_; }
    double presym_asymmetry() const { return presym_asymmetry_; }
    double raw_asymmetry() const { return raw_asymmetry_; }
    double max_abs_S() const {
        double v = 0.0;
        for (const auto& s : slices_) v = std::max(v, s.max_abs());
        return v;
    }

    Vec2 source(int k) const {
        return {-Ls_ + (k % m_) * hs_, -Ls_ + (k / m_) * hs_};
    }

    const ScalarGrid& slice(int k) const { return slices_[k]; }

    bool in_box(Vec2 p) const {
        return p.x >= -Ls_ && p.x <= Ls_ && p.y >= -Ls_ && p.y <= Ls_;
    }

    /// S_b(x,y), symmetric by construction (average of both orders).
    double eval_S(Vec2 x, Vec2 y) const {
        if (all_zero_) {
            check_box(x, y);
            return 0.0;
        }
        return 0.5 * (one_order(x, y) + one_order(y, x));
    }

    /// Exact x-gradient of eval_S's interpolant.
    Vec2 grad_x_S(Vec2 x, Vec2 y) const {
        if (all_zero_) {
            check_box(x, y);
            return {0.0, 0.0};
        }
        Stack sx = gather(x, y); // fine slot x, coarse slot y
        Stack sy = gather(y, x); // fine slot y, coarse slot x
        return 0.5 * (sx.fine_grad + sy.coarse_grad);
    }

    /// Centered-difference gradient tables interpolated directly (the values
    /// persisted in the cache file); kept as a cross-check of grad_x_S.
    Vec2 grad_x_S_tabulated(Vec2 x, Vec2 y) const {
        if (all_zero_) {
            check_box(x, y);
            return {0.0, 0.0};
        }
        const Blend by = blend(y);
        Vec2 g{0.0, 0.0};
        for (int c = 0; c < 4; ++c) {
            const VectorGrid& gs = grad_slices_[by.k[c]];
            g += by.w[c] * Vec2{gs.u1.interpolate(x), gs.u2.interpolate(x)};
        }
        return g;
    }

    /// g_b(x,y) = sqrt(b(x)b(y)) g(x-y) + S_b(x,y)
    double eval_g_b(const DepthField& depth, Vec2 x, Vec2 y) const {
        const Vec2 d = x - y;
        if (d.norm() < 1e-14) throw DiagonalSingularity("eval_g_b: coincident points");
        return std::sqrt(depth.value(x) * depth.value(y)) * log_kernel(d.norm()) + eval_S(x, y);
    }

    /// grad_x g_b(x,y), the three-term sum
    ///   (grad b(x)/(2 sqrt(b(x)))) sqrt(b(y)) g(x-y)
    /// + sqrt(b(x)b(y)) grad g(x-y) + grad_x S_b(x,y).
    Vec2 grad_x_g_b(const DepthField& depth, Vec2 x, Vec2 y) const {
        return eval_pair(x, y, point_depth(depth, x), point_depth(depth, y)).grad_x_xy;
    }

    /// Shared-gather evaluation of g_b(x,y), grad_x g_b(x,y) and
    /// grad_x g_b(y,x); the hot path of the N-body loops.
    KernelPair eval_pair(Vec2 x, Vec2 y, const PointDepth& dx, const PointDepth& dy) const {
        const Vec2 d = x - y;
        const double r2 = d.norm2();
        if (r2 < 1e-28) throw DiagonalSingularity("kernel pair: coincident points");
        const double g = -0.5 * std::log(r2) / kTwoPi;
        const double sqprod = dx.sqrt_b * dy.sqrt_b;
        const double core = sqprod * g;
        const Vec2 gg = d * (-1.0 / (kTwoPi * r2)); // grad g(x-y)

        KernelPair out;
        out.g_b = core;
        out.grad_x_xy = (0.5 * core / dx.b) * dx.grad_b + sqprod * gg;
        out.grad_x_yx = (0.5 * core / dy.b) * dy.grad_b - sqprod * gg;
        if (!all_zero_) {
            Stack sx = gather(x, y);
            Stack sy = gather(y, x);
            out.g_b += 0.5 * (sx.fine_value + sy.fine_value);
            out.grad_x_xy += 0.5 * (sx.fine_grad + sy.coarse_grad);
            out.grad_x_yx += 0.5 * (sy.fine_grad + sx.coarse_grad);
        } else {
            check_box(x, y);
        }
        return out;
    }

    /// Direct O(targets x sources) kernel sum
    /// u(t) = -(1/b(t)) sum_j Gamma_j grad^perp_x g_b(t, s_j),
    /// skipping the self pair when a target coincides with a source exactly.
    std::vector<Vec2> velocity_sum(const DepthField& depth, const std::vector<Vec2>& targets,
                                   const std::vector<std::pair<Vec2, double>>& sources) const {
        std::vector<PointDepth> sd(sources.size());
        for (size_t j = 0; j < sources.size(); ++j) sd[j] = point_depth(depth, sources[j].first);
        std::vector<Vec2> out(targets.size());
        for (size_t i = 0; i < targets.size(); ++i) {
            const Vec2 t = targets[i];
            const PointDepth td = point_depth(depth, t);
            Vec2 acc{0.0, 0.0};
            for (size_t j = 0; j < sources.size(); ++j) {
                const auto& [s, strength] = sources[j];
                if (s.x == t.x && s.y == t.y) continue;
                const KernelPair kp = eval_pair(t, s, td, sd[j]);
                acc += strength * kp.grad_x_xy.perp();
            }
            out[i] = -(1.0 / td.b) * acc;
        }
        return out;
    }

    // --- cache file -------------------------------------------------------
    // little-endian: magic "LAKEKNL1", u32 n, u32 m, f64 L, f64 c0,
    // 32-byte depth fingerprint, m^2 slices of n^2 f64 S values row-major,
    // then m^2 slices of 2 n^2 f64 gradient values (u1 block then u2 block).

    void save(const std::string& path) const {
        const std::string tmp = path + ".tmp";
        std::FILE* f = std::fopen(tmp.c_str(), "wb");
        if (!f) throw std::runtime_error("cannot open cache file for writing: " + tmp);
        auto w = [&](const void* p, size_t bytes) {
            if (std::fwrite(p, 1, bytes, f) != bytes) {
                std::fclose(f);
                throw std::runtime_error("short write to " + tmp);
            }
        };
        w("LAKEKNL1", 8);
        const uint32_t n32 = uint32_t(geom_.n), m32 = uint32_t(m_);
        w(&n32, 4);
        w(&m32, 4);
        w(&geom_.L, 8);
        w(&c0_, 8);
        w(fingerprint_.data(), 32);
        for (const auto& s : slices_) w(s.values().data(), s.values().size() * 8);
        for (const auto& g : grad_slices_) {
            w(g.u1.values().data(), g.u1.values().size() * 8);
            w(g.u2.values().data(), g.u2.values().size() * 8);
        }
        std::fclose(f);
        if (std::rename(tmp.c_str(), path.c_str()) != 0)
            throw std::runtime_error("cannot move cache file into place: " + path);
    }

    static KernelTable load(const std::string& path, const DepthField& depth) {
        std::FILE* f = std::fopen(path.c_str(), "rb");
        if (!f) throw std::runtime_error("cannot open cache file: " + path);
        auto r = [&](void* p, size_t bytes) {
            if (std::fread(p, 1, bytes, f) != bytes) {
                std::fclose(f);
                throw CacheMismatch("truncated cache file: " + path);
            }
        };
        char magic[8];
        r(magic, 8);
        if (std::memcmp(magic, "LAKEKNL1", 8) != 0) {
            std::fclose(f);
            throw CacheMismatch("bad magic in cache file: " + path);
        }
        uint32_t n32 = 0, m32 = 0;
        double L = 0.0, c0 = 0.0;
        r(&n32, 4);
        r(&m32, 4);
        r(&L, 8);
        r(&c0, 8);
        Fingerprint fp{};
        r(fp.data(), 32);
        if (fp != depth_fingerprint(depth)) {
            std::fclose(f);
            throw CacheMismatch("depth fingerprint mismatch in cache file: " + path);
        }
        KernelTable t;
        t.geom_ = GridGeometry(int(n32), L);
        t.m_ = int(m32);
        t.Ls_ = source_half_width(t.geom_);
        t.hs_ = 2.0 * t.Ls_ / (t.m_ - 1);
        t.c0_ = c0;
        t.fingerprint_ = fp;
        t.slices_.assign(size_t(t.m_) * t.m_, ScalarGrid(t.geom_));
        for (auto& s : t.slices_) r(s.values().data(), s.values().size() * 8);
        t.grad_slices_.assign(size_t(t.m_) * t.m_, VectorGrid(t.geom_));
        for (auto& g : t.grad_slices_) {
            r(g.u1.values().data(), g.u1.values().size() * 8);
            r(g.u2.values().data(), g.u2.values().size() * 8);
        }
        std::fclose(f);
        t.all_zero_ = true;
        for (const auto& s : t.slices_)
            if (s.max_abs() != 0.0) {
                t.all_zero_ = false;
                break;
            }
        return t;
    }

private:
    struct Blend {
        int k[4];
        double w[4];
        double tx, ty; // fractions inside the source cell
        int ix, iy;
    };

    Blend blend(Vec2 y) const {
        if (!in_box(y)) throw OutOfDomain("kernel table: point outside the source box");
        double fx = (y.x + Ls_) / hs_;
        double fy = (y.y + Ls_) / hs_;
        int ix = std::min(int(std::floor(fx)), m_ - 2);
        int iy = std::min(int(std::floor(fy)), m_ - 2);
        ix = std::max(ix, 0);
        iy = std::max(iy, 0);
        Blend b;
        b.ix = ix;
        b.iy = iy;
        b.tx = fx - ix;
        b.ty = fy - iy;
        b.k[0] = iy * m_ + ix;
        b.k[1] = iy * m_ + ix + 1;
        b.k[2] = (iy + 1) * m_ + ix;
        b.k[3] = (iy + 1) * m_ + ix + 1;
        b.w[0] = (1 - b.tx) * (1 - b.ty);
        b.w[1] = b.tx * (1 - b.ty);
        b.w[2] = (1 - b.tx) * b.ty;
        b.w[3] = b.tx * b.ty;
        return b;
    }

    struct Stack {
        double fine_value = 0.0; // J(p, q) = sum_k w_k(q) slice_k(p)
        Vec2 fine_grad;          // d/dp J(p, q)
        Vec2 coarse_grad;        // d/dq J(p, q)
    };

    /// All derivatives of J(p,q) for fine point p blended across the four
    /// sources around q.
    Stack gather(Vec2 p, Vec2 q) const {
        const Blend bq = blend(q);
        double v[4];
        Vec2 g[4];
        for (int c = 0; c < 4; ++c) slices_[bq.k[c]].interpolate_value_gradient(p, v[c], g[c]);
        Stack s;
        for (int c = 0; c < 4; ++c) {
            s.fine_value += bq.w[c] * v[c];
            s.fine_grad += bq.w[c] * g[c];
        }
        // d/dq of the bilinear blend weights
        const double ihs = 1.0 / hs_;
        s.coarse_grad.x = ihs * ((1 - bq.ty) * (v[1] - v[0]) + bq.ty * (v[3] - v[2]));
        s.coarse_grad.y = ihs * ((1 - bq.tx) * (v[2] - v[0]) + bq.tx * (v[3] - v[1]));
        return s;
    }

    double one_order(Vec2 x, Vec2 y) const {
        const Blend by = blend(y);
        double acc = 0.0;
        for (int c = 0; c < 4; ++c) acc += by.w[c] * slices_[by.k[c]].interpolate(x);
        return acc;
    }

    void check_box(Vec2 x, Vec2 y) const {
        if (!in_box(x) || !in_box(y))
            throw OutOfDomain("kernel table: point outside the source box");
    }

    void symmetrize() {
        const int mm = m_ * m_;
        // source-pair matrix M[j][k] = S(y_j, y_k) from slice k
        std::vector<double> M(size_t(mm) * mm);
        auto fill_M = [&] {
            for (int k = 0; k < mm; ++k)
                for (int j = 0; j < mm; ++j) M[size_t(j) * mm + k] = slices_[k].interpolate(source(j));
        };
        fill_M();
        auto asym = [&] {
            double a = 0.0;
            for (int j = 0; j < mm; ++j)
                for (int k = 0; k < mm; ++k)
                    a = std::max(a, std::abs(M[size_t(j) * mm + k] - M[size_t(k) * mm + j]));
            return a;
        };
        raw_asymmetry_ = asym();

        // least-squares constant per slice: c_k = mean_j (M[k][j] - M[j][k])
        for (int k = 0; k < mm; ++k) {
            double c = 0.0;
            for (int j = 0; j < mm; ++j) c += M[size_t(k) * mm + j] - M[size_t(j) * mm + k];
            c /= double(mm);
            slices_[k].shift(c);
        }
        fill_M();
        presym_asymmetry_ = asym();

        // exact averaging at node pairs when sources sit on grid nodes
        const double h = geom_.h();
        const double ratio = hs_ / h;
        if (std::abs(ratio - std::round(ratio)) < 1e-9) {
            for (int k = 0; k < mm; ++k) {
                for (int j = 0; j < mm; ++j) {
                    const Vec2 yj = source(j);
                    const int gi = int(std::round((yj.x + geom_.L) / h));
                    const int gj = int(std::round((yj.y + geom_.L) / h));
                    if (j < k) continue;
                    const Vec2 yk = source(k);
                    const int gi2 = int(std::round((yk.x + geom_.L) / h));
                    const int gj2 = int(std::round((yk.y + geom_.L) / h));
                    const double avg =
                        0.5 * (slices_[k].at(gi, gj) + slices_[j].at(gi2, gj2));
                    slices_[k].at(gi, gj) = avg;
                    slices_[j].at(gi2, gj2) = avg;
                }
            }
        }
    }

    void build_gradient_slices() {
        grad_slices_.clear();
        grad_slices_.reserve(slices_.size());
        for (const auto& s : slices_) grad_slices_.push_back(gradient(s));
    }

    GridGeometry geom_;
    int m_ = 0;
    double Ls_ = 0.0;
    double hs_ = 0.0;
    double c0_ = 0.0;
    bool all_zero_ = true;
    double raw_asymmetry_ = 0.0;
    double presym_asymmetry_ = 0.0;
    Fingerprint fingerprint_{};
    std::vector<ScalarGrid> slices_;
    std::vector<VectorGrid> grad_slices_;
};

} // namespace lakevortex
