#pragma once

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <vector>

#include "lakevortex/grid.hpp"
#include "lakevortex/vec2.hpp"

namespace lakevortex {

namespace detail {
// FFTW planning is not reentrant; executions on distinct buffers are.
inline std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}
} // namespace detail

/// Free-space Poisson solver on [-L,L)^2: psi = g * f by zero-padded spectral
/// convolution against the sampled log kernel g(x) = -ln|x|/(2pi). The
/// singular kernel cell at the origin carries the exact cell average of g
/// over a square of side h, which keeps O(h^2) consistency for point
/// deposits. Returns the potential-theoretic normalization (no mean shift).
class FreeSpacePoisson {
public:
    explicit FreeSpacePoisson(GridGeometry geom)
        : geom_(geom), np_(2 * geom.n), real_(size_t(np_) * np_),
          spec_(size_t(np_) * (np_ / 2 + 1)), kernel_hat_(spec_.size()) {
        std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
        fwd_ = fftw_plan_dft_r2c_2d(np_, np_, real_.data(),
                                    reinterpret_cast<fftw_complex*>(spec_.data()), FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_c2r_2d(np_, np_, reinterpret_cast<fftw_complex*>(spec_.data()),
                                    real_.data(), FFTW_ESTIMATE);
        build_kernel();
    }

    ~FreeSpacePoisson() {
        std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
    }

    FreeSpacePoisson(const FreeSpacePoisson&) = delete;
    FreeSpacePoisson& operator=(const FreeSpacePoisson&) = delete;

    const GridGeometry& geom() const { return geom_; }

    /// Exact cell average of g over a square of side h centered at 0.
    static double self_cell_value(double h) {
        return -(1.0 / (2.0 * kTwoPi)) * (std::log(h * h / 2.0) - 3.0 + kTwoPi / 4.0);
    }

    /// True when the last solve saw non-negligible mass on the boundary ring
    /// (the free-space convolution assumes f ~ 0 there).
    bool boundary_warning() const { return boundary_warning_; }

    ScalarGrid solve(const ScalarGrid& f) {
        require_same_geometry(f.geom(), geom_, "poisson_free_space");
        const int n = geom_.n;
        const double h = geom_.h();

        boundary_warning_ = f.max_abs_boundary_ring() > 1e-6 * f.max_abs();

        std::fill(real_.begin(), real_.end(), 0.0);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) real_[size_t(j) * np_ + i] = f.at(i, j);

        fftw_execute(fwd_);
        const double scale = h * h / (double(np_) * np_);
        for (size_t k = 0; k < spec_.size(); ++k) spec_[k] *= kernel_hat_[k] * scale;
        fftw_execute(bwd_);

        ScalarGrid psi(geom_);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) psi.at(i, j) = real_[size_t(j) * np_ + i];
        return psi;
    }

private:
    void build_kernel() {
        const double h = geom_.h();
        for (int j = 0; j < np_; ++j) {
            const int oy = (j <= np_ / 2) ? j : j - np_;
            for (int i = 0; i < np_; ++i) {
                const int ox = (i <= np_ / 2) ? i : i - np_;
                double v;
                if (ox == 0 && oy == 0) v = self_cell_value(h);
                else v = log_kernel(h * std::sqrt(double(ox) * ox + double(oy) * oy));
                real_[size_t(j) * np_ + i] = v;
            }
        }
        fftw_execute(fwd_);
        for (size_t k = 0; k < spec_.size(); ++k) kernel_hat_[k] = spec_[k];
    }

    GridGeometry geom_;
    int np_;
    std::vector<double> real_;
    std::vector<std::complex<double>> spec_;
    std::vector<std::complex<double>> kernel_hat_;
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
    bool boundary_warning_ = false;
};

/// Stateless convenience wrapper for one-off solves.
inline ScalarGrid poisson_free_space(const ScalarGrid& f) {
    FreeSpacePoisson solver(f.geom());
    return solver.solve(f);
}

} // namespace lakevortex
