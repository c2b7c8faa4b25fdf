#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "lakevortex/errors.hpp"
#include "lakevortex/vec2.hpp"

namespace lakevortex {

/// Pointwise depth data: b together with its exact derivatives.
struct DepthEval {
    double b = 0.0;
    Vec2 grad_b;
    Mat2 hess_b;
    double lap_inv_sqrt_b = 0.0; // Laplacian of 1/sqrt(b)
};

enum class DepthFamily { Constant, RadialGaussianBump, AnisotropicBump };

/// Analytic bathymetry family. Closed forms for b, grad b, D^2 b and
/// Delta(1/sqrt(b)), so no differentiation noise enters the elliptic
/// right-hand sides. Immutable after construction; evaluation is pure.
class DepthField {
public:
    DepthField(DepthFamily family, std::vector<double> params, double gamma = 1.0)
        : family_(family), params_(std::move(params)), gamma_(gamma) {
        switch (family_) {
        case DepthFamily::Constant:
            if (params_.size() != 1) throw DomainError("constant depth takes params [b0]");
            break;
        case DepthFamily::RadialGaussianBump:
            if (params_.size() != 3) throw DomainError("radial-gaussian-bump takes params [a, w, b0]");
            break;
        case DepthFamily::AnisotropicBump:
            if (params_.size() != 4) throw DomainError("anisotropic-bump takes params [a, w1, w2, b0]");
            break;
        }
        if (gamma_ <= 0.0) throw DomainError("decay exponent gamma must be positive");
    }

    static DepthField constant(double b0) { return {DepthFamily::Constant, {b0}}; }
    static DepthField radial_bump(double a, double w, double b0, double gamma = 1.0) {
        return {DepthFamily::RadialGaussianBump, {a, w, b0}, gamma};
    }
    static DepthField anisotropic_bump(double a, double w1, double w2, double b0, double gamma = 1.0) {
        return {DepthFamily::AnisotropicBump, {a, w1, w2, b0}, gamma};
    }

    /// Default test field of the whole project: b = 1 + 0.5*exp(-|x|^2).
    static DepthField default_bump() { return radial_bump(0.5, 1.0, 1.0); }

    DepthFamily family() const { return family_; }
    const std::vector<double>& params() const { return params_; }
    double gamma() const { return gamma_; }
    bool is_constant() const {
        if (family_ == DepthFamily::Constant) return true;
        return params_[0] == 0.0; // bump of zero amplitude
    }

    std::string family_name() const {
        switch (family_) {
        case DepthFamily::Constant: return "constant";
        case DepthFamily::RadialGaussianBump: return "radial-gaussian-bump";
        case DepthFamily::AnisotropicBump: return "anisotropic-bump";
        }
        return "?";
    }

    double value(Vec2 p) const {
        switch (family_) {
        case DepthFamily::Constant:
            return params_[0];
        case DepthFamily::RadialGaussianBump: {
            const double a = params_[0], w = params_[1], b0 = params_[2];
            return b0 + a * std::exp(-p.norm2() / (w * w));
        }
        case DepthFamily::AnisotropicBump: {
            const double a = params_[0], w1 = params_[1], w2 = params_[2], b0 = params_[3];
            return b0 + a * std::exp(-(p.x * p.x) / (w1 * w1) - (p.y * p.y) / (w2 * w2));
        }
        }
        return 0.0;
    }

    Vec2 gradient(Vec2 p) const {
        switch (family_) {
        case DepthFamily::Constant:
            return {0.0, 0.0};
        case DepthFamily::RadialGaussianBump: {
            const double a = params_[0], w = params_[1];
            const double e = a * std::exp(-p.norm2() / (w * w));
            const double c = -2.0 / (w * w);
            return {c * p.x * e, c * p.y * e};
        }
        case DepthFamily::AnisotropicBump: {
            const double a = params_[0], w1 = params_[1], w2 = params_[2];
            const double e = a * std::exp(-(p.x * p.x) / (w1 * w1) - (p.y * p.y) / (w2 * w2));
            return {-2.0 * p.x / (w1 * w1) * e, -2.0 * p.y / (w2 * w2) * e};
        }
        }
        return {};
    }

    Mat2 hessian(Vec2 p) const {
        switch (family_) {
        case DepthFamily::Constant:
            return {};
        case DepthFamily::RadialGaussianBump: {
            const double a = params_[0], w = params_[1];
            const double iw2 = 1.0 / (w * w);
            const double e = a * std::exp(-p.norm2() * iw2);
            Mat2 h;
            h.a11 = (-2.0 * iw2 + 4.0 * iw2 * iw2 * p.x * p.x) * e;
            h.a22 = (-2.0 * iw2 + 4.0 * iw2 * iw2 * p.y * p.y) * e;
            h.a12 = h.a21 = 4.0 * iw2 * iw2 * p.x * p.y * e;
            return h;
        }
        case DepthFamily::AnisotropicBump: {
            const double a = params_[0], w1 = params_[1], w2 = params_[2];
            const double c1 = 1.0 / (w1 * w1), c2 = 1.0 / (w2 * w2);
            const double e = a * std::exp(-p.x * p.x * c1 - p.y * p.y * c2);
            Mat2 h;
            h.a11 = (-2.0 * c1 + 4.0 * c1 * c1 * p.x * p.x) * e;
            h.a22 = (-2.0 * c2 + 4.0 * c2 * c2 * p.y * p.y) * e;
            h.a12 = h.a21 = 4.0 * c1 * c2 * p.x * p.y * e;
            return h;
        }
        }
        return {};
    }

    /// Delta(1/sqrt(b)) = -(1/2) b^{-3/2} Delta b + (3/4) b^{-5/2} |grad b|^2
    double lap_inv_sqrt(Vec2 p) const {
        if (family_ == DepthFamily::Constant) return 0.0;
        const double b = value(p);
        const Vec2 g = gradient(p);
        const double lap_b = hessian(p).trace();
        const double b32 = b * std::sqrt(b);
        return -0.5 * lap_b / b32 + 0.75 * g.norm2() / (b32 * b);
    }

    DepthEval eval(Vec2 p) const {
        return {value(p), gradient(p), hessian(p), lap_inv_sqrt(p)};
    }

private:
    DepthFamily family_;
    std::vector<double> params_;
    double gamma_;
};

struct DepthReport {
    double min_b = 0.0;
    double max_b = 0.0;
    double max_weighted_derivative = 0.0;
    bool weighted_derivative_grows = false;
};

/// Samples the decay and positivity conditions the rest of the code relies on:
/// min b over a 512^2 grid plus far points at the given radii, and the
/// weighted derivative (1+|x|)^{4+gamma} (|grad b| + |D^2 b|).
inline DepthReport validate_depth(const DepthField& field, const std::vector<double>& radii,
                                  double box_half_width = 10.0) {
    if (radii.empty()) throw DomainError("validate_depth: radii list must be nonempty");

    DepthReport rep;
    rep.min_b = std::numeric_limits<double>::infinity();
    rep.max_b = -std::numeric_limits<double>::infinity();

    auto weighted = [&](Vec2 p) {
        const Vec2 g = field.gradient(p);
        const Mat2 h = field.hessian(p);
        const double hn = std::abs(h.a11) + std::abs(h.a12) + std::abs(h.a21) + std::abs(h.a22);
        return std::pow(1.0 + p.norm(), 4.0 + field.gamma()) * (g.norm() + hn);
    };

    const int n = 512;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const Vec2 p{-box_half_width + (2.0 * box_half_width * i) / (n - 1),
                         -box_half_width + (2.0 * box_half_width * j) / (n - 1)};
            const double b = field.value(p);
            rep.min_b = std::min(rep.min_b, b);
            rep.max_b = std::max(rep.max_b, b);
            rep.max_weighted_derivative = std::max(rep.max_weighted_derivative, weighted(p));
        }
    }

    double prev_radial_max = -1.0;
    for (double r : radii) {
        double radial_max = 0.0;
        const int dirs = 32;
        for (int k = 0; k < dirs; ++k) {
            const double th = kTwoPi * k / dirs;
            const Vec2 p{r * std::cos(th), r * std::sin(th)};
            rep.min_b = std::min(rep.min_b, field.value(p));
            rep.max_b = std::max(rep.max_b, field.value(p));
            radial_max = std::max(radial_max, weighted(p));
        }
        rep.max_weighted_derivative = std::max(rep.max_weighted_derivative, radial_max);
        if (prev_radial_max >= 0.0 && radial_max > prev_radial_max * (1.0 + 1e-12)) {
            rep.weighted_derivative_grows = true;
        }
        prev_radial_max = radial_max;
    }

    if (rep.min_b <= 0.0) {
        throw ValidationFailure("depth field is nonpositive somewhere sampled, min b = " +
                                std::to_string(rep.min_b));
    }
    return rep;
}

} // namespace lakevortex
