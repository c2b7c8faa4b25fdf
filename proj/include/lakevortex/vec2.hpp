#pragma once

#include <cmath>

namespace lakevortex {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2() = default;
    constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

    constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
    constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    constexpr Vec2 operator-() const { return {-x, -y}; }

    constexpr double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
    constexpr double norm2() const { return x * x + y * y; }

    // rotation by pi/2: (x1,x2)^perp = (-x2,x1)
    constexpr Vec2 perp() const { return {-y, x}; }
};

constexpr Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }

struct Mat2 {
    // row-major 2x2
    double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;
    constexpr double trace() const { return a11 + a22; }
};

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// opposite of the free-space Green function of the Laplacian
inline double log_kernel(double r) { return -std::log(r) / kTwoPi; }
inline Vec2 log_kernel_grad(Vec2 d) { return d * (-1.0 / (kTwoPi * d.norm2())); }

} // namespace lakevortex
