#pragma once

#include <cmath>

namespace loadertwin {

/// Minimal planar vector.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double k) const { return {x * k, y * k}; }
    Vec2 operator/(double k) const { return {x / k, y / k}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    /// z-component of the 2D cross product.
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    double norm2() const { return x * x + y * y; }
    /// Counter-clockwise perpendicular.
    Vec2 perp() const { return {-y, x}; }
    Vec2 rotated(double a) const {
        const double c = std::cos(a), s = std::sin(a);
        return {c * x - s * y, s * x + c * y};
    }
};

inline Vec2 operator*(double k, const Vec2& v) { return v * k; }

/// Vector of given length along the given direction angle.
inline Vec2 polar(double length, double angle) {
    return {length * std::cos(angle), length * std::sin(angle)};
}

} // namespace loadertwin
