#pragma once

#include <cmath>

namespace bedseis {

/// Streamwise (x) / vertical (z) vector.
struct Vec2 {
    double x = 0.0;
    double z = 0.0;

    constexpr Vec2& operator+=(Vec2 o) noexcept { x += o.x; z += o.z; return *this; }
    constexpr Vec2& operator-=(Vec2 o) noexcept { x -= o.x; z -= o.z; return *this; }
    constexpr Vec2& operator*=(double s) noexcept { x *= s; z *= s; return *this; }

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) noexcept { return {a.x + b.x, a.z + b.z}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) noexcept { return {a.x - b.x, a.z - b.z}; }
    friend constexpr Vec2 operator-(Vec2 a) noexcept { return {-a.x, -a.z}; }
    friend constexpr Vec2 operator*(double s, Vec2 a) noexcept { return {s * a.x, s * a.z}; }
    friend constexpr Vec2 operator*(Vec2 a, double s) noexcept { return {s * a.x, s * a.z}; }
    friend constexpr bool operator==(Vec2 a, Vec2 b) noexcept = default;
};

constexpr double dot(Vec2 a, Vec2 b) noexcept { return a.x * b.x + a.z * b.z; }
inline double norm(Vec2 a) noexcept { return std::hypot(a.x, a.z); }

}  // namespace bedseis
