#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "voxanim/errors.hpp"

namespace voxanim {

// The math core is 64-bit throughout; images quantize to 8 bits at the very
// end of the pipeline.

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3() = default;
    constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    constexpr Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

    friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
    friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
    friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
    friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
    friend constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }

    friend constexpr bool operator==(const Vec3& a, const Vec3& b) {
        return a.x == b.x && a.y == b.y && a.z == b.z;
    }

    constexpr double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }

    constexpr Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }

    constexpr double norm2() const { return dot(*this); }
    double norm() const { return std::sqrt(norm2()); }

    Vec3 normalized() const {
        const double n = norm();
        if (n <= 1e-12) {
            throw ValidationError("cannot normalize near-zero vector");
        }
        return {x / n, y / n, z / n};
    }

    bool is_finite() const {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
    }

    constexpr double operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
};

/// Unit quaternion used for authoring and interpolating rotations; converted
/// to a rotation matrix once per frame before rendering.
struct Quaternion {
    double w = 1.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Quaternion() = default;
    constexpr Quaternion(double w_, double x_, double y_, double z_)
        : w(w_), x(x_), y(y_), z(z_) {}

    friend constexpr bool operator==(const Quaternion& a, const Quaternion& b) {
        return a.w == b.w && a.x == b.x && a.y == b.y && a.z == b.z;
    }

    constexpr double norm2() const { return w * w + x * x + y * y + z * z; }
    double norm() const { return std::sqrt(norm2()); }

    Quaternion normalized() const {
        const double n = norm();
        if (n <= 1e-12) {
            throw ValidationError("degenerate quaternion (near-zero norm)");
        }
        return {w / n, x / n, y / n, z / n};
    }

    constexpr double dot(const Quaternion& o) const {
        return w * o.w + x * o.x + y * o.y + z * o.z;
    }

    /// angle in radians, axis need not be unit length.
    static Quaternion from_axis_angle(const Vec3& axis, double angle_rad) {
        const Vec3 u = axis.normalized();
        const double h = 0.5 * angle_rad;
        const double s = std::sin(h);
        return {std::cos(h), u.x * s, u.y * s, u.z * s};
    }
};

/// Row-major 3x3 matrix. When used as a rotation it is expected to be
/// orthonormal with determinant +1.
struct Mat3 {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    static constexpr Mat3 identity() { return {}; }

    constexpr double operator()(int r, int c) const { return m[static_cast<std::size_t>(r * 3 + c)]; }
    constexpr double& operator()(int r, int c) { return m[static_cast<std::size_t>(r * 3 + c)]; }

    friend constexpr bool operator==(const Mat3& a, const Mat3& b) { return a.m == b.m; }

    constexpr Mat3 transpose() const {
        Mat3 t;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                t(r, c) = (*this)(c, r);
        return t;
    }

    constexpr Vec3 operator*(const Vec3& v) const {
        return {
            m[0] * v.x + m[1] * v.y + m[2] * v.z,
            m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z,
        };
    }

    constexpr Mat3 operator*(const Mat3& o) const {
        Mat3 out;
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) {
                out(r, c) = (*this)(r, 0) * o(0, c) + (*this)(r, 1) * o(1, c) + (*this)(r, 2) * o(2, c);
            }
        }
        return out;
    }

    constexpr double determinant() const {
        return m[0] * (m[4] * m[8] - m[5] * m[7])
             - m[1] * (m[3] * m[8] - m[5] * m[6])
             + m[2] * (m[3] * m[7] - m[4] * m[6]);
    }

    /// Max absolute deviation of M*M^T from the identity, plus the det error.
    double rotation_error() const {
        const Mat3 g = *this * transpose();
        double err = std::abs(determinant() - 1.0);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                err = std::max(err, std::abs(g(r, c) - (r == c ? 1.0 : 0.0)));
        return err;
    }
};

/// Per-object animation state: rotation M_R, translation, and a per-axis
/// scale that is applied through the traversal bounds, never through the ray
/// transform.
struct RigidTransform {
    Mat3 rotation;
    Vec3 translation{0, 0, 0};
    Vec3 scale{1, 1, 1};

    friend constexpr bool operator==(const RigidTransform& a, const RigidTransform& b) {
        return a.rotation == b.rotation && a.translation == b.translation && a.scale == b.scale;
    }
};

static_assert(sizeof(RigidTransform) == 15 * sizeof(double),
              "animation state is 15 packed doubles (rotation 9, translation 3, scale 3)");

/// Parametric ray r(t) = origin + t * direction, t >= 0. Directions are kept
/// unit length; the sphere test relies on that.
struct Ray {
    Vec3 origin;
    Vec3 direction{0, 0, 1};
};

inline Ray make_ray(const Vec3& origin, const Vec3& direction) {
    return {origin, direction.normalized()};
}

inline Vec3 ray_at(const Ray& ray, double t) {
    if (t < 0.0) {
        throw ValidationError("ray parameter must be nonnegative");
    }
    return ray.origin + t * ray.direction;
}

/// Converts a (normalizable) quaternion to a rotation matrix.
inline Mat3 rotation_from_quaternion(const Quaternion& q_in) {
    const Quaternion q = q_in.normalized();
    const double w = q.w, x = q.x, y = q.y, z = q.z;
    Mat3 r;
    r(0, 0) = 1 - 2 * (y * y + z * z);
    r(0, 1) = 2 * (x * y - z * w);
    r(0, 2) = 2 * (x * z + y * w);
    r(1, 0) = 2 * (x * y + z * w);
    r(1, 1) = 1 - 2 * (x * x + z * z);
    r(1, 2) = 2 * (y * z - x * w);
    r(2, 0) = 2 * (x * z - y * w);
    r(2, 1) = 2 * (y * z + x * w);
    r(2, 2) = 1 - 2 * (x * x + y * y);
    return r;
}

struct RigidInverse {
    Mat3 rotation;    // transpose of the forward rotation
    Vec3 translation; // negated forward translation
};

/// The inverse pieces are trivial: a rotation inverts by transposing and a
/// translation inverts by negation.
inline RigidInverse inverse_rigid(const RigidTransform& tf) {
    return {tf.rotation.transpose(), -tf.translation};
}

/// World-to-local ray transform: direction is premultiplied by the inverse
/// rotation; the origin is translated to the octree origin first, then
/// rotated the same way. Scale is intentionally absent — it lives in the
/// traversal bounds, which keeps the direction unit length.
inline Ray transform_ray_world_to_local(const Ray& ray, const RigidTransform& tf) {
    const RigidInverse inv = inverse_rigid(tf);
    return {inv.rotation * (ray.origin + inv.translation), inv.rotation * ray.direction};
}

} // namespace voxanim
