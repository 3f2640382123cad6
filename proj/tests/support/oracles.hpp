// Independent reference implementations used as test oracles. Nothing here
// may call into the code paths it is checking: rotation goes through the
// axis-angle formula instead of quaternions, ray/sphere through the explicit
// quadratic, and octree traversal through dense-grid DDA marching.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>

#include "voxanim/ingest.hpp"
#include "voxanim/math.hpp"
#include "voxanim/renderer.hpp"

namespace oracles {

using voxanim::Ray;
using voxanim::Vec3;
using voxanim::VoxelGrid;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Rodrigues' rotation formula: rotate v around the unit axis by angle.
inline Vec3 rodrigues_rotate(const Vec3& axis_unit, double angle_rad, const Vec3& v) {
    const double c = std::cos(angle_rad);
    const double s = std::sin(angle_rad);
    const Vec3 k = axis_unit;
    return v * c + k.cross(v) * s + k * (k.dot(v) * (1.0 - c));
}

/// Exact quadratic ray/sphere intersection; returns the two roots (t0 <= t1)
/// of |o + t d - c|^2 = r^2, or nothing if the ray line misses the sphere.
struct QuadraticSphere {
    double t0 = 0.0;
    double t1 = 0.0;
};

inline std::optional<QuadraticSphere> quadratic_ray_sphere(const Ray& ray, const Vec3& center,
                                                           double radius) {
    const Vec3 l = center - ray.origin;
    const double b = l.dot(ray.direction); // direction is unit length
    const double c = l.norm2() - radius * radius;
    const double disc = b * b - c;
    if (disc < 0.0) {
        return std::nullopt;
    }
    const double root = std::sqrt(disc);
    return QuadraticSphere{b - root, b + root};
}

/// Dense-grid DDA marcher over [-h, +h] mapped to resolution^3 cells. Steps
/// voxel by voxel along the ray and reports the first set voxel with the
/// parameter at which the ray entered it (clamped to 0 when starting inside).
/// Ties between axes break with priority x > y > z, and zero direction
/// components use the same half-open [lo, hi) slab convention the traversal
/// defines.
struct DdaHit {
    std::uint32_t x = 0;
    std::uint32_t y = 0;
    std::uint32_t z = 0;
    double t = 0.0;
};

inline std::optional<DdaHit> dda_trace(const VoxelGrid& grid, const Vec3& half_extent,
                                       const Ray& ray) {
    const int n = static_cast<int>(grid.resolution());
    const double lo[3] = {-half_extent.x, -half_extent.y, -half_extent.z};
    const double hi[3] = {half_extent.x, half_extent.y, half_extent.z};
    const double cell[3] = {2.0 * half_extent.x / n, 2.0 * half_extent.y / n,
                            2.0 * half_extent.z / n};
    const double o[3] = {ray.origin.x, ray.origin.y, ray.origin.z};
    const double d[3] = {ray.direction.x, ray.direction.y, ray.direction.z};

    double t_enter = -kInf;
    double t_exit = kInf;
    for (int a = 0; a < 3; ++a) {
        if (d[a] == 0.0) {
            if (o[a] < lo[a] || o[a] >= hi[a]) {
                return std::nullopt;
            }
            continue;
        }
        double t0 = (lo[a] - o[a]) / d[a];
        double t1 = (hi[a] - o[a]) / d[a];
        if (t0 > t1) {
            std::swap(t0, t1);
        }
        t_enter = std::max(t_enter, t0);
        t_exit = std::min(t_exit, t1);
    }
    if (!(t_enter < t_exit) || t_exit < 0.0) {
        return std::nullopt;
    }

    double t = std::max(t_enter, 0.0);
    int idx[3];
    int step[3];
    double tmax[3];
    double tdelta[3];
    for (int a = 0; a < 3; ++a) {
        const double f = (o[a] + t * d[a] - lo[a]) / cell[a];
        int i = static_cast<int>(std::floor(f));
        // A downward ray starting exactly on a gridline belongs to the cell
        // below that line.
        if (d[a] < 0.0 && f == std::floor(f)) {
            i -= 1;
        }
        i = std::clamp(i, 0, n - 1);
        idx[a] = i;
        if (d[a] > 0.0) {
            step[a] = 1;
            tmax[a] = (lo[a] + (i + 1) * cell[a] - o[a]) / d[a];
            tdelta[a] = cell[a] / d[a];
        } else if (d[a] < 0.0) {
            step[a] = -1;
            tmax[a] = (lo[a] + i * cell[a] - o[a]) / d[a];
            tdelta[a] = -cell[a] / d[a];
        } else {
            step[a] = 0;
            tmax[a] = kInf;
            tdelta[a] = kInf;
        }
    }

    while (true) {
        if (grid.is_set(static_cast<std::uint32_t>(idx[0]), static_cast<std::uint32_t>(idx[1]),
                        static_cast<std::uint32_t>(idx[2]))) {
            return DdaHit{static_cast<std::uint32_t>(idx[0]), static_cast<std::uint32_t>(idx[1]),
                          static_cast<std::uint32_t>(idx[2]), std::max(t, 0.0)};
        }
        int axis = 0;
        if (tmax[1] < tmax[axis]) {
            axis = 1;
        }
        if (tmax[2] < tmax[axis]) {
            axis = 2;
        }
        t = tmax[axis];
        idx[axis] += step[axis];
        if (idx[axis] < 0 || idx[axis] >= n) {
            return std::nullopt;
        }
        tmax[axis] += tdelta[axis];
    }
}

/// Reference node counter: recursively subdivides the grid and counts the
/// cubes (down to size 2) that contain at least one set voxel. This is the
/// number of octree nodes a sparse build must produce.
inline std::uint64_t subdivision_node_count(const VoxelGrid& grid, std::uint32_t x0,
                                            std::uint32_t y0, std::uint32_t z0,
                                            std::uint32_t size) {
    bool any = false;
    for (std::uint32_t x = x0; x < x0 + size && !any; ++x) {
        for (std::uint32_t y = y0; y < y0 + size && !any; ++y) {
            for (std::uint32_t z = z0; z < z0 + size && !any; ++z) {
                any = grid.is_set(x, y, z);
            }
        }
    }
    if (!any) {
        return 0;
    }
    if (size == 2) {
        return 1;
    }
    std::uint64_t count = 1;
    const std::uint32_t half = size / 2;
    for (unsigned oct = 0; oct < 8; ++oct) {
        count += subdivision_node_count(grid, x0 + ((oct & 4) ? half : 0),
                                        y0 + ((oct & 2) ? half : 0),
                                        z0 + ((oct & 1) ? half : 0), half);
    }
    return count;
}

/// Empty grids still have a root node.
inline std::uint64_t reference_node_count(const VoxelGrid& grid) {
    const std::uint64_t count = subdivision_node_count(grid, 0, 0, 0, grid.resolution());
    return count == 0 ? 1 : count;
}

inline std::uint64_t menger_leaf_count(std::uint32_t level) {
    std::uint64_t count = 1;
    for (std::uint32_t i = 0; i < level; ++i) {
        count *= 20;
    }
    return count;
}

/// Strict reference parser for the P6 streams write_ppm emits.
inline voxanim::Image parse_ppm_p6(const std::string& bytes) {
    voxanim::Image image;
    std::size_t pos = 0;
    const auto expect = [&](const std::string& token) {
        if (bytes.compare(pos, token.size(), token) != 0) {
            throw std::runtime_error("ppm: expected \"" + token + "\" at offset " +
                                     std::to_string(pos));
        }
        pos += token.size();
    };
    const auto read_int = [&]() {
        std::size_t digits = 0;
        int value = 0;
        while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
            value = value * 10 + (bytes[pos] - '0');
            ++pos;
            ++digits;
        }
        if (digits == 0) {
            throw std::runtime_error("ppm: expected an integer at offset " + std::to_string(pos));
        }
        return value;
    };
    expect("P6\n");
    image.width = read_int();
    expect(" ");
    image.height = read_int();
    expect("\n255\n");
    const std::size_t payload = static_cast<std::size_t>(image.width) * image.height * 3;
    if (bytes.size() - pos != payload) {
        throw std::runtime_error("ppm: payload size mismatch");
    }
    image.rgb.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end());
    return image;
}

// Deterministic random helpers shared by the property tests.

inline Vec3 random_unit_vector(std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    while (true) {
        const Vec3 v{normal(rng), normal(rng), normal(rng)};
        const double n = v.norm();
        if (n > 1e-6) {
            return {v.x / n, v.y / n, v.z / n};
        }
    }
}

inline voxanim::Quaternion random_unit_quaternion(std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    while (true) {
        const voxanim::Quaternion q{normal(rng), normal(rng), normal(rng), normal(rng)};
        if (q.norm() > 1e-6) {
            return q.normalized();
        }
    }
}

inline voxanim::RigidTransform random_transform(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> offset(-10.0, 10.0);
    std::uniform_real_distribution<double> scale(0.2, 4.0);
    voxanim::RigidTransform tf;
    tf.rotation = voxanim::rotation_from_quaternion(random_unit_quaternion(rng));
    tf.translation = {offset(rng), offset(rng), offset(rng)};
    tf.scale = {scale(rng), scale(rng), scale(rng)};
    return tf;
}

inline VoxelGrid random_grid(std::mt19937_64& rng, std::uint32_t depth, double fill) {
    VoxelGrid grid(1u << depth);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    const std::uint32_t n = grid.resolution();
    for (std::uint32_t x = 0; x < n; ++x) {
        for (std::uint32_t y = 0; y < n; ++y) {
            for (std::uint32_t z = 0; z < n; ++z) {
                if (coin(rng) < fill) {
                    grid.set(x, y, z);
                }
            }
        }
    }
    return grid;
}

inline bool t_close(double a, double b, double rel = 1e-6, double abs = 1e-9) {
    return std::abs(a - b) <= std::max(abs, rel * std::max(std::abs(a), std::abs(b)));
}

} // namespace oracles
