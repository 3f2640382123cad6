#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "voxanim/math.hpp"
#include "voxanim/svo.hpp"

namespace voxanim {

inline constexpr std::uint32_t kMaxTreeDepth = 16;

/// Axis-aligned traversal bounds: the box [-h, +h] per axis, centered at the
/// local origin. Per-axis extents carry the model's anisotropic scale.
struct OctreeBounds {
    Vec3 half_extent{0.5, 0.5, 0.5};
};

inline OctreeBounds bounds_from_scale(const Vec3& scale) {
    return {{scale.x * 0.5, scale.y * 0.5, scale.z * 0.5}};
}

/// Slab parameters of the (mirrored) ray against the root box. Axes with a
/// negative direction component are reflected about the box center and the
/// matching bit of mirror_mask is set (same bit layout as the octant index).
/// A zero direction component yields +/-infinity parameters, signed by the
/// origin's position relative to the plane.
struct BoxParams {
    std::array<double, 3> t0{}; // entry parameter per axis, mirrored ray
    std::array<double, 3> t1{}; // exit parameter per axis, mirrored ray
    std::uint8_t mirror_mask = 0;
};

/// Returns the slab parameters, or nullopt when the ray misses the box
/// (empty parameter interval, or the box lies entirely behind the origin).
std::optional<BoxParams> ray_box_params(const Ray& ray_local, const OctreeBounds& bounds);

inline constexpr unsigned kTraversalExit = 8;

/// First child octant entered by a mirrored ray, given the node's entry and
/// midplane parameters. Ties resolve with axis priority x > y > z.
unsigned first_node(double tx0, double ty0, double tz0, double txm, double tym, double tzm);

/// Next sibling octant after leaving the current child through its cheapest
/// exit plane, or kTraversalExit when the ray leaves the parent.
unsigned next_node(double tx1, double ty1, double tz1, unsigned current_octant);

struct TraversalHit {
    double t_hit = 0.0;   // entry parameter of the hit leaf, clamped to 0 when inside
    double t_enter = 0.0; // root box entry parameter
    double t_exit = 0.0;  // root box exit parameter
    VoxelAttribute attribute;
    Vec3 normal_local; // axis-aligned unit vector opposing the ray
    std::array<std::uint8_t, kMaxTreeDepth> leaf_path{};
    std::uint8_t path_len = 0;
};

/// Nearest-leaf parametric traversal of a local-space ray. Iterative with a
/// fixed-capacity stack; children are visited in parametric order, so the
/// first reachable leaf is the nearest nonnegative hit.
std::optional<TraversalHit> traverse(const SvoModel& model, const Ray& ray_local,
                                     const OctreeBounds& bounds);

/// One visited child interval, recorded by traverse_debug.
struct TraversalVisit {
    double t_enter = 0.0;
    std::uint8_t level = 0;
    bool leaf = false;
};

/// Same traversal, logging every descended child interval (tests only).
std::optional<TraversalHit> traverse_debug(const SvoModel& model, const Ray& ray_local,
                                           const OctreeBounds& bounds,
                                           std::vector<TraversalVisit>& log);

/// Decodes a root-to-leaf octant sequence into voxel grid coordinates.
std::array<std::uint32_t, 3> leaf_path_to_voxel(std::span<const std::uint8_t> path);

} // namespace voxanim
