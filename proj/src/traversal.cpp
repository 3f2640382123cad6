#include "voxanim/traversal.hpp"

#include <cmath>
#include <limits>

namespace voxanim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

constexpr std::array<unsigned, 3> kAxisBit{octant_bit_x, octant_bit_y, octant_bit_z};

// Slab parameter of the plane at position p for a mirrored axis. A zero
// direction component never reaches a plane ahead of the origin and has
// already passed any plane at or behind it; this sign convention makes the
// slab (and every child cell) a half-open interval [lo, hi), consistent with
// the voxel grid's floor indexing.
inline double plane_param_zero_dir(double plane, double origin) {
    return plane > origin ? kInf : -kInf;
}

struct AxisSetup {
    double origin = 0.0; // mirrored origin component
    bool zero_dir = false;
};

} // namespace

std::optional<BoxParams> ray_box_params(const Ray& ray_local, const OctreeBounds& bounds) {
    BoxParams params;
    const std::array<double, 3> dir{ray_local.direction.x, ray_local.direction.y,
                                    ray_local.direction.z};
    const std::array<double, 3> org{ray_local.origin.x, ray_local.origin.y,
                                    ray_local.origin.z};
    const std::array<double, 3> h{bounds.half_extent.x, bounds.half_extent.y,
                                  bounds.half_extent.z};

    for (int a = 0; a < 3; ++a) {
        const bool mirrored = dir[a] < 0.0;
        if (mirrored) {
            params.mirror_mask |= static_cast<std::uint8_t>(kAxisBit[a]);
        }
        const double o = mirrored ? -org[a] : org[a];
        const double d = mirrored ? -dir[a] : dir[a];
        if (d == 0.0) {
            params.t0[a] = plane_param_zero_dir(-h[a], o);
            params.t1[a] = plane_param_zero_dir(h[a], o);
        } else {
            params.t0[a] = (-h[a] - o) / d;
            params.t1[a] = (h[a] - o) / d;
        }
    }

    const double t_enter = std::max({params.t0[0], params.t0[1], params.t0[2]});
    const double t_exit = std::min({params.t1[0], params.t1[1], params.t1[2]});
    if (t_enter >= t_exit || t_exit < 0.0) {
        return std::nullopt;
    }
    return params;
}

unsigned first_node(double tx0, double ty0, double tz0, double txm, double tym, double tzm) {
    // Entry plane: axis of the largest entry parameter, ties x > y > z.
    double t_enter = tx0;
    if (ty0 > t_enter) {
        t_enter = ty0;
    }
    if (tz0 > t_enter) {
        t_enter = tz0;
    }
    // A midplane already crossed at the entry point puts the ray in the
    // upper child along that axis. The entry axis's own midplane is never
    // below its entry parameter, so it contributes no bit.
    unsigned octant = 0;
    if (txm < t_enter) {
        octant |= octant_bit_x;
    }
    if (tym < t_enter) {
        octant |= octant_bit_y;
    }
    if (tzm < t_enter) {
        octant |= octant_bit_z;
    }
    return octant;
}

unsigned next_node(double tx1, double ty1, double tz1, unsigned current_octant) {
    int axis = 0;
    double t_exit = tx1;
    if (ty1 < t_exit) {
        axis = 1;
        t_exit = ty1;
    }
    if (tz1 < t_exit) {
        axis = 2;
        t_exit = tz1;
    }
    if (current_octant & kAxisBit[axis]) {
        return kTraversalExit;
    }
    return current_octant | kAxisBit[axis];
}

namespace {

struct Frame {
    std::uint32_t node = 0;
    std::array<double, 3> t0{};
    std::array<double, 3> t1{};
    std::array<double, 3> center{}; // node box center in mirrored coordinates
    unsigned cur = 0;               // next child octant to process, or kTraversalExit
};

template <bool WithLog>
std::optional<TraversalHit> traverse_impl(const SvoModel& model, const Ray& ray_local,
                                          const OctreeBounds& bounds,
                                          std::vector<TraversalVisit>* log) {
    const auto params = ray_box_params(ray_local, bounds);
    if (!params) {
        return std::nullopt;
    }

    const std::array<double, 3> dir{ray_local.direction.x, ray_local.direction.y,
                                    ray_local.direction.z};
    const std::array<double, 3> h{bounds.half_extent.x, bounds.half_extent.y,
                                  bounds.half_extent.z};
    std::array<AxisSetup, 3> axes;
    for (int a = 0; a < 3; ++a) {
        const bool mirrored = (params->mirror_mask & kAxisBit[a]) != 0;
        axes[a].origin = mirrored ? -ray_local.origin[a] : ray_local.origin[a];
        axes[a].zero_dir = dir[a] == 0.0;
    }

    const auto midplane = [&](const Frame& f, int a) -> double {
        if (axes[a].zero_dir) {
            return plane_param_zero_dir(f.center[a], axes[a].origin);
        }
        return 0.5 * (f.t0[a] + f.t1[a]);
    };

    std::array<Frame, kMaxTreeDepth> stack;
    std::array<std::uint8_t, kMaxTreeDepth> path{};

    Frame root;
    root.node = 0;
    root.t0 = params->t0;
    root.t1 = params->t1;
    root.center = {0.0, 0.0, 0.0};
    root.cur = first_node(root.t0[0], root.t0[1], root.t0[2], midplane(root, 0),
                          midplane(root, 1), midplane(root, 2));
    stack[0] = root;
    int sp = 0;

    while (sp >= 0) {
        Frame& f = stack[sp];
        if (f.cur == kTraversalExit) {
            --sp;
            continue;
        }
        const unsigned q = f.cur;
        const int level = sp;

        std::array<double, 3> t0c, t1c, cc;
        for (int a = 0; a < 3; ++a) {
            const double tm = midplane(f, a);
            const double quarter = std::ldexp(h[a], -(level + 1));
            if (q & kAxisBit[a]) {
                t0c[a] = tm;
                t1c[a] = f.t1[a];
                cc[a] = f.center[a] + quarter;
            } else {
                t0c[a] = f.t0[a];
                t1c[a] = tm;
                cc[a] = f.center[a] - quarter;
            }
        }
        f.cur = next_node(t1c[0], t1c[1], t1c[2], q);

        int entry_axis = 0;
        double t_enter = t0c[0];
        if (t0c[1] > t_enter) {
            entry_axis = 1;
            t_enter = t0c[1];
        }
        if (t0c[2] > t_enter) {
            entry_axis = 2;
            t_enter = t0c[2];
        }
        const double t_exit = std::min({t1c[0], t1c[1], t1c[2]});
        // Degenerate or behind-the-origin child cells contribute nothing.
        if (!(t_enter < t_exit) || t_exit < 0.0) {
            continue;
        }

        const unsigned real_octant = q ^ params->mirror_mask;
        const ChildRef ref = node_child(model, f.node, real_octant);
        if constexpr (WithLog) {
            if (!ref.absent()) {
                log->push_back({t_enter, static_cast<std::uint8_t>(level + 1), ref.is_leaf()});
            }
        }
        if (ref.absent()) {
            continue;
        }
        path[level] = static_cast<std::uint8_t>(real_octant);

        if (ref.is_leaf()) {
            TraversalHit hit;
            hit.t_hit = std::max(t_enter, 0.0);
            hit.t_enter = std::max({params->t0[0], params->t0[1], params->t0[2]});
            hit.t_exit = std::min({params->t1[0], params->t1[1], params->t1[2]});
            hit.attribute = model.attributes[ref.index];
            Vec3 normal{0, 0, 0};
            const double sign = dir[entry_axis] > 0.0 ? -1.0 : 1.0;
            if (entry_axis == 0) {
                normal.x = sign;
            } else if (entry_axis == 1) {
                normal.y = sign;
            } else {
                normal.z = sign;
            }
            hit.normal_local = normal;
            hit.path_len = static_cast<std::uint8_t>(level + 1);
            hit.leaf_path = path;
            return hit;
        }

        // Nodes deeper than the declared depth would overrun the stack; a
        // well-formed model never produces them.
        if (level + 1 >= static_cast<int>(model.depth) ||
            level + 1 >= static_cast<int>(kMaxTreeDepth)) {
            continue;
        }
        Frame child;
        child.node = ref.index;
        child.t0 = t0c;
        child.t1 = t1c;
        child.center = cc;
        child.cur = first_node(t0c[0], t0c[1], t0c[2], midplane(child, 0),
                               midplane(child, 1), midplane(child, 2));
        stack[++sp] = child;
    }
    return std::nullopt;
}

} // namespace

std::optional<TraversalHit> traverse(const SvoModel& model, const Ray& ray_local,
                                     const OctreeBounds& bounds) {
    return traverse_impl<false>(model, ray_local, bounds, nullptr);
}

std::optional<TraversalHit> traverse_debug(const SvoModel& model, const Ray& ray_local,
                                           const OctreeBounds& bounds,
                                           std::vector<TraversalVisit>& log) {
    return traverse_impl<true>(model, ray_local, bounds, &log);
}

std::array<std::uint32_t, 3> leaf_path_to_voxel(std::span<const std::uint8_t> path) {
    std::array<std::uint32_t, 3> v{0, 0, 0};
    for (const std::uint8_t octant : path) {
        v[0] = (v[0] << 1) | ((octant & octant_bit_x) ? 1u : 0u);
        v[1] = (v[1] << 1) | ((octant & octant_bit_y) ? 1u : 0u);
        v[2] = (v[2] << 1) | ((octant & octant_bit_z) ? 1u : 0u);
    }
    return v;
}

} // namespace voxanim
