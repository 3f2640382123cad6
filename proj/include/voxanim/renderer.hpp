#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "voxanim/math.hpp"
#include "voxanim/scene.hpp"
#include "voxanim/traversal.hpp"

namespace voxanim {

/// Result of the analytic ray/bounding-sphere test.
struct SphereHit {
    std::int32_t object_id = 0;
    double d = 0.0;          // closest-approach distance of the ray line to the center
    double t_center = 0.0;   // projection of the center onto the ray; the sort key
    double t_boundary = 0.0; // parameter of the near sphere surface, clamped >= 0
};

enum class HitKind : std::uint8_t {
    Miss,         // no data hit (whatever the sphere count was)
    SingleSphere, // data hit; the ray passed through exactly one bounding sphere
    MultiSphere,  // data hit; the ray passed through several bounding spheres
};

/// Per-pixel result of the last frame. Color is the voxel base color; t makes
/// the buffer double as a depth buffer.
struct HitRecord {
    VoxelAttribute color;
    Vec3 normal;
    double t = 0.0;
    std::int32_t object_id = -1;
    HitKind kind = HitKind::Miss;

    friend bool operator==(const HitRecord&, const HitRecord&) = default;
};

class HitBuffer {
public:
    HitBuffer(int width, int height)
        : width_(width), height_(height),
          records_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {}

    int width() const { return width_; }
    int height() const { return height_; }

    HitRecord& at(int x, int y) { return records_[static_cast<std::size_t>(y) * width_ + x]; }
    const HitRecord& at(int x, int y) const {
        return records_[static_cast<std::size_t>(y) * width_ + x];
    }

private:
    int width_;
    int height_;
    std::vector<HitRecord> records_;
};

struct FrameStats {
    std::uint64_t rays = 0;
    std::uint64_t sphere_tests = 0;
    std::uint64_t svo_traversals = 0;
    std::uint64_t pixels_reused = 0;
    double render_ms = 0.0;
};

/// 8-bit RGB image, row-major from the top-left corner.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;

    Image() = default;
    Image(int w, int h)
        : width(w), height(h),
          rgb(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, 0) {}

    std::uint8_t* pixel(int x, int y) {
        return rgb.data() + (static_cast<std::size_t>(y) * width + x) * 3;
    }
    const std::uint8_t* pixel(int x, int y) const {
        return rgb.data() + (static_cast<std::size_t>(y) * width + x) * 3;
    }

    friend bool operator==(const Image&, const Image&) = default;
};

/// Pinhole ray through the center of pixel (px, py).
Ray generate_primary_ray(const Camera& camera, int px, int py);

/// Analytic closest-approach test: hit iff d is real and below the radius
/// and the sphere is not entirely behind the origin. object_id is left to
/// the caller.
std::optional<SphereHit> ray_sphere_test(const Ray& ray, const BoundingSphere& sphere);

/// Objects whose bounding spheres the ray hits, ascending by distance to the
/// sphere center, ties by ascending object id.
std::vector<SphereHit> cull_and_sort(const Scene& scene, const Ray& ray);

/// Traces the candidates in the given order; a candidate is skipped when the
/// best hit so far is already closer than that candidate's sphere boundary.
/// hit_kind is derived from the candidate count when data is hit.
HitRecord trace_ray(const Scene& scene, const Ray& ray, std::span<const SphereHit> candidates,
                    FrameStats* stats = nullptr);

/// Headlight Lambert with a fixed 0.2 ambient term; misses return the
/// background. Quantizes round-half-away-from-zero.
std::array<std::uint8_t, 3> shade(const HitRecord& record, const Ray& ray,
                                  const std::array<std::uint8_t, 3>& background);

struct RenderOptions {
    bool culling = true; // when off, every object is traversed for every ray
    bool sorting = true; // when off, candidates go in id order with no early exit
    HitBuffer* hbo = nullptr;
    int threads = 1; // <= 0 means hardware concurrency
};

/// Renders one frame. With an HBO present, each pixel follows the hit buffer
/// flow: dirty camera or a sphere count != 1 forces a full trace; otherwise
/// the previous record is reused when it hit the same, still-clean SVO
/// through a single sphere, and only that SVO is retraced when not.
/// Clearing dirty flags afterwards is the caller's job.
Image render_frame(const Scene& scene, const RenderOptions& opts, FrameStats& stats);

/// Binary PPM (P6) encoding; bit-exact.
std::string write_ppm(const Image& image);

} // namespace voxanim
