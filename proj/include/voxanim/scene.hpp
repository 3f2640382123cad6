#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "voxanim/math.hpp"
#include "voxanim/svo.hpp"

namespace voxanim {

/// One animated octree instance. The local model frame is the cube
/// [-s/2, +s/2] per axis, so rotation pivots at the model center.
struct SceneObject {
    std::int32_t id = 0;
    std::string model_name;
    std::shared_ptr<const SvoModel> model;
    RigidTransform transform;
    bool dirty = false; // transform changed since the last frame
};

/// Sphere circumscribing the scaled model cube. Center and radius come
/// straight from the translation and scale, so the sphere is invariant under
/// rotation of the object.
struct BoundingSphere {
    Vec3 center;
    double radius = 0.0;
};

BoundingSphere bounding_sphere(const SceneObject& object);

struct Camera {
    Vec3 position;
    Mat3 orientation; // columns: right, up, back; camera looks down -z
    double vertical_fov_deg = 60.0;
    int width = 640;
    int height = 480;
    bool dirty = true; // fresh cameras have never rendered, so start dirty
};

Camera make_look_at_camera(const Vec3& position, const Vec3& look_at, const Vec3& up,
                           double vertical_fov_deg, int width, int height);

struct Keyframe {
    double time = 0.0; // seconds
    Vec3 translation{0, 0, 0};
    Quaternion rotation;
    Vec3 scale{1, 1, 1};
};

struct AnimationTrack {
    std::int32_t object_id = 0;
    std::vector<Keyframe> keys; // strictly increasing times, at least one
};

struct Scene {
    std::vector<SceneObject> objects;
    std::vector<AnimationTrack> tracks;
    Camera camera;
    std::array<std::uint8_t, 3> background{0, 0, 0};

    SceneObject* find_object(std::int32_t id);
    const SceneObject* find_object(std::int32_t id) const;
};

/// Parses a scene document (JSON, schema in the README). Model paths resolve
/// relative to base_dir. Referenced .svo files are loaded and validated.
Scene load_scene(const std::string& text, const std::filesystem::path& base_dir = ".");
Scene load_scene_file(const std::filesystem::path& path);

/// Samples one track at a time: translation and scale interpolate linearly,
/// rotation by normalized shortest-arc interpolation, clamped at the ends.
RigidTransform evaluate_track(const AnimationTrack& track, double time);

/// Advances every tracked object to `time`. An object is marked dirty iff
/// its evaluated transform differs (exact componentwise comparison) from the
/// transform it had before the call; untracked objects are left alone.
void evaluate_animation(Scene& scene, double time);

/// Clears all object dirty flags and the camera dirty flag.
void mark_clean(Scene& scene);

} // namespace voxanim
