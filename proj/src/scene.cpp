#include "voxanim/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace voxanim {

using nlohmann::json;

BoundingSphere bounding_sphere(const SceneObject& object) {
    // Half the scaled cube diagonal; rotation never moves the cube center
    // away from the translation, so the sphere ignores it entirely.
    return {object.transform.translation, 0.5 * object.transform.scale.norm()};
}

Camera make_look_at_camera(const Vec3& position, const Vec3& look_at, const Vec3& up,
                           double vertical_fov_deg, int width, int height) {
    if (!(vertical_fov_deg > 0.0 && vertical_fov_deg < 180.0)) {
        throw ValidationError("camera fov must be in (0, 180) degrees");
    }
    if (width < 1 || height < 1) {
        throw ValidationError("camera resolution must be at least 1x1");
    }
    const Vec3 to_target = look_at - position;
    if (to_target.norm() <= 1e-12) {
        throw ValidationError("camera look_at coincides with its position");
    }
    const Vec3 forward = to_target.normalized();
    const Vec3 side = forward.cross(up);
    if (side.norm() <= 1e-9) {
        throw ValidationError("camera up vector is parallel to the view direction");
    }
    const Vec3 right = side.normalized();
    const Vec3 true_up = right.cross(forward);

    Camera cam;
    cam.position = position;
    // Columns right/up/back map camera space to world; the view axis is -z.
    for (int r = 0; r < 3; ++r) {
        cam.orientation(r, 0) = right[r];
        cam.orientation(r, 1) = true_up[r];
        cam.orientation(r, 2) = -forward[r];
    }
    cam.vertical_fov_deg = vertical_fov_deg;
    cam.width = width;
    cam.height = height;
    cam.dirty = true;
    return cam;
}

SceneObject* Scene::find_object(std::int32_t id) {
    for (SceneObject& obj : objects) {
        if (obj.id == id) {
            return &obj;
        }
    }
    return nullptr;
}

const SceneObject* Scene::find_object(std::int32_t id) const {
    for (const SceneObject& obj : objects) {
        if (obj.id == id) {
            return &obj;
        }
    }
    return nullptr;
}

namespace {

Vec3 vec3_from(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() ||
        !j[2].is_number()) {
        throw ParseError("scene: " + where + " must be an array of 3 numbers");
    }
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Quaternion rotation_from(const json& j, const std::string& where) {
    if (j.is_object() && j.contains("quat")) {
        const json& q = j["quat"];
        if (!q.is_array() || q.size() != 4) {
            throw ParseError("scene: " + where + ".quat must be an array of 4 numbers");
        }
        const Quaternion quat{q[0].get<double>(), q[1].get<double>(), q[2].get<double>(),
                              q[3].get<double>()};
        if (quat.norm() <= 1e-12) {
            throw ValidationError("scene: bad rotation at " + where +
                                  " (near-zero quaternion)");
        }
        return quat.normalized();
    }
    if (j.is_object() && j.contains("axis")) {
        const Vec3 axis = vec3_from(j.at("axis"), where + ".axis");
        if (!j.contains("angle_deg") || !j["angle_deg"].is_number()) {
            throw ParseError("scene: " + where + " needs a numeric angle_deg");
        }
        if (axis.norm() <= 1e-12) {
            throw ValidationError("scene: bad rotation at " + where + " (near-zero axis)");
        }
        const double rad = j["angle_deg"].get<double>() * std::numbers::pi / 180.0;
        return Quaternion::from_axis_angle(axis, rad);
    }
    throw ParseError("scene: " + where + " must contain either quat or axis/angle_deg");
}

Keyframe keyframe_from(const json& j, const std::string& where) {
    Keyframe key;
    if (!j.contains("time") || !j["time"].is_number()) {
        throw ParseError("scene: " + where + " needs a numeric time");
    }
    key.time = j["time"].get<double>();
    if (j.contains("translation")) {
        key.translation = vec3_from(j["translation"], where + ".translation");
    }
    if (j.contains("rotation")) {
        key.rotation = rotation_from(j["rotation"], where + ".rotation");
    }
    if (j.contains("scale")) {
        key.scale = vec3_from(j["scale"], where + ".scale");
    }
    return key;
}

void check_scale(const Vec3& scale, const std::string& where) {
    if (!(scale.x > 0.0 && scale.y > 0.0 && scale.z > 0.0)) {
        throw ValidationError("scene: " + where + " scale components must be positive");
    }
}

} // namespace

Scene load_scene(const std::string& text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("scene: invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw ParseError("scene: top level must be an object");
    }

    Scene scene;

    std::map<std::string, std::shared_ptr<const SvoModel>> models;
    if (doc.contains("models")) {
        if (!doc["models"].is_object()) {
            throw ParseError("scene: models must map names to paths");
        }
        for (const auto& [name, value] : doc["models"].items()) {
            if (!value.is_string()) {
                throw ParseError("scene: models." + name + " must be a path string");
            }
            const std::filesystem::path path =
                base_dir / value.get<std::string>();
            if (!std::filesystem::exists(path)) {
                throw IoError("scene: model not found: " + path.string() +
                              " (models." + name + ")");
            }
            auto model = std::make_shared<SvoModel>(load_svo(path));
            const SvoValidationReport report = validate(*model);
            if (!report.ok()) {
                throw ValidationError("scene: model " + name + " fails validation: " +
                                      report.violations.front().message);
            }
            models.emplace(name, std::move(model));
        }
    }

    if (doc.contains("objects")) {
        if (!doc["objects"].is_array()) {
            throw ParseError("scene: objects must be an array");
        }
        std::size_t idx = 0;
        for (const json& j : doc["objects"]) {
            const std::string where = "objects[" + std::to_string(idx++) + "]";
            SceneObject obj;
            if (!j.contains("id") || !j["id"].is_number_integer()) {
                throw ParseError("scene: " + where + " needs an integer id");
            }
            obj.id = j["id"].get<std::int32_t>();
            if (scene.find_object(obj.id)) {
                throw ValidationError("scene: duplicate object id " + std::to_string(obj.id) +
                                      " at " + where);
            }
            if (!j.contains("model") || !j["model"].is_string()) {
                throw ParseError("scene: " + where + " needs a model name");
            }
            obj.model_name = j["model"].get<std::string>();
            const auto it = models.find(obj.model_name);
            if (it == models.end()) {
                throw ValidationError("scene: " + where + " references unknown model \"" +
                                      obj.model_name + "\"");
            }
            obj.model = it->second;
            if (j.contains("translation")) {
                obj.transform.translation = vec3_from(j["translation"], where + ".translation");
            }
            if (j.contains("rotation")) {
                obj.transform.rotation =
                    rotation_from_quaternion(rotation_from(j["rotation"], where + ".rotation"));
            }
            if (j.contains("scale")) {
                obj.transform.scale = vec3_from(j["scale"], where + ".scale");
            }
            check_scale(obj.transform.scale, where);
            obj.dirty = false;
            scene.objects.push_back(std::move(obj));
        }
    }

    if (doc.contains("tracks")) {
        if (!doc["tracks"].is_array()) {
            throw ParseError("scene: tracks must be an array");
        }
        std::size_t idx = 0;
        for (const json& j : doc["tracks"]) {
            const std::string where = "tracks[" + std::to_string(idx++) + "]";
            AnimationTrack track;
            if (!j.contains("object") || !j["object"].is_number_integer()) {
                throw ParseError("scene: " + where + " needs an integer object id");
            }
            track.object_id = j["object"].get<std::int32_t>();
            if (!scene.find_object(track.object_id)) {
                throw ValidationError("scene: " + where + " references unknown object id " +
                                      std::to_string(track.object_id));
            }
            if (!j.contains("keys") || !j["keys"].is_array() || j["keys"].empty()) {
                throw ParseError("scene: " + where + " needs a nonempty keys array");
            }
            std::size_t kidx = 0;
            for (const json& k : j["keys"]) {
                const std::string kwhere = where + ".keys[" + std::to_string(kidx++) + "]";
                Keyframe key = keyframe_from(k, kwhere);
                check_scale(key.scale, kwhere);
                if (!track.keys.empty() && key.time <= track.keys.back().time) {
                    throw ValidationError("scene: " + kwhere +
                                          " keyframe times must be strictly increasing");
                }
                track.keys.push_back(key);
            }
            scene.tracks.push_back(std::move(track));
        }
    }

    Vec3 cam_pos{0, 0, 0};
    Vec3 cam_look{0, 0, -1};
    Vec3 cam_up{0, 1, 0};
    double fov = 60.0;
    if (doc.contains("camera")) {
        const json& c = doc["camera"];
        if (!c.is_object()) {
            throw ParseError("scene: camera must be an object");
        }
        if (c.contains("position")) {
            cam_pos = vec3_from(c["position"], "camera.position");
        }
        if (c.contains("look_at")) {
            cam_look = vec3_from(c["look_at"], "camera.look_at");
        }
        if (c.contains("up")) {
            cam_up = vec3_from(c["up"], "camera.up");
        }
        if (c.contains("fov_deg")) {
            if (!c["fov_deg"].is_number()) {
                throw ParseError("scene: camera.fov_deg must be a number");
            }
            fov = c["fov_deg"].get<double>();
        }
    }
    scene.camera = make_look_at_camera(cam_pos, cam_look, cam_up, fov, 640, 480);

    if (doc.contains("background")) {
        const json& b = doc["background"];
        if (!b.is_array() || b.size() != 3) {
            throw ParseError("scene: background must be an array of 3 numbers (0..255)");
        }
        for (int i = 0; i < 3; ++i) {
            const double v = b[i].get<double>();
            if (v < 0.0 || v > 255.0) {
                throw ValidationError("scene: background channels must be in [0, 255]");
            }
            scene.background[static_cast<std::size_t>(i)] =
                static_cast<std::uint8_t>(std::lround(v));
        }
    }

    return scene;
}

Scene load_scene_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open scene: " + path.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return load_scene(buffer.str(), path.has_parent_path() ? path.parent_path() : ".");
}

namespace {

double lerp_exact(double a, double b, double s) {
    // a + (b-a)*s returns a bitwise when the endpoints agree, which keeps
    // piecewise-constant tracks from flapping the dirty flag.
    return a + (b - a) * s;
}

Vec3 lerp_vec(const Vec3& a, const Vec3& b, double s) {
    return {lerp_exact(a.x, b.x, s), lerp_exact(a.y, b.y, s), lerp_exact(a.z, b.z, s)};
}

Quaternion interp_rotation(const Quaternion& a, Quaternion b, double s) {
    if (a == b) {
        return a;
    }
    if (a.dot(b) < 0.0) { // shortest arc
        b = {-b.w, -b.x, -b.y, -b.z};
        if (a == b) {
            return a;
        }
    }
    const Quaternion mixed{lerp_exact(a.w, b.w, s), lerp_exact(a.x, b.x, s),
                           lerp_exact(a.y, b.y, s), lerp_exact(a.z, b.z, s)};
    return mixed.normalized();
}

RigidTransform transform_from_key(const Keyframe& key) {
    RigidTransform tf;
    tf.rotation = rotation_from_quaternion(key.rotation);
    tf.translation = key.translation;
    tf.scale = key.scale;
    return tf;
}

} // namespace

RigidTransform evaluate_track(const AnimationTrack& track, double time) {
    const std::vector<Keyframe>& keys = track.keys;
    if (keys.empty()) {
        throw ValidationError("animation track has no keyframes");
    }
    if (time <= keys.front().time) {
        return transform_from_key(keys.front());
    }
    if (time >= keys.back().time) {
        return transform_from_key(keys.back());
    }
    const auto upper = std::upper_bound(
        keys.begin(), keys.end(), time,
        [](double t, const Keyframe& k) { return t < k.time; });
    const Keyframe& k1 = *upper;
    const Keyframe& k0 = *std::prev(upper);
    const double s = (time - k0.time) / (k1.time - k0.time);

    RigidTransform tf;
    tf.translation = lerp_vec(k0.translation, k1.translation, s);
    tf.scale = lerp_vec(k0.scale, k1.scale, s);
    tf.rotation = rotation_from_quaternion(interp_rotation(k0.rotation, k1.rotation, s));
    return tf;
}

void evaluate_animation(Scene& scene, double time) {
    if (time < 0.0) {
        throw ValidationError("animation time must be nonnegative");
    }
    for (const AnimationTrack& track : scene.tracks) {
        SceneObject* obj = scene.find_object(track.object_id);
        if (!obj) {
            continue; // load_scene rejects dangling tracks
        }
        const RigidTransform evaluated = evaluate_track(track, time);
        if (!(evaluated == obj->transform)) {
            obj->transform = evaluated;
            obj->dirty = true;
        }
    }
}

void mark_clean(Scene& scene) {
    for (SceneObject& obj : scene.objects) {
        obj.dirty = false;
    }
    scene.camera.dirty = false;
}

} // namespace voxanim
