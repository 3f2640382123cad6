#include "voxanim/renderer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <thread>

namespace voxanim {

Ray generate_primary_ray(const Camera& camera, int px, int py) {
    if (px < 0 || py < 0 || px >= camera.width || py >= camera.height) {
        throw ValidationError("pixel (" + std::to_string(px) + ", " + std::to_string(py) +
                              ") outside the " + std::to_string(camera.width) + "x" +
                              std::to_string(camera.height) + " image");
    }
    const double tan_half = std::tan(camera.vertical_fov_deg * std::numbers::pi / 360.0);
    const double aspect = static_cast<double>(camera.width) / camera.height;
    const double ndc_x = (px + 0.5) / camera.width * 2.0 - 1.0;
    const double ndc_y = 1.0 - (py + 0.5) / camera.height * 2.0;
    const Vec3 dir_cam{ndc_x * tan_half * aspect, ndc_y * tan_half, -1.0};
    return {camera.position, (camera.orientation * dir_cam).normalized()};
}

std::optional<SphereHit> ray_sphere_test(const Ray& ray, const BoundingSphere& sphere) {
    const Vec3 l = sphere.center - ray.origin;
    const double t_center = l.dot(ray.direction);
    const double d2 = l.norm2() - t_center * t_center;
    const double r2 = sphere.radius * sphere.radius;
    if (d2 >= r2) {
        return std::nullopt;
    }
    // The closest-approach form is symmetric in the ray direction; spheres
    // entirely behind the origin must be rejected separately.
    if (t_center + sphere.radius < 0.0) {
        return std::nullopt;
    }
    SphereHit hit;
    hit.d = std::sqrt(std::max(d2, 0.0));
    hit.t_center = t_center;
    hit.t_boundary = std::max(t_center - std::sqrt(r2 - d2), 0.0);
    return hit;
}

std::vector<SphereHit> cull_and_sort(const Scene& scene, const Ray& ray) {
    std::vector<SphereHit> hits;
    hits.reserve(scene.objects.size());
    for (const SceneObject& obj : scene.objects) {
        if (auto hit = ray_sphere_test(ray, bounding_sphere(obj))) {
            hit->object_id = obj.id;
            hits.push_back(*hit);
        }
    }
    std::sort(hits.begin(), hits.end(), [](const SphereHit& a, const SphereHit& b) {
        if (a.t_center != b.t_center) {
            return a.t_center < b.t_center;
        }
        return a.object_id < b.object_id;
    });
    return hits;
}

HitRecord trace_ray(const Scene& scene, const Ray& ray, std::span<const SphereHit> candidates,
                    FrameStats* stats) {
    HitRecord best;
    best.kind = HitKind::Miss;
    bool have_hit = false;
    for (const SphereHit& candidate : candidates) {
        // Nothing inside this sphere can beat a hit in front of its surface.
        if (have_hit && best.t < candidate.t_boundary) {
            continue;
        }
        const SceneObject* obj = scene.find_object(candidate.object_id);
        if (!obj || !obj->model) {
            continue;
        }
        const Ray local = transform_ray_world_to_local(ray, obj->transform);
        if (stats) {
            ++stats->svo_traversals;
        }
        const auto hit = traverse(*obj->model, local, bounds_from_scale(obj->transform.scale));
        if (!hit) {
            continue;
        }
        // The rotation preserves lengths, so the local parameter is the
        // world-space depth unchanged.
        if (!have_hit || hit->t_hit < best.t ||
            (hit->t_hit == best.t && obj->id < best.object_id)) {
            have_hit = true;
            best.color = hit->attribute;
            best.normal = obj->transform.rotation * hit->normal_local;
            best.t = hit->t_hit;
            best.object_id = obj->id;
        }
    }
    if (have_hit) {
        best.kind = candidates.size() > 1 ? HitKind::MultiSphere : HitKind::SingleSphere;
    }
    return best;
}

std::array<std::uint8_t, 3> shade(const HitRecord& record, const Ray& ray,
                                  const std::array<std::uint8_t, 3>& background) {
    if (record.kind == HitKind::Miss) {
        return background;
    }
    const double facing = std::max(0.0, record.normal.dot(-ray.direction));
    const double factor = 0.2 + 0.8 * facing;
    const auto quantize = [factor](std::uint8_t channel) {
        return static_cast<std::uint8_t>(std::lround(channel * factor));
    };
    return {quantize(record.color.r), quantize(record.color.g), quantize(record.color.b)};
}

namespace {

struct PixelOutcome {
    HitRecord record;
    bool reused = false;
};

struct FrameContext {
    const Scene& scene;
    const RenderOptions& opts;
    std::vector<BoundingSphere> spheres; // one per object, in object order
    bool sphere_pass = false;
};

struct WorkerScratch {
    std::vector<SphereHit> hits;
    std::vector<SphereHit> candidates;
};

bool by_depth(const SphereHit& a, const SphereHit& b) {
    if (a.t_center != b.t_center) {
        return a.t_center < b.t_center;
    }
    return a.object_id < b.object_id;
}

bool by_id(const SphereHit& a, const SphereHit& b) { return a.object_id < b.object_id; }

PixelOutcome shade_pixel(const FrameContext& ctx, const Ray& ray, const HitRecord* previous,
                         FrameStats& stats, WorkerScratch& scratch) {
    const Scene& scene = ctx.scene;
    std::vector<SphereHit>& hits = scratch.hits;
    hits.clear();
    if (ctx.sphere_pass) {
        for (std::size_t i = 0; i < scene.objects.size(); ++i) {
            ++stats.sphere_tests;
            if (auto hit = ray_sphere_test(ray, ctx.spheres[i])) {
                hit->object_id = scene.objects[i].id;
                hits.push_back(*hit);
            }
        }
    }

    if (previous && !scene.camera.dirty && hits.size() == 1) {
        const SphereHit& only = hits.front();
        const SceneObject* obj = scene.find_object(only.object_id);
        if (previous->kind == HitKind::SingleSphere && previous->object_id == only.object_id &&
            obj && !obj->dirty) {
            ++stats.pixels_reused;
            return {*previous, true};
        }
        // "Trace just this SVO": a single intersected sphere means no other
        // object can contribute data to this ray.
        return {trace_ray(scene, ray, std::span(&only, 1), &stats), false};
    }

    std::vector<SphereHit>& candidates = scratch.candidates;
    candidates.clear();
    if (ctx.opts.culling) {
        candidates.assign(hits.begin(), hits.end());
    } else {
        // Forced traversal of every object. Sphere data is kept where the
        // test succeeded so sorting stays meaningful; missed spheres sort by
        // the raw center projection and get a zero boundary, which never
        // triggers the skip.
        for (std::size_t i = 0; i < scene.objects.size(); ++i) {
            SphereHit entry;
            entry.object_id = scene.objects[i].id;
            if (ctx.opts.sorting) {
                if (auto hit = ray_sphere_test(ray, ctx.spheres[i])) {
                    entry.d = hit->d;
                    entry.t_center = hit->t_center;
                    entry.t_boundary = hit->t_boundary;
                } else {
                    entry.t_center =
                        (ctx.spheres[i].center - ray.origin).dot(ray.direction);
                }
            }
            candidates.push_back(entry);
        }
    }
    if (ctx.opts.sorting) {
        std::sort(candidates.begin(), candidates.end(), by_depth);
    } else {
        std::sort(candidates.begin(), candidates.end(), by_id);
        for (SphereHit& c : candidates) {
            c.t_boundary = 0.0; // id order carries no front-to-back guarantee
        }
    }

    PixelOutcome outcome;
    outcome.record = trace_ray(scene, ray, candidates, &stats);
    // Rays that meet no sphere at all trace nothing; with a clean camera the
    // pixel counts as a (trivial) reuse rather than a traced pixel.
    if (previous && !scene.camera.dirty && ctx.opts.culling && hits.empty()) {
        ++stats.pixels_reused;
        outcome.reused = true;
    }
    return outcome;
}

} // namespace

Image render_frame(const Scene& scene, const RenderOptions& opts, FrameStats& stats) {
    const Camera& camera = scene.camera;
    if (opts.hbo && (opts.hbo->width() != camera.width || opts.hbo->height() != camera.height)) {
        throw ValidationError("hit buffer dimensions do not match the camera");
    }

    const auto start = std::chrono::steady_clock::now();

    FrameContext ctx{scene, opts, {}, false};
    ctx.sphere_pass = opts.culling || opts.sorting || opts.hbo != nullptr;
    ctx.spheres.reserve(scene.objects.size());
    for (const SceneObject& obj : scene.objects) {
        ctx.spheres.push_back(bounding_sphere(obj));
    }

    Image image(camera.width, camera.height);

    int thread_count = opts.threads;
    if (thread_count <= 0) {
        thread_count = static_cast<int>(std::thread::hardware_concurrency());
        if (thread_count <= 0) {
            thread_count = 1;
        }
    }
    thread_count = std::min(thread_count, camera.height);

    std::vector<FrameStats> worker_stats(static_cast<std::size_t>(thread_count));

    const auto render_rows = [&](int row_begin, int row_end, FrameStats& local) {
        WorkerScratch scratch;
        scratch.hits.reserve(scene.objects.size());
        scratch.candidates.reserve(scene.objects.size());
        for (int py = row_begin; py < row_end; ++py) {
            for (int px = 0; px < camera.width; ++px) {
                const Ray ray = generate_primary_ray(camera, px, py);
                ++local.rays;
                const HitRecord* previous = opts.hbo ? &opts.hbo->at(px, py) : nullptr;
                const PixelOutcome outcome = shade_pixel(ctx, ray, previous, local, scratch);
                const auto rgb = shade(outcome.record, ray, scene.background);
                std::uint8_t* p = image.pixel(px, py);
                p[0] = rgb[0];
                p[1] = rgb[1];
                p[2] = rgb[2];
                if (opts.hbo) {
                    opts.hbo->at(px, py) = outcome.record;
                }
            }
        }
    };

    if (thread_count == 1) {
        render_rows(0, camera.height, worker_stats[0]);
    } else {
        // Contiguous row bands with disjoint image and HBO regions; workers
        // never touch each other's pixels, so the output is identical for
        // any thread count.
        std::vector<std::thread> workers;
        workers.reserve(static_cast<std::size_t>(thread_count));
        for (int w = 0; w < thread_count; ++w) {
            const int row_begin = static_cast<int>(
                static_cast<long long>(camera.height) * w / thread_count);
            const int row_end = static_cast<int>(
                static_cast<long long>(camera.height) * (w + 1) / thread_count);
            workers.emplace_back(render_rows, row_begin, row_end,
                                 std::ref(worker_stats[static_cast<std::size_t>(w)]));
        }
        for (std::thread& t : workers) {
            t.join();
        }
    }

    stats = FrameStats{};
    for (const FrameStats& w : worker_stats) {
        stats.rays += w.rays;
        stats.sphere_tests += w.sphere_tests;
        stats.svo_traversals += w.svo_traversals;
        stats.pixels_reused += w.pixels_reused;
    }
    stats.render_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
    return image;
}

std::string write_ppm(const Image& image) {
    std::string out = "P6\n" + std::to_string(image.width) + " " +
                      std::to_string(image.height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(image.rgb.data()), image.rgb.size());
    return out;
}

} // namespace voxanim
