#include "voxanim/cli.hpp"

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "voxanim/ingest.hpp"
#include "voxanim/scene.hpp"
#include "voxanim/svo.hpp"

namespace voxanim::cli {

namespace {

std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open: " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), end);
}

double parse_double(std::string_view s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ParseError("csv: bad number \"" + std::string(s) + "\"");
    }
    return v;
}

std::uint64_t parse_u64(std::string_view s) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ParseError("csv: bad counter \"" + std::string(s) + "\"");
    }
    return v;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

std::uint32_t depth_for_resolution(std::uint32_t resolution) {
    std::uint32_t depth = 0;
    while ((1u << depth) < resolution) {
        ++depth;
    }
    return depth;
}

} // namespace

void cmd_build(const BuildConfig& config) {
    if (config.input.has_value() == config.shape.has_value()) {
        throw ValidationError("build needs exactly one of --input or --shape");
    }

    VoxelGrid grid = [&] {
        if (config.shape) {
            if (!config.depth) {
                throw ValidationError("--shape requires --depth");
            }
            return gen_primitive(primitive_kind_from_name(*config.shape), *config.depth);
        }
        VoxelGrid parsed = parse_binvox(read_binary_file(*config.input));
        if (config.depth && (1u << *config.depth) != parsed.resolution()) {
            throw ValidationError("--depth " + std::to_string(*config.depth) +
                                  " does not match the binvox resolution " +
                                  std::to_string(parsed.resolution()) + " of " +
                                  config.input->string());
        }
        return parsed;
    }();

    const SvoModel model = build_from_grid(grid, depth_for_resolution(grid.resolution()));
    const SvoValidationReport report = validate(model);
    if (!report.ok()) {
        throw ValidationError("built model fails validation: " +
                              report.violations.front().message);
    }
    save_svo(config.output, model);
}

void cmd_info(const std::filesystem::path& path, std::ostream& out) {
    const SvoModel model = load_svo(path);
    const SvoStats s = stats(model);
    out << "path: " << path.string() << "\n"
        << "depth: " << s.depth << "\n"
        << "resolution: " << model.resolution() << "\n"
        << "node_count: " << s.node_count << "\n"
        << "leaf_count: " << s.leaf_count << "\n"
        << "attr_count: " << model.attributes.size() << "\n"
        << "byte_size: " << s.byte_size << "\n"
        << "fill_ratio: " << format_double(s.fill_ratio) << "\n"
        << "animation_state_bytes_per_object: " << kAnimationStateBytesPerObject << "\n";
}

int resolve_thread_count(int flag_value) {
    if (flag_value > 0) {
        return flag_value;
    }
    if (const char* env = std::getenv("VOXANIM_THREADS")) {
        const int parsed = std::atoi(env);
        if (parsed > 0) {
            return parsed;
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

namespace {

void write_stats_row(std::ostream& out, const std::string& mode, int frame,
                     const FrameStats& stats) {
    out << mode << ',' << frame << ',' << format_double(stats.render_ms) << ',' << stats.rays
        << ',' << stats.sphere_tests << ',' << stats.svo_traversals << ','
        << stats.pixels_reused << '\n';
}

constexpr const char* kCsvHeader = "mode,frame,ms,rays,sphere_tests,svo_traversals,pixels_reused";

} // namespace

void cmd_render(const RenderConfig& config, std::ostream& stats_out) {
    if (config.width < 1 || config.height < 1) {
        throw ValidationError("render size must be at least 1x1");
    }
    if (config.frames < 1) {
        throw ValidationError("frame count must be at least 1");
    }
    if (!(config.fps > 0.0)) {
        throw ValidationError("fps must be positive");
    }

    Scene scene = load_scene_file(config.scene);
    scene.camera.width = config.width;
    scene.camera.height = config.height;

    std::filesystem::create_directories(config.out_dir);

    std::ofstream csv_file;
    std::ostream* csv = &stats_out;
    if (config.csv) {
        csv_file.open(*config.csv, std::ios::trunc);
        if (!csv_file) {
            throw IoError("cannot open csv output: " + config.csv->string());
        }
        csv = &csv_file;
    }
    *csv << kCsvHeader << '\n';

    HitBuffer hbo(config.width, config.height);
    RenderOptions opts;
    opts.culling = config.culling;
    opts.sorting = config.sorting;
    opts.hbo = config.hbo ? &hbo : nullptr;
    opts.threads = resolve_thread_count(config.threads);

    std::vector<std::filesystem::path> written;
    double total_ms = 0.0;
    try {
        for (int frame = 0; frame < config.frames; ++frame) {
            evaluate_animation(scene, frame / config.fps);
            FrameStats stats;
            const Image image = render_frame(scene, opts, stats);
            mark_clean(scene);

            std::ostringstream name;
            name << "frame_" << std::setw(5) << std::setfill('0') << frame << ".ppm";
            const std::filesystem::path path = config.out_dir / name.str();
            std::ofstream out(path, std::ios::binary | std::ios::trunc);
            if (!out) {
                throw IoError("cannot open frame output: " + path.string());
            }
            written.push_back(path);
            const std::string ppm = write_ppm(image);
            out.write(ppm.data(), static_cast<std::streamsize>(ppm.size()));
            if (!out) {
                throw IoError("short write: " + path.string());
            }

            write_stats_row(*csv, "render", frame, stats);
            total_ms += stats.render_ms;
        }
    } catch (...) {
        for (const std::filesystem::path& path : written) {
            std::error_code ec;
            std::filesystem::remove(path, ec);
        }
        throw;
    }
    const double avg_ms = total_ms / config.frames;
    *csv << "render," << format_double(avg_ms) << ',' << format_double(1000.0 / avg_ms) << '\n';
}

BenchReport cmd_bench(const BenchConfig& config) {
    if (config.mode != "static" && config.mode != "animated" && config.mode != "animated-opt") {
        throw ValidationError("bench mode must be static, animated, or animated-opt");
    }
    if (config.frames < 1) {
        throw ValidationError("frame count must be at least 1");
    }
    if (config.seconds && !(*config.seconds > 0.0)) {
        throw ValidationError("--seconds must be positive");
    }

    Scene scene = load_scene_file(config.scene);
    scene.camera.width = config.width;
    scene.camera.height = config.height;

    const bool animate = config.mode != "static";
    const bool optimized = config.mode == "animated-opt";

    HitBuffer hbo(config.width, config.height);
    RenderOptions opts;
    opts.culling = optimized;
    opts.sorting = optimized;
    opts.hbo = optimized ? &hbo : nullptr;
    opts.threads = resolve_thread_count(config.threads);

    BenchReport report;
    report.mode = config.mode;

    const auto wall_start = std::chrono::steady_clock::now();
    const auto elapsed_s = [&wall_start] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start)
            .count();
    };

    for (int frame = 0;; ++frame) {
        if (config.seconds) {
            if (frame > 0 && elapsed_s() >= *config.seconds) {
                break;
            }
        } else if (frame >= config.frames) {
            break;
        }
        if (animate) {
            evaluate_animation(scene, frame / config.fps);
        }
        FrameStats stats;
        render_frame(scene, opts, stats);
        mark_clean(scene);
        report.per_frame_ms.push_back(stats.render_ms);
        report.totals.rays += stats.rays;
        report.totals.sphere_tests += stats.sphere_tests;
        report.totals.svo_traversals += stats.svo_traversals;
        report.totals.pixels_reused += stats.pixels_reused;
        report.totals.render_ms += stats.render_ms;
    }

    double total = 0.0;
    for (double ms : report.per_frame_ms) {
        total += ms;
    }
    report.avg_ms = total / static_cast<double>(report.per_frame_ms.size());
    report.fps = 1000.0 / report.avg_ms;

    if (config.csv) {
        std::ofstream out(*config.csv, std::ios::trunc);
        if (!out) {
            throw IoError("cannot open csv output: " + config.csv->string());
        }
        out << bench_report_csv(report);
        if (!out) {
            throw IoError("short write: " + config.csv->string());
        }
    }
    return report;
}

std::string bench_report_csv(const BenchReport& report) {
    std::ostringstream out;
    out << kCsvHeader << '\n';
    // Counter columns repeat the aggregate totals on every row; the timing
    // column is the only genuinely per-frame quantity collected.
    for (std::size_t frame = 0; frame < report.per_frame_ms.size(); ++frame) {
        out << report.mode << ',' << frame << ',' << format_double(report.per_frame_ms[frame])
            << ',' << report.totals.rays << ',' << report.totals.sphere_tests << ','
            << report.totals.svo_traversals << ',' << report.totals.pixels_reused << '\n';
    }
    out << report.mode << ',' << format_double(report.avg_ms) << ','
        << format_double(report.fps) << '\n';
    return out.str();
}

BenchReport parse_bench_report_csv(const std::string& text) {
    BenchReport report;
    std::istringstream in(text);
    std::string line;
    bool have_summary = false;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        if (first) {
            first = false;
            if (line == kCsvHeader) {
                continue;
            }
        }
        const auto fields = split_csv_line(line);
        if (fields.size() == 7) {
            report.mode = std::string(fields[0]);
            report.per_frame_ms.push_back(parse_double(fields[2]));
            report.totals.rays = parse_u64(fields[3]);
            report.totals.sphere_tests = parse_u64(fields[4]);
            report.totals.svo_traversals = parse_u64(fields[5]);
            report.totals.pixels_reused = parse_u64(fields[6]);
        } else if (fields.size() == 3) {
            report.mode = std::string(fields[0]);
            report.avg_ms = parse_double(fields[1]);
            report.fps = parse_double(fields[2]);
            have_summary = true;
        } else {
            throw ParseError("csv: unexpected field count in line \"" + line + "\"");
        }
    }
    if (!have_summary) {
        throw ParseError("csv: missing summary line");
    }
    return report;
}

namespace {

std::pair<int, int> parse_size(const std::string& size) {
    const std::size_t x = size.find('x');
    if (x == std::string::npos) {
        throw ValidationError("--size must look like 640x480");
    }
    try {
        const int w = std::stoi(size.substr(0, x));
        const int h = std::stoi(size.substr(x + 1));
        if (w < 1 || h < 1) {
            throw ValidationError("--size dimensions must be positive");
        }
        return {w, h};
    } catch (const std::logic_error&) {
        throw ValidationError("--size must look like 640x480");
    }
}

} // namespace

int run_main(int argc, const char* const* argv) {
    CLI::App app{"Animated sparse-voxel-octree ray tracer"};
    app.require_subcommand(1);

    // build
    auto* build = app.add_subcommand("build", "Build a .svo model from a binvox file or a primitive");
    std::string build_input;
    std::string build_shape;
    std::string build_out;
    std::uint32_t build_depth = 0;
    bool build_depth_set = false;
    build->add_option("--input", build_input, "binvox input file");
    build->add_option("--shape", build_shape, "primitive: sphere|box_shell|menger|checker");
    build->add_option("--out", build_out, "output .svo path")->required();
    build->add_option_function<std::uint32_t>(
        "--depth",
        [&](const std::uint32_t& v) {
            build_depth = v;
            build_depth_set = true;
        },
        "octree depth / primitive level");

    // info
    auto* info = app.add_subcommand("info", "Print stats of a .svo model");
    std::string info_path;
    info->add_option("path", info_path, ".svo file")->required();

    // shared render/bench options
    std::string scene_path;
    std::string size_str = "640x480";
    int frames = 1;
    double fps = 30.0;
    int threads = 0;
    std::string csv_path;

    auto* render = app.add_subcommand("render", "Render an animation sequence to PPM frames");
    std::string out_dir = ".";
    bool no_culling = false;
    bool no_sorting = false;
    bool no_hbo = false;
    render->add_option("--scene", scene_path, "scene JSON")->required();
    render->add_option("--out", out_dir, "output directory");
    render->add_option("--size", size_str, "frame size WxH");
    render->add_option("--frames", frames, "number of frames");
    render->add_option("--fps", fps, "animation frames per second");
    render->add_flag("--no-culling", no_culling, "disable bounding-sphere culling");
    render->add_flag("--no-sorting", no_sorting, "disable front-to-back sorting");
    render->add_flag("--no-hbo", no_hbo, "disable the hit buffer");
    render->add_option("--threads", threads, "render thread count");
    render->add_option("--csv", csv_path, "write per-frame stats CSV here");

    auto* bench = app.add_subcommand("bench", "Benchmark static/animated/animated-opt modes");
    std::string bench_mode = "static";
    int bench_frames = 60;
    double bench_seconds = 0.0;
    bool bench_seconds_set = false;
    bench->add_option("--scene", scene_path, "scene JSON")->required();
    bench->add_option("--mode", bench_mode, "static|animated|animated-opt");
    bench->add_option("--frames", bench_frames, "fixed frame count");
    bench->add_option_function<double>(
        "--seconds",
        [&](const double& v) {
            bench_seconds = v;
            bench_seconds_set = true;
        },
        "run for wall-clock seconds instead of a frame count");
    bench->add_option("--size", size_str, "frame size WxH");
    bench->add_option("--fps", fps, "animation frames per second");
    bench->add_option("--threads", threads, "render thread count");
    bench->add_option("--csv", csv_path, "write the report CSV here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (build->parsed()) {
            BuildConfig config;
            if (!build_input.empty()) {
                config.input = build_input;
            }
            if (!build_shape.empty()) {
                config.shape = build_shape;
            }
            if (build_depth_set) {
                config.depth = build_depth;
            }
            config.output = build_out;
            cmd_build(config);
        } else if (info->parsed()) {
            cmd_info(info_path, std::cout);
        } else if (render->parsed()) {
            RenderConfig config;
            config.scene = scene_path;
            config.out_dir = out_dir;
            std::tie(config.width, config.height) = parse_size(size_str);
            config.frames = frames;
            config.fps = fps;
            config.culling = !no_culling;
            config.sorting = !no_sorting;
            config.hbo = !no_hbo;
            config.threads = threads;
            if (!csv_path.empty()) {
                config.csv = csv_path;
            }
            cmd_render(config, std::cout);
        } else if (bench->parsed()) {
            BenchConfig config;
            config.scene = scene_path;
            config.mode = bench_mode;
            config.frames = bench_frames;
            if (bench_seconds_set) {
                config.seconds = bench_seconds;
            }
            std::tie(config.width, config.height) = parse_size(size_str);
            config.fps = fps;
            config.threads = threads;
            if (!csv_path.empty()) {
                config.csv = csv_path;
            }
            const BenchReport report = cmd_bench(config);
            if (!config.csv) {
                std::cout << bench_report_csv(report);
            } else {
                std::cout << report.mode << ": avg " << format_double(report.avg_ms)
                          << " ms, " << format_double(report.fps) << " fps over "
                          << report.per_frame_ms.size() << " frames\n";
            }
        }
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitOk;
}

} // namespace voxanim::cli
