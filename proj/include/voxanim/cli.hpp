#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "voxanim/renderer.hpp"

namespace voxanim::cli {

// Exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitParse = 4;
inline constexpr int kExitValidation = 5;

/// Fixed per-object animation footprint reported by `info`.
inline constexpr std::size_t kAnimationStateBytesPerObject = sizeof(RigidTransform);
static_assert(kAnimationStateBytesPerObject <= 128);

struct BuildConfig {
    std::optional<std::filesystem::path> input; // binvox file
    std::optional<std::string> shape;           // primitive name
    std::optional<std::uint32_t> depth;
    std::filesystem::path output;
};

struct RenderConfig {
    std::filesystem::path scene;
    std::filesystem::path out_dir = ".";
    int width = 640;
    int height = 480;
    int frames = 1;
    double fps = 30.0;
    bool culling = true;
    bool sorting = true;
    bool hbo = true;
    int threads = 0; // 0: VOXANIM_THREADS env, else hardware concurrency
    std::optional<std::filesystem::path> csv;
};

struct BenchConfig {
    std::filesystem::path scene;
    std::string mode = "static"; // static | animated | animated-opt
    int frames = 60;
    std::optional<double> seconds; // wall-clock alternative to the frame count
    int width = 640;
    int height = 480;
    double fps = 30.0;
    int threads = 0;
    std::optional<std::filesystem::path> csv;
};

struct BenchReport {
    std::string mode;
    std::vector<double> per_frame_ms;
    double avg_ms = 0.0;
    double fps = 0.0; // 1000 / avg_ms
    FrameStats totals;
};

void cmd_build(const BuildConfig& config);
void cmd_info(const std::filesystem::path& path, std::ostream& out);
void cmd_render(const RenderConfig& config, std::ostream& stats_out);
BenchReport cmd_bench(const BenchConfig& config);

/// CSV schema: header, then `mode,frame,ms,rays,sphere_tests,svo_traversals,
/// pixels_reused` rows, then a `mode,avg_ms,fps` summary line. Doubles are
/// written shortest-round-trip so parsing reproduces them exactly.
std::string bench_report_csv(const BenchReport& report);
BenchReport parse_bench_report_csv(const std::string& text);

/// Number of render threads: flag > VOXANIM_THREADS > hardware concurrency.
int resolve_thread_count(int flag_value);

/// Full argv entry point used by the voxanim binary; returns an exit code.
int run_main(int argc, const char* const* argv);

} // namespace voxanim::cli
