#include "voxanim/ingest.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <string>

namespace voxanim {

namespace {

// Dense grids are held fully in memory; depth 10 (1024^3 occupancy bits,
// 128 MB) is the desk-scale cap.
constexpr std::uint32_t kMaxGridDepth = 10;

bool is_power_of_two(std::uint32_t v) { return v != 0 && (v & (v - 1)) == 0; }

std::uint32_t next_power_of_two(std::uint32_t v) {
    return is_power_of_two(v) ? v : std::bit_ceil(v);
}

// SplitMix64 finalizer; stable across platforms.
std::uint64_t mix_hash(std::uint64_t v) {
    v += 0x9e3779b97f4a7c15ull;
    v = (v ^ (v >> 30)) * 0xbf58476d1ce4e5b9ull;
    v = (v ^ (v >> 27)) * 0x94d049bb133111ebull;
    return v ^ (v >> 31);
}

} // namespace

VoxelGrid::VoxelGrid(std::uint32_t resolution, ColorSpec colors)
    : resolution_(resolution), colors_(colors) {
    if (!is_power_of_two(resolution)) {
        throw ValidationError("grid resolution must be a power of two, got " +
                              std::to_string(resolution));
    }
    if (resolution > (1u << kMaxGridDepth)) {
        throw ValidationError("grid resolution " + std::to_string(resolution) +
                              " exceeds the dense-grid cap of 2^" +
                              std::to_string(kMaxGridDepth));
    }
    const std::uint64_t voxels =
        static_cast<std::uint64_t>(resolution) * resolution * resolution;
    bits_.assign((voxels + 63) / 64, 0);
}

std::uint32_t VoxelGrid::depth() const {
    return static_cast<std::uint32_t>(std::countr_zero(resolution_));
}

void VoxelGrid::set(std::uint32_t x, std::uint32_t y, std::uint32_t z, bool value) {
    const std::uint64_t i = index(x, y, z);
    if (value) {
        bits_[i >> 6] |= (1ull << (i & 63));
    } else {
        bits_[i >> 6] &= ~(1ull << (i & 63));
    }
}

VoxelAttribute VoxelGrid::color_at(std::uint32_t x, std::uint32_t y, std::uint32_t z) const {
    switch (colors_.mode) {
    case ColorMode::Constant:
        return colors_.constant;
    case ColorMode::ByHeight: {
        // Blue at the bottom, warm at the top.
        const double f = resolution_ > 1 ? static_cast<double>(y) / (resolution_ - 1) : 0.0;
        const auto lerp8 = [](double a, double b, double t) {
            return static_cast<std::uint8_t>(std::lround(a + (b - a) * t));
        };
        return {lerp8(40, 235, f), lerp8(90, 170, f), lerp8(200, 60, f), 255};
    }
    case ColorMode::PositionHash:
    default: {
        const std::uint64_t key = (static_cast<std::uint64_t>(x) << 42) |
                                  (static_cast<std::uint64_t>(y) << 21) |
                                  static_cast<std::uint64_t>(z);
        const std::uint64_t h = mix_hash(key);
        // Keep channels out of the near-black range so shading stays visible.
        return {static_cast<std::uint8_t>(64 + (h & 0xbf)),
                static_cast<std::uint8_t>(64 + ((h >> 8) & 0xbf)),
                static_cast<std::uint8_t>(64 + ((h >> 16) & 0xbf)), 255};
    }
    }
}

std::uint64_t VoxelGrid::set_count() const {
    std::uint64_t n = 0;
    for (std::uint64_t w : bits_) {
        n += static_cast<std::uint64_t>(std::popcount(w));
    }
    return n;
}

VoxelGrid parse_binvox(std::span<const std::uint8_t> bytes) {
    const std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());

    // Header: ASCII lines up to and including "data".
    std::size_t pos = 0;
    const auto next_line = [&]() -> std::string_view {
        if (pos >= text.size()) {
            throw ParseError("binvox: truncated header");
        }
        const std::size_t eol = text.find('\n', pos);
        const std::size_t end = (eol == std::string_view::npos) ? text.size() : eol;
        std::string_view line = text.substr(pos, end - pos);
        pos = (eol == std::string_view::npos) ? text.size() : eol + 1;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        return line;
    };

    {
        std::istringstream first{std::string(next_line())};
        std::string tag;
        int version = -1;
        first >> tag >> version;
        if (tag != "#binvox" || version != 1) {
            throw ParseError("binvox: bad header, expected \"#binvox 1\"");
        }
    }

    std::uint64_t dim_x = 0, dim_z = 0, dim_y = 0; // header order: depth, height, width
    bool have_dim = false;
    bool have_data = false;
    while (!have_data) {
        std::istringstream line{std::string(next_line())};
        std::string keyword;
        line >> keyword;
        if (keyword == "dim") {
            long long a = -1, b = -1, c = -1;
            line >> a >> b >> c;
            if (a <= 0 || b <= 0 || c <= 0) {
                throw ParseError("binvox: bad dim line");
            }
            dim_x = static_cast<std::uint64_t>(a);
            dim_z = static_cast<std::uint64_t>(b);
            dim_y = static_cast<std::uint64_t>(c);
            have_dim = true;
        } else if (keyword == "data") {
            have_data = true;
        }
        // translate/scale (and unknown keywords) carry no voxel information
    }
    if (!have_dim) {
        throw ParseError("binvox: missing dim line");
    }

    const std::uint64_t total = dim_x * dim_y * dim_z;
    const std::uint64_t max_extent = std::max({dim_x, dim_y, dim_z});
    if (max_extent > (1u << kMaxGridDepth)) {
        throw ParseError("binvox: dimensions too large for the dense-grid cap");
    }
    VoxelGrid grid(next_power_of_two(static_cast<std::uint32_t>(max_extent)));

    // RLE payload: (value, count) byte pairs, voxels ordered x-major,
    // z-middle, y-minor.
    const std::uint64_t wxh = dim_y * dim_z;
    std::uint64_t decoded = 0;
    while (pos < text.size()) {
        if (pos + 1 >= text.size()) {
            throw ParseError("binvox: truncated RLE stream (dangling value byte)");
        }
        const std::uint8_t value = bytes[pos];
        const std::uint8_t count = bytes[pos + 1];
        pos += 2;
        if (value > 1 || count == 0) {
            throw ParseError("binvox: invalid RLE pair");
        }
        if (decoded + count > total) {
            throw ParseError("binvox: RLE run count exceeds dim product");
        }
        if (value) {
            for (std::uint32_t k = 0; k < count; ++k) {
                const std::uint64_t i = decoded + k;
                const std::uint32_t x = static_cast<std::uint32_t>(i / wxh);
                const std::uint32_t z = static_cast<std::uint32_t>((i % wxh) / dim_y);
                const std::uint32_t y = static_cast<std::uint32_t>(i % dim_y);
                grid.set(x, y, z);
            }
        }
        decoded += count;
    }
    if (decoded != total) {
        throw ParseError("binvox: RLE decodes " + std::to_string(decoded) +
                         " voxels, dim product is " + std::to_string(total));
    }
    return grid;
}

namespace {

void fill_sphere(VoxelGrid& grid) {
    const std::uint32_t n = grid.resolution();
    const double c = n * 0.5;
    const double r2 = c * c;
    for (std::uint32_t x = 0; x < n; ++x) {
        for (std::uint32_t y = 0; y < n; ++y) {
            for (std::uint32_t z = 0; z < n; ++z) {
                const double dx = x + 0.5 - c;
                const double dy = y + 0.5 - c;
                const double dz = z + 0.5 - c;
                if (dx * dx + dy * dy + dz * dz <= r2) {
                    grid.set(x, y, z);
                }
            }
        }
    }
}

void fill_box_shell(VoxelGrid& grid) {
    const std::uint32_t n = grid.resolution();
    for (std::uint32_t x = 0; x < n; ++x) {
        for (std::uint32_t y = 0; y < n; ++y) {
            for (std::uint32_t z = 0; z < n; ++z) {
                if (x == 0 || y == 0 || z == 0 || x == n - 1 || y == n - 1 || z == n - 1) {
                    grid.set(x, y, z);
                }
            }
        }
    }
}

bool menger_filled(std::uint32_t x, std::uint32_t y, std::uint32_t z, std::uint32_t level) {
    for (std::uint32_t i = 0; i < level; ++i) {
        const int ones = (x % 3 == 1) + (y % 3 == 1) + (z % 3 == 1);
        if (ones >= 2) {
            return false;
        }
        x /= 3;
        y /= 3;
        z /= 3;
    }
    return true;
}

void fill_menger(VoxelGrid& grid, std::uint32_t level) {
    std::uint32_t side = 1;
    for (std::uint32_t i = 0; i < level; ++i) {
        side *= 3;
    }
    for (std::uint32_t x = 0; x < side; ++x) {
        for (std::uint32_t y = 0; y < side; ++y) {
            for (std::uint32_t z = 0; z < side; ++z) {
                if (menger_filled(x, y, z, level)) {
                    grid.set(x, y, z);
                }
            }
        }
    }
}

void fill_checker(VoxelGrid& grid) {
    const std::uint32_t n = grid.resolution();
    for (std::uint32_t x = 0; x < n; ++x) {
        for (std::uint32_t y = 0; y < n; ++y) {
            for (std::uint32_t z = 0; z < n; ++z) {
                if (((x + y + z) & 1u) == 0) {
                    grid.set(x, y, z);
                }
            }
        }
    }
}

} // namespace

VoxelGrid gen_primitive(PrimitiveKind kind, std::uint32_t depth, ColorSpec colors) {
    if (depth < 1 || depth > 10) {
        throw ValidationError("primitive depth must be in [1, 10], got " +
                              std::to_string(depth));
    }
    if (kind == PrimitiveKind::Menger) {
        std::uint32_t side = 1;
        for (std::uint32_t i = 0; i < depth; ++i) {
            side *= 3;
        }
        VoxelGrid grid(next_power_of_two(side), colors);
        fill_menger(grid, depth);
        return grid;
    }
    VoxelGrid grid(1u << depth, colors);
    switch (kind) {
    case PrimitiveKind::Sphere:
        fill_sphere(grid);
        break;
    case PrimitiveKind::BoxShell:
        fill_box_shell(grid);
        break;
    case PrimitiveKind::Checker:
        fill_checker(grid);
        break;
    default:
        throw ValidationError("unknown primitive kind");
    }
    return grid;
}

PrimitiveKind primitive_kind_from_name(const std::string& name) {
    if (name == "sphere") return PrimitiveKind::Sphere;
    if (name == "box_shell") return PrimitiveKind::BoxShell;
    if (name == "menger") return PrimitiveKind::Menger;
    if (name == "checker") return PrimitiveKind::Checker;
    throw ValidationError("unknown shape \"" + name +
                          "\"; expected sphere, box_shell, menger, or checker");
}

} // namespace voxanim
