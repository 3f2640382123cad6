#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "voxanim/errors.hpp"

namespace voxanim {

struct VoxelAttribute {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;
    std::uint8_t a = 255;

    friend constexpr bool operator==(const VoxelAttribute&, const VoxelAttribute&) = default;
};

enum class ColorMode : std::uint8_t {
    PositionHash, // deterministic hash of the voxel coordinate
    ByHeight,     // palette ramp over the y coordinate
    Constant,
};

struct ColorSpec {
    ColorMode mode = ColorMode::PositionHash;
    VoxelAttribute constant{200, 200, 200, 255};
};

/// Dense cubic occupancy grid with a power-of-two resolution. Colors are a
/// deterministic assignment rule evaluated per set voxel; the octree builder
/// materializes them into leaf attributes.
class VoxelGrid {
public:
    VoxelGrid(std::uint32_t resolution, ColorSpec colors = {});

    std::uint32_t resolution() const { return resolution_; }
    /// log2(resolution): the octree depth this grid builds to.
    std::uint32_t depth() const;

    bool is_set(std::uint32_t x, std::uint32_t y, std::uint32_t z) const {
        const std::uint64_t i = index(x, y, z);
        return (bits_[i >> 6] >> (i & 63)) & 1u;
    }

    void set(std::uint32_t x, std::uint32_t y, std::uint32_t z, bool value = true);

    VoxelAttribute color_at(std::uint32_t x, std::uint32_t y, std::uint32_t z) const;

    std::uint64_t set_count() const;

    const ColorSpec& colors() const { return colors_; }
    void set_colors(const ColorSpec& spec) { colors_ = spec; }

private:
    std::uint64_t index(std::uint32_t x, std::uint32_t y, std::uint32_t z) const {
        return (static_cast<std::uint64_t>(x) * resolution_ + y) * resolution_ + z;
    }

    std::uint32_t resolution_;
    ColorSpec colors_;
    std::vector<std::uint64_t> bits_;
};

/// Decodes a binvox version-1 stream (ASCII header, then value/count RLE
/// byte pairs in x-major / z-middle / y-minor order). Non-power-of-two
/// dimensions are padded up, with the decoded voxels kept in the low corner.
VoxelGrid parse_binvox(std::span<const std::uint8_t> bytes);

enum class PrimitiveKind : std::uint8_t {
    Sphere,   // solid sphere inscribed in the cube
    BoxShell, // one-voxel-thick hollow box
    Menger,   // Menger sponge of level = depth
    Checker,  // alternating parity pattern
};

/// Deterministic procedural grids for tests, demos, and benchmarks. For
/// Menger, `depth` is the sponge level and the resolution is 3^depth rounded
/// up to a power of two; for the other kinds the resolution is 2^depth.
VoxelGrid gen_primitive(PrimitiveKind kind, std::uint32_t depth, ColorSpec colors = {});

PrimitiveKind primitive_kind_from_name(const std::string& name);

} // namespace voxanim
