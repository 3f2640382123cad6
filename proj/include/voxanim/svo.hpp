#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "voxanim/errors.hpp"
#include "voxanim/ingest.hpp"

namespace voxanim {

/// Child index convention used everywhere: octant = (bx << 2) | (by << 1) | bz,
/// where a bit is 1 if the child occupies the upper half along that axis.
inline constexpr unsigned octant_from_bits(unsigned bx, unsigned by, unsigned bz) {
    return (bx << 2) | (by << 1) | bz;
}

inline constexpr unsigned octant_bit_x = 4;
inline constexpr unsigned octant_bit_y = 2;
inline constexpr unsigned octant_bit_z = 1;

/// Bit-packed octree node. Non-leaf valid children are stored contiguously
/// from child_base in ascending octant order; leaf children map to attributes
/// contiguously from attr_base the same way.
struct SvoNode {
    std::uint32_t child_base = 0;
    std::uint32_t attr_base = 0;
    std::uint8_t valid_mask = 0; // child i exists
    std::uint8_t leaf_mask = 0;  // child i is a leaf voxel (subset of valid_mask)

    friend constexpr bool operator==(const SvoNode&, const SvoNode&) = default;
};

struct SvoModel {
    std::uint32_t depth = 1; // levels below the root; resolution is 2^depth
    std::vector<SvoNode> nodes;
    std::vector<VoxelAttribute> attributes;

    std::uint32_t resolution() const { return 1u << depth; }

    friend bool operator==(const SvoModel&, const SvoModel&) = default;
};

struct ChildRef {
    enum class Kind : std::uint8_t { Absent, Node, Leaf };
    Kind kind = Kind::Absent;
    std::uint32_t index = 0; // node index (Node) or attribute index (Leaf)

    bool absent() const { return kind == Kind::Absent; }
    bool is_node() const { return kind == Kind::Node; }
    bool is_leaf() const { return kind == Kind::Leaf; }
};

/// Resolves the contiguous-child-packing rule for one octant of one node.
ChildRef node_child(const SvoModel& model, std::uint32_t node_index, unsigned octant);

/// Bottom-up construction from a dense grid. Empty subtrees are omitted;
/// every set voxel becomes a leaf at full depth carrying the grid color.
SvoModel build_from_grid(const VoxelGrid& grid, std::uint32_t depth);

struct SvoViolation {
    std::uint32_t node_index = 0;
    std::string message;
};

struct SvoValidationReport {
    std::vector<SvoViolation> violations;
    bool ok() const { return violations.empty(); }
};

SvoValidationReport validate(const SvoModel& model);

struct SvoStats {
    std::uint64_t node_count = 0;
    std::uint64_t leaf_count = 0;
    std::uint64_t byte_size = 0; // exact serialized size
    std::uint32_t depth = 0;
    double fill_ratio = 0.0; // leaf_count / 2^(3*depth)
};

SvoStats stats(const SvoModel& model);

/// .svo binary format, little-endian:
///   "SVOA", u32 version=1, u32 depth, u32 node_count, u32 attr_count
///   node_count x { u32 child_base, u32 attr_base, u8 valid, u8 leaf, u16 reserved=0 }
///   attr_count x { u8 r, g, b, a }
std::vector<std::uint8_t> serialize(const SvoModel& model);
SvoModel deserialize(std::span<const std::uint8_t> bytes);

void save_svo(const std::filesystem::path& path, const SvoModel& model);
SvoModel load_svo(const std::filesystem::path& path);

/// Exhaustive walk over all leaves, visiting (x, y, z, attribute).
void for_each_leaf(const SvoModel& model,
                   const std::function<void(std::uint32_t, std::uint32_t, std::uint32_t,
                                            const VoxelAttribute&)>& fn);

} // namespace voxanim
