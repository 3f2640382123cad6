#include "voxanim/svo.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <deque>
#include <fstream>
#include <memory>

namespace voxanim {

namespace {

constexpr std::uint32_t kMaxDepth = 16;
constexpr std::size_t kHeaderBytes = 20;
constexpr std::size_t kNodeBytes = 12;
constexpr std::size_t kAttrBytes = 4;
constexpr std::array<std::uint8_t, 4> kMagic{0x53, 0x56, 0x4F, 0x41}; // "SVOA"
constexpr std::uint32_t kVersion = 1;

unsigned rank_below(std::uint8_t mask, unsigned octant) {
    return static_cast<unsigned>(std::popcount(static_cast<std::uint8_t>(mask & ((1u << octant) - 1u))));
}

} // namespace

ChildRef node_child(const SvoModel& model, std::uint32_t node_index, unsigned octant) {
    const SvoNode& node = model.nodes[node_index];
    const std::uint8_t bit = static_cast<std::uint8_t>(1u << octant);
    if (!(node.valid_mask & bit)) {
        return {};
    }
    if (node.leaf_mask & bit) {
        const std::uint8_t leaves = node.valid_mask & node.leaf_mask;
        return {ChildRef::Kind::Leaf, node.attr_base + rank_below(leaves, octant)};
    }
    const std::uint8_t internals = node.valid_mask & static_cast<std::uint8_t>(~node.leaf_mask);
    return {ChildRef::Kind::Node, node.child_base + rank_below(internals, octant)};
}

namespace {

// Construction uses a temporary pointer tree, then linearizes breadth-first
// so that siblings are contiguous and every child index exceeds its parent's.
struct BuildNode {
    std::uint8_t valid_mask = 0;
    std::uint8_t leaf_mask = 0;
    std::array<std::unique_ptr<BuildNode>, 8> children{};
    std::array<VoxelAttribute, 8> leaf_colors{};
};

std::unique_ptr<BuildNode> build_subtree(const VoxelGrid& grid, std::uint32_t x0,
                                         std::uint32_t y0, std::uint32_t z0,
                                         std::uint32_t size) {
    auto node = std::make_unique<BuildNode>();
    const std::uint32_t half = size / 2;
    for (unsigned octant = 0; octant < 8; ++octant) {
        const std::uint32_t cx = x0 + ((octant & octant_bit_x) ? half : 0);
        const std::uint32_t cy = y0 + ((octant & octant_bit_y) ? half : 0);
        const std::uint32_t cz = z0 + ((octant & octant_bit_z) ? half : 0);
        if (half == 1) {
            if (grid.is_set(cx, cy, cz)) {
                node->valid_mask |= static_cast<std::uint8_t>(1u << octant);
                node->leaf_mask |= static_cast<std::uint8_t>(1u << octant);
                node->leaf_colors[octant] = grid.color_at(cx, cy, cz);
            }
        } else {
            auto child = build_subtree(grid, cx, cy, cz, half);
            if (child->valid_mask != 0) {
                node->valid_mask |= static_cast<std::uint8_t>(1u << octant);
                node->children[octant] = std::move(child);
            }
        }
    }
    return node;
}

} // namespace

SvoModel build_from_grid(const VoxelGrid& grid, std::uint32_t depth) {
    if (depth < 1 || depth > kMaxDepth) {
        throw ValidationError("octree depth must be in [1, 16], got " + std::to_string(depth));
    }
    if (grid.resolution() != (1u << depth)) {
        throw ValidationError("grid resolution " + std::to_string(grid.resolution()) +
                              " does not match 2^depth = " + std::to_string(1u << depth));
    }

    auto root = build_subtree(grid, 0, 0, 0, grid.resolution());

    SvoModel model;
    model.depth = depth;
    model.nodes.emplace_back();

    std::deque<std::pair<BuildNode*, std::uint32_t>> queue;
    queue.emplace_back(root.get(), 0);
    while (!queue.empty()) {
        auto [src, index] = queue.front();
        queue.pop_front();

        SvoNode packed;
        packed.valid_mask = src->valid_mask;
        packed.leaf_mask = src->leaf_mask;
        packed.attr_base = static_cast<std::uint32_t>(model.attributes.size());
        packed.child_base = static_cast<std::uint32_t>(model.nodes.size());
        bool any_internal = false;
        bool any_leaf = false;
        for (unsigned octant = 0; octant < 8; ++octant) {
            const std::uint8_t bit = static_cast<std::uint8_t>(1u << octant);
            if (!(src->valid_mask & bit)) {
                continue;
            }
            if (src->leaf_mask & bit) {
                model.attributes.push_back(src->leaf_colors[octant]);
                any_leaf = true;
            } else {
                queue.emplace_back(src->children[octant].get(),
                                   static_cast<std::uint32_t>(model.nodes.size()));
                model.nodes.emplace_back();
                any_internal = true;
            }
        }
        if (!any_internal) {
            packed.child_base = 0;
        }
        if (!any_leaf) {
            packed.attr_base = 0;
        }
        model.nodes[index] = packed;
    }
    return model;
}

SvoValidationReport validate(const SvoModel& model) {
    SvoValidationReport report;
    const auto add = [&](std::uint32_t node, std::string msg) {
        report.violations.push_back({node, std::move(msg)});
    };

    if (model.depth < 1 || model.depth > kMaxDepth) {
        add(0, "depth out of range [1, 16]");
    }
    if (model.nodes.empty()) {
        add(0, "model has no root node");
        return report;
    }

    const std::uint64_t node_count = model.nodes.size();
    const std::uint64_t attr_count = model.attributes.size();
    for (std::uint32_t i = 0; i < node_count; ++i) {
        const SvoNode& node = model.nodes[i];
        if (node.leaf_mask & ~node.valid_mask) {
            add(i, "leaf not valid: leaf_mask has bits outside valid_mask");
        }
        const unsigned internals =
            std::popcount(static_cast<std::uint8_t>(node.valid_mask & ~node.leaf_mask));
        const unsigned leaves =
            std::popcount(static_cast<std::uint8_t>(node.valid_mask & node.leaf_mask));
        if (internals > 0) {
            if (static_cast<std::uint64_t>(node.child_base) + internals > node_count) {
                add(i, "child_base out of range");
            } else if (node.child_base <= i) {
                add(i, "children do not follow parent (child_base <= node index)");
            }
        }
        if (leaves > 0 &&
            static_cast<std::uint64_t>(node.attr_base) + leaves > attr_count) {
            add(i, "attr_base out of range");
        }
    }
    return report;
}

SvoStats stats(const SvoModel& model) {
    SvoStats s;
    s.node_count = model.nodes.size();
    s.depth = model.depth;
    for (const SvoNode& node : model.nodes) {
        s.leaf_count += std::popcount(static_cast<std::uint8_t>(node.valid_mask & node.leaf_mask));
    }
    s.byte_size = kHeaderBytes + kNodeBytes * s.node_count + kAttrBytes * model.attributes.size();
    const double voxels = std::ldexp(1.0, static_cast<int>(3 * model.depth));
    s.fill_ratio = static_cast<double>(s.leaf_count) / voxels;
    return s;
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 24));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t offset) {
    return static_cast<std::uint32_t>(bytes[offset]) |
           (static_cast<std::uint32_t>(bytes[offset + 1]) << 8) |
           (static_cast<std::uint32_t>(bytes[offset + 2]) << 16) |
           (static_cast<std::uint32_t>(bytes[offset + 3]) << 24);
}

} // namespace

std::vector<std::uint8_t> serialize(const SvoModel& model) {
    std::vector<std::uint8_t> out;
    out.reserve(kHeaderBytes + kNodeBytes * model.nodes.size() +
                kAttrBytes * model.attributes.size());
    out.insert(out.end(), kMagic.begin(), kMagic.end());
    put_u32(out, kVersion);
    put_u32(out, model.depth);
    put_u32(out, static_cast<std::uint32_t>(model.nodes.size()));
    put_u32(out, static_cast<std::uint32_t>(model.attributes.size()));
    for (const SvoNode& node : model.nodes) {
        put_u32(out, node.child_base);
        put_u32(out, node.attr_base);
        out.push_back(node.valid_mask);
        out.push_back(node.leaf_mask);
        out.push_back(0); // reserved
        out.push_back(0);
    }
    for (const VoxelAttribute& attr : model.attributes) {
        out.push_back(attr.r);
        out.push_back(attr.g);
        out.push_back(attr.b);
        out.push_back(attr.a);
    }
    return out;
}

SvoModel deserialize(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kHeaderBytes) {
        throw SvoFormatError(SvoFormatErrorCode::Truncated, "svo: truncated header");
    }
    if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
        throw SvoFormatError(SvoFormatErrorCode::BadMagic, "svo: bad magic, not an SVOA file");
    }
    const std::uint32_t version = get_u32(bytes, 4);
    if (version != kVersion) {
        throw SvoFormatError(SvoFormatErrorCode::BadVersion,
                             "svo: unsupported version " + std::to_string(version));
    }
    const std::uint32_t depth = get_u32(bytes, 8);
    const std::uint32_t node_count = get_u32(bytes, 12);
    const std::uint32_t attr_count = get_u32(bytes, 16);
    if (depth < 1 || depth > kMaxDepth || node_count == 0) {
        throw SvoFormatError(SvoFormatErrorCode::BadHeader,
                             "svo: bad header (depth or node count out of range)");
    }
    const std::size_t expected =
        kHeaderBytes + kNodeBytes * static_cast<std::size_t>(node_count) +
        kAttrBytes * static_cast<std::size_t>(attr_count);
    if (bytes.size() < expected) {
        throw SvoFormatError(SvoFormatErrorCode::Truncated, "svo: truncated payload");
    }
    if (bytes.size() > expected) {
        throw SvoFormatError(SvoFormatErrorCode::TrailingData,
                             "svo: trailing bytes after payload");
    }

    SvoModel model;
    model.depth = depth;
    model.nodes.resize(node_count);
    model.attributes.resize(attr_count);
    std::size_t offset = kHeaderBytes;
    for (std::uint32_t i = 0; i < node_count; ++i, offset += kNodeBytes) {
        SvoNode& node = model.nodes[i];
        node.child_base = get_u32(bytes, offset);
        node.attr_base = get_u32(bytes, offset + 4);
        node.valid_mask = bytes[offset + 8];
        node.leaf_mask = bytes[offset + 9];
        const unsigned internals =
            std::popcount(static_cast<std::uint8_t>(node.valid_mask & ~node.leaf_mask));
        const unsigned leaves =
            std::popcount(static_cast<std::uint8_t>(node.valid_mask & node.leaf_mask));
        if (internals > 0 &&
            static_cast<std::uint64_t>(node.child_base) + internals > node_count) {
            throw SvoFormatError(SvoFormatErrorCode::NodeIndexOutOfRange,
                                 "svo: node " + std::to_string(i) + " child_base out of range");
        }
        if (leaves > 0 && static_cast<std::uint64_t>(node.attr_base) + leaves > attr_count) {
            throw SvoFormatError(SvoFormatErrorCode::AttrIndexOutOfRange,
                                 "svo: node " + std::to_string(i) + " attr_base out of range");
        }
    }
    for (std::uint32_t i = 0; i < attr_count; ++i, offset += kAttrBytes) {
        model.attributes[i] = {bytes[offset], bytes[offset + 1], bytes[offset + 2],
                               bytes[offset + 3]};
    }
    return model;
}

void save_svo(const std::filesystem::path& path, const SvoModel& model) {
    const std::vector<std::uint8_t> bytes = serialize(model);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("short write: " + path.string());
    }
}

SvoModel load_svo(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open: " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

namespace {

void walk_leaves(const SvoModel& model, std::uint32_t node_index, std::uint32_t x,
                 std::uint32_t y, std::uint32_t z, std::uint32_t level,
                 const std::function<void(std::uint32_t, std::uint32_t, std::uint32_t,
                                          const VoxelAttribute&)>& fn) {
    for (unsigned octant = 0; octant < 8; ++octant) {
        const ChildRef ref = node_child(model, node_index, octant);
        if (ref.absent()) {
            continue;
        }
        const std::uint32_t cx = (x << 1) | ((octant & octant_bit_x) ? 1u : 0u);
        const std::uint32_t cy = (y << 1) | ((octant & octant_bit_y) ? 1u : 0u);
        const std::uint32_t cz = (z << 1) | ((octant & octant_bit_z) ? 1u : 0u);
        if (ref.is_leaf()) {
            // Leaves always sit at maximum depth by construction; scale up in
            // case a hand-built model placed one higher.
            const std::uint32_t shift = model.depth - level - 1;
            fn(cx << shift, cy << shift, cz << shift, model.attributes[ref.index]);
        } else {
            walk_leaves(model, ref.index, cx, cy, cz, level + 1, fn);
        }
    }
}

} // namespace

void for_each_leaf(const SvoModel& model,
                   const std::function<void(std::uint32_t, std::uint32_t, std::uint32_t,
                                            const VoxelAttribute&)>& fn) {
    if (model.nodes.empty()) {
        return;
    }
    walk_leaves(model, 0, 0, 0, 0, 0, fn);
}

} // namespace voxanim
