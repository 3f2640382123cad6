#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "support/oracles.hpp"
#include "voxanim/svo.hpp"

using namespace voxanim;

namespace {

std::set<std::array<std::uint32_t, 3>> leaf_set(const SvoModel& model) {
    std::set<std::array<std::uint32_t, 3>> out;
    for_each_leaf(model, [&](std::uint32_t x, std::uint32_t y, std::uint32_t z,
                             const VoxelAttribute&) { out.insert({x, y, z}); });
    return out;
}

std::set<std::array<std::uint32_t, 3>> grid_set(const VoxelGrid& grid) {
    std::set<std::array<std::uint32_t, 3>> out;
    const std::uint32_t n = grid.resolution();
    for (std::uint32_t x = 0; x < n; ++x)
        for (std::uint32_t y = 0; y < n; ++y)
            for (std::uint32_t z = 0; z < n; ++z)
                if (grid.is_set(x, y, z)) out.insert({x, y, z});
    return out;
}

} // namespace

TEST_CASE("build_from_grid: empty grid gives a lone root") {
    const SvoModel model = build_from_grid(VoxelGrid(8), 3);
    REQUIRE(model.nodes.size() == 1);
    CHECK(model.nodes[0].valid_mask == 0);
    CHECK(model.attributes.empty());
}

TEST_CASE("build_from_grid: full 2^3 grid packs into the root") {
    VoxelGrid grid(2);
    for (std::uint32_t x = 0; x < 2; ++x)
        for (std::uint32_t y = 0; y < 2; ++y)
            for (std::uint32_t z = 0; z < 2; ++z) grid.set(x, y, z);
    const SvoModel model = build_from_grid(grid, 1);
    REQUIRE(model.nodes.size() == 1);
    CHECK(model.nodes[0].valid_mask == 0xFF);
    CHECK(model.nodes[0].leaf_mask == 0xFF);
    CHECK(model.attributes.size() == 8);
}

TEST_CASE("build_from_grid: single corner voxel produces the reference node count") {
    VoxelGrid grid(8);
    grid.set(0, 0, 0);
    const SvoModel model = build_from_grid(grid, 3);
    CHECK(model.nodes.size() == oracles::reference_node_count(grid));
    CHECK(model.nodes.size() == 3); // root plus two internals
    CHECK(model.attributes.size() == 1);
}

TEST_CASE("build_from_grid rejects mismatched inputs") {
    CHECK_THROWS_AS(build_from_grid(VoxelGrid(8), 2), ValidationError);
    CHECK_THROWS_AS(build_from_grid(VoxelGrid(8), 0), ValidationError);
    CHECK_THROWS_AS(build_from_grid(VoxelGrid(8), 17), ValidationError);
}

TEST_CASE("node_child: empty node has no children") {
    SvoModel model;
    model.nodes.push_back({});
    for (unsigned oct = 0; oct < 8; ++oct) {
        CHECK(node_child(model, 0, oct).absent());
    }
}

TEST_CASE("node_child: full non-leaf packing is octant order") {
    SvoModel model;
    model.nodes.push_back({1, 0, 0xFF, 0x00});
    for (unsigned oct = 0; oct < 8; ++oct) {
        const ChildRef ref = node_child(model, 0, oct);
        CHECK(ref.is_node());
        CHECK(ref.index == 1 + oct);
    }
}

TEST_CASE("node_child: mixed masks follow the popcount-rank rule") {
    SvoModel model;
    model.nodes.push_back({10, 5, 0b10100100, 0b00100000});

    // Reference rank computation straight from the packing definition.
    const auto rank = [](std::uint8_t mask, unsigned octant) {
        unsigned r = 0;
        for (unsigned i = 0; i < octant; ++i) r += (mask >> i) & 1u;
        return r;
    };

    const ChildRef leaf = node_child(model, 0, 5);
    CHECK(leaf.is_leaf());
    CHECK(leaf.index == 5 + rank(0b00100000, 5));
    CHECK(leaf.index == 5);

    const ChildRef node = node_child(model, 0, 7);
    CHECK(node.is_node());
    CHECK(node.index == 10 + rank(0b10000100, 7));
    CHECK(node.index == 11);

    CHECK(node_child(model, 0, 2).is_node());
    CHECK(node_child(model, 0, 2).index == 10);
    CHECK(node_child(model, 0, 0).absent());
}

TEST_CASE("validate: fresh builds pass, corrupted models report violations") {
    VoxelGrid grid(4);
    grid.set(1, 2, 3);
    grid.set(0, 0, 0);
    SvoModel model = build_from_grid(grid, 2);
    CHECK(validate(model).ok());

    SvoModel bad_leaf = model;
    bad_leaf.nodes[0].leaf_mask = static_cast<std::uint8_t>(~bad_leaf.nodes[0].valid_mask);
    const auto report = validate(bad_leaf);
    REQUIRE(!report.ok());
    CHECK(report.violations.front().message.find("leaf not valid") != std::string::npos);

    SvoModel bad_index = model;
    bad_index.nodes[0].child_base = 1000;
    const auto report2 = validate(bad_index);
    REQUIRE(!report2.ok());
    CHECK(report2.violations.front().message.find("out of range") != std::string::npos);
}

TEST_CASE("stats: counts and byte size") {
    const SvoModel empty = build_from_grid(VoxelGrid(2), 1);
    CHECK(stats(empty).node_count == 1);
    CHECK(stats(empty).leaf_count == 0);

    VoxelGrid full(2);
    for (std::uint32_t x = 0; x < 2; ++x)
        for (std::uint32_t y = 0; y < 2; ++y)
            for (std::uint32_t z = 0; z < 2; ++z) full.set(x, y, z);
    const SvoModel one = build_from_grid(full, 1);
    CHECK(stats(one).node_count == 1);
    CHECK(stats(one).leaf_count == 8);
    CHECK(stats(one).fill_ratio == 1.0);
    CHECK(stats(one).byte_size == serialize(one).size());
}

TEST_CASE("stats: Menger sponge level 3 has 20^3 leaves") {
    const VoxelGrid grid = gen_primitive(PrimitiveKind::Menger, 3);
    const SvoModel model = build_from_grid(grid, grid.depth());
    CHECK(stats(model).leaf_count == oracles::menger_leaf_count(3));
    CHECK(stats(model).leaf_count == 8000);
}

TEST_CASE("serialize/deserialize round-trips and re-serializes byte-identically") {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 25; ++i) {
        const VoxelGrid grid = oracles::random_grid(rng, 3, 0.2);
        const SvoModel model = build_from_grid(grid, 3);
        const auto bytes = serialize(model);
        const SvoModel restored = deserialize(bytes);
        CHECK(restored == model);
        CHECK(serialize(restored) == bytes);
    }
}

TEST_CASE("deserialize rejects corrupted streams with distinct errors") {
    // Depth-2 model with one voxel: root (one internal child) at node 0,
    // then one node with a single leaf. Node records start at byte 20 and
    // are 12 bytes each, with child_base first and attr_base at +4.
    VoxelGrid grid(4);
    grid.set(0, 1, 1);
    const auto bytes = serialize(build_from_grid(grid, 2));
    REQUIRE(bytes.size() == 20 + 2 * 12 + 4);

    auto mutate = [&](auto fn) {
        auto copy = bytes;
        fn(copy);
        return copy;
    };

    const auto code_of = [](const std::vector<std::uint8_t>& data) {
        try {
            deserialize(data);
        } catch (const SvoFormatError& e) {
            return e.code();
        }
        throw std::runtime_error("expected a format error");
    };

    CHECK(code_of(mutate([](auto& b) { b[0] = 'X'; })) == SvoFormatErrorCode::BadMagic);
    CHECK(code_of(mutate([](auto& b) { b[4] = 9; })) == SvoFormatErrorCode::BadVersion);
    CHECK(code_of(mutate([](auto& b) { b.resize(b.size() - 3); })) ==
          SvoFormatErrorCode::Truncated);
    CHECK(code_of(mutate([](auto& b) { b[20] = 200; })) ==
          SvoFormatErrorCode::NodeIndexOutOfRange);
    CHECK(code_of(mutate([](auto& b) { b[32 + 4] = 77; })) ==
          SvoFormatErrorCode::AttrIndexOutOfRange);
    CHECK(code_of(mutate([](auto& b) { b.push_back(0); })) ==
          SvoFormatErrorCode::TrailingData);
}

TEST_CASE("tree walk recovers exactly the grid's set voxels") {
    std::mt19937_64 rng(31337);
    for (int i = 0; i < 100; ++i) {
        const std::uint32_t depth = 1 + static_cast<std::uint32_t>(rng() % 4);
        const VoxelGrid grid = oracles::random_grid(rng, depth, 0.15);
        const SvoModel model = build_from_grid(grid, depth);
        CHECK(leaf_set(model) == grid_set(grid));
        CHECK(validate(model).ok());
    }
}

TEST_CASE("node array is topologically ordered") {
    std::mt19937_64 rng(5);
    const VoxelGrid grid = oracles::random_grid(rng, 4, 0.1);
    const SvoModel model = build_from_grid(grid, 4);
    for (std::uint32_t i = 0; i < model.nodes.size(); ++i) {
        const SvoNode& node = model.nodes[i];
        const std::uint8_t internals = node.valid_mask & static_cast<std::uint8_t>(~node.leaf_mask);
        if (internals) {
            CHECK(node.child_base > i);
        }
    }
}
