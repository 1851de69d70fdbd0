#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "revox/error.hpp"
#include "revox/voxel_grid.hpp"
#include "support.hpp"

using namespace revox;
using revox::test::Lcg;

namespace {

GridConfig origin_pillars() {
    GridConfig g = GridConfig::pillars();
    g.range_min = {0.0, 0.0, -5.0};
    g.range_max = {40.0, 40.0, 3.0};
    return g;
}

// Union-find over an occupancy mask, the reference for component labels.
struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

TEST_CASE("default configs carry the reference resolutions and caps") {
    const GridConfig p = GridConfig::pillars();
    CHECK(p.mode == GridMode::kPillar);
    CHECK(p.voxel_size[0] == 0.25);
    CHECK(p.voxel_size[1] == 0.25);
    CHECK(p.max_points_per_voxel == 25);
    CHECK(p.max_voxels == 25000);
    const GridConfig s = GridConfig::second();
    CHECK(s.mode == GridMode::kVoxel);
    CHECK(s.voxel_size == std::array<double, 3>{0.05, 0.05, 0.1});
    CHECK(s.max_points_per_voxel == 4);
    CHECK(s.max_voxels == 30000);
}

TEST_CASE("invalid configs are rejected") {
    GridConfig g = GridConfig::pillars();
    g.voxel_size[0] = 0.0;
    CHECK_THROWS_AS(g.validate(), ConfigError);
    g = GridConfig::pillars();
    g.range_max[1] = g.range_min[1];
    CHECK_THROWS_AS(g.validate(), ConfigError);
    g = GridConfig::pillars();
    g.max_points_per_voxel = 0;
    CHECK_THROWS_AS(g.validate(), ConfigError);
    g = GridConfig::pillars();
    g.connectivity = Connectivity::kSixXYZ;
    CHECK_THROWS_AS(g.validate(), ConfigError);
}

TEST_CASE("point is floored into its pillar") {
    const GridConfig g = origin_pillars();
    PointCloud c;
    c.points.push_back({0.13f, 0.07f, -1.0f, 0.0f, 0.0f});
    const Partition p = partition(c, g);
    REQUIRE(p.grid.size() == 1);
    CHECK(p.grid.cell(0) == Cell{0, 0, 0});
}

TEST_CASE("points beyond the per-voxel cap are dropped in arrival order") {
    GridConfig g = origin_pillars();
    g.max_points_per_voxel = 2;
    PointCloud c;
    c.points = {{0.1f, 0.1f, 0, 0, 0}, {0.2f, 0.1f, 0, 0, 0}, {0.1f, 0.2f, 0, 0, 0}};
    const Partition p = partition(c, g);
    REQUIRE(p.grid.size() == 1);
    CHECK(p.grid.count(0) == 2);
    const auto idx = p.grid.point_indices(0);
    CHECK(std::vector<std::uint32_t>(idx.begin(), idx.end()) == std::vector<std::uint32_t>{0, 1});
}

TEST_CASE("range is half-open and out-of-range points are skipped") {
    const GridConfig g = origin_pillars();
    PointCloud c;
    c.points = {{0.0f, 0.0f, 0, 0, 0}, {40.0f, 1.0f, 0, 0, 0}, {-0.01f, 1.0f, 0, 0, 0},
                {1.0f, 1.0f, 3.0f, 0, 0}, {39.99f, 39.99f, -5.0f, 0, 0}};
    const Partition p = partition(c, g);
    REQUIRE(p.grid.size() == 2);
    CHECK(p.grid.cell(0) == Cell{0, 0, 0});
    CHECK(p.grid.cell(1) == Cell{159, 159, 0});
}

TEST_CASE("voxel cap stops admitting new cells") {
    GridConfig g = origin_pillars();
    g.max_voxels = 3;
    PointCloud c;
    for (int i = 0; i < 10; ++i) {
        c.points.push_back({0.1f + i * 1.0f, 0.1f, 0, 0, 0});
    }
    const Partition p = partition(c, g);
    CHECK(p.grid.size() == 3);
    CHECK(p.grid.cell(2) == Cell{8, 0, 0});
}

TEST_CASE("counts match brute-force bucketing on a 10000-point fixture") {
    const GridConfig g = origin_pillars();
    Lcg rng(21);
    PointCloud c;
    for (int i = 0; i < 10000; ++i) {
        // Concentrate on a corner so many cells exceed the cap.
        const double x = std::pow(rng.uniform(), 2.0) * 42.0 - 1.0;
        const double y = std::pow(rng.uniform(), 2.0) * 42.0 - 1.0;
        c.points.push_back({static_cast<float>(x), static_cast<float>(y),
                            static_cast<float>(rng.uniform(-6, 4)), 0, 0});
    }

    // Oracle: bucket every in-range point, then cap.
    std::map<std::array<long, 2>, std::uint32_t> expected;
    for (const Point& p : c.points) {
        if (p.x < 0 || p.x >= 40 || p.y < 0 || p.y >= 40 || p.z < -5 || p.z >= 3) {
            continue;
        }
        auto& n = expected[{static_cast<long>(std::floor(p.x / 0.25)),
                            static_cast<long>(std::floor(p.y / 0.25))}];
        n = std::min<std::uint32_t>(n + 1, 25);
    }

    const Partition p = partition(c, g);
    std::map<std::array<long, 2>, std::uint32_t> actual;
    for (VoxelId v = 0; v < p.grid.size(); ++v) {
        actual[{p.grid.cell(v)[0], p.grid.cell(v)[1]}] = p.grid.count(v);
    }
    CHECK(actual == expected);
}

TEST_CASE("voxel mode buckets in three dimensions") {
    GridConfig g = GridConfig::second();
    g.range_min = {0, 0, 0};
    g.range_max = {1, 1, 1};
    PointCloud c;
    c.points = {{0.01f, 0.01f, 0.01f, 0, 0}, {0.01f, 0.01f, 0.15f, 0, 0}, {0.06f, 0.01f, 0.01f, 0, 0}};
    const Partition p = partition(c, g);
    REQUIRE(p.grid.size() == 3);
    CHECK(p.grid.cell(1) == Cell{0, 0, 1});
    CHECK(p.graph.neighbor(0, kRight) == 2);
    // Four-connectivity ignores the vertical neighbor.
    CHECK(p.graph.neighbor(0, kUp) == kNoVoxel);

    g.connectivity = Connectivity::kSixXYZ;
    const Partition six = partition(c, g);
    CHECK(six.graph.neighbor(0, kUp) == 1);
    CHECK(six.graph.neighbor(1, kDown) == 0);
}

TEST_CASE("adjacent cells form one component, separated cells two") {
    const GridConfig g = revox::test::unit_pillars(8, 8, 4);
    {
        const PointCloud c = revox::test::cloud_from_counts({{{1, 1}, 1}, {{2, 1}, 1}});
        const Partition p = partition(c, g);
        CHECK(connected_components(p.graph).component_count == 1);
    }
    {
        const PointCloud c = revox::test::cloud_from_counts({{{1, 1}, 1}, {{3, 1}, 1}});
        const Partition p = partition(c, g);
        CHECK(connected_components(p.graph).component_count == 2);
    }
    {
        // Diagonal contact does not connect.
        const PointCloud c = revox::test::cloud_from_counts({{{1, 1}, 1}, {{2, 2}, 1}});
        const Partition p = partition(c, g);
        CHECK(connected_components(p.graph).component_count == 2);
    }
}

TEST_CASE("components match a union-find oracle on random 64x64 grids") {
    Lcg rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const double fill = 0.3 + 0.05 * (trial % 8);
        std::vector<std::pair<std::pair<int, int>, int>> cells;
        std::vector<int> occupied(64 * 64, 0);
        for (int y = 0; y < 64; ++y) {
            for (int x = 0; x < 64; ++x) {
                if (rng.uniform() < fill) {
                    occupied[y * 64 + x] = 1;
                    cells.push_back({{x, y}, 1});
                }
            }
        }
        // Shuffle creation order so voxel ids differ from raster order.
        for (std::size_t i = cells.size(); i > 1; --i) {
            std::swap(cells[i - 1], cells[rng.below(static_cast<std::uint32_t>(i))]);
        }
        UnionFind uf(64 * 64);
        for (int y = 0; y < 64; ++y) {
            for (int x = 0; x < 64; ++x) {
                if (!occupied[y * 64 + x]) continue;
                if (x + 1 < 64 && occupied[y * 64 + x + 1]) uf.unite(y * 64 + x, y * 64 + x + 1);
                if (y + 1 < 64 && occupied[(y + 1) * 64 + x]) uf.unite(y * 64 + x, (y + 1) * 64 + x);
            }
        }

        const Partition p = partition(revox::test::cloud_from_counts(cells), revox::test::unit_pillars(64, 64, 4));
        const ComponentLabels labels = connected_components(p.graph);
        std::set<int> roots;
        for (VoxelId a = 0; a < p.grid.size(); ++a) {
            const Cell& ca = p.grid.cell(a);
            roots.insert(uf.find(ca[1] * 64 + ca[0]));
        }
        CHECK(labels.component_count == roots.size());
        // Same partition: labels agree iff union-find roots agree (checked
        // against a representative per label).
        std::map<std::uint32_t, int> label_root;
        for (VoxelId a = 0; a < p.grid.size(); ++a) {
            const Cell& ca = p.grid.cell(a);
            const int root = uf.find(ca[1] * 64 + ca[0]);
            const auto [it, fresh] = label_root.emplace(labels.label[a], root);
            CHECK(it->second == root);
        }
        CHECK(label_root.size() == roots.size());
        // Labels are numbered by lowest voxel id.
        std::uint32_t next = 0;
        for (VoxelId a = 0; a < p.grid.size(); ++a) {
            if (labels.label[a] == next) {
                ++next;
            } else {
                CHECK(labels.label[a] < next);
            }
        }
    }
}

TEST_CASE("recorded adjacency is symmetric and equals cell lookup") {
    const PointCloud c = generate_synthetic(standard_sparse_benchmark(), 2);
    for (auto conn : {Connectivity::kFourXY, Connectivity::kSixXYZ}) {
        GridConfig g = conn == Connectivity::kFourXY ? GridConfig::pillars() : GridConfig::second();
        g.connectivity = conn;
        const Partition p = partition(c, g);
        CHECK(p.graph.is_symmetric());
        const NeighborGraph rebuilt = build_graph(p.grid, conn);
        REQUIRE(rebuilt.size() == p.graph.size());
        for (VoxelId v = 0; v < p.grid.size(); ++v) {
            CHECK(rebuilt.slots(v) == p.graph.slots(v));
        }
    }
}

TEST_CASE("caps hold on the benchmark cloud") {
    const PointCloud c = generate_synthetic(standard_sparse_benchmark(), 4);
    for (GridConfig g : {GridConfig::pillars(), GridConfig::second()}) {
        g.max_voxels = 5000;
        const Partition p = partition(c, g);
        CHECK(p.grid.size() <= 5000);
        for (VoxelId v = 0; v < p.grid.size(); ++v) {
            CHECK(p.grid.count(v) <= g.max_points_per_voxel);
            CHECK(p.grid.count(v) >= 1);
        }
    }
}

TEST_CASE("without caps the cell to point-set map is permutation invariant") {
    GridConfig g = origin_pillars();
    g.max_points_per_voxel = 65535;
    g.max_voxels = 1000000;
    Lcg rng(8);
    PointCloud c;
    for (int i = 0; i < 3000; ++i) {
        c.points.push_back({static_cast<float>(rng.uniform(0, 10)), static_cast<float>(rng.uniform(0, 10)), 0, 0, 0});
    }
    std::vector<std::uint32_t> perm(c.size());
    std::iota(perm.begin(), perm.end(), 0u);
    for (std::size_t i = perm.size(); i > 1; --i) {
        std::swap(perm[i - 1], perm[rng.below(static_cast<std::uint32_t>(i))]);
    }
    PointCloud shuffled;
    for (std::uint32_t k : perm) {
        shuffled.points.push_back(c.points[k]);
    }

    auto as_map = [](const Partition& p, const std::vector<std::uint32_t>* remap) {
        std::map<Cell, std::set<std::uint32_t>> m;
        for (VoxelId v = 0; v < p.grid.size(); ++v) {
            for (std::uint32_t idx : p.grid.point_indices(v)) {
                m[p.grid.cell(v)].insert(remap ? (*remap)[idx] : idx);
            }
        }
        return m;
    };
    CHECK(as_map(partition(c, g), nullptr) == as_map(partition(shuffled, g), &perm));
}

TEST_CASE("plain partition gives the same grid without adjacency") {
    const PointCloud c = generate_synthetic(standard_sparse_benchmark(), 6);
    const Partition full = partition(c, GridConfig::pillars());
    const Partition plain = partition(c, GridConfig::pillars(), PartitionOptions{false});
    REQUIRE(full.grid.size() == plain.grid.size());
    CHECK(std::equal(full.grid.counts().begin(), full.grid.counts().end(), plain.grid.counts().begin()));
}

TEST_CASE("indices are readable only after finalize and keep arrival order") {
    VoxelGrid grid(origin_pillars());
    const VoxelId a = grid.add_voxel({0, 0, 0});
    const VoxelId b = grid.add_voxel({3, 1, 0});
    CHECK(grid.add_point(b, 7));
    CHECK(grid.add_point(a, 2));
    CHECK(grid.add_point(b, 1));
    CHECK_FALSE(grid.finalized());
    CHECK_THROWS_AS((void)grid.point_indices(a), ContractViolation);

    grid.finalize();
    CHECK(std::ranges::equal(grid.point_indices(a), std::vector<std::uint32_t>{2}));
    CHECK(std::ranges::equal(grid.point_indices(b), std::vector<std::uint32_t>{7, 1}));

    // Later additions append after the compacted indices.
    const VoxelId c = grid.add_voxel({5, 5, 0});
    CHECK(grid.add_point(a, 9));
    CHECK(grid.add_point(c, 4));
    grid.finalize();
    grid.finalize();
    CHECK(std::ranges::equal(grid.point_indices(a), std::vector<std::uint32_t>{2, 9}));
    CHECK(std::ranges::equal(grid.point_indices(b), std::vector<std::uint32_t>{7, 1}));
    CHECK(std::ranges::equal(grid.point_indices(c), std::vector<std::uint32_t>{4}));
}

TEST_CASE("cell lookup survives table growth on narrow and wide grids") {
    GridConfig wide = GridConfig::second();
    wide.range_min = {-2000.0, -2000.0, -100.0};
    wide.range_max = {2000.0, 2000.0, 100.0};  // more than 2^32 cells
    for (const GridConfig& g : {origin_pillars(), wide}) {
        VoxelGrid grid(g);
        const auto d = g.dims();
        Lcg rng(11);
        std::map<std::array<std::int32_t, 3>, VoxelId> made;
        while (made.size() < 5000) {
            const Cell c{std::int32_t(rng.below(d[0])), std::int32_t(rng.below(d[1])),
                         std::int32_t(rng.below(d[2]))};
            if (!made.contains(c)) {
                made[c] = grid.add_voxel(c);
            }
        }
        for (const auto& [c, id] : made) {
            REQUIRE(grid.find(c) == id);
        }
        const Cell corner{d[0] - 1, d[1] - 1, d[2] - 1};
        CHECK(grid.find(corner).has_value() == made.contains(corner));
    }
}
