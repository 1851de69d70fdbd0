#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "revox/error.hpp"
#include "revox/multires.hpp"
#include "revox/rng.hpp"
#include "support.hpp"

using namespace revox;
using revox::test::cloud_from_counts;
using revox::test::Lcg;
using revox::test::unit_pillars;

namespace {

using CellCounts = std::vector<std::pair<std::pair<int, int>, int>>;

CellCounts random_cells(Lcg& rng, int w, int h, double fill, std::uint32_t n) {
    CellCounts cells;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (rng.uniform() < fill) cells.push_back({{x, y}, 1 + static_cast<int>(rng.below(n))});
    return cells;
}

// Partial Fisher-Yates written out from the keyed draws.
std::vector<std::uint32_t> replay_resample(std::vector<std::uint32_t> pool, std::uint32_t n,
                                           std::uint64_t seed, std::uint64_t coarse_id) {
    if (pool.size() > n) {
        for (std::uint32_t i = 0; i < n; ++i) {
            const double u = keyed_uniform(seed, {3, coarse_id, i});
            const std::size_t j = std::min(pool.size() - 1, i + static_cast<std::size_t>(u * (pool.size() - i)));
            std::swap(pool[i], pool[j]);
        }
        pool.resize(n);
    }
    std::sort(pool.begin(), pool.end());
    return pool;
}

}  // namespace

TEST_CASE("parent cell is the floored half") {
    CHECK(parent_cell({5, 3, 0}) == Cell{2, 1, 0});
    CHECK(parent_cell({0, 1, 0}) == Cell{0, 0, 0});
    CHECK(parent_cell({-1, -2, 4}) == Cell{-1, -1, 4});
    CHECK(parent_cell({-3, 7, 0}) == Cell{-2, 3, 0});
    for (int v = -20; v <= 20; ++v) {
        CHECK(parent_cell({v, 0, 0})[0] == static_cast<int>(std::floor(v / 2.0)));
    }
}

TEST_CASE("coarse config doubles the planar size only") {
    const GridConfig fine = GridConfig::second();
    const GridConfig coarse = coarse_config(fine);
    CHECK(coarse.voxel_size == std::array<double, 3>{0.1, 0.1, 0.1});
    CHECK(coarse.max_points_per_voxel == fine.max_points_per_voxel);
    CHECK(coarse.connectivity == fine.connectivity);
}

TEST_CASE("fine voxel at (5, 3) has parent (2, 1)") {
    const MultiResGrid mg = partition_multires(cloud_from_counts({{{5, 3}, 2}}), unit_pillars(8, 8, 4), 0);
    REQUIRE(mg.fine.size() == 1);
    REQUIRE(mg.coarse.size() == 1);
    CHECK(mg.coarse.cell(mg.parent_of[0]) == Cell{2, 1, 0});
}

TEST_CASE("four single-point children fill the parent without resampling") {
    const MultiResGrid mg = partition_multires(
        cloud_from_counts({{{0, 0}, 1}, {{1, 0}, 1}, {{0, 1}, 1}, {{1, 1}, 1}}), unit_pillars(4, 4, 4), 3);
    REQUIRE(mg.coarse.size() == 1);
    CHECK(mg.coarse.count(0) == 4);
    CHECK(mg.children_of[0].size == 4);
    const auto idx = mg.coarse.point_indices(0);
    CHECK(std::vector<std::uint32_t>(idx.begin(), idx.end()) == std::vector<std::uint32_t>{0, 1, 2, 3});
}

TEST_CASE("resampling 10 candidates to 4 matches a replay") {
    std::vector<std::uint32_t> candidates{3, 8, 11, 12, 20, 21, 30, 31, 40, 47};
    for (std::uint64_t seed : {0ULL, 1ULL, 99ULL}) {
        for (VoxelId cid : {0u, 5u}) {
            const auto got = resample_points(candidates, 4, seed, cid);
            CHECK(got.size() == 4);
            CHECK(std::is_sorted(got.begin(), got.end()));
            CHECK(std::set<std::uint32_t>(got.begin(), got.end()).size() == 4);
            for (auto v : got) CHECK(std::find(candidates.begin(), candidates.end(), v) != candidates.end());
            CHECK(got == replay_resample(candidates, 4, seed, cid));
        }
    }
    CHECK(resample_points(candidates, 12, 0, 0) == candidates);
}

TEST_CASE("resampling is uniform over candidates") {
    std::vector<std::uint32_t> candidates(10);
    for (std::uint32_t i = 0; i < 10; ++i) candidates[i] = i;
    std::array<int, 10> hits{};
    constexpr int kTrials = 20000;
    for (int t = 0; t < kTrials; ++t) {
        for (auto v : resample_points(candidates, 4, t, 0)) hits[v]++;
    }
    // Each candidate is kept with probability 0.4.
    const double sigma = std::sqrt(kTrials * 0.4 * 0.6);
    for (int h : hits) CHECK(std::abs(h - kTrials * 0.4) < 4 * sigma);
}

TEST_CASE("partition resamples coarse voxels from their candidates") {
    const PointCloud cloud = cloud_from_counts({{{0, 0}, 4}, {{1, 0}, 3}, {{0, 1}, 2}, {{1, 1}, 1}, {{2, 2}, 1}});
    const MultiResGrid mg = partition_multires(cloud, unit_pillars(4, 4, 4), 17);
    REQUIRE(mg.coarse.size() == 2);
    CHECK(mg.coarse_candidates[0].size() == 10);
    CHECK(mg.coarse.count(0) == 4);
    const auto idx = mg.coarse.point_indices(0);
    CHECK(std::vector<std::uint32_t>(idx.begin(), idx.end()) ==
          replay_resample(mg.coarse_candidates[0], 4, 17, 0));
}

TEST_CASE("parent and children are a bijection on random clouds") {
    Lcg rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        const std::uint32_t n = 2 + rng.below(6);
        const PointCloud cloud = cloud_from_counts(random_cells(rng, 30, 30, 0.5, n));
        const MultiResGrid mg = partition_multires(cloud, unit_pillars(30, 30, n), trial);
        REQUIRE(mg.parent_of.size() == mg.fine.size());
        REQUIRE(mg.children_of.size() == mg.coarse.size());
        std::size_t total_children = 0;
        for (VoxelId c = 0; c < mg.coarse.size(); ++c) {
            std::size_t fine_points = 0;
            for (VoxelId f : mg.children_of[c].view()) {
                CHECK(mg.parent_of[f] == c);
                CHECK(parent_cell(mg.fine.cell(f)) == mg.coarse.cell(c));
                fine_points += mg.fine.count(f);
            }
            CHECK(fine_points == mg.coarse_candidates[c].size());
            CHECK(mg.coarse.count(c) == std::min<std::size_t>(n, fine_points));
            CHECK(mg.coarse.count(c) <= n);
            total_children += mg.children_of[c].size;
        }
        CHECK(total_children == mg.fine.size());
        CHECK(mg.coarse_graph.is_symmetric());
    }
}

TEST_CASE("inter-resolution plan") {
    const InterResPlan f = inter_res_plan(2, Resolution::kFine, 25);
    CHECK(f.p_walk == 0.5);
    CHECK(f.p_up == 0.125);
    CHECK(f.p_down == 0.0);
    const InterResPlan c = inter_res_plan(16, Resolution::kCoarse, 25);
    CHECK(c.p_walk == 0.25);
    CHECK(c.p_down == 0.125);
    CHECK(c.p_up == 0.0);
    CHECK(inter_res_plan(4, Resolution::kCoarse, 4).p_down == 0.5);
    CHECK_THROWS_AS(inter_res_plan(0, Resolution::kFine, 4), ContractViolation);

    for (std::uint32_t n : {4u, 25u}) {
        for (std::uint32_t k = 1; k <= n; ++k) {
            for (auto res : {Resolution::kFine, Resolution::kCoarse}) {
                const InterResPlan p = inter_res_plan(k, res, n);
                CHECK(p.p_up <= 0.25);
                CHECK(p.p_down <= 0.5);
                CHECK(p.p_up + p.p_down + p.p_walk * (1 - p.p_up - p.p_down) <= 1.0);
            }
        }
    }
}

TEST_CASE("after an up-jump from a lone child the walk can only stay or return") {
    const MultiResGrid mg =
        partition_multires(cloud_from_counts({{{0, 0}, 1}, {{1, 0}, 2}, {{4, 4}, 1}}), unit_pillars(8, 8, 4), 0);
    const MultiResWalker walker(mg);
    const VoxelId lone = *mg.fine.find({4, 4, 0});
    const TaggedVoxel parent{mg.parent_of[lone], Resolution::kCoarse};

    const StepOutcome up = walker.step({lone, Resolution::kFine}, 0.0, 0.9, 0.5);
    CHECK(up.kind == StepKind::kUp);
    CHECK(up.next == parent);

    Lcg rng(3);
    std::set<StepKind> kinds;
    for (int i = 0; i < 2000; ++i) {
        const StepOutcome s = walker.step(parent, rng.uniform(), rng.uniform(), rng.uniform());
        kinds.insert(s.kind);
        if (s.kind == StepKind::kDown) {
            CHECK(s.next == TaggedVoxel{lone, Resolution::kFine});
        } else {
            CHECK(s.kind == StepKind::kStay);
            CHECK(s.next == parent);
        }
    }
    CHECK(kinds.size() == 2);
}

TEST_CASE("down-jump picks children in proportion to their counts") {
    const MultiResGrid mg = partition_multires(cloud_from_counts({{{0, 0}, 1}, {{1, 0}, 3}}), unit_pillars(4, 4, 25), 0);
    const MultiResWalker walker(mg);
    const TaggedVoxel parent{0, Resolution::kCoarse};
    // p_down = 0.5 * 1/ceil(4/4) = 0.5. Choice u below 1/4 picks the first child.
    CHECK(walker.step(parent, 0.49, 0.9, 0.24).next == TaggedVoxel{0, Resolution::kFine});
    CHECK(walker.step(parent, 0.49, 0.9, 0.26).next == TaggedVoxel{1, Resolution::kFine});
    CHECK(walker.step(parent, 0.51, 0.9, 0.1).kind == StepKind::kStay);
}

TEST_CASE("all fine voxels at the cap leave every slot unchanged") {
    Lcg rng(12);
    CellCounts cells;
    for (const auto& c : random_cells(rng, 16, 16, 0.6, 4)) cells.push_back({c.first, 4});
    const MultiResGrid mg = partition_multires(cloud_from_counts(cells), unit_pillars(16, 16, 4), 5);
    const MultiResReconfiguration r = reconfigure_multires(mg, 5);
    for (VoxelId v = 0; v < mg.fine.size(); ++v) {
        for (int s = 0; s < kPlanarSlots; ++s) {
            const TaggedSlotWalk& w = r.slot(v, s);
            CHECK(w.start == mg.fine_graph.neighbor(v, s));
            if (w.present()) {
                CHECK(w.final == TaggedVoxel{w.start, Resolution::kFine});
            }
        }
    }
}

TEST_CASE("most walks stay at the fine resolution") {
    // Sparse count-1 lattice with one dense 4x4 block.
    CellCounts cells;
    for (int y = 0; y < 20; ++y)
        for (int x = 0; x < 20; ++x) cells.push_back({{x, y}, (x >= 8 && x < 12 && y >= 8 && y < 12) ? 25 : 1});
    const MultiResGrid mg = partition_multires(cloud_from_counts(cells), unit_pillars(20, 20, 25, CountMode::kQuarterAdjusted), 1);
    std::size_t coarse = 0, total = 0;
    for (std::uint64_t seed = 0; total < 10000; ++seed) {
        const MultiResReconfiguration r = reconfigure_multires(mg, seed);
        for (const TaggedSlotWalk& w : r.slots) {
            if (!w.present()) continue;
            ++total;
            coarse += w.final.resolution == Resolution::kCoarse;
        }
    }
    const double f = static_cast<double>(coarse) / total;
    CHECK(f > 0.0);
    CHECK(f < 0.5);
}

TEST_CASE("intra-resolution moves stay on their resolution's component") {
    Lcg rng(77);
    const MultiResGrid mg = partition_multires(cloud_from_counts(random_cells(rng, 40, 40, 0.4, 6)), unit_pillars(40, 40, 6), 2);
    const ComponentLabels fine = connected_components(mg.fine_graph);
    const ComponentLabels coarse = connected_components(mg.coarse_graph);
    const MultiResReconfiguration r = reconfigure_multires(mg, 2);
    for (VoxelId v = 0; v < mg.fine.size(); ++v) {
        for (int s = 0; s < kPlanarSlots; ++s) {
            const auto trace = r.trace_of(v, s);
            for (std::size_t i = 1; i < trace.size(); ++i) {
                const TaggedVoxel a = trace[i - 1], b = trace[i];
                if (a.resolution != b.resolution) {
                    const VoxelId parent = a.resolution == Resolution::kFine ? mg.parent_of[a.id] : mg.parent_of[b.id];
                    CHECK(parent == (a.resolution == Resolution::kFine ? b.id : a.id));
                } else if (a.resolution == Resolution::kFine) {
                    CHECK(fine.label[a.id] == fine.label[b.id]);
                } else {
                    CHECK(coarse.label[a.id] == coarse.label[b.id]);
                }
            }
        }
    }
}

TEST_CASE("multi-resolution reconfiguration is deterministic across threads") {
    const MultiResGrid mg = partition_multires(generate_synthetic(standard_sparse_benchmark(), 2), GridConfig::pillars(), 9);
    const MultiResGrid again = partition_multires(generate_synthetic(standard_sparse_benchmark(), 2), GridConfig::pillars(), 9);
    CHECK(mg.coarse_candidates == again.coarse_candidates);
    const MultiResReconfiguration a = reconfigure_multires(mg, 9, WalkOptions{1});
    const MultiResReconfiguration b = reconfigure_multires(mg, 9, WalkOptions{8});
    REQUIRE(a.trace.size() == b.trace.size());
    CHECK(a.trace == b.trace);
    for (std::size_t i = 0; i < a.slots.size(); ++i) CHECK(a.slots[i].final == b.slots[i].final);
}
