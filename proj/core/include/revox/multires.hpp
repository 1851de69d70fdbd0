#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "revox/voxel_grid.hpp"
#include "revox/walk.hpp"

namespace revox {

enum class Resolution : std::uint8_t { kFine = 0, kCoarse = 1 };

struct TaggedVoxel {
    VoxelId id = kNoVoxel;
    Resolution resolution = Resolution::kFine;

    friend bool operator==(const TaggedVoxel&, const TaggedVoxel&) = default;
};

struct ChildList {
    std::array<VoxelId, 4> ids{kNoVoxel, kNoVoxel, kNoVoxel, kNoVoxel};
    std::uint8_t size = 0;

    [[nodiscard]] std::span<const VoxelId> view() const { return {ids.data(), size}; }
};

/// Fine grid of [l, w] cells paired with a coarse grid of [2l, 2w] cells.
/// Each coarse voxel holds at most four children and a uniformly resampled
/// subset (at most n) of the union of its children's points.
struct MultiResGrid {
    VoxelGrid fine;
    NeighborGraph fine_graph;
    VoxelGrid coarse;
    NeighborGraph coarse_graph;
    std::vector<VoxelId> parent_of;                         // fine id -> coarse id
    std::vector<ChildList> children_of;                     // coarse id -> fine ids
    std::vector<std::vector<std::uint32_t>> coarse_candidates;  // before resampling
    std::uint64_t seed = 0;
};

/// Coarse config: x/y sizes doubled, same z, point cap and connectivity, and
/// no voxel cap (the fine cap bounds it).
GridConfig coarse_config(const GridConfig& fine);

inline Cell parent_cell(const Cell& fine) {
    auto half = [](std::int32_t v) { return v >= 0 ? v / 2 : -((-v + 1) / 2); };
    return {half(fine[0]), half(fine[1]), fine[2]};
}

/// Two-resolution partition in one traversal followed by seeded resampling
/// of coarse voxels down to max_points_per_voxel.
MultiResGrid partition_multires(const PointCloud& cloud, const GridConfig& config,
                                std::uint64_t seed);

/// Uniform subset of `candidates` of size min(n, |candidates|), sorted
/// ascending. Partial Fisher-Yates driven by keyed draws (seed, coarse id, i).
std::vector<std::uint32_t> resample_points(std::span<const std::uint32_t> candidates,
                                           std::uint32_t n, std::uint64_t seed,
                                           VoxelId coarse_id);

struct InterResPlan {
    double p_walk = 0.0;
    double p_up = 0.0;    // fine -> parent
    double p_down = 0.0;  // coarse -> child
};

/// Fine voxel: p_walk = 1/count, p_up = p_walk/4. Coarse voxel:
/// p_walk = 1/ceil(count/4), p_down = p_walk/2.
InterResPlan inter_res_plan(std::uint32_t count, Resolution resolution, std::uint32_t n_max);

enum class StepKind : std::uint8_t { kStay, kIntra, kUp, kDown };

struct StepOutcome {
    TaggedVoxel next;
    StepKind kind = StepKind::kStay;
};

/// Single-step kernel shared by reconfigure_multires and the tests. A step
/// consumes three uniforms: the resolution jump draw, the intra-resolution
/// gate, and the target choice.
class MultiResWalker {
public:
    explicit MultiResWalker(const MultiResGrid& mgrid);

    [[nodiscard]] StepOutcome step(TaggedVoxel current, double u_jump, double u_gate,
                                   double u_choice) const;
    [[nodiscard]] InterResPlan plan(TaggedVoxel v) const;

private:
    const MultiResGrid* mgrid_;
    TransitionTable fine_table_;
    TransitionTable coarse_table_;
};

struct TaggedSlotWalk {
    VoxelId start = kNoVoxel;  // fine id
    TaggedVoxel final;
    std::uint32_t trace_offset = 0;
    std::uint32_t trace_length = 0;

    [[nodiscard]] bool present() const { return start != kNoVoxel; }
};

struct MultiResReconfiguration {
    std::uint64_t seed = 0;
    std::vector<TaggedSlotWalk> slots;  // fine voxel_count * kPlanarSlots
    std::vector<TaggedVoxel> trace;

    [[nodiscard]] std::size_t voxel_count() const { return slots.size() / kPlanarSlots; }
    [[nodiscard]] const TaggedSlotWalk& slot(VoxelId center, int s) const {
        return slots[static_cast<std::size_t>(center) * kPlanarSlots + s];
    }
    [[nodiscard]] std::span<const TaggedVoxel> trace_of(VoxelId center, int s) const;
};

/// Intra- and inter-resolution walk of every fine voxel's planar slots. The
/// step budget is fixed from the starting fine neighbor with the config's
/// count mode.
MultiResReconfiguration reconfigure_multires(const MultiResGrid& mgrid, std::uint64_t seed,
                                             WalkOptions options = {});

}  // namespace revox
