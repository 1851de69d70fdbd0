#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "revox/voxel_grid.hpp"

namespace revox {

/// ceil(count / 4) in quarter-adjusted mode, count otherwise.
std::uint32_t effective_count(std::uint32_t count, CountMode mode);

struct WalkPlan {
    double p_walk = 1.0;      // probability of moving on a given step
    std::uint32_t steps = 0;  // step budget, fixed when the walk starts
};

/// p_walk = 1 / c and steps = m - c, where c and m are the effective count
/// and effective cap. Throws ContractViolation unless 1 <= count <= n_max.
WalkPlan walk_plan(std::uint32_t count, std::uint32_t n_max, CountMode mode);

struct TransitionDistribution {
    std::vector<std::pair<VoxelId, double>> candidates;

    [[nodiscard]] bool empty() const { return candidates.empty(); }
};

/// Count-proportional distribution over the non-empty neighbors of `v`,
/// listed in slot order. Empty for an isolated voxel.
TransitionDistribution transition_distribution(VoxelId v, const NeighborGraph& graph,
                                               const VoxelGrid& grid);

/// Precomputed cumulative neighbor counts for every voxel, so that one step
/// costs a uniform draw and a few branch-free integer comparisons.
class TransitionTable {
public:
    TransitionTable() = default;
    TransitionTable(const NeighborGraph& graph, std::span<const std::uint32_t> counts);

    [[nodiscard]] bool has_moves(VoxelId v) const { return sizes_[v] != 0; }

    /// Cumulative-sum inversion of u in [0, 1) over the candidates of `v`.
    [[nodiscard]] VoxelId sample(VoxelId v, double u) const;

    /// Integer form: picks candidate i when floor(r * total / 2^32) falls in
    /// its cumulative interval. A voxel without candidates returns itself.
    [[nodiscard]] VoxelId sample_bits(VoxelId v, std::uint32_t r) const {
        const std::uint32_t* row = words_.data() + static_cast<std::size_t>(v) * stride_;
        return slots_ == 4 ? pick<4>(row, r) : pick<kMaxSlots>(row, r);
    }

private:
    // Row layout: K-1 cumulative bounds, total, K targets. Bounds past the
    // second-to-last candidate hold UINT32_MAX, so counting the bounds at or
    // below the target gives the candidate index without branches; unused
    // targets point back at the row's own voxel.
    template <int K>
    static VoxelId pick(const std::uint32_t* row, std::uint32_t r) {
        const std::uint64_t target = (static_cast<std::uint64_t>(r) * row[K - 1]) >> 32;
        unsigned i = 0;
        for (int k = 0; k + 1 < K; ++k) {
            i += static_cast<unsigned>(target >= row[k]);
        }
        return row[K + i];
    }

    int slots_ = 4;
    std::size_t stride_ = 8;
    std::vector<std::uint32_t> words_;
    std::vector<std::uint8_t> sizes_;
};

/// One neighbor slot after reconfiguration. `start == kNoVoxel` marks a slot
/// whose neighbor cell was empty; such slots never spawn a walk.
struct SlotWalk {
    VoxelId start = kNoVoxel;
    VoxelId final = kNoVoxel;
    std::uint32_t trace_offset = 0;
    std::uint32_t trace_length = 0;

    [[nodiscard]] bool present() const { return start != kNoVoxel; }
};

struct Reconfiguration {
    std::uint64_t seed = 0;
    std::vector<SlotWalk> slots;        // voxel_count * kPlanarSlots, center-major
    std::vector<VoxelId> trace_ids;     // visited voxels, w(0) .. w(S) per slot

    [[nodiscard]] std::size_t voxel_count() const { return slots.size() / kPlanarSlots; }
    [[nodiscard]] const SlotWalk& slot(VoxelId center, int s) const {
        return slots[static_cast<std::size_t>(center) * kPlanarSlots + s];
    }
    [[nodiscard]] std::span<const VoxelId> trace(VoxelId center, int s) const;
};

/// Each step uses one keyed 64-bit draw. The high half is the gate variate
/// u = hi / 2^32, compared against P_w = 1 / eff exactly in integers; the low
/// half drives the neighbor choice.
inline bool gate_passes(std::uint64_t bits, std::uint32_t eff) {
    return (bits >> 32) * eff < (std::uint64_t{1} << 32);
}

inline std::uint32_t choice_bits(std::uint64_t bits) {
    return static_cast<std::uint32_t>(bits);
}

struct WalkOptions {
    unsigned threads = 1;
};

/// Walks every occupied planar slot of every voxel. The step budget comes
/// from the starting neighbor; at each step the current voxel's walk
/// probability gates a move, and a move samples the current voxel's
/// transition distribution. Stays consume a step. The step variate is keyed by
/// (seed, center, slot, step), so the result does not depend on threads.
Reconfiguration reconfigure(const VoxelGrid& grid, const NeighborGraph& graph,
                            std::uint64_t seed, WalkOptions options = {});

}  // namespace revox
