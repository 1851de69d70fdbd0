#include "revox/walk.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "parallel.hpp"
#include "revox/error.hpp"
#include "revox/rng.hpp"

namespace revox {

std::uint32_t effective_count(std::uint32_t count, CountMode mode) {
    if (mode == CountMode::kQuarterAdjusted) {
        return (count + 3) / 4;
    }
    return count;
}

WalkPlan walk_plan(std::uint32_t count, std::uint32_t n_max, CountMode mode) {
    if (count < 1 || count > n_max) {
        throw ContractViolation("walk_plan: count " + std::to_string(count) +
                                " outside [1, " + std::to_string(n_max) + "]");
    }
    const std::uint32_t c = effective_count(count, mode);
    const std::uint32_t m = effective_count(n_max, mode);
    return WalkPlan{1.0 / c, m - c};
}

TransitionDistribution transition_distribution(VoxelId v, const NeighborGraph& graph,
                                               const VoxelGrid& grid) {
    if (v >= grid.size() || v >= graph.size()) {
        throw ContractViolation("transition_distribution: unknown voxel " + std::to_string(v));
    }
    TransitionDistribution out;
    std::uint64_t total = 0;
    for (int s = 0; s < graph.slot_count(); ++s) {
        const VoxelId u = graph.neighbor(v, s);
        if (u != kNoVoxel && grid.count(u) > 0) {
            total += grid.count(u);
            out.candidates.emplace_back(u, static_cast<double>(grid.count(u)));
        }
    }
    for (auto& [id, p] : out.candidates) {
        p /= static_cast<double>(total);
    }
    return out;
}

TransitionTable::TransitionTable(const NeighborGraph& graph,
                                 std::span<const std::uint32_t> counts)
    : slots_(graph.slot_count()), stride_(graph.slot_count() == 4 ? 8 : 16) {
    const std::size_t n = graph.size();
    const int k = slots_;
    words_.assign(n * stride_, std::numeric_limits<std::uint32_t>::max());
    sizes_.assign(n, 0);
    for (VoxelId v = 0; v < n; ++v) {
        std::uint32_t* row = words_.data() + static_cast<std::size_t>(v) * stride_;
        std::uint32_t* targets = row + k;
        std::uint32_t running = 0;
        int size = 0;
        for (int s = 0; s < k; ++s) {
            const VoxelId u = graph.neighbor(v, s);
            if (u == kNoVoxel || counts[u] == 0) {
                continue;
            }
            running += counts[u];
            targets[size] = u;
            if (size + 1 < k) {
                row[size] = running;
            }
            ++size;
        }
        if (size > 0 && size < k) {
            row[size - 1] = std::numeric_limits<std::uint32_t>::max();
        }
        for (int s = size; s < k; ++s) {
            targets[s] = v;
        }
        row[k - 1] = running;
        sizes_[v] = static_cast<std::uint8_t>(size);
    }
}

VoxelId TransitionTable::sample(VoxelId v, double u) const {
    const std::uint32_t* row = words_.data() + static_cast<std::size_t>(v) * stride_;
    const double target = u * static_cast<double>(row[slots_ - 1]);
    int i = 0;
    for (int k = 0; k + 1 < slots_; ++k) {
        i += static_cast<int>(target >= static_cast<double>(row[k]));
    }
    return row[slots_ + i];
}

std::span<const VoxelId> Reconfiguration::trace(VoxelId center, int s) const {
    const SlotWalk& w = slot(center, s);
    return {trace_ids.data() + w.trace_offset, w.trace_length};
}

Reconfiguration reconfigure(const VoxelGrid& grid, const NeighborGraph& graph,
                            std::uint64_t seed, WalkOptions options) {
    if (graph.size() != grid.size()) {
        throw ContractViolation("reconfigure: graph and grid sizes differ");
    }
    const GridConfig& config = grid.config();
    const std::size_t m = grid.size();

    const TransitionTable table(graph, grid.counts());
    // Same numbers as walk_plan, without its per-call checks; partition
    // guarantees 1 <= count <= n.
    const std::uint32_t cap = effective_count(config.max_points_per_voxel, config.count_mode);
    std::vector<std::uint32_t> eff(m);
    for (VoxelId v = 0; v < m; ++v) {
        eff[v] = effective_count(grid.count(v), config.count_mode);
        if (grid.count(v) == 0) {
            throw ContractViolation("reconfigure: voxel " + std::to_string(v) + " is empty");
        }
    }

    Reconfiguration out;
    out.seed = seed;
    out.slots.resize(m * kPlanarSlots);

    // Trace offsets are fixed up front, so workers write disjoint ranges.
    std::size_t total = 0;
    for (VoxelId v = 0; v < m; ++v) {
        for (int s = 0; s < kPlanarSlots; ++s) {
            const VoxelId start = graph.neighbor(v, s);
            if (start == kNoVoxel) {
                continue;
            }
            SlotWalk& w = out.slots[v * kPlanarSlots + s];
            w.start = start;
            w.trace_offset = static_cast<std::uint32_t>(total);
            w.trace_length = cap - eff[start] + 1;
            total += w.trace_length;
        }
    }
    out.trace_ids.resize(total);

    const std::uint64_t root = extend_key(key_root(seed), static_cast<std::uint64_t>(RngDomain::kWalk));
    detail::parallel_chunks(m, options.threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin * kPlanarSlots; i < end * kPlanarSlots; ++i) {
            SlotWalk& w = out.slots[i];
            if (!w.present()) {
                continue;
            }
            const std::uint64_t key = extend_key(extend_key(root, i / kPlanarSlots),
                                                 static_cast<std::uint64_t>(i % kPlanarSlots));
            VoxelId* trace = out.trace_ids.data() + w.trace_offset;
            VoxelId current = w.start;
            trace[0] = current;
            for (std::uint32_t t = 0; t + 1 < w.trace_length; ++t) {
                const std::uint64_t bits = stream_bits(key, t);
                const VoxelId moved = table.sample_bits(current, choice_bits(bits));
                // Masked select; a branch here mispredicts on every other step.
                const VoxelId take = 0u - static_cast<VoxelId>(gate_passes(bits, eff[current]));
                current ^= (current ^ moved) & take;
                trace[t + 1] = current;
            }
            w.final = current;
        }
    });
    return out;
}

}  // namespace revox
