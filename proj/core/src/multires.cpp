#include "revox/multires.hpp"

#include <algorithm>
#include <string>

#include "parallel.hpp"
#include "revox/error.hpp"
#include "revox/rng.hpp"

namespace revox {
namespace {

void link_new_voxel(const VoxelGrid& grid, NeighborGraph& graph, VoxelId id) {
    const Cell& c = grid.cell(id);
    for (int s = 0; s < graph.slot_count(); ++s) {
        const Cell& o = kSlotOffsets[s];
        if (auto other = grid.find({c[0] + o[0], c[1] + o[1], c[2] + o[2]})) {
            graph.link(id, s, *other);
        }
    }
}

}  // namespace

GridConfig coarse_config(const GridConfig& fine) {
    GridConfig c = fine;
    c.voxel_size[0] *= 2.0;
    c.voxel_size[1] *= 2.0;
    return c;
}

std::vector<std::uint32_t> resample_points(std::span<const std::uint32_t> candidates,
                                           std::uint32_t n, std::uint64_t seed,
                                           VoxelId coarse_id) {
    std::vector<std::uint32_t> pool(candidates.begin(), candidates.end());
    if (pool.size() > n) {
        const std::uint64_t key =
            extend_key(extend_key(key_root(seed), static_cast<std::uint64_t>(RngDomain::kResample)),
                       coarse_id);
        const std::size_t size = pool.size();
        for (std::size_t i = 0; i < n; ++i) {
            const double u = bits_to_unit(extend_key(key, i));
            std::size_t j = i + static_cast<std::size_t>(u * static_cast<double>(size - i));
            j = std::min(j, size - 1);
            std::swap(pool[i], pool[j]);
        }
        pool.resize(n);
    }
    std::sort(pool.begin(), pool.end());
    return pool;
}

MultiResGrid partition_multires(const PointCloud& cloud, const GridConfig& config,
                                std::uint64_t seed) {
    MultiResGrid mg{VoxelGrid(config), NeighborGraph(config.connectivity),
                    VoxelGrid(coarse_config(config)), NeighborGraph(config.connectivity),
                    {}, {}, {}, seed};
    const std::size_t expected = expected_voxels(config, cloud.size());
    mg.fine.reserve(expected, cloud.size());
    mg.fine_graph.reserve(expected);
    mg.parent_of.reserve(expected);

    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto cell = mg.fine.locate(cloud.points[i]);
        if (!cell) {
            continue;
        }
        VoxelId fid;
        if (auto found = mg.fine.find(*cell)) {
            fid = *found;
        } else {
            if (mg.fine.size() >= config.max_voxels) {
                break;
            }
            fid = mg.fine.add_voxel(*cell);
            const Cell pc = parent_cell(*cell);
            VoxelId cid;
            if (auto parent = mg.coarse.find(pc)) {
                cid = *parent;
            } else {
                cid = mg.coarse.add_voxel(pc);
                mg.coarse_graph.add_vertex();
                link_new_voxel(mg.coarse, mg.coarse_graph, cid);
                mg.children_of.emplace_back();
                mg.coarse_candidates.emplace_back();
            }
            mg.parent_of.push_back(cid);
            ChildList& children = mg.children_of[cid];
            children.ids[children.size++] = fid;
            mg.fine_graph.add_vertex();
            link_new_voxel(mg.fine, mg.fine_graph, fid);
        }
        if (mg.fine.add_point(fid, static_cast<std::uint32_t>(i))) {
            mg.coarse_candidates[mg.parent_of[fid]].push_back(static_cast<std::uint32_t>(i));
        }
    }

    const std::uint32_t n = config.max_points_per_voxel;
    for (VoxelId cid = 0; cid < mg.coarse.size(); ++cid) {
        for (std::uint32_t idx : resample_points(mg.coarse_candidates[cid], n, seed, cid)) {
            mg.coarse.add_point(cid, idx);
        }
    }
    mg.fine.finalize();
    mg.coarse.finalize();
    return mg;
}

InterResPlan inter_res_plan(std::uint32_t count, Resolution resolution, std::uint32_t n_max) {
    if (count < 1 || count > n_max) {
        throw ContractViolation("inter_res_plan: count " + std::to_string(count) +
                                " outside [1, " + std::to_string(n_max) + "]");
    }
    InterResPlan plan;
    if (resolution == Resolution::kFine) {
        plan.p_walk = 1.0 / count;
        plan.p_up = 0.25 * plan.p_walk;
    } else {
        plan.p_walk = 1.0 / effective_count(count, CountMode::kQuarterAdjusted);
        plan.p_down = 0.5 * plan.p_walk;
    }
    return plan;
}

MultiResWalker::MultiResWalker(const MultiResGrid& mgrid)
    : mgrid_(&mgrid),
      fine_table_(mgrid.fine_graph, mgrid.fine.counts()),
      coarse_table_(mgrid.coarse_graph, mgrid.coarse.counts()) {}

InterResPlan MultiResWalker::plan(TaggedVoxel v) const {
    const VoxelGrid& grid = v.resolution == Resolution::kFine ? mgrid_->fine : mgrid_->coarse;
    return inter_res_plan(grid.count(v.id), v.resolution, grid.config().max_points_per_voxel);
}

StepOutcome MultiResWalker::step(TaggedVoxel current, double u_jump, double u_gate,
                                 double u_choice) const {
    const InterResPlan p = plan(current);
    if (current.resolution == Resolution::kFine) {
        if (u_jump < p.p_up) {
            return {{mgrid_->parent_of[current.id], Resolution::kCoarse}, StepKind::kUp};
        }
        if (u_gate < p.p_walk && fine_table_.has_moves(current.id)) {
            return {{fine_table_.sample(current.id, u_choice), Resolution::kFine}, StepKind::kIntra};
        }
        return {current, StepKind::kStay};
    }

    if (u_jump < p.p_down) {
        const ChildList& children = mgrid_->children_of[current.id];
        std::uint64_t total = 0;
        for (VoxelId c : children.view()) {
            total += mgrid_->fine.count(c);
        }
        if (total == 0) {
            return {current, StepKind::kStay};
        }
        const double target = u_choice * static_cast<double>(total);
        std::uint64_t running = 0;
        VoxelId chosen = kNoVoxel;
        for (VoxelId c : children.view()) {
            const std::uint32_t cnt = mgrid_->fine.count(c);
            if (cnt == 0) {
                continue;
            }
            running += cnt;
            chosen = c;
            if (target < static_cast<double>(running)) {
                break;
            }
        }
        return {{chosen, Resolution::kFine}, StepKind::kDown};
    }
    if (u_gate < p.p_walk && coarse_table_.has_moves(current.id)) {
        return {{coarse_table_.sample(current.id, u_choice), Resolution::kCoarse}, StepKind::kIntra};
    }
    return {current, StepKind::kStay};
}

std::span<const TaggedVoxel> MultiResReconfiguration::trace_of(VoxelId center, int s) const {
    const TaggedSlotWalk& w = slot(center, s);
    return {trace.data() + w.trace_offset, w.trace_length};
}

MultiResReconfiguration reconfigure_multires(const MultiResGrid& mgrid, std::uint64_t seed,
                                             WalkOptions options) {
    const GridConfig& config = mgrid.fine.config();
    const std::size_t m = mgrid.fine.size();
    if (mgrid.fine_graph.size() != m || mgrid.parent_of.size() != m) {
        throw ContractViolation("reconfigure_multires: inconsistent multi-resolution grid");
    }
    const MultiResWalker walker(mgrid);
    std::vector<std::uint32_t> steps(m);
    for (VoxelId v = 0; v < m; ++v) {
        steps[v] = walk_plan(mgrid.fine.count(v), config.max_points_per_voxel, config.count_mode).steps;
    }

    MultiResReconfiguration out;
    out.seed = seed;
    out.slots.resize(m * kPlanarSlots);
    const std::uint64_t root =
        extend_key(key_root(seed), static_cast<std::uint64_t>(RngDomain::kMultiresWalk));
    std::vector<std::vector<TaggedVoxel>> chunk_traces(std::max(1u, options.threads));

    const std::size_t chunks = detail::parallel_chunks(
        m, options.threads, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
            std::vector<TaggedVoxel>& trace = chunk_traces[chunk];
            for (std::size_t v = begin; v < end; ++v) {
                const std::uint64_t center_key = extend_key(root, v);
                for (int s = 0; s < kPlanarSlots; ++s) {
                    const VoxelId start = mgrid.fine_graph.neighbor(static_cast<VoxelId>(v), s);
                    if (start == kNoVoxel) {
                        continue;
                    }
                    const std::uint64_t slot_key = extend_key(center_key, static_cast<std::uint64_t>(s));
                    TaggedSlotWalk& w = out.slots[v * kPlanarSlots + s];
                    w.start = start;
                    w.trace_offset = static_cast<std::uint32_t>(trace.size());
                    w.trace_length = steps[start] + 1;
                    TaggedVoxel current{start, Resolution::kFine};
                    trace.push_back(current);
                    for (std::uint32_t t = 0; t < steps[start]; ++t) {
                        const std::uint64_t tag_key = extend_key(
                            extend_key(slot_key, t), static_cast<std::uint64_t>(current.resolution));
                        current = walker
                                      .step(current, bits_to_unit(extend_key(tag_key, 0)),
                                            bits_to_unit(extend_key(tag_key, 1)),
                                            bits_to_unit(extend_key(tag_key, 2)))
                                      .next;
                        trace.push_back(current);
                    }
                    w.final = current;
                }
            }
        });

    const std::size_t per = (m + chunks - 1) / chunks;
    for (std::size_t c = 0; c < chunks; ++c) {
        const auto base = static_cast<std::uint32_t>(out.trace.size());
        const std::size_t begin = std::min(m, c * per);
        const std::size_t end = std::min(m, begin + per);
        for (std::size_t i = begin * kPlanarSlots; i < end * kPlanarSlots; ++i) {
            if (out.slots[i].present()) {
                out.slots[i].trace_offset += base;
            }
        }
        out.trace.insert(out.trace.end(), chunk_traces[c].begin(), chunk_traces[c].end());
    }
    return out;
}

}  // namespace revox
