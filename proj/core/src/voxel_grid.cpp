#include "revox/voxel_grid.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "revox/error.hpp"
#include "revox/rng.hpp"

namespace revox {

GridConfig GridConfig::pillars() { return GridConfig{}; }

GridConfig GridConfig::second() {
    GridConfig c;
    c.mode = GridMode::kVoxel;
    c.voxel_size = {0.05, 0.05, 0.1};
    c.max_points_per_voxel = 4;
    c.max_voxels = 30000;
    c.count_mode = CountMode::kStandard;
    return c;
}

void GridConfig::validate() const {
    const int axes = mode == GridMode::kPillar ? 2 : 3;
    for (int a = 0; a < axes; ++a) {
        if (!(voxel_size[a] > 0.0) || !std::isfinite(voxel_size[a])) {
            throw ConfigError("voxel size must be positive on axis " + std::to_string(a));
        }
    }
    for (int a = 0; a < 3; ++a) {
        if (!(range_min[a] < range_max[a]) || !std::isfinite(range_min[a]) ||
            !std::isfinite(range_max[a])) {
            throw ConfigError("range min must be below range max on axis " + std::to_string(a));
        }
    }
    if (max_points_per_voxel < 1 || max_points_per_voxel > 65535) {
        throw ConfigError("max points per voxel must lie in [1, 65535]");
    }
    if (max_voxels < 1) {
        throw ConfigError("max voxels must be at least 1");
    }
    if (connectivity == Connectivity::kSixXYZ && mode == GridMode::kPillar) {
        throw ConfigError("6-neighbor connectivity requires voxel mode");
    }
    const auto d = dims();
    const double cells = static_cast<double>(d[0]) * d[1] * d[2];
    if (cells > 9.0e18) {
        throw ConfigError("grid has too many cells to index");
    }
}

std::array<std::int32_t, 3> GridConfig::dims() const {
    std::array<std::int32_t, 3> d{1, 1, 1};
    const int axes = mode == GridMode::kPillar ? 2 : 3;
    for (int a = 0; a < axes; ++a) {
        const double n = std::ceil((range_max[a] - range_min[a]) / voxel_size[a]);
        if (!(n >= 1.0) || n > 2.0e9) {
            throw ConfigError("range / voxel size gives an unusable cell count on axis " +
                              std::to_string(a));
        }
        d[a] = static_cast<std::int32_t>(n);
    }
    return d;
}

namespace detail {

VoxelId CellTable::find(std::uint64_t key) const {
    std::size_t i = splitmix64(key) & mask_;
    if (narrow_) {
        while (true) {
            const std::uint64_t e = packed_[i];
            if (e == kEmpty) {
                return kNoVoxel;
            }
            if ((e >> 32) == key) {
                return static_cast<VoxelId>(e);
            }
            i = (i + 1) & mask_;
        }
    }
    while (true) {
        const Slot& slot = wide_[i];
        if (slot.key == key) {
            return slot.value;
        }
        if (slot.key == kEmpty) {
            return kNoVoxel;
        }
        i = (i + 1) & mask_;
    }
}

void CellTable::prefetch(std::uint64_t key) const {
    const std::size_t i = splitmix64(key) & mask_;
    if (narrow_) {
        __builtin_prefetch(&packed_[i]);
    } else {
        __builtin_prefetch(&wide_[i]);
    }
}

void CellTable::insert(std::uint64_t key, VoxelId id) {
    if ((size_ + 1) * 2 > capacity()) {
        rehash(capacity() * 2);
    }
    std::size_t i = splitmix64(key) & mask_;
    if (narrow_) {
        while (packed_[i] != kEmpty && (packed_[i] >> 32) != key) {
            i = (i + 1) & mask_;
        }
        size_ += packed_[i] == kEmpty;
        packed_[i] = (key << 32) | id;
        return;
    }
    while (wide_[i].key != kEmpty && wide_[i].key != key) {
        i = (i + 1) & mask_;
    }
    size_ += wide_[i].key == kEmpty;
    wide_[i] = {key, id};
}

void CellTable::reserve(std::size_t n) {
    std::size_t cap = capacity();
    while (cap < n * 2) {
        cap *= 2;
    }
    if (cap != capacity()) {
        rehash(cap);
    }
}

void CellTable::rehash(std::size_t capacity) {
    std::vector<std::uint64_t> old_packed;
    std::vector<Slot> old_wide;
    if (narrow_) {
        old_packed.assign(capacity, kEmpty);
        old_packed.swap(packed_);
    } else {
        old_wide.assign(capacity, Slot{kEmpty, kNoVoxel});
        old_wide.swap(wide_);
    }
    mask_ = capacity - 1;
    size_ = 0;
    for (const std::uint64_t e : old_packed) {
        if (e != kEmpty) {
            insert(e >> 32, static_cast<VoxelId>(e));
        }
    }
    for (const Slot& slot : old_wide) {
        if (slot.key != kEmpty) {
            insert(slot.key, slot.value);
        }
    }
}

}  // namespace detail

VoxelGrid::VoxelGrid(GridConfig config) : config_(config) {
    config_.validate();
    dims_ = config_.dims();
    const double cells = static_cast<double>(dims_[0]) * dims_[1] * dims_[2];
    table_ = detail::CellTable(cells < 4294967295.0);
}

std::span<const std::uint32_t> VoxelGrid::point_indices(VoxelId id) const {
    if (!log_.empty()) {
        throw ContractViolation("point_indices read before finalize()");
    }
    if (id >= offsets_.size()) {
        return {};
    }
    return {indices_.data() + offsets_[id], counts_[id]};
}

std::uint64_t VoxelGrid::linear_key(const Cell& c) const {
    return static_cast<std::uint64_t>(c[0]) +
           static_cast<std::uint64_t>(dims_[0]) *
               (static_cast<std::uint64_t>(c[1]) +
                static_cast<std::uint64_t>(dims_[1]) * static_cast<std::uint64_t>(c[2]));
}

bool VoxelGrid::contains_cell(const Cell& c) const {
    return c[0] >= 0 && c[1] >= 0 && c[2] >= 0 && c[0] < dims_[0] && c[1] < dims_[1] &&
           c[2] < dims_[2];
}

std::optional<VoxelId> VoxelGrid::find(const Cell& c) const {
    if (!contains_cell(c)) {
        return std::nullopt;
    }
    const VoxelId id = table_.find(linear_key(c));
    if (id == kNoVoxel) {
        return std::nullopt;
    }
    return id;
}

std::optional<Cell> VoxelGrid::locate(const Point& p) const {
    const std::array<double, 3> coord{p.x, p.y, p.z};
    Cell c{0, 0, 0};
    for (int a = 0; a < 3; ++a) {
        if (!(coord[a] >= config_.range_min[a] && coord[a] < config_.range_max[a])) {
            return std::nullopt;
        }
    }
    const int axes = config_.mode == GridMode::kPillar ? 2 : 3;
    for (int a = 0; a < axes; ++a) {
        const double idx = std::floor((coord[a] - config_.range_min[a]) / config_.voxel_size[a]);
        if (idx >= dims_[a]) {
            return std::nullopt;
        }
        c[a] = static_cast<std::int32_t>(idx);
    }
    return c;
}

std::array<double, 3> VoxelGrid::cell_min(const Cell& c) const {
    std::array<double, 3> m = config_.range_min;
    const int axes = config_.mode == GridMode::kPillar ? 2 : 3;
    for (int a = 0; a < axes; ++a) {
        m[a] += c[a] * config_.voxel_size[a];
    }
    return m;
}

std::array<double, 3> VoxelGrid::cell_center(const Cell& c) const {
    std::array<double, 3> m = cell_min(c);
    const int axes = config_.mode == GridMode::kPillar ? 2 : 3;
    for (int a = 0; a < axes; ++a) {
        m[a] += 0.5 * config_.voxel_size[a];
    }
    if (config_.mode == GridMode::kPillar) {
        m[2] = 0.5 * (config_.range_min[2] + config_.range_max[2]);
    }
    return m;
}

VoxelId VoxelGrid::add_voxel(const Cell& c) {
    if (!contains_cell(c)) {
        throw ContractViolation("cell outside grid dimensions");
    }
    const auto id = static_cast<VoxelId>(cells_.size());
    table_.insert(linear_key(c), id);
    cells_.push_back(c);
    counts_.push_back(0);
    return id;
}

bool VoxelGrid::add_point(VoxelId id, std::uint32_t point_index) {
    std::uint32_t& n = counts_[id];
    if (n >= config_.max_points_per_voxel) {
        return false;
    }
    log_.emplace_back(id, point_index);
    ++n;
    return true;
}

void VoxelGrid::finalize() {
    if (log_.empty() && offsets_.size() == cells_.size()) {
        return;
    }
    // Earlier compacted points keep their order; logged ones follow them.
    std::vector<std::uint64_t> offsets(cells_.size() + 1, 0);
    for (std::size_t v = 0; v < cells_.size(); ++v) {
        offsets[v + 1] = offsets[v] + counts_[v];
    }
    std::vector<std::uint32_t> indices(offsets.back());
    std::vector<std::uint64_t> cursor(offsets.begin(), offsets.end() - 1);
    for (std::size_t v = 0; v < offsets_.size(); ++v) {
        const std::uint64_t begin = offsets_[v];
        const std::uint64_t end = v + 1 < offsets_.size() ? offsets_[v + 1] : indices_.size();
        for (std::uint64_t k = begin; k < end; ++k) {
            indices[cursor[v]++] = indices_[k];
        }
    }
    for (const auto& [v, idx] : log_) {
        indices[cursor[v]++] = idx;
    }
    offsets.pop_back();
    offsets_ = std::move(offsets);
    indices_ = std::move(indices);
    log_.clear();
    log_.shrink_to_fit();
}

void VoxelGrid::reserve(std::size_t voxels, std::size_t points) {
    cells_.reserve(voxels);
    counts_.reserve(voxels);
    log_.reserve(points);
}

VoxelId NeighborGraph::add_vertex() {
    std::array<VoxelId, kMaxSlots> empty;
    empty.fill(kNoVoxel);
    slots_.push_back(empty);
    return static_cast<VoxelId>(slots_.size() - 1);
}

void NeighborGraph::link(VoxelId a, int slot, VoxelId b) {
    slots_[a][slot] = b;
    slots_[b][opposite_slot(slot)] = a;
}

bool NeighborGraph::is_symmetric() const {
    const int k = slot_count();
    for (std::size_t v = 0; v < slots_.size(); ++v) {
        for (int s = 0; s < kMaxSlots; ++s) {
            const VoxelId u = slots_[v][s];
            if (u == kNoVoxel) {
                continue;
            }
            if (s >= k || u >= slots_.size() || slots_[u][opposite_slot(s)] != v) {
                return false;
            }
        }
    }
    return true;
}

namespace {

void link_existing(const VoxelGrid& grid, NeighborGraph& graph, VoxelId id) {
    const Cell& c = grid.cell(id);
    const int k = graph.slot_count();
    for (int s = 0; s < k; ++s) {
        const Cell& o = kSlotOffsets[s];
        if (auto other = grid.find({c[0] + o[0], c[1] + o[1], c[2] + o[2]})) {
            graph.link(id, s, *other);
        }
    }
}

}  // namespace

std::size_t expected_voxels(const GridConfig& config, std::size_t points) {
    const auto d = config.dims();
    const double cells = static_cast<double>(d[0]) * d[1] * d[2];
    std::size_t n = std::min<std::size_t>(config.max_voxels, points);
    if (cells < static_cast<double>(n)) {
        n = static_cast<std::size_t>(cells);
    }
    return n;
}

Partition partition(const PointCloud& cloud, const GridConfig& config, PartitionOptions options) {
    Partition out{VoxelGrid(config), NeighborGraph(config.connectivity)};
    VoxelGrid& grid = out.grid;
    NeighborGraph& graph = out.graph;
    const std::size_t expected = expected_voxels(config, cloud.size());
    grid.reserve(expected, cloud.size());
    if (options.record_adjacency) {
        graph.reserve(expected);
    }

    // Cells are located a block ahead so table probes can be prefetched.
    constexpr std::size_t kBlock = 32;
    std::array<std::optional<Cell>, kBlock> cells;
    for (std::size_t base = 0; base < cloud.size(); base += kBlock) {
        const std::size_t len = std::min(kBlock, cloud.size() - base);
        for (std::size_t k = 0; k < len; ++k) {
            cells[k] = grid.locate(cloud.points[base + k]);
            if (cells[k]) {
                grid.prefetch(*cells[k]);
            }
        }
        for (std::size_t k = 0; k < len; ++k) {
            const auto& cell = cells[k];
            if (!cell) {
                continue;
            }
            VoxelId id;
            if (auto found = grid.find(*cell)) {
                id = *found;
            } else {
                if (grid.size() >= config.max_voxels) {
                    grid.finalize();
                    return out;
                }
                id = grid.add_voxel(*cell);
                if (options.record_adjacency) {
                    graph.add_vertex();
                    link_existing(grid, graph, id);
                }
            }
            grid.add_point(id, static_cast<std::uint32_t>(base + k));
        }
    }
    grid.finalize();
    return out;
}

NeighborGraph build_graph(const VoxelGrid& grid, Connectivity connectivity) {
    NeighborGraph graph(connectivity);
    graph.reserve(grid.size());
    for (VoxelId id = 0; id < grid.size(); ++id) {
        graph.add_vertex();
    }
    const int k = graph.slot_count();
    for (VoxelId id = 0; id < grid.size(); ++id) {
        const Cell& c = grid.cell(id);
        for (int s = 0; s < k; ++s) {
            const Cell& o = kSlotOffsets[s];
            if (auto other = grid.find({c[0] + o[0], c[1] + o[1], c[2] + o[2]})) {
                graph.link(id, s, *other);
            }
        }
    }
    return graph;
}

ComponentLabels connected_components(const NeighborGraph& graph) {
    constexpr std::uint32_t kUnset = std::numeric_limits<std::uint32_t>::max();
    ComponentLabels out;
    out.label.assign(graph.size(), kUnset);
    std::deque<VoxelId> queue;
    const int k = graph.slot_count();
    for (VoxelId root = 0; root < graph.size(); ++root) {
        if (out.label[root] != kUnset) {
            continue;
        }
        const std::uint32_t comp = out.component_count++;
        out.label[root] = comp;
        queue.push_back(root);
        while (!queue.empty()) {
            const VoxelId v = queue.front();
            queue.pop_front();
            for (int s = 0; s < k; ++s) {
                const VoxelId u = graph.neighbor(v, s);
                if (u != kNoVoxel && out.label[u] == kUnset) {
                    out.label[u] = comp;
                    queue.push_back(u);
                }
            }
        }
    }
    return out;
}

}  // namespace revox
