#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "revox/point_cloud.hpp"

namespace revox {

using VoxelId = std::uint32_t;
inline constexpr VoxelId kNoVoxel = std::numeric_limits<VoxelId>::max();

/// Integer cell coordinates (x, y, z). Pillar grids keep z = 0.
using Cell = std::array<std::int32_t, 3>;

enum class GridMode : std::uint8_t {
    kPillar,  // z-unbounded columns
    kVoxel,   // full 3D cells
};

enum class Connectivity : std::uint8_t {
    kFourXY,   // left/right/back/front within one z slice
    kSixXYZ,   // adds down/up (voxel mode only)
};

enum class CountMode : std::uint8_t {
    kStandard,
    kQuarterAdjusted,  // ceil(count / 4) when deriving walk probability and steps
};

struct GridConfig {
    GridMode mode = GridMode::kPillar;
    std::array<double, 3> voxel_size{0.25, 0.25, 8.0};  // z ignored in pillar mode
    std::array<double, 3> range_min{-51.2, -51.2, -5.0};
    std::array<double, 3> range_max{51.2, 51.2, 3.0};
    std::uint32_t max_points_per_voxel = 25;
    std::uint32_t max_voxels = 25000;
    Connectivity connectivity = Connectivity::kFourXY;
    CountMode count_mode = CountMode::kQuarterAdjusted;

    /// PointPillars-style defaults: 0.25 x 0.25 m pillars, 25 points, 25000 pillars.
    static GridConfig pillars();
    /// SECOND-style defaults: 0.05 x 0.05 x 0.1 m voxels, 4 points, 30000 voxels.
    static GridConfig second();

    void validate() const;

    /// Number of cells per axis; z is 1 in pillar mode.
    [[nodiscard]] std::array<std::int32_t, 3> dims() const;
};

/// Slot order of the neighbor graph. Reconfiguration uses the first four.
enum Slot : std::uint8_t { kLeft = 0, kRight = 1, kBack = 2, kFront = 3, kDown = 4, kUp = 5 };
inline constexpr int kPlanarSlots = 4;
inline constexpr int kMaxSlots = 6;

inline constexpr int opposite_slot(int slot) { return slot ^ 1; }

/// Unit cell offset for each slot: left = -x, right = +x, back = -y, front = +y.
inline constexpr std::array<Cell, kMaxSlots> kSlotOffsets{{
    {-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}}};

inline constexpr int slot_count(Connectivity c) {
    return c == Connectivity::kSixXYZ ? 6 : 4;
}

namespace detail {

// Open-addressing map from linear cell index to voxel id. Grids with fewer
// than 2^32 - 1 cells pack key and id into one word to halve the footprint.
class CellTable {
public:
    explicit CellTable(bool narrow = false) : narrow_(narrow) { rehash(64); }

    [[nodiscard]] VoxelId find(std::uint64_t key) const;
    /// Hints the cache line a later find(key) will probe first.
    void prefetch(std::uint64_t key) const;
    void insert(std::uint64_t key, VoxelId id);
    void reserve(std::size_t n);

private:
    void rehash(std::size_t capacity);
    [[nodiscard]] std::size_t capacity() const { return narrow_ ? packed_.size() : wide_.size(); }

    static constexpr std::uint64_t kEmpty = std::numeric_limits<std::uint64_t>::max();
    struct Slot {
        std::uint64_t key;
        VoxelId value;
    };
    bool narrow_;
    std::vector<std::uint64_t> packed_;
    std::vector<Slot> wide_;
    std::size_t mask_ = 0;
    std::size_t size_ = 0;
};

}  // namespace detail

/// Sparse grid of non-empty cells. Voxel ids are dense and follow creation
/// order. Accepted points are logged in arrival order and compacted into a
/// per-voxel index table by finalize().
class VoxelGrid {
public:
    explicit VoxelGrid(GridConfig config);

    [[nodiscard]] const GridConfig& config() const { return config_; }
    [[nodiscard]] std::size_t size() const { return cells_.size(); }
    [[nodiscard]] bool empty() const { return cells_.empty(); }

    [[nodiscard]] const Cell& cell(VoxelId id) const { return cells_[id]; }
    [[nodiscard]] std::uint32_t count(VoxelId id) const { return counts_[id]; }
    [[nodiscard]] std::span<const std::uint32_t> counts() const { return counts_; }
    [[nodiscard]] std::span<const Cell> cells() const { return cells_; }
    [[nodiscard]] std::span<const std::uint32_t> point_indices(VoxelId id) const;

    [[nodiscard]] std::optional<VoxelId> find(const Cell& cell) const;
    [[nodiscard]] bool contains_cell(const Cell& cell) const;
    /// Cache hint for an upcoming find(); the cell must lie inside the grid.
    void prefetch(const Cell& cell) const { table_.prefetch(linear_key(cell)); }

    /// Cell holding a coordinate, or nullopt outside the half-open range.
    [[nodiscard]] std::optional<Cell> locate(const Point& p) const;

    /// Lower corner and geometric center of a cell, in meters.
    [[nodiscard]] std::array<double, 3> cell_min(const Cell& cell) const;
    [[nodiscard]] std::array<double, 3> cell_center(const Cell& cell) const;

    /// Creates an empty voxel. The caller checks the voxel cap.
    VoxelId add_voxel(const Cell& cell);
    /// Appends a point index; returns false once the voxel is full.
    bool add_point(VoxelId id, std::uint32_t point_index);
    /// Compacts logged points so point_indices() can be read. Idempotent.
    void finalize();
    [[nodiscard]] bool finalized() const { return log_.empty(); }

    /// Capacity hints; the cell table itself grows on demand.
    void reserve(std::size_t voxels, std::size_t points = 0);

private:
    [[nodiscard]] std::uint64_t linear_key(const Cell& cell) const;

    GridConfig config_;
    std::array<std::int32_t, 3> dims_;
    std::vector<Cell> cells_;
    std::vector<std::uint32_t> counts_;
    std::vector<std::uint64_t> offsets_;
    std::vector<std::uint32_t> indices_;
    std::vector<std::pair<VoxelId, std::uint32_t>> log_;
    detail::CellTable table_;
};

/// Adjacency over non-empty voxels. Links are always stored in both
/// directions (a.slot[s] == b  <=>  b.slot[opposite(s)] == a).
class NeighborGraph {
public:
    explicit NeighborGraph(Connectivity connectivity = Connectivity::kFourXY)
        : connectivity_(connectivity) {}

    [[nodiscard]] Connectivity connectivity() const { return connectivity_; }
    [[nodiscard]] int slot_count() const { return revox::slot_count(connectivity_); }
    [[nodiscard]] std::size_t size() const { return slots_.size(); }

    [[nodiscard]] VoxelId neighbor(VoxelId v, int slot) const { return slots_[v][slot]; }
    [[nodiscard]] const std::array<VoxelId, kMaxSlots>& slots(VoxelId v) const {
        return slots_[v];
    }

    VoxelId add_vertex();
    void link(VoxelId a, int slot, VoxelId b);
    void reserve(std::size_t n) { slots_.reserve(n); }

    /// Full scan of the symmetry invariant.
    [[nodiscard]] bool is_symmetric() const;

private:
    Connectivity connectivity_;
    std::vector<std::array<VoxelId, kMaxSlots>> slots_;
};

struct Partition {
    VoxelGrid grid;
    NeighborGraph graph;
};

struct PartitionOptions {
    /// Off gives a plain voxelizer (used as the baseline in benchmarks).
    bool record_adjacency = true;
};

/// Upper bound on voxels a cloud can create: min(max_voxels, points, cells).
std::size_t expected_voxels(const GridConfig& config, std::size_t points);

/// One traversal of the cloud: skips out-of-range points, creates voxels in
/// point order until max_voxels is reached (the traversal then stops), keeps
/// the first max_points_per_voxel points of each voxel, and links each new
/// voxel to its existing neighbors.
Partition partition(const PointCloud& cloud, const GridConfig& config,
                    PartitionOptions options = {});

/// Recomputes adjacency for an existing grid by cell lookup.
NeighborGraph build_graph(const VoxelGrid& grid, Connectivity connectivity);

struct ComponentLabels {
    std::vector<std::uint32_t> label;  // per voxel id
    std::uint32_t component_count = 0;
};

/// Breadth-first labeling; components are numbered by their lowest voxel id.
ComponentLabels connected_components(const NeighborGraph& graph);

}  // namespace revox
