#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "revox/multires.hpp"
#include "revox/point_cloud.hpp"
#include "revox/voxel_grid.hpp"
#include "revox/walk.hpp"

namespace revox {

enum class FeatureMode : std::uint8_t {
    kSecond,   // d, z, r
    kPillars,  // d, z, t, x_c, y_c, z_c, x_p, y_p
};

struct FeatureSpec {
    FeatureMode mode = FeatureMode::kPillars;

    [[nodiscard]] std::size_t width() const { return mode == FeatureMode::kPillars ? 8 : 3; }
};

/// Row-major rows x cols matrix with a per-row presence mask. Masked rows
/// hold zeros.
struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<float> values;
    std::vector<std::uint8_t> mask;

    FeatureMatrix() = default;
    FeatureMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0f), mask(r, 0) {}

    [[nodiscard]] std::span<float> row(std::size_t i) { return {values.data() + i * cols, cols}; }
    [[nodiscard]] std::span<const float> row(std::size_t i) const {
        return {values.data() + i * cols, cols};
    }
    [[nodiscard]] bool present(std::size_t i) const { return mask[i] != 0; }
    [[nodiscard]] std::size_t present_rows() const;
};

/// Center voxel points plus the points of its four reconfigured neighbors,
/// each padded to n rows.
struct PointFeatureBlock {
    VoxelId voxel = kNoVoxel;
    FeatureMatrix center;
    std::array<FeatureMatrix, kPlanarSlots> neighbors;
    std::array<bool, kPlanarSlots> neighbor_present{};
};

struct VoxelFeature {
    VoxelId voxel = kNoVoxel;
    std::vector<float> values;
};

/// Center block -> one non-negative weight per neighbor slot.
using NeighborWeightFn = std::function<std::array<float, kPlanarSlots>(const FeatureMatrix& center)>;

/// Point-feature matrix -> fixed-width vector.
struct FeatureTransform {
    std::size_t output_width = 0;
    std::function<std::vector<float>(const FeatureMatrix&)> apply;
};

/// Constant 0.25 per slot.
NeighborWeightFn uniform_weights();
/// Column-wise max over present rows; zeros when no row is present.
FeatureTransform column_max(std::size_t width);

/// Point indices feeding one center voxel and its neighbor slots. Slot spans
/// may come from either resolution.
struct NeighborPoints {
    std::array<std::span<const std::uint32_t>, kPlanarSlots> slots{};
    std::array<bool, kPlanarSlots> present{};
};

NeighborPoints neighbor_points(const VoxelGrid& grid, const Reconfiguration& reconfig,
                               VoxelId center);
NeighborPoints neighbor_points(const MultiResGrid& mgrid,
                               const MultiResReconfiguration& reconfig, VoxelId center);

/// Builds the block of one center voxel. Offsets of every row (neighbors
/// included) are taken relative to the center voxel's point mean and cell
/// center.
PointFeatureBlock decorate_voxel(const VoxelGrid& grid, VoxelId center,
                                 const NeighborPoints& neighbors, const PointCloud& cloud,
                                 const FeatureSpec& spec);

std::vector<PointFeatureBlock> decorate(const VoxelGrid& grid, const Reconfiguration& reconfig,
                                        const PointCloud& cloud, const FeatureSpec& spec);
std::vector<PointFeatureBlock> decorate(const MultiResGrid& mgrid,
                                        const MultiResReconfiguration& reconfig,
                                        const PointCloud& cloud, const FeatureSpec& spec);

/// Mean over all present rows of center and neighbors stacked along the point
/// axis. Throws ContractViolation if the center has no present row.
VoxelFeature encode_avg(const PointFeatureBlock& block);

/// concat(t(center), t(sum_j w_j * neighbor_j)). The weighted sum is taken
/// row by row; a row is present if any contributing neighbor row is.
VoxelFeature encode_weighted(const PointFeatureBlock& block, const NeighborWeightFn& weights,
                             const FeatureTransform& transform);

enum class EncoderKind : std::uint8_t { kAvg, kWeighted };

/// Streams decorate + encode over all voxels without materializing blocks.
std::vector<VoxelFeature> encode_all(const VoxelGrid& grid, const Reconfiguration& reconfig,
                                     const PointCloud& cloud, const FeatureSpec& spec,
                                     EncoderKind encoder);
std::vector<VoxelFeature> encode_all(const MultiResGrid& mgrid,
                                     const MultiResReconfiguration& reconfig,
                                     const PointCloud& cloud, const FeatureSpec& spec,
                                     EncoderKind encoder);

struct ScatterShape {
    std::size_t depth = 1;  // z cells; 1 for pillars
    std::size_t height = 0; // y cells
    std::size_t width = 0;  // x cells
};

struct DenseMap {
    ScatterShape shape;
    std::size_t channels = 0;
    std::vector<float> values;  // [depth][height][width][channels]

    [[nodiscard]] std::span<const float> at(std::size_t z, std::size_t y, std::size_t x) const;
};

/// Writes each feature at its voxel's cell; zeros elsewhere. Throws
/// ContractViolation if a cell falls outside `shape`.
DenseMap scatter(std::span<const VoxelFeature> features, const VoxelGrid& grid,
                 ScatterShape shape);

}  // namespace revox
