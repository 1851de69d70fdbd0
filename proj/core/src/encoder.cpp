#include "revox/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "revox/error.hpp"

namespace revox {

std::size_t FeatureMatrix::present_rows() const {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

NeighborWeightFn uniform_weights() {
    return [](const FeatureMatrix&) { return std::array<float, kPlanarSlots>{0.25f, 0.25f, 0.25f, 0.25f}; };
}

FeatureTransform column_max(std::size_t width) {
    return FeatureTransform{width, [width](const FeatureMatrix& m) {
                                std::vector<float> out(width, 0.0f);
                                bool any = false;
                                for (std::size_t r = 0; r < m.rows; ++r) {
                                    if (!m.present(r)) {
                                        continue;
                                    }
                                    const auto row = m.row(r);
                                    for (std::size_t c = 0; c < width; ++c) {
                                        out[c] = any ? std::max(out[c], row[c]) : row[c];
                                    }
                                    any = true;
                                }
                                return out;
                            }};
}

NeighborPoints neighbor_points(const VoxelGrid& grid, const Reconfiguration& reconfig,
                               VoxelId center) {
    NeighborPoints out;
    for (int s = 0; s < kPlanarSlots; ++s) {
        const SlotWalk& w = reconfig.slot(center, s);
        if (w.present()) {
            out.present[s] = true;
            out.slots[s] = grid.point_indices(w.final);
        }
    }
    return out;
}

NeighborPoints neighbor_points(const MultiResGrid& mgrid,
                               const MultiResReconfiguration& reconfig, VoxelId center) {
    NeighborPoints out;
    for (int s = 0; s < kPlanarSlots; ++s) {
        const TaggedSlotWalk& w = reconfig.slot(center, s);
        if (w.present()) {
            out.present[s] = true;
            const VoxelGrid& g = w.final.resolution == Resolution::kFine ? mgrid.fine : mgrid.coarse;
            out.slots[s] = g.point_indices(w.final.id);
        }
    }
    return out;
}

namespace {

struct Reference {
    std::array<double, 3> mean{};
    std::array<double, 3> cell_center{};
};

void fill_row(std::span<float> row, const Point& p, const Reference& ref, FeatureMode mode) {
    const double x = p.x;
    const double y = p.y;
    const double z = p.z;
    const double d = std::sqrt(x * x + y * y + z * z);
    row[0] = static_cast<float>(d);
    row[1] = p.z;
    if (mode == FeatureMode::kSecond) {
        row[2] = p.reflectance;
        return;
    }
    row[2] = p.timestamp;
    row[3] = static_cast<float>(x - ref.mean[0]);
    row[4] = static_cast<float>(y - ref.mean[1]);
    row[5] = static_cast<float>(z - ref.mean[2]);
    row[6] = static_cast<float>(x - ref.cell_center[0]);
    row[7] = static_cast<float>(y - ref.cell_center[1]);
}

void fill_matrix(FeatureMatrix& m, std::span<const std::uint32_t> indices, const PointCloud& cloud,
                 const Reference& ref, FeatureMode mode) {
    const std::size_t rows = std::min(m.rows, indices.size());
    for (std::size_t r = 0; r < rows; ++r) {
        fill_row(m.row(r), cloud.points[indices[r]], ref, mode);
        m.mask[r] = 1;
    }
}

}  // namespace

PointFeatureBlock decorate_voxel(const VoxelGrid& grid, VoxelId center,
                                 const NeighborPoints& neighbors, const PointCloud& cloud,
                                 const FeatureSpec& spec) {
    const std::size_t n = grid.config().max_points_per_voxel;
    const std::size_t width = spec.width();
    const auto own = grid.point_indices(center);

    Reference ref;
    ref.cell_center = grid.cell_center(grid.cell(center));
    for (std::uint32_t idx : own) {
        const Point& p = cloud.points[idx];
        ref.mean[0] += p.x;
        ref.mean[1] += p.y;
        ref.mean[2] += p.z;
    }
    if (!own.empty()) {
        for (double& v : ref.mean) {
            v /= static_cast<double>(own.size());
        }
    }

    PointFeatureBlock block;
    block.voxel = center;
    block.center = FeatureMatrix(n, width);
    fill_matrix(block.center, own, cloud, ref, spec.mode);
    for (int s = 0; s < kPlanarSlots; ++s) {
        block.neighbors[s] = FeatureMatrix(n, width);
        block.neighbor_present[s] = neighbors.present[s];
        if (neighbors.present[s]) {
            fill_matrix(block.neighbors[s], neighbors.slots[s], cloud, ref, spec.mode);
        }
    }
    return block;
}

std::vector<PointFeatureBlock> decorate(const VoxelGrid& grid, const Reconfiguration& reconfig,
                                        const PointCloud& cloud, const FeatureSpec& spec) {
    std::vector<PointFeatureBlock> blocks;
    blocks.reserve(grid.size());
    for (VoxelId v = 0; v < grid.size(); ++v) {
        blocks.push_back(decorate_voxel(grid, v, neighbor_points(grid, reconfig, v), cloud, spec));
    }
    return blocks;
}

std::vector<PointFeatureBlock> decorate(const MultiResGrid& mgrid,
                                        const MultiResReconfiguration& reconfig,
                                        const PointCloud& cloud, const FeatureSpec& spec) {
    std::vector<PointFeatureBlock> blocks;
    blocks.reserve(mgrid.fine.size());
    for (VoxelId v = 0; v < mgrid.fine.size(); ++v) {
        blocks.push_back(
            decorate_voxel(mgrid.fine, v, neighbor_points(mgrid, reconfig, v), cloud, spec));
    }
    return blocks;
}

VoxelFeature encode_avg(const PointFeatureBlock& block) {
    const std::size_t width = block.center.cols;
    if (block.center.present_rows() == 0) {
        throw ContractViolation("encode_avg: center voxel has no points");
    }
    std::vector<double> sum(width, 0.0);
    std::size_t rows = 0;
    auto accumulate = [&](const FeatureMatrix& m) {
        for (std::size_t r = 0; r < m.rows; ++r) {
            if (!m.present(r)) {
                continue;
            }
            const auto row = m.row(r);
            for (std::size_t c = 0; c < width; ++c) {
                sum[c] += row[c];
            }
            ++rows;
        }
    };
    accumulate(block.center);
    for (int s = 0; s < kPlanarSlots; ++s) {
        if (block.neighbor_present[s]) {
            accumulate(block.neighbors[s]);
        }
    }
    VoxelFeature out{block.voxel, std::vector<float>(width)};
    for (std::size_t c = 0; c < width; ++c) {
        out.values[c] = static_cast<float>(sum[c] / static_cast<double>(rows));
    }
    return out;
}

VoxelFeature encode_weighted(const PointFeatureBlock& block, const NeighborWeightFn& weights,
                             const FeatureTransform& transform) {
    if (block.center.present_rows() == 0) {
        throw ContractViolation("encode_weighted: center voxel has no points");
    }
    const auto w = weights(block.center);
    for (float v : w) {
        if (!std::isfinite(v) || v < 0.0f) {
            throw ContractViolation("encode_weighted: neighbor weights must be finite and non-negative");
        }
    }

    const std::size_t rows = block.center.rows;
    const std::size_t width = block.center.cols;
    FeatureMatrix mixed(rows, width);
    std::vector<double> acc(width);
    for (std::size_t r = 0; r < rows; ++r) {
        std::fill(acc.begin(), acc.end(), 0.0);
        bool any = false;
        for (int s = 0; s < kPlanarSlots; ++s) {
            const FeatureMatrix& m = block.neighbors[s];
            if (!block.neighbor_present[s] || r >= m.rows || !m.present(r)) {
                continue;
            }
            const auto row = m.row(r);
            for (std::size_t c = 0; c < width; ++c) {
                acc[c] += static_cast<double>(w[s]) * row[c];
            }
            any = true;
        }
        if (any) {
            mixed.mask[r] = 1;
            auto out = mixed.row(r);
            for (std::size_t c = 0; c < width; ++c) {
                out[c] = static_cast<float>(acc[c]);
            }
        }
    }

    std::vector<float> head = transform.apply(block.center);
    std::vector<float> tail = transform.apply(mixed);
    if (head.size() != transform.output_width || tail.size() != transform.output_width) {
        throw ContractViolation("encode_weighted: transform returned " + std::to_string(head.size()) +
                                " values, declared " + std::to_string(transform.output_width));
    }
    VoxelFeature out{block.voxel, std::move(head)};
    out.values.insert(out.values.end(), tail.begin(), tail.end());
    return out;
}

namespace {

template <typename NeighborsOf>
std::vector<VoxelFeature> encode_stream(const VoxelGrid& grid, const PointCloud& cloud,
                                        const FeatureSpec& spec, EncoderKind encoder,
                                        NeighborsOf&& neighbors_of) {
    std::vector<VoxelFeature> out;
    out.reserve(grid.size());
    const NeighborWeightFn weights = uniform_weights();
    const FeatureTransform transform = column_max(spec.width());
    for (VoxelId v = 0; v < grid.size(); ++v) {
        const PointFeatureBlock block = decorate_voxel(grid, v, neighbors_of(v), cloud, spec);
        out.push_back(encoder == EncoderKind::kAvg ? encode_avg(block)
                                                   : encode_weighted(block, weights, transform));
    }
    return out;
}

}  // namespace

std::vector<VoxelFeature> encode_all(const VoxelGrid& grid, const Reconfiguration& reconfig,
                                     const PointCloud& cloud, const FeatureSpec& spec,
                                     EncoderKind encoder) {
    return encode_stream(grid, cloud, spec, encoder,
                         [&](VoxelId v) { return neighbor_points(grid, reconfig, v); });
}

std::vector<VoxelFeature> encode_all(const MultiResGrid& mgrid,
                                     const MultiResReconfiguration& reconfig,
                                     const PointCloud& cloud, const FeatureSpec& spec,
                                     EncoderKind encoder) {
    return encode_stream(mgrid.fine, cloud, spec, encoder,
                         [&](VoxelId v) { return neighbor_points(mgrid, reconfig, v); });
}

std::span<const float> DenseMap::at(std::size_t z, std::size_t y, std::size_t x) const {
    const std::size_t offset = ((z * shape.height + y) * shape.width + x) * channels;
    return {values.data() + offset, channels};
}

DenseMap scatter(std::span<const VoxelFeature> features, const VoxelGrid& grid,
                 ScatterShape shape) {
    DenseMap map;
    map.shape = shape;
    map.channels = features.empty() ? 0 : features.front().values.size();
    map.values.assign(shape.depth * shape.height * shape.width * map.channels, 0.0f);
    for (const VoxelFeature& f : features) {
        if (f.values.size() != map.channels) {
            throw ContractViolation("scatter: features have differing widths");
        }
        if (f.voxel >= grid.size()) {
            throw ContractViolation("scatter: unknown voxel " + std::to_string(f.voxel));
        }
        const Cell& c = grid.cell(f.voxel);
        if (c[0] < 0 || c[1] < 0 || c[2] < 0 || static_cast<std::size_t>(c[0]) >= shape.width ||
            static_cast<std::size_t>(c[1]) >= shape.height ||
            static_cast<std::size_t>(c[2]) >= shape.depth) {
            throw ContractViolation("scatter: cell (" + std::to_string(c[0]) + ", " +
                                    std::to_string(c[1]) + ", " + std::to_string(c[2]) +
                                    ") outside the map");
        }
        const std::size_t offset =
            ((static_cast<std::size_t>(c[2]) * shape.height + c[1]) * shape.width + c[0]) *
            map.channels;
        std::copy(f.values.begin(), f.values.end(), map.values.begin() + offset);
    }
    return map;
}

}  // namespace revox
