#include "revox/flat_api.hpp"

#include <cmath>
#include <string>

#include "revox/error.hpp"
#include "revox/multires.hpp"
#include "revox/walk.hpp"

namespace revox {
namespace {

PointCloud cloud_from_array(std::span<const float> points, std::size_t width) {
    if (width != 4 && width != 5) {
        throw MalformedInput("point array width must be 4 or 5, got " + std::to_string(width));
    }
    if (points.size() % width != 0) {
        throw MalformedInput("point array of " + std::to_string(points.size()) +
                             " floats is not a multiple of width " + std::to_string(width));
    }
    PointCloud cloud;
    cloud.source = "array";
    cloud.points.resize(points.size() / width);
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        const float* row = points.data() + i * width;
        for (std::size_t k = 0; k < width; ++k) {
            if (!std::isfinite(row[k])) {
                throw MalformedInput("non-finite value in point " + std::to_string(i));
            }
        }
        cloud.points[i] = Point{row[0], row[1], row[2], row[3], width == 5 ? row[4] : 0.0f};
    }
    return cloud;
}

void fill_voxels(ArrayBundle& out, const VoxelGrid& grid, std::span<const VoxelFeature> features,
                 std::size_t width) {
    out.voxel_count = grid.size();
    out.feature_width = width;
    out.cells.reserve(grid.size() * 3);
    out.counts.reserve(grid.size());
    for (VoxelId v = 0; v < grid.size(); ++v) {
        const Cell& c = grid.cell(v);
        out.cells.insert(out.cells.end(), c.begin(), c.end());
        out.counts.push_back(grid.count(v));
    }
    out.features.reserve(grid.size() * width);
    for (const VoxelFeature& f : features) {
        out.features.insert(out.features.end(), f.values.begin(), f.values.end());
    }
}

}  // namespace

ArrayBundle run_pipeline(std::span<const float> points, std::size_t width,
                         const PipelineConfig& config) {
    const PointCloud cloud = cloud_from_array(points, width);
    const std::size_t feature_width = config.encoder == EncoderKind::kAvg
                                          ? config.features.width()
                                          : 2 * config.features.width();
    const WalkOptions walk{config.threads};
    ArrayBundle out;
    if (!config.multires) {
        const Partition part = partition(cloud, config.grid);
        const Reconfiguration rc = reconfigure(part.grid, part.graph, config.seed, walk);
        const auto features = encode_all(part.grid, rc, cloud, config.features, config.encoder);
        fill_voxels(out, part.grid, features, feature_width);
        out.neighbor_slots.reserve(part.grid.size() * kPlanarSlots);
        for (const SlotWalk& w : rc.slots) {
            out.neighbor_slots.push_back(w.present() ? static_cast<std::int32_t>(w.final) : -1);
        }
        return out;
    }
    const MultiResGrid mgrid = partition_multires(cloud, config.grid, config.seed);
    const MultiResReconfiguration rc = reconfigure_multires(mgrid, config.seed, walk);
    const auto features = encode_all(mgrid, rc, cloud, config.features, config.encoder);
    fill_voxels(out, mgrid.fine, features, feature_width);
    out.neighbor_slots.reserve(mgrid.fine.size() * kPlanarSlots);
    out.neighbor_resolution.reserve(mgrid.fine.size() * kPlanarSlots);
    for (const TaggedSlotWalk& w : rc.slots) {
        out.neighbor_slots.push_back(w.present() ? static_cast<std::int32_t>(w.final.id) : -1);
        out.neighbor_resolution.push_back(static_cast<std::uint8_t>(w.final.resolution));
    }
    return out;
}

}  // namespace revox
