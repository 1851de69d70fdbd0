#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "revox/encoder.hpp"
#include "revox/multires.hpp"
#include "revox/voxel_grid.hpp"
#include "revox/walk.hpp"

namespace revox {

std::vector<double> raw_counts(const VoxelGrid& grid);

/// Mean count over the center and its present reconfigured neighbors.
std::vector<double> effective_counts(const Reconfiguration& reconfig, const VoxelGrid& grid);
std::vector<double> effective_counts(const MultiResReconfiguration& reconfig,
                                     const MultiResGrid& mgrid);
/// Same from flat arrays: `neighbor_counts` is voxel_count x 4 with
/// negative entries for absent slots.
std::vector<double> effective_counts(std::span<const std::uint32_t> center_counts,
                                     std::span<const std::int64_t> neighbor_counts);

/// Population standard deviation over mean. Throws ContractViolation for
/// empty or zero-mean input.
double coefficient_of_variation(std::span<const double> counts);

struct CountHistogram {
    std::map<std::uint32_t, std::uint64_t> bins;  // rounded count -> voxels
    std::uint64_t total = 0;

    [[nodiscard]] double fraction(std::uint32_t count) const;
};

/// Bins by rounding to the nearest integer (halves round up).
CountHistogram count_histogram(std::span<const double> counts);

struct DisplacementSummary {
    std::size_t walks = 0;
    double mean = 0.0;
    double p50 = 0.0;
    double p95 = 0.0;
};

/// Euclidean cell distance from each slot's starting neighbor to its final
/// voxel. Percentiles use the nearest-rank rule.
DisplacementSummary displacement_stats(const Reconfiguration& reconfig, const VoxelGrid& grid);
DisplacementSummary summarize_displacements(std::vector<double> displacements);

struct BenchOptions {
    unsigned repetitions = 5;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    FeatureSpec features{};
    EncoderKind encoder = EncoderKind::kAvg;
};

struct BenchReport {
    std::size_t points = 0;
    std::size_t voxels = 0;
    unsigned repetitions = 0;
    // Median wall times in seconds.
    double plain_partition = 0.0;  // voxelization without adjacency
    double partition = 0.0;        // voxelization with adjacency
    double reconfigure = 0.0;
    double encode = 0.0;

    /// (partition + reconfigure) / plain_partition - 1.
    [[nodiscard]] double reconfiguration_overhead() const;
    /// Full clouds per second through partition, reconfigure and encode.
    [[nodiscard]] double clouds_per_second() const;
};

/// Times each phase on a monotonic clock after one warm-up pass. Throws
/// ConfigError when repetitions < 3.
BenchReport bench(const PointCloud& cloud, const GridConfig& config, const BenchOptions& options);

/// Median of a copy of `samples`; throws on empty input.
double median(std::vector<double> samples);

}  // namespace revox
