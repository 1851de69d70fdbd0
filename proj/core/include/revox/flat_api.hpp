#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "revox/encoder.hpp"
#include "revox/voxel_grid.hpp"

// Flat-array entry point for in-process callers (language bindings). Inputs
// are borrowed for the duration of the call; outputs are owned copies.

namespace revox {

inline constexpr std::string_view kVersion = "0.1.0";

struct ArrayBundle {
    std::size_t voxel_count = 0;
    std::size_t feature_width = 0;
    std::vector<std::int32_t> cells;         // voxel_count x 3
    std::vector<std::uint32_t> counts;       // voxel_count
    std::vector<float> features;             // voxel_count x feature_width
    std::vector<std::int32_t> neighbor_slots;  // voxel_count x 4, -1 when absent
    std::vector<std::uint8_t> neighbor_resolution;  // voxel_count x 4, multires only
};

struct PipelineConfig {
    GridConfig grid = GridConfig::pillars();
    FeatureSpec features{};
    EncoderKind encoder = EncoderKind::kAvg;
    bool multires = false;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

/// `points` is row-major float32 with `width` 4 (x, y, z, r) or 5 (+ t).
/// Throws MalformedInput on a shape mismatch or non-finite value.
ArrayBundle run_pipeline(std::span<const float> points, std::size_t width,
                         const PipelineConfig& config);

}  // namespace revox
