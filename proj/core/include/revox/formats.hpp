#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "revox/encoder.hpp"
#include "revox/multires.hpp"
#include "revox/voxel_grid.hpp"
#include "revox/walk.hpp"

// Binary dump formats. All integers and floats are little-endian; see
// docs/formats.md for the byte layouts.

namespace revox {

inline constexpr std::string_view kGridMagic = "RVOX1";
inline constexpr std::string_view kWalkMagic = "RWLK1";
inline constexpr std::string_view kMultiResWalkMagic = "RWLK2";
inline constexpr std::string_view kFeatureMagic = "RFEA1";

struct GridDump {
    std::vector<Cell> cells;
    std::vector<std::vector<std::uint32_t>> point_indices;

    [[nodiscard]] std::size_t size() const { return cells.size(); }
    [[nodiscard]] std::vector<std::uint32_t> counts() const;
};

struct WalkDumpSlot {
    bool present = false;
    TaggedVoxel final;
    std::vector<TaggedVoxel> trace;
};

struct WalkDump {
    std::vector<VoxelId> ids;
    std::vector<std::array<WalkDumpSlot, kPlanarSlots>> slots;
    bool multires = false;
    GridDump coarse;  // RWLK2 only
};

struct FeatureDump {
    std::uint32_t width = 0;
    std::vector<VoxelFeature> features;
};

std::vector<std::uint8_t> encode_rvox1(const VoxelGrid& grid);
GridDump decode_rvox1(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_rwlk1(const Reconfiguration& reconfig);
std::vector<std::uint8_t> encode_rwlk2(const MultiResReconfiguration& reconfig,
                                       const MultiResGrid& mgrid);
/// Accepts RWLK1 and RWLK2.
WalkDump decode_walk(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_rfea1(std::span<const VoxelFeature> features,
                                       std::uint32_t width);
FeatureDump decode_rfea1(std::span<const std::uint8_t> bytes);

/// CSV with header `id,f0,f1,...`.
std::string features_to_csv(std::span<const VoxelFeature> features, std::uint32_t width);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

}  // namespace revox
