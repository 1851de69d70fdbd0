#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace revox {

struct Point {
    float x = 0.0f;
    float y = 0.0f;
    float z = 0.0f;
    float reflectance = 0.0f;
    float timestamp = 0.0f;  // seconds relative to the key frame

    friend bool operator==(const Point&, const Point&) = default;
};

/// Ordered point sequence. Order is significant: voxel caps admit points in
/// arrival order, so reordering a cloud can change the partition.
struct PointCloud {
    std::vector<Point> points;
    std::string source;

    [[nodiscard]] std::size_t size() const { return points.size(); }
    [[nodiscard]] bool empty() const { return points.empty(); }
};

enum class BinLayout {
    kXyzr,   // 4 x float32 per point (KITTI)
    kXyzrt,  // 5 x float32 per point, trailing timestamp
};

/// Decodes a little-endian float32 point file. Throws MalformedInput when the
/// byte length is not a whole number of records or a value is non-finite.
PointCloud load_bin(const std::filesystem::path& path, BinLayout layout);
inline PointCloud load_kitti_bin(const std::filesystem::path& path) {
    return load_bin(path, BinLayout::kXyzr);
}
PointCloud decode_bin(const std::vector<std::uint8_t>& bytes, BinLayout layout,
                      std::string source = {});
std::vector<std::uint8_t> encode_bin(const PointCloud& cloud, BinLayout layout);
void save_bin(const PointCloud& cloud, const std::filesystem::path& path, BinLayout layout);

/// CSV with header `x,y,z,r,t`.
PointCloud load_csv(const std::filesystem::path& path);
void save_csv(const PointCloud& cloud, const std::filesystem::path& path);

/// Picks the reader from the extension: .bin, .bin5 or .csv.
PointCloud load_points(const std::filesystem::path& path);
void save_points(const PointCloud& cloud, const std::filesystem::path& path);

/// Dense cluster added on top of the ring pattern. `density` is points per m^3.
struct ObjectBlob {
    std::array<float, 3> center{};
    std::array<float, 3> extent{1.0f, 1.0f, 1.0f};
    float density = 100.0f;
};

/// Desk-scale stand-in for a spinning LiDAR sweep: concentric rings whose
/// spacing widens with range, so the per-cell density falls off with distance.
struct SynthSpec {
    int ring_count = 32;
    int points_per_ring = 3125;
    float min_range = 2.0f;
    float max_range = 50.0f;
    std::array<float, 2> height_band{-1.8f, 0.5f};
    double dropout = 0.0;
    std::vector<ObjectBlob> object_blobs;

    void validate() const;
};

/// Pure function of (spec, seed). Ring k lies at radius
/// min_range * (max_range / min_range)^(k / (ring_count - 1)); a single ring
/// sits at max_range.
PointCloud generate_synthetic(const SynthSpec& spec, std::uint64_t seed);

/// Sparse benchmark scene: 32 rings of 3000 points out to 50 m plus four
/// 1000-point object blobs (100k points total).
SynthSpec standard_sparse_benchmark();

}  // namespace revox
