#pragma once

#include <unistd.h>

#include <cstdint>
#include <cstring>
#include <iterator>
#include <type_traits>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "revox/point_cloud.hpp"
#include "revox/voxel_grid.hpp"

namespace revox::test {

/// Small LCG kept separate from the library generator, so fixtures do not
/// share code with what they check.
class Lcg {
public:
    explicit Lcg(std::uint64_t seed) : state_(seed * 2862933555777941757ULL + 3037000493ULL) {}

    std::uint32_t next() {
        state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
        return static_cast<std::uint32_t>(state_ >> 33);
    }
    double uniform() { return next() / 2147483648.0; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::uint32_t below(std::uint32_t n) { return static_cast<std::uint32_t>(uniform() * n); }

private:
    std::uint64_t state_;
};

/// Unit-cell pillar grid over [0, width) x [0, height), used for hand-built
/// occupancy patterns.
inline GridConfig unit_pillars(int width, int height, std::uint32_t n,
                               CountMode mode = CountMode::kStandard) {
    GridConfig g = GridConfig::pillars();
    g.voxel_size = {1.0, 1.0, 8.0};
    g.range_min = {0.0, 0.0, -5.0};
    g.range_max = {static_cast<double>(width), static_cast<double>(height), 3.0};
    g.max_points_per_voxel = n;
    g.max_voxels = static_cast<std::uint32_t>(width * height);
    g.count_mode = mode;
    return g;
}

/// Cloud that puts `count` points near the center of each listed cell, cells
/// in the given order.
inline PointCloud cloud_from_counts(const std::vector<std::pair<std::pair<int, int>, int>>& cells) {
    PointCloud cloud;
    for (const auto& [xy, count] : cells) {
        for (int k = 0; k < count; ++k) {
            const float jitter = 0.01f * static_cast<float>(k % 7);
            cloud.points.push_back({static_cast<float>(xy.first) + 0.5f + jitter,
                                    static_cast<float>(xy.second) + 0.5f - jitter, 0.0f,
                                    0.1f * static_cast<float>(k % 10), 0.0f});
        }
    }
    return cloud;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("revox_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const { return path_; }
    [[nodiscard]] std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline std::vector<std::uint8_t> slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Little-endian scalar from raw bytes, independent of the library reader.
template <typename T>
T read_le(const std::vector<std::uint8_t>& bytes, std::size_t& at) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        v |= static_cast<std::uint64_t>(bytes.at(at + i)) << (8 * i);
    }
    at += sizeof(T);
    if constexpr (sizeof(T) == 4 && std::is_floating_point_v<T>) {
        const auto u = static_cast<std::uint32_t>(v);
        float f;
        std::memcpy(&f, &u, 4);
        return f;
    } else {
        return static_cast<T>(v);
    }
}

}  // namespace revox::test
