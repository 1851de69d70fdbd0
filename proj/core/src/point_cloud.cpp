#include "revox/point_cloud.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "revox/error.hpp"
#include "revox/formats.hpp"

namespace revox {
namespace {

std::size_t record_floats(BinLayout layout) { return layout == BinLayout::kXyzr ? 4 : 5; }

float read_f32(const std::uint8_t* p) {
    const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                               (static_cast<std::uint32_t>(p[1]) << 8) |
                               (static_cast<std::uint32_t>(p[2]) << 16) |
                               (static_cast<std::uint32_t>(p[3]) << 24);
    return std::bit_cast<float>(bits);
}

void write_f32(std::vector<std::uint8_t>& out, float v) {
    const auto bits = std::bit_cast<std::uint32_t>(v);
    out.push_back(static_cast<std::uint8_t>(bits));
    out.push_back(static_cast<std::uint8_t>(bits >> 8));
    out.push_back(static_cast<std::uint8_t>(bits >> 16));
    out.push_back(static_cast<std::uint8_t>(bits >> 24));
}

void check_finite(const Point& p, std::size_t index, const std::string& source) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z) ||
        !std::isfinite(p.reflectance) || !std::isfinite(p.timestamp)) {
        throw MalformedInput(source + ": non-finite value in point " + std::to_string(index));
    }
}

}  // namespace

PointCloud decode_bin(const std::vector<std::uint8_t>& bytes, BinLayout layout,
                      std::string source) {
    const std::size_t stride = record_floats(layout) * 4;
    if (bytes.size() % stride != 0) {
        throw MalformedInput(source + ": byte length " + std::to_string(bytes.size()) +
                             " is not a multiple of " + std::to_string(stride));
    }
    PointCloud cloud;
    cloud.source = std::move(source);
    const std::size_t n = bytes.size() / stride;
    cloud.points.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t* rec = bytes.data() + i * stride;
        Point& p = cloud.points[i];
        p.x = read_f32(rec);
        p.y = read_f32(rec + 4);
        p.z = read_f32(rec + 8);
        p.reflectance = read_f32(rec + 12);
        p.timestamp = layout == BinLayout::kXyzrt ? read_f32(rec + 16) : 0.0f;
        check_finite(p, i, cloud.source);
    }
    return cloud;
}

std::vector<std::uint8_t> encode_bin(const PointCloud& cloud, BinLayout layout) {
    std::vector<std::uint8_t> out;
    out.reserve(cloud.size() * record_floats(layout) * 4);
    for (const Point& p : cloud.points) {
        write_f32(out, p.x);
        write_f32(out, p.y);
        write_f32(out, p.z);
        write_f32(out, p.reflectance);
        if (layout == BinLayout::kXyzrt) {
            write_f32(out, p.timestamp);
        }
    }
    return out;
}

PointCloud load_bin(const std::filesystem::path& path, BinLayout layout) {
    return decode_bin(read_file(path), layout, path.string());
}

void save_bin(const PointCloud& cloud, const std::filesystem::path& path, BinLayout layout) {
    write_file_atomic(path, encode_bin(cloud, layout));
}

PointCloud load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw MalformedInput(path.string() + ": cannot open");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw MalformedInput(path.string() + ": missing CSV header");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != "x,y,z,r,t") {
        throw MalformedInput(path.string() + ": expected header x,y,z,r,t, got '" + line + "'");
    }
    PointCloud cloud;
    cloud.source = path.string();
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") {
            continue;
        }
        std::array<float, 5> v{};
        std::size_t pos = 0;
        for (std::size_t k = 0; k < 5; ++k) {
            const std::size_t end = line.find(',', pos);
            const std::string field = line.substr(pos, end == std::string::npos ? end : end - pos);
            try {
                std::size_t used = 0;
                v[k] = std::stof(field, &used);
                while (used < field.size() && (field[used] == ' ' || field[used] == '\r')) {
                    ++used;
                }
                if (used != field.size()) {
                    throw std::invalid_argument(field);
                }
            } catch (const std::exception&) {
                throw MalformedInput(path.string() + ": bad number '" + field + "' on row " +
                                     std::to_string(row));
            }
            if ((k < 4) != (end != std::string::npos)) {
                throw MalformedInput(path.string() + ": expected 5 columns on row " +
                                     std::to_string(row));
            }
            pos = end + 1;
        }
        Point p{v[0], v[1], v[2], v[3], v[4]};
        check_finite(p, cloud.points.size(), cloud.source);
        cloud.points.push_back(p);
    }
    return cloud;
}

void save_csv(const PointCloud& cloud, const std::filesystem::path& path) {
    std::ostringstream out;
    out.precision(9);
    out << "x,y,z,r,t\n";
    for (const Point& p : cloud.points) {
        out << p.x << ',' << p.y << ',' << p.z << ',' << p.reflectance << ',' << p.timestamp
            << '\n';
    }
    write_file_atomic(path, out.str());
}

PointCloud load_points(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".bin") {
        return load_bin(path, BinLayout::kXyzr);
    }
    if (ext == ".bin5") {
        return load_bin(path, BinLayout::kXyzrt);
    }
    if (ext == ".csv") {
        return load_csv(path);
    }
    throw MalformedInput(path.string() + ": unknown point file extension '" + ext + "'");
}

void save_points(const PointCloud& cloud, const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".bin") {
        save_bin(cloud, path, BinLayout::kXyzr);
    } else if (ext == ".bin5") {
        save_bin(cloud, path, BinLayout::kXyzrt);
    } else if (ext == ".csv") {
        save_csv(cloud, path);
    } else {
        throw MalformedInput(path.string() + ": unknown point file extension '" + ext + "'");
    }
}

}  // namespace revox
