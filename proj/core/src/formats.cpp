#include "revox/formats.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <string>
#include <system_error>

#include "revox/error.hpp"

namespace revox {
namespace {

class ByteWriter {
public:
    void magic(std::string_view m) { bytes_.insert(bytes_.end(), m.begin(), m.end()); }
    void u8(std::uint8_t v) { bytes_.push_back(v); }
    void u16(std::uint16_t v) {
        bytes_.push_back(static_cast<std::uint8_t>(v));
        bytes_.push_back(static_cast<std::uint8_t>(v >> 8));
    }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) {
            bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
        }
    }
    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void append(std::span<const std::uint8_t> more) { bytes_.insert(bytes_.end(), more.begin(), more.end()); }

    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

class ByteReader {
public:
    ByteReader(std::span<const std::uint8_t> bytes, std::string_view what) : bytes_(bytes), what_(what) {}

    void expect_magic(std::string_view m) {
        need(m.size());
        if (!std::equal(m.begin(), m.end(), bytes_.begin() + static_cast<std::ptrdiff_t>(pos_))) {
            throw MalformedInput(std::string(what_) + ": bad magic, expected " + std::string(m));
        }
        pos_ += m.size();
    }
    std::string peek_magic(std::size_t n) const {
        if (bytes_.size() - pos_ < n) {
            return {};
        }
        return std::string(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                           bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    }
    std::uint8_t u8() {
        need(1);
        return bytes_[pos_++];
    }
    std::uint16_t u16() {
        need(2);
        const auto v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
        }
        pos_ += 4;
        return v;
    }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    float f32() { return std::bit_cast<float>(u32()); }

    [[nodiscard]] std::size_t remaining() const { return bytes_.size() - pos_; }
    void expect_end() const {
        if (pos_ != bytes_.size()) {
            throw MalformedInput(std::string(what_) + ": " + std::to_string(bytes_.size() - pos_) +
                                 " trailing bytes");
        }
    }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) {
            throw MalformedInput(std::string(what_) + ": truncated at byte " + std::to_string(pos_) +
                                 " of " + std::to_string(bytes_.size()));
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::string_view what_;
    std::size_t pos_ = 0;
};

void write_grid_body(ByteWriter& w, const VoxelGrid& grid) {
    w.magic(kGridMagic);
    w.u32(static_cast<std::uint32_t>(grid.size()));
    for (VoxelId v = 0; v < grid.size(); ++v) {
        const Cell& c = grid.cell(v);
        w.i32(c[0]);
        w.i32(c[1]);
        w.i32(c[2]);
        const auto idx = grid.point_indices(v);
        w.u32(static_cast<std::uint32_t>(idx.size()));
        for (std::uint32_t i : idx) {
            w.u32(i);
        }
    }
}

GridDump read_grid_body(ByteReader& r) {
    r.expect_magic(kGridMagic);
    const std::uint32_t n = r.u32();
    GridDump dump;
    // Each voxel takes at least 16 bytes; reject impossible counts before allocating.
    if (static_cast<std::uint64_t>(n) * 16 > r.remaining()) {
        throw MalformedInput("RVOX1: voxel count " + std::to_string(n) + " exceeds payload");
    }
    dump.cells.resize(n);
    dump.point_indices.resize(n);
    for (std::uint32_t v = 0; v < n; ++v) {
        dump.cells[v] = {r.i32(), r.i32(), r.i32()};
        const std::uint32_t count = r.u32();
        if (static_cast<std::uint64_t>(count) * 4 > r.remaining()) {
            throw MalformedInput("RVOX1: point count exceeds payload");
        }
        auto& idx = dump.point_indices[v];
        idx.resize(count);
        for (auto& i : idx) {
            i = r.u32();
        }
    }
    return dump;
}

std::uint16_t trace_length(std::uint32_t n) {
    if (n > 0xFFFF) {
        throw ContractViolation("walk trace longer than 65535 entries");
    }
    return static_cast<std::uint16_t>(n);
}

}  // namespace

std::vector<std::uint32_t> GridDump::counts() const {
    std::vector<std::uint32_t> out(point_indices.size());
    for (std::size_t i = 0; i < point_indices.size(); ++i) {
        out[i] = static_cast<std::uint32_t>(point_indices[i].size());
    }
    return out;
}

std::vector<std::uint8_t> encode_rvox1(const VoxelGrid& grid) {
    ByteWriter w;
    write_grid_body(w, grid);
    return w.take();
}

GridDump decode_rvox1(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes, "RVOX1");
    GridDump dump = read_grid_body(r);
    r.expect_end();
    return dump;
}

std::vector<std::uint8_t> encode_rwlk1(const Reconfiguration& reconfig) {
    ByteWriter w;
    w.magic(kWalkMagic);
    w.u32(static_cast<std::uint32_t>(reconfig.voxel_count()));
    for (VoxelId v = 0; v < reconfig.voxel_count(); ++v) {
        w.u32(v);
        for (int s = 0; s < kPlanarSlots; ++s) {
            const SlotWalk& sw = reconfig.slot(v, s);
            w.u8(sw.present() ? 1 : 0);
            w.u32(sw.present() ? sw.final : kNoVoxel);
            if (!sw.present()) {
                w.u16(0);
                continue;
            }
            const auto trace = reconfig.trace(v, s);
            w.u16(trace_length(static_cast<std::uint32_t>(trace.size())));
            for (VoxelId id : trace) {
                w.u32(id);
            }
        }
    }
    return w.take();
}

std::vector<std::uint8_t> encode_rwlk2(const MultiResReconfiguration& reconfig,
                                       const MultiResGrid& mgrid) {
    ByteWriter w;
    w.magic(kMultiResWalkMagic);
    w.u32(static_cast<std::uint32_t>(reconfig.voxel_count()));
    for (VoxelId v = 0; v < reconfig.voxel_count(); ++v) {
        w.u32(v);
        for (int s = 0; s < kPlanarSlots; ++s) {
            const TaggedSlotWalk& sw = reconfig.slot(v, s);
            w.u8(sw.present() ? 1 : 0);
            w.u8(sw.present() ? static_cast<std::uint8_t>(sw.final.resolution) : 0);
            w.u32(sw.present() ? sw.final.id : kNoVoxel);
            if (!sw.present()) {
                w.u16(0);
                continue;
            }
            const auto trace = reconfig.trace_of(v, s);
            w.u16(trace_length(static_cast<std::uint32_t>(trace.size())));
            for (const TaggedVoxel& t : trace) {
                w.u8(static_cast<std::uint8_t>(t.resolution));
                w.u32(t.id);
            }
        }
    }
    write_grid_body(w, mgrid.coarse);
    return w.take();
}

WalkDump decode_walk(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes, "walk dump");
    WalkDump dump;
    const std::string magic = r.peek_magic(5);
    if (magic == kMultiResWalkMagic) {
        dump.multires = true;
    } else if (magic != kWalkMagic) {
        throw MalformedInput("walk dump: bad magic, expected RWLK1 or RWLK2");
    }
    r.expect_magic(magic);
    const std::uint32_t n = r.u32();
    if (static_cast<std::uint64_t>(n) * 4 * (dump.multires ? 8 : 7) + n * 4ull > r.remaining()) {
        throw MalformedInput("walk dump: voxel count " + std::to_string(n) + " exceeds payload");
    }
    dump.ids.resize(n);
    dump.slots.resize(n);
    for (std::uint32_t v = 0; v < n; ++v) {
        dump.ids[v] = r.u32();
        for (auto& slot : dump.slots[v]) {
            slot.present = r.u8() != 0;
            const std::uint8_t tag = dump.multires ? r.u8() : 0;
            if (tag > 1) {
                throw MalformedInput("walk dump: bad resolution tag");
            }
            slot.final = {r.u32(), static_cast<Resolution>(tag)};
            const std::uint16_t len = r.u16();
            slot.trace.resize(len);
            for (auto& t : slot.trace) {
                const std::uint8_t ttag = dump.multires ? r.u8() : 0;
                if (ttag > 1) {
                    throw MalformedInput("walk dump: bad resolution tag");
                }
                t = {r.u32(), static_cast<Resolution>(ttag)};
            }
        }
    }
    if (dump.multires) {
        dump.coarse = read_grid_body(r);
    }
    r.expect_end();
    return dump;
}

std::vector<std::uint8_t> encode_rfea1(std::span<const VoxelFeature> features,
                                       std::uint32_t width) {
    ByteWriter w;
    w.magic(kFeatureMagic);
    w.u32(static_cast<std::uint32_t>(features.size()));
    w.u32(width);
    for (const VoxelFeature& f : features) {
        if (f.values.size() != width) {
            throw ContractViolation("RFEA1: feature width mismatch");
        }
        w.u32(f.voxel);
        for (float v : f.values) {
            w.f32(v);
        }
    }
    return w.take();
}

FeatureDump decode_rfea1(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes, "RFEA1");
    r.expect_magic(kFeatureMagic);
    FeatureDump dump;
    const std::uint32_t n = r.u32();
    dump.width = r.u32();
    if ((static_cast<std::uint64_t>(dump.width) + 1) * 4 * n != r.remaining()) {
        throw MalformedInput("RFEA1: payload size does not match count x width");
    }
    dump.features.resize(n);
    for (auto& f : dump.features) {
        f.voxel = r.u32();
        f.values.resize(dump.width);
        for (float& v : f.values) {
            v = r.f32();
        }
    }
    return dump;
}

std::string features_to_csv(std::span<const VoxelFeature> features, std::uint32_t width) {
    std::string out = "id";
    for (std::uint32_t c = 0; c < width; ++c) {
        out += ",f" + std::to_string(c);
    }
    out += '\n';
    char buf[32];
    for (const VoxelFeature& f : features) {
        out += std::to_string(f.voxel);
        for (float v : f.values) {
            std::snprintf(buf, sizeof buf, ",%.9g", static_cast<double>(v));
            out += buf;
        }
        out += '\n';
    }
    return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw MalformedInput(path.string() + ": cannot open");
    }
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error(tmp.string() + ": cannot open for writing");
        }
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            throw std::runtime_error(tmp.string() + ": write failed");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw std::runtime_error(path.string() + ": rename failed: " + ec.message());
    }
}

void write_file_atomic(const std::filesystem::path& path, std::string_view text) {
    write_file_atomic(path, std::span<const std::uint8_t>(
                                reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace revox
