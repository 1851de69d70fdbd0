#include "revox/analysis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>

#include "revox/error.hpp"

namespace revox {

std::vector<double> raw_counts(const VoxelGrid& grid) {
    std::vector<double> out(grid.size());
    for (VoxelId v = 0; v < grid.size(); ++v) {
        out[v] = grid.count(v);
    }
    return out;
}

std::vector<double> effective_counts(std::span<const std::uint32_t> center_counts,
                                     std::span<const std::int64_t> neighbor_counts) {
    if (neighbor_counts.size() != center_counts.size() * kPlanarSlots) {
        throw ContractViolation("effective_counts: neighbor array must be voxel_count x 4");
    }
    std::vector<double> out(center_counts.size());
    for (std::size_t v = 0; v < center_counts.size(); ++v) {
        double sum = center_counts[v];
        int members = 1;
        for (int s = 0; s < kPlanarSlots; ++s) {
            const std::int64_t c = neighbor_counts[v * kPlanarSlots + s];
            if (c >= 0) {
                sum += static_cast<double>(c);
                ++members;
            }
        }
        out[v] = sum / members;
    }
    return out;
}

std::vector<double> effective_counts(const Reconfiguration& reconfig, const VoxelGrid& grid) {
    if (reconfig.voxel_count() != grid.size()) {
        throw ContractViolation("effective_counts: reconfiguration does not match grid");
    }
    std::vector<std::int64_t> neighbors(grid.size() * kPlanarSlots, -1);
    for (VoxelId v = 0; v < grid.size(); ++v) {
        for (int s = 0; s < kPlanarSlots; ++s) {
            const SlotWalk& w = reconfig.slot(v, s);
            if (w.present()) {
                neighbors[v * kPlanarSlots + s] = grid.count(w.final);
            }
        }
    }
    return effective_counts(grid.counts(), neighbors);
}

std::vector<double> effective_counts(const MultiResReconfiguration& reconfig,
                                     const MultiResGrid& mgrid) {
    if (reconfig.voxel_count() != mgrid.fine.size()) {
        throw ContractViolation("effective_counts: reconfiguration does not match grid");
    }
    std::vector<std::int64_t> neighbors(mgrid.fine.size() * kPlanarSlots, -1);
    for (VoxelId v = 0; v < mgrid.fine.size(); ++v) {
        for (int s = 0; s < kPlanarSlots; ++s) {
            const TaggedSlotWalk& w = reconfig.slot(v, s);
            if (w.present()) {
                const VoxelGrid& g = w.final.resolution == Resolution::kFine ? mgrid.fine : mgrid.coarse;
                neighbors[v * kPlanarSlots + s] = g.count(w.final.id);
            }
        }
    }
    return effective_counts(mgrid.fine.counts(), neighbors);
}

double coefficient_of_variation(std::span<const double> counts) {
    if (counts.empty()) {
        throw ContractViolation("coefficient_of_variation: empty input");
    }
    double mean = 0.0;
    for (double c : counts) {
        mean += c;
    }
    mean /= static_cast<double>(counts.size());
    if (!(mean > 0.0)) {
        throw ContractViolation("coefficient_of_variation: mean must be positive");
    }
    double var = 0.0;
    for (double c : counts) {
        var += (c - mean) * (c - mean);
    }
    var /= static_cast<double>(counts.size());
    return std::sqrt(var) / mean;
}

double CountHistogram::fraction(std::uint32_t count) const {
    if (total == 0) {
        return 0.0;
    }
    const auto it = bins.find(count);
    return it == bins.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(total);
}

CountHistogram count_histogram(std::span<const double> counts) {
    CountHistogram h;
    for (double c : counts) {
        const double rounded = std::floor(c + 0.5);
        ++h.bins[static_cast<std::uint32_t>(std::max(0.0, rounded))];
        ++h.total;
    }
    return h;
}

DisplacementSummary summarize_displacements(std::vector<double> d) {
    DisplacementSummary out;
    out.walks = d.size();
    if (d.empty()) {
        return out;
    }
    std::sort(d.begin(), d.end());
    double sum = 0.0;
    for (double v : d) {
        sum += v;
    }
    out.mean = sum / static_cast<double>(d.size());
    auto rank = [&](double q) {
        const auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(d.size())));
        return d[std::clamp<std::size_t>(k, 1, d.size()) - 1];
    };
    out.p50 = rank(0.50);
    out.p95 = rank(0.95);
    return out;
}

DisplacementSummary displacement_stats(const Reconfiguration& reconfig, const VoxelGrid& grid) {
    if (reconfig.voxel_count() != grid.size()) {
        throw ContractViolation("displacement_stats: reconfiguration does not match grid");
    }
    std::vector<double> d;
    d.reserve(reconfig.slots.size());
    for (const SlotWalk& w : reconfig.slots) {
        if (!w.present()) {
            continue;
        }
        const Cell& a = grid.cell(w.start);
        const Cell& b = grid.cell(w.final);
        const double dx = b[0] - a[0];
        const double dy = b[1] - a[1];
        const double dz = b[2] - a[2];
        d.push_back(std::sqrt(dx * dx + dy * dy + dz * dz));
    }
    return summarize_displacements(std::move(d));
}

double median(std::vector<double> samples) {
    if (samples.empty()) {
        throw ContractViolation("median of empty sample");
    }
    std::sort(samples.begin(), samples.end());
    const std::size_t n = samples.size();
    return n % 2 == 1 ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
}

double BenchReport::reconfiguration_overhead() const {
    return (partition + reconfigure) / plain_partition - 1.0;
}

double BenchReport::clouds_per_second() const {
    return 1.0 / (partition + reconfigure + encode);
}

namespace {

template <typename Fn>
double time_seconds(Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

BenchReport bench(const PointCloud& cloud, const GridConfig& config, const BenchOptions& options) {
    if (options.repetitions < 3) {
        throw ConfigError("bench: at least 3 repetitions are required");
    }
    config.validate();
    const WalkOptions walk{options.threads};

    // Warm-up pass; also fixes the voxel count reported.
    Partition warm = partition(cloud, config);
    Reconfiguration warm_rc = reconfigure(warm.grid, warm.graph, options.seed, walk);
    (void)encode_all(warm.grid, warm_rc, cloud, options.features, options.encoder);

    std::vector<double> plain, part, recon, enc;
    for (unsigned r = 0; r < options.repetitions; ++r) {
        std::optional<Partition> baseline;
        plain.push_back(time_seconds([&] { baseline.emplace(partition(cloud, config, PartitionOptions{false})); }));
        std::optional<Partition> p;
        part.push_back(time_seconds([&] { p.emplace(partition(cloud, config)); }));
        std::optional<Reconfiguration> rc;
        recon.push_back(time_seconds([&] { rc.emplace(reconfigure(p->grid, p->graph, options.seed, walk)); }));
        std::vector<VoxelFeature> features;
        enc.push_back(time_seconds([&] {
            features = encode_all(p->grid, *rc, cloud, options.features, options.encoder);
        }));
    }

    BenchReport report;
    report.points = cloud.size();
    report.voxels = warm.grid.size();
    report.repetitions = options.repetitions;
    report.plain_partition = median(plain);
    report.partition = median(part);
    report.reconfigure = median(recon);
    report.encode = median(enc);
    return report;
}

}  // namespace revox
