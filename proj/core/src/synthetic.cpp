#include <cmath>
#include <numbers>

#include "revox/error.hpp"
#include "revox/point_cloud.hpp"
#include "revox/rng.hpp"

namespace revox {

void SynthSpec::validate() const {
    if (ring_count <= 0 || points_per_ring <= 0) {
        throw ConfigError("synthetic spec: ring_count and points_per_ring must be positive");
    }
    if (!(min_range > 0.0f) || !(max_range >= min_range)) {
        throw ConfigError("synthetic spec: need 0 < min_range <= max_range");
    }
    if (!(height_band[0] <= height_band[1])) {
        throw ConfigError("synthetic spec: height band is inverted");
    }
    if (!(dropout >= 0.0 && dropout < 1.0)) {
        throw ConfigError("synthetic spec: dropout must lie in [0, 1)");
    }
    for (const ObjectBlob& b : object_blobs) {
        if (!(b.density >= 0.0f) || !(b.extent[0] > 0.0f && b.extent[1] > 0.0f && b.extent[2] > 0.0f)) {
            throw ConfigError("synthetic spec: blob extent must be positive and density non-negative");
        }
    }
}

PointCloud generate_synthetic(const SynthSpec& spec, std::uint64_t seed) {
    spec.validate();
    CounterRng rng(seed, static_cast<std::uint64_t>(RngDomain::kSynthetic));

    PointCloud cloud;
    cloud.source = "synthetic:" + std::to_string(seed);
    cloud.points.reserve(static_cast<std::size_t>(spec.ring_count) * spec.points_per_ring);

    const double ratio = static_cast<double>(spec.max_range) / spec.min_range;
    const double step = 2.0 * std::numbers::pi / spec.points_per_ring;
    for (int k = 0; k < spec.ring_count; ++k) {
        const double radius =
            spec.ring_count == 1
                ? spec.max_range
                : spec.min_range * std::pow(ratio, static_cast<double>(k) / (spec.ring_count - 1));
        const double phase = rng.uniform() * step;
        for (int i = 0; i < spec.points_per_ring; ++i) {
            // Draws are consumed unconditionally so dropout does not shift later points.
            const double keep = rng.uniform();
            const double jitter = (rng.uniform() - 0.5) * 0.5 * step;
            const double zu = rng.uniform();
            const double r = rng.uniform();
            if (keep < spec.dropout) {
                continue;
            }
            const double azimuth = phase + i * step + jitter;
            Point p;
            p.x = static_cast<float>(radius * std::cos(azimuth));
            p.y = static_cast<float>(radius * std::sin(azimuth));
            p.z = static_cast<float>(spec.height_band[0] +
                                     zu * (spec.height_band[1] - spec.height_band[0]));
            p.reflectance = static_cast<float>(r);
            cloud.points.push_back(p);
        }
    }

    for (const ObjectBlob& blob : spec.object_blobs) {
        const double volume = static_cast<double>(blob.extent[0]) * blob.extent[1] * blob.extent[2];
        const auto count = static_cast<std::size_t>(std::llround(volume * blob.density));
        for (std::size_t i = 0; i < count; ++i) {
            Point p;
            p.x = static_cast<float>(blob.center[0] + (rng.uniform() - 0.5) * blob.extent[0]);
            p.y = static_cast<float>(blob.center[1] + (rng.uniform() - 0.5) * blob.extent[1]);
            p.z = static_cast<float>(blob.center[2] + (rng.uniform() - 0.5) * blob.extent[2]);
            p.reflectance = static_cast<float>(rng.uniform());
            cloud.points.push_back(p);
        }
    }
    return cloud;
}

SynthSpec standard_sparse_benchmark() {
    SynthSpec spec;
    spec.ring_count = 32;
    spec.points_per_ring = 3000;
    spec.min_range = 2.0f;
    spec.max_range = 50.0f;
    // 4.0 x 2.0 x 1.5 m at 83.33 points/m^3 -> 1000 points each.
    const float density = 1000.0f / 12.0f;
    spec.object_blobs = {
        {{12.0f, 4.0f, -0.8f}, {4.0f, 2.0f, 1.5f}, density},
        {{-20.0f, -6.0f, -0.8f}, {4.0f, 2.0f, 1.5f}, density},
        {{30.0f, -15.0f, -0.8f}, {4.0f, 2.0f, 1.5f}, density},
        {{-8.0f, 25.0f, -0.8f}, {4.0f, 2.0f, 1.5f}, density},
    };
    return spec;
}

}  // namespace revox
