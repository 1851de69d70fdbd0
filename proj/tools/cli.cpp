#include "cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "revox/analysis.hpp"
#include "revox/encoder.hpp"
#include "revox/error.hpp"
#include "revox/flat_api.hpp"
#include "revox/formats.hpp"
#include "revox/multires.hpp"
#include "revox/point_cloud.hpp"
#include "revox/voxel_grid.hpp"
#include "revox/walk.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace revox::cli {
namespace {

/// Everything one subcommand needs, as parsed from argv.
struct RunConfig {
    std::string subcommand;
    std::string input;
    bool bin5 = false;
    std::string output;
    std::string grid_output;
    std::uint64_t seed = 0;
    unsigned threads = 1;

    std::string mode = "pillar";
    bool mode_given = false;
    std::vector<double> pillar_size;
    std::vector<double> voxel_size;
    std::vector<double> range;
    std::optional<std::uint32_t> max_points;
    std::optional<std::uint32_t> max_voxels;
    std::string connectivity;
    std::string count_mode;

    std::string features;
    std::string encoder = "avg";
    bool multires = false;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

unsigned default_threads() {
    if (const char* env = std::getenv("REVOX_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v >= 1 && v <= 1024) {
                return static_cast<unsigned>(v);
            }
        } catch (const std::exception&) {
        }
        throw UsageError(std::string("REVOX_THREADS must be an integer in [1, 1024], got '") + env + "'");
    }
    return 1;
}

GridConfig resolve_grid(const RunConfig& rc) {
    if (!rc.pillar_size.empty() && !rc.voxel_size.empty()) {
        throw UsageError("--pillar-size and --voxel-size are mutually exclusive");
    }
    std::string mode = rc.mode;
    if (!rc.voxel_size.empty()) {
        if (mode == "pillar" && rc.mode_given) {
            throw UsageError("--voxel-size requires --mode voxel");
        }
        mode = "voxel";
    }
    if (!rc.pillar_size.empty() && mode == "voxel") {
        throw UsageError("--pillar-size requires --mode pillar");
    }
    GridConfig g = mode == "voxel" ? GridConfig::second() : GridConfig::pillars();
    if (!rc.pillar_size.empty()) {
        g.voxel_size[0] = rc.pillar_size[0];
        g.voxel_size[1] = rc.pillar_size[1];
    }
    if (!rc.voxel_size.empty()) {
        g.voxel_size = {rc.voxel_size[0], rc.voxel_size[1], rc.voxel_size[2]};
    }
    if (!rc.range.empty()) {
        g.range_min = {rc.range[0], rc.range[1], rc.range[2]};
        g.range_max = {rc.range[3], rc.range[4], rc.range[5]};
    }
    if (rc.max_points) {
        g.max_points_per_voxel = *rc.max_points;
    }
    if (rc.max_voxels) {
        g.max_voxels = *rc.max_voxels;
    }
    if (rc.connectivity == "6") {
        g.connectivity = Connectivity::kSixXYZ;
    } else if (rc.connectivity == "4") {
        g.connectivity = Connectivity::kFourXY;
    }
    if (rc.count_mode == "standard") {
        g.count_mode = CountMode::kStandard;
    } else if (rc.count_mode == "quarter") {
        g.count_mode = CountMode::kQuarterAdjusted;
    }
    g.validate();
    return g;
}

FeatureSpec resolve_features(const RunConfig& rc, const GridConfig& g) {
    if (rc.features == "second") {
        return {FeatureMode::kSecond};
    }
    if (rc.features == "pillars") {
        return {FeatureMode::kPillars};
    }
    return {g.mode == GridMode::kVoxel ? FeatureMode::kSecond : FeatureMode::kPillars};
}

json grid_json(const GridConfig& g) {
    return json{
        {"mode", g.mode == GridMode::kPillar ? "pillar" : "voxel"},
        {"voxel_size", g.voxel_size},
        {"range_min", g.range_min},
        {"range_max", g.range_max},
        {"max_points_per_voxel", g.max_points_per_voxel},
        {"max_voxels", g.max_voxels},
        {"connectivity", g.connectivity == Connectivity::kFourXY ? 4 : 6},
        {"count_mode", g.count_mode == CountMode::kStandard ? "standard" : "quarter"},
    };
}

/// Sidecar `<output>.meta.json`: seed, config and inputs, never thread count.
void write_meta(const std::string& output, json meta) {
    meta["tool"] = "revox";
    meta["version"] = std::string(kVersion);
    write_file_atomic(output + ".meta.json", meta.dump(2) + "\n");
}

PointCloud load_input(const RunConfig& rc) {
    if (rc.input.empty()) {
        throw UsageError("an input point file is required");
    }
    if (rc.bin5) {
        return load_bin(rc.input, BinLayout::kXyzrt);
    }
    return load_points(rc.input);
}

void emit(std::ostream& out, const std::string& name, double value, const std::string& unit) {
    std::ostringstream s;
    s << std::setprecision(10) << value;
    out << name << ' ' << s.str() << ' ' << unit << '\n';
}

std::string histogram_csv(const CountHistogram& h) {
    std::string out = "count,frequency\n";
    for (const auto& [count, freq] : h.bins) {
        out += std::to_string(count) + "," + std::to_string(freq) + "\n";
    }
    return out;
}

void add_grid_flags(CLI::App* sub, RunConfig& rc) {
    sub->add_option("--mode", rc.mode, "Cell shape: pillar | voxel (default: pillar)")
        ->check(CLI::IsMember({"pillar", "voxel"}));
    sub->add_option("--pillar-size", rc.pillar_size,
                    "Pillar size L W in meters (default: 0.25 0.25)")
        ->expected(2);
    sub->add_option("--voxel-size", rc.voxel_size,
                    "Voxel size L W H in meters; implies voxel mode (default: 0.05 0.05 0.1)")
        ->expected(3);
    sub->add_option("--range", rc.range,
                    "Detection range XMIN YMIN ZMIN XMAX YMAX ZMAX (default: -51.2 -51.2 -5 51.2 51.2 3)")
        ->expected(6);
    sub->add_option("--max-points", rc.max_points,
                    "Max points per voxel n (default: 25 pillar, 4 voxel)");
    sub->add_option("--max-voxels", rc.max_voxels,
                    "Max number of voxels N (default: 25000 pillar, 30000 voxel)");
    sub->add_option("--connectivity", rc.connectivity,
                    "Adjacency: 4 (X-Y) | 6 (3D, voxel mode only) (default: 4)")
        ->check(CLI::IsMember({"4", "6"}));
    sub->add_option("--count-mode", rc.count_mode,
                    "Walk count rule: standard | quarter (default: quarter pillar, standard voxel)")
        ->check(CLI::IsMember({"standard", "quarter"}));
}

void add_input(CLI::App* sub, RunConfig& rc) {
    sub->add_option("input", rc.input, "Point file (.bin, .bin5 or .csv)")->required();
    sub->add_flag("--bin5", rc.bin5, "Read the input as 5-float records (x, y, z, r, t) (default: off)");
}

void add_walk_flags(CLI::App* sub, RunConfig& rc) {
    sub->add_option("--seed", rc.seed, "Random walk seed (default: 0)");
    sub->add_option("--threads", rc.threads,
                    "Worker threads; falls back to REVOX_THREADS (default: 1)")
        ->check(CLI::Range(1u, 1024u));
}

json base_meta(const RunConfig& rc, const GridConfig& g) {
    return json{{"command", rc.subcommand}, {"seed", rc.seed}, {"input", rc.input}, {"grid", grid_json(g)}};
}

int cmd_synth(const RunConfig& rc, const SynthSpec& spec, std::ostream& out) {
    const PointCloud cloud = generate_synthetic(spec, rc.seed);
    save_points(cloud, rc.output);
    json blobs = json::array();
    for (const ObjectBlob& b : spec.object_blobs) {
        blobs.push_back({{"center", b.center}, {"extent", b.extent}, {"density", b.density}});
    }
    write_meta(rc.output, {{"command", "synth"},
                           {"seed", rc.seed},
                           {"spec",
                            {{"ring_count", spec.ring_count},
                             {"points_per_ring", spec.points_per_ring},
                             {"min_range", spec.min_range},
                             {"max_range", spec.max_range},
                             {"height_band", spec.height_band},
                             {"dropout", spec.dropout},
                             {"object_blobs", blobs}}}});
    emit(out, "points", static_cast<double>(cloud.size()), "count");
    emit(out, "seed", static_cast<double>(rc.seed), "id");
    return 0;
}

int cmd_voxelize(const RunConfig& rc, std::ostream& out) {
    const GridConfig g = resolve_grid(rc);
    const PointCloud cloud = load_input(rc);
    const Partition part = partition(cloud, g);
    write_file_atomic(rc.output, encode_rvox1(part.grid));
    write_meta(rc.output, base_meta(rc, g));
    emit(out, "points", static_cast<double>(cloud.size()), "count");
    emit(out, "voxels", static_cast<double>(part.grid.size()), "count");
    return 0;
}

int cmd_reconfigure(const RunConfig& rc, std::ostream& out) {
    const GridConfig g = resolve_grid(rc);
    const PointCloud cloud = load_input(rc);
    const Partition part = partition(cloud, g);
    const Reconfiguration recon = reconfigure(part.grid, part.graph, rc.seed, WalkOptions{rc.threads});
    write_file_atomic(rc.output, encode_rwlk1(recon));
    if (!rc.grid_output.empty()) {
        write_file_atomic(rc.grid_output, encode_rvox1(part.grid));
    }
    write_meta(rc.output, base_meta(rc, g));
    emit(out, "voxels", static_cast<double>(part.grid.size()), "count");
    emit(out, "seed", static_cast<double>(rc.seed), "id");
    return 0;
}

int cmd_multires(const RunConfig& rc, std::ostream& out) {
    const GridConfig g = resolve_grid(rc);
    const PointCloud cloud = load_input(rc);
    const MultiResGrid mgrid = partition_multires(cloud, g, rc.seed);
    const MultiResReconfiguration recon = reconfigure_multires(mgrid, rc.seed, WalkOptions{rc.threads});
    write_file_atomic(rc.output, encode_rwlk2(recon, mgrid));
    if (!rc.grid_output.empty()) {
        write_file_atomic(rc.grid_output, encode_rvox1(mgrid.fine));
    }
    write_meta(rc.output, base_meta(rc, g));
    emit(out, "voxels", static_cast<double>(mgrid.fine.size()), "count");
    emit(out, "coarse_voxels", static_cast<double>(mgrid.coarse.size()), "count");
    emit(out, "seed", static_cast<double>(rc.seed), "id");
    return 0;
}

int cmd_encode(const RunConfig& rc, std::ostream& out) {
    const GridConfig g = resolve_grid(rc);
    const FeatureSpec spec = resolve_features(rc, g);
    const PointCloud cloud = load_input(rc);
    PipelineConfig pc;
    pc.grid = g;
    pc.features = spec;
    pc.encoder = rc.encoder == "weighted" ? EncoderKind::kWeighted : EncoderKind::kAvg;
    pc.multires = rc.multires;
    pc.seed = rc.seed;
    pc.threads = rc.threads;

    std::vector<VoxelFeature> features;
    std::size_t voxels = 0;
    if (rc.multires) {
        const MultiResGrid mgrid = partition_multires(cloud, g, rc.seed);
        const auto recon = reconfigure_multires(mgrid, rc.seed, WalkOptions{rc.threads});
        features = encode_all(mgrid, recon, cloud, spec, pc.encoder);
        voxels = mgrid.fine.size();
    } else {
        const Partition part = partition(cloud, g);
        const auto recon = reconfigure(part.grid, part.graph, rc.seed, WalkOptions{rc.threads});
        features = encode_all(part.grid, recon, cloud, spec, pc.encoder);
        voxels = part.grid.size();
    }
    const auto width = static_cast<std::uint32_t>(
        pc.encoder == EncoderKind::kAvg ? spec.width() : 2 * spec.width());
    if (fs::path(rc.output).extension() == ".csv") {
        write_file_atomic(rc.output, features_to_csv(features, width));
    } else {
        write_file_atomic(rc.output, encode_rfea1(features, width));
    }
    json meta = base_meta(rc, g);
    meta["encoder"] = rc.encoder;
    meta["features"] = spec.mode == FeatureMode::kPillars ? "pillars" : "second";
    meta["multires"] = rc.multires;
    write_meta(rc.output, meta);
    emit(out, "voxels", static_cast<double>(voxels), "count");
    emit(out, "feature_width", width, "floats");
    emit(out, "seed", static_cast<double>(rc.seed), "id");
    return 0;
}

struct StatsFlags {
    std::string before;
    std::string after;
    std::string histogram;
    std::string histogram_after;
    std::string json_path;
};

int cmd_stats(const StatsFlags& f, std::ostream& out) {
    const GridDump before = decode_rvox1(read_file(f.before));
    const std::vector<std::uint32_t> counts = before.counts();
    std::vector<double> raw(counts.begin(), counts.end());

    json summary{{"voxels", before.size()}};
    emit(out, "voxels", static_cast<double>(before.size()), "count");
    if (raw.empty()) {
        throw MalformedInput(f.before + ": grid dump holds no voxels");
    }
    const double cov_before = coefficient_of_variation(raw);
    const CountHistogram hist_before = count_histogram(raw);
    emit(out, "cov_before", cov_before, "ratio");
    emit(out, "count1_fraction_before", hist_before.fraction(1), "ratio");
    summary["cov_before"] = cov_before;
    summary["count1_fraction_before"] = hist_before.fraction(1);
    if (!f.histogram.empty()) {
        write_file_atomic(f.histogram, histogram_csv(hist_before));
    }

    if (!f.after.empty()) {
        const WalkDump walk = decode_walk(read_file(f.after));
        if (walk.ids.size() != before.size()) {
            throw MalformedInput(f.after + ": walk dump covers " + std::to_string(walk.ids.size()) +
                                 " voxels, grid dump has " + std::to_string(before.size()));
        }
        const std::vector<std::uint32_t> coarse_counts = walk.coarse.counts();
        std::vector<std::int64_t> neighbor(before.size() * kPlanarSlots, -1);
        std::vector<double> displacement;
        std::size_t coarse_final = 0;
        for (std::size_t v = 0; v < before.size(); ++v) {
            for (int s = 0; s < kPlanarSlots; ++s) {
                const WalkDumpSlot& slot = walk.slots[v][s];
                if (!slot.present) {
                    continue;
                }
                const bool coarse = slot.final.resolution == Resolution::kCoarse;
                const auto& pool = coarse ? coarse_counts : counts;
                if (slot.final.id >= pool.size() || slot.trace.empty() ||
                    slot.trace.front().id >= before.size()) {
                    throw MalformedInput(f.after + ": voxel id out of range");
                }
                neighbor[v * kPlanarSlots + s] = pool[slot.final.id];
                const Cell& a = before.cells[slot.trace.front().id];
                std::array<double, 2> b{};
                if (coarse) {
                    const Cell& c = walk.coarse.cells[slot.final.id];
                    b = {2.0 * c[0] + 0.5, 2.0 * c[1] + 0.5};
                    ++coarse_final;
                } else {
                    const Cell& c = before.cells[slot.final.id];
                    b = {static_cast<double>(c[0]), static_cast<double>(c[1])};
                }
                displacement.push_back(std::hypot(b[0] - a[0], b[1] - a[1]));
            }
        }
        const std::vector<double> eff = effective_counts(counts, neighbor);
        const double cov_after = coefficient_of_variation(eff);
        const CountHistogram hist_after = count_histogram(eff);
        const DisplacementSummary d = summarize_displacements(displacement);
        emit(out, "cov_after", cov_after, "ratio");
        emit(out, "count1_fraction_after", hist_after.fraction(1), "ratio");
        emit(out, "walks", static_cast<double>(d.walks), "count");
        emit(out, "displacement_mean", d.mean, "cells");
        emit(out, "displacement_p50", d.p50, "cells");
        emit(out, "displacement_p95", d.p95, "cells");
        summary["cov_after"] = cov_after;
        summary["count1_fraction_after"] = hist_after.fraction(1);
        summary["walks"] = d.walks;
        summary["displacement"] = {{"mean", d.mean}, {"p50", d.p50}, {"p95", d.p95}};
        if (walk.multires) {
            const double frac = d.walks == 0 ? 0.0 : static_cast<double>(coarse_final) / d.walks;
            emit(out, "coarse_final_fraction", frac, "ratio");
            summary["coarse_final_fraction"] = frac;
        }
        if (!f.histogram_after.empty()) {
            write_file_atomic(f.histogram_after, histogram_csv(hist_after));
        }
    }
    if (!f.json_path.empty()) {
        write_file_atomic(f.json_path, summary.dump(2) + "\n");
    }
    return 0;
}

int cmd_bench(const RunConfig& rc, unsigned repetitions, bool standard, const std::string& json_path,
              std::ostream& out) {
    const GridConfig g = resolve_grid(rc);
    const PointCloud cloud =
        standard ? generate_synthetic(standard_sparse_benchmark(), rc.seed) : load_input(rc);
    BenchOptions options;
    options.repetitions = repetitions;
    options.seed = rc.seed;
    options.threads = rc.threads;
    options.features = resolve_features(rc, g);
    options.encoder = rc.encoder == "weighted" ? EncoderKind::kWeighted : EncoderKind::kAvg;
    const BenchReport r = bench(cloud, g, options);
    emit(out, "points", static_cast<double>(r.points), "count");
    emit(out, "voxels", static_cast<double>(r.voxels), "count");
    emit(out, "repetitions", r.repetitions, "count");
    emit(out, "plain_partition", r.plain_partition * 1e3, "ms");
    emit(out, "partition", r.partition * 1e3, "ms");
    emit(out, "reconfigure", r.reconfigure * 1e3, "ms");
    emit(out, "encode", r.encode * 1e3, "ms");
    emit(out, "reconfiguration_overhead", r.reconfiguration_overhead(), "ratio");
    emit(out, "rate", r.clouds_per_second(), "clouds/s");
    if (!json_path.empty()) {
        json j{{"points", r.points},
               {"voxels", r.voxels},
               {"repetitions", r.repetitions},
               {"seconds",
                {{"plain_partition", r.plain_partition},
                 {"partition", r.partition},
                 {"reconfigure", r.reconfigure},
                 {"encode", r.encode}}},
               {"reconfiguration_overhead", r.reconfiguration_overhead()},
               {"clouds_per_second", r.clouds_per_second()},
               {"seed", rc.seed},
               {"grid", grid_json(g)}};
        write_file_atomic(json_path, j.dump(2) + "\n");
    }
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"revox: reconfigurable voxel partition, random-walk reconfiguration and features",
                 "revox"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    RunConfig rc;
    try {
        rc.threads = default_threads();
    } catch (const UsageError& e) {
        err << "revox: error: " << e.what() << '\n';
        return 2;
    }

    SynthSpec synth;
    bool synth_standard = false;
    std::vector<float> blob_args;
    auto* s_synth = app.add_subcommand("synth", "Write a synthetic ring-pattern point cloud");
    s_synth->add_option("--rings", synth.ring_count, "Number of rings (default: 32)");
    s_synth->add_option("--points-per-ring", synth.points_per_ring, "Points per ring (default: 3125)");
    s_synth->add_option("--min-range", synth.min_range, "Innermost ring radius in m (default: 2)");
    s_synth->add_option("--max-range", synth.max_range, "Outermost ring radius in m (default: 50)");
    s_synth->add_option("--height-band", synth.height_band, "Z band LO HI in m (default: -1.8 0.5)")
        ->expected(2);
    s_synth->add_option("--dropout", synth.dropout, "Per-point drop probability in [0, 1) (default: 0)");
    s_synth->add_option("--blob", blob_args,
                        "Object blob CX CY CZ EX EY EZ DENSITY (points/m^3); repeatable (default: none)")
        ->expected(7)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    s_synth->add_flag("--standard", synth_standard,
                      "Use the 100k-point sparse benchmark scene (default: off)");
    s_synth->add_option("--seed", rc.seed, "Generator seed (default: 0)");
    s_synth->add_option("-o,--output", rc.output, "Output point file (.bin, .bin5, .csv)")->required();

    auto* s_vox = app.add_subcommand("voxelize", "Partition a cloud and write an RVOX1 grid dump");
    add_input(s_vox, rc);
    add_grid_flags(s_vox, rc);
    s_vox->add_option("-o,--output", rc.output, "Output RVOX1 file")->required();

    auto* s_rec = app.add_subcommand("reconfigure", "Single-resolution random-walk reconfiguration (RWLK1)");
    add_input(s_rec, rc);
    add_grid_flags(s_rec, rc);
    add_walk_flags(s_rec, rc);
    s_rec->add_option("-o,--output", rc.output, "Output RWLK1 file")->required();
    s_rec->add_option("--grid-out", rc.grid_output, "Also write the RVOX1 grid dump (default: none)");

    auto* s_mr = app.add_subcommand("multires", "Two-resolution partition and reconfiguration (RWLK2)");
    add_input(s_mr, rc);
    add_grid_flags(s_mr, rc);
    add_walk_flags(s_mr, rc);
    s_mr->add_option("-o,--output", rc.output, "Output RWLK2 file")->required();
    s_mr->add_option("--grid-out", rc.grid_output, "Also write the fine RVOX1 grid dump (default: none)");

    auto* s_enc = app.add_subcommand("encode", "Per-voxel features (RFEA1, or CSV by .csv extension)");
    add_input(s_enc, rc);
    add_grid_flags(s_enc, rc);
    add_walk_flags(s_enc, rc);
    s_enc->add_option("--encoder", rc.encoder, "avg | weighted (default: avg)")
        ->check(CLI::IsMember({"avg", "weighted"}));
    s_enc->add_option("--features", rc.features,
                      "second (d,z,r) | pillars (d,z,t,xc,yc,zc,xp,yp) (default: pillars pillar, second voxel)")
        ->check(CLI::IsMember({"second", "pillars"}));
    s_enc->add_flag("--multires", rc.multires, "Use the two-resolution pipeline (default: off)");
    s_enc->add_option("-o,--output", rc.output, "Output feature file")->required();

    StatsFlags stats;
    auto* s_stats = app.add_subcommand("stats", "Count distribution, CoV and displacement report");
    s_stats->add_option("--before", stats.before, "RVOX1 grid dump")->required();
    s_stats->add_option("--after", stats.after, "RWLK1 or RWLK2 walk dump for the same grid (default: none)");
    s_stats->add_option("--histogram", stats.histogram, "Write raw-count histogram CSV (default: none)");
    s_stats->add_option("--histogram-after", stats.histogram_after,
                        "Write effective-count histogram CSV (default: none)");
    s_stats->add_option("--json", stats.json_path, "Write a JSON summary (default: none)");

    unsigned repetitions = 5;
    bool bench_standard = false;
    std::string bench_json;
    auto* s_bench = app.add_subcommand("bench", "Median phase timings over repetitions");
    s_bench->add_option("input", rc.input, "Point file (.bin, .bin5 or .csv)");
    s_bench->add_flag("--bin5", rc.bin5, "Read the input as 5-float records (default: off)");
    s_bench->add_flag("--standard", bench_standard,
                      "Benchmark the synthetic 100k-point scene instead of a file (default: off)");
    add_grid_flags(s_bench, rc);
    add_walk_flags(s_bench, rc);
    s_bench->add_option("--repetitions", repetitions, "Timed repetitions, at least 3 (default: 5)")
        ->check(CLI::Range(3u, 100000u));
    s_bench->add_option("--encoder", rc.encoder, "avg | weighted (default: avg)")
        ->check(CLI::IsMember({"avg", "weighted"}));
    s_bench->add_option("--features", rc.features, "second | pillars (default: by mode)")
        ->check(CLI::IsMember({"second", "pillars"}));
    s_bench->add_option("--json", bench_json, "Write a JSON report (default: none)");

    std::vector<std::string> argv_store{"revox"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) {
        argv.push_back(a.data());
    }

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "revox: error: " << e.what() << '\n';
        return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
    }

    try {
        CLI::App* chosen = app.get_subcommands().front();
        rc.subcommand = chosen->get_name();
        const CLI::Option* mode_opt = chosen->get_option_no_throw("--mode");
        rc.mode_given = mode_opt != nullptr && mode_opt->count() > 0;
        if (rc.subcommand == "synth") {
            SynthSpec spec = synth_standard ? standard_sparse_benchmark() : synth;
            for (std::size_t i = 0; i + 7 <= blob_args.size(); i += 7) {
                spec.object_blobs.push_back({{blob_args[i], blob_args[i + 1], blob_args[i + 2]},
                                             {blob_args[i + 3], blob_args[i + 4], blob_args[i + 5]},
                                             blob_args[i + 6]});
            }
            return cmd_synth(rc, spec, out);
        }
        if (rc.subcommand == "voxelize") {
            return cmd_voxelize(rc, out);
        }
        if (rc.subcommand == "reconfigure") {
            return cmd_reconfigure(rc, out);
        }
        if (rc.subcommand == "multires") {
            return cmd_multires(rc, out);
        }
        if (rc.subcommand == "encode") {
            return cmd_encode(rc, out);
        }
        if (rc.subcommand == "stats") {
            return cmd_stats(stats, out);
        }
        if (rc.subcommand == "bench") {
            if (!bench_standard && rc.input.empty()) {
                throw UsageError("bench needs an input file or --standard");
            }
            return cmd_bench(rc, repetitions, bench_standard, bench_json, out);
        }
        throw UsageError("unknown subcommand " + rc.subcommand);
    } catch (const UsageError& e) {
        err << "revox: error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "revox: error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace revox::cli
