#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "opiniond/analysis.hpp"
#include "opiniond/config.hpp"
#include "opiniond/dynamics.hpp"

namespace opiniond::io {

namespace fs = std::filesystem;

/// Round-trip double formatting: 17 significant digits, so every written
/// value parses back to the identical bits and reruns are byte-comparable.
inline std::string g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::ofstream open_output(const fs::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw std::runtime_error("cannot open for writing: " + path.string());
    }
    return os;
}

inline std::string read_file(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw std::runtime_error("cannot open for reading: " + path.string());
    }
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

inline void write_opinions_csv(const fs::path& path,
                               const std::vector<double>& opinions) {
    auto os = open_output(path);
    os << "node_id,opinion\n";
    for (std::size_t i = 0; i < opinions.size(); ++i) {
        os << i << ',' << g17(opinions[i]) << '\n';
    }
}

inline std::vector<double> read_opinions_csv(const fs::path& path) {
    std::ifstream is(path);
    if (!is) {
        throw std::runtime_error("cannot open for reading: " + path.string());
    }
    std::string line;
    if (!std::getline(is, line) || line != "node_id,opinion") {
        throw std::runtime_error("bad opinions CSV header in " + path.string());
    }
    std::vector<double> opinions;
    while (std::getline(is, line)) {
        if (line.empty()) {
            continue;
        }
        auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw std::runtime_error("bad opinions CSV row in " + path.string());
        }
        double v = 0.0;
        const char* first = line.data() + comma + 1;
        const char* last = line.data() + line.size();
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last) {
            throw std::runtime_error("bad opinion value in " + path.string());
        }
        opinions.push_back(v);
    }
    return opinions;
}

inline void write_edges_txt(const fs::path& path,
                            const std::vector<std::pair<NodeId, NodeId>>& edges) {
    auto os = open_output(path);
    for (const auto& [u, v] : edges) {
        os << u << ' ' << v << '\n';
    }
}

inline std::vector<std::pair<NodeId, NodeId>> read_edges_txt(const fs::path& path) {
    std::ifstream is(path);
    if (!is) {
        throw std::runtime_error("cannot open for reading: " + path.string());
    }
    std::vector<std::pair<NodeId, NodeId>> edges;
    std::uint64_t u = 0, v = 0;
    while (is >> u >> v) {
        edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
    }
    return edges;
}

/// One row per (snapshot, bin): step,bin_low,bin_high,mass.
inline void write_histograms_csv(
    const fs::path& path,
    const std::vector<std::pair<std::uint64_t, OpinionHistogram>>& entries) {
    auto os = open_output(path);
    os << "step,bin_low,bin_high,mass\n";
    for (const auto& [step, hist] : entries) {
        double b = static_cast<double>(hist.bins);
        for (std::size_t i = 0; i < hist.bins; ++i) {
            os << step << ',' << g17(static_cast<double>(i) / b) << ','
               << g17(static_cast<double>(i + 1) / b) << ',' << g17(hist.mass[i])
               << '\n';
        }
    }
}

/// Standalone histogram export (no step column).
inline void write_histogram_csv(const fs::path& path, const OpinionHistogram& hist) {
    auto os = open_output(path);
    os << "bin_low,bin_high,mass\n";
    double b = static_cast<double>(hist.bins);
    for (std::size_t i = 0; i < hist.bins; ++i) {
        os << g17(static_cast<double>(i) / b) << ','
           << g17(static_cast<double>(i + 1) / b) << ',' << g17(hist.mass[i]) << '\n';
    }
}

inline std::string snapshot_basename(std::uint64_t step) {
    return "snapshot-" + std::to_string(step);
}

inline void write_snapshot(const fs::path& seed_dir, const Snapshot& snapshot) {
    const std::string base = snapshot_basename(snapshot.step);
    write_opinions_csv(seed_dir / (base + ".opinions.csv"), snapshot.opinions);
    write_edges_txt(seed_dir / (base + ".edges.txt"), snapshot.edges);
}

/// Per-seed analysis summary derived purely from the stored snapshots, so
/// the analyze command reproduces it without re-simulating.
struct SeedReport {
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> steps;
    std::vector<std::size_t> raw_clusters;
    std::vector<std::size_t> major_clusters;
    std::vector<std::size_t> bridge_counts;
    ConvergenceReport convergence;
};

inline SeedReport analyze_snapshots(const RunConfig& config,
                                    const std::vector<Snapshot>& snapshots) {
    SeedReport report;
    report.seed = config.seed;
    std::vector<OpinionHistogram> hists;
    double gap = config.params.d / 2.0;
    for (const Snapshot& snap : snapshots) {
        report.steps.push_back(snap.step);
        hists.push_back(histogram(snap.opinions, config.histogram_bins));
        report.raw_clusters.push_back(cluster_count(snap.opinions, gap));
        report.major_clusters.push_back(major_cluster_count(snap.opinions, gap));
        AdaptiveGraph g(config.params.n);
        for (const auto& [u, v] : snap.edges) {
            g.add_edge(u, v);
        }
        report.bridge_counts.push_back(
            community_bridge_count(g, snap.opinions, config.params.d));
    }
    report.convergence = convergence_check(hists, 0.1, 5, report.steps);
    return report;
}

inline void append_seed_report(std::ostream& os, const SeedReport& report) {
    os << "seed " << report.seed << "\n";
    for (std::size_t i = 0; i < report.steps.size(); ++i) {
        os << "  snapshot step=" << report.steps[i]
           << " raw_clusters=" << report.raw_clusters[i]
           << " major_clusters=" << report.major_clusters[i]
           << " bridge_edges=" << report.bridge_counts[i] << "\n";
    }
    os << "  converged " << (report.convergence.converged ? "true" : "false");
    if (report.convergence.at_step) {
        os << " at_step " << *report.convergence.at_step;
    }
    os << "\n  window_distances";
    for (double d : report.convergence.window_distances) {
        os << ' ' << g17(d);
    }
    os << "\n";
}

/// Simulates one seed of `config` and writes its outputs under
/// out_dir/seed-<s>/ (snapshots plus histograms.csv). Returns the analysis
/// summary for report aggregation. Pure function of the config, so reruns
/// are byte-identical.
inline SeedReport write_seed_outputs(const RunConfig& config,
                                     const fs::path& out_dir) {
    Pcg32 rng = make_stream(config.seed, 0);
    std::vector<Snapshot> snapshots =
        run(config.params, config.total_steps, config.snapshot_schedule, rng,
            config.step_options());

    fs::path seed_dir = out_dir / ("seed-" + std::to_string(config.seed));
    fs::create_directories(seed_dir);
    std::vector<std::pair<std::uint64_t, OpinionHistogram>> hist_entries;
    for (const Snapshot& snap : snapshots) {
        write_snapshot(seed_dir, snap);
        hist_entries.emplace_back(snap.step,
                                  histogram(snap.opinions, config.histogram_bins));
    }
    write_histograms_csv(seed_dir / "histograms.csv", hist_entries);
    return analyze_snapshots(config, snapshots);
}

/// Executes one RunConfig into `out_dir`:
///   out_dir/config.toml
///   out_dir/seed-<s>/snapshot-<t>.opinions.csv
///   out_dir/seed-<s>/snapshot-<t>.edges.txt
///   out_dir/seed-<s>/histograms.csv
///   out_dir/report.txt
inline void execute_run(const RunConfig& config, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    {
        // The stored config never names the directory it lives in, so the
        // same run written to two places stays byte-identical.
        RunConfig stored = config;
        stored.output_dir.clear();
        auto os = open_output(out_dir / "config.toml");
        os << serialize_config(stored);
    }
    SeedReport seed_report = write_seed_outputs(config, out_dir);
    auto os = open_output(out_dir / "report.txt");
    os << "opiniond run report\n";
    append_seed_report(os, seed_report);
}

/// Loads the snapshots stored under one seed directory, ordered by step.
inline std::vector<Snapshot> read_snapshots(const fs::path& seed_dir) {
    std::vector<std::uint64_t> steps;
    for (const auto& entry : fs::directory_iterator(seed_dir)) {
        std::string name = entry.path().filename().string();
        const std::string prefix = "snapshot-";
        const std::string suffix = ".opinions.csv";
        if (name.size() > prefix.size() + suffix.size() &&
            name.compare(0, prefix.size(), prefix) == 0 &&
            name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
            std::string digits =
                name.substr(prefix.size(), name.size() - prefix.size() - suffix.size());
            steps.push_back(std::stoull(digits));
        }
    }
    std::sort(steps.begin(), steps.end());
    std::vector<Snapshot> snapshots;
    for (std::uint64_t step : steps) {
        Snapshot snap;
        snap.step = step;
        const std::string base = snapshot_basename(step);
        snap.opinions = read_opinions_csv(seed_dir / (base + ".opinions.csv"));
        snap.edges = read_edges_txt(seed_dir / (base + ".edges.txt"));
        snapshots.push_back(std::move(snap));
    }
    return snapshots;
}

/// Recomputes histograms and the analysis report from a stored run
/// directory into `out_dir`, never touching the input. Histogram CSVs come
/// out byte-identical to the originals because opinions round-trip exactly
/// through their 17-digit text form.
inline void analyze_run(const fs::path& in_dir, const fs::path& out_dir) {
    RunConfig config = parse_config(read_file(in_dir / "config.toml"));
    std::vector<fs::path> seed_dirs;
    for (const auto& entry : fs::directory_iterator(in_dir)) {
        if (entry.is_directory() &&
            entry.path().filename().string().rfind("seed-", 0) == 0) {
            seed_dirs.push_back(entry.path());
        }
    }
    std::sort(seed_dirs.begin(), seed_dirs.end());
    if (seed_dirs.empty()) {
        throw std::runtime_error("analyze: no seed-* directories in " +
                                 in_dir.string());
    }
    fs::create_directories(out_dir);
    auto report_os = open_output(out_dir / "report.txt");
    report_os << "opiniond run report\n";
    for (const fs::path& seed_dir : seed_dirs) {
        std::vector<Snapshot> snapshots = read_snapshots(seed_dir);
        if (snapshots.empty()) {
            throw std::runtime_error("analyze: no snapshots in " + seed_dir.string());
        }
        RunConfig seed_config = config;
        seed_config.seed = std::stoull(seed_dir.filename().string().substr(5));
        std::vector<std::pair<std::uint64_t, OpinionHistogram>> hist_entries;
        for (const Snapshot& snap : snapshots) {
            hist_entries.emplace_back(
                snap.step, histogram(snap.opinions, seed_config.histogram_bins));
        }
        fs::path out_seed = out_dir / seed_dir.filename();
        fs::create_directories(out_seed);
        write_histograms_csv(out_seed / "histograms.csv", hist_entries);
        append_seed_report(report_os, analyze_snapshots(seed_config, snapshots));
    }
}

}  // namespace opiniond::io
