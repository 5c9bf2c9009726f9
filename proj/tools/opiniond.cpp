// opiniond — command line driver for the opinion-dynamics simulator.
//
// Subcommands:
//   run      execute one configuration (preset or config file) for one seed
//   compare  run two preset ensembles and report steady-state L1 distances
//   sweep    cross a (d, p, w) grid over a base config, one directory per cell
//   analyze  recompute histograms/clusters/convergence from stored snapshots

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "opiniond/config.hpp"
#include "opiniond/experiments.hpp"
#include "opiniond/io.hpp"
#include "opiniond/parallel.hpp"

namespace fs = std::filesystem;
using namespace opiniond;

namespace {

Scale parse_scale(const std::string& scale) {
    if (scale == "desk") {
        return Scale::Desk;
    }
    if (scale == "full") {
        return Scale::Full;
    }
    throw CLI::ValidationError("--scale must be 'desk' or 'full'");
}

std::vector<std::uint64_t> seed_range(std::uint64_t base, std::uint64_t count) {
    std::vector<std::uint64_t> seeds(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        seeds[i] = base + i;
    }
    return seeds;
}

std::string format_param(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

int cmd_run(const std::string& preset_name, const std::string& scale,
            const std::string& config_path, std::uint64_t seed,
            std::int64_t probe_limit, const std::string& out_dir) {
    RunConfig config;
    if (!preset_name.empty()) {
        config = run_config_from_scenario(preset(preset_name, parse_scale(scale)),
                                          seed);
    } else if (!config_path.empty()) {
        config = parse_config(io::read_file(config_path));
        config.seed = seed;
    } else {
        std::cerr << "run: need --preset or --config\n";
        return 2;
    }
    if (probe_limit >= 0) {
        config.rewire_probe_limit = static_cast<std::uint32_t>(probe_limit);
    }
    config.output_dir = out_dir;
    io::execute_run(config, out_dir);
    std::cout << "wrote " << out_dir << "\n";
    return 0;
}

int cmd_compare(const std::string& preset_a, const std::string& preset_b,
                const std::string& scale, std::uint64_t seed_base,
                std::uint64_t seed_count, const std::string& out_dir) {
    Scenario a = preset(preset_a, parse_scale(scale));
    Scenario b = preset(preset_b, parse_scale(scale));
    std::vector<std::uint64_t> seeds = seed_range(seed_base, seed_count);
    ComparisonReport report = run_comparison(a, b, seeds);

    fs::create_directories(out_dir);
    {
        auto os = io::open_output(fs::path(out_dir) / "distances.csv");
        os << "kind,seed_i,seed_j,distance\n";
        for (const PairDistance& pair : report.pairs) {
            os << pair.kind << ',' << seeds[pair.i] << ',' << seeds[pair.j] << ','
               << io::g17(pair.distance) << '\n';
        }
    }
    std::ostringstream os;
    os << "opiniond comparison report\n";
    os << "scenario_a " << report.scenario_a << "\n";
    os << "scenario_b " << report.scenario_b << "\n";
    os << "seeds";
    for (std::uint64_t s : seeds) {
        os << ' ' << s;
    }
    os << "\n";
    os << "cross_mean " << io::g17(report.cross.mean) << "\n";
    os << "cross_stddev " << io::g17(report.cross.stddev) << "\n";
    os << "baseline_mean " << io::g17(report.baseline.mean) << "\n";
    os << "baseline_stddev " << io::g17(report.baseline.stddev) << "\n";
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        os << "fired_at seed " << seeds[i] << " a=" << report.fired_at_a[i]
           << " b=" << report.fired_at_b[i] << "\n";
    }
    {
        auto file = io::open_output(fs::path(out_dir) / "report.txt");
        file << os.str();
    }
    std::cout << os.str();
    return 0;
}

int cmd_sweep(const std::string& config_path, std::vector<double> ds,
              std::vector<double> ps, std::vector<double> ws,
              std::uint64_t seed_base, std::uint64_t seed_count,
              const std::string& out_dir) {
    RunConfig base = parse_config(io::read_file(config_path));
    if (ds.empty()) {
        ds = {base.params.d};
    }
    if (ps.empty()) {
        ps = {base.params.p};
    }
    if (ws.empty()) {
        ws = {base.params.w};
    }
    std::vector<std::uint64_t> seeds = seed_range(seed_base, seed_count);

    struct Cell {
        RunConfig config;
        fs::path dir;
    };
    std::vector<Cell> cells;
    for (double d : ds) {
        for (double p : ps) {
            for (double w : ws) {
                RunConfig config = base;
                config.params.d = d;
                config.params.p = p;
                config.params.w = w;
                config.params.validate();
                fs::path dir = fs::path(out_dir) /
                               ("d-" + format_param(d) + "_p-" + format_param(p) +
                                "_w-" + format_param(w));
                cells.push_back({config, dir});
            }
        }
    }

    // One task per (cell, seed); every task writes only its own seed
    // directory, so execution order cannot affect the output.
    std::vector<std::vector<io::SeedReport>> reports(cells.size());
    for (auto& r : reports) {
        r.resize(seeds.size());
    }
    for (const Cell& cell : cells) {
        fs::create_directories(cell.dir);
    }
    parallel_for(cells.size() * seeds.size(), [&](std::size_t task) {
        std::size_t cell_idx = task / seeds.size();
        std::size_t seed_idx = task % seeds.size();
        RunConfig config = cells[cell_idx].config;
        config.seed = seeds[seed_idx];
        reports[cell_idx][seed_idx] =
            io::write_seed_outputs(config, cells[cell_idx].dir);
    });

    // Aggregation runs after all cells finish.
    for (std::size_t c = 0; c < cells.size(); ++c) {
        RunConfig cell_config = cells[c].config;
        cell_config.seed = seeds.front();
        auto os = io::open_output(cells[c].dir / "config.toml");
        os << serialize_config(cell_config);
        auto report = io::open_output(cells[c].dir / "report.txt");
        report << "opiniond run report\n";
        for (const io::SeedReport& sr : reports[c]) {
            io::append_seed_report(report, sr);
        }
    }
    auto os = io::open_output(fs::path(out_dir) / "report.txt");
    os << "opiniond sweep report\n";
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const RunConfig& config = cells[c].config;
        os << "cell " << cells[c].dir.filename().string() << " d="
           << io::g17(config.params.d) << " p=" << io::g17(config.params.p)
           << " w=" << io::g17(config.params.w) << "\n";
        for (std::size_t s = 0; s < seeds.size(); ++s) {
            const io::SeedReport& sr = reports[c][s];
            os << "  seed " << seeds[s] << " converged "
               << (sr.convergence.converged ? "true" : "false");
            if (sr.convergence.at_step) {
                os << " at_step " << *sr.convergence.at_step;
            }
            if (!sr.major_clusters.empty()) {
                os << " final_major_clusters " << sr.major_clusters.back();
            }
            os << "\n";
        }
    }
    std::cout << "wrote " << out_dir << "\n";
    return 0;
}

int cmd_analyze(const std::string& in_dir, const std::string& out_dir) {
    io::analyze_run(in_dir, out_dir);
    std::cout << "wrote " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"opiniond — bounded-confidence opinion dynamics on adaptive networks"};
    app.require_subcommand(1);

    std::string preset_name, config_path, scale = "desk", out_dir, in_dir;
    std::string preset_a, preset_b;
    std::uint64_t seed = 1, seed_base = 1, seed_count = 10;
    std::int64_t probe_limit = -1;
    std::vector<double> ds, ps, ws;

    CLI::App* run_cmd = app.add_subcommand("run", "execute one configuration");
    run_cmd->add_option("--preset", preset_name, "preset name");
    run_cmd->add_option("--config", config_path, "config file path");
    run_cmd->add_option("--scale", scale, "desk or full (presets only)");
    run_cmd->add_option("--seed", seed, "base seed");
    run_cmd->add_option("--probe-limit", probe_limit,
                        "rewiring candidate probes (0 = full scan)");
    run_cmd->add_option("--out", out_dir, "output directory")->required();

    CLI::App* compare_cmd =
        app.add_subcommand("compare", "compare two preset ensembles");
    compare_cmd->add_option("--preset-a", preset_a, "first preset")->required();
    compare_cmd->add_option("--preset-b", preset_b, "second preset")->required();
    compare_cmd->add_option("--scale", scale, "desk or full");
    compare_cmd->add_option("--seed-base", seed_base, "first seed");
    compare_cmd->add_option("--seeds", seed_count, "number of seeds per side");
    compare_cmd->add_option("--out", out_dir, "output directory")->required();

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "parameter grid runs");
    sweep_cmd->add_option("--config", config_path, "base config file")->required();
    sweep_cmd->add_option("--d", ds, "tolerance values")->delimiter(',');
    sweep_cmd->add_option("--p", ps, "mutation probabilities")->delimiter(',');
    sweep_cmd->add_option("--w", ws, "rewiring probabilities")->delimiter(',');
    sweep_cmd->add_option("--seed-base", seed_base, "first seed");
    sweep_cmd->add_option("--seeds", seed_count, "seeds per cell");
    sweep_cmd->add_option("--out", out_dir, "output directory")->required();

    CLI::App* analyze_cmd =
        app.add_subcommand("analyze", "recompute analysis from stored snapshots");
    analyze_cmd->add_option("--in", in_dir, "stored run directory")->required();
    analyze_cmd->add_option("--out", out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (run_cmd->parsed()) {
            return cmd_run(preset_name, scale, config_path, seed, probe_limit,
                           out_dir);
        }
        if (compare_cmd->parsed()) {
            return cmd_compare(preset_a, preset_b, scale, seed_base, seed_count,
                               out_dir);
        }
        if (sweep_cmd->parsed()) {
            return cmd_sweep(config_path, ds, ps, ws, seed_base, seed_count,
                             out_dir);
        }
        if (analyze_cmd->parsed()) {
            return cmd_analyze(in_dir, out_dir);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
