#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "opiniond/dynamics.hpp"
#include "opiniond/graph.hpp"

namespace opiniond {

/// Normalized binned opinion density over [0,1]. Bin i covers
/// [i/B, (i+1)/B), except the last bin which is closed so that opinion 1.0
/// is counted.
struct OpinionHistogram {
    std::size_t bins = 20;
    std::vector<double> mass;

    bool operator==(const OpinionHistogram& o) const {
        return bins == o.bins && mass == o.mass;
    }
};

inline std::size_t histogram_bin(double x, std::size_t bins) {
    auto i = static_cast<std::int64_t>(std::floor(x * static_cast<double>(bins)));
    return static_cast<std::size_t>(
        std::clamp<std::int64_t>(i, 0, static_cast<std::int64_t>(bins) - 1));
}

inline OpinionHistogram histogram(std::span<const double> opinions,
                                  std::size_t bins = 20) {
    if (bins < 2) {
        throw std::invalid_argument("histogram: bins must be >= 2");
    }
    if (opinions.empty()) {
        throw std::invalid_argument("histogram: empty population");
    }
    OpinionHistogram h{bins, std::vector<double>(bins, 0.0)};
    for (double x : opinions) {
        h.mass[histogram_bin(x, bins)] += 1.0;
    }
    double inv = 1.0 / static_cast<double>(opinions.size());
    for (double& m : h.mass) {
        m *= inv;
    }
    return h;
}

/// L1 distance between two histograms with matching bin counts; a metric
/// with range [0, 2] (2 = disjoint point masses).
inline double l1_distance(const OpinionHistogram& h1, const OpinionHistogram& h2) {
    if (h1.bins != h2.bins) {
        throw std::invalid_argument("l1_distance: bin counts differ");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < h1.bins; ++i) {
        total += std::fabs(h1.mass[i] - h2.mass[i]);
    }
    return total;
}

/// Mean of several histograms (used for time-averaged steady states).
inline OpinionHistogram mean_histogram(std::span<const OpinionHistogram> hs) {
    if (hs.empty()) {
        throw std::invalid_argument("mean_histogram: empty input");
    }
    OpinionHistogram out{hs.front().bins, std::vector<double>(hs.front().bins, 0.0)};
    for (const auto& h : hs) {
        if (h.bins != out.bins) {
            throw std::invalid_argument("mean_histogram: bin counts differ");
        }
        for (std::size_t i = 0; i < out.bins; ++i) {
            out.mass[i] += h.mass[i];
        }
    }
    double inv = 1.0 / static_cast<double>(hs.size());
    for (double& m : out.mass) {
        m *= inv;
    }
    return out;
}

/// Sizes of the opinion clusters found by sorting and splitting wherever
/// consecutive values differ by at least `gap`.
inline std::vector<std::size_t> cluster_sizes(std::span<const double> opinions,
                                              double gap) {
    if (!(gap > 0.0)) {
        throw std::invalid_argument("cluster_sizes: gap must be > 0");
    }
    if (opinions.empty()) {
        throw std::invalid_argument("cluster_sizes: empty population");
    }
    std::vector<double> sorted(opinions.begin(), opinions.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::size_t> sizes;
    std::size_t current = 1;
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i] - sorted[i - 1] < gap) {
            ++current;
        } else {
            sizes.push_back(current);
            current = 1;
        }
    }
    sizes.push_back(current);
    return sizes;
}

/// Raw cluster count: maximal runs of sorted opinions with consecutive
/// differences below `gap`. The conventional gap is d/2.
inline std::size_t cluster_count(std::span<const double> opinions, double gap) {
    return cluster_sizes(opinions, gap).size();
}

/// Cluster count after dropping clusters holding less than `min_fraction`
/// of the population. Mutation continuously spawns transient singletons;
/// this is the figure-grade count. Can be 0 if nothing passes the filter
/// (only possible when min_fraction is large).
inline std::size_t major_cluster_count(std::span<const double> opinions, double gap,
                                       double min_fraction = 0.01) {
    auto sizes = cluster_sizes(opinions, gap);
    double n = static_cast<double>(opinions.size());
    std::size_t count = 0;
    for (std::size_t s : sizes) {
        if (static_cast<double>(s) >= min_fraction * n) {
            ++count;
        }
    }
    return count;
}

/// Number of edges whose endpoints dissent (|o(u) - o(v)| >= d). With
/// mutation on, these bridges keep the opinion communities connected; a
/// frozen no-mutation run has none.
inline std::size_t community_bridge_count(const AdaptiveGraph& g,
                                          std::span<const double> opinions,
                                          double d) {
    if (opinions.size() != g.node_count()) {
        throw std::invalid_argument("community_bridge_count: size mismatch");
    }
    std::size_t count = 0;
    for (NodeId u = 0; u < g.node_count(); ++u) {
        for (NodeId v : g.neighbors(u)) {
            if (u < v && std::fabs(opinions[u] - opinions[v]) >= d) {
                ++count;
            }
        }
    }
    return count;
}

/// Result of convergence detection over a histogram history.
struct ConvergenceReport {
    bool converged = false;
    std::optional<std::uint64_t> at_step;
    std::vector<double> window_distances;
};

/// Declares convergence once the trailing `window` histograms are mutually
/// quiet: all window-1 adjacent L1 distances at or below `threshold`. The
/// default protocol records one histogram every N/p steps with window 5 and
/// threshold 0.1, sized so each node has mutated a few times before the
/// verdict. `steps`, when given, labels each history entry and at_step
/// reports in those units; otherwise at_step is the history index.
/// Insufficient history simply reports not-converged.
inline ConvergenceReport convergence_check(std::span<const OpinionHistogram> history,
                                           double threshold = 0.1,
                                           std::size_t window = 5,
                                           std::span<const std::uint64_t> steps = {}) {
    if (window < 2) {
        throw std::invalid_argument("convergence_check: window must be >= 2");
    }
    if (!(threshold > 0.0)) {
        throw std::invalid_argument("convergence_check: threshold must be > 0");
    }
    if (!steps.empty() && steps.size() != history.size()) {
        throw std::invalid_argument("convergence_check: steps/history size mismatch");
    }
    ConvergenceReport report;
    if (history.size() < 2) {
        return report;
    }
    std::vector<double> distances;
    distances.reserve(history.size() - 1);
    for (std::size_t i = 1; i < history.size(); ++i) {
        distances.push_back(l1_distance(history[i - 1], history[i]));
    }
    std::size_t need = window - 1;
    // Earliest history index whose trailing window is quiet.
    std::size_t quiet = 0;
    for (std::size_t i = 0; i < distances.size(); ++i) {
        quiet = (distances[i] <= threshold) ? quiet + 1 : 0;
        if (quiet >= need) {
            report.converged = true;
            std::size_t fire = i + 1;  // history index of the firing histogram
            report.at_step = steps.empty() ? fire : steps[fire];
            report.window_distances.assign(
                distances.begin() + static_cast<std::ptrdiff_t>(fire - need),
                distances.begin() + static_cast<std::ptrdiff_t>(fire));
            return report;
        }
    }
    std::size_t tail = std::min(need, distances.size());
    report.window_distances.assign(distances.end() - static_cast<std::ptrdiff_t>(tail),
                                   distances.end());
    return report;
}

}  // namespace opiniond
