#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "opiniond/distributions.hpp"
#include "opiniond/graph.hpp"
#include "opiniond/rng.hpp"

namespace opiniond {

/// Full parameter set of one model instance. d gates consensus, mu is the
/// convergence rate, w the rewiring probability, p the mutation probability.
/// `initial` seeds the opinion vector, `basal` feeds mutation draws.
struct ModelParams {
    std::size_t n = 1000;
    double k_avg = 10.0;
    double d = 0.25;
    double mu = 0.5;
    double w = 0.5;
    double p = 0.1;
    DistributionSpec initial = DistributionSpec::uniform();
    DistributionSpec basal = DistributionSpec::uniform();

    void validate() const {
        if (n < 2) {
            throw std::invalid_argument("ModelParams: n must be >= 2");
        }
        if (k_avg < 0.0 || k_avg > static_cast<double>(n - 1)) {
            throw std::invalid_argument("ModelParams: k_avg must be in [0, n-1]");
        }
        if (!(d > 0.0 && d <= 1.0)) {
            throw std::invalid_argument("ModelParams: d must be in (0,1]");
        }
        if (!(mu > 0.0 && mu <= 0.5)) {
            throw std::invalid_argument("ModelParams: mu must be in (0,0.5]");
        }
        if (!(w >= 0.0 && w <= 1.0)) {
            throw std::invalid_argument("ModelParams: w must be in [0,1]");
        }
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::invalid_argument("ModelParams: p must be in [0,1]");
        }
        initial.validate();
        basal.validate();
    }
};

/// How the mutating node is chosen each step: a fresh uniform draw
/// (`Independent`, the default) or the step's primary node A
/// (`Interacting`). The model text does not pin this down, so both are
/// available and testable.
enum class MutationTarget { Independent, Interacting };

/// Execution knobs that do not change the model, only how it is computed.
/// rewire_probe_limit bounds the uniform random probes used to find a
/// rewiring candidate; 0 means scan all nodes. Probing keeps the per-step
/// cost O(1); rejection sampling keeps the accepted candidate uniform over
/// the valid set either way.
struct StepOptions {
    std::uint32_t rewire_probe_limit = 50;
    MutationTarget mutation_target = MutationTarget::Independent;
};

enum class InteractionKind : std::uint8_t {
    Consensus,
    Rewired,
    RejectedNoRewire,
    IsolatedNode,
};

/// Trace record of a single step.
struct StepOutcome {
    InteractionKind interaction = InteractionKind::IsolatedNode;
    std::optional<NodeId> mutated;

    bool operator==(const StepOutcome& o) const {
        return interaction == o.interaction && mutated == o.mutated;
    }
};

/// Live simulation state: the adaptive graph, one opinion per node, and the
/// step counter.
struct SimState {
    AdaptiveGraph graph;
    std::vector<double> opinions;
    std::uint64_t step_count = 0;

    SimState(AdaptiveGraph g, std::vector<double> o)
        : graph(std::move(g)), opinions(std::move(o)) {
        if (opinions.size() != graph.node_count()) {
            throw std::invalid_argument("SimState: opinion count != node count");
        }
    }
};

/// Graph + opinions drawn fresh from params. Draw order: edges first, then
/// the opinion vector, so a (params, seed) pair fully determines the state.
inline SimState make_initial_state(const ModelParams& params, Pcg32& rng) {
    params.validate();
    AdaptiveGraph g = erdos_renyi(params.n, params.k_avg, rng);
    std::vector<double> opinions = sample_vector(params.initial, params.n, rng);
    return SimState(std::move(g), std::move(opinions));
}

/// The pairwise consensus rule. If |oa - ob| < d both opinions move toward
/// each other by mu times the gap, computed simultaneously from the
/// pre-update values; otherwise both pass through unchanged. The pair sum
/// is preserved, and a firing update contracts the gap by (1 - 2 mu).
inline std::pair<double, double> consensus_update(double oa, double ob,
                                                  double mu, double d) {
    if (std::fabs(oa - ob) >= d) {
        return {oa, ob};
    }
    double shift = mu * (oa - ob);
    double na = oa - shift;
    double nb = ob + shift;
    // The exact result is a convex combination, so it lies inside [0,1];
    // clamp the final rounding step back into range.
    return {std::clamp(na, 0.0, 1.0), std::clamp(nb, 0.0, 1.0)};
}

namespace detail {

/// Uniform draw from {c : c != a, c not adjacent to a, |o(a)-o(c)| < d}.
/// probe_limit > 0: up to that many uniform probes, first hit accepted
/// (rejection sampling, so the accepted candidate is uniform over the valid
/// set). probe_limit == 0: full scan, then one uniform index draw.
/// Adjacency rejection scans a's neighbor slice: it is a handful of
/// contiguous words already in cache, which beats an edge-index lookup in
/// the probe loop.
inline std::optional<NodeId> find_rewire_candidate(const SimState& state,
                                                   NodeId a, double d,
                                                   std::uint32_t probe_limit,
                                                   Pcg32& rng) {
    const auto n = static_cast<std::uint32_t>(state.graph.node_count());
    double oa = state.opinions[a];
    std::span<const NodeId> adj = state.graph.neighbors(a);
    auto is_neighbor = [&](NodeId c) {
        return std::find(adj.begin(), adj.end(), c) != adj.end();
    };
    if (probe_limit > 0) {
        for (std::uint32_t i = 0; i < probe_limit; ++i) {
            NodeId c = rng.uniform_below(n);
            if (c != a && std::fabs(oa - state.opinions[c]) < d && !is_neighbor(c)) {
                return c;
            }
        }
        return std::nullopt;
    }
    std::vector<NodeId> candidates;
    for (NodeId c = 0; c < n; ++c) {
        if (c != a && std::fabs(oa - state.opinions[c]) < d && !is_neighbor(c)) {
            candidates.push_back(c);
        }
    }
    if (candidates.empty()) {
        return std::nullopt;
    }
    return candidates[rng.uniform_below(static_cast<std::uint32_t>(candidates.size()))];
}

}  // namespace detail

/// Dissenter rewiring: with probability w, node a tries to move its edge
/// {a,b} to a uniformly chosen non-neighbor with a similar opinion. If the
/// coin fails or no candidate exists the edge is kept. Requires {a,b} to be
/// a dissenting edge (|o(a)-o(b)| >= d).
inline StepOutcome attempt_rewire(SimState& state, NodeId a, NodeId b, double w,
                                  double d, Pcg32& rng,
                                  std::uint32_t probe_limit = 50) {
    if (!state.graph.has_edge(a, b)) {
        throw std::invalid_argument("attempt_rewire: {a,b} is not an edge");
    }
    if (std::fabs(state.opinions[a] - state.opinions[b]) < d) {
        throw std::invalid_argument("attempt_rewire: opinions within tolerance");
    }
    StepOutcome outcome;
    outcome.interaction = InteractionKind::RejectedNoRewire;
    if (!rng.bernoulli(w)) {
        return outcome;
    }
    auto candidate = detail::find_rewire_candidate(state, a, d, probe_limit, rng);
    if (!candidate) {
        return outcome;
    }
    state.graph.rewire_edge(a, b, *candidate);
    outcome.interaction = InteractionKind::Rewired;
    return outcome;
}

/// Opinion mutation: with probability p, a node (uniform, or the given
/// target) replaces its opinion with a fresh draw from the basal
/// distribution. Returns the mutated node, if any. Draw order: coin, node,
/// value.
inline std::optional<NodeId> mutate(SimState& state, double p,
                                    const DistributionSpec& basal, Pcg32& rng,
                                    std::optional<NodeId> forced_target = std::nullopt) {
    if (!rng.bernoulli(p)) {
        return std::nullopt;
    }
    NodeId m = forced_target
                   ? *forced_target
                   : rng.uniform_below(static_cast<std::uint32_t>(state.graph.node_count()));
    state.opinions[m] = sample(basal, rng);
    return m;
}

/// One asynchronous update: pick A and a random neighbor B; consensus if
/// their opinions are within d, otherwise a rewiring attempt; then one
/// mutation trial; then the step counter advances. An isolated A skips the
/// interaction but not the mutation trial.
inline StepOutcome step(SimState& state, const ModelParams& params, Pcg32& rng,
                        const StepOptions& options = {}) {
    StepOutcome outcome;
    NodeId a = random_node(state.graph, rng);
    std::optional<NodeId> b = random_neighbor(state.graph, a, rng);
    if (!b) {
        outcome.interaction = InteractionKind::IsolatedNode;
    } else if (std::fabs(state.opinions[a] - state.opinions[*b]) < params.d) {
        auto [na, nb] = consensus_update(state.opinions[a], state.opinions[*b],
                                         params.mu, params.d);
        state.opinions[a] = na;
        state.opinions[*b] = nb;
        outcome.interaction = InteractionKind::Consensus;
    } else {
        outcome = attempt_rewire(state, a, *b, params.w, params.d, rng,
                                 options.rewire_probe_limit);
    }
    std::optional<NodeId> forced =
        options.mutation_target == MutationTarget::Interacting
            ? std::optional<NodeId>(a)
            : std::nullopt;
    outcome.mutated = mutate(state, params.p, params.basal, rng, forced);
    ++state.step_count;
    return outcome;
}

/// Frozen copy of the state at one step: the opinion vector plus the edge
/// set in canonical order.
struct Snapshot {
    std::uint64_t step = 0;
    std::vector<double> opinions;
    std::vector<std::pair<NodeId, NodeId>> edges;

    static Snapshot of(const SimState& state) {
        return Snapshot{state.step_count, state.opinions, state.graph.edges()};
    }

    bool operator==(const Snapshot& o) const {
        return step == o.step && opinions == o.opinions && edges == o.edges;
    }
};

/// Initializes a fresh state and runs `total_steps` steps, snapshotting at
/// each scheduled index. The schedule must be sorted, start at 0 and stay
/// within total_steps; the snapshot at 0 is the pristine initial state.
inline std::vector<Snapshot> run(const ModelParams& params,
                                 std::uint64_t total_steps,
                                 const std::vector<std::uint64_t>& snapshot_schedule,
                                 Pcg32& rng, const StepOptions& options = {}) {
    if (snapshot_schedule.empty() || snapshot_schedule.front() != 0) {
        throw std::invalid_argument("run: snapshot schedule must include step 0");
    }
    if (!std::is_sorted(snapshot_schedule.begin(), snapshot_schedule.end())) {
        throw std::invalid_argument("run: snapshot schedule must be sorted");
    }
    if (std::adjacent_find(snapshot_schedule.begin(), snapshot_schedule.end()) !=
        snapshot_schedule.end()) {
        throw std::invalid_argument("run: snapshot schedule has duplicates");
    }
    if (snapshot_schedule.back() > total_steps) {
        throw std::invalid_argument("run: snapshot index exceeds total_steps");
    }
    SimState state = make_initial_state(params, rng);
    std::vector<Snapshot> snapshots;
    snapshots.reserve(snapshot_schedule.size());
    std::size_t next = 0;
    if (snapshot_schedule[next] == 0) {
        snapshots.push_back(Snapshot::of(state));
        ++next;
    }
    for (std::uint64_t t = 1; t <= total_steps; ++t) {
        step(state, params, rng, options);
        if (next < snapshot_schedule.size() && snapshot_schedule[next] == t) {
            snapshots.push_back(Snapshot::of(state));
            ++next;
        }
    }
    return snapshots;
}

}  // namespace opiniond
