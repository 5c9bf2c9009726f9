#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "opiniond/rng.hpp"

namespace opiniond {

using NodeId = std::uint32_t;

/// Undirected simple graph on a fixed node set {0..n-1} whose edge set
/// mutates through rewiring. Maintains symmetry, no self loops, no
/// multi-edges and a cached edge count at all times.
///
/// Layout is chosen for the hot loop: adjacency lives in one flat arena of
/// per-node slices (O(1) uniform sampling, one pointer hop per neighbor
/// pick), and a single hash map keyed by the packed edge stores each
/// edge's position inside both endpoint slices (O(1) expected membership,
/// insert and delete via swap-pop). Positions are slice-relative, so a
/// slice that outgrows its capacity relocates to the arena tail without
/// touching the index. Tens of millions of steps hit only the arena, the
/// opinion vector and the map.
class AdaptiveGraph {
public:
    explicit AdaptiveGraph(std::size_t node_count, std::uint32_t capacity_hint = 8)
        : slices_(node_count), capacity_(node_count) {
        if (node_count < 1) {
            throw std::invalid_argument("AdaptiveGraph: node_count must be >= 1");
        }
        if (capacity_hint < 2) {
            capacity_hint = 2;
        }
        store_.resize(node_count * static_cast<std::size_t>(capacity_hint));
        for (std::size_t v = 0; v < node_count; ++v) {
            slices_[v] = Slice{static_cast<std::uint32_t>(v * capacity_hint), 0};
            capacity_[v] = capacity_hint;
        }
    }

    std::size_t node_count() const { return slices_.size(); }

    std::size_t edge_count() const { return edge_index_.size(); }

    std::size_t degree(NodeId v) const { return slices_.at(v).degree; }

    bool has_edge(NodeId u, NodeId v) const {
        if (u >= node_count() || v >= node_count()) {
            throw std::invalid_argument("has_edge: node id out of range");
        }
        return edge_index_.find(edge_key(u, v)) != edge_index_.end();
    }

    std::span<const NodeId> neighbors(NodeId v) const {
        const Slice& s = slices_.at(v);
        return {store_.data() + s.offset, s.degree};
    }

    void reserve_edges(std::size_t edges) { edge_index_.reserve(edges); }

    /// Returns false (and changes nothing) if the edge already exists.
    bool add_edge(NodeId u, NodeId v) {
        if (u == v) {
            throw std::invalid_argument("add_edge: self-loop");
        }
        if (u >= node_count() || v >= node_count()) {
            throw std::invalid_argument("add_edge: node id out of range");
        }
        auto [it, inserted] = edge_index_.try_emplace(edge_key(u, v), 0);
        if (!inserted) {
            return false;
        }
        NodeId lo = std::min(u, v);
        NodeId hi = std::max(u, v);
        it->second = pack_positions(slices_[lo].degree, slices_[hi].degree);
        append(lo, hi);
        append(hi, lo);
        return true;
    }

    /// Moves a's edge {a, old_peer} to {a, new_peer}. The edge count is
    /// unchanged by construction. Throws on any precondition violation so
    /// callers cannot silently corrupt the edge set.
    void rewire_edge(NodeId a, NodeId old_peer, NodeId new_peer) {
        if (new_peer == a) {
            throw std::invalid_argument("rewire_edge: target would be a self-loop");
        }
        if (!has_edge(a, old_peer)) {
            throw std::invalid_argument("rewire_edge: {a, old} is not an edge");
        }
        if (has_edge(a, new_peer)) {
            throw std::invalid_argument("rewire_edge: {a, new} already an edge");
        }
        remove_edge_unchecked(a, old_peer);
        add_edge(a, new_peer);
    }

    /// Edges as (u, v) with u < v, ascending — the canonical order used by
    /// the text export so runs can be diffed byte for byte.
    std::vector<std::pair<NodeId, NodeId>> edges() const {
        std::vector<std::pair<NodeId, NodeId>> out;
        out.reserve(edge_count());
        for (NodeId u = 0; u < node_count(); ++u) {
            for (NodeId v : neighbors(u)) {
                if (u < v) {
                    out.emplace_back(u, v);
                }
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    /// One line per edge, "u v", u < v, ascending.
    void write_edge_list(std::ostream& os) const {
        for (const auto& [u, v] : edges()) {
            os << u << ' ' << v << '\n';
        }
    }

    /// Full coherence sweep: adjacency symmetry, no self-loops, and exact
    /// agreement between the slices and the edge index (keys and stored
    /// positions). O(n + m); meant for tests, not the hot loop.
    bool check_invariants() const {
        std::size_t half_degree_sum = 0;
        for (NodeId u = 0; u < node_count(); ++u) {
            std::span<const NodeId> adj = neighbors(u);
            for (std::size_t i = 0; i < adj.size(); ++i) {
                NodeId v = adj[i];
                if (v == u || v >= node_count()) {
                    return false;
                }
                auto it = edge_index_.find(edge_key(u, v));
                if (it == edge_index_.end()) {
                    return false;
                }
                auto [pos_lo, pos_hi] = unpack_positions(it->second);
                std::size_t expected = u < v ? pos_lo : pos_hi;
                if (expected != i) {
                    return false;
                }
            }
            half_degree_sum += adj.size();
        }
        return half_degree_sum == 2 * edge_count();
    }

private:
    static std::uint64_t edge_key(NodeId u, NodeId v) {
        NodeId lo = std::min(u, v);
        NodeId hi = std::max(u, v);
        return (static_cast<std::uint64_t>(lo) << 32) | hi;
    }

    static std::uint64_t pack_positions(std::uint32_t pos_lo, std::uint32_t pos_hi) {
        return (static_cast<std::uint64_t>(pos_lo) << 32) | pos_hi;
    }

    static std::pair<std::uint32_t, std::uint32_t> unpack_positions(std::uint64_t v) {
        return {static_cast<std::uint32_t>(v >> 32),
                static_cast<std::uint32_t>(v & 0xffffffffu)};
    }

    /// Appends peer to v's slice, relocating the slice to the arena tail
    /// with doubled capacity when full. Slice-relative positions survive
    /// relocation untouched.
    void append(NodeId v, NodeId peer) {
        Slice& s = slices_[v];
        if (s.degree == capacity_[v]) {
            std::uint32_t new_capacity = capacity_[v] * 2;
            std::uint32_t new_offset = static_cast<std::uint32_t>(store_.size());
            store_.resize(store_.size() + new_capacity);
            std::copy_n(store_.begin() + s.offset, s.degree,
                        store_.begin() + new_offset);
            s.offset = new_offset;
            capacity_[v] = new_capacity;
        }
        store_[s.offset + s.degree] = peer;
        ++s.degree;
    }

    std::uint32_t position_of(NodeId endpoint, NodeId peer) const {
        auto [pos_lo, pos_hi] =
            unpack_positions(edge_index_.at(edge_key(endpoint, peer)));
        return endpoint < peer ? pos_lo : pos_hi;
    }

    void set_position(NodeId endpoint, NodeId peer, std::uint32_t pos) {
        auto& value = edge_index_.at(edge_key(endpoint, peer));
        auto [pos_lo, pos_hi] = unpack_positions(value);
        if (endpoint < peer) {
            value = pack_positions(pos, pos_hi);
        } else {
            value = pack_positions(pos_lo, pos);
        }
    }

    /// Swap-pop `peer` out of `endpoint`'s slice, fixing the displaced
    /// edge's stored position.
    void detach(NodeId endpoint, NodeId peer, std::uint32_t pos) {
        Slice& s = slices_[endpoint];
        NodeId* slice = store_.data() + s.offset;
        NodeId moved = slice[s.degree - 1];
        slice[pos] = moved;
        --s.degree;
        if (moved != peer) {
            set_position(endpoint, moved, pos);
        }
    }

    void remove_edge_unchecked(NodeId u, NodeId v) {
        std::uint32_t pos_u = position_of(u, v);
        std::uint32_t pos_v = position_of(v, u);
        detach(u, v, pos_u);
        detach(v, u, pos_v);
        edge_index_.erase(edge_key(u, v));
    }

    // Hot 8-byte header per node; capacities live in a cold array touched
    // only when a slice grows.
    struct Slice {
        std::uint32_t offset = 0;
        std::uint32_t degree = 0;
    };

    std::vector<NodeId> store_;
    std::vector<Slice> slices_;
    std::vector<std::uint32_t> capacity_;
    std::unordered_map<std::uint64_t, std::uint64_t> edge_index_;
};

/// G(n,p) Erdős–Rényi generation with p = k_avg/(n-1): each unordered pair
/// is an edge by an independent coin flip. Uses the geometric-skip
/// enumeration so generation costs O(n + m) rather than O(n^2) pair coins.
inline AdaptiveGraph erdos_renyi(std::size_t n, double k_avg, Pcg32& rng) {
    if (n < 2) {
        throw std::invalid_argument("erdos_renyi: n must be >= 2");
    }
    if (k_avg < 0.0 || k_avg > static_cast<double>(n - 1)) {
        throw std::invalid_argument("erdos_renyi: k_avg must be in [0, n-1]");
    }
    auto capacity_hint = static_cast<std::uint32_t>(
        k_avg + 2.0 * std::sqrt(k_avg + 1.0) + 2.0);
    AdaptiveGraph g(n, capacity_hint);
    double p = k_avg / static_cast<double>(n - 1);
    if (p <= 0.0) {
        return g;
    }
    if (p >= 1.0) {
        for (NodeId v = 1; v < n; ++v) {
            for (NodeId w = 0; w < v; ++w) {
                g.add_edge(v, w);
            }
        }
        return g;
    }
    g.reserve_edges(static_cast<std::size_t>(
        1.25 * p * 0.5 * static_cast<double>(n) * static_cast<double>(n - 1)));
    // Batagelj–Brandes skip sampling over pairs (v, w), w < v, in
    // lexicographic order. Gap lengths are geometric with parameter p.
    double log1mp = std::log1p(-p);
    std::int64_t v = 1;
    std::int64_t w = -1;
    std::int64_t nn = static_cast<std::int64_t>(n);
    while (v < nn) {
        double r = rng.uniform01();
        w += 1 + static_cast<std::int64_t>(std::floor(std::log1p(-r) / log1mp));
        while (w >= v && v < nn) {
            w -= v;
            ++v;
        }
        if (v < nn) {
            g.add_edge(static_cast<NodeId>(v), static_cast<NodeId>(w));
        }
    }
    return g;
}

/// Uniform over {0..n-1}.
inline NodeId random_node(const AdaptiveGraph& g, Pcg32& rng) {
    return rng.uniform_below(static_cast<std::uint32_t>(g.node_count()));
}

/// Uniform over the neighbors of v; nullopt when v is isolated.
inline std::optional<NodeId> random_neighbor(const AdaptiveGraph& g, NodeId v,
                                             Pcg32& rng) {
    std::span<const NodeId> adj = g.neighbors(v);
    if (adj.empty()) {
        return std::nullopt;
    }
    return adj[rng.uniform_below(static_cast<std::uint32_t>(adj.size()))];
}

}  // namespace opiniond
