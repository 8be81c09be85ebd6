#pragma once

// Minimum mean cycle over the reachable part of a Graph, in exact arithmetic.
// howard(): policy iteration, fast on large graphs. karp(): the O(VE) dynamic program,
// kept for small graphs and cross-checking.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "aoi/errors.hpp"
#include "aoi/oracle/graph.hpp"
#include "aoi/rational.hpp"

namespace aoi::oracle {

struct MeanCycleResult {
    Rational value;                       ///< minimum mean edge cost over cycles reachable from start
    std::vector<std::uint32_t> cycle;     ///< nodes, rotated to start at the smallest id
    std::vector<std::uint64_t> edges;     ///< edges[n] leaves cycle[n]
    std::int64_t cost_sum = 0;
};

enum class Solver { automatic, howard, karp };

inline std::string_view solver_name(Solver s) {
    switch (s) {
        case Solver::automatic: return "auto";
        case Solver::howard: return "howard";
        case Solver::karp: return "karp";
    }
    return "?";
}
inline Solver parse_solver(std::string_view s) {
    for (auto v : {Solver::automatic, Solver::howard, Solver::karp})
        if (solver_name(v) == s) return v;
    throw InvalidParams("unknown solver '" + std::string(s) + "'");
}

namespace detail {

inline MeanCycleResult finish_cycle(const Graph& g, std::vector<std::uint32_t> cyc, std::vector<std::uint64_t> edges) {
    const auto lo = std::min_element(cyc.begin(), cyc.end()) - cyc.begin();
    std::rotate(cyc.begin(), cyc.begin() + lo, cyc.end());
    std::rotate(edges.begin(), edges.begin() + lo, edges.end());
    MeanCycleResult r;
    for (auto e : edges) r.cost_sum += g.cost[e];
    r.value = Rational(r.cost_sum, static_cast<std::int64_t>(cyc.size()));
    r.cycle = std::move(cyc);
    r.edges = std::move(edges);
    return r;
}

// a/b < c/d with positive b, d
inline bool less_frac(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d) {
    return static_cast<__int128>(a) * d < static_cast<__int128>(c) * b;
}

}  // namespace detail

inline MeanCycleResult howard(const Graph& g) {
    const std::size_t n = g.nodes();
    if (n == 0 || g.edges() == 0) throw AcyclicGraph("graph has no edges");
    std::vector<std::uint64_t> pol(n);
    for (std::size_t v = 0; v < n; ++v) {
        if (g.offset[v] == g.offset[v + 1]) throw AcyclicGraph("node without successor");
        auto best = g.offset[v];
        for (auto e = g.offset[v]; e < g.offset[v + 1]; ++e)
            if (g.cost[e] < g.cost[best]) best = e;
        pol[v] = best;
    }
    // eta(v) = S[v] / L[v]; bias h(v) = H[v] / L[v]
    std::vector<std::int64_t> S(n), L(n), H(n);
    std::vector<std::uint8_t> mark(n);
    std::vector<std::uint32_t> path;
    auto evaluate = [&] {
        std::fill(mark.begin(), mark.end(), 0);  // 0 new, 1 on current path, 2 done
        for (std::size_t s0 = 0; s0 < n; ++s0) {
            if (mark[s0]) continue;
            path.clear();
            std::uint32_t v = static_cast<std::uint32_t>(s0);
            while (mark[v] == 0) {
                mark[v] = 1;
                path.push_back(v);
                v = g.target[pol[v]];
            }
            std::size_t stop = path.size();
            if (mark[v] == 1) {
                // new cycle: from v to the end of path
                const auto at = static_cast<std::size_t>(std::find(path.begin(), path.end(), v) - path.begin());
                std::int64_t sum = 0;
                std::uint32_t anchor = v;
                for (std::size_t i = at; i < path.size(); ++i) {
                    sum += g.cost[pol[path[i]]];
                    anchor = std::min(anchor, path[i]);
                }
                const auto len = static_cast<std::int64_t>(path.size() - at);
                // walk backwards around the cycle from the anchor
                const auto apos = static_cast<std::size_t>(std::find(path.begin() + at, path.end(), anchor) - path.begin());
                S[anchor] = sum, L[anchor] = len, H[anchor] = 0;
                mark[anchor] = 2;
                for (std::size_t k = 1; k < static_cast<std::size_t>(len); ++k) {
                    const std::size_t idx = at + (apos - at + static_cast<std::size_t>(len) - k) % static_cast<std::size_t>(len);
                    const auto u = path[idx];
                    const auto w = g.target[pol[u]];
                    S[u] = sum, L[u] = len;
                    H[u] = len * g.cost[pol[u]] - sum + H[w];
                    mark[u] = 2;
                }
                stop = at;
            }
            for (std::size_t i = stop; i-- > 0;) {
                const auto u = path[i];
                const auto w = g.target[pol[u]];
                S[u] = S[w], L[u] = L[w];
                H[u] = L[w] * g.cost[pol[u]] - S[w] + H[w];
                mark[u] = 2;
            }
        }
    };
    for (;;) {
        evaluate();
        bool changed = false;
        for (std::size_t v = 0; v < n; ++v) {
            auto best = pol[v];
            for (auto e = g.offset[v]; e < g.offset[v + 1]; ++e) {
                const auto u = g.target[e], b = g.target[best];
                if (detail::less_frac(S[u], L[u], S[b], L[b])) best = e;
            }
            const auto b = g.target[best];
            if (detail::less_frac(S[b], L[b], S[v], L[v])) pol[v] = best, changed = true;
        }
        if (changed) continue;
        for (std::size_t v = 0; v < n; ++v) {
            // candidate value via edge e to u with eta(u) == eta(v): (L_u w - S_u + H_u) / L_u
            std::uint64_t best = pol[v];
            std::int64_t bn = H[v], bd = L[v];
            for (auto e = g.offset[v]; e < g.offset[v + 1]; ++e) {
                const auto u = g.target[e];
                if (static_cast<__int128>(S[u]) * L[v] != static_cast<__int128>(S[v]) * L[u]) continue;
                const std::int64_t cn = L[u] * g.cost[e] - S[u] + H[u];
                if (detail::less_frac(cn, L[u], bn, bd)) best = e, bn = cn, bd = L[u];
            }
            if (best != pol[v]) pol[v] = best, changed = true;
        }
        if (!changed) break;
    }
    // the cycle the start node falls into
    std::vector<std::int64_t> seen(n, -1);
    std::vector<std::uint32_t> walk;
    std::uint32_t v = g.start;
    while (seen[v] < 0) {
        seen[v] = static_cast<std::int64_t>(walk.size());
        walk.push_back(v);
        v = g.target[pol[v]];
    }
    std::vector<std::uint32_t> cyc(walk.begin() + seen[v], walk.end());
    std::vector<std::uint64_t> edges;
    for (auto u : cyc) edges.push_back(pol[u]);
    auto r = detail::finish_cycle(g, std::move(cyc), std::move(edges));
    if (r.value != Rational(S[g.start], L[g.start])) throw Error("howard: inconsistent cycle value");
    return r;
}

/// Karp's algorithm from the start node. Memory is O(V^2); refuse beyond `max_nodes`.
inline MeanCycleResult karp(const Graph& g, std::size_t max_nodes = 4000) {
    const std::size_t n = g.nodes();
    if (n > max_nodes)
        throw CapacityExceeded("karp: " + std::to_string(n) + " nodes exceed the dense-table limit of " + std::to_string(max_nodes));
    if (g.edges() == 0) throw AcyclicGraph("graph has no edges");
    constexpr std::int64_t inf = std::numeric_limits<std::int64_t>::max();
    std::vector<std::int64_t> D((n + 1) * n, inf);
    std::vector<std::uint64_t> via((n + 1) * n, 0);
    auto d = [&](std::size_t k, std::size_t v) -> std::int64_t& { return D[k * n + v]; };
    d(0, g.start) = 0;
    for (std::size_t k = 1; k <= n; ++k)
        for (std::size_t v = 0; v < n; ++v) {
            const auto dv = d(k - 1, v);
            if (dv == inf) continue;
            for (auto e = g.offset[v]; e < g.offset[v + 1]; ++e) {
                auto& t = d(k, g.target[e]);
                if (dv + g.cost[e] < t) t = dv + g.cost[e], via[k * n + g.target[e]] = e;
            }
        }
    bool found = false;
    std::int64_t best_num = 0, best_den = 1;
    std::size_t best_v = 0;
    for (std::size_t v = 0; v < n; ++v) {
        if (d(n, v) == inf) continue;
        bool have = false;
        std::int64_t wn = 0, wd = 1;
        for (std::size_t k = 0; k < n; ++k) {
            if (d(k, v) == inf) continue;
            const std::int64_t num = d(n, v) - d(k, v), den = static_cast<std::int64_t>(n - k);
            if (!have || detail::less_frac(wn, wd, num, den)) wn = num, wd = den, have = true;
        }
        if (have && (!found || detail::less_frac(wn, wd, best_num, best_den))) best_num = wn, best_den = wd, best_v = v, found = true;
    }
    if (!found) throw AcyclicGraph("no cycle reachable from start");
    const Rational lambda(best_num, best_den);
    // the n-edge walk into best_v repeats a node; a cycle on it has mean lambda
    std::vector<std::uint32_t> nodes(n + 1);
    std::vector<std::uint64_t> in_edge(n + 1);
    std::size_t v = best_v;
    for (std::size_t k = n; k > 0; --k) {
        nodes[k] = static_cast<std::uint32_t>(v);
        in_edge[k] = via[k * n + v];
        // source of in_edge[k]: the node whose CSR row contains it
        v = static_cast<std::size_t>(std::upper_bound(g.offset.begin(), g.offset.end(), in_edge[k]) - g.offset.begin()) - 1;
    }
    nodes[0] = static_cast<std::uint32_t>(v);
    std::vector<std::int64_t> last(n, -1);
    for (std::size_t k = 0; k <= n; ++k) {
        if (last[nodes[k]] >= 0) {
            const auto from = static_cast<std::size_t>(last[nodes[k]]);
            std::vector<std::uint32_t> cyc(nodes.begin() + from, nodes.begin() + k);
            std::vector<std::uint64_t> edges(in_edge.begin() + from + 1, in_edge.begin() + k + 1);
            auto r = detail::finish_cycle(g, std::move(cyc), std::move(edges));
            if (r.value == lambda) return r;
        }
        last[nodes[k]] = static_cast<std::int64_t>(k);
    }
    throw Error("karp: no cycle of mean " + lambda.str() + " on the critical walk");
}

inline MeanCycleResult min_mean_cycle(const Graph& g, Solver s = Solver::automatic) {
    if (s == Solver::karp) return karp(g);
    return howard(g);
}

}  // namespace aoi::oracle
