#pragma once

// Exhaustive search for the optimal long-run average AoI at DoF level.

#include <optional>
#include <vector>

#include "aoi/engine.hpp"
#include "aoi/oracle/audit.hpp"
#include "aoi/oracle/graph.hpp"
#include "aoi/oracle/mean_cycle.hpp"

namespace aoi::oracle {

struct SearchResult {
    Rational value;               ///< summed average AoI of the best reachable cycle
    MeanCycleResult cycle;
    std::size_t nodes = 0, edges = 0;
    int delta_cap = 0;
    bool touches_cap = false;     ///< some state on the optimal cycle sits at a cap
};

struct SearchRun {
    Model model;
    Graph graph;
    SearchResult result;
};

inline SearchRun search_full(const SystemParams& p, Config cfg = {}, Solver solver = Solver::automatic,
                             std::optional<std::vector<std::int64_t>> initial = {}) {
    Model model(p, cfg);
    Graph g = build_graph(model, model.start_state(initial.value_or(default_initial_aoi(p))));
    SearchResult r;
    r.cycle = min_mean_cycle(g, solver);
    r.value = r.cycle.value;
    r.nodes = g.nodes();
    r.edges = g.edges();
    r.delta_cap = model.config().delta_cap;
    for (auto v : r.cycle.cycle) r.touches_cap = r.touches_cap || model.touches_cap(model.decode(g.codes[v]));
    return {std::move(model), std::move(g), std::move(r)};
}

inline SearchResult search(const SystemParams& p, Config cfg = {}, Solver solver = Solver::automatic) {
    return search_full(p, cfg, solver).result;
}

}  // namespace aoi::oracle
