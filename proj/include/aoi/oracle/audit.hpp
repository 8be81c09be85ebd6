#pragma once

// Structural checks on two-user schedules with N >= B > M: the AoI pattern floor, who gets
// served, how consecutive updates may overlap, and the segment decomposition of the
// work-conserving alternating scheme.

#include <algorithm>
#include <climits>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "aoi/engine.hpp"
#include "aoi/errors.hpp"
#include "aoi/oracle/graph.hpp"
#include "aoi/oracle/mean_cycle.hpp"
#include "aoi/policies.hpp"
#include "aoi/rational.hpp"
#include "aoi/theory.hpp"

namespace aoi::oracle {

struct UpdateRecord {
    int user = 0;
    std::int64_t gen = 0;
    std::int64_t delivery = 0;  ///< 0 if never delivered
    bool dropped = false;
    std::map<std::int64_t, int> dof;  ///< slot -> DoF received
};

/// Per-slot AoI and DoF usage of a schedule over slots 1..slots. Checks apply to slots in
/// [begin, end]; the rest is context.
struct ScheduleTrace {
    SystemParams params;
    std::int64_t slots = 0;
    std::vector<std::int64_t> aoi0;               ///< AoI at the end of slot 0
    std::vector<std::vector<std::int64_t>> aoi;   ///< aoi[user][t-1]
    std::vector<UpdateRecord> updates;
    std::int64_t begin = 1, end = 0;

    std::int64_t aoi_at(int user, std::int64_t t) const { return t == 0 ? aoi0[user] : aoi[user][t - 1]; }
    std::int64_t summed(std::int64_t t) const {
        std::int64_t s = 0;
        for (std::size_t k = 0; k < aoi.size(); ++k) s += aoi_at(static_cast<int>(k), t);
        return s;
    }
    std::vector<const UpdateRecord*> delivered() const {
        std::vector<const UpdateRecord*> out;
        for (const auto& u : updates)
            if (u.delivery > 0) out.push_back(&u);
        std::sort(out.begin(), out.end(), [](auto* a, auto* b) {
            return std::tie(a->delivery, a->gen, a->user) < std::tie(b->delivery, b->gen, b->user);
        });
        return out;
    }
};

/// Replays an optimal cycle with user identities. The cycle is repeated until every user is
/// back in its starting role, and that whole period is laid out `reps` times; checks cover
/// the middle copy.
inline ScheduleTrace unroll_cycle(const Model& model, const Graph& g, const MeanCycleResult& r, int reps = 3) {
    const auto& p = model.params();
    const int k = p.K;
    const std::int64_t len = static_cast<std::int64_t>(r.cycle.size());
    // find how many traversals restore the user-to-position map
    auto traverse = [&](std::vector<int>& pos2user, auto&& on_slot) {
        State s = model.decode(g.codes[r.cycle[0]]);
        for (std::int64_t n = 0; n < len; ++n) {
            const auto act = decode_action(g.action[r.edges[n]], k);
            const auto step = model.apply(s, act);
            if (!step) throw Error("unroll: cycle action rejected by the model");
            on_slot(s, act, *step, pos2user);
            std::vector<int> order(k);
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return step->users[a].next < step->users[b].next; });
            std::vector<int> next_map(k);
            State next(k);
            for (int j = 0; j < k; ++j) next[j] = step->users[order[j]].next, next_map[j] = pos2user[order[j]];
            pos2user = next_map;
            s = next;
        }
    };
    std::vector<int> ident(k);
    std::iota(ident.begin(), ident.end(), 0);
    std::vector<int> map = ident;
    int traversals = 0;
    do {
        traverse(map, [](auto&&...) {});
        ++traversals;
    } while (map != ident);

    ScheduleTrace tr;
    tr.params = p;
    const std::int64_t period = traversals * len;
    tr.slots = reps * period;
    tr.begin = (reps / 2) * period + 1;
    tr.end = tr.begin + period - 1;
    tr.aoi.assign(k, std::vector<std::int64_t>(tr.slots));
    const State s0 = model.decode(g.codes[r.cycle[0]]);
    std::vector<int> open(k, -1);
    for (int j = 0; j < k; ++j) {
        tr.aoi0.push_back(s0[j].delta);
        if (s0[j].c > 0) {
            open[j] = static_cast<int>(tr.updates.size());
            tr.updates.push_back({j, 1 - s0[j].a, 0, false, {}});
        }
    }
    std::int64_t t = 0;
    map = ident;
    for (int rep = 0; rep < reps * traversals; ++rep) {
        traverse(map, [&](const State&, const Action& act, const Step& st, const std::vector<int>& pos2user) {
            ++t;
            for (int j = 0; j < k; ++j) {
                const int u = pos2user[j];
                const auto& us = st.users[j];
                if (us.restarted && open[u] >= 0) tr.updates[open[u]].dropped = true, open[u] = -1;
                if (us.started) {
                    open[u] = static_cast<int>(tr.updates.size());
                    tr.updates.push_back({u, t, 0, false, {}});
                }
                if (act[j].m > 0 && open[u] >= 0) tr.updates[open[u]].dof[t] += act[j].m;
                if (us.delivered && open[u] >= 0) tr.updates[open[u]].delivery = t, open[u] = -1;
                if (us.dropped && open[u] >= 0) tr.updates[open[u]].dropped = true, open[u] = -1;
                tr.aoi[u][t - 1] = us.next.delta;
            }
        });
    }
    return tr;
}

/// Slot-by-slot record of an arbitrary decision function from slot 1, AoI taken from a
/// DoF-level run. `slots` is rounded up to a multiple of `period`.
inline ScheduleTrace trace_from_schedule(const SystemParams& p, std::int64_t period,
                                         const std::function<SlotDecision(std::int64_t)>& decide, std::int64_t slots,
                                         std::optional<std::vector<std::int64_t>> initial = {}) {
    slots = (slots + period - 1) / period * period;
    RunOptions o;
    o.level = Level::dof;
    o.T = slots;
    o.W = 0;
    o.initial_aoi = initial;
    const auto run_result = run_schedule(p, period, decide, o);
    ScheduleTrace tr;
    tr.params = p;
    tr.slots = slots;
    tr.begin = 1;
    tr.end = slots;
    tr.aoi0 = initial.value_or(default_initial_aoi(p));
    tr.aoi = run_result.trace.per_user;
    std::map<std::pair<int, std::int64_t>, std::size_t> idx;
    for (std::int64_t t = 1; t <= slots; ++t) {
        for (const auto& a : decide(t).allocations) {
            auto [it, fresh] = idx.emplace(std::make_pair(a.user, a.gen_slot), tr.updates.size());
            if (fresh) tr.updates.push_back({a.user, a.gen_slot, 0, false, {}});
            auto& u = tr.updates[it->second];
            u.dof[t] += a.count;
            int total = 0;
            for (auto& [s, m] : u.dof) total += m;
            if (total == p.B) u.delivery = t;
        }
    }
    return tr;
}

inline ScheduleTrace trace_from_policy(const Policy& pol, std::int64_t slots, std::optional<std::vector<std::int64_t>> initial = {}) {
    return trace_from_schedule(pol.params(), pol.period(), [&](std::int64_t t) { return pol.decide(t); }, slots, std::move(initial));
}

struct Violation {
    std::int64_t slot = 0;
    std::string check;
    std::string detail;
};

struct AuditReport {
    int i = 0, j = 0;
    AoiPattern floor;             ///< the claimed element-wise minimum
    AoiPattern observed;          ///< element-wise minimum of sorted patterns in the window
    std::int64_t deliveries = 0;
    std::int64_t chunks_type1 = 0, chunks_type2 = 0;
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

inline std::pair<int, int> two_user_ij(const SystemParams& p) {
    if (p.K != 2 || p.N < p.B || p.M >= p.B) throw NotApplicable("audits need K = 2 and N >= B > M; got " + p.str());
    return ij_of(p.M, p.B);
}

inline AuditReport pattern_audit(const ScheduleTrace& tr) {
    const auto& p = tr.params;
    AuditReport rep;
    std::tie(rep.i, rep.j) = two_user_ij(p);
    const int i = rep.i;
    rep.floor = min_pattern(p.M, p.B);
    auto fail = [&](std::int64_t t, const char* check, std::string d) { rep.violations.push_back({t, check, std::move(d)}); };

    // AoI pattern floor and attainment of i+1
    rep.observed = {INT32_MAX, INT32_MAX};
    for (std::int64_t t = tr.begin; t <= tr.end; ++t) {
        auto a = tr.aoi_at(0, t), b = tr.aoi_at(1, t);
        if (a > b) std::swap(a, b);
        rep.observed.low = std::min<int>(rep.observed.low, static_cast<int>(a));
        rep.observed.high = std::min<int>(rep.observed.high, static_cast<int>(b));
        if (a < rep.floor.low || b < rep.floor.high)
            fail(t, "pattern-floor", "pattern (" + std::to_string(a) + "," + std::to_string(b) + ") below floor");
    }
    if (rep.observed.low != i + 1)
        fail(tr.begin, "min-aoi", "smallest per-user AoI " + std::to_string(rep.observed.low) + " differs from " + std::to_string(i + 1));

    const auto del = tr.delivered();
    // single deliveries go to the user whose AoI was weakly higher before the slot
    std::map<std::int64_t, std::vector<const UpdateRecord*>> by_slot;
    for (auto* u : del) by_slot[u->delivery].push_back(u);
    for (auto& [t, us] : by_slot) {
        if (t < tr.begin || t > tr.end) continue;
        rep.deliveries += static_cast<std::int64_t>(us.size());
        if (us.size() != 1) continue;
        const int u = us[0]->user;
        if (tr.aoi_at(u, t - 1) < tr.aoi_at(1 - u, t - 1))
            fail(t, "higher-aoi-first", "user " + std::to_string(u + 1) + " served while holding the lower AoI");
    }

    // consecutive deliveries: disjoint-in-time or nested with full-DoF service of the inner one
    auto full_service = [&](const UpdateRecord& w) {
        for (std::int64_t t = w.gen; t < w.delivery; ++t) {
            auto it = w.dof.find(t);
            if (it == w.dof.end() || it->second != p.M) return false;
        }
        return true;
    };
    auto ordered = [&](const UpdateRecord& w1, const UpdateRecord& w2) {
        const bool s1 = w1.gen < w1.delivery && w1.delivery <= w2.gen && w2.gen < w2.delivery;
        const bool s2 = w2.gen < w1.gen && w1.gen < w1.delivery && w1.delivery <= w2.delivery && full_service(w1);
        return s1 || s2;
    };
    for (std::size_t n = 0; n + 1 < del.size(); ++n) {
        const auto& w1 = *del[n];
        const auto& w2 = *del[n + 1];
        if (w1.delivery < tr.begin || w1.delivery > tr.end) continue;
        const bool ok = ordered(w1, w2) || (w1.delivery == w2.delivery && ordered(w2, w1));
        if (!ok)
            fail(w1.delivery, "delivery-order",
                 "updates generated at " + std::to_string(w1.gen) + " and " + std::to_string(w2.gen) + " overlap irregularly");
    }

    // resource chunks: delivered updates grouped by strictly overlapping transmission spans
    std::vector<std::size_t> comp(del.size());
    std::iota(comp.begin(), comp.end(), 0);
    std::function<std::size_t(std::size_t)> root = [&](std::size_t x) { return comp[x] == x ? x : comp[x] = root(comp[x]); };
    for (std::size_t a = 0; a < del.size(); ++a)
        for (std::size_t b = a + 1; b < del.size(); ++b)
            if (del[a]->gen < del[b]->delivery && del[b]->gen < del[a]->delivery) comp[root(a)] = root(b);
    std::map<std::size_t, std::vector<const UpdateRecord*>> groups;
    for (std::size_t a = 0; a < del.size(); ++a) groups[root(a)].push_back(del[a]);
    for (auto& [r0, g] : groups) {
        std::int64_t lo = INT64_MAX, hi = 0;
        for (auto* u : g) lo = std::min(lo, u->gen), hi = std::max(hi, u->delivery);
        if (lo < tr.begin || hi > tr.end) continue;
        if (g.size() == 1) {
            ++rep.chunks_type1;
            continue;
        }
        if (g.size() == 2) {
            const auto& w1 = *g[0];  // first delivered
            const auto& w2 = *g[1];
            const bool nested = w2.gen < w1.gen && w1.delivery <= w2.delivery;
            if (nested && w1.delivery - w1.gen + 1 == i + 1) {
                ++rep.chunks_type2;
                continue;
            }
        }
        fail(lo, "chunk-type", std::to_string(g.size()) + " overlapping updates form neither chunk type");
    }
    return rep;
}

struct SegmentStats {
    int i = 0, j = 0;
    std::vector<std::int64_t> deliveries;        ///< D(1), D(2), ...
    std::vector<std::int64_t> gaps;              ///< D(n) - D(n-1), D(0) = 0
    std::vector<std::size_t> U;                  ///< 1-based indices n with gap i+1
    std::vector<std::pair<std::int64_t, std::int64_t>> segments;  ///< [first, last] slot
    std::vector<std::int64_t> lengths;
    std::vector<Rational> averages;
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

/// Segment decomposition of a schedule that starts at slot 1 with no earlier deliveries.
inline SegmentStats segment_statistics(const ScheduleTrace& tr) {
    SegmentStats st;
    std::tie(st.i, st.j) = two_user_ij(tr.params);
    const int i = st.i, j = st.j;
    const auto bound = segment_lower_bound(i, j);
    auto fail = [&](std::int64_t t, const char* check, std::string d) { st.violations.push_back({t, check, std::move(d)}); };
    std::int64_t prev = 0;
    for (auto* u : tr.delivered()) {
        st.deliveries.push_back(u->delivery);
        st.gaps.push_back(u->delivery - prev);
        if (st.gaps.back() == i + 1) st.U.push_back(st.deliveries.size());
        if (st.gaps.back() != i && st.gaps.back() != i + 1)
            fail(u->delivery, "gap", "inter-delivery gap " + std::to_string(st.gaps.back()));
        prev = u->delivery;
    }
    if (st.U.empty() || st.U[0] != 1) fail(0, "first-segment", "first delivery does not open a segment");
    if (st.U.size() >= 2 && st.U[1] != static_cast<std::size_t>(j + 1))
        fail(0, "first-segment", "second segment starts at delivery " + std::to_string(st.U[1]));
    auto D = [&](std::size_t n) { return n == 0 ? std::int64_t{0} : st.deliveries[n - 1]; };
    for (std::size_t m = 0; m + 1 < st.U.size(); ++m) {
        const auto du = st.U[m + 1] - st.U[m];
        if (du != static_cast<std::size_t>(j) && du != static_cast<std::size_t>(j + 1))
            fail(D(st.U[m]), "segment-spacing", "U difference " + std::to_string(du));
        const auto first = D(st.U[m] - 1) + 1, last = D(st.U[m + 1] - 1);
        if (last > tr.slots) break;
        st.segments.push_back({first, last});
        const auto len = last - first + 1;
        st.lengths.push_back(len);
        if (len != static_cast<std::int64_t>(i) * j + 1 && len != static_cast<std::int64_t>(j + 1) * i + 1)
            fail(first, "segment-length", "segment of length " + std::to_string(len));
        std::int64_t sum = 0;
        std::vector<std::int64_t> prefix{0};
        for (auto t = first; t <= last; ++t) sum += tr.summed(t), prefix.push_back(sum);
        st.averages.emplace_back(sum, len);
        if (st.averages.back() < bound) fail(first, "segment-average", "average " + st.averages.back().str() + " below bound");
        // running average over the first l*i+1 slots does not increase with l
        std::optional<Rational> last_avg;
        for (std::int64_t l = 1; l <= static_cast<std::int64_t>(du) && l * i + 1 <= len; ++l) {
            const Rational avg(prefix[l * i + 1], l * i + 1);
            if (last_avg && avg > *last_avg) fail(first, "running-average", "prefix average rises at l = " + std::to_string(l));
            last_avg = avg;
        }
    }
    return st;
}

inline std::vector<AoiPattern> sorted_patterns(const ScheduleTrace& tr, std::int64_t first, std::int64_t last) {
    std::vector<AoiPattern> out;
    for (auto t = first; t <= last; ++t) {
        auto a = static_cast<int>(tr.aoi_at(0, t)), b = static_cast<int>(tr.aoi_at(1, t));
        out.push_back({std::min(a, b), std::max(a, b)});
    }
    return out;
}

struct TableReproduction {
    int i = 0, j = 0;
    std::size_t short_segments = 0, long_segments = 0;
    std::size_t short_matches = 0, long_matches = 0;
    std::vector<AoiPattern> short_observed, long_observed;  ///< first instance of each
    bool ok() const { return short_matches == short_segments && long_matches == long_segments && short_segments + long_segments > 0; }
};

/// Compares every segment of the work-conserving alternating trace with the symbolic
/// minimum-pattern tables (j >= 2).
inline TableReproduction table_reproduction(const SystemParams& p, std::int64_t slots) {
    TableReproduction rep;
    std::tie(rep.i, rep.j) = two_user_ij(p);
    if (rep.j < 2) throw NotApplicable("segment tables need j >= 2");
    const auto tr = trace_from_policy(make_policy(PolicyKind::pi1, p), slots);
    const auto st = segment_statistics(tr);
    const auto short_t = table_short_segment(rep.i, rep.j), long_t = table_long_segment(rep.i, rep.j);
    for (const auto& [first, last] : st.segments) {
        const auto obs = sorted_patterns(tr, first, last);
        if (obs.size() == short_t.size()) {
            if (rep.short_segments++ == 0) rep.short_observed = obs;
            rep.short_matches += obs == short_t;
        } else if (obs.size() == long_t.size()) {
            if (rep.long_segments++ == 0) rep.long_observed = obs;
            rep.long_matches += obs == long_t;
        }
    }
    return rep;
}

/// AoI patterns over the first 2i+1 slots of a long segment served by a nested pair: the
/// lower-AoI user's update is generated one slot before the segment and delivered at its
/// slot 2i+1; the other user's update is generated at slot gamma+1 and delivered i slots later.
inline std::vector<AoiPattern> nested_chunk_dynamics(int i, int j, int gamma) {
    const auto start = j == 1 ? AoiPattern{i + 1, 2 * i + 2} : AoiPattern{i + 1, 2 * i + 1};
    std::int64_t lo = start.low, hi = start.high;  // lo: outer update's user
    std::vector<AoiPattern> out;
    for (int t = 1; t <= 2 * i + 1; ++t) {
        ++lo, ++hi;
        if (t == gamma + 1 + i) hi = std::min<std::int64_t>(hi, i + 1);
        if (t == 2 * i + 1) lo = std::min<std::int64_t>(lo, 2 * i + 2);
        out.push_back({static_cast<int>(std::min(lo, hi)), static_cast<int>(std::max(lo, hi))});
    }
    return out;
}

/// Summed average AoI over a block of v idle slots followed by u updates sent back to back
/// with all DoF, alternating users, from the minimum pattern with the higher-AoI user first.
inline Rational block_average(const SystemParams& p, int u, int v) {
    const auto mp = min_pattern(p.M, p.B);
    std::int64_t d[2] = {mp.high, mp.low};
    const std::int64_t len = v + (static_cast<std::int64_t>(u) * p.B + p.M - 1) / p.M;
    std::int64_t sum = 0;
    for (std::int64_t t = 1; t <= len; ++t) {
        ++d[0], ++d[1];
        for (int n = 0; n < u; ++n) {
            const std::int64_t gen = v + static_cast<std::int64_t>(n) * p.B / p.M + 1;
            const std::int64_t del = v + ((static_cast<std::int64_t>(n) + 1) * p.B + p.M - 1) / p.M;
            if (del == t) d[n % 2] = std::min(d[n % 2], del - gen + 1);
        }
        sum += d[0] + d[1];
    }
    return Rational(sum, len);
}

}  // namespace aoi::oracle
