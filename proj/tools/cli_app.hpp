#pragma once

// Subcommand bodies of the `aoi` tool. Each writes its report to `out` and returns the
// process exit code: 0 pass, 1 mismatch, 2 not covered / usage.

#include <atomic>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "aoi/engine.hpp"
#include "aoi/oracle.hpp"
#include "aoi/policies.hpp"
#include "aoi/theory.hpp"

namespace aoi::cli {

using nlohmann::ordered_json;

enum class Format { json, csv };

inline Format parse_format(std::string_view s) {
    if (s == "json") return Format::json;
    if (s == "csv") return Format::csv;
    throw InvalidParams("unknown format '" + std::string(s) + "'");
}

struct RunConfig {
    SystemParams params;
    std::string policy = "auto";
    Level level = Level::dof;
    std::int64_t slots = 0;    ///< 0: engine default
    std::int64_t warmup = -1;  ///< -1: engine default
    std::uint64_t seed = 1;
    Format format = Format::json;
};

inline ordered_json to_json(const Rational& r) {
    return {{"num", r.num()}, {"den", r.den()}, {"value", r.to_double()}};
}

inline ordered_json to_json(const SystemParams& p) {
    return {{"K", p.K}, {"M", p.M}, {"N", p.N}, {"B", p.B}, {"q", p.q}};
}

inline ordered_json to_json(const AoiPattern& a) { return ordered_json::array({a.low, a.high}); }

inline PolicyKind resolve_policy(const SystemParams& p, const std::string& name) {
    return name == "auto" ? auto_policy(p) : parse_policy(name);
}

// --- theory ---------------------------------------------------------------------------

inline std::optional<PolicyKind> auto_policy_or_null(const SystemParams& p) {
    try {
        return auto_policy(p);
    } catch (const NotCovered&) {
        return std::nullopt;
    }
}

inline ordered_json theory_report(const SystemParams& p) {
    p.validate();
    ordered_json j;
    j["params"] = to_json(p);
    const auto v = theory_value(p);
    j["covered"] = v.has_value();
    if (v) j["summed_avg"] = to_json(*v);
    const auto idx = theory_index(p);
    if (p.N == 1) {
        j["regime"] = p.K <= p.M ? "single-antenna, K <= M" : "single-antenna, K > M";
        if (p.K > p.M) {
            j["p"] = idx.p, j["q"] = idx.q_rem, j["d"] = idx.d;
            ordered_json li = ordered_json::array(), ri = ordered_json::array();
            for (int r = 1; r <= p.M; ++r) li.push_back(li_of(p.K, p.M, r)), ri.push_back(ranking_set(p.K, p.M, r));
            j["L"] = li;
            j["R"] = ri;
        }
    } else if (p.K == 2 && p.N >= p.B) {
        j["regime"] = p.M >= 2 * p.B ? "two-user, M >= 2B" : p.M >= p.B ? "two-user, B <= M < 2B" : "two-user, M < B";
        if (idx.has_ij) {
            j["i"] = idx.i, j["j"] = idx.j;
            j["delta_min"] = to_json(segment_lower_bound(idx.i, idx.j));
        }
        j["min_pattern"] = to_json(min_pattern(p.M, p.B));
    } else {
        j["regime"] = "not covered";
    }
    if (const auto k = auto_policy_or_null(p)) j["policy"] = std::string(policy_name(*k));
    return j;
}

inline int cmd_theory(const SystemParams& p, std::ostream& out) {
    out << theory_report(p).dump(2) << "\n";
    return 0;
}

// --- simulate / verify ----------------------------------------------------------------

struct SimOutcome {
    RunConfig cfg;
    PolicyKind policy{};
    RunResult result;
    std::optional<Rational> theory;
    bool match() const { return theory && *theory == result.summary.summed_avg; }
};

inline SimOutcome simulate(const RunConfig& cfg) {
    cfg.params.validate();
    SimOutcome o{cfg, resolve_policy(cfg.params, cfg.policy), {}, theory_value(cfg.params)};
    RunOptions opt;
    opt.level = cfg.level;
    opt.T = cfg.slots;
    opt.W = cfg.warmup;
    opt.seed = cfg.seed;
    o.result = run(make_policy(o.policy, cfg.params), opt);
    return o;
}

inline const char* csv_header() {
    return "K,M,N,B,policy,level,seed,summed_avg_num,summed_avg_den,theory_num,theory_den,match,summed_avg,theory";
}

inline std::string csv_row(const SimOutcome& o) {
    const auto& p = o.cfg.params;
    const auto& s = o.result.summary.summed_avg;
    std::ostringstream r;
    r << p.K << ',' << p.M << ',' << p.N << ',' << p.B << ',' << policy_name(o.policy) << ',' << level_name(o.cfg.level) << ','
      << o.cfg.seed << ',' << s.num() << ',' << s.den() << ',';
    if (o.theory)
        r << o.theory->num() << ',' << o.theory->den() << ',' << (o.match() ? "yes" : "no");
    else
        r << ",,n/a";
    r << ',' << s.to_double() << ',';
    if (o.theory) r << o.theory->to_double();
    return r.str();
}

inline ordered_json sim_json(const SimOutcome& o) {
    ordered_json j;
    j["params"] = to_json(o.cfg.params);
    j["policy"] = std::string(policy_name(o.policy));
    j["level"] = std::string(level_name(o.cfg.level));
    j["seed"] = o.cfg.seed;
    j["slots"] = o.result.trace.T;
    j["warmup"] = o.result.trace.W;
    j["period"] = o.result.summary.period;
    ordered_json per = ordered_json::array();
    for (const auto& r : o.result.summary.per_user_avg) per.push_back(to_json(r));
    j["per_user_avg"] = per;
    j["summed_avg"] = to_json(o.result.summary.summed_avg);
    if (o.theory) {
        j["theory"] = to_json(*o.theory);
        j["match"] = o.match();
        if (!o.match()) j["diff"] = to_json(o.result.summary.summed_avg - *o.theory);
    }
    j["payload_mismatches"] = o.result.payload_mismatches;
    j["resamples"] = o.result.resamples;
    return j;
}

inline int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
    const auto o = simulate(cfg);
    if (cfg.format == Format::csv)
        out << csv_header() << "\n" << csv_row(o) << "\n";
    else
        out << sim_json(o).dump(2) << "\n";
    return o.result.payload_mismatches == 0 ? 0 : 1;
}

/// Runs the scheme designated for the regime (or `cfg.policy`) and compares with the closed form.
inline int cmd_verify(const RunConfig& cfg, std::ostream& out) {
    if (!theory_value(cfg.params)) throw NotCovered("no closed form for " + cfg.params.str());
    const auto o = simulate(cfg);
    if (cfg.format == Format::csv)
        out << csv_header() << "\n" << csv_row(o) << "\n";
    else
        out << sim_json(o).dump(2) << "\n";
    return o.match() && o.result.payload_mismatches == 0 ? 0 : 1;
}

// --- search ---------------------------------------------------------------------------

struct SearchConfig {
    SystemParams params;
    oracle::Mode mode = oracle::Mode::full;
    int delta_cap = 0;  ///< 0: automatic
    oracle::Solver solver = oracle::Solver::automatic;
    bool audit = false;
    std::size_t state_limit = 5'000'000;
};

inline ordered_json audit_json(const oracle::AuditReport& a) {
    ordered_json j;
    j["ok"] = a.ok();
    j["i"] = a.i, j["j"] = a.j;
    j["min_pattern"] = to_json(a.floor);
    j["observed_min_pattern"] = to_json(a.observed);
    j["deliveries"] = a.deliveries;
    j["chunks"] = {{"single", a.chunks_type1}, {"nested", a.chunks_type2}};
    ordered_json v = ordered_json::array();
    for (const auto& x : a.violations) v.push_back({{"slot", x.slot}, {"check", x.check}, {"detail", x.detail}});
    j["violations"] = v;
    return j;
}

inline int cmd_search(const SearchConfig& sc, std::ostream& out) {
    oracle::Config cfg{sc.mode, sc.delta_cap, 0, sc.state_limit};
    const auto s = oracle::search_full(sc.params, cfg, sc.solver);
    const auto& r = s.result;
    ordered_json j;
    j["params"] = to_json(sc.params);
    j["mode"] = std::string(oracle::mode_name(sc.mode));
    j["solver"] = std::string(oracle::solver_name(sc.solver == oracle::Solver::karp ? sc.solver : oracle::Solver::howard));
    j["delta_cap"] = s.model.config().delta_cap;
    j["a_cap"] = s.model.config().a_cap;
    j["nodes"] = r.nodes;
    j["edges"] = r.edges;
    j["value"] = to_json(r.value);
    const auto th = theory_value(sc.params);
    if (th) {
        j["theory"] = to_json(*th);
        j["matches_theory"] = *th == r.value;
    }
    j["cycle_touches_cap"] = r.touches_cap;
    ordered_json cyc = ordered_json::array();
    for (std::size_t n = 0; n < r.cycle.cycle.size(); ++n) {
        ordered_json st = ordered_json::array(), act = ordered_json::array();
        for (const auto& u : s.model.decode(s.graph.codes[r.cycle.cycle[n]])) st.push_back({u.delta, u.c, u.a});
        for (const auto& a : oracle::decode_action(s.graph.action[r.cycle.edges[n]], sc.params.K)) act.push_back({a.m, a.restart});
        cyc.push_back({{"state", st}, {"action", act}, {"cost", s.graph.cost[r.cycle.edges[n]]}});
    }
    j["cycle"] = cyc;
    int code = 0;
    if (sc.audit) {
        try {
            const auto rep = oracle::pattern_audit(oracle::unroll_cycle(s.model, s.graph, r.cycle));
            j["audit"] = audit_json(rep);
            if (!rep.ok()) code = 1;
        } catch (const NotApplicable& e) {
            j["audit"] = {{"skipped", e.what()}};
        }
    }
    out << j.dump(2) << "\n";
    return code;
}

// --- sweep ----------------------------------------------------------------------------

/// Grid over parameters plus run settings shared by every expanded run.
struct SweepConfig {
    std::vector<int> K{2}, M{1}, N{1}, B{1};
    bool n_equals_b = false;  ///< `N = B`: one receive antenna per symbol
    std::vector<std::string> policy{"auto"};
    std::vector<Level> level{Level::dof};
    std::vector<std::uint64_t> seed{1};
    std::int64_t slots = 0, warmup = -1;
    std::uint32_t q = 65521;
};

namespace detail {

inline std::string trim(std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(trim(cur));
    return out;
}

inline std::int64_t to_int(const std::string& s, int line) {
    std::size_t used = 0;
    std::int64_t v = 0;
    try {
        v = std::stoll(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty()) throw InvalidParams("line " + std::to_string(line) + ": '" + s + "' is not an integer");
    return v;
}

// "1..4, 7" -> {1,2,3,4,7}
template <class T>
std::vector<T> int_list(const std::string& s, int line) {
    std::vector<T> out;
    for (const auto& part : split(s, ',')) {
        const auto dots = part.find("..");
        if (dots == std::string::npos) {
            out.push_back(static_cast<T>(to_int(part, line)));
            continue;
        }
        const auto lo = to_int(trim(part.substr(0, dots)), line), hi = to_int(trim(part.substr(dots + 2)), line);
        if (hi < lo) throw InvalidParams("line " + std::to_string(line) + ": empty range " + part);
        for (auto v = lo; v <= hi; ++v) out.push_back(static_cast<T>(v));
    }
    return out;
}

}  // namespace detail

inline SweepConfig parse_sweep(std::istream& in) {
    SweepConfig c;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const auto text = detail::trim(raw.substr(0, hash));
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos) throw InvalidParams("line " + std::to_string(line) + ": expected key = value");
        const auto key = detail::trim(text.substr(0, eq)), val = detail::trim(text.substr(eq + 1));
        if (key == "K") c.K = detail::int_list<int>(val, line);
        else if (key == "M") c.M = detail::int_list<int>(val, line);
        else if (key == "B") c.B = detail::int_list<int>(val, line);
        else if (key == "N" && val == "B") c.n_equals_b = true;
        else if (key == "N") c.N = detail::int_list<int>(val, line), c.n_equals_b = false;
        else if (key == "seed") c.seed = detail::int_list<std::uint64_t>(val, line);
        else if (key == "policy") c.policy = detail::split(val, ',');
        else if (key == "level") {
            c.level.clear();
            for (const auto& l : detail::split(val, ',')) c.level.push_back(parse_level(l));
        } else if (key == "slots") c.slots = detail::to_int(val, line);
        else if (key == "warmup") c.warmup = detail::to_int(val, line);
        else if (key == "q") c.q = static_cast<std::uint32_t>(detail::to_int(val, line));
        else throw InvalidParams("line " + std::to_string(line) + ": unknown key '" + key + "'");
    }
    for (const auto& p : c.policy)
        if (p != "auto") parse_policy(p);
    return c;
}

/// Cartesian product in the order K, M, N, B, policy, level, seed (last varies fastest).
inline std::vector<RunConfig> expand(const SweepConfig& c) {
    std::vector<RunConfig> out;
    const std::vector<int> n_grid = c.n_equals_b ? std::vector<int>{0} : c.N;
    for (int k : c.K)
        for (int m : c.M)
            for (int n : n_grid)
                for (int b : c.B)
                    for (const auto& pol : c.policy)
                        for (auto lvl : c.level)
                            for (auto seed : c.seed) {
                                RunConfig r;
                                r.params.K = k, r.params.M = m, r.params.N = c.n_equals_b ? b : n, r.params.B = b;
                                r.params.q = c.q;
                                r.policy = pol, r.level = lvl, r.seed = seed;
                                r.slots = c.slots, r.warmup = c.warmup;
                                out.push_back(r);
                            }
    return out;
}

/// Runs every configuration on `jobs` workers; rows reach `out` in configuration order as
/// soon as all earlier rows are done. Configurations whose policy does not apply are
/// reported on `log` and skipped.
inline int cmd_sweep(const SweepConfig& sc, unsigned jobs, std::ostream& out, std::ostream& log) {
    const auto runs = expand(sc);
    log << "sweep: " << runs.size() << " configurations\n";
    out << csv_header() << "\n" << std::flush;
    std::vector<std::optional<std::string>> rows(runs.size());
    std::vector<std::string> notes(runs.size());
    std::vector<char> done(runs.size(), 0), mismatch(runs.size(), 0);
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::size_t flushed = 0;
    auto flush = [&] {  // caller holds mu
        while (flushed < runs.size() && done[flushed]) {
            if (rows[flushed]) out << *rows[flushed] << "\n";
            if (!notes[flushed].empty()) log << "skip " << runs[flushed].params.str() << " " << runs[flushed].policy << ": " << notes[flushed] << "\n";
            ++flushed;
        }
        out << std::flush;
    };
    auto worker = [&] {
        for (std::size_t n; (n = next++) < runs.size();) {
            std::optional<std::string> row;
            std::string note;
            bool bad = false;
            try {
                const auto o = simulate(runs[n]);
                row = csv_row(o);
                bad = (o.theory && !o.match()) || o.result.payload_mismatches > 0;
            } catch (const NotCovered& e) {
                note = e.what();
            } catch (const PolicyNotApplicable& e) {
                note = e.what();
            } catch (const InvalidParams& e) {
                note = e.what();
            }
            std::lock_guard lk(mu);
            rows[n] = std::move(row), notes[n] = std::move(note), mismatch[n] = bad, done[n] = 1;
            flush();
        }
    };
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(runs.size(), 1))));
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < jobs; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    std::size_t bad = 0, ran = 0;
    for (std::size_t n = 0; n < runs.size(); ++n) bad += mismatch[n], ran += rows[n].has_value();
    log << "sweep: " << ran << " runs, " << bad << " mismatches, " << runs.size() - ran << " skipped\n";
    return bad == 0 ? 0 : 1;
}

}  // namespace aoi::cli
