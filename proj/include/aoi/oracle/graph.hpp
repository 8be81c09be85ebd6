#pragma once

// DoF-level scheduling as a deterministic average-cost graph. A node holds, per user, the
// current AoI and the progress/age of at most one in-flight update; users are
// interchangeable so nodes store the sorted tuple. Edge cost = summed end-of-slot AoI.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "aoi/errors.hpp"
#include "aoi/system_model.hpp"
#include "aoi/theory.hpp"

namespace aoi::oracle {

enum class Mode { pi0, full };

inline std::string_view mode_name(Mode m) { return m == Mode::pi0 ? "pi0" : "full"; }
inline Mode parse_mode(std::string_view s) {
    if (s == "pi0") return Mode::pi0;
    if (s == "full") return Mode::full;
    throw InvalidParams("unknown mode '" + std::string(s) + "'");
}

struct UserState {
    int delta = 1;  ///< AoI at the end of the slot
    int c = 0;      ///< symbols of the in-flight update already received, in [0:B-1]
    int a = 0;      ///< age of the in-flight update (0 when none)
    auto operator<=>(const UserState&) const = default;
};

using State = std::vector<UserState>;

struct UserAction {
    int m = 0;             ///< DoF given to this user
    bool restart = false;  ///< abandon the in-flight update and start the freshest one
    bool operator==(const UserAction&) const = default;
};

using Action = std::vector<UserAction>;

/// Packs an action into 6 bits per user (5 for m, 1 for restart).
inline std::uint32_t encode_action(const Action& act) {
    if (act.size() > 5) throw CapacityExceeded("action encoding supports at most 5 users");
    std::uint32_t code = 0;
    for (auto it = act.rbegin(); it != act.rend(); ++it) {
        if (it->m > 31) throw CapacityExceeded("action encoding supports at most 31 DoF per user");
        code = (code << 6) | (static_cast<std::uint32_t>(it->m) << 1) | (it->restart ? 1u : 0u);
    }
    return code;
}

inline Action decode_action(std::uint32_t code, int users) {
    Action act(users);
    for (auto& a : act) {
        a.restart = code & 1u;
        a.m = static_cast<int>((code >> 1) & 31u);
        code >>= 6;
    }
    return act;
}

struct Config {
    Mode mode = Mode::full;
    int delta_cap = 0;  ///< 0: automatic
    int a_cap = 0;      ///< 0: equal to delta_cap
    std::size_t state_limit = 5'000'000;
};

/// Per-user AoI cap used when none is given: three times the per-user share of the
/// closed-form optimum, or of a plain time-sharing bound where no closed form exists.
inline int auto_delta_cap(const SystemParams& p) {
    std::int64_t cap;
    if (auto v = theory_value(p)) {
        cap = (3 * v->num() + p.K * v->den() - 1) / (p.K * v->den());
    } else {
        cap = 3 * ((static_cast<std::int64_t>(p.K) * p.B + p.system_dof() - 1) / p.system_dof()) + 1;
    }
    return static_cast<int>(std::max<std::int64_t>(cap, p.B + 2));
}

/// Outcome of one slot for one user, in the order of the input state.
struct UserStep {
    UserState next;
    bool started = false;    ///< a fresh update (generated this slot) began transmission
    bool delivered = false;  ///< the in-flight update completed this slot
    int delivered_age = 0;
    bool restarted = false;  ///< the previous in-flight update was abandoned for a fresh one
    bool dropped = false;    ///< the in-flight update can no longer lower the AoI and was discarded
};

struct Step {
    std::vector<UserStep> users;
    std::int64_t cost = 0;
};

class Model {
public:
    Model(const SystemParams& p, Config cfg) : p_(p), cfg_(cfg) {
        p_.validate();
        if (cfg_.delta_cap == 0) cfg_.delta_cap = auto_delta_cap(p_);
        if (cfg_.a_cap == 0) cfg_.a_cap = cfg_.delta_cap;
        if (cfg_.delta_cap < 1 || cfg_.a_cap < 1) throw InvalidParams("caps must be positive");
        if (p_.K > 5 || p_.user_dof() > 31) throw CapacityExceeded("oracle supports K <= 5 and min(M,N) <= 31");
        radix_ = static_cast<std::uint64_t>(cfg_.delta_cap) * p_.B * (cfg_.a_cap + 1);
        long double span = std::pow(static_cast<long double>(radix_), p_.K);
        if (span >= 1.8e19L) throw CapacityExceeded("state encoding does not fit 64 bits for " + p_.str());
    }

    const SystemParams& params() const { return p_; }
    const Config& config() const { return cfg_; }

    State start_state(const std::vector<std::int64_t>& initial_aoi) const {
        State s;
        for (auto d : initial_aoi) s.push_back({static_cast<int>(std::min<std::int64_t>(d, cfg_.delta_cap)), 0, 0});
        std::sort(s.begin(), s.end());
        return s;
    }

    std::uint64_t encode(const State& s) const {
        std::uint64_t code = 0;
        for (auto it = s.rbegin(); it != s.rend(); ++it)
            code = code * radix_ + (static_cast<std::uint64_t>(it->delta - 1) * p_.B + it->c) * (cfg_.a_cap + 1) + it->a;
        return code;
    }

    State decode(std::uint64_t code) const {
        State s(p_.K);
        for (auto& u : s) {
            auto v = code % radix_;
            code /= radix_;
            u.a = static_cast<int>(v % (cfg_.a_cap + 1));
            v /= (cfg_.a_cap + 1);
            u.c = static_cast<int>(v % p_.B);
            u.delta = static_cast<int>(v / p_.B) + 1;
        }
        return s;
    }

    /// Applies `act` to `s` (both indexed by position). nullopt if the action is not allowed.
    std::optional<Step> apply(const State& s, const Action& act) const {
        Step st;
        st.users.resize(s.size());
        int total = 0;
        for (const auto& a : act) total += a.m;
        if (total > p_.M) return std::nullopt;
        for (std::size_t k = 0; k < s.size(); ++k) {
            const auto& u = s[k];
            const auto& a = act[k];
            auto& out = st.users[k];
            if (a.m < 0 || a.m > p_.user_dof()) return std::nullopt;
            int c = u.c, age = u.a;
            if (a.restart) {
                if (cfg_.mode == Mode::pi0 || u.c == 0 || a.m == 0) return std::nullopt;
                c = 0;
                age = 0;
                out.restarted = true;
            }
            if (a.m > p_.B - c) return std::nullopt;
            if (c == 0 && a.m > 0) out.started = true;
            const bool in_flight = c > 0 || a.m > 0;
            int na = in_flight ? std::min(age + 1, cfg_.a_cap) : 0;
            int nc = c + a.m;
            int nd = u.delta + 1;
            if (nc == p_.B) {
                out.delivered = true;
                out.delivered_age = na;
                nd = std::min(nd, na);
                nc = 0;
                na = 0;
            }
            nd = std::min(nd, cfg_.delta_cap);
            if (nc > 0 && na >= nd && nd < cfg_.delta_cap) {
                nc = 0;
                na = 0;
                out.dropped = true;
            }
            if (cfg_.mode == Mode::pi0 && nc > 0 && a.m != std::min(p_.N, p_.M - (total - a.m))) return std::nullopt;
            out.next = {nd, nc, na};
            st.cost += nd;
        }
        return st;
    }

    /// Calls f(action) for every candidate action at `s`, in lexicographic (m..., restart...) order.
    template <class F>
    void for_each_action(const State& s, F&& f) const {
        const int k = static_cast<int>(s.size());
        Action act(k);
        const int cap = p_.user_dof();
        // odometer over m with position 0 most significant
        std::vector<int> m(k, 0);
        while (true) {
            int used = std::accumulate(m.begin(), m.end(), 0);
            if (used <= p_.M) {
                std::vector<int> flexible;
                for (int i = 0; i < k; ++i)
                    if (cfg_.mode == Mode::full && s[i].c > 0 && m[i] > 0) flexible.push_back(i);
                const std::uint32_t combos = 1u << flexible.size();
                for (std::uint32_t r = 0; r < combos; ++r) {
                    for (int i = 0; i < k; ++i) act[i] = {m[i], false};
                    for (std::size_t b = 0; b < flexible.size(); ++b)
                        act[flexible[b]].restart = (r >> (flexible.size() - 1 - b)) & 1u;
                    f(act);
                }
            }
            int i = k - 1;
            while (i >= 0 && m[i] == cap) m[i--] = 0;
            if (i < 0) break;
            ++m[i];
        }
    }

    bool touches_cap(const State& s) const {
        for (const auto& u : s)
            if (u.delta >= cfg_.delta_cap || (u.c > 0 && u.a >= cfg_.a_cap)) return true;
        return false;
    }

private:
    SystemParams p_;
    Config cfg_;
    std::uint64_t radix_ = 1;
};

/// Reachable graph in compressed sparse row form. Parallel edges to the same target are
/// merged, keeping the lexicographically first action.
struct Graph {
    std::vector<std::uint64_t> codes;   ///< node -> encoded state
    std::vector<std::uint64_t> offset;  ///< CSR row offsets, size nodes+1
    std::vector<std::uint32_t> target;
    std::vector<std::int32_t> cost;
    std::vector<std::uint32_t> action;  ///< encoded action of each edge
    std::uint32_t start = 0;

    std::size_t nodes() const { return codes.size(); }
    std::size_t edges() const { return target.size(); }
};

inline Graph build_graph(const Model& model, const State& start) {
    Graph g;
    std::unordered_map<std::uint64_t, std::uint32_t> index;
    auto intern = [&](const State& s) {
        const auto code = model.encode(s);
        auto [it, fresh] = index.emplace(code, static_cast<std::uint32_t>(g.codes.size()));
        if (fresh) {
            if (g.codes.size() >= model.config().state_limit)
                throw CapacityExceeded("state graph for " + model.params().str() + " exceeds " +
                                       std::to_string(model.config().state_limit) + " states (" +
                                       std::to_string(g.target.size()) + " edges so far)");
            g.codes.push_back(code);
        }
        return it->second;
    };
    g.start = intern(start);
    g.offset.push_back(0);
    std::vector<std::uint32_t> row_targets;
    for (std::size_t v = 0; v < g.codes.size(); ++v) {
        const State s = model.decode(g.codes[v]);
        row_targets.clear();
        model.for_each_action(s, [&](const Action& act) {
            auto step = model.apply(s, act);
            if (!step) return;
            State next;
            for (const auto& u : step->users) next.push_back(u.next);
            std::sort(next.begin(), next.end());
            const auto t = intern(next);
            if (std::find(row_targets.begin(), row_targets.end(), t) != row_targets.end()) return;
            row_targets.push_back(t);
            g.target.push_back(t);
            g.cost.push_back(static_cast<std::int32_t>(step->cost));
            g.action.push_back(encode_action(act));
        });
        g.offset.push_back(g.target.size());
    }
    return g;
}

}  // namespace aoi::oracle
