#pragma once

// Slot-by-slot simulation: policy decision -> (optional) precoding over a sampled channel ->
// receiver-side decoding -> end-of-slot AoI.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aoi/errors.hpp"
#include "aoi/finite_field.hpp"
#include "aoi/policies.hpp"
#include "aoi/rational.hpp"
#include "aoi/system_model.hpp"
#include "aoi/theory.hpp"

namespace aoi {

enum class Level { symbol, dof };

inline std::string_view level_name(Level l) { return l == Level::symbol ? "symbol" : "dof"; }
inline Level parse_level(std::string_view s) {
    if (s == "symbol") return Level::symbol;
    if (s == "dof") return Level::dof;
    throw InvalidParams("unknown level '" + std::string(s) + "'");
}

/// Unknown symbol `index` of the update generated at `gen_slot`.
struct SymbolId {
    std::int64_t gen_slot = 0;
    int index = 0;
    auto operator<=>(const SymbolId&) const = default;
};

struct DecodedUpdate {
    int user = 0;
    std::int64_t gen_slot = 0;
    std::int64_t slot = 0;       ///< slot at whose end it was decoded
    std::vector<fe_t> symbols;   ///< empty at DoF level
    std::int64_t age() const { return slot - gen_slot + 1; }
};

/// Linear equations a receiver holds about its own undecoded symbols, kept in reduced
/// row echelon form over the live columns.
class ReceiverLog {
public:
    ReceiverLog(const PrimeField& f, int user, int b) : f_(f), user_(user), b_(b) {}

    int user() const { return user_; }
    const std::vector<SymbolId>& columns() const { return cols_; }
    const FieldMatrix& equations() const { return eq_; }
    const std::vector<fe_t>& values() const { return rhs_; }
    std::size_t equation_count() const { return eq_.rows(); }
    const std::vector<std::pair<std::int64_t, std::int64_t>>& decoded() const { return decoded_; }  ///< (gen_slot, age)

    /// Adds rows `coeffs` (over `columns`) with right-hand sides `rhs`. Columns of updates
    /// not fresher than the last decoded one are eliminated immediately.
    void add_equations(std::span<const SymbolId> columns, const FieldMatrix& coeffs, std::span<const fe_t> rhs) {
        if (coeffs.cols() != columns.size() || coeffs.rows() != rhs.size()) throw ShapeError("add_equations: shape mismatch");
        for (const auto& c : columns)
            if (std::find(cols_.begin(), cols_.end(), c) == cols_.end()) cols_.push_back(c);
        std::sort(cols_.begin(), cols_.end());
        FieldMatrix aug(eq_.rows() + coeffs.rows(), cols_.size() + 1);
        auto pos = [&](const SymbolId& id) {
            return static_cast<std::size_t>(std::lower_bound(cols_.begin(), cols_.end(), id) - cols_.begin());
        };
        for (std::size_t r = 0; r < eq_.rows(); ++r) {
            for (std::size_t c = 0; c < old_cols_.size(); ++c) aug(r, pos(old_cols_[c])) = eq_(r, c);
            aug(r, cols_.size()) = rhs_[r];
        }
        for (std::size_t r = 0; r < coeffs.rows(); ++r) {
            const std::size_t row = eq_.rows() + r;
            for (std::size_t c = 0; c < columns.size(); ++c)
                aug(row, pos(columns[c])) = f_.add(aug(row, pos(columns[c])), coeffs(r, c));
            aug(row, cols_.size()) = rhs[r];
        }
        load(aug);
        if (last_decoded_) eliminate_through(*last_decoded_);
    }

    /// Decodes every update whose B unit coordinate vectors all lie in the row space, then
    /// prunes their columns (and those of any older update) from the log.
    std::vector<DecodedUpdate> decode_scan(std::int64_t slot) {
        std::vector<DecodedUpdate> out;
        std::map<std::int64_t, std::vector<fe_t>> solved;
        std::map<std::int64_t, int> count;
        for (std::size_t r = 0; r < eq_.rows(); ++r) {
            const auto pc = pivot_of(r);
            bool unit = true;
            for (std::size_t c = pc + 1; c < cols_.size() && unit; ++c) unit = eq_(r, c) == 0;
            if (!unit) continue;
            auto& v = solved[cols_[pc].gen_slot];
            v.resize(b_, 0);
            v[cols_[pc].index] = rhs_[r];
            ++count[cols_[pc].gen_slot];
        }
        for (auto& [gen, n] : count) {
            if (n != b_) continue;
            out.push_back({user_, gen, slot, std::move(solved[gen])});
            decoded_.emplace_back(gen, slot - gen + 1);
        }
        if (!out.empty()) {
            const auto newest = out.back().gen_slot;
            if (!last_decoded_ || newest > *last_decoded_) last_decoded_ = newest;
            eliminate_through(*last_decoded_);
        }
        return out;
    }

private:
    std::size_t pivot_of(std::size_t r) const {
        std::size_t c = 0;
        while (eq_(r, c) == 0) ++c;
        return c;
    }

    void load(const FieldMatrix& aug) {
        auto e = rref(f_, aug, cols_.size());
        eq_ = FieldMatrix(e.rank(), cols_.size());
        rhs_.assign(e.rank(), 0);
        for (std::size_t r = 0; r < e.rank(); ++r) {
            for (std::size_t c = 0; c < cols_.size(); ++c) eq_(r, c) = e.reduced(r, c);
            rhs_[r] = e.reduced(r, cols_.size());
        }
        old_cols_ = cols_;
    }

    // Projects out every column with gen_slot <= gen: rows pivoting on such columns are
    // dropped, the rest are free of them in reduced form.
    void eliminate_through(std::int64_t gen) {
        const auto split = static_cast<std::size_t>(
            std::upper_bound(cols_.begin(), cols_.end(), SymbolId{gen, INT32_MAX}) - cols_.begin());
        if (split == 0) return;
        std::vector<SymbolId> keep(cols_.begin() + static_cast<std::ptrdiff_t>(split), cols_.end());
        FieldMatrix aug(0, keep.size() + 1);
        std::vector<fe_t> row(keep.size() + 1);
        for (std::size_t r = 0; r < eq_.rows(); ++r) {
            if (pivot_of(r) < split) continue;
            for (std::size_t c = 0; c < keep.size(); ++c) row[c] = eq_(r, split + c);
            row[keep.size()] = rhs_[r];
            aug.append_row(row);
        }
        cols_ = std::move(keep);
        if (aug.rows() == 0) aug = FieldMatrix(0, cols_.size() + 1);
        load(aug);
    }

    PrimeField f_;
    int user_;
    int b_;
    std::vector<SymbolId> cols_, old_cols_;
    FieldMatrix eq_;
    std::vector<fe_t> rhs_;
    std::optional<std::int64_t> last_decoded_;
    std::vector<std::pair<std::int64_t, std::int64_t>> decoded_;
};

/// End-of-slot AoI of every user for slots 1..T.
struct AoiTrace {
    std::vector<std::vector<std::int64_t>> per_user;  ///< per_user[k][t-1]
    std::int64_t T = 0;
    std::int64_t W = 0;

    std::int64_t summed(std::int64_t t) const {
        std::int64_t s = 0;
        for (const auto& u : per_user) s += u[t - 1];
        return s;
    }
};

struct RunSummary {
    std::vector<Rational> per_user_avg;
    Rational summed_avg;
    std::int64_t period = 1;
};

/// Exact mean AoI over slots (W, T], which must consist of whole periods.
inline RunSummary average_over_periods(const AoiTrace& tr, std::int64_t period) {
    if (period < 1) throw WindowError("period must be positive");
    const std::int64_t len = tr.T - tr.W;
    if (tr.W < 0 || len <= 0 || len % period != 0)
        throw WindowError("averaging window (" + std::to_string(tr.W) + ", " + std::to_string(tr.T) +
                          "] is not a whole number of " + std::to_string(period) + "-slot periods");
    RunSummary s;
    s.period = period;
    std::int64_t total = 0;
    for (const auto& u : tr.per_user) {
        std::int64_t acc = 0;
        for (std::int64_t t = tr.W + 1; t <= tr.T; ++t) acc += u[t - 1];
        s.per_user_avg.emplace_back(acc, len);
        total += acc;
    }
    s.summed_avg = Rational(total, len);
    return s;
}

/// Default AoI at slot 0.
inline std::vector<std::int64_t> default_initial_aoi(const SystemParams& p) {
    if (p.N == 1) return std::vector<std::int64_t>(p.K, p.B);
    if (p.K == 2 && p.N >= p.B) {
        // the first-served user starts at the higher value of the minimum pattern
        const auto mp = min_pattern(p.M, p.B);
        return {mp.high, mp.low};
    }
    return std::vector<std::int64_t>(p.K, p.B);
}

struct EngineState {
    SystemParams params;
    std::uint64_t seed = 1;
    Level level = Level::dof;
    std::int64_t slot = 0;  ///< last completed slot
    std::vector<std::int64_t> aoi;
    std::vector<ReceiverLog> logs;                          ///< symbol level
    std::vector<std::map<std::int64_t, int>> dof_count;     ///< DoF level: gen_slot -> symbols received
    std::vector<std::int64_t> freshest;                     ///< newest decoded gen_slot per user (0 = none)

    EngineState(const SystemParams& p, std::uint64_t s, Level l, std::vector<std::int64_t> initial)
        : params(p), seed(s), level(l), aoi(std::move(initial)), dof_count(p.K), freshest(p.K, 0) {
        if (static_cast<int>(aoi.size()) != p.K) throw InvalidParams("initial AoI needs one value per user");
        for (auto a : aoi)
            if (a < 1) throw InvalidParams("initial AoI must be >= 1");
        const auto f = p.field();
        for (int k = 0; k < p.K; ++k) logs.emplace_back(f, k, p.B);
    }
};

struct StepResult {
    std::vector<DecodedUpdate> decoded;
    std::int64_t payload_mismatches = 0;
};

namespace detail {
inline void apply_deliveries(EngineState& st, std::int64_t t, const std::vector<DecodedUpdate>& dec) {
    for (int k = 0; k < st.params.K; ++k) st.aoi[k] += 1;
    for (const auto& d : dec) {
        st.aoi[d.user] = std::min(st.aoi[d.user], d.age());
        st.freshest[d.user] = std::max(st.freshest[d.user], d.gen_slot);
    }
    st.slot = t;
}
}  // namespace detail

/// Advances one slot at DoF level: users count the raw symbols of each update.
inline StepResult step_dof(EngineState& st, const SlotDecision& d) {
    StepResult res;
    for (const auto& a : d.allocations) {
        if (a.count == 0 || a.gen_slot <= st.freshest[a.user]) continue;
        auto& cnt = st.dof_count[a.user][a.gen_slot];
        cnt += a.count;
        if (cnt == st.params.B) res.decoded.push_back({a.user, a.gen_slot, d.slot, {}});
    }
    for (const auto& dec : res.decoded) {
        auto& m = st.dof_count[dec.user];
        m.erase(m.begin(), m.upper_bound(dec.gen_slot));
    }
    detail::apply_deliveries(st, d.slot, res.decoded);
    return res;
}

/// Advances one slot at symbol level with precoder pc over channel ch. Every receiver
/// forms y = H^(k) x, strips interference by elimination and decodes what its equations allow.
inline StepResult step_symbol(EngineState& st, const SlotDecision& d, const ChannelRealization& ch, const Precoder& pc) {
    const auto& p = st.params;
    const auto f = p.field();
    StepResult res;
    struct Col {
        int user;
        SymbolId id;
    };
    std::vector<Col> cols;
    std::vector<fe_t> s;
    for (const auto& a : d.allocations) {
        if (a.count == 0) continue;
        const auto upd = generate_update(p, a.user, a.gen_slot, st.seed);
        for (int r = 0; r < a.count; ++r) {
            cols.push_back({a.user, {a.gen_slot, a.first_symbol + r}});
            s.push_back(upd.symbols[a.first_symbol + r]);
        }
    }
    const auto x = s.empty() ? std::vector<fe_t>(p.M, 0) : mat_vec(f, pc.matrix, s);
    for (int k = 0; k < p.K; ++k) {
        const auto& h = ch.per_user[k];
        const auto y = mat_vec(f, h, x);
        if (cols.empty()) continue;
        const auto g = mat_mul(f, h, pc.matrix);
        // foreign columns first so that rows pivoting on own columns are interference-free
        std::vector<std::size_t> order;
        for (std::size_t c = 0; c < cols.size(); ++c)
            if (cols[c].user != k) order.push_back(c);
        const std::size_t nforeign = order.size();
        for (std::size_t c = 0; c < cols.size(); ++c)
            if (cols[c].user == k) order.push_back(c);
        if (nforeign == cols.size()) continue;
        FieldMatrix aug(p.N, cols.size() + 1);
        for (int r = 0; r < p.N; ++r) {
            for (std::size_t c = 0; c < order.size(); ++c) aug(r, c) = g(r, order[c]);
            aug(r, cols.size()) = y[r];
        }
        const auto e = rref(f, aug, cols.size());
        std::vector<SymbolId> own;
        for (std::size_t c = nforeign; c < order.size(); ++c) own.push_back(cols[order[c]].id);
        FieldMatrix coeffs(0, own.size());
        std::vector<fe_t> rhs, row(own.size());
        for (std::size_t r = 0; r < e.rank(); ++r) {
            if (e.pivots[r] < nforeign) continue;
            for (std::size_t c = 0; c < own.size(); ++c) row[c] = e.reduced(r, nforeign + c);
            coeffs.append_row(row);
            rhs.push_back(e.reduced(r, cols.size()));
        }
        if (coeffs.rows() == 0) continue;
        st.logs[k].add_equations(own, coeffs, rhs);
    }
    for (int k = 0; k < p.K; ++k) {
        for (auto& dec : st.logs[k].decode_scan(d.slot)) {
            if (dec.symbols != generate_update(p, k, dec.gen_slot, st.seed).symbols) ++res.payload_mismatches;
            res.decoded.push_back(std::move(dec));
        }
    }
    detail::apply_deliveries(st, d.slot, res.decoded);
    return res;
}

struct RunOptions {
    Level level = Level::dof;
    std::int64_t T = 0;   ///< 0: W + 10 periods
    std::int64_t W = -1;  ///< -1: 4 periods
    std::uint64_t seed = 1;
    std::optional<std::vector<std::int64_t>> initial_aoi;
    int max_resample = 64;
};

struct RunResult {
    AoiTrace trace;
    RunSummary summary;
    std::vector<DecodedUpdate> deliveries;  ///< payloads dropped to bound memory
    std::int64_t payload_mismatches = 0;
    std::int64_t resamples = 0;
};

/// Runs an arbitrary slot schedule whose AoI evolution repeats every `period` slots.
inline RunResult run_schedule(const SystemParams& p, std::int64_t period,
                              const std::function<SlotDecision(std::int64_t)>& decide, RunOptions opt = {}) {
    if (opt.W < 0) opt.W = 4 * period;
    if (opt.T == 0) opt.T = opt.W + 10 * period;
    if (opt.T <= opt.W) throw WindowError("horizon T must exceed warm-up W");
    EngineState st(p, opt.seed, opt.level, opt.initial_aoi.value_or(default_initial_aoi(p)));
    RunResult out;
    out.trace.T = opt.T;
    out.trace.W = opt.W;
    out.trace.per_user.assign(p.K, std::vector<std::int64_t>(opt.T));
    for (std::int64_t t = 1; t <= opt.T; ++t) {
        const auto d = decide(t);
        validate_decision(p, d);
        StepResult r;
        if (opt.level == Level::dof) {
            r = step_dof(st, d);
        } else {
            int attempt = 0;
            for (;; ++attempt) {
                if (attempt >= opt.max_resample)
                    throw ResampleExhausted("slot " + std::to_string(t) + ": stacked subchannel singular in every draw");
                auto ch = sample_channel(p, t, opt.seed, attempt);
                try {
                    const auto pc = to_precoder(p, d, ch);
                    r = step_symbol(st, d, ch, pc);
                    break;
                } catch (const SingularMatrix&) {
                }
            }
            out.resamples += attempt;
        }
        out.payload_mismatches += r.payload_mismatches;
        for (auto& dec : r.decoded) {
            dec.symbols.clear();
            out.deliveries.push_back(std::move(dec));
        }
        for (int k = 0; k < p.K; ++k) out.trace.per_user[k][t - 1] = st.aoi[k];
    }
    out.summary = average_over_periods(out.trace, period);
    return out;
}

inline RunResult run(const Policy& policy, RunOptions opt = {}) {
    return run_schedule(policy.params(), policy.period(), [&](std::int64_t t) { return policy.decide(t); }, std::move(opt));
}

}  // namespace aoi
