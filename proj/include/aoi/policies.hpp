#pragma once

// Updating schemes. Every scheme is a pure function of the slot index: decide(t) lists which
// raw symbols of which update each user receives in slot t. to_precoder() turns that list
// into a zero-forcing transmit construction for a concrete channel.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "aoi/errors.hpp"
#include "aoi/finite_field.hpp"
#include "aoi/system_model.hpp"
#include "aoi/theory.hpp"

namespace aoi {

enum class PolicyKind { sync, round_robin, joint, alternating, framed, pi1 };

inline constexpr PolicyKind all_policies[] = {PolicyKind::sync,        PolicyKind::round_robin, PolicyKind::joint,
                                              PolicyKind::alternating, PolicyKind::framed,      PolicyKind::pi1};

inline std::string_view policy_name(PolicyKind k) {
    switch (k) {
        case PolicyKind::sync: return "sync";
        case PolicyKind::round_robin: return "round-robin";
        case PolicyKind::joint: return "joint";
        case PolicyKind::alternating: return "alt";
        case PolicyKind::framed: return "framed";
        case PolicyKind::pi1: return "pi1";
    }
    return "?";
}

inline PolicyKind parse_policy(std::string_view s) {
    for (auto k : all_policies)
        if (policy_name(k) == s) return k;
    throw InvalidParams("unknown policy '" + std::string(s) + "'");
}

/// `count` consecutive raw symbols of one update, starting at symbol `first_symbol` (0-based).
struct Allocation {
    int user = 0;
    std::int64_t gen_slot = 0;
    int first_symbol = 0;
    int count = 0;
    bool operator==(const Allocation&) const = default;
};

struct SlotDecision {
    std::int64_t slot = 0;
    std::vector<Allocation> allocations;

    int total_dof() const {
        int s = 0;
        for (const auto& a : allocations) s += a.count;
        return s;
    }
};

struct PolicyOptions {
    /// Start offsets in slots. sync: one per user (or empty); round-robin: a single global
    /// offset (or empty). Each offset lies in [0:B-1].
    std::vector<int> offsets;
};

class Policy {
public:
    Policy(PolicyKind kind, const SystemParams& p, PolicyOptions opt = {}) : kind_(kind), p_(p), opt_(std::move(opt)) {
        p_.validate();
        check_applicable();
        if (kind_ == PolicyKind::framed || kind_ == PolicyKind::pi1) std::tie(i_, j_) = ij_of(p_.M, p_.B);
    }

    PolicyKind kind() const { return kind_; }
    std::string_view name() const { return policy_name(kind_); }
    const SystemParams& params() const { return p_; }

    /// Number of slots after which the slot decisions (up to a shift of gen_slot) and hence the
    /// AoI evolution repeat.
    std::int64_t period() const {
        switch (kind_) {
            case PolicyKind::sync: return p_.B;
            case PolicyKind::round_robin:  // K/d frames, d = gcd(K mod M, M) = gcd(K, M)
                return static_cast<std::int64_t>(p_.K / std::gcd(p_.K, p_.M)) * p_.B;
            case PolicyKind::joint: return 1;
            case PolicyKind::alternating: return 2;
            case PolicyKind::framed: {
                const std::int64_t f = static_cast<std::int64_t>(i_) * j_ + 1;
                return j_ % 2 == 0 ? f : 2 * f;
            }
            case PolicyKind::pi1: {
                const int g = std::gcd(p_.B, p_.M);
                return static_cast<std::int64_t>(p_.B / g) * ((p_.M / g) % 2 == 1 ? 2 : 1);
            }
        }
        return 1;
    }

    SlotDecision decide(std::int64_t t) const {
        SlotDecision d;
        d.slot = t;
        switch (kind_) {
            case PolicyKind::sync: decide_sync(t, d); break;
            case PolicyKind::round_robin: decide_round_robin(t, d); break;
            case PolicyKind::joint:
                for (int k = 0; k < 2; ++k) d.allocations.push_back({k, t, 0, p_.B});
                break;
            case PolicyKind::alternating: d.allocations.push_back({static_cast<int>((t - 1) % 2), t, 0, p_.B}); break;
            case PolicyKind::framed: decide_framed(t, d); break;
            case PolicyKind::pi1: decide_pi1(t, d); break;
        }
        return d;
    }

private:
    void check_applicable() const {
        auto fail = [&](const std::string& need) {
            throw PolicyNotApplicable(std::string(policy_name(kind_)) + " needs " + need + "; got " + p_.str());
        };
        const bool two_user_rich = p_.K == 2 && p_.N >= p_.B;
        switch (kind_) {
            case PolicyKind::sync:
                if (p_.N != 1 || p_.K > p_.M) fail("N = 1 and K <= M");
                if (!opt_.offsets.empty() && static_cast<int>(opt_.offsets.size()) != p_.K) fail("one offset per user");
                break;
            case PolicyKind::round_robin:
                if (p_.N != 1 || p_.K <= p_.M) fail("N = 1 and K > M");
                if (opt_.offsets.size() > 1) fail("a single global offset");
                break;
            case PolicyKind::joint:
                if (!two_user_rich || p_.M < 2 * p_.B) fail("K = 2, N >= B, M >= 2B");
                break;
            case PolicyKind::alternating:
                if (!two_user_rich || p_.M < p_.B || p_.M >= 2 * p_.B) fail("K = 2, N >= B, B <= M < 2B");
                break;
            case PolicyKind::framed:
            case PolicyKind::pi1:
                if (!two_user_rich || p_.M >= p_.B) fail("K = 2, N >= B, M < B");
                break;
        }
        if (kind_ != PolicyKind::sync && kind_ != PolicyKind::round_robin && !opt_.offsets.empty())
            fail("no offsets");
        for (int o : opt_.offsets)
            if (o < 0 || o >= p_.B) fail("offsets in [0:B-1]");
    }

    int offset(int user) const {
        if (opt_.offsets.empty()) return 0;
        return opt_.offsets.size() == 1 ? opt_.offsets[0] : opt_.offsets[user];
    }

    void decide_sync(std::int64_t t, SlotDecision& d) const {
        for (int k = 0; k < p_.K; ++k) {
            const std::int64_t local = t - offset(k);
            if (local < 1) continue;
            const std::int64_t m = (local - 1) / p_.B;
            const int b = static_cast<int>((local - 1) % p_.B);
            d.allocations.push_back({k, m * p_.B + 1 + offset(k), b, 1});
        }
    }

    void decide_round_robin(std::int64_t t, SlotDecision& d) const {
        const std::int64_t local = t - offset(0);
        if (local < 1) return;
        const std::int64_t m = (local - 1) / p_.B;
        const int b = static_cast<int>((local - 1) % p_.B);
        for (int r = 0; r < p_.M; ++r) {
            const int user = static_cast<int>((m * p_.M + r) % p_.K);
            d.allocations.push_back({user, m * p_.B + 1 + offset(0), b, 1});
        }
    }

    // Adds the part of [lo, hi) that overlaps update n's DoF range [n*B, (n+1)*B).
    void overlap(std::int64_t n, std::int64_t lo, std::int64_t hi, int user, std::int64_t gen, SlotDecision& d) const {
        const std::int64_t s = std::max(lo, n * p_.B), e = std::min(hi, (n + 1) * p_.B);
        if (s < e) d.allocations.push_back({user, gen, static_cast<int>(s - n * p_.B), static_cast<int>(e - s)});
    }

    void decide_framed(std::int64_t t, SlotDecision& d) const {
        const std::int64_t f = static_cast<std::int64_t>(i_) * j_ + 1;
        const std::int64_t m = (t - 1) / f, l = (t - 1) % f;
        for (int n = 0; n < j_; ++n) {
            const int user = static_cast<int>((m * j_ + n) % 2);
            overlap(n, l * p_.M, (l + 1) * p_.M, user, m * f + static_cast<std::int64_t>(n) * i_ + 1, d);
        }
    }

    void decide_pi1(std::int64_t t, SlotDecision& d) const {
        const std::int64_t lo = (t - 1) * p_.M, hi = t * p_.M;
        for (std::int64_t n = lo / p_.B; n <= (hi - 1) / p_.B; ++n)
            overlap(n, lo, hi, static_cast<int>(n % 2), n * p_.B / p_.M + 1, d);
    }

    PolicyKind kind_;
    SystemParams p_;
    PolicyOptions opt_;
    int i_ = 0, j_ = 0;
};

inline Policy make_policy(PolicyKind kind, const SystemParams& p, PolicyOptions opt = {}) {
    return Policy(kind, p, std::move(opt));
}

/// The optimal scheme for a regime with a closed form; NotCovered elsewhere.
inline PolicyKind auto_policy(const SystemParams& p) {
    if (p.N == 1) return p.K <= p.M ? PolicyKind::sync : PolicyKind::round_robin;
    if (p.K == 2 && p.N >= p.B) {
        if (p.M >= 2 * p.B) return PolicyKind::joint;
        if (p.M >= p.B) return PolicyKind::alternating;
        return PolicyKind::framed;
    }
    throw NotCovered("no closed form for " + p.str());
}

/// Checks the per-slot DoF budget and update references of a decision.
inline void validate_decision(const SystemParams& p, const SlotDecision& d) {
    std::vector<int> per_user(p.K, 0);
    for (const auto& a : d.allocations) {
        if (a.user < 0 || a.user >= p.K) throw InvalidParams("allocation to unknown user");
        if (a.gen_slot < 1 || a.gen_slot > d.slot) throw InvalidParams("allocation references an update not yet generated");
        if (a.count < 0 || a.first_symbol < 0 || a.first_symbol + a.count > p.B)
            throw InvalidParams("allocation symbol range outside [0:B)");
        per_user[a.user] += a.count;
    }
    if (d.total_dof() > p.M) throw DofExceeded("slot " + std::to_string(d.slot) + " uses " + std::to_string(d.total_dof()) + " > M DoF");
    for (int k = 0; k < p.K; ++k)
        if (per_user[k] > p.user_dof())
            throw DofExceeded("user " + std::to_string(k + 1) + " receives " + std::to_string(per_user[k]) + " > min(M,N) DoF");
}

/// DoF received by each user in the slot.
inline std::vector<int> to_dof_schedule(const SystemParams& p, const SlotDecision& d) {
    std::vector<int> dof(p.K, 0);
    for (const auto& a : d.allocations) dof[a.user] += a.count;
    return dof;
}

/// x = matrix * s where s lists the scheduled raw symbols in allocation order.
struct Precoder {
    FieldMatrix matrix;                        ///< M x c
    std::vector<AntennaSelection> selection;   ///< receive antennas that observe s verbatim
};

/// Zero-forcing construction [H~^{-1}; 0]: user k's receive antennas 0..(its DoF - 1) see
/// its scheduled raw symbols and nothing else. Throws SingularMatrix if H~ is singular.
inline Precoder to_precoder(const SystemParams& p, const SlotDecision& d, const ChannelRealization& ch) {
    Precoder pc;
    const int c = d.total_dof();
    std::vector<int> used(p.K, 0);
    for (const auto& a : d.allocations) {
        if (a.count == 0) continue;
        AntennaSelection s{a.user, {}};
        for (int r = 0; r < a.count; ++r) s.antennas.push_back(used[a.user]++);
        pc.selection.push_back(std::move(s));
    }
    pc.matrix = FieldMatrix(p.M, c);
    if (c == 0) return pc;
    const auto f = p.field();
    const auto inv = mat_inv(f, stack_subchannel(ch, pc.selection, c));
    for (int r = 0; r < c; ++r)
        for (int k = 0; k < c; ++k) pc.matrix(r, k) = inv(r, k);
    return pc;
}

}  // namespace aoi
