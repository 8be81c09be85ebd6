#pragma once

// Closed-form AoI values for the covered regimes, plus the symbolic minimum-pattern
// tables used to cross-check the simulated and searched dynamics.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "aoi/errors.hpp"
#include "aoi/rational.hpp"
#include "aoi/system_model.hpp"

namespace aoi {

/// `overline(x)` = (x - 1) mod M + 1, mapping any integer into [1:M].
inline int overline(int x, int m) { return ((x - 1) % m + m) % m + 1; }

/// Index quantities shared by the round-robin and framed schemes.
struct TheoryIndex {
    int i = 0;      ///< ceil(B/M) - 1            (only when M < B)
    int j = 0;      ///< floor(1 / (B/M - i))    (only when M < B)
    int p = 0;      ///< floor(K/M)
    int q_rem = 0;  ///< K mod M
    int d = 0;      ///< gcd(q_rem, M)
    bool has_ij = false;
};

/// (i, j) such that j/(ij+1) <= M/B < (j+1)/((j+1)i+1). Requires M < B.
inline std::pair<int, int> ij_of(int m, int b) {
    if (m < 1 || b < 1) throw InvalidParams("ij_of: M and B must be positive");
    if (m >= b) throw NotApplicable("ij_of requires M < B");
    const int i = (b + m - 1) / m - 1;
    const int j = m / (b - i * m);
    return {i, j};
}

inline TheoryIndex theory_index(const SystemParams& p) {
    TheoryIndex t;
    t.p = p.K / p.M;
    t.q_rem = p.K % p.M;
    t.d = std::gcd(t.q_rem, p.M);
    if (p.M < p.B) {
        std::tie(t.i, t.j) = ij_of(p.M, p.B);
        t.has_ij = true;
    }
    return t;
}

/// Claimed minimum summed average AoI of a (K, M, 1, B) system.
inline Rational theorem1(int k, int m, int b) {
    if (k < 1 || m < 1 || b < 1) throw InvalidParams("theorem1: arguments must be positive");
    if (k <= m) return Rational(static_cast<std::int64_t>(k) * (3 * b - 1), 2);
    const std::int64_t p = k / m, q = k % m;
    return Rational(p * m * (p * b + 2 * b - 1) + q * (2 * p * b + 3 * b - 1), 2);
}

/// Per-segment lower bound for the M < B two-user regime.
inline Rational segment_lower_bound(int i, int j) {
    if (i < 1 || j < 1) throw InvalidParams("segment_lower_bound: i, j must be >= 1");
    if (j == 1) return Rational(4 * i + 3);
    return Rational(4 * i + 1) + Rational(2 * i + 1, static_cast<std::int64_t>(i) * j + 1);
}

/// Minimum summed average AoI of a (2, M, N, B) system with N >= B.
inline Rational theorem2(int m, int n, int b) {
    if (m < 1 || n < 1 || b < 1) throw InvalidParams("theorem2: arguments must be positive");
    if (n < b) throw NotApplicable("theorem2 requires N >= B");
    if (m >= 2 * b) return Rational(2);
    if (m >= b) return Rational(3);
    auto [i, j] = ij_of(m, b);
    return segment_lower_bound(i, j);
}

/// Total AoI accumulated between two updates L frames apart: sum of l for l in [B, B(1+L)-1].
inline std::int64_t f_total(std::int64_t l, std::int64_t b) {
    if (l < 0) throw InvalidParams("f_total: L must be >= 0");
    return (b + b * (1 + l) - 1) * b * l / 2;
}

/// Round-robin average assembled from the per-rank gaps; identical to theorem1 when K > M.
inline Rational roundrobin_average(int k, int m, int b) {
    if (k <= m) throw NotApplicable("roundrobin_average requires K > M");
    const int p = k / m, q = k % m;
    return Rational((m - q) * f_total(p, b) + q * f_total(p + 1, b), b);
}

/// Frame gap until the rank-i user of a frame is served again.
inline int li_of(int k, int m, int i) {
    if (i < 1 || i > m) throw InvalidParams("li_of: rank must be in [1:M]");
    const int p = k / m, q = k % m;
    return i + q <= m ? p : p + 1;
}

/// Ranks a rank-i user takes over its next M/d service frames (as a sorted set).
inline std::vector<int> ranking_set(int k, int m, int i) {
    if (i < 1 || i > m) throw InvalidParams("ranking_set: rank must be in [1:M]");
    const int d = std::gcd(k % m, m);
    std::vector<int> r;
    for (int l = 1; l <= m / d; ++l) r.push_back(overline(i + l * d, m));
    std::sort(r.begin(), r.end());
    return r;
}

/// Sorted per-slot AoI pair of a two-user system.
struct AoiPattern {
    int low = 0;
    int high = 0;
    int sum() const { return low + high; }
    friend bool operator==(const AoiPattern&, const AoiPattern&) = default;
};

/// Element-wise minimum AoI pattern of a (2, M, N, B) system with N >= B.
inline AoiPattern min_pattern(int m, int b) {
    if (m >= 2 * b) return {1, 1};
    if (m >= b) return {1, 2};
    auto [i, j] = ij_of(m, b);
    return {i + 1, 2 * i + (j == 1 ? 2 : 1)};
}

/// Whether (x+z)/(y+w) >= t. With x/y >= t and z/w >= t this always holds.
inline bool mediant_check(std::int64_t x, std::int64_t y, std::int64_t z, std::int64_t w, const Rational& t) {
    if (y <= 0 || w <= 0) throw InvalidParams("mediant_check: denominators must be positive");
    return Rational(x + z, y + w) >= t;
}

/// Closed-form optimum for the regimes with a known answer, else nullopt.
inline std::optional<Rational> theory_value(const SystemParams& p) {
    if (p.N == 1) return theorem1(p.K, p.M, p.B);
    if (p.K == 2 && p.N >= p.B) return theorem2(p.M, p.N, p.B);
    return std::nullopt;
}

namespace detail {
inline void ramp(std::vector<AoiPattern>& out, int low, int high, int count) {
    for (int s = 0; s < count; ++s) out.push_back({low + s, high + s});
}
}  // namespace detail

/// Minimum patterns over a segment of length ij+1 (j >= 2); deliveries end each row.
inline std::vector<AoiPattern> table_short_segment(int i, int j) {
    if (i < 1 || j < 2) throw InvalidParams("short-segment table needs i >= 1, j >= 2");
    std::vector<AoiPattern> t;
    detail::ramp(t, i + 2, 2 * i + 2, i);
    t.push_back({i + 1, 2 * i + 2});
    detail::ramp(t, i + 2, 2 * i + 3, i - 1);
    t.push_back({i + 1, 2 * i + 1});
    for (int l = 2; l <= j - 1; ++l) {
        detail::ramp(t, i + 2, 2 * i + 2, i - 1);
        t.push_back({i + 1, 2 * i + 1});
    }
    return t;
}

/// Minimum patterns over a segment of length (j+1)i+1 (j >= 2).
inline std::vector<AoiPattern> table_long_segment(int i, int j) {
    if (i < 1 || j < 2) throw InvalidParams("long-segment table needs i >= 1, j >= 2");
    std::vector<AoiPattern> t;
    detail::ramp(t, i + 2, 2 * i + 2, i);
    t.push_back({i + 2, 2 * i + 2});
    detail::ramp(t, i + 3, 2 * i + 3, i - 1);
    t.push_back({i + 1, 2 * i + 2});
    detail::ramp(t, i + 2, 2 * i + 3, i - 1);
    t.push_back({i + 1, 2 * i + 1});
    for (int l = 3; l <= j; ++l) {
        detail::ramp(t, i + 2, 2 * i + 2, i - 1);
        t.push_back({i + 1, 2 * i + 1});
    }
    return t;
}

/// First 2i+1 slots of a long segment served by a nested (two-update) resource chunk whose
/// inner update starts gamma slots into the segment. `j1` selects the j = 1 variant.
/// gamma must lie in [0:i-1]; at gamma = i both deliveries collide in one slot.
inline std::vector<AoiPattern> table_nested_chunk(int i, int gamma, bool j1) {
    if (i < 1 || gamma < 0 || gamma > i - 1) throw InvalidParams("nested-chunk table needs i >= 1, gamma in [0:i-1]");
    const int h = j1 ? 1 : 0;
    std::vector<AoiPattern> t;
    detail::ramp(t, i + 2, 2 * i + 2 + h, gamma + 1);
    detail::ramp(t, i + gamma + 3, 2 * i + gamma + 3 + h, i - 1);
    t.push_back({i + 1, 2 * i + gamma + 2});
    detail::ramp(t, i + 2, 2 * i + gamma + 3, i - gamma - 1);
    t.push_back({2 * i - gamma + 1, 2 * i + 2});
    return t;
}

inline std::int64_t pattern_total(const std::vector<AoiPattern>& t) {
    std::int64_t s = 0;
    for (const auto& p : t) s += p.sum();
    return s;
}

}  // namespace aoi
