#include <gtest/gtest.h>

#include "aoi/oracle.hpp"

using namespace aoi;
using namespace aoi::oracle;

namespace {

SystemParams two_user(int m, int b) {
    SystemParams p;
    p.K = 2, p.M = m, p.N = b, p.B = b;
    return p;
}

bool has_check(const std::vector<Violation>& v, const std::string& name) {
    return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.check == name; });
}

// Back-to-back full-rate updates that always go to user 1.
SlotDecision one_user_stream(const SystemParams& p, std::int64_t t) {
    SlotDecision d{t, {}};
    const std::int64_t lo = (t - 1) * p.M, hi = t * p.M;
    for (std::int64_t n = lo / p.B; n <= (hi - 1) / p.B; ++n) {
        const std::int64_t s = std::max(lo, n * p.B), e = std::min(hi, (n + 1) * p.B);
        d.allocations.push_back({0, n * p.B / p.M + 1, static_cast<int>(s - n * p.B), static_cast<int>(e - s)});
    }
    return d;
}

}  // namespace

TEST(Audit, OptimalCyclesPassAllChecks) {
    struct Case {
        SystemParams p;
        Mode mode;
    };
    for (const auto& c : {Case{two_user(7, 12), Mode::pi0}, Case{two_user(2, 3), Mode::full}, Case{two_user(3, 4), Mode::full},
                          Case{two_user(2, 5), Mode::full}, Case{two_user(5, 12), Mode::pi0}}) {
        const auto s = search_full(c.p, {c.mode});
        ASSERT_EQ(s.result.value, theory_value(c.p)) << c.p.str();
        const auto rep = pattern_audit(unroll_cycle(s.model, s.graph, s.result.cycle));
        EXPECT_TRUE(rep.ok()) << c.p.str() << ": " << (rep.ok() ? "" : rep.violations[0].check + " " + rep.violations[0].detail);
        EXPECT_EQ(rep.observed, rep.floor) << c.p.str();
        EXPECT_GT(rep.deliveries, 0);
    }
}

TEST(Audit, Pi1TracePassesAllChecks) {
    for (auto [m, b] : {std::pair{7, 12}, {2, 3}, {5, 7}, {5, 12}, {7, 9}, {7, 10}, {3, 11}}) {
        const auto p = two_user(m, b);
        const auto rep = pattern_audit(trace_from_policy(make_policy(PolicyKind::pi1, p), 300));
        EXPECT_TRUE(rep.ok()) << p.str() << ": " << (rep.ok() ? "" : rep.violations[0].check + " " + rep.violations[0].detail);
        EXPECT_EQ(rep.chunks_type2, 0);
    }
}

TEST(Audit, DetectsOneSidedService) {
    const auto p = two_user(5, 7);
    const auto tr = trace_from_schedule(p, 7, [&](std::int64_t t) { return one_user_stream(p, t); }, 70);
    const auto rep = pattern_audit(tr);
    EXPECT_FALSE(rep.ok());
    EXPECT_TRUE(has_check(rep.violations, "higher-aoi-first"));
}

TEST(Audit, DetectsIrregularOverlap) {
    // Two updates of user 1 and 2 interleaved one DoF at a time: neither disjoint nor nested
    // with full-rate service of the inner update.
    const auto p = two_user(2, 4);
    auto decide = [](std::int64_t t) {
        const std::int64_t m = (t - 1) / 4, l = (t - 1) % 4;
        return SlotDecision{t, {{0, 4 * m + 1, static_cast<int>(l), 1}, {1, 4 * m + 1, static_cast<int>(l), 1}}};
    };
    const auto rep = pattern_audit(trace_from_schedule(p, 4, decide, 40));
    EXPECT_TRUE(has_check(rep.violations, "delivery-order"));
    EXPECT_TRUE(has_check(rep.violations, "chunk-type"));
}

TEST(Audit, RejectsOtherRegimes) {
    EXPECT_THROW(pattern_audit(trace_from_policy(make_policy(PolicyKind::alternating, two_user(3, 2)), 10)), NotApplicable);
}

TEST(Segments, Pi1Statistics) {
    for (auto [m, b] : {std::pair{7, 12}, {2, 3}, {5, 7}, {5, 12}, {7, 9}, {7, 10}, {3, 11}, {4, 9}}) {
        const auto p = two_user(m, b);
        const auto [i, j] = ij_of(m, b);
        const auto st = segment_statistics(trace_from_policy(make_policy(PolicyKind::pi1, p), 600));
        EXPECT_TRUE(st.ok()) << p.str() << ": " << (st.ok() ? "" : st.violations[0].check + " " + st.violations[0].detail);
        ASSERT_GE(st.U.size(), 3u);
        EXPECT_EQ(st.U[0], 1u);
        EXPECT_EQ(st.U[1], static_cast<std::size_t>(j + 1));
        for (auto avg : st.averages) EXPECT_GE(avg, segment_lower_bound(i, j));
    }
}

TEST(Segments, MisplacedDeliveryIsReported) {
    // every other update of the stream held back one slot
    const auto p = two_user(5, 7);
    const auto pol = make_policy(PolicyKind::pi1, p);
    auto tr = trace_from_policy(pol, 140);
    for (auto& u : tr.updates)
        if (u.delivery > 0 && (u.gen % 3) == 0) ++u.delivery;
    EXPECT_FALSE(segment_statistics(tr).ok());
}

TEST(Tables, Pi1SegmentsMatchMinimumPatterns) {
    for (auto [m, b] : {std::pair{5, 7}, {5, 12}, {7, 9}}) {
        const auto rep = table_reproduction(two_user(m, b), 600);
        EXPECT_TRUE(rep.ok()) << m << "/" << b;
        EXPECT_GT(rep.short_segments, 0u);
        EXPECT_GT(rep.long_segments, 0u);
    }
    EXPECT_THROW(table_reproduction(two_user(7, 12), 100), NotApplicable);
}

TEST(Tables, NestedChunkDynamicsMatchTable) {
    for (int i = 1; i <= 6; ++i)
        for (int gamma = 0; gamma < i; ++gamma)
            for (bool j1 : {false, true}) {
                const auto got = nested_chunk_dynamics(i, j1 ? 1 : 2, gamma);
                EXPECT_EQ(got, table_nested_chunk(i, gamma, j1)) << i << " " << gamma << " " << j1;
                const std::int64_t g = gamma;
                const std::int64_t want = j1 ? (4 * i + 3) * (2 * i + 1) + g * g + (i + 1) * g : 8 * i * i + 9 * i + 3 + g * g + i * g;
                EXPECT_EQ(pattern_total(got), want) << i << " " << gamma << " " << j1;
            }
}

TEST(Blocks, IdleThenStreamNeverBeatsOptimum) {
    for (auto [m, b] : {std::pair{2, 3}, {5, 7}, {7, 12}, {5, 12}, {7, 9}, {3, 11}}) {
        const auto p = two_user(m, b);
        const auto [i, j] = ij_of(m, b);
        const auto bound = theorem2(m, b, b);
        for (int v = 1; v <= 5; ++v)
            for (int u = 1; u <= 3 * j + 3; ++u) EXPECT_GE(block_average(p, u, v), bound) << p.str() << " u=" << u << " v=" << v;
    }
}

TEST(Blocks, HandComputed) {
    // (2,2,3,3): floor (2,3); one idle slot then one update delivered at slot 3 with age 2
    // AoI: slot1 (4,3) slot2 (5,4) slot3 (2,5) -> 23/3
    EXPECT_EQ(block_average(two_user(2, 3), 1, 1), Rational(23, 3));
}
