#include <gtest/gtest.h>

#include <random>

#include "aoi/engine.hpp"

using namespace aoi;

namespace {

RunResult simulate(PolicyKind k, SystemParams p, Level level = Level::dof, std::uint64_t seed = 1) {
    RunOptions o;
    o.level = level;
    o.seed = seed;
    return run(make_policy(k, p), o);
}

// Two overlapping single-DoF streams started one slot apart, cycling over three users.
SlotDecision staggered_3212(std::int64_t t) {
    SlotDecision d{t, {{static_cast<int>((t - 1) % 3), t, 0, 1}}};
    if (t >= 2) d.allocations.push_back({static_cast<int>((t - 2) % 3), t - 1, 1, 1});
    return d;
}

}  // namespace

TEST(ReceiverLog, RawSymbolsDecode) {
    PrimeField f(5);
    ReceiverLog log(f, 0, 2);
    const std::vector<SymbolId> cols{{1, 0}, {1, 1}};
    const std::vector<fe_t> rhs{3, 4};
    log.add_equations(cols, FieldMatrix::identity(2), rhs);
    const auto dec = log.decode_scan(2);
    ASSERT_EQ(dec.size(), 1u);
    EXPECT_EQ(dec[0].symbols, rhs);
    EXPECT_EQ(dec[0].age(), 2);
    EXPECT_EQ(log.columns().size(), 0u);
}

TEST(ReceiverLog, TooFewEquations) {
    PrimeField f(5);
    ReceiverLog log(f, 0, 2);
    const std::vector<SymbolId> cols{{1, 0}, {1, 1}};
    const std::vector<fe_t> rhs{3};
    log.add_equations(cols, FieldMatrix::from_rows(f, {{1, 1}}), rhs);
    EXPECT_TRUE(log.decode_scan(1).empty());
    EXPECT_EQ(log.equation_count(), 1u);
}

TEST(ReceiverLog, MixedEquationsDecode) {
    // w = (2, 4): w1 + w2 = 1, w1 + 2 w2 = 0 over GF(5)
    PrimeField f(5);
    ReceiverLog log(f, 0, 2);
    const std::vector<SymbolId> cols{{1, 0}, {1, 1}};
    const std::vector<fe_t> rhs1{1}, rhs2{0};
    log.add_equations(cols, FieldMatrix::from_rows(f, {{1, 1}}), rhs1);
    EXPECT_TRUE(log.decode_scan(1).empty());
    log.add_equations(cols, FieldMatrix::from_rows(f, {{1, 2}}), rhs2);
    const auto dec = log.decode_scan(2);
    ASSERT_EQ(dec.size(), 1u);
    EXPECT_EQ(dec[0].symbols, (std::vector<fe_t>{2, 4}));
}

TEST(ReceiverLog, DecodeAgreesWithRowSpace) {
    std::mt19937_64 rng(4);
    PrimeField f(3);
    std::uniform_int_distribution<fe_t> d(0, 2);
    for (int n = 0; n < 300; ++n) {
        ReceiverLog log(f, 0, 2);
        const std::vector<SymbolId> cols{{1, 0}, {1, 1}, {2, 0}, {2, 1}};
        FieldMatrix all(0, 4);
        const int rows = 1 + n % 4;
        for (int r = 0; r < rows; ++r) {
            std::vector<fe_t> row(4);
            for (auto& x : row) x = d(rng);
            all.append_row(row);
        }
        log.add_equations(cols, all, std::vector<fe_t>(rows, 0));
        const auto dec = log.decode_scan(3);
        for (std::int64_t g : {1, 2}) {
            bool expect = true;
            for (int idx = 0; idx < 2; ++idx) {
                std::vector<fe_t> e(4, 0);
                e[(g - 1) * 2 + idx] = 1;
                expect = expect && row_space_contains(f, all, e);
            }
            const bool got = std::any_of(dec.begin(), dec.end(), [&](const DecodedUpdate& u) { return u.gen_slot == g; });
            // an older update is only reported if it is complete on its own
            EXPECT_EQ(got, expect) << "gen " << g;
        }
    }
}

TEST(Step, IdleAndJoint) {
    SystemParams p{2, 4, 2, 2};
    EngineState st(p, 1, Level::symbol, {3, 5});
    const auto ch = sample_channel(p, 1, 1);
    SlotDecision idle{1, {}};
    step_symbol(st, idle, ch, to_precoder(p, idle, ch));
    EXPECT_EQ(st.aoi, (std::vector<std::int64_t>{4, 6}));
    const auto pol = make_policy(PolicyKind::joint, p);
    const auto d = pol.decide(2);
    const auto ch2 = sample_channel(p, 2, 1);
    const auto r = step_symbol(st, d, ch2, to_precoder(p, d, ch2));
    EXPECT_EQ(st.aoi, (std::vector<std::int64_t>{1, 1}));
    EXPECT_EQ(r.payload_mismatches, 0);
}

TEST(Step, SyncResetsToB) {
    SystemParams p{3, 4, 1, 2};
    const auto pol = make_policy(PolicyKind::sync, p);
    for (Level lv : {Level::symbol, Level::dof}) {
        EngineState st(p, 1, lv, {2, 2, 2});
        for (std::int64_t t = 1; t <= 2; ++t) {
            const auto d = pol.decide(t);
            if (lv == Level::dof) {
                step_dof(st, d);
            } else {
                const auto ch = sample_channel(p, t, 1);
                step_symbol(st, d, ch, to_precoder(p, d, ch));
            }
        }
        EXPECT_EQ(st.aoi, (std::vector<std::int64_t>{2, 2, 2}));
    }
}

TEST(Run, ClosedFormExamples) {
    EXPECT_EQ(simulate(PolicyKind::sync, {3, 4, 1, 2}).summary.summed_avg, Rational(15, 2));
    EXPECT_EQ(simulate(PolicyKind::framed, {2, 7, 12, 12}).summary.summed_avg, Rational(7));
    EXPECT_EQ(simulate(PolicyKind::framed, {2, 2, 3, 3}).summary.summed_avg, Rational(6));
    EXPECT_EQ(simulate(PolicyKind::round_robin, {3, 2, 1, 2}).summary.summed_avg, Rational(19, 2));
    EXPECT_EQ(simulate(PolicyKind::joint, {2, 4, 2, 2}).summary.summed_avg, Rational(2));
    EXPECT_EQ(simulate(PolicyKind::alternating, {2, 3, 2, 2}).summary.summed_avg, Rational(3));
}

TEST(Run, AlternatingPerSlotPattern) {
    const auto r = simulate(PolicyKind::alternating, {2, 3, 2, 2});
    for (std::int64_t t = 1; t <= r.trace.T; ++t) {
        const auto a = r.trace.per_user[0][t - 1], b = r.trace.per_user[1][t - 1];
        EXPECT_EQ(std::min(a, b), 1);
        EXPECT_EQ(std::max(a, b), 2);
    }
}

TEST(Run, StaggeredStreamsBeatRoundRobinWhenKNotMultipleOfM) {
    SystemParams p{3, 2, 1, 2};
    for (Level lv : {Level::dof, Level::symbol}) {
        RunOptions o;
        o.level = lv;
        const auto r = run_schedule(p, 3, staggered_3212, o);
        EXPECT_EQ(r.summary.summed_avg, Rational(9));
        EXPECT_EQ(r.payload_mismatches, 0);
    }
}

TEST(AverageOverPeriods, ConstantAndWindow) {
    AoiTrace tr;
    tr.per_user = {std::vector<std::int64_t>(12, 3), std::vector<std::int64_t>(12, 4)};
    tr.T = 12;
    tr.W = 2;
    EXPECT_EQ(average_over_periods(tr, 5).summed_avg, Rational(7));
    EXPECT_EQ(average_over_periods(tr, 5).per_user_avg[0], Rational(3));
    EXPECT_THROW(average_over_periods(tr, 3), WindowError);
    EXPECT_THROW(average_over_periods(tr, 0), WindowError);
}

TEST(AverageOverPeriods, ShiftInvariantAfterWarmup) {
    const auto pol = make_policy(PolicyKind::round_robin, {5, 3, 1, 2});
    RunOptions o;
    o.W = 4 * pol.period();
    o.T = o.W + 6 * pol.period();
    const auto r = run(pol, o);
    for (std::int64_t shift = 1; shift < pol.period(); ++shift) {
        AoiTrace tr = r.trace;
        tr.W = o.W + shift;
        tr.T = tr.W + 5 * pol.period();
        EXPECT_EQ(average_over_periods(tr, pol.period()).summed_avg, r.summary.summed_avg);
    }
}

TEST(Run, SymbolMatchesDof) {
    for (auto [k, p] : std::vector<std::pair<PolicyKind, SystemParams>>{
             {PolicyKind::sync, {3, 4, 1, 2}},      {PolicyKind::round_robin, {3, 2, 1, 2}},
             {PolicyKind::joint, {2, 4, 2, 2}},     {PolicyKind::alternating, {2, 3, 2, 2}},
             {PolicyKind::framed, {2, 2, 3, 3}},    {PolicyKind::pi1, {2, 7, 12, 12}}}) {
        const auto dof = simulate(k, p, Level::dof, 3);
        for (std::uint64_t seed : {1, 2, 3}) {
            const auto sym = simulate(k, p, Level::symbol, seed);
            EXPECT_EQ(sym.trace.per_user, dof.trace.per_user) << policy_name(k);
            EXPECT_EQ(sym.payload_mismatches, 0);
            EXPECT_EQ(sym.deliveries.size(), dof.deliveries.size());
        }
    }
}

TEST(Run, SmallFieldResamples) {
    SystemParams p{3, 4, 1, 2, 2};
    RunOptions o;
    o.level = Level::symbol;
    const auto r = run(make_policy(PolicyKind::sync, p), o);
    EXPECT_GT(r.resamples, 0);
    EXPECT_EQ(r.payload_mismatches, 0);
    EXPECT_EQ(r.summary.summed_avg, Rational(15, 2));
}

TEST(Run, InitialAoiDoesNotChangeAverage) {
    for (auto [k, p] : std::vector<std::pair<PolicyKind, SystemParams>>{
             {PolicyKind::sync, {3, 4, 1, 2}}, {PolicyKind::round_robin, {3, 2, 1, 2}}, {PolicyKind::framed, {2, 2, 3, 3}},
             {PolicyKind::pi1, {2, 5, 8, 8}}}) {
        RunOptions o;
        o.initial_aoi = std::vector<std::int64_t>(p.K, 40);
        EXPECT_EQ(run(make_policy(k, p), o).summary.summed_avg, simulate(k, p).summary.summed_avg);
    }
}

TEST(Run, DeliveriesPerWindowForSingleAntennaUsers) {
    for (auto [k, p] : std::vector<std::pair<PolicyKind, SystemParams>>{
             {PolicyKind::sync, {3, 4, 1, 2}}, {PolicyKind::round_robin, {3, 2, 1, 2}}, {PolicyKind::round_robin, {7, 3, 1, 3}}}) {
        const auto r = simulate(k, p);
        for (std::int64_t start = 1; start + p.B - 1 <= r.trace.T; ++start) {
            std::set<int> users;
            int n = 0;
            for (const auto& d : r.deliveries)
                if (d.slot >= start && d.slot < start + p.B) ++n, users.insert(d.user);
            EXPECT_LE(n, std::min(p.K, p.M));
            EXPECT_EQ(static_cast<int>(users.size()), n);
        }
    }
}

TEST(Run, AgesAtDelivery) {
    const auto r = simulate(PolicyKind::framed, {2, 2, 3, 3});
    for (const auto& d : r.deliveries) EXPECT_EQ(d.age(), 2);
    const auto s = simulate(PolicyKind::sync, {3, 4, 1, 2});
    for (const auto& d : s.deliveries) EXPECT_EQ(d.age(), 2);
}

TEST(Run, Deterministic) {
    const auto a = simulate(PolicyKind::pi1, {2, 2, 3, 3}, Level::symbol, 9);
    const auto b = simulate(PolicyKind::pi1, {2, 2, 3, 3}, Level::symbol, 9);
    EXPECT_EQ(a.trace.per_user, b.trace.per_user);
    RunOptions o;
    o.T = 5;
    o.W = 5;
    EXPECT_THROW(run(make_policy(PolicyKind::sync, {3, 4, 1, 2}), o), WindowError);
}
