#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "aoi/errors.hpp"
#include "aoi/finite_field.hpp"

namespace aoi {

/// A (K, M, N, B) status-updating system over GF(q).
struct SystemParams {
    int K = 1;  ///< source/user pairs
    int M = 1;  ///< transmit antennas
    int N = 1;  ///< receive antennas per user
    int B = 1;  ///< symbols per update
    std::uint32_t q = 65521;

    void validate() const {
        if (K < 1 || M < 1 || N < 1 || B < 1)
            throw InvalidParams("K, M, N, B must all be >= 1 (got " + str() + ")");
        if (!is_prime(q)) throw InvalidParams("q = " + std::to_string(q) + " is not prime");
    }

    PrimeField field() const { return PrimeField(q); }

    /// Largest number of independent equations a single user can receive per slot.
    int user_dof() const { return std::min(M, N); }
    /// Largest number of independent equations the whole system can deliver per slot.
    int system_dof() const { return std::min(M, N * K); }

    std::string str() const {
        return "(" + std::to_string(K) + "," + std::to_string(M) + "," + std::to_string(N) + "," +
               std::to_string(B) + ")";
    }

    bool operator==(const SystemParams&) const = default;
};

struct Update {
    int user = 0;              ///< 0-based user index
    std::int64_t gen_slot = 0; ///< slot (>= 1) at whose beginning the update was generated
    std::vector<fe_t> symbols; ///< exactly B payload symbols
};

/// Per-slot channel: one N x M matrix per user.
struct ChannelRealization {
    std::int64_t slot = 0;
    int attempt = 0;
    std::vector<FieldMatrix> per_user;
};

namespace detail {
enum class Stream : std::uint32_t { channel = 1, payload = 2 };

inline std::mt19937_64 make_rng(std::uint64_t seed, std::int64_t slot, Stream stream, std::uint64_t extra) {
    const auto s = static_cast<std::uint64_t>(slot);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(extra),
                      static_cast<std::uint32_t>(extra >> 32)};
    return std::mt19937_64(seq);
}
}  // namespace detail

/// Draws H_t with i.i.d. uniform entries. Deterministic in (seed, slot, attempt); a new
/// attempt index is how callers resample a slot whose inverted submatrix came out singular.
inline ChannelRealization sample_channel(const SystemParams& p, std::int64_t slot, std::uint64_t seed, int attempt = 0) {
    auto rng = detail::make_rng(seed, slot, detail::Stream::channel, static_cast<std::uint64_t>(attempt));
    std::uniform_int_distribution<fe_t> entry(0, p.q - 1);
    ChannelRealization ch;
    ch.slot = slot;
    ch.attempt = attempt;
    ch.per_user.reserve(p.K);
    for (int k = 0; k < p.K; ++k) {
        FieldMatrix h(p.N, p.M);
        for (int r = 0; r < p.N; ++r)
            for (int c = 0; c < p.M; ++c) h(r, c) = entry(rng);
        ch.per_user.push_back(std::move(h));
    }
    return ch;
}

/// Resamples until `accept` holds, at most `max_attempts` draws.
inline ChannelRealization sample_channel_until(const SystemParams& p, std::int64_t slot, std::uint64_t seed,
                                               const std::function<bool(const ChannelRealization&)>& accept,
                                               int max_attempts = 64) {
    for (int a = 0; a < max_attempts; ++a) {
        auto ch = sample_channel(p, slot, seed, a);
        if (accept(ch)) return ch;
    }
    throw ResampleExhausted("no acceptable channel for slot " + std::to_string(slot) + " after " +
                            std::to_string(max_attempts) + " draws");
}

struct AntennaSelection {
    int user = 0;
    std::vector<int> antennas;  ///< receive-antenna rows of that user, in stacking order
};

/// Stacks the selected receive-antenna rows of H_t restricted to the first `columns`
/// transmit antennas. The selection must hold exactly `columns` rows.
inline FieldMatrix stack_subchannel(const ChannelRealization& ch, std::span<const AntennaSelection> selection, int columns) {
    const int m = ch.per_user.empty() ? 0 : static_cast<int>(ch.per_user.front().cols());
    int rows = 0;
    for (const auto& s : selection) rows += static_cast<int>(s.antennas.size());
    if (rows > m) throw DofExceeded("selected " + std::to_string(rows) + " receive antennas but only " + std::to_string(m) + " transmit antennas");
    if (rows != columns) throw ShapeError("stack_subchannel: " + std::to_string(rows) + " rows selected for " + std::to_string(columns) + " columns");
    FieldMatrix out(rows, columns);
    int r = 0;
    for (const auto& s : selection) {
        if (s.user < 0 || s.user >= static_cast<int>(ch.per_user.size())) throw ShapeError("stack_subchannel: bad user index");
        const auto& h = ch.per_user[s.user];
        for (int a : s.antennas) {
            if (a < 0 || a >= static_cast<int>(h.rows())) throw ShapeError("stack_subchannel: bad antenna index");
            for (int c = 0; c < columns; ++c) out(r, c) = h(a, c);
            ++r;
        }
    }
    return out;
}

/// The update generated at the beginning of `gen_slot` for `user`. Payloads are a pure
/// function of (seed, user, gen_slot) so any component can regenerate them.
inline Update generate_update(const SystemParams& p, int user, std::int64_t gen_slot, std::uint64_t seed) {
    auto rng = detail::make_rng(seed, gen_slot, detail::Stream::payload, static_cast<std::uint64_t>(user));
    std::uniform_int_distribution<fe_t> sym(0, p.q - 1);
    Update u;
    u.user = user;
    u.gen_slot = gen_slot;
    u.symbols.resize(p.B);
    for (auto& s : u.symbols) s = sym(rng);
    return u;
}

inline std::vector<Update> generate_updates(const SystemParams& p, std::int64_t slot, std::uint64_t seed) {
    std::vector<Update> out;
    out.reserve(p.K);
    for (int k = 0; k < p.K; ++k) out.push_back(generate_update(p, k, slot, seed));
    return out;
}

}  // namespace aoi
