#pragma once

// Synthetic reference strings under the independent reference model, and
// IRM shuffling of existing strings. All randomness flows through a
// splitmix64 generator so that identical (parameters, seed) produce
// byte-identical traces on any platform. Draws use inverse-CDF binary
// search, one draw per reference.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mapcache/refstring.hpp"

namespace mapcache {

struct Seed {
    std::uint64_t value = 0;
};

// splitmix64: tiny, seedable, passes standard statistical batteries.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(Seed seed) : state(seed.value) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53 bits.
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform in [0, n); fixed-point multiply keeps it platform independent.
    std::uint64_t next_below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }
};

// Two-regime rank law: p(k) proportional to k^-b1 up to the crossover rank,
// continuity matched k^-b2 beyond. The frequency-domain exponents q and r
// map to rank exponents via b = 1/(q-1) and b = 1/(r-1) respectively.
struct RankLaw {
    std::uint32_t d_objects = 0;
    double head_exponent = 0.0;  // b1 = 1/(q-1)
    double tail_exponent = 0.0;  // b2 = 1/(r-1), >= b1
    std::uint32_t crossover_rank = 0;
};

// Probability vector over ranks 1..D; sums to exactly 1 (the last element
// absorbs rounding). Zero exponents are admitted as the uniform degenerate
// case used by scaling controls.
inline std::vector<double> rank_probabilities(const RankLaw& law) {
    if (law.d_objects < 2)
        throw std::invalid_argument("rank_probabilities: requires at least 2 objects");
    if (law.crossover_rank < 1 || law.crossover_rank > law.d_objects)
        throw std::invalid_argument("rank_probabilities: crossover rank out of range");
    if (!(law.head_exponent >= 0.0) || !(law.tail_exponent >= law.head_exponent))
        throw std::invalid_argument("rank_probabilities: requires 0 <= b1 <= b2");
    const std::uint32_t d = law.d_objects;
    const std::uint32_t kc = law.crossover_rank;
    std::vector<double> w(d);
    for (std::uint32_t k = 1; k <= kc; ++k)
        w[k - 1] = std::pow(static_cast<double>(k), -law.head_exponent);
    const double at_kc = w[kc - 1];
    for (std::uint32_t k = kc + 1; k <= d; ++k)
        w[k - 1] = at_kc * std::pow(static_cast<double>(k) / kc, -law.tail_exponent);
    double sum = 0.0, comp = 0.0;
    for (std::uint32_t i = d; i-- > 0;) {  // ascending magnitude
        double y = w[i] - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    double acc = 0.0;
    for (std::uint32_t i = 0; i < d; ++i) {
        w[i] /= sum;
        if (i + 1 < d)
            acc += w[i];
    }
    w[d - 1] = 1.0 - acc;
    if (w[d - 1] < 0.0)
        w[d - 1] = 0.0;
    return w;
}

// N i.i.d. draws from probs. Ids are interned in first-appearance order to
// keep them dense; tokens carry the original 0-based rank index, so the
// symbol table records which popularity slot each object came from.
inline ReferenceString generate_irm(const std::vector<double>& probs, std::uint64_t n,
                                    Seed seed) {
    if (probs.empty())
        throw std::invalid_argument("generate_irm: empty probability vector");
    if (n == 0)
        throw std::invalid_argument("generate_irm: need at least one reference");
    std::vector<double> cdf(probs.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        cdf[i] = acc;
    }
    cdf.back() = 1.0;

    SplitMix64 rng(seed);
    ReferenceString rs;
    rs.refs.reserve(n);
    std::vector<std::int64_t> id_of(probs.size(), -1);
    for (std::uint64_t i = 0; i < n; ++i) {
        double u = rng.next_double();
        auto idx = static_cast<std::size_t>(
            std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        if (idx >= cdf.size())
            idx = cdf.size() - 1;
        if (id_of[idx] < 0) {
            id_of[idx] = static_cast<std::int64_t>(rs.symbols.size());
            rs.symbols.push_back(std::to_string(idx));
        }
        rs.refs.push_back(static_cast<ObjectId>(id_of[idx]));
    }
    return rs;
}

// Uniform random permutation (Fisher-Yates) of the reference order. The
// multiset of ids is untouched, so popularity statistics are preserved
// exactly; only the temporal structure is destroyed.
inline ReferenceString irm_shuffle(const ReferenceString& rs, Seed seed) {
    if (rs.refs.empty())
        throw std::invalid_argument("irm_shuffle: empty reference string");
    ReferenceString out;
    out.refs = rs.refs;
    out.symbols = rs.symbols;
    SplitMix64 rng(seed);
    for (std::uint64_t i = out.refs.size() - 1; i > 0; --i) {
        std::uint64_t j = rng.next_below(i + 1);
        std::swap(out.refs[i], out.refs[j]);
    }
    return out;
}

}  // namespace mapcache
