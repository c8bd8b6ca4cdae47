#pragma once

// Empirical locality statistics of a reference string: rank-frequency
// (popularity), inter-reference distance histogram, working-set curves and
// the prefix-length/frequency correlation check. Distances and windows are
// measured in references (virtual time); wall-clock timestamps are ignored.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "mapcache/prefixdb.hpp"
#include "mapcache/refstring.hpp"

namespace mapcache {

struct RankFrequencyEntry {
    std::uint32_t rank = 0;  // 1-based
    ObjectId object = 0;
    std::uint64_t count = 0;
    double frequency = 0.0;  // count / total_refs
};

struct RankFrequencyTable {
    std::vector<RankFrequencyEntry> entries;  // counts non-increasing
    std::uint64_t total_refs = 0;
    std::vector<std::string> tokens;  // ObjectId -> token, copied from the source string
};

struct IrHistogram {
    // (distance, count), sorted by distance; distance >= 1 in references.
    std::vector<std::pair<std::uint64_t, std::uint64_t>> bins;
    std::uint64_t total = 0;  // == N - D: every non-first reference contributes one
};

struct WorkingSetPoint {
    std::uint64_t window = 0;  // T, in references
    double avg_size = 0.0;     // s(T), objects
    double miss_rate = 0.0;    // m(T), in [0, 1]
};

struct WorkingSetCurve {
    std::vector<WorkingSetPoint> points;
};

// Objects by descending reference count. Ties break by object id, which for
// a freshly interned string is first-appearance order; id order is also
// invariant under permutation, so shuffles reproduce the same table.
inline RankFrequencyTable rank_frequency(const ReferenceString& rs) {
    if (rs.refs.empty())
        throw std::invalid_argument("rank_frequency: empty reference string");
    const std::uint32_t d = rs.n_objects();
    std::vector<std::uint64_t> counts(d, 0);
    for (ObjectId id : rs.refs)
        ++counts[id];
    std::vector<ObjectId> order(d);
    for (std::uint32_t i = 0; i < d; ++i)
        order[i] = i;
    std::sort(order.begin(), order.end(), [&](ObjectId a, ObjectId b) {
        if (counts[a] != counts[b])
            return counts[a] > counts[b];
        return a < b;
    });
    RankFrequencyTable t;
    t.total_refs = rs.n_refs();
    t.tokens = rs.symbols;
    t.entries.reserve(d);
    const double n = static_cast<double>(t.total_refs);
    for (std::uint32_t i = 0; i < d; ++i) {
        ObjectId id = order[i];
        t.entries.push_back({i + 1, id, counts[id], static_cast<double>(counts[id]) / n});
    }
    return t;
}

// Distance between successive references to the same object, in references;
// adjacent repeats have distance 1. First references contribute nothing.
inline IrHistogram inter_reference_histogram(const ReferenceString& rs) {
    if (rs.refs.empty())
        throw std::invalid_argument("inter_reference_histogram: empty reference string");
    std::vector<std::int64_t> last(rs.n_objects(), -1);
    std::unordered_map<std::uint64_t, std::uint64_t> acc;
    std::int64_t pos = 0;
    for (ObjectId id : rs.refs) {
        if (last[id] >= 0)
            ++acc[static_cast<std::uint64_t>(pos - last[id])];
        last[id] = pos;
        ++pos;
    }
    IrHistogram h;
    h.bins.assign(acc.begin(), acc.end());
    std::sort(h.bins.begin(), h.bins.end());
    for (auto& [t, c] : h.bins)
        h.total += c;
    return h;
}

struct LogBin {
    double t_lo = 0.0, t_hi = 0.0;  // [t_lo, t_hi)
    double t_mid = 0.0;             // geometric midpoint
    std::uint64_t count = 0;
    double density = 0.0;  // count / bin width
};

// Geometric binning of an inter-reference histogram; tames tail noise for
// log-log fitting and plotting.
inline std::vector<LogBin> log_binned(const IrHistogram& h, double ratio = 1.25) {
    if (!(ratio > 1.0))
        throw std::invalid_argument("log_binned: ratio must be > 1");
    std::vector<LogBin> bins;
    if (h.bins.empty())
        return bins;
    double lo = 1.0;
    std::size_t i = 0;
    const double t_max = static_cast<double>(h.bins.back().first);
    while (lo <= t_max) {
        double hi = std::max(lo * ratio, lo + 1.0);
        LogBin b;
        b.t_lo = lo;
        b.t_hi = hi;
        b.t_mid = std::sqrt(lo * hi);
        while (i < h.bins.size() && static_cast<double>(h.bins[i].first) < hi) {
            b.count += h.bins[i].second;
            ++i;
        }
        b.density = static_cast<double>(b.count) / (hi - lo);
        if (b.count > 0)
            bins.push_back(b);
        lo = hi;
    }
    return bins;
}

// Average working-set size s(T) over all complete windows of length T, and
// miss rate m(T) = fraction of references whose predecessor distance exceeds
// T, first references counting as misses.
inline WorkingSetCurve working_set_curve(const ReferenceString& rs,
                                         const std::vector<std::uint64_t>& windows) {
    const std::uint64_t n = rs.n_refs();
    if (n == 0)
        throw std::invalid_argument("working_set_curve: empty reference string");
    WorkingSetCurve curve;
    curve.points.reserve(windows.size());

    // Predecessor distances once; m(T) is then a tail count per T.
    std::vector<std::uint64_t> dist;
    dist.reserve(n);
    {
        std::vector<std::int64_t> last(rs.n_objects(), -1);
        std::int64_t pos = 0;
        for (ObjectId id : rs.refs) {
            dist.push_back(last[id] < 0 ? ~std::uint64_t{0}
                                        : static_cast<std::uint64_t>(pos - last[id]));
            last[id] = pos;
            ++pos;
        }
    }

    std::vector<std::uint32_t> in_window(rs.n_objects(), 0);
    for (std::uint64_t t_win : windows) {
        if (t_win == 0 || t_win > n)
            throw std::invalid_argument("working_set_curve: window must be in [1, N]");

        std::uint64_t misses = 0;
        for (std::uint64_t d : dist)
            if (d > t_win)  // sentinel for first references compares greater
                ++misses;

        std::fill(in_window.begin(), in_window.end(), 0);
        std::uint64_t distinct = 0, size_sum = 0;
        for (std::uint64_t i = 0; i < t_win; ++i)
            if (in_window[rs.refs[i]]++ == 0)
                ++distinct;
        size_sum += distinct;
        for (std::uint64_t i = t_win; i < n; ++i) {
            if (in_window[rs.refs[i]]++ == 0)
                ++distinct;
            if (--in_window[rs.refs[i - t_win]] == 0)
                --distinct;
            size_sum += distinct;
        }
        WorkingSetPoint p;
        p.window = t_win;
        p.avg_size = static_cast<double>(size_sum) / static_cast<double>(n - t_win + 1);
        p.miss_rate = static_cast<double>(misses) / static_cast<double>(n);
        curve.points.push_back(p);
    }
    return curve;
}

// Spearman rank correlation with midrank ties; all-tied marginals give 0.
inline double spearman_rank_correlation(const std::vector<double>& x,
                                        const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("spearman_rank_correlation: need two equally sized samples");
    const std::size_t n = x.size();
    auto midranks = [n](const std::vector<double>& v) {
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i)
            order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> rank(n);
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && v[order[j + 1]] == v[order[i]])
                ++j;
            double mid = 0.5 * static_cast<double>(i + j) + 1.0;
            for (std::size_t k = i; k <= j; ++k)
                rank[order[k]] = mid;
            i = j + 1;
        }
        return rank;
    };
    std::vector<double> rx = midranks(x), ry = midranks(y);
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0)
        return 0.0;  // a constant marginal carries no order information
    return sxy / std::sqrt(sxx * syy);
}

// Correlation between prefix length and reference count over a prefix-mapped
// reference string. Both marginals are heavy tailed, so Spearman it is.
inline double length_frequency_correlation(const RankFrequencyTable& rft,
                                           const PrefixTable& table) {
    if (rft.tokens.empty())
        throw std::invalid_argument("length_frequency_correlation: table has no tokens");
    std::vector<double> lengths, counts;
    lengths.reserve(rft.entries.size());
    counts.reserve(rft.entries.size());
    for (const auto& e : rft.entries) {
        auto p = parse_prefix(rft.tokens[e.object]);
        if (!p || !table.contains(*p))
            throw std::invalid_argument("length_frequency_correlation: token is not a CIDR in table: " +
                                        rft.tokens[e.object]);
        lengths.push_back(static_cast<double>(p->length));
        counts.push_back(static_cast<double>(e.count));
    }
    return spearman_rank_correlation(lengths, counts);
}

}  // namespace mapcache
