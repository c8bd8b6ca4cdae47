#pragma once

// Empirical LRU evaluation. Two routes to the same answer:
//  - stack_distance_histogram: one pass over the trace yielding miss rates
//    for every cache size at once (LRU is a stack algorithm);
//  - simulate_lru_fixed: exact simulation of a single fixed-size cache.
// The two must agree exactly at every size; tests enforce it.

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mapcache/refstring.hpp"

namespace mapcache {

struct StackDistanceHistogram {
    // bins[d] = number of re-references with stack distance d, d in [1, D].
    // A reference hits an LRU cache of size s iff its distance <= s.
    std::vector<std::uint64_t> bins;
    std::uint64_t cold_misses = 0;  // first-ever references (== D without warmup)
    std::uint64_t total_refs = 0;
};

struct CacheStats {
    std::uint64_t size = 0;
    std::uint64_t hits = 0;
    std::uint64_t misses = 0;
    double miss_rate = 0.0;
};

struct MissRatePoint {
    double size = 0.0;
    double miss_rate = 0.0;
};

enum class CurveSource { empirical, analytic };

struct MissRateCurve {
    std::vector<MissRatePoint> points;  // size ascending, miss rate non-increasing
    CurveSource source = CurveSource::empirical;
};

namespace detail {

// Fenwick tree over trace positions holding one bit per currently-tracked
// last access. Positions grow with the trace, so the slot space is bounded
// at ~4D and compacted when full; total work stays O(N log D).
class LastAccessSet {
public:
    explicit LastAccessSet(std::uint32_t n_objects)
        : capacity_(n_objects < 256 ? 1024 : 4 * static_cast<std::size_t>(n_objects)),
          tree_(capacity_ + 1, 0),
          slot_of_(n_objects, -1),
          next_(0) {}

    // Distance for a re-reference to `id`: distinct objects touched since its
    // previous access, inclusive of itself. Must not be called on first access.
    std::uint64_t touch_again(std::uint32_t id) {
        std::int64_t prev = slot_of_[id];
        std::uint64_t after = active_ - prefix(static_cast<std::size_t>(prev) + 1);
        add(static_cast<std::size_t>(prev) + 1, -1);
        slot_of_[id] = -1;  // dead until re-placed; compaction may run in between
        place(id);
        return after + 1;
    }

    void touch_first(std::uint32_t id) {
        ++active_;
        place(id);
    }

    bool seen(std::uint32_t id) const { return slot_of_[id] >= 0; }

private:
    void place(std::uint32_t id) {
        if (next_ == capacity_)
            compact();
        slot_of_[id] = static_cast<std::int64_t>(next_);
        add(next_ + 1, +1);
        ++next_;
    }

    void compact() {
        // Renumber active slots preserving order; rebuild the tree.
        std::vector<std::pair<std::int64_t, std::uint32_t>> live;
        live.reserve(active_);
        for (std::uint32_t id = 0; id < slot_of_.size(); ++id)
            if (slot_of_[id] >= 0)
                live.emplace_back(slot_of_[id], id);
        std::sort(live.begin(), live.end());
        std::fill(tree_.begin(), tree_.end(), 0);
        std::size_t slot = 0;
        for (auto& [old_slot, id] : live) {
            slot_of_[id] = static_cast<std::int64_t>(slot);
            add(slot + 1, +1);
            ++slot;
        }
        next_ = slot;
    }

    void add(std::size_t i, int delta) {
        for (; i <= capacity_; i += i & (~i + 1))
            tree_[i] += delta;
    }

    // Count of active slots with index < i (slots are 0-based, tree 1-based).
    std::uint64_t prefix(std::size_t i) const {
        std::uint64_t s = 0;
        for (; i > 0; i -= i & (~i + 1))
            s += static_cast<std::uint64_t>(tree_[i]);
        return s;
    }

    std::size_t capacity_;
    std::vector<std::int32_t> tree_;
    std::vector<std::int64_t> slot_of_;  // id -> slot, -1 if unseen
    std::size_t next_;
    std::uint64_t active_ = 0;
};

}  // namespace detail

// Single pass over the trace; O(N log D). With warmup > 0 the first `warmup`
// references update state but are excluded from the counts.
inline StackDistanceHistogram stack_distance_histogram(const ReferenceString& rs,
                                                       std::uint64_t warmup = 0) {
    if (rs.refs.empty())
        throw std::invalid_argument("stack_distance_histogram: empty reference string");
    if (warmup >= rs.n_refs())
        throw std::invalid_argument("stack_distance_histogram: warmup consumes whole trace");
    const std::uint32_t d_objects = rs.n_objects();
    StackDistanceHistogram h;
    h.bins.assign(static_cast<std::size_t>(d_objects) + 1, 0);
    detail::LastAccessSet last(d_objects);
    std::uint64_t i = 0;
    for (ObjectId id : rs.refs) {
        bool counted = i++ >= warmup;
        if (!last.seen(id)) {
            last.touch_first(id);
            if (counted)
                ++h.cold_misses;
        } else {
            std::uint64_t d = last.touch_again(id);
            if (counted)
                ++h.bins[d];
        }
    }
    h.total_refs = rs.n_refs() - warmup;
    return h;
}

// Miss rate at one size from the histogram tail sum.
inline double miss_rate_at(const StackDistanceHistogram& h, std::uint64_t size) {
    if (size == 0)
        throw std::invalid_argument("miss_rate_at: size must be >= 1");
    std::uint64_t misses = h.cold_misses;
    for (std::uint64_t d = size + 1; d < h.bins.size(); ++d)
        misses += h.bins[d];
    return static_cast<double>(misses) / static_cast<double>(h.total_refs);
}

inline MissRateCurve miss_rate_curve(const StackDistanceHistogram& h,
                                     const std::vector<std::uint64_t>& sizes) {
    MissRateCurve curve;
    curve.source = CurveSource::empirical;
    // Suffix sums once, then each size is O(1).
    const std::size_t dmax = h.bins.size() - 1;
    std::vector<std::uint64_t> tail(dmax + 2, 0);
    for (std::size_t d = dmax; d >= 1; --d)
        tail[d] = tail[d + 1] + h.bins[d];
    curve.points.reserve(sizes.size());
    for (std::uint64_t s : sizes) {
        if (s == 0)
            throw std::invalid_argument("miss_rate_curve: size must be >= 1");
        std::uint64_t misses = h.cold_misses + tail[std::min<std::uint64_t>(s + 1, dmax + 1)];
        curve.points.push_back({static_cast<double>(s),
                                static_cast<double>(misses) / static_cast<double>(h.total_refs)});
    }
    return curve;
}

// Exact fixed-size LRU with a cold start: first references miss; on a miss
// with a full cache the least-recently-used entry is evicted.
inline CacheStats simulate_lru_fixed(const ReferenceString& rs, std::uint64_t size,
                                     std::uint64_t warmup = 0) {
    if (size == 0)
        throw std::invalid_argument("simulate_lru_fixed: size must be >= 1");
    if (warmup >= rs.n_refs())
        throw std::invalid_argument("simulate_lru_fixed: warmup consumes whole trace");
    const std::uint32_t d_objects = rs.n_objects();
    // Intrusive doubly-linked recency list over dense ids.
    std::vector<std::int32_t> prev(d_objects, -1), next(d_objects, -1);
    std::vector<std::uint8_t> cached(d_objects, 0);
    std::int32_t head = -1, tail = -1;  // head = most recent
    std::uint64_t occupancy = 0;
    CacheStats st;
    st.size = size;

    auto unlink = [&](std::int32_t id) {
        if (prev[id] >= 0) next[prev[id]] = next[id]; else head = next[id];
        if (next[id] >= 0) prev[next[id]] = prev[id]; else tail = prev[id];
    };
    auto push_front = [&](std::int32_t id) {
        prev[id] = -1;
        next[id] = head;
        if (head >= 0) prev[head] = id;
        head = id;
        if (tail < 0) tail = id;
    };

    std::uint64_t i = 0;
    for (ObjectId ref : rs.refs) {
        bool counted = i++ >= warmup;
        auto id = static_cast<std::int32_t>(ref);
        if (cached[id]) {
            if (counted) ++st.hits;
            if (head != id) {
                unlink(id);
                push_front(id);
            }
        } else {
            if (counted) ++st.misses;
            if (occupancy == size) {
                std::int32_t victim = tail;
                unlink(victim);
                cached[victim] = 0;
                --occupancy;
            }
            push_front(id);
            cached[id] = 1;
            ++occupancy;
        }
    }
    st.miss_rate = static_cast<double>(st.misses) / static_cast<double>(st.hits + st.misses);
    return st;
}

}  // namespace mapcache
