#pragma once

// IPv4 prefix tables: routing-table parsing, more-specific filtering,
// longest-prefix match and packet-to-prefix trace mapping. Lookup uses a
// binary trie; a linear scan over 1e5+ prefixes per packet would be far too
// slow at trace scale, so the scan survives only as a test oracle.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mapcache/refstring.hpp"

namespace mapcache {

struct Prefix {
    std::uint32_t network = 0;  // host byte order, bits below `length` zero
    std::uint8_t length = 0;    // 0..32

    friend bool operator==(const Prefix&, const Prefix&) = default;
    friend auto operator<=>(const Prefix& a, const Prefix& b) {
        if (a.network != b.network)
            return a.network <=> b.network;
        return a.length <=> b.length;
    }
};

inline std::uint32_t prefix_mask(unsigned length) {
    return length == 0 ? 0u : ~std::uint32_t{0} << (32 - length);
}

inline bool prefix_contains(const Prefix& p, std::uint32_t addr) {
    return (addr & prefix_mask(p.length)) == p.network;
}

// True iff p strictly covers q's address range (p shorter and containing).
inline bool prefix_covers(const Prefix& p, const Prefix& q) {
    return p.length < q.length && prefix_contains(p, q.network);
}

inline std::string to_string(const Prefix& p) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%u.%u.%u.%u/%u", p.network >> 24,
                  (p.network >> 16) & 0xff, (p.network >> 8) & 0xff,
                  p.network & 0xff, unsigned(p.length));
    return buf;
}

inline std::optional<Prefix> parse_prefix(std::string_view s) {
    auto slash = s.find('/');
    if (slash == std::string_view::npos)
        return std::nullopt;
    std::uint32_t net;
    if (!detail::parse_ipv4(s.substr(0, slash), &net))
        return std::nullopt;
    std::string_view lenpart = s.substr(slash + 1);
    if (lenpart.empty() || lenpart.size() > 2)
        return std::nullopt;
    unsigned len = 0;
    for (char c : lenpart) {
        if (c < '0' || c > '9')
            return std::nullopt;
        len = len * 10 + unsigned(c - '0');
    }
    if (len > 32)
        return std::nullopt;
    return Prefix{net & prefix_mask(len), static_cast<std::uint8_t>(len)};
}

// Immutable prefix set with longest-prefix lookup. Safe for concurrent
// lookups once built.
class PrefixTable {
public:
    PrefixTable() = default;

    explicit PrefixTable(std::vector<Prefix> prefixes) {
        for (Prefix& p : prefixes)
            p.network &= prefix_mask(p.length);  // invariant: host bits zero
        std::sort(prefixes.begin(), prefixes.end());
        prefixes.erase(std::unique(prefixes.begin(), prefixes.end()), prefixes.end());
        prefixes_ = std::move(prefixes);
        build_trie();
    }

    std::size_t size() const { return prefixes_.size(); }
    bool empty() const { return prefixes_.empty(); }
    const std::vector<Prefix>& prefixes() const { return prefixes_; }

    bool contains(const Prefix& p) const {
        return std::binary_search(prefixes_.begin(), prefixes_.end(), p);
    }

    // Longest prefix containing addr, or nullopt.
    std::optional<Prefix> lookup(std::uint32_t addr) const {
        if (nodes_.empty())
            return std::nullopt;
        std::int32_t best = -1;
        std::uint32_t node = 0;
        if (nodes_[0].prefix_index >= 0)
            best = nodes_[0].prefix_index;
        for (int bit = 31; bit >= 0; --bit) {
            std::int32_t child = nodes_[node].child[(addr >> bit) & 1u];
            if (child < 0)
                break;
            node = static_cast<std::uint32_t>(child);
            if (nodes_[node].prefix_index >= 0)
                best = nodes_[node].prefix_index;
        }
        if (best < 0)
            return std::nullopt;
        return prefixes_[static_cast<std::size_t>(best)];
    }

    // True iff some strictly shorter prefix in the table contains p.
    bool has_strict_ancestor(const Prefix& p) const {
        if (nodes_.empty())
            return false;
        if (nodes_[0].prefix_index >= 0 && p.length > 0)
            return true;
        std::uint32_t node = 0;
        for (unsigned depth = 1; depth < p.length; ++depth) {
            std::int32_t child = nodes_[node].child[(p.network >> (32 - depth)) & 1u];
            if (child < 0)
                return false;
            node = static_cast<std::uint32_t>(child);
            if (nodes_[node].prefix_index >= 0)
                return true;
        }
        return false;
    }

private:
    struct Node {
        std::int32_t child[2] = {-1, -1};
        std::int32_t prefix_index = -1;
    };

    void build_trie() {
        nodes_.clear();
        nodes_.emplace_back();
        for (std::size_t i = 0; i < prefixes_.size(); ++i) {
            const Prefix& p = prefixes_[i];
            std::uint32_t node = 0;
            for (unsigned depth = 1; depth <= p.length; ++depth) {
                unsigned bit = (p.network >> (32 - depth)) & 1u;
                std::int32_t child = nodes_[node].child[bit];
                if (child < 0) {
                    child = static_cast<std::int32_t>(nodes_.size());
                    nodes_[node].child[bit] = child;
                    nodes_.emplace_back();
                }
                node = static_cast<std::uint32_t>(child);
            }
            nodes_[node].prefix_index = static_cast<std::int32_t>(i);
        }
    }

    std::vector<Prefix> prefixes_;  // sorted, unique
    std::vector<Node> nodes_;
};

struct RoutingTableStats {
    std::uint64_t invalid_lines = 0;  // unparseable, counted and skipped
    std::uint64_t masked = 0;         // host bits below length were nonzero
    std::uint64_t duplicates = 0;     // exact duplicates after masking
};

// Text routing table, one "a.b.c.d/len" per line, '#' comments. Host bits
// below the prefix length are masked off (counted); exact duplicates after
// masking are silently dropped.
inline PrefixTable parse_routing_table(std::istream& in, RoutingTableStats* stats = nullptr) {
    RoutingTableStats local;
    std::vector<Prefix> prefixes;
    std::string line;
    while (std::getline(in, line)) {
        std::string_view sv = detail::chomp(line);
        if (sv.empty() || detail::is_comment(sv))
            continue;
        auto slash = sv.find('/');
        std::uint32_t net = 0;
        unsigned len = 33;
        bool ok = slash != std::string_view::npos && detail::parse_ipv4(sv.substr(0, slash), &net);
        if (ok) {
            std::string_view lenpart = sv.substr(slash + 1);
            if (!lenpart.empty() && lenpart.size() <= 2) {
                len = 0;
                for (char c : lenpart) {
                    if (c < '0' || c > '9') {
                        len = 33;
                        break;
                    }
                    len = len * 10 + unsigned(c - '0');
                }
            }
            ok = len <= 32;
        }
        if (!ok) {
            ++local.invalid_lines;
            continue;
        }
        std::uint32_t masked_net = net & prefix_mask(len);
        if (masked_net != net)
            ++local.masked;
        prefixes.push_back(Prefix{masked_net, static_cast<std::uint8_t>(len)});
    }
    std::sort(prefixes.begin(), prefixes.end());
    auto last = std::unique(prefixes.begin(), prefixes.end());
    local.duplicates = static_cast<std::uint64_t>(prefixes.end() - last);
    prefixes.erase(last, prefixes.end());
    if (prefixes.empty())
        throw std::runtime_error("routing table: no valid prefixes");
    if (stats)
        *stats = local;
    return PrefixTable(std::move(prefixes));
}

// Keep exactly the prefixes with no strict covering prefix in the input.
// Idempotent: survivors have no ancestors, so a second pass removes nothing.
inline PrefixTable filter_more_specifics(const PrefixTable& table) {
    std::vector<Prefix> kept;
    kept.reserve(table.size());
    for (const Prefix& p : table.prefixes())
        if (!table.has_strict_ancestor(p))
            kept.push_back(p);
    return PrefixTable(std::move(kept));
}

struct MapTraceResult {
    ReferenceString refs;          // token = matched prefix in CIDR text form
    std::uint64_t unmatched = 0;   // packets with no covering prefix
};

// Map each packet to its longest-match prefix, producing a prefix-granularity
// reference string. Unmatched packets are counted and excluded.
inline MapTraceResult map_trace(const PacketTrace& pkts, const PrefixTable& table) {
    if (table.empty())
        throw std::invalid_argument("map_trace: empty prefix table");
    MapTraceResult out;
    // Prefix index in table order -> interned object id, built lazily so ids
    // follow first-match order.
    std::unordered_map<std::uint32_t, ObjectId> seen;
    const auto& prefixes = table.prefixes();
    for (const PacketRecord& rec : pkts.records) {
        auto hit = table.lookup(rec.dst);
        if (!hit) {
            ++out.unmatched;
            continue;
        }
        auto idx = static_cast<std::uint32_t>(
            std::lower_bound(prefixes.begin(), prefixes.end(), *hit) - prefixes.begin());
        auto [it, inserted] = seen.emplace(idx, static_cast<ObjectId>(out.refs.symbols.size()));
        if (inserted)
            out.refs.symbols.push_back(to_string(*hit));
        out.refs.refs.push_back(it->second);
    }
    if (out.refs.refs.empty())
        throw std::runtime_error("map_trace: no packet matched any prefix");
    return out;
}

// rho: distinct prefixes referenced by a trace over the filtered table size.
inline double coverage_ratio(std::uint64_t distinct_prefixes_in_trace,
                             std::uint64_t filtered_table_size) {
    if (filtered_table_size == 0)
        throw std::invalid_argument("coverage_ratio: zero table size");
    return static_cast<double>(distinct_prefixes_in_trace) /
           static_cast<double>(filtered_table_size);
}

}  // namespace mapcache
