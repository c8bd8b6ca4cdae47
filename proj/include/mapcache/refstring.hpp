#pragma once

// Reference strings and trace ingestion. A reference string is an ordered
// sequence of object references; tokens are interned to dense 32-bit ids in
// first-seen order. Readers are single-pass and keep working memory
// proportional to the number of distinct objects, not the trace length.

#include <cstdint>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mapcache {

using ObjectId = std::uint32_t;

struct ReferenceString {
    std::vector<ObjectId> refs;
    std::vector<std::string> symbols;  // ObjectId -> original token, first-seen order

    std::uint64_t n_refs() const { return refs.size(); }
    std::uint32_t n_objects() const { return static_cast<std::uint32_t>(symbols.size()); }
};

struct PacketRecord {
    double timestamp = 0.0;  // seconds since epoch; meaningful iff trace has_timestamps
    std::uint32_t dst = 0;   // IPv4, host byte order
};

struct PacketTrace {
    std::vector<PacketRecord> records;
    bool has_timestamps = false;
    std::uint64_t malformed = 0;  // skipped lines
};

namespace detail {

inline std::string_view chomp(std::string_view line) {
    if (!line.empty() && line.back() == '\r')
        line.remove_suffix(1);
    return line;
}

inline bool is_comment(std::string_view line) {
    return !line.empty() && line.front() == '#';
}

// Strict dotted-quad parser; rejects extra characters and octets > 255.
inline bool parse_ipv4(std::string_view s, std::uint32_t* out) {
    std::uint32_t addr = 0;
    int octet = 0, digits = 0;
    long value = 0;
    for (char c : s) {
        if (c == '.') {
            if (digits == 0 || octet == 3)
                return false;
            addr = (addr << 8) | static_cast<std::uint32_t>(value);
            ++octet;
            digits = 0;
            value = 0;
        } else if (c >= '0' && c <= '9') {
            if (++digits > 3)
                return false;
            value = value * 10 + (c - '0');
            if (value > 255)
                return false;
        } else {
            return false;
        }
    }
    if (octet != 3 || digits == 0)
        return false;
    *out = (addr << 8) | static_cast<std::uint32_t>(value);
    return true;
}

inline bool parse_double(std::string_view s, double* out) {
    if (s.empty())
        return false;
    char* end = nullptr;
    std::string tmp(s);
    double v = std::strtod(tmp.c_str(), &end);
    if (end != tmp.c_str() + tmp.size())
        return false;
    *out = v;
    return true;
}

}  // namespace detail

// Object trace: one token per line, '#' lines are comments. Object traces
// are machine generated, so parsing is strict: a token containing whitespace
// is a hard error.
inline ReferenceString read_object_trace(std::istream& in) {
    ReferenceString rs;
    std::unordered_map<std::string, ObjectId> intern;
    std::string line;
    std::uint64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view sv = detail::chomp(line);
        if (sv.empty() || detail::is_comment(sv))
            continue;
        for (char c : sv) {
            if (c == ' ' || c == '\t' || c == '\v' || c == '\f' || c == '\r')
                throw std::runtime_error("object trace line " + std::to_string(lineno) +
                                         ": token contains whitespace");
        }
        auto [it, inserted] = intern.emplace(std::string(sv), static_cast<ObjectId>(rs.symbols.size()));
        if (inserted)
            rs.symbols.emplace_back(sv);
        rs.refs.push_back(it->second);
    }
    if (rs.refs.empty())
        throw std::runtime_error("empty trace");
    return rs;
}

inline void write_object_trace(const ReferenceString& rs, std::ostream& out) {
    for (ObjectId id : rs.refs)
        out << rs.symbols[id] << '\n';
}

// Packet trace: either "epoch_seconds,dotted_quad" or bare "dotted_quad",
// one per line; the first valid data line fixes the format. Real captures
// contain noise, so malformed addresses are counted and skipped; it is an
// error only if nothing parses at all.
inline PacketTrace read_packet_trace(std::istream& in) {
    PacketTrace pt;
    bool format_known = false;
    std::string line;
    std::uint64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view sv = detail::chomp(line);
        if (sv.empty() || detail::is_comment(sv))
            continue;
        auto comma = sv.find(',');
        bool with_ts = comma != std::string_view::npos;
        PacketRecord rec;
        bool ok;
        if (with_ts) {
            ok = detail::parse_double(sv.substr(0, comma), &rec.timestamp) &&
                 detail::parse_ipv4(sv.substr(comma + 1), &rec.dst);
        } else {
            ok = detail::parse_ipv4(sv, &rec.dst);
        }
        if (!ok) {
            ++pt.malformed;
            continue;
        }
        if (format_known && with_ts != pt.has_timestamps)
            throw std::runtime_error("packet trace line " + std::to_string(lineno) +
                                     ": inconsistent format");
        if (!format_known) {
            pt.has_timestamps = with_ts;
            format_known = true;
        }
        pt.records.push_back(rec);
    }
    if (pt.records.empty())
        throw std::runtime_error(pt.malformed ? "packet trace: all lines malformed"
                                              : "empty trace");
    return pt;
}

}  // namespace mapcache
