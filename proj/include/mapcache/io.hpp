#pragma once

// CSV and JSON export with pinned formatting: fixed header rows, fixed key
// order, doubles printed via "%.12g". Reruns with identical inputs must
// produce byte-identical files.

#include <cstdio>
#include <ostream>
#include <string>

#include "mapcache/locality.hpp"
#include "mapcache/lrusim.hpp"

namespace mapcache {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// Round-trip exact; used for values other tools re-read and compare.
inline std::string format_double_exact(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_rank_frequency_csv(const RankFrequencyTable& t, std::ostream& out) {
    out << "rank,count,freq\n";
    for (const auto& e : t.entries)
        out << e.rank << ',' << e.count << ',' << format_double(e.frequency) << '\n';
}

inline void write_interref_csv(const IrHistogram& h, std::ostream& out) {
    out << "t,count\n";
    for (const auto& [t, c] : h.bins)
        out << t << ',' << c << '\n';
}

inline void write_interref_logbin_csv(const std::vector<LogBin>& bins, std::ostream& out) {
    out << "t_lo,t_hi,t_mid,count,density\n";
    for (const auto& b : bins)
        out << format_double(b.t_lo) << ',' << format_double(b.t_hi) << ','
            << format_double(b.t_mid) << ',' << b.count << ',' << format_double(b.density)
            << '\n';
}

inline void write_workingset_csv(const WorkingSetCurve& c, std::ostream& out) {
    out << "T,avg_size,miss_rate\n";
    for (const auto& p : c.points)
        out << p.window << ',' << format_double(p.avg_size) << ','
            << format_double(p.miss_rate) << '\n';
}

inline void write_missrate_csv(const MissRateCurve& c, std::ostream& out) {
    out << "size,miss_rate\n";
    for (const auto& p : c.points)
        out << format_double_exact(p.size) << ',' << format_double_exact(p.miss_rate)
            << '\n';
}

}  // namespace mapcache
