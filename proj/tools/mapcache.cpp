// mapcache: trace-driven and analytic evaluation of LRU map caches.
//
// Pipeline: ingest traces (object or packet granularity), map packets to
// routing-table prefixes, compute locality statistics, fit piecewise power
// laws, simulate LRU exactly, evaluate the analytic model and compare the
// two. All outputs are plain CSV/JSON; plotting is someone else's job.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mapcache/gzipf.hpp"
#include "mapcache/io.hpp"
#include "mapcache/irm.hpp"
#include "mapcache/locality.hpp"
#include "mapcache/lrusim.hpp"
#include "mapcache/powerfit.hpp"
#include "mapcache/prefixdb.hpp"
#include "mapcache/refstring.hpp"

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;
using namespace mapcache;

namespace {

bool g_progress = false;

void progress(const std::string& msg) {
    if (g_progress)
        std::cerr << msg << '\n';
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    return out;
}

void write_file(const std::string& path, const std::string& content) {
    auto out = open_output(path);
    out << content;
}

// "lo:hi:steps" -> log-spaced values.
std::vector<double> parse_log_grid(const std::string& spec) {
    double lo, hi;
    int steps;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%d", &lo, &hi, &steps) != 3 || !(lo > 0.0) ||
        !(hi > lo) || steps < 2)
        throw std::runtime_error("bad grid spec '" + spec + "', want lo:hi:steps");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i)
        out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (steps - 1)));
    return out;
}

std::vector<std::uint64_t> integer_log_sizes(const std::string& spec) {
    std::vector<std::uint64_t> sizes;
    for (double v : parse_log_grid(spec)) {
        auto s = static_cast<std::uint64_t>(std::llround(v));
        if (s < 1)
            s = 1;
        if (sizes.empty() || sizes.back() != s)
            sizes.push_back(s);
    }
    return sizes;
}

std::vector<std::uint64_t> parse_size_list(const std::string& csv) {
    std::vector<std::uint64_t> sizes;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty())
            continue;
        sizes.push_back(std::stoull(item));
    }
    if (sizes.empty())
        throw std::runtime_error("empty size list");
    return sizes;
}

std::vector<double> parse_double_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty())
            continue;
        out.push_back(std::stod(item));
    }
    if (out.empty())
        throw std::runtime_error("empty value list");
    return out;
}

bool looks_like_packet_line(const std::string& line) {
    std::string_view sv = detail::chomp(line);
    std::uint32_t addr;
    auto comma = sv.find(',');
    double ts;
    if (comma != std::string_view::npos)
        return detail::parse_double(sv.substr(0, comma), &ts) &&
               detail::parse_ipv4(sv.substr(comma + 1), &addr);
    return detail::parse_ipv4(sv, &addr);
}

bool sniff_packet_trace(const std::string& path) {
    auto in = open_input(path);
    std::string line;
    while (std::getline(in, line)) {
        std::string_view sv = detail::chomp(line);
        if (sv.empty() || detail::is_comment(sv))
            continue;
        return looks_like_packet_line(line);
    }
    return false;
}

struct LoadedTrace {
    ReferenceString refs;
    bool from_packets = false;
    PacketTrace packets;  // only filled when from_packets
    std::uint64_t unmatched = 0;
    std::size_t table_size = 0;
    std::size_t filtered_table_size = 0;
    RoutingTableStats rib_stats;
    PrefixTable table;  // filtered table used for mapping
};

LoadedTrace load_trace(const std::string& trace_path, const std::string& rib_path,
                       const std::string& format, bool no_filter) {
    bool packet;
    if (format == "object")
        packet = false;
    else if (format == "packet")
        packet = true;
    else
        packet = sniff_packet_trace(trace_path);
    if (packet && rib_path.empty())
        throw std::runtime_error("packet trace requires --rib");
    if (!packet && !rib_path.empty())
        throw std::runtime_error("--rib given but trace is not a packet trace");

    LoadedTrace out;
    if (!packet) {
        auto in = open_input(trace_path);
        out.refs = read_object_trace(in);
        progress("read " + std::to_string(out.refs.n_refs()) + " references");
        return out;
    }
    out.from_packets = true;
    {
        auto in = open_input(trace_path);
        out.packets = read_packet_trace(in);
    }
    progress("read " + std::to_string(out.packets.records.size()) + " packets");
    PrefixTable table;
    {
        auto in = open_input(rib_path);
        table = parse_routing_table(in, &out.rib_stats);
    }
    out.table_size = table.size();
    if (!no_filter)
        table = filter_more_specifics(table);
    out.filtered_table_size = table.size();
    progress("routing table: " + std::to_string(out.table_size) + " prefixes, " +
             std::to_string(out.filtered_table_size) + " after filtering");
    auto mapped = map_trace(out.packets, table);
    out.refs = std::move(mapped.refs);
    out.unmatched = mapped.unmatched;
    out.table = std::move(table);
    progress("mapped " + std::to_string(out.refs.n_refs()) + " references, " +
             std::to_string(out.unmatched) + " unmatched");
    return out;
}

json fit_to_json(const PiecewiseFit& fit) {
    json j;
    j["segments"] = json::array();
    for (const auto& s : fit.segments) {
        json seg;
        seg["x_lo"] = s.x_lo;
        seg["x_hi"] = s.x_hi;
        seg["slope"] = s.slope;
        seg["intercept"] = s.intercept;
        seg["sse"] = s.sse;
        seg["n_points"] = s.n_points;
        j["segments"].push_back(seg);
    }
    j["breakpoints"] = fit.breakpoints;
    j["total_sse"] = fit.total_sse;
    return j;
}

GZipfParams gzipf_from_json(const json& j) {
    return make_gzipf_params(j.at("q").get<double>(), j.at("r").get<double>(),
                             j.at("mu").get<double>(), j.at("lambda").get<double>(),
                             j.at("n_refs").get<double>());
}

ThreeRegionParams three_region_from_json(const json& j) {
    ThreeRegionParams p;
    auto a = j.at("alphas");
    if (!a.is_array() || a.size() != 3)
        throw std::runtime_error("model params: alphas must have 3 entries");
    p.alpha1 = a[0].get<double>();
    p.alpha2 = a[1].get<double>();
    p.alpha3 = a[2].get<double>();
    p.nu_k1 = j.at("nu_k1").get<double>();
    p.nu_k2 = j.at("nu_k2").get<double>();
    p.n_refs = j.at("n_refs").get<double>();
    return p;
}

json load_json(const std::string& path) {
    auto in = open_input(path);
    json j;
    in >> j;
    return j;
}

MissRateCurve model_curve_at(const json& params, const std::vector<double>& sizes) {
    std::string kind = params.at("model").get<std::string>();
    if (kind == "three_region")
        return three_region_miss_curve(three_region_from_json(params), sizes);
    if (kind == "gzipf") {
        GZipfParams p = gzipf_from_json(params);
        MissRateCurve curve;
        curve.source = CurveSource::analytic;
        for (double s : sizes)
            curve.points.push_back({s, miss_rate_of_size(s, p)});
        return curve;
    }
    throw std::runtime_error("model params: unknown model '" + kind + "'");
}

// Read a "size,miss_rate" CSV (header required).
MissRateCurve read_curve_csv(const std::string& path) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error(path + ": empty curve file");
    MissRateCurve c;
    c.source = CurveSource::empirical;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        double s, m;
        if (std::sscanf(line.c_str(), "%lf,%lf", &s, &m) != 2)
            throw std::runtime_error(path + ": bad curve row '" + line + "'");
        c.points.push_back({s, m});
    }
    if (c.points.empty())
        throw std::runtime_error(path + ": no data rows");
    return c;
}

// Smallest cache size reaching the target miss rate, from the exact
// per-size histogram curve.
std::uint64_t size_at_miss_rate(const StackDistanceHistogram& h, double target) {
    const std::size_t dmax = h.bins.size() - 1;
    std::vector<std::uint64_t> tail(dmax + 2, 0);
    for (std::size_t d = dmax; d >= 1; --d)
        tail[d] = tail[d + 1] + h.bins[d];
    for (std::uint64_t s = 1; s <= dmax; ++s) {
        double m = static_cast<double>(h.cold_misses + tail[s + 1]) /
                   static_cast<double>(h.total_refs);
        if (m <= target)
            return s;
    }
    throw std::runtime_error("target miss rate " + format_double(target) +
                             " not reachable (floor is " +
                             format_double(static_cast<double>(h.cold_misses) /
                                           static_cast<double>(h.total_refs)) +
                             ")");
}

RankLaw law_from_model_exponents(std::uint32_t d, double q, double r, std::uint32_t kc) {
    if (!(q > 1.0) || !(r > 1.0) || !(r < q))
        throw std::runtime_error("rank law requires exponents 1 < r < q");
    RankLaw law;
    law.d_objects = d;
    law.head_exponent = 1.0 / (q - 1.0);
    law.tail_exponent = 1.0 / (r - 1.0);
    law.crossover_rank = kc;
    return law;
}

int run(int argc, char** argv) {
    CLI::App app{"LRU map-cache analysis: traces, locality statistics, fits, "
                 "simulation and the analytic model"};
    app.require_subcommand(1);
    app.add_flag("--progress", g_progress, "report progress on stderr");

    // --- synth ---------------------------------------------------------
    auto* synth = app.add_subcommand("synth", "generate an IRM trace from a rank law");
    std::uint32_t sy_objects = 0, sy_kc = 1;
    double sy_q = 0.0, sy_r = 0.0;
    std::uint64_t sy_refs = 0, sy_seed = 1;
    bool sy_uniform = false;
    std::string sy_out;
    synth->add_option("--objects", sy_objects, "number of objects D")->required();
    synth->add_option("--q", sy_q, "high-frequency exponent (rank head slope 1/(q-1))");
    synth->add_option("--r", sy_r, "low-frequency exponent (rank tail slope 1/(r-1))");
    synth->add_option("--crossover-rank", sy_kc, "rank where the tail regime starts");
    synth->add_flag("--uniform", sy_uniform, "uniform popularity instead of a rank law");
    synth->add_option("--refs", sy_refs, "trace length N")->required();
    synth->add_option("--seed", sy_seed, "PRNG seed")->required();
    synth->add_option("--out", sy_out, "output file (default stdout)");

    // --- shuffle -------------------------------------------------------
    auto* shuffle = app.add_subcommand("shuffle", "random permutation of an object trace");
    std::string sh_trace, sh_out;
    std::uint64_t sh_seed = 1;
    shuffle->add_option("--trace", sh_trace, "object trace")->required();
    shuffle->add_option("--seed", sh_seed, "PRNG seed")->required();
    shuffle->add_option("--out", sh_out, "output file (default stdout)");

    // --- common trace options ------------------------------------------
    std::string si_trace, si_rib, si_format = "auto", si_out;
    bool si_nofilter = false;
    std::uint64_t si_warmup = 0;
    auto add_trace_opts = [&](CLI::App* cmd) {
        cmd->add_option("--trace", si_trace, "input trace")->required();
        cmd->add_option("--rib", si_rib, "routing table (required for packet traces)");
        cmd->add_option("--format", si_format, "trace format: auto|object|packet")
            ->check(CLI::IsMember({"auto", "object", "packet"}));
        cmd->add_flag("--no-filter", si_nofilter, "skip more-specific prefix filtering");
    };

    // --- simulate ------------------------------------------------------
    auto* simulate = app.add_subcommand("simulate", "exact fixed-size LRU simulation");
    std::string sim_sizes;
    add_trace_opts(simulate);
    simulate->add_option("--sizes", sim_sizes, "comma-separated cache sizes")->required();
    simulate->add_option("--warmup", si_warmup, "exclude the first K references from stats");
    simulate->add_option("--out", si_out, "output CSV (default stdout)");

    // --- curve ---------------------------------------------------------
    auto* curvecmd = app.add_subcommand("curve", "full miss-rate curve via stack distances");
    std::string cu_grid = "1:100000:61";
    add_trace_opts(curvecmd);
    curvecmd->add_option("--log-sizes", cu_grid, "size grid lo:hi:steps (log spaced)");
    curvecmd->add_option("--warmup", si_warmup, "exclude the first K references from stats");
    curvecmd->add_option("--out", si_out, "output CSV (default stdout)");

    // --- stats ---------------------------------------------------------
    auto* stats = app.add_subcommand("stats", "locality statistics and summary");
    std::string st_outdir = ".";
    std::string st_windows;
    bool st_logbins = false;
    add_trace_opts(stats);
    stats->add_option("--outdir", st_outdir, "output directory");
    stats->add_option("--windows", st_windows, "working-set windows, comma separated");
    stats->add_flag("--log-bins", st_logbins, "also write log-binned inter-reference CSV");

    // --- fit -----------------------------------------------------------
    auto* fitcmd = app.add_subcommand("fit", "piecewise power-law fit of a CSV curve");
    std::string fi_input, fi_out, fi_model_out, fi_kind = "auto", fi_breaks;
    int fi_segments = 3;
    double fi_xmin = 0.0, fi_xmax = 0.0;
    std::uint64_t fi_min_count = 0;
    double fi_total_refs = 0.0;
    fitcmd->add_option("--input", fi_input, "input CSV (rank_freq or miss-rate curve)")
        ->required();
    fitcmd->add_option("--kind", fi_kind, "rank|curve|auto: which columns to fit")
        ->check(CLI::IsMember({"auto", "rank", "curve"}));
    fitcmd->add_option("--segments", fi_segments, "number of segments (2 or 3)");
    fitcmd->add_option("--x-min", fi_xmin, "fit range lower bound");
    fitcmd->add_option("--x-max", fi_xmax, "fit range upper bound");
    fitcmd->add_option("--min-count", fi_min_count,
                       "drop rank rows with count below this (tail noise)");
    fitcmd->add_option("--breaks", fi_breaks, "candidate breakpoints, comma separated");
    fitcmd->add_option("--total-refs", fi_total_refs,
                       "reference count for frequency normalization (rank input: inferred)");
    fitcmd->add_option("--out", fi_out, "fit JSON (default stdout)");
    fitcmd->add_option("--model-out", fi_model_out,
                       "also write three-region model params JSON (3-segment rank fits)");

    // --- model ---------------------------------------------------------
    auto* modelcmd = app.add_subcommand("model", "evaluate the analytic model");
    std::string mo_params, mo_what = "missrate", mo_sizes = "1:100000:61";
    std::string mo_trange = "1:100000:61", mo_expgrid = "1.05:1.95:46", mo_out;
    double mo_mfixed = 0.05;
    bool mo_pin_r = false;
    modelcmd->add_option("--params", mo_params, "model parameter JSON")->required();
    modelcmd->add_option("--what", mo_what, "missrate|interref|sensitivity")
        ->check(CLI::IsMember({"missrate", "interref", "sensitivity"}));
    modelcmd->add_option("--log-sizes", mo_sizes, "size grid lo:hi:steps");
    modelcmd->add_option("--t-range", mo_trange, "distance grid lo:hi:steps");
    modelcmd->add_option("--exp-grid", mo_expgrid, "exponent grid lo:hi:steps");
    modelcmd->add_option("--m-fixed", mo_mfixed, "miss rate held fixed (sensitivity)");
    modelcmd->add_flag("--pin-r", mo_pin_r, "keep r fixed instead of co-varying");
    modelcmd->add_option("--out", mo_out, "output CSV (default stdout)");

    // --- compare -------------------------------------------------------
    auto* comparecmd = app.add_subcommand("compare", "empirical curve vs analytic model");
    std::string co_empirical, co_params, co_out;
    double co_smin = 1.0;
    comparecmd->add_option("--empirical", co_empirical, "empirical size,miss_rate CSV")
        ->required();
    comparecmd->add_option("--params", co_params, "model parameter JSON")->required();
    comparecmd->add_option("--s-min", co_smin, "sizes below this are reported but not scored");
    comparecmd->add_option("--out", co_out, "joined CSV (default stdout)");

    // --- scaling -------------------------------------------------------
    auto* scalingcmd = app.add_subcommand("scaling", "cache size at fixed miss rate vs growth");
    std::string sc_mode = "refs", sc_factors = "1,4", sc_out;
    std::uint32_t sc_objects = 0, sc_kc = 1;
    double sc_q = 0.0, sc_r = 0.0, sc_target = 0.05;
    std::uint64_t sc_refs = 0, sc_seed = 1;
    scalingcmd->add_option("--mode", sc_mode, "what the factor scales: refs|objects|uniform")
        ->check(CLI::IsMember({"refs", "objects", "uniform"}));
    scalingcmd->add_option("--factors", sc_factors, "comma-separated scale factors");
    scalingcmd->add_option("--objects", sc_objects, "base object count D")->required();
    scalingcmd->add_option("--q", sc_q, "high-frequency exponent");
    scalingcmd->add_option("--r", sc_r, "low-frequency exponent");
    scalingcmd->add_option("--crossover-rank", sc_kc, "crossover rank");
    scalingcmd->add_option("--refs", sc_refs, "base trace length N")->required();
    scalingcmd->add_option("--seed", sc_seed, "PRNG seed")->required();
    scalingcmd->add_option("--target-m", sc_target, "miss rate to hold");
    scalingcmd->add_option("--out", sc_out, "output CSV (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;  // anything but help is a usage error
    }

    auto emit = [&](const std::string& path, const std::string& content) {
        if (path.empty())
            std::cout << content;
        else
            write_file(path, content);
    };

    if (synth->parsed()) {
        RankLaw law;
        if (sy_uniform) {
            law = RankLaw{sy_objects, 0.0, 0.0, sy_objects};
        } else {
            if (synth->count("--q") == 0 || synth->count("--r") == 0 ||
                synth->count("--crossover-rank") == 0)
                throw std::runtime_error("synth: need --q, --r and --crossover-rank "
                                         "(or --uniform)");
            law = law_from_model_exponents(sy_objects, sy_q, sy_r, sy_kc);
        }
        auto probs = rank_probabilities(law);
        auto rs = generate_irm(probs, sy_refs, Seed{sy_seed});
        std::ostringstream os;
        write_object_trace(rs, os);
        emit(sy_out, os.str());
        return 0;
    }

    if (shuffle->parsed()) {
        auto in = open_input(sh_trace);
        auto rs = read_object_trace(in);
        auto shuffled = irm_shuffle(rs, Seed{sh_seed});
        std::ostringstream os;
        write_object_trace(shuffled, os);
        emit(sh_out, os.str());
        return 0;
    }

    if (simulate->parsed()) {
        auto loaded = load_trace(si_trace, si_rib, si_format, si_nofilter);
        auto sizes = parse_size_list(sim_sizes);
        std::ostringstream os;
        os << "size,miss_rate\n";
        for (std::uint64_t s : sizes) {
            CacheStats st = simulate_lru_fixed(loaded.refs, s, si_warmup);
            os << s << ',' << format_double_exact(st.miss_rate) << '\n';
            progress("size " + std::to_string(s) + ": miss rate " +
                     format_double(st.miss_rate));
        }
        emit(si_out, os.str());
        return 0;
    }

    if (curvecmd->parsed()) {
        auto loaded = load_trace(si_trace, si_rib, si_format, si_nofilter);
        auto h = stack_distance_histogram(loaded.refs, si_warmup);
        auto sizes = integer_log_sizes(cu_grid);
        auto curve = miss_rate_curve(h, sizes);
        std::ostringstream os;
        write_missrate_csv(curve, os);
        emit(si_out, os.str());
        return 0;
    }

    if (stats->parsed()) {
        auto loaded = load_trace(si_trace, si_rib, si_format, si_nofilter);
        const auto& rs = loaded.refs;
        fs::create_directories(st_outdir);

        auto rft = rank_frequency(rs);
        {
            std::ostringstream os;
            write_rank_frequency_csv(rft, os);
            write_file(st_outdir + "/rank_freq.csv", os.str());
        }
        auto irh = inter_reference_histogram(rs);
        {
            std::ostringstream os;
            write_interref_csv(irh, os);
            write_file(st_outdir + "/interref.csv", os.str());
        }
        if (st_logbins) {
            std::ostringstream os;
            write_interref_logbin_csv(log_binned(irh), os);
            write_file(st_outdir + "/interref_logbin.csv", os.str());
        }
        std::vector<std::uint64_t> windows;
        if (!st_windows.empty()) {
            windows = parse_size_list(st_windows);
        } else {
            for (std::uint64_t t = 1; t <= rs.n_refs() / 4; t *= 2)
                windows.push_back(t);
            if (windows.empty())
                windows.push_back(1);
        }
        {
            std::ostringstream os;
            write_workingset_csv(working_set_curve(rs, windows), os);
            write_file(st_outdir + "/workingset.csv", os.str());
        }

        json summary;
        summary["n_refs"] = rs.n_refs();
        summary["n_objects"] = rs.n_objects();
        if (loaded.from_packets) {
            summary["n_packets"] = loaded.packets.records.size();
            summary["malformed_lines"] = loaded.packets.malformed;
            summary["unmatched_packets"] = loaded.unmatched;
            if (loaded.packets.has_timestamps && loaded.packets.records.size() >= 2) {
                double span = loaded.packets.records.back().timestamp -
                              loaded.packets.records.front().timestamp;
                summary["duration_seconds"] = span;
                if (span > 0.0)
                    summary["avg_refs_per_sec"] =
                        static_cast<double>(loaded.packets.records.size()) / span;
            }
            summary["table_size"] = loaded.table_size;
            summary["filtered_table_size"] = loaded.filtered_table_size;
            summary["masked_prefixes"] = loaded.rib_stats.masked;
            summary["invalid_rib_lines"] = loaded.rib_stats.invalid_lines;
            double rho = coverage_ratio(rs.n_objects(), loaded.filtered_table_size);
            summary["rho"] = std::round(rho * 100.0) / 100.0;
        }
        write_file(st_outdir + "/summary.json", summary.dump(2) + "\n");
        return 0;
    }

    if (fitcmd->parsed()) {
        auto in = open_input(fi_input);
        std::string header;
        if (!std::getline(in, header))
            throw std::runtime_error(fi_input + ": empty input");
        bool rank_kind;
        if (fi_kind == "rank")
            rank_kind = true;
        else if (fi_kind == "curve")
            rank_kind = false;
        else
            rank_kind = header.rfind("rank,", 0) == 0;
        std::vector<XY> pts;
        double total = 0.0;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty())
                continue;
            double a, b, c;
            if (rank_kind) {
                if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &a, &b, &c) < 2)
                    throw std::runtime_error(fi_input + ": bad row '" + line + "'");
                total += b;
                if (b < static_cast<double>(fi_min_count))
                    continue;
                pts.push_back({a, b});
            } else {
                if (std::sscanf(line.c_str(), "%lf,%lf", &a, &b) != 2)
                    throw std::runtime_error(fi_input + ": bad row '" + line + "'");
                pts.push_back({a, b});
            }
        }
        if (fi_xmin > 0.0 || fi_xmax > 0.0) {
            std::vector<XY> kept;
            for (const XY& p : pts)
                if ((fi_xmin <= 0.0 || p.x >= fi_xmin) && (fi_xmax <= 0.0 || p.x <= fi_xmax))
                    kept.push_back(p);
            pts = std::move(kept);
        }
        std::vector<double> breaks;
        if (!fi_breaks.empty())
            breaks = parse_double_list(fi_breaks);
        PiecewiseFit fit = fit_piecewise(pts, fi_segments, breaks.empty() ? nullptr : &breaks);
        json j = fit_to_json(fit);
        double norm = fi_total_refs > 0.0 ? fi_total_refs : total;
        bool decaying = true;
        for (const auto& s : fit.segments)
            decaying = decaying && s.slope < 0.0;
        if (decaying && norm > 0.0) {
            auto pe = popularity_exponents(fit, norm);
            j["alphas"] = pe.alphas;
            j["crossover_freqs"] = pe.crossover_freqs;
            if (!fi_model_out.empty()) {
                if (fit.segments.size() != 3)
                    throw std::runtime_error("--model-out needs a 3-segment fit");
                json mp;
                mp["model"] = "three_region";
                mp["alphas"] = pe.alphas;
                mp["nu_k1"] = pe.crossover_freqs[0];
                mp["nu_k2"] = pe.crossover_freqs[1];
                mp["n_refs"] = norm;
                write_file(fi_model_out, mp.dump(2) + "\n");
            }
        } else if (!fi_model_out.empty()) {
            throw std::runtime_error("--model-out needs decaying slopes and a total");
        }
        emit(fi_out, j.dump(2) + "\n");
        return 0;
    }

    if (modelcmd->parsed()) {
        json params = load_json(mo_params);
        std::ostringstream os;
        if (mo_what != "missrate" && params.at("model").get<std::string>() != "gzipf")
            throw std::runtime_error("--what " + mo_what + " needs gzipf model params");
        if (mo_what == "missrate") {
            auto curve = model_curve_at(params, parse_log_grid(mo_sizes));
            write_missrate_csv(curve, os);
        } else if (mo_what == "interref") {
            GZipfParams p = gzipf_from_json(params);
            os << "t,f\n";
            for (double t : parse_log_grid(mo_trange))
                os << format_double(t) << ',' << format_double(inter_ref_asymptotic(t, p))
                   << '\n';
        } else {
            GZipfParams p = gzipf_from_json(params);
            os << "exponent,size\n";
            for (const auto& pt :
                 sensitivity_curve(mo_mfixed, parse_log_grid(mo_expgrid), p, !mo_pin_r))
                os << format_double(pt.exponent) << ',' << format_double(pt.size) << '\n';
        }
        emit(mo_out, os.str());
        return 0;
    }

    if (comparecmd->parsed()) {
        auto empirical = read_curve_csv(co_empirical);
        json params = load_json(co_params);
        std::vector<double> sizes;
        for (const auto& p : empirical.points)
            sizes.push_back(p.size);
        auto model = model_curve_at(params, sizes);
        std::ostringstream os;
        os << "size,m_empirical,m_model,log10_ratio\n";
        double max_abs = 0.0;
        std::size_t scored = 0;
        for (std::size_t i = 0; i < sizes.size(); ++i) {
            double me = empirical.points[i].miss_rate;
            double mm = model.points[i].miss_rate;
            double lr = std::log10(mm / me);
            os << format_double(sizes[i]) << ',' << format_double(me) << ','
               << format_double(mm) << ',' << format_double(lr) << '\n';
            if (sizes[i] >= co_smin) {
                ++scored;
                max_abs = std::max(max_abs, std::fabs(lr));
            }
        }
        if (scored == 0)
            throw std::runtime_error("no empirical sizes at or above --s-min (disjoint ranges)");
        emit(co_out, os.str());
        std::cout << "max_abs_log10_ratio s>=" << format_double(co_smin) << ": "
                  << format_double(max_abs) << " over " << scored << " sizes\n";
        return 0;
    }

    if (scalingcmd->parsed()) {
        std::ostringstream os;
        os << "factor,N,D,s_at_fixed_m\n";
        for (std::uint64_t f : parse_size_list(sc_factors)) {
            std::uint64_t n = sc_refs;
            std::uint32_t d = sc_objects;
            RankLaw law;
            if (sc_mode == "uniform") {
                d = static_cast<std::uint32_t>(sc_objects * f);
                law = RankLaw{d, 0.0, 0.0, d};
            } else if (sc_mode == "objects") {
                // Growing the object space with the popularity shape fixed:
                // the head of the curve (and the crossover rank) stay put,
                // new objects extend the tail.
                d = static_cast<std::uint32_t>(sc_objects * f);
                law = law_from_model_exponents(d, sc_q, sc_r, sc_kc);
            } else {
                n = sc_refs * f;
                law = law_from_model_exponents(d, sc_q, sc_r, sc_kc);
            }
            auto rs = generate_irm(rank_probabilities(law), n, Seed{sc_seed});
            auto h = stack_distance_histogram(rs);
            std::uint64_t s = size_at_miss_rate(h, sc_target);
            os << f << ',' << n << ',' << d << ',' << s << '\n';
            progress("factor " + std::to_string(f) + ": size " + std::to_string(s));
        }
        emit(sc_out, os.str());
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
