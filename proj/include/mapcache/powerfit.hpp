#pragma once

// Piecewise power-law fitting in log-log space. Segments are ordinary least
// squares on (log10 x, log10 y); breakpoints come from an exhaustive search
// over a log-spaced candidate grid (the curves involved have no closed-form
// break locations). All fitting is deterministic.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mapcache {

struct XY {
    double x = 0.0;
    double y = 0.0;
};

struct SegmentFit {
    double x_lo = 0.0, x_hi = 0.0;  // fitted range, inclusive
    double slope = 0.0;
    double intercept = 0.0;  // log10 y at log10 x = 0
    double sse = 0.0;        // residual sum of squares in log10 space
    std::size_t n_points = 0;
};

struct PiecewiseFit {
    std::vector<SegmentFit> segments;  // ordered, contiguous in x
    std::vector<double> breakpoints;   // where consecutive segments meet
    double total_sse = 0.0;
};

struct PopularityExponents {
    std::vector<double> alphas;           // alpha_i = 1 + 1/|slope_i|
    std::vector<double> crossover_freqs;  // fitted values at breakpoints / total refs
};

namespace detail {

struct LogPoint {
    double lx, ly;
};

struct FitAccum {
    double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
};

// Prefix sums over log points; any contiguous segment fits in O(1).
class SegmentFitter {
public:
    explicit SegmentFitter(const std::vector<LogPoint>& pts) : cum_(pts.size() + 1) {
        for (std::size_t i = 0; i < pts.size(); ++i) {
            FitAccum a = cum_[i];
            a.n += 1;
            a.sx += pts[i].lx;
            a.sy += pts[i].ly;
            a.sxx += pts[i].lx * pts[i].lx;
            a.sxy += pts[i].lx * pts[i].ly;
            a.syy += pts[i].ly * pts[i].ly;
            cum_[i + 1] = a;
        }
    }

    // OLS over points [lo, hi); returns {slope, intercept, sse}.
    bool fit(std::size_t lo, std::size_t hi, double* slope, double* intercept,
             double* sse) const {
        FitAccum a = diff(lo, hi);
        double det = a.n * a.sxx - a.sx * a.sx;
        if (a.n < 2 || det <= 0)
            return false;
        *slope = (a.n * a.sxy - a.sx * a.sy) / det;
        *intercept = (a.sy - *slope * a.sx) / a.n;
        double r = a.syy - 2.0 * (*slope) * a.sxy - 2.0 * (*intercept) * a.sy +
                   (*slope) * (*slope) * a.sxx +
                   2.0 * (*slope) * (*intercept) * a.sx + a.n * (*intercept) * (*intercept);
        *sse = std::max(0.0, r);
        return true;
    }

private:
    FitAccum diff(std::size_t lo, std::size_t hi) const {
        const FitAccum &a = cum_[lo], &b = cum_[hi];
        return {b.n - a.n, b.sx - a.sx, b.sy - a.sy,
                b.sxx - a.sxx, b.sxy - a.sxy, b.syy - a.syy};
    }

    std::vector<FitAccum> cum_;
};

}  // namespace detail

// OLS power-law fit of points with x in [x_lo, x_hi]. Requires at least
// three strictly positive points in range.
inline SegmentFit fit_loglog_segment(const std::vector<XY>& points, double x_lo, double x_hi) {
    std::vector<detail::LogPoint> lp;
    double seg_lo = std::numeric_limits<double>::infinity();
    double seg_hi = -std::numeric_limits<double>::infinity();
    for (const XY& p : points) {
        if (p.x < x_lo || p.x > x_hi)
            continue;
        if (!(p.x > 0.0) || !(p.y > 0.0))
            throw std::invalid_argument("fit_loglog_segment: points must be positive");
        lp.push_back({std::log10(p.x), std::log10(p.y)});
        seg_lo = std::min(seg_lo, p.x);
        seg_hi = std::max(seg_hi, p.x);
    }
    if (lp.size() < 3)
        throw std::invalid_argument("fit_loglog_segment: fewer than 3 points in range");
    detail::SegmentFitter f(lp);
    SegmentFit out;
    if (!f.fit(0, lp.size(), &out.slope, &out.intercept, &out.sse))
        throw std::invalid_argument("fit_loglog_segment: degenerate x values");
    out.x_lo = seg_lo;
    out.x_hi = seg_hi;
    out.n_points = lp.size();
    return out;
}

// Contiguous piecewise fit with 2 or 3 segments. Breakpoints minimize total
// sse over the candidate grid (log-spaced, ~50 per break, unless supplied);
// ties break toward the smallest breakpoints. Each segment needs >= 3 points.
inline PiecewiseFit fit_piecewise(const std::vector<XY>& points, int n_segments,
                                  const std::vector<double>* candidate_breaks = nullptr) {
    if (n_segments != 2 && n_segments != 3)
        throw std::invalid_argument("fit_piecewise: n_segments must be 2 or 3");
    if (points.size() < static_cast<std::size_t>(3 * n_segments))
        throw std::invalid_argument("fit_piecewise: insufficient points");
    for (std::size_t i = 1; i < points.size(); ++i)
        if (points[i].x <= points[i - 1].x)
            throw std::invalid_argument("fit_piecewise: points must be sorted by x, unique");

    std::vector<detail::LogPoint> lp;
    lp.reserve(points.size());
    for (const XY& p : points) {
        if (!(p.x > 0.0) || !(p.y > 0.0))
            throw std::invalid_argument("fit_piecewise: points must be positive");
        lp.push_back({std::log10(p.x), std::log10(p.y)});
    }
    detail::SegmentFitter fitter(lp);
    const std::size_t n = lp.size();

    // Candidate break positions as point indices: segment boundary before
    // index i means x-break at the midpoint of points i-1, i (log scale).
    std::vector<std::size_t> cand;
    if (candidate_breaks) {
        for (double b : *candidate_breaks) {
            double lb = std::log10(b);
            auto it = std::lower_bound(lp.begin(), lp.end(), lb,
                                       [](const detail::LogPoint& p, double v) { return p.lx < v; });
            std::size_t idx = static_cast<std::size_t>(it - lp.begin());
            if (idx >= 3 && idx + 3 <= n)
                cand.push_back(idx);
        }
    } else {
        const int grid = 50;
        double lo = lp.front().lx, hi = lp.back().lx;
        for (int g = 1; g < grid; ++g) {
            double lb = lo + (hi - lo) * g / grid;
            auto it = std::lower_bound(lp.begin(), lp.end(), lb,
                                       [](const detail::LogPoint& p, double v) { return p.lx < v; });
            std::size_t idx = static_cast<std::size_t>(it - lp.begin());
            if (idx >= 3 && idx + 3 <= n)
                cand.push_back(idx);
        }
    }
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    if (cand.size() < static_cast<std::size_t>(n_segments - 1))
        throw std::invalid_argument("fit_piecewise: no feasible breakpoints");

    struct Seg {
        std::size_t lo, hi;
        double slope, intercept, sse;
    };
    auto fit_range = [&](std::size_t lo, std::size_t hi, Seg* s) {
        s->lo = lo;
        s->hi = hi;
        return fitter.fit(lo, hi, &s->slope, &s->intercept, &s->sse);
    };

    double best_sse = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> best_cuts;
    std::vector<Seg> best_segs;

    auto consider = [&](const std::vector<std::size_t>& cuts) {
        std::vector<Seg> segs(static_cast<std::size_t>(n_segments));
        double total = 0.0;
        std::size_t lo = 0;
        for (int s = 0; s < n_segments; ++s) {
            std::size_t hi = s + 1 < n_segments ? cuts[static_cast<std::size_t>(s)] : n;
            if (hi - lo < 3)
                return;
            if (!fit_range(lo, hi, &segs[static_cast<std::size_t>(s)]))
                return;
            total += segs[static_cast<std::size_t>(s)].sse;
            lo = hi;
        }
        if (total < best_sse - 1e-15 ||
            (std::abs(total - best_sse) <= 1e-15 && cuts < best_cuts)) {
            best_sse = total;
            best_cuts = cuts;
            best_segs = segs;
        }
    };

    if (n_segments == 2) {
        for (std::size_t c : cand)
            consider({c});
    } else {
        for (std::size_t i = 0; i < cand.size(); ++i)
            for (std::size_t j = i + 1; j < cand.size(); ++j)
                consider({cand[i], cand[j]});
    }
    if (best_segs.empty())
        throw std::invalid_argument("fit_piecewise: no feasible segmentation");

    PiecewiseFit out;
    out.total_sse = best_sse;
    for (const Seg& s : best_segs) {
        SegmentFit sf;
        sf.x_lo = points[s.lo].x;
        sf.x_hi = points[s.hi - 1].x;
        sf.slope = s.slope;
        sf.intercept = s.intercept;
        sf.sse = s.sse;
        sf.n_points = s.hi - s.lo;
        out.segments.push_back(sf);
    }
    for (std::size_t c : best_cuts)
        out.breakpoints.push_back(std::sqrt(points[c - 1].x * points[c].x));
    return out;
}

// Evaluate a fitted piecewise curve at x (log10 domain inside, linear out).
inline double piecewise_eval(const PiecewiseFit& fit, double x) {
    if (!(x > 0.0))
        throw std::invalid_argument("piecewise_eval: x must be positive");
    double lx = std::log10(x);
    std::size_t seg = 0;
    while (seg + 1 < fit.segments.size() && lx >= std::log10(fit.breakpoints[seg]))
        ++seg;
    const SegmentFit& s = fit.segments[seg];
    return std::pow(10.0, s.intercept + s.slope * lx);
}

// Frequency-domain exponents from a rank-frequency fit: alpha_i = 1 + 1/|s_i|.
// Crossover frequencies are the fitted curve at the breakpoints (geometric
// mean of the two adjoining segments' predictions) normalized by total_refs.
inline PopularityExponents popularity_exponents(const PiecewiseFit& fit, double total_refs) {
    if (!(total_refs > 0.0))
        throw std::invalid_argument("popularity_exponents: total_refs must be positive");
    PopularityExponents out;
    for (const SegmentFit& s : fit.segments) {
        if (!(s.slope < 0.0))
            throw std::invalid_argument("popularity_exponents: not a decaying power law");
        out.alphas.push_back(1.0 + 1.0 / std::fabs(s.slope));
    }
    for (std::size_t b = 0; b < fit.breakpoints.size(); ++b) {
        double lx = std::log10(fit.breakpoints[b]);
        const SegmentFit& left = fit.segments[b];
        const SegmentFit& right = fit.segments[b + 1];
        double ly = 0.5 * (left.intercept + left.slope * lx + right.intercept + right.slope * lx);
        out.crossover_freqs.push_back(std::pow(10.0, ly) / total_refs);
    }
    return out;
}

// Slope of the miss-rate power law implied by popularity exponent alpha.
// alpha = 2 sits in the logarithmic regime and has no power-law slope.
inline double missrate_slope_from_alpha(double alpha) {
    if (!(alpha > 1.0))
        throw std::invalid_argument("missrate_slope_from_alpha: requires alpha > 1");
    return 1.0 - 1.0 / (alpha - 1.0);
}

}  // namespace mapcache
