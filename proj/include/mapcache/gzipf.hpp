#pragma once

// Analytic LRU model for generalized-Zipf popularity. The frequency pdf
//   p(v) = K / (mu v^r + (lambda-mu) v^q),   1 <= r < q < 2
// induces an inter-reference law that is piecewise power law in t with a
// crossover at t = 1/v_k, v_k = (mu/(lambda-mu))^(1/(q-r)), and from it a
// miss-rate-vs-size law with head exponent 1 - 1/(q-1) and tail exponent
// 1 - 1/(r-1). Proportionality constants are pinned by the t-domain
// normalization C and by continuity at the regime crossover.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mapcache/lrusim.hpp"  // MissRateCurve
#include "mapcache/special.hpp"

namespace mapcache {

struct GZipfParams {
    double q = 0.0;       // high-frequency exponent, 1 < q < 2
    double r = 0.0;       // low-frequency exponent, 1 <= r < q
    double mu = 0.0;      // > 0
    double lambda = 0.0;  // > 2*mu, so the crossover frequency is in (0,1)
    double n_refs = 0.0;  // N, enters only the normalization constant
    // Derived.
    double nu_k = 0.0;    // crossover frequency
    double c_norm = 0.0;  // t-domain normalization constant C
};

// Exponent regions within ~1e-3 of 2 are handled by the logarithmic-regime
// formulas; the pure power-law forms degenerate there (their coefficients
// overflow doubles long before q reaches 2).
inline constexpr double kLogRegimeEps = 1e-3;

inline double normalization_c(const GZipfParams& p);

inline GZipfParams make_gzipf_params(double q, double r, double mu, double lambda,
                                     double n_refs) {
    if (!(q > 1.0) || !(q < 2.0))
        throw std::invalid_argument("gzipf: requires 1 < q < 2");
    if (!(r >= 1.0) || !(r < q))
        throw std::invalid_argument("gzipf: requires 1 <= r < q");
    if (!(mu > 0.0) || !(lambda > 2.0 * mu))
        throw std::invalid_argument("gzipf: requires lambda > 2*mu > 0");
    if (!(n_refs >= 2.0))
        throw std::invalid_argument("gzipf: requires n_refs >= 2");
    GZipfParams p;
    p.q = q;
    p.r = r;
    p.mu = mu;
    p.lambda = lambda;
    p.n_refs = n_refs;
    p.nu_k = std::pow(mu / (lambda - mu), 1.0 / (q - r));
    p.c_norm = normalization_c(p);
    return p;
}

namespace detail {

// H(tau, s) for a possibly huge real tau: exact integer summation while it
// fits, zeta difference beyond (s > 1 there, so the difference converges).
inline double harmonic_of_order(double tau, double s) {
    if (tau <= 1e8)
        return generalized_harmonic(static_cast<std::uint64_t>(tau), s);
    return hurwitz_zeta(s, 1.0) - hurwitz_zeta(s, tau + 1.0);
}

}  // namespace detail

// 1/C = H(1/v_k, 3-q) - zeta(3-r, N) + zeta(3-r, 1/v_k), with 1/v_k rounded
// to the nearest integer >= 1 (the t-domain law is a law over integer
// distances, so the crossover order is treated as an integer throughout).
inline double normalization_c(const GZipfParams& p) {
    double tau = std::max(1.0, std::round(1.0 / p.nu_k));
    double inv = detail::harmonic_of_order(tau, 3.0 - p.q) -
                 hurwitz_zeta(3.0 - p.r, p.n_refs) + hurwitz_zeta(3.0 - p.r, tau);
    if (!std::isfinite(inv) || !(inv > 0.0))
        throw std::runtime_error("normalization_c: non-finite or non-positive normalization");
    return 1.0 / inv;
}

// Normalizer K such that the pdf integrates to 1 over [1/N, 1].
inline double gzipf_pdf_normalizer(const GZipfParams& p) {
    double mass = integrate_log_axis(
        [&](double v) { return 1.0 / (p.mu * std::pow(v, p.r) +
                                      (p.lambda - p.mu) * std::pow(v, p.q)); },
        1.0 / p.n_refs, 1.0, 160);
    return 1.0 / mass;
}

inline double gzipf_pdf(double nu, const GZipfParams& p, double normalizer) {
    if (!(nu > 0.0) || !(nu <= 1.0))
        throw std::invalid_argument("gzipf_pdf: frequency must be in (0, 1]");
    return normalizer / (p.mu * std::pow(nu, p.r) + (p.lambda - p.mu) * std::pow(nu, p.q));
}

inline double gzipf_pdf(double nu, const GZipfParams& p) {
    return gzipf_pdf(nu, p, gzipf_pdf_normalizer(p));
}

// Head-regime inter-reference law, unnormalized: Gamma(3-q, v_k t) / t^(3-q).
// Flat numerator for t << 1/v_k, bending at the crossover.
inline double inter_ref_exact_head(double t, const GZipfParams& p) {
    if (!(t > 0.0))
        throw std::invalid_argument("inter_ref_exact_head: t must be positive");
    return upper_incomplete_gamma(3.0 - p.q, p.nu_k * t) * std::pow(t, p.q - 3.0);
}

// Piecewise power-law inter-reference law: C t^(q-3) below the crossover,
// continuity-matched t^(r-3) beyond.
inline double inter_ref_asymptotic(double t, const GZipfParams& p) {
    if (!(t > 0.0))
        throw std::invalid_argument("inter_ref_asymptotic: t must be positive");
    const double tau = 1.0 / p.nu_k;
    if (t < tau)
        return p.c_norm * std::pow(t, p.q - 3.0);
    return p.c_norm * std::pow(p.nu_k, p.r - p.q) * std::pow(t, p.r - 3.0);
}

namespace detail {

// Closed-form coefficients of the two miss-rate branches.
//   head (s <= s_cross): m = a_head * s^e_head      [normalization anchored]
//   tail (s >  s_cross): m = a_tail * s^e_tail      [continuity matched]
struct ModelBranches {
    bool log_regime = false;  // q within kLogRegimeEps of 2
    double e_head = 0.0, a_head = 0.0;
    double e_tail = 0.0, a_tail = 0.0;
    double s_cross = 0.0, m_cross = 0.0;
};

inline ModelBranches model_branches(const GZipfParams& p) {
    ModelBranches b;
    if (2.0 - p.q < kLogRegimeEps) {
        b.log_regime = true;
        return b;
    }
    if (!(p.r > 1.0))
        throw std::invalid_argument("gzipf miss-rate laws: require r > 1");
    const double C = p.c_norm;
    const double q = p.q, r = p.r;
    const double tau = 1.0 / p.nu_k;
    b.e_head = (q - 2.0) / (q - 1.0);
    b.a_head = std::pow(C, 1.0 / (q - 1.0)) * std::pow(2.0 - q, -1.0 / (q - 1.0)) *
               std::pow(q - 1.0, (q - 2.0) / (q - 1.0));
    b.s_cross = C * std::pow(tau, q - 1.0) / ((q - 1.0) * (2.0 - q));
    b.m_cross = C * std::pow(p.nu_k, 2.0 - q) / (2.0 - q);
    b.e_tail = (r - 2.0) / (r - 1.0);
    b.a_tail = b.m_cross * std::pow(b.s_cross, -b.e_tail);
    if (!std::isfinite(b.a_head) || !std::isfinite(b.a_tail))
        throw std::runtime_error("gzipf miss-rate laws: non-finite coefficients");
    return b;
}

// g(x) = -C^(1/(2-x)) (2-x)^((x-1)/(x-2)) / (2 - 3x + x^2); the head branch
// of the size law, s = g(q) m^(1 - 1/(2-q)), is the exact algebraic inverse
// of the head miss-rate law.
inline double size_law_g(double x, double C) {
    return -std::pow(C, 1.0 / (2.0 - x)) * std::pow(2.0 - x, (x - 1.0) / (x - 2.0)) /
           (2.0 - 3.0 * x + x * x);
}

}  // namespace detail

// Logarithmic-regime size law (exponent exactly 2): s = (C + m) e^(-m/C).
inline double size_of_miss_rate_q2(double m, double c_norm) {
    if (!(c_norm > 0.0))
        throw std::invalid_argument("size_of_miss_rate_q2: requires C > 0");
    if (!(m > 0.0) || !(m < 1.0))
        throw std::invalid_argument("size_of_miss_rate_q2: requires m in (0, 1)");
    return (c_norm + m) * std::exp(-m / c_norm);
}

// Analytic miss rate at cache size s. Values above 1 (below the model's
// validity floor at tiny sizes) clamp to 1 and set *clamped.
inline double miss_rate_of_size(double s, const GZipfParams& p, bool* clamped = nullptr) {
    if (clamped)
        *clamped = false;
    if (!(s > 0.0))
        throw std::invalid_argument("miss_rate_of_size: size must be positive");
    detail::ModelBranches b = detail::model_branches(p);
    double m;
    if (b.log_regime) {
        // Invert s = (C+m) e^(-m/C) by bisection; the law is decreasing in m.
        const double C = p.c_norm;
        double lo = 0.0, hi = 1.0;
        if (s >= size_of_miss_rate_q2(1e-15, C)) {
            m = 1e-15;
        } else if (s <= size_of_miss_rate_q2(1.0 - 1e-15, C)) {
            if (clamped)
                *clamped = true;
            m = 1.0;
        } else {
            for (int i = 0; i < 200; ++i) {
                double mid = 0.5 * (lo + hi);
                if (size_of_miss_rate_q2(mid, C) > s)
                    lo = mid;
                else
                    hi = mid;
            }
            m = 0.5 * (lo + hi);
        }
    } else {
        m = s <= b.s_cross ? b.a_head * std::pow(s, b.e_head)
                           : b.a_tail * std::pow(s, b.e_tail);
    }
    if (m > 1.0) {
        if (clamped)
            *clamped = true;
        return 1.0;
    }
    return m;
}

// Cache size achieving miss rate m; exact inverse of miss_rate_of_size on
// each branch.
inline double size_of_miss_rate(double m, const GZipfParams& p) {
    if (!(m > 0.0) || !(m < 1.0))
        throw std::invalid_argument("size_of_miss_rate: requires m in (0, 1)");
    detail::ModelBranches b = detail::model_branches(p);
    if (b.log_regime)
        return size_of_miss_rate_q2(m, p.c_norm);
    if (m >= b.m_cross)
        return detail::size_law_g(p.q, p.c_norm) * std::pow(m, 1.0 - 1.0 / (2.0 - p.q));
    return b.s_cross * std::pow(m / b.m_cross, 1.0 / b.e_tail);
}

struct SensitivityPoint {
    double exponent = 0.0;
    double size = 0.0;
};

// Cache size needed to hold a fixed miss rate as the popularity exponents
// sweep a grid. With covary_r the offset q - r is preserved (so the
// crossover frequency stays put); otherwise r is pinned at the base value.
inline std::vector<SensitivityPoint> sensitivity_curve(double m_fixed,
                                                       const std::vector<double>& exponent_grid,
                                                       const GZipfParams& base,
                                                       bool covary_r = true) {
    if (!(m_fixed > 0.0) || !(m_fixed < 1.0))
        throw std::invalid_argument("sensitivity_curve: requires m in (0, 1)");
    std::vector<SensitivityPoint> out;
    out.reserve(exponent_grid.size());
    for (double e : exponent_grid) {
        double q = e;
        double r = covary_r ? e - (base.q - base.r) : base.r;
        GZipfParams p = make_gzipf_params(q, r, base.mu, base.lambda, base.n_refs);
        out.push_back({e, size_of_miss_rate(m_fixed, p)});
    }
    return out;
}

// Popularity with three power-law regions: exponents alpha_1..3 from high
// frequencies to low, crossing at frequencies nu_k1 > nu_k2.
struct ThreeRegionParams {
    double alpha1 = 0.0, alpha2 = 0.0, alpha3 = 0.0;
    double nu_k1 = 0.0, nu_k2 = 0.0;
    double n_refs = 0.0;
};

// Piecewise power-law miss-rate curve with slopes 1 - 1/(alpha_i - 1),
// continuous at both region boundaries. Boundary sizes come from the
// working-set transform of the crossover frequencies; the first region is
// anchored by the generalized t-domain normalization.
//
// The absolute level is asymptotic: near the regime boundaries simulated
// curves bend over roughly a decade of sizes where a sharp-kink law cannot
// track them, and compulsory (first-reference) misses are outside the model
// entirely, so comparisons against short traces flatten onto the D/N floor
// the model keeps decaying through. The boundary transform also rejects
// fitted exponent combinations whose per-region working-set sizes come out
// non-monotone.
inline MissRateCurve three_region_miss_curve(const ThreeRegionParams& p,
                                             const std::vector<double>& sizes) {
    const double a1 = p.alpha1, a2 = p.alpha2, a3 = p.alpha3;
    for (double a : {a1, a2, a3})
        if (!(a > 1.0) || !(a < 2.0))
            throw std::invalid_argument("three_region_miss_curve: exponents must be in (1, 2)");
    if (!(p.nu_k1 > p.nu_k2) || !(p.nu_k2 > 0.0) || !(p.nu_k1 < 1.0))
        throw std::invalid_argument("three_region_miss_curve: requires 1 > nu_k1 > nu_k2 > 0");
    if (!(p.n_refs >= 2.0))
        throw std::invalid_argument("three_region_miss_curve: requires n_refs >= 2");

    const double tau1 = 1.0 / p.nu_k1, tau2 = 1.0 / p.nu_k2;
    const double t1 = std::max(1.0, std::round(tau1));
    const double t2 = std::max(t1, std::round(tau2));
    double inv_c = detail::harmonic_of_order(t1, 3.0 - a1) +
                   hurwitz_zeta(3.0 - a2, t1) - hurwitz_zeta(3.0 - a2, t2) +
                   hurwitz_zeta(3.0 - a3, t2) - hurwitz_zeta(3.0 - a3, p.n_refs);
    if (!std::isfinite(inv_c) || !(inv_c > 0.0))
        throw std::runtime_error("three_region_miss_curve: bad normalization");
    const double C = 1.0 / inv_c;

    const double s1 = C * std::pow(tau1, a1 - 1.0) / ((a1 - 1.0) * (2.0 - a1));
    const double s2 = C * std::pow(tau2, a2 - 1.0) / ((a2 - 1.0) * (2.0 - a2));
    if (!(s1 < s2))
        throw std::invalid_argument("three_region_miss_curve: non-monotone region boundaries");

    const double e1 = (a1 - 2.0) / (a1 - 1.0);
    const double e2 = (a2 - 2.0) / (a2 - 1.0);
    const double e3 = (a3 - 2.0) / (a3 - 1.0);
    const double amp1 = std::pow(C, 1.0 / (a1 - 1.0)) * std::pow(2.0 - a1, -1.0 / (a1 - 1.0)) *
                        std::pow(a1 - 1.0, (a1 - 2.0) / (a1 - 1.0));
    const double m1 = amp1 * std::pow(s1, e1);
    const double m2 = m1 * std::pow(s2 / s1, e2);

    MissRateCurve curve;
    curve.source = CurveSource::analytic;
    curve.points.reserve(sizes.size());
    for (double s : sizes) {
        if (!(s > 0.0))
            throw std::invalid_argument("three_region_miss_curve: sizes must be positive");
        double m;
        if (s <= s1)
            m = amp1 * std::pow(s, e1);
        else if (s <= s2)
            m = m1 * std::pow(s / s1, e2);
        else
            m = m2 * std::pow(s / s2, e3);
        curve.points.push_back({s, std::min(m, 1.0)});
    }
    return curve;
}

}  // namespace mapcache
