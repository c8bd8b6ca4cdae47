#pragma once

// Special functions needed by the analytic cache model: upper incomplete
// gamma, Hurwitz zeta and generalized harmonic numbers. Implemented here
// directly so the library carries no external math runtime.

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace mapcache {

// Gamma(a, z) = int_z^inf x^(a-1) e^(-x) dx.
//
// Two evaluation schemes: a lower-tail power series for z < a+1 and a
// modified-Lentz continued fraction otherwise. Relative error is ~1e-12
// over the domain exercised here (a <= 3, z >= 0). Negative a down to -2
// is supported for z > 0 via the recurrence
//   Gamma(a, z) = (Gamma(a+1, z) - z^a e^-z) / a.
inline double upper_incomplete_gamma(double a, double z) {
    if (!(z >= 0.0) || std::isnan(a))
        throw std::invalid_argument("upper_incomplete_gamma: requires z >= 0");
    if (z == 0.0) {
        if (a <= 0.0)
            throw std::invalid_argument("upper_incomplete_gamma: divergent for a <= 0, z = 0");
        return std::tgamma(a);
    }
    if (a <= 0.0) {
        double g = upper_incomplete_gamma(a + 1.0, z);
        return (g - std::pow(z, a) * std::exp(-z)) / a;
    }
    if (z < a + 1.0) {
        // gamma(a,z) series, then Gamma(a,z) = Gamma(a) - gamma(a,z).
        double term = 1.0 / a;
        double sum = term;
        for (int n = 1; n < 1000; ++n) {
            term *= z / (a + n);
            sum += term;
            if (std::fabs(term) < std::fabs(sum) * 1e-17)
                break;
        }
        double lower = sum * std::exp(a * std::log(z) - z);
        return std::tgamma(a) - lower;
    }
    // Continued fraction (modified Lentz).
    const double tiny = 1e-300;
    double b = z + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 1000; ++i) {
        double an = -static_cast<double>(i) * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16)
            break;
    }
    return h * std::exp(a * std::log(z) - z);
}

// zeta(s, a) = sum_{k=0..inf} (k+a)^-s for s > 1, a > 0.
//
// Direct sum up to x = a+M with x >= 18, then Euler-Maclaurin tail:
//   x^(1-s)/(s-1) + x^-s/2 + sum_j B_2j/(2j)! * (s)_(2j-1) * x^(1-s-2j).
inline double hurwitz_zeta(double s, double a) {
    if (!(s > 1.0))
        throw std::invalid_argument("hurwitz_zeta: requires s > 1");
    if (!(a > 0.0))
        throw std::invalid_argument("hurwitz_zeta: requires a > 0");

    long m = 0;
    if (a < 18.0)
        m = static_cast<long>(std::ceil(18.0 - a));
    double sum = 0.0, comp = 0.0;
    for (long k = m - 1; k >= 0; --k) {  // smallest terms first
        double t = std::pow(a + static_cast<double>(k), -s);
        double y = t - comp;
        double u = sum + y;
        comp = (u - sum) - y;
        sum = u;
    }

    const double x = a + static_cast<double>(m);
    double tail = std::pow(x, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(x, -s);

    // B_2, B_4, ... B_14 over (2j)!
    static constexpr double b_over_fact[7] = {
        1.0 / 12.0,            // B2/2!
        -1.0 / 720.0,          // B4/4!
        1.0 / 30240.0,         // B6/6!
        -1.0 / 1209600.0,      // B8/8!
        1.0 / 47900160.0,      // B10/10!
        -691.0 / 1307674368000.0,
        7.0 / 74724249600.0,
    };
    double poch = s;                       // (s)_(2j-1), starts at j=1: just s
    double xpow = std::pow(x, -s - 1.0);   // x^(1-s-2j) at j=1
    double corr = 0.0;
    for (int j = 1; j <= 7; ++j) {
        corr += b_over_fact[j - 1] * poch * xpow;
        poch *= (s + 2.0 * j - 1.0) * (s + 2.0 * j);
        xpow /= x * x;
    }
    return sum + tail + corr;
}

// H(n, m) = sum_{k=1..n} k^-m. Direct compensated summation up to n = 1e8,
// zeta difference beyond (only valid there for m > 1, which is the model's
// domain of use).
inline double generalized_harmonic(std::uint64_t n, double m) {
    if (n == 0)
        throw std::invalid_argument("generalized_harmonic: requires n >= 1");
    if (n <= 100000000ull || !(m > 1.0)) {
        double sum = 0.0, comp = 0.0;
        for (std::uint64_t k = n; k >= 1; --k) {
            double t = std::pow(static_cast<double>(k), -m);
            double y = t - comp;
            double u = sum + y;
            comp = (u - sum) - y;
            sum = u;
        }
        return sum;
    }
    return hurwitz_zeta(m, 1.0) - hurwitz_zeta(m, static_cast<double>(n) + 1.0);
}

// Composite Gauss-Legendre quadrature on log-spaced panels; suitable for
// near-power-law integrands over wide positive ranges.
inline double integrate_log_axis(const auto& f, double lo, double hi, int panels = 96) {
    if (!(lo > 0.0) || !(hi > lo))
        throw std::invalid_argument("integrate_log_axis: requires 0 < lo < hi");
    // 7-point Gauss-Legendre nodes/weights on [-1, 1].
    static constexpr double node[7] = {
        -0.9491079123427585, -0.7415311855993945, -0.4058451513773972, 0.0,
        0.4058451513773972,  0.7415311855993945,  0.9491079123427585};
    static constexpr double weight[7] = {
        0.1294849661688697, 0.2797053914892766, 0.3818300505051189,
        0.4179591836734694, 0.3818300505051189, 0.2797053914892766,
        0.1294849661688697};
    const double ulo = std::log(lo), uhi = std::log(hi);
    const double du = (uhi - ulo) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double a = ulo + p * du;
        const double mid = a + 0.5 * du;
        double acc = 0.0;
        for (int i = 0; i < 7; ++i) {
            double u = mid + 0.5 * du * node[i];
            double x = std::exp(u);
            acc += weight[i] * f(x) * x;  // dx = x du
        }
        total += acc * 0.5 * du;
    }
    return total;
}

}  // namespace mapcache
