// Test-only reference implementations, kept independent of the library's
// evaluation paths: long-double power series and the cosine integral
// representation for I0, recursive Simpson quadrature for densities.
#ifndef ACER_TESTS_ORACLES_HPP
#define ACER_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace oracles {

// ln I0(z) by long-double power series; accurate for z up to ~40.
inline long double log_i0_series(long double z) {
    const long double q = 0.25L * z * z;
    long double term = 1.0L, sum = 1.0L;
    for (int k = 1; k < 400; ++k) {
        term *= q / (static_cast<long double>(k) * k);
        sum += term;
        if (term < sum * 1e-22L) break;
    }
    return std::log(sum);
}

// Adaptive Simpson on long double.
inline long double simpson_rec(const std::function<long double(long double)>& f, long double a,
                               long double b, long double fa, long double fm, long double fb,
                               long double whole, long double tol, int depth) {
    const long double m = 0.5L * (a + b);
    const long double lm = 0.5L * (a + m), rm = 0.5L * (m + b);
    const long double flm = f(lm), frm = f(rm);
    const long double left = (m - a) / 6.0L * (fa + 4.0L * flm + fm);
    const long double right = (b - m) / 6.0L * (fm + 4.0L * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0L * tol)
        return left + right + (left + right - whole) / 15.0L;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5L * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5L * tol, depth - 1);
}

inline long double integrate(const std::function<long double(long double)>& f, long double a,
                             long double b, long double tol = 1e-13L, int depth = 40) {
    const long double m = 0.5L * (a + b);
    const long double fa = f(a), fm = f(m), fb = f(b);
    const long double whole = (b - a) / 6.0L * (fa + 4.0L * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth);
}

// ln I0(z) through the integral representation
//   I0(z) = (1/pi) * int_0^pi exp(z cos t) dt
// evaluated as z + ln((1/pi) int exp(z (cos t - 1)) dt) so it stays finite.
inline long double log_i0_integral(long double z) {
    const long double pi = 3.14159265358979323846264338328L;
    const long double val = integrate(
        [z](long double t) { return std::exp(z * (std::cos(t) - 1.0L)); }, 0.0L, pi, 1e-18L, 48);
    return static_cast<long double>(z) + std::log(val / pi);
}

inline long double log_i0(long double z) {
    return z < 30.0L ? log_i0_series(z) : log_i0_integral(z);
}

// Reference Rician log-density built on the oracle I0.
inline long double rician_log_pdf_ref(long double x, long double nu, long double phi) {
    const long double inv2 = 1.0L / (phi * phi);
    return std::log(x) - 2.0L * std::log(phi) - 0.5L * (x * x + nu * nu) * inv2 +
           log_i0(x * nu * inv2);
}

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;
};

inline MeanSd mean_sd(const std::vector<double>& xs) {
    MeanSd out;
    for (double x : xs) out.mean += x;
    out.mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    return out;
}

} // namespace oracles

#endif
