#ifndef ACER_RICIAN_HPP
#define ACER_RICIAN_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "acer/error.hpp"
#include "acer/rng.hpp"

namespace acer {

// Underlying amplitude nu (>= 0) and scale phi (> 0) of a Rician density.
struct RicianParams {
    double nu = 0.0;
    double phi = 1.0;

    void validate() const {
        if (!(nu >= 0.0) || !std::isfinite(nu))
            throw std::invalid_argument("RicianParams: nu must be finite and >= 0");
        if (!(phi > 0.0) || !std::isfinite(phi))
            throw std::invalid_argument("RicianParams: phi must be finite and > 0");
    }
};

// ln I0(z), modified Bessel function of the first kind, order zero.
// Power series below the seam, large-argument expansion above; evaluated
// in the log domain so products of many densities stay finite.
inline double log_bessel_i0(double z) {
    if (!(z >= 0.0) || !std::isfinite(z))
        throw std::invalid_argument("log_bessel_i0: argument must be finite and >= 0");

    constexpr double kSeam = 15.0;
    if (z < kSeam) {
        // I0(z) = sum_k (z^2/4)^k / (k!)^2
        const double q = 0.25 * z * z;
        double term = 1.0, sum = 1.0;
        for (int k = 1; k < 200; ++k) {
            term *= q / (static_cast<double>(k) * k);
            sum += term;
            if (term < sum * 1e-17) break;
        }
        return std::log(sum);
    }

    // I0(z) ~ e^z / sqrt(2 pi z) * sum_k t_k,  t_0 = 1,
    // t_k = t_{k-1} * (2k-1)^2 / (8 k z).  Truncated at the smallest term.
    double term = 1.0, tail = 0.0;
    for (int k = 1; k < 64; ++k) {
        const double m = 2.0 * k - 1.0;
        const double next = term * (m * m) / (8.0 * k * z);
        if (next >= term) break; // divergent tail reached
        term = next;
        tail += term;
        if (term < (1.0 + tail) * 1e-17) break;
    }
    return z - 0.5 * std::log(2.0 * 3.14159265358979323846 * z) + std::log1p(tail);
}

// Rician log-density ln f(x | nu, phi), computed entirely in the log domain:
//   ln x - 2 ln phi - (x^2 + nu^2)/(2 phi^2) + ln I0(x nu / phi^2)
inline double rician_log_pdf(double x, const RicianParams& p) {
    p.validate();
    if (!(x > 0.0) || !std::isfinite(x))
        throw std::domain_error("rician_log_pdf: density is defined for x > 0");
    const double inv2 = 1.0 / (p.phi * p.phi);
    return std::log(x) - 2.0 * std::log(p.phi) - 0.5 * (x * x + p.nu * p.nu) * inv2 +
           log_bessel_i0(x * p.nu * inv2);
}

// Magnitude of a complex Gaussian: sqrt((nu + a)^2 + b^2), a,b ~ N(0, phi^2).
template <class Rng>
double sample_rician(const RicianParams& p, Rng& rng) {
    p.validate();
    const auto [ga, gb] = gaussian_pair(rng);
    const double a = p.nu + p.phi * ga;
    const double b = p.phi * gb;
    return std::hypot(a, b);
}

namespace detail {

// Likelihood evaluator with the parameter-independent sums hoisted out:
//   ll = sum ln x - 2 n ln phi - (sum x^2 + n nu^2)/(2 phi^2) + sum ln I0(x nu / phi^2)
struct RicianLikelihood {
    std::span<const double> xs;
    double sum_lnx = 0.0;
    double sum_x2 = 0.0;

    explicit RicianLikelihood(std::span<const double> samples) : xs(samples) {
        for (double x : xs) {
            sum_lnx += std::log(x);
            sum_x2 += x * x;
        }
    }

    double operator()(double nu, double phi) const {
        const double n = static_cast<double>(xs.size());
        const double inv2 = 1.0 / (phi * phi);
        double bessel = 0.0;
        if (nu > 0.0) {
            for (double x : xs) bessel += log_bessel_i0(x * nu * inv2);
        }
        return sum_lnx - 2.0 * n * std::log(phi) - 0.5 * (sum_x2 + n * nu * nu) * inv2 + bessel;
    }
};

// Golden-section maximisation of f over [lo, hi] to absolute tolerance tol.
template <class F>
double golden_max(F&& f, double lo, double hi, double tol) {
    constexpr double invphi = 0.6180339887498949; // 1/golden ratio
    double a = lo, b = hi;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    return fc > fd ? c : d;
}

} // namespace detail

// Maximum-likelihood Rician fit. Method-of-moments start from the
// sample mean and second moment, then coordinate-wise golden-section
// refinement. On the nu = 0 boundary the likelihood is even in nu, so a
// boundary fit is preferred unless the interior optimum is significantly
// better (likelihood-ratio margin at the chi^2_1 5% level); in that case the
// closed-form Rayleigh scale sqrt(m2/2) is reported.
inline RicianParams fit_rician_ml(std::span<const double> samples) {
    const std::size_t n = samples.size();
    if (n < 8)
        throw insufficient_data_error("fit_rician_ml: need at least 8 samples");
    double m1 = 0.0, m2 = 0.0;
    for (double x : samples) {
        if (!(x > 0.0) || !std::isfinite(x))
            throw std::domain_error("fit_rician_ml: samples must be finite and > 0");
        m1 += x;
        m2 += x * x;
    }
    m1 /= static_cast<double>(n);
    m2 /= static_cast<double>(n);

    const double scale = std::sqrt(m2);
    const detail::RicianLikelihood ll(samples);

    // Rayleigh candidate: nu = 0, phi^2 = m2 / 2 (closed-form MLE).
    const RicianParams rayleigh{0.0, std::sqrt(0.5 * m2)};
    const double ll_rayleigh = ll(rayleigh.nu, rayleigh.phi);

    // Moment start: Var ~ phi^2, m1^2 ~ nu^2 + phi^2 in the high-SNR regime.
    const double var = std::max(m2 - m1 * m1, 1e-12 * m2);
    double nu = std::sqrt(std::max(0.0, 2.0 * m1 * m1 - m2));
    double phi = std::sqrt(var);

    const double nu_hi = 2.0 * m1 + 4.0 * scale;
    const double phi_lo = 1e-9 * scale;
    const double phi_hi = 2.0 * scale;
    const double tol_nu = 1e-8 * std::max(1.0, nu_hi);
    const double tol_phi = 1e-8 * std::max(1.0, phi_hi);

    for (int sweep = 0; sweep < 6; ++sweep) {
        const double prev_nu = nu, prev_phi = phi;
        nu = detail::golden_max([&](double v) { return ll(v, phi); }, 0.0, nu_hi, tol_nu);
        phi = detail::golden_max([&](double v) { return ll(nu, v); }, phi_lo, phi_hi, tol_phi);
        if (std::abs(nu - prev_nu) < tol_nu && std::abs(phi - prev_phi) < tol_phi) break;
    }
    const double ll_refined = ll(nu, phi);

    // Boundary rule: keep the interior fit only when it beats the Rayleigh
    // fit by more than the 5% chi^2_1 margin.
    if (2.0 * (ll_refined - ll_rayleigh) < 3.841) return rayleigh;
    return RicianParams{nu, phi};
}

inline RicianParams fit_rician_ml(const std::vector<double>& samples) {
    return fit_rician_ml(std::span<const double>(samples));
}

} // namespace acer

#endif
