#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "acer/rician.hpp"
#include "acer/rng.hpp"
#include "oracles.hpp"

using acer::RicianParams;
using acer::SplitMix64;

namespace {

std::vector<double> draw_rician(double nu, double phi, std::size_t n, std::uint64_t seed) {
    SplitMix64 rng(seed);
    std::vector<double> xs(n);
    for (auto& x : xs) x = acer::sample_rician(RicianParams{nu, phi}, rng);
    return xs;
}

double normalization(double nu, double phi) {
    const auto f = [&](long double x) {
        return std::exp(static_cast<long double>(
            acer::rician_log_pdf(static_cast<double>(x), RicianParams{nu, phi})));
    };
    const long double hi = nu + 12.0 * phi;
    return static_cast<double>(oracles::integrate(f, 1e-12L, hi, 1e-12L));
}

} // namespace

TEST_CASE("log_bessel_i0 reference points", "[rician]") {
    CHECK(acer::log_bessel_i0(0.0) == 0.0);
    CHECK_THAT(acer::log_bessel_i0(1.0),
               Catch::Matchers::WithinAbs(0.2359143585071786, 1e-12));
    // asymptotic branch against the integral-representation oracle
    CHECK_THAT(acer::log_bessel_i0(500.0),
               Catch::Matchers::WithinAbs(495.9740076681067, 1e-8));
    CHECK_THAT(acer::log_bessel_i0(500.0) - static_cast<double>(oracles::log_i0(500.0L)),
               Catch::Matchers::WithinAbs(0.0, 1e-10));
}

TEST_CASE("log_bessel_i0 accuracy over [0, 700]", "[rician]") {
    // relative error of I0(z) e^{-z}, i.e. absolute error of ln I0
    for (double z = 0.25; z <= 700.0; z += 6.73) {
        const double got = acer::log_bessel_i0(z);
        const double want = static_cast<double>(oracles::log_i0(static_cast<long double>(z)));
        INFO("z = " << z);
        CHECK_THAT(got - want, Catch::Matchers::WithinAbs(0.0, 1e-10));
    }
}

TEST_CASE("log_bessel_i0 seam agreement", "[rician]") {
    for (double z : {14.999999, 15.0, 15.000001}) {
        const double want = static_cast<double>(oracles::log_i0(static_cast<long double>(z)));
        CHECK_THAT(acer::log_bessel_i0(z) - want, Catch::Matchers::WithinAbs(0.0, 1e-11));
    }
}

TEST_CASE("log_bessel_i0 large arguments and domain", "[rician]") {
    CHECK(std::isfinite(acer::log_bessel_i0(1e8)));
    CHECK(std::isfinite(acer::log_bessel_i0(1e15)));
    CHECK_THROWS_AS(acer::log_bessel_i0(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(acer::log_bessel_i0(std::nan("")), std::invalid_argument);

    // monotone nondecreasing
    double prev = acer::log_bessel_i0(0.0);
    for (double z = 0.1; z < 100.0; z += 0.37) {
        const double cur = acer::log_bessel_i0(z);
        CHECK(cur >= prev);
        prev = cur;
    }

    // ln I0(z) - (z - 0.5 ln(2 pi z)) -> 0
    double prev_gap = 1e9;
    for (double z : {1e2, 1e4, 1e6, 1e8}) {
        const double gap =
            std::abs(acer::log_bessel_i0(z) - (z - 0.5 * std::log(2.0 * M_PI * z)));
        CHECK(gap < prev_gap);
        prev_gap = gap;
    }
    CHECK(prev_gap < 1e-8);
}

TEST_CASE("rician_log_pdf values", "[rician]") {
    // Rayleigh case: ln(1) - 0 - 0.5 + ln I0(0) = -0.5
    CHECK(acer::rician_log_pdf(1.0, RicianParams{0.0, 1.0}) == -0.5);
    // ln 2 - 4 + ln I0(4), frozen from the series oracle
    CHECK_THAT(acer::rician_log_pdf(2.0, RicianParams{2.0, 1.0}),
               Catch::Matchers::WithinAbs(-0.8818800239245954, 1e-12));
    CHECK_THAT(acer::rician_log_pdf(2.0, RicianParams{2.0, 1.0}) -
                   static_cast<double>(oracles::rician_log_pdf_ref(2.0L, 2.0L, 1.0L)),
               Catch::Matchers::WithinAbs(0.0, 1e-12));

    CHECK_THROWS_AS(acer::rician_log_pdf(0.0, RicianParams{1.0, 1.0}), std::domain_error);
    CHECK_THROWS_AS(acer::rician_log_pdf(-2.0, RicianParams{1.0, 1.0}), std::domain_error);
    CHECK_THROWS_AS(acer::rician_log_pdf(1.0, RicianParams{-1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(acer::rician_log_pdf(1.0, RicianParams{1.0, 0.0}), std::invalid_argument);

    // stays finite deep into the asymptotic regime
    CHECK(std::isfinite(acer::rician_log_pdf(1e4, RicianParams{1e4, 0.01})));
}

TEST_CASE("rician_log_pdf integrates to one", "[rician]") {
    CHECK_THAT(normalization(3.0, 1.0), Catch::Matchers::WithinAbs(1.0, 1e-6));
    CHECK_THAT(normalization(0.0, 2.5), Catch::Matchers::WithinAbs(1.0, 1e-6));
    CHECK_THAT(normalization(40.0, 1.5), Catch::Matchers::WithinAbs(1.0, 1e-6));
}

TEST_CASE("rician_log_pdf matches the Rayleigh log-density at nu = 0", "[rician]") {
    for (double phi : {0.5, 1.0, 3.0}) {
        for (double x = 0.1; x < 8.0; x += 0.471) {
            const double rayleigh = std::log(x / (phi * phi)) - x * x / (2.0 * phi * phi);
            CHECK_THAT(acer::rician_log_pdf(x, RicianParams{0.0, phi}),
                       Catch::Matchers::WithinAbs(rayleigh, 1e-12));
        }
    }
}

TEST_CASE("sample_rician noiseless limit and Rayleigh mean", "[rician]") {
    SplitMix64 rng(42);
    for (int i = 0; i < 50; ++i)
        CHECK_THAT(acer::sample_rician(RicianParams{5.0, 1e-12}, rng),
                   Catch::Matchers::WithinAbs(5.0, 1e-9));

    const auto xs = draw_rician(0.0, 2.0, 1'000'000, 7);
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    CHECK_THAT(mean, Catch::Matchers::WithinAbs(2.5066282746310005, 0.01));
}

TEST_CASE("sample_rician is reproducible given the stream", "[rician]") {
    SplitMix64 a(99), b(99);
    for (int i = 0; i < 100; ++i)
        CHECK(acer::sample_rician(RicianParams{3.0, 1.5}, a) ==
              acer::sample_rician(RicianParams{3.0, 1.5}, b));
}

TEST_CASE("sample_rician empirical CDF matches quadrature of the density", "[rician]") {
    const double nu = 4.0, phi = 1.0;
    auto xs = draw_rician(nu, phi, 100'000, 2024);
    std::sort(xs.begin(), xs.end());

    // cumulative Simpson on a fine grid, interpolated at the sample points
    const int grid_n = 4000;
    const double hi = nu + 10.0 * phi;
    std::vector<double> cdf(grid_n + 1, 0.0);
    const double h = hi / grid_n;
    auto pdf = [&](double x) {
        return x <= 0.0 ? 0.0 : std::exp(acer::rician_log_pdf(x, RicianParams{nu, phi}));
    };
    for (int i = 1; i <= grid_n; ++i) {
        const double a = (i - 1) * h, b = i * h;
        cdf[i] = cdf[i - 1] + (b - a) / 6.0 * (pdf(a) + 4.0 * pdf(0.5 * (a + b)) + pdf(b));
    }
    auto cdf_at = [&](double x) {
        if (x <= 0.0) return 0.0;
        if (x >= hi) return cdf[grid_n];
        const double p = x / h;
        const int i = static_cast<int>(p);
        return cdf[i] + (p - i) * (cdf[i + 1] - cdf[i]);
    };

    double ks = 0.0;
    const double n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf_at(xs[i]);
        ks = std::max(ks, std::abs((i + 1) / n - f));
        ks = std::max(ks, std::abs(f - i / n));
    }
    CHECK(ks < 0.01);
}

TEST_CASE("fit_rician_ml on Rayleigh data uses the closed form", "[rician]") {
    const auto xs = draw_rician(0.0, 2.0, 20'000, 11);
    double m2 = 0.0;
    for (double x : xs) m2 += x * x;
    m2 /= static_cast<double>(xs.size());

    const RicianParams p = acer::fit_rician_ml(xs);
    CHECK_THAT(p.phi * p.phi / (0.5 * m2), Catch::Matchers::WithinAbs(1.0, 1e-6));
    CHECK(p.nu < 0.05 * p.phi);
}

TEST_CASE("fit_rician_ml recovers interior parameters", "[rician]") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        const auto xs = draw_rician(100.0, 10.0, 10'000, seed);
        const RicianParams p = acer::fit_rician_ml(xs);
        CHECK(p.nu > 95.0);
        CHECK(p.nu < 105.0);
        CHECK(p.phi > 9.5);
        CHECK(p.phi < 10.5);
    }
}

TEST_CASE("fit_rician_ml improves on the moment initializer", "[rician]") {
    for (std::uint64_t seed : {5ULL, 6ULL}) {
        const auto xs = draw_rician(20.0, 8.0, 2'000, seed);
        double m1 = 0.0, m2 = 0.0;
        for (double x : xs) {
            m1 += x;
            m2 += x * x;
        }
        m1 /= static_cast<double>(xs.size());
        m2 /= static_cast<double>(xs.size());
        const double nu0 = std::sqrt(std::max(0.0, 2.0 * m1 * m1 - m2));
        const double phi0 = std::sqrt(std::max(m2 - m1 * m1, 1e-12 * m2));

        const RicianParams p = acer::fit_rician_ml(xs);
        const acer::detail::RicianLikelihood ll{std::span<const double>(xs)};
        CHECK(ll(p.nu, p.phi) >= ll(nu0, phi0));
        CHECK(p.phi > 0.0);
    }
}

TEST_CASE("fit_rician_ml degenerate concentration", "[rician]") {
    SplitMix64 rng(3);
    std::vector<double> xs(64);
    for (auto& x : xs) x = 50.0 + (acer::uniform_co(rng) - 0.5) * 2e-6;
    const RicianParams p = acer::fit_rician_ml(xs);
    CHECK_THAT(p.nu, Catch::Matchers::WithinAbs(50.0, 1e-3));
    CHECK(p.phi <= 1e-3);
}

TEST_CASE("fit_rician_ml error paths", "[rician]") {
    CHECK_THROWS_AS(acer::fit_rician_ml(std::vector<double>{1, 2, 3, 4, 5, 6, 7}),
                    acer::insufficient_data_error);
    CHECK_THROWS_AS(acer::fit_rician_ml(std::vector<double>{1, 2, 3, 4, -1, 6, 7, 8}),
                    std::domain_error);
    CHECK_THROWS_AS(acer::fit_rician_ml(std::vector<double>{1, 2, 3, 4, 0.0, 6, 7, 8}),
                    std::domain_error);
}

TEST_CASE("fit_rician_ml is consistent as samples grow", "[rician]") {
    const double nu = 30.0, phi = 6.0;
    std::vector<double> med_err;
    for (std::size_t n : {1'000ULL, 10'000ULL, 100'000ULL}) {
        std::vector<double> errs;
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const auto xs = draw_rician(nu, phi, n, seed * 7919);
            const RicianParams p = acer::fit_rician_ml(xs);
            errs.push_back(std::abs(p.nu - nu) / nu + std::abs(p.phi - phi) / phi);
        }
        std::sort(errs.begin(), errs.end());
        med_err.push_back(errs[errs.size() / 2]);
    }
    CHECK(med_err[1] < med_err[0]);
    CHECK(med_err[2] < med_err[1]);
}
