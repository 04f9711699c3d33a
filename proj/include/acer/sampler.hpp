#ifndef ACER_SAMPLER_HPP
#define ACER_SAMPLER_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "acer/erc.hpp"
#include "acer/image.hpp"
#include "acer/parallel.hpp"
#include "acer/rician.hpp"
#include "acer/rng.hpp"

namespace acer {

// Monte Carlo sampler settings. search_radius is the half-width of the
// candidate window around the pixel of interest, patch_radius the half-width
// of the comparison neighbourhood, target_accepted the number of samples
// collected into the posterior set, max_draws the candidate budget.
struct SamplerConfig {
    int search_radius = 18;
    int patch_radius = 1;
    int target_accepted = 192;
    int max_draws = 6144;
    std::uint64_t seed = 1;

    void validate() const {
        if (patch_radius < 1)
            throw std::invalid_argument("SamplerConfig: patch_radius must be >= 1");
        if (search_radius < patch_radius)
            throw std::invalid_argument("SamplerConfig: search_radius must be >= patch_radius");
        if (target_accepted < 1)
            throw std::invalid_argument("SamplerConfig: target_accepted must be >= 1");
        if (max_draws < target_accepted)
            throw std::invalid_argument("SamplerConfig: max_draws must be >= target_accepted");
    }
};

// Accepted intensities and their acceptance weights; the self-sample is
// always present with weight 1.
struct WeightedSampleSet {
    std::vector<double> values;
    std::vector<double> weights;
    int accepted_count = 0;
};

// Row-major (2r+1)^2 neighbourhood around s, mirror-reflected at borders.
inline std::vector<double> extract_patch(const Image& image, int row, int col, int patch_radius) {
    if (!image.inside(row, col))
        throw std::invalid_argument("extract_patch: pixel outside the image");
    if (patch_radius < 0) throw std::invalid_argument("extract_patch: negative radius");
    const int w = 2 * patch_radius + 1;
    std::vector<double> patch;
    patch.reserve(static_cast<std::size_t>(w) * w);
    for (int dr = -patch_radius; dr <= patch_radius; ++dr) {
        const int r = mirror_index(row + dr, image.rows);
        for (int dc = -patch_radius; dc <= patch_radius; ++dc)
            patch.push_back(image.at(r, mirror_index(col + dc, image.cols)));
    }
    return patch;
}

namespace detail {

constexpr double kIntensityEps = 1e-6; // clamp for zero-valued pixels

// Per-pixel acceptance term: log density of the candidate intensity under
// the reference intensity, normalised so a duplicate contributes 0.
inline double acceptance_term(double x, double nu, double phi0) {
    const double xc = std::max(x, kIntensityEps);
    const double nc = std::max(nu, kIntensityEps);
    const RicianParams p{nc, phi0};
    return rician_log_pdf(xc, p) - rician_log_pdf(nc, p);
}

// ln I0 with the argument's log supplied, saving a transcendental in the
// large-argument branch. Same series as log_bessel_i0, with the per-term
// divisions replaced by reciprocal tables for the hot loop.
inline double log_i0_with_log(double z, double ln_z) {
    constexpr double kLn2Pi = 1.8378770664093455;
    if (z < 15.0) {
        static const auto inv_k2 = [] {
            std::array<double, 64> t{};
            for (int k = 1; k < 64; ++k) t[k] = 1.0 / (static_cast<double>(k) * k);
            return t;
        }();
        const double q = 0.25 * z * z;
        double term = 1.0, sum = 1.0;
        for (int k = 1; k < 64; ++k) {
            term *= q * inv_k2[k];
            sum += term;
            if (term < sum * 1e-17) break;
        }
        return std::log(sum);
    }
    // ln I0(z) - (z - 0.5 ln(2 pi z)) expanded in w = 1/z; the leading
    // coefficients are the exact series values 1/8, 1/16, 25/384, 13/128 and
    // the rest are fitted, giving |error| < 1.1e-12 over z >= 15.
    const double w = 1.0 / z;
    const double corr =
        w * (0.125 +
             w * (0.0625 +
                  w * (0.06510416666666667 +
                       w * (0.1015625 +
                            w * (0.20912395 +
                                 w * (0.57200496 + w * (0.65296409 + w * 16.39174058)))))));
    return z - 0.5 * (kLn2Pi + ln_z) + corr;
}

// Hot-loop evaluation state for one pixel of interest: cached logarithms
// over the (search + patch) window and folded per-reference-pixel
// constants, so one acceptance term costs a handful of multiplications.
struct AcceptanceContext {
    double inv_phi2 = 0.0;  // 1 / phi^2
    double half_inv = 0.0;  // 1 / (2 phi^2)
    int ext_row0 = 0, ext_col0 = 0, ext_cols = 0;
    std::vector<double> x_val;  // clamped window intensities
    std::vector<double> ln_x;   // their logs
    std::vector<double> x_sq;   // x^2 / (2 phi^2)
    std::vector<double> nu_m;   // nu_j / phi^2 (z = x * nu_m)
    std::vector<double> ln_nu_m;
    std::vector<double> cj;     // folds -lambda_j and the nu_j terms

    // term_j(x) with cached lnx and x^2/(2 phi^2); exactly 0 for x == nu_j.
    double term(std::size_t j, double lnx, double xsq, double x) const {
        const double z = x * nu_m[j];
        return lnx - xsq + log_i0_with_log(z, lnx + ln_nu_m[j]) + cj[j];
    }
};

} // namespace detail

// ln alpha(s_k | s_0): log acceptance probability that the neighbourhood of
// the candidate is similar to that of the pixel of interest. The comparison
// runs over the neighbour ring (the shared centre element of the two patches
// is not compared against itself); a single-element patch is compared
// directly. The Rician mode exceeds nu, so the raw product can exceed one;
// the result is clamped to <= 0.
inline double log_acceptance(std::span<const double> patch_k, std::span<const double> patch_0,
                             double phi0) {
    if (patch_k.size() != patch_0.size() || patch_k.empty())
        throw std::invalid_argument("log_acceptance: patches must be non-empty and equal length");
    if (!(phi0 > 0.0) || !std::isfinite(phi0))
        throw std::invalid_argument("log_acceptance: phi0 must be finite and > 0");
    const std::size_t n = patch_k.size();
    const std::size_t centre = n / 2;
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (n > 1 && j == centre) continue;
        sum += detail::acceptance_term(patch_k[j], patch_0[j], phi0);
    }
    return std::min(0.0, sum);
}

inline double log_acceptance(const std::vector<double>& patch_k,
                             const std::vector<double>& patch_0, double phi0) {
    return log_acceptance(std::span<const double>(patch_k), std::span<const double>(patch_0),
                          phi0);
}

// Mean of the weighted sample histogram; the normaliser cancels.
// Accumulated relative to the first sample so a constant set is returned
// exactly.
inline double posterior_mean(const WeightedSampleSet& samples) {
    if (samples.values.empty() || samples.values.size() != samples.weights.size())
        throw std::invalid_argument("posterior_mean: empty or inconsistent sample set");
    const double v0 = samples.values.front();
    double num = 0.0, den = 0.0;
    double lo = v0, hi = v0;
    for (std::size_t i = 0; i < samples.values.size(); ++i) {
        num += samples.weights[i] * (samples.values[i] - v0);
        den += samples.weights[i];
        lo = std::min(lo, samples.values[i]);
        hi = std::max(hi, samples.values[i]);
    }
    return std::clamp(v0 + num / den, lo, hi);
}

// Collects the weighted sample set for one pixel. The self-sample enters
// first with weight 1; candidates are drawn uniformly (with replacement)
// from the search window clipped to the image, excluding s_0 itself, which
// is already in the set, and kept when a fresh uniform u satisfies
// u <= alpha. Consumes two uniforms per candidate, so the result is a pure
// function of the rng stream.
template <class Rng>
WeightedSampleSet draw_samples(const Image& image, int row, int col, const ScaleMap& scale_map,
                               const SamplerConfig& cfg, Rng& rng) {
    cfg.validate();
    if (!image.inside(row, col))
        throw std::invalid_argument("draw_samples: pixel outside the image");
    if (!scale_map.values.same_shape(image))
        throw std::invalid_argument("draw_samples: scale map dimensions differ from image");

    const double phi0 = scale_map.values.at(row, col);
    if (!(phi0 > 0.0) || !std::isfinite(phi0))
        throw std::invalid_argument("draw_samples: scale map must be strictly positive");
    const int pr = cfg.patch_radius;
    const std::vector<double> patch0 = extract_patch(image, row, col, pr);
    const std::size_t plen = patch0.size();
    const std::size_t centre = plen / 2;

    const int rlo = std::max(0, row - cfg.search_radius);
    const int rhi = std::min(image.rows - 1, row + cfg.search_radius);
    const int clo = std::max(0, col - cfg.search_radius);
    const int chi = std::min(image.cols - 1, col + cfg.search_radius);

    detail::AcceptanceContext ctx;
    ctx.inv_phi2 = 1.0 / (phi0 * phi0);
    ctx.half_inv = 0.5 * ctx.inv_phi2;
    ctx.ext_row0 = rlo - pr;
    ctx.ext_col0 = clo - pr;
    ctx.ext_cols = (chi + pr) - ctx.ext_col0 + 1;
    const int ext_rows = (rhi + pr) - ctx.ext_row0 + 1;
    ctx.x_val.resize(static_cast<std::size_t>(ext_rows) * ctx.ext_cols);
    ctx.ln_x.resize(ctx.x_val.size());
    ctx.x_sq.resize(ctx.x_val.size());
    for (int er = 0; er < ext_rows; ++er) {
        const int r = mirror_index(ctx.ext_row0 + er, image.rows);
        for (int ec = 0; ec < ctx.ext_cols; ++ec) {
            const double x =
                std::max(image.at(r, mirror_index(ctx.ext_col0 + ec, image.cols)),
                         detail::kIntensityEps);
            const std::size_t i = static_cast<std::size_t>(er) * ctx.ext_cols + ec;
            ctx.x_val[i] = x;
            ctx.ln_x[i] = std::log(x);
            ctx.x_sq[i] = x * x * ctx.half_inv;
        }
    }

    // Per-reference-pixel constants. cj folds the normaliser lambda_j so a
    // duplicate intensity contributes exactly 0; slack_j bounds the term from
    // above (density peak over x), and its suffix sums allow early rejection
    // once the remaining pixels cannot lift the sum back to ln u.
    ctx.nu_m.resize(plen);
    ctx.ln_nu_m.resize(plen);
    ctx.cj.assign(plen, 0.0);
    std::vector<double> slack(plen, 0.0);
    for (std::size_t j = 0; j < plen; ++j) {
        const double nu = std::max(patch0[j], detail::kIntensityEps);
        ctx.nu_m[j] = nu * ctx.inv_phi2;
        ctx.ln_nu_m[j] = std::log(ctx.nu_m[j]);
        if (plen > 1 && j == centre) continue;
        const double ln_nu = std::log(nu);
        const double nu_sq = nu * nu * ctx.half_inv;
        ctx.cj[j] = -(ln_nu - nu_sq +
                      detail::log_i0_with_log(nu * ctx.nu_m[j], ln_nu + ctx.ln_nu_m[j]));
        auto term_at = [&](double x) {
            const double xc = std::max(x, detail::kIntensityEps);
            return ctx.term(j, std::log(xc), xc * xc * ctx.half_inv, xc);
        };
        const double mode = detail::golden_max(
            term_at, std::max(detail::kIntensityEps, nu - phi0), nu + 3.0 * phi0, 1e-3 * phi0);
        slack[j] = std::max(0.0, term_at(mode)) + 1e-9;
    }
    std::vector<double> suffix(plen + 1, 0.0);
    for (std::size_t j = plen; j-- > 0;) {
        suffix[j] = suffix[j + 1];
        if (!(plen > 1 && j == centre)) suffix[j] += slack[j];
    }

    WeightedSampleSet out;
    out.values.push_back(image.at(row, col));
    out.weights.push_back(1.0);

    const int nc = chi - clo + 1;
    const int window = (rhi - rlo + 1) * nc;
    const int self_index = (row - rlo) * nc + (col - clo);
    if (window <= 1) { // degenerate window: only the self-sample
        out.accepted_count = 1;
        return out;
    }

    for (int draws = 0;
         static_cast<int>(out.values.size()) < cfg.target_accepted && draws < cfg.max_draws;
         ++draws) {
        int idx = std::min(window - 2, static_cast<int>(uniform_co(rng) * (window - 1)));
        if (idx >= self_index) ++idx;
        const int rk = rlo + idx / nc;
        const int ck = clo + idx % nc;
        const double lnu = std::log(uniform_oc(rng));

        double sum = 0.0;
        bool rejected = false;
        std::size_t j = 0;
        // candidate ring lives at (rk - rlo .. rk - rlo + 2 pr) in the cache
        const std::size_t base =
            static_cast<std::size_t>(rk - rlo) * ctx.ext_cols + (ck - clo);
        for (int dr = 0; dr <= 2 * pr && !rejected; ++dr) {
            std::size_t cell = base + static_cast<std::size_t>(dr) * ctx.ext_cols;
            for (int dc = 0; dc <= 2 * pr; ++dc, ++j, ++cell) {
                if (plen > 1 && j == centre) continue;
                const double z = ctx.x_val[cell] * ctx.nu_m[j];
                sum += ctx.ln_x[cell] - ctx.x_sq[cell] +
                       detail::log_i0_with_log(z, ctx.ln_x[cell] + ctx.ln_nu_m[j]) + ctx.cj[j];
                if (sum + suffix[j + 1] < lnu) {
                    rejected = true;
                    break;
                }
            }
        }
        if (rejected) continue;
        const double ln_alpha = std::min(0.0, sum);
        if (lnu <= ln_alpha) {
            out.values.push_back(image.at(rk, ck));
            out.weights.push_back(std::exp(ln_alpha));
        }
    }
    out.accepted_count = static_cast<int>(out.values.size());
    return out;
}

using ProgressFn = std::function<void(int rows_done, int rows_total)>;

constexpr std::uint64_t kSamplerSalt = 0xACE2;

// Bayesian least-squares reconstruction: every pixel is the posterior mean
// of its weighted sample set. Each pixel owns an rng stream derived from
// (seed, row, col), so the output is identical for any thread count. The
// progress sink, when set, is invoked from worker threads after each row.
inline Image reconstruct(const Image& image, const ScaleMap& scale_map, const SamplerConfig& cfg,
                         int threads = 0, const ProgressFn& progress = {}) {
    cfg.validate();
    if (!scale_map.values.same_shape(image))
        throw std::invalid_argument("reconstruct: scale map dimensions differ from image");

    Image out(image.rows, image.cols, image.spacing_mm);
    std::atomic<int> rows_done{0};
    parallel_for(static_cast<std::size_t>(image.rows), threads, [&](std::size_t r) {
        const int row = static_cast<int>(r);
        for (int col = 0; col < image.cols; ++col) {
            SplitMix64 rng = pixel_stream(cfg.seed, row, col, kSamplerSalt);
            const WeightedSampleSet samples =
                draw_samples(image, row, col, scale_map, cfg, rng);
            out.at(row, col) = posterior_mean(samples);
        }
        const int done = rows_done.fetch_add(1) + 1;
        if (progress) progress(done, image.rows);
    });
    return out;
}

} // namespace acer

#endif
