#ifndef ACER_METRICS_HPP
#define ACER_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "acer/error.hpp"
#include "acer/image.hpp"

namespace acer {

// Subjective scores, rows = evaluators, cols = slices, entries in 1..5.
struct ScoreMatrix {
    int evaluators = 0;
    int slices = 0;
    std::vector<int> scores;

    ScoreMatrix() = default;

    ScoreMatrix(int evaluators_, int slices_, std::vector<int> scores_)
        : evaluators(evaluators_), slices(slices_), scores(std::move(scores_)) {
        if (evaluators <= 0 || slices <= 0 ||
            scores.size() != static_cast<std::size_t>(evaluators) * slices)
            throw std::invalid_argument("ScoreMatrix: inconsistent dimensions");
        for (int s : scores)
            if (s < 1 || s > 5)
                throw std::invalid_argument("ScoreMatrix: scores must be in 1..5");
    }

    int at(int evaluator, int slice) const {
        return scores[static_cast<std::size_t>(evaluator) * slices + slice];
    }
};

namespace detail {

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0; // sample standard deviation (n-1)
    std::size_t n = 0;
};

inline MeanSd region_stats(const Image& img, const RegionMask& mask) {
    if (!mask.same_shape(img))
        throw std::invalid_argument("region_stats: mask and image dimensions differ");
    MeanSd s;
    double sum = 0.0;
    for (int r = 0; r < img.rows; ++r)
        for (int c = 0; c < img.cols; ++c)
            if (mask.at(r, c)) {
                sum += img.at(r, c);
                ++s.n;
            }
    if (s.n == 0) throw std::invalid_argument("region_stats: empty mask");
    s.mean = sum / static_cast<double>(s.n);
    if (s.n >= 2) {
        double ss = 0.0;
        for (int r = 0; r < img.rows; ++r)
            for (int c = 0; c < img.cols; ++c)
                if (mask.at(r, c)) {
                    const double d = img.at(r, c) - s.mean;
                    ss += d * d;
                }
        s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
    }
    return s;
}

// Regularised incomplete beta I_x(a, b) by Lentz continued fraction.
inline double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
        b * std::log1p(-x);
    auto cf = [](double a_, double b_, double x_) {
        constexpr double tiny = 1e-300;
        constexpr double eps = 1e-15;
        double c = 1.0, d = 1.0 - (a_ + b_) * x_ / (a_ + 1.0);
        if (std::abs(d) < tiny) d = tiny;
        d = 1.0 / d;
        double h = d;
        for (int m = 1; m <= 400; ++m) {
            const double m2 = 2.0 * m;
            double num = m * (b_ - m) * x_ / ((a_ + m2 - 1.0) * (a_ + m2));
            d = 1.0 + num * d;
            if (std::abs(d) < tiny) d = tiny;
            c = 1.0 + num / c;
            if (std::abs(c) < tiny) c = tiny;
            d = 1.0 / d;
            h *= d * c;
            num = -(a_ + m) * (a_ + b_ + m) * x_ / ((a_ + m2) * (a_ + m2 + 1.0));
            d = 1.0 + num * d;
            if (std::abs(d) < tiny) d = tiny;
            c = 1.0 + num / c;
            if (std::abs(c) < tiny) c = tiny;
            d = 1.0 / d;
            const double delta = d * c;
            h *= delta;
            if (std::abs(delta - 1.0) < eps) break;
        }
        return h;
    };
    // Use the symmetry relation on the side where the fraction converges fast.
    if (x < (a + 1.0) / (a + b + 2.0)) return std::exp(ln_front) * cf(a, b, x) / a;
    return 1.0 - std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          b * std::log1p(-x) + a * std::log(x)) *
                     cf(b, a, 1.0 - x) / b;
}

// Two-tailed tail probability of Student's t with dof degrees of freedom.
inline double student_t_two_tailed(double t, double dof) {
    return incomplete_beta(0.5 * dof, 0.5, dof / (dof + t * t));
}

} // namespace detail

// SNR = 20 log10(mean / sd) over the mask region, in decibels.
inline double snr_db(const Image& img, const RegionMask& mask) {
    const auto s = detail::region_stats(img, mask);
    if (s.n < 2) throw std::invalid_argument("snr_db: region needs at least 2 pixels");
    if (s.sd == 0.0) throw degenerate_error("snr_db: zero variance in region");
    return 20.0 * std::log10(s.mean / s.sd);
}

// CNR = 20 log10(|mean_A - mean_B| / sd_A) with mask_a the background region
// whose deviation reflects the noise process.
inline double cnr_db(const Image& img, const RegionMask& mask_a, const RegionMask& mask_b) {
    const auto a = detail::region_stats(img, mask_a);
    const auto b = detail::region_stats(img, mask_b);
    if (a.n < 2) throw std::invalid_argument("cnr_db: background region needs >= 2 pixels");
    if (a.sd == 0.0) throw degenerate_error("cnr_db: zero variance in background region");
    if (a.mean == b.mean) throw degenerate_error("cnr_db: zero contrast between regions");
    return 20.0 * std::log10(std::abs(a.mean - b.mean) / a.sd);
}

// 4-neighbour Laplacian with mirror-reflected borders.
inline Image laplacian4(const Image& img) {
    Image out(img.rows, img.cols, img.spacing_mm);
    for (int r = 0; r < img.rows; ++r)
        for (int c = 0; c < img.cols; ++c) {
            const double up = img.at(mirror_index(r - 1, img.rows), c);
            const double down = img.at(mirror_index(r + 1, img.rows), c);
            const double left = img.at(r, mirror_index(c - 1, img.cols));
            const double right = img.at(r, mirror_index(c + 1, img.cols));
            out.at(r, c) = up + down + left + right - 4.0 * img.at(r, c);
        }
    return out;
}

// Edge preservation: normalised correlation of the Laplacians of
// the input and the reconstruction over the mask region, with the
// mask-region means subtracted. 1 means perfect structure retention.
inline double edge_preservation(const Image& v, const Image& g_hat, const RegionMask& mask) {
    if (!v.same_shape(g_hat))
        throw std::invalid_argument("edge_preservation: image dimensions differ");
    if (!mask.same_shape(v))
        throw std::invalid_argument("edge_preservation: mask dimensions differ");
    if (mask.count() < 9)
        throw std::invalid_argument("edge_preservation: mask needs at least 9 pixels");

    const Image lv = laplacian4(v);
    const Image lg = laplacian4(g_hat);
    const auto mv = detail::region_stats(lv, mask);
    const auto mg = detail::region_stats(lg, mask);

    double cross = 0.0, ssv = 0.0, ssg = 0.0;
    for (int r = 0; r < v.rows; ++r)
        for (int c = 0; c < v.cols; ++c)
            if (mask.at(r, c)) {
                const double dv = lv.at(r, c) - mv.mean;
                const double dg = lg.at(r, c) - mg.mean;
                cross += dv * dg;
                ssv += dv * dv;
                ssg += dg * dg;
            }
    if (ssv == 0.0 || ssg == 0.0)
        throw degenerate_error("edge_preservation: zero-variance Laplacian over mask");
    return cross / std::sqrt(ssv * ssg);
}

// Rank sum: total of all scores over evaluators and slices.
inline long long rank_sum(const ScoreMatrix& m) {
    long long total = 0;
    for (int s : m.scores) total += s;
    return total;
}

namespace detail {

// Quartile by linear interpolation between order statistics at position
// q * (n - 1) on the sorted values (0-indexed).
inline double interpolated_quantile(std::vector<double> sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    if (i + 1 >= sorted.size()) return sorted.back();
    return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

} // namespace detail

// F-pseudosigma: IQR / 1.349 with interpolated quartiles.
inline double f_pseudosigma(std::span<const double> values) {
    if (values.size() < 4)
        throw insufficient_data_error("f_pseudosigma: need at least 4 values");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double q1 = detail::interpolated_quantile(sorted, 0.25);
    const double q3 = detail::interpolated_quantile(sorted, 0.75);
    return (q3 - q1) / 1.349;
}

inline double f_pseudosigma(const std::vector<double>& values) {
    return f_pseudosigma(std::span<const double>(values));
}

// Median of a flat score list (average of the two middle order statistics).
inline double median(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("median: empty list");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    return n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

// Two-tailed paired Student t probability that the mean paired difference is
// zero, with n-1 degrees of freedom.
inline double paired_p_value(std::span<const double> values_method,
                             std::span<const double> values_reference) {
    const std::size_t n = values_method.size();
    if (n != values_reference.size() || n < 2)
        throw std::invalid_argument("paired_p_value: need equal-length lists with n >= 2");
    double mean_d = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean_d += values_method[i] - values_reference[i];
    mean_d /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = values_method[i] - values_reference[i] - mean_d;
        ss += d * d;
    }
    if (ss == 0.0) throw degenerate_error("paired_p_value: zero-variance differences");
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    const double t = mean_d / (sd / std::sqrt(static_cast<double>(n)));
    return detail::student_t_two_tailed(t, static_cast<double>(n - 1));
}

inline double paired_p_value(const std::vector<double>& a, const std::vector<double>& b) {
    return paired_p_value(std::span<const double>(a), std::span<const double>(b));
}

} // namespace acer

#endif
