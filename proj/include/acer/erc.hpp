#ifndef ACER_ERC_HPP
#define ACER_ERC_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "acer/error.hpp"
#include "acer/image.hpp"
#include "acer/parallel.hpp"
#include "acer/rician.hpp"

namespace acer {

enum class CoilKind { point, segment };

// Position of the endorectal coil in image coordinates. A point coil or a
// straight segment between p0 and p1; coordinates may be fractional.
struct CoilGeometry {
    CoilKind kind = CoilKind::point;
    double p0_row = 0.0, p0_col = 0.0;
    double p1_row = 0.0, p1_col = 0.0;
    double spacing_mm = 1.0;

    void validate(int rows, int cols) const {
        if (!(spacing_mm > 0.0))
            throw std::invalid_argument("CoilGeometry: spacing_mm must be > 0");
        auto in_grid = [&](double r, double c) {
            return r >= 0.0 && r <= rows - 1.0 && c >= 0.0 && c <= cols - 1.0;
        };
        if (!in_grid(p0_row, p0_col))
            throw std::invalid_argument("CoilGeometry: p0 lies outside the image grid");
        if (kind == CoilKind::segment && !in_grid(p1_row, p1_col))
            throw std::invalid_argument("CoilGeometry: p1 lies outside the image grid");
    }
};

// Parametric SNR gain versus distance from the coil surface:
// gamma(d) = 1 + (surface_gain - 1) exp(-d / decay_length) up to the cutoff,
// then an abrupt drop to post_cutoff_gain.
struct ErcSnrProfile {
    double surface_gain = 5.0;
    double decay_length_mm = 20.0;
    double cutoff_mm = 60.0;
    double post_cutoff_gain = 0.5;

    void validate() const {
        if (!(surface_gain >= 1.0))
            throw std::invalid_argument("ErcSnrProfile: surface_gain must be >= 1");
        if (!(decay_length_mm > 0.0))
            throw std::invalid_argument("ErcSnrProfile: decay_length_mm must be > 0");
        if (!(cutoff_mm > 0.0))
            throw std::invalid_argument("ErcSnrProfile: cutoff_mm must be > 0");
        if (!(post_cutoff_gain > 0.0 && post_cutoff_gain <= 1.0))
            throw std::invalid_argument("ErcSnrProfile: post_cutoff_gain must be in (0, 1]");
    }

    static ErcSnrProfile rigid() { return {5.0, 20.0, 60.0, 0.5}; }
    static ErcSnrProfile inflatable() { return {2.0, 25.0, 60.0, 0.5}; }
};

inline double snr_gain(const ErcSnrProfile& profile, double d_mm) {
    profile.validate();
    if (!(d_mm >= 0.0) || !std::isfinite(d_mm))
        throw std::invalid_argument("snr_gain: distance must be finite and >= 0");
    if (d_mm > profile.cutoff_mm) return profile.post_cutoff_gain;
    return 1.0 + (profile.surface_gain - 1.0) * std::exp(-d_mm / profile.decay_length_mm);
}

// Spatially-varying Rician scale Phi(s) on the image grid, plus the fitted
// base scale sigma0 such that Phi(s) = sigma0 / gamma(d(s)).
struct ScaleMap {
    Image values;
    double sigma0 = 0.0;
};

namespace detail {

inline double point_segment_distance(double pr, double pc, const CoilGeometry& g) {
    if (g.kind == CoilKind::point) return std::hypot(pr - g.p0_row, pc - g.p0_col);
    const double vr = g.p1_row - g.p0_row, vc = g.p1_col - g.p0_col;
    const double wr = pr - g.p0_row, wc = pc - g.p0_col;
    const double len2 = vr * vr + vc * vc;
    double t = len2 > 0.0 ? (wr * vr + wc * vc) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(wr - t * vr, wc - t * vc);
}

} // namespace detail

// Per-pixel Euclidean distance (mm) from the pixel centre to the coil.
inline Image distance_map(const CoilGeometry& geom, int rows, int cols) {
    geom.validate(rows, cols);
    Image out(rows, cols, geom.spacing_mm);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            out.at(r, c) =
                geom.spacing_mm * detail::point_segment_distance(r, c, geom);
    return out;
}

// Builds Phi(s) = sigma0 / gamma(d(s)) over a distance map.
inline ScaleMap scale_map_from_profile(const Image& dmap, const ErcSnrProfile& profile,
                                       double sigma0) {
    profile.validate();
    if (!(sigma0 > 0.0))
        throw std::invalid_argument("scale_map_from_profile: sigma0 must be > 0");
    ScaleMap map;
    map.sigma0 = sigma0;
    map.values = Image(dmap.rows, dmap.cols, dmap.spacing_mm);
    for (int r = 0; r < dmap.rows; ++r)
        for (int c = 0; c < dmap.cols; ++c)
            map.values.at(r, c) = sigma0 / snr_gain(profile, dmap.at(r, c));
    return map;
}

// Fits the non-stationary scale map from the image itself. Local Rician ML
// fits over sliding windows on a subsampled grid give scale estimates
// Phi_i at distances d_i; windows that come back signal-dominated
// (nu > 2 phi) are dropped, and sigma0 is the least-squares solution of
// Phi_i ~ sigma0 / gamma(d_i). The regression is reduced in window-index
// order so the result does not depend on scheduling.
inline ScaleMap fit_scale_map(const Image& image, const Image& dmap,
                              const ErcSnrProfile& profile, int window_radius,
                              int stride = 4, int threads = 0) {
    profile.validate();
    if (!image.same_shape(dmap))
        throw std::invalid_argument("fit_scale_map: image and distance map dimensions differ");
    if (window_radius < 2)
        throw std::invalid_argument("fit_scale_map: window_radius must be >= 2");
    if (stride < 1) throw std::invalid_argument("fit_scale_map: stride must be >= 1");

    if (*std::max_element(image.data.begin(), image.data.end()) <= 0.0)
        throw insufficient_data_error("fit_scale_map: image is identically zero");

    std::vector<std::pair<int, int>> centers;
    for (int r = window_radius; r + window_radius < image.rows; r += stride)
        for (int c = window_radius; c + window_radius < image.cols; c += stride)
            centers.emplace_back(r, c);

    struct WindowFit {
        double phi = 0.0;
        double gain = 0.0;
        bool usable = false;
    };
    std::vector<WindowFit> fits(centers.size());

    parallel_for(centers.size(), threads, [&](std::size_t i) {
        const auto [r, c] = centers[i];
        std::vector<double> xs;
        xs.reserve(static_cast<std::size_t>(2 * window_radius + 1) * (2 * window_radius + 1));
        for (int dr = -window_radius; dr <= window_radius; ++dr)
            for (int dc = -window_radius; dc <= window_radius; ++dc) {
                const double v = image.at(r + dr, c + dc);
                if (v > 0.0) xs.push_back(v);
            }
        if (xs.size() < 8) return;
        const RicianParams p = fit_rician_ml(xs);
        if (p.nu > 2.0 * p.phi) return; // signal-dominated window
        fits[i] = {p.phi, snr_gain(profile, dmap.at(r, c)), true};
    });

    // sigma0 = argmin sum_i (phi_i - sigma0 / gamma_i)^2, fixed index order.
    double num = 0.0, den = 0.0;
    std::size_t usable = 0;
    for (const WindowFit& f : fits) {
        if (!f.usable) continue;
        ++usable;
        const double b = 1.0 / f.gain;
        num += f.phi * b;
        den += b * b;
    }
    if (usable < 10)
        throw insufficient_data_error("fit_scale_map: fewer than 10 usable noise windows");
    const double sigma0 = num / den;
    if (!(sigma0 > 0.0))
        throw insufficient_data_error("fit_scale_map: non-positive sigma0 estimate");
    return scale_map_from_profile(dmap, profile, sigma0);
}

} // namespace acer

#endif
