#ifndef ACER_PHANTOM_HPP
#define ACER_PHANTOM_HPP

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "acer/erc.hpp"
#include "acer/error.hpp"
#include "acer/image.hpp"
#include "acer/parallel.hpp"
#include "acer/rician.hpp"
#include "acer/rng.hpp"

namespace acer {

struct Lesion {
    double row = 0.0;
    double col = 0.0;
    double radius_mm = 3.0;
};

// Synthetic prostate phantom: piecewise-constant structures on a uniform
// background gel. Centres are in pixel coordinates, sizes in mm.
struct PhantomSpec {
    int rows = 256;
    int cols = 256;
    double spacing_mm = 0.6;

    double background_level = 100.0;
    double prostate_level = 400.0;
    double lesion_level = 250.0;
    double urethra_level = 150.0;
    double wall_level = 200.0;

    double prostate_row = 140.0, prostate_col = 128.0;
    double prostate_semi_row_mm = 22.0, prostate_semi_col_mm = 25.0;

    std::vector<Lesion> lesions{{130.0, 105.0, 3.5}, {155.0, 150.0, 4.0}, {122.0, 150.0, 2.5}};

    bool urethra_enabled = true;
    double urethra_row = 128.0, urethra_col = 128.0;
    double urethra_radius_mm = 3.5;

    bool wall_enabled = true;
    double wall_row = 220.0;
    double wall_thickness_mm = 5.0;
    double wall_halfwidth_mm = 55.0;

    CoilGeometry coil{CoilKind::segment, 230.0, 98.0, 230.0, 158.0, 0.6};

    void validate() const {
        if (rows < 16 || cols < 16) throw invalid_spec_error("PhantomSpec: grid too small");
        if (!(spacing_mm > 0.0)) throw invalid_spec_error("PhantomSpec: spacing must be > 0");
        for (double level : {background_level, prostate_level, lesion_level, urethra_level,
                             wall_level})
            if (!(level >= 0.0)) throw invalid_spec_error("PhantomSpec: negative intensity level");
        if (!(prostate_semi_row_mm > 0.0 && prostate_semi_col_mm > 0.0))
            throw invalid_spec_error("PhantomSpec: prostate semi-axes must be > 0");
        auto inside_grid = [&](double r, double c) {
            return r >= 0.0 && r <= rows - 1.0 && c >= 0.0 && c <= cols - 1.0;
        };
        if (!inside_grid(prostate_row - prostate_semi_row_mm / spacing_mm, prostate_col) ||
            !inside_grid(prostate_row + prostate_semi_row_mm / spacing_mm, prostate_col) ||
            !inside_grid(prostate_row, prostate_col - prostate_semi_col_mm / spacing_mm) ||
            !inside_grid(prostate_row, prostate_col + prostate_semi_col_mm / spacing_mm))
            throw invalid_spec_error("PhantomSpec: prostate ellipse leaves the grid");
        for (const Lesion& l : lesions) {
            if (!(l.radius_mm > 0.0)) throw invalid_spec_error("PhantomSpec: lesion radius <= 0");
            if (!inside_grid(l.row, l.col))
                throw invalid_spec_error("PhantomSpec: lesion centre outside the grid");
        }
        try {
            coil.validate(rows, cols);
        } catch (const std::invalid_argument& e) {
            throw invalid_spec_error(std::string("PhantomSpec: ") + e.what());
        }
    }
};

namespace detail {

struct PhantomMembership {
    bool prostate = false, lesion = false, urethra = false, wall = false;
};

inline PhantomMembership classify_pixel(const PhantomSpec& spec, int r, int c) {
    PhantomMembership m;
    const double dr = (r - spec.prostate_row) * spec.spacing_mm / spec.prostate_semi_row_mm;
    const double dc = (c - spec.prostate_col) * spec.spacing_mm / spec.prostate_semi_col_mm;
    m.prostate = dr * dr + dc * dc <= 1.0;
    for (const Lesion& l : spec.lesions)
        if (std::hypot((r - l.row) * spec.spacing_mm, (c - l.col) * spec.spacing_mm) <=
            l.radius_mm) {
            m.lesion = true;
            break;
        }
    if (spec.urethra_enabled &&
        std::hypot((r - spec.urethra_row) * spec.spacing_mm,
                   (c - spec.urethra_col) * spec.spacing_mm) <= spec.urethra_radius_mm)
        m.urethra = true;
    if (spec.wall_enabled &&
        std::abs(r - spec.wall_row) * spec.spacing_mm <= 0.5 * spec.wall_thickness_mm &&
        std::abs(c - spec.prostate_col) * spec.spacing_mm <= spec.wall_halfwidth_mm)
        m.wall = true;
    return m;
}

} // namespace detail

// Ground-truth phantom image. Lesions and the urethra must lie inside the
// prostate; the rectal-wall band must not intersect it.
inline Image generate_phantom(const PhantomSpec& spec) {
    spec.validate();
    Image g(spec.rows, spec.cols, spec.spacing_mm, spec.background_level);
    for (int r = 0; r < spec.rows; ++r)
        for (int c = 0; c < spec.cols; ++c) {
            const auto m = detail::classify_pixel(spec, r, c);
            if ((m.lesion || m.urethra) && !m.prostate)
                throw invalid_spec_error(
                    "generate_phantom: lesion/urethra pixel outside the prostate");
            if (m.wall && m.prostate)
                throw invalid_spec_error("generate_phantom: wall band overlaps the prostate");
            if (m.lesion && m.urethra)
                throw invalid_spec_error("generate_phantom: lesion overlaps the urethra");
            double level = spec.background_level;
            if (m.wall) level = spec.wall_level;
            if (m.prostate) level = spec.prostate_level;
            if (m.urethra) level = spec.urethra_level;
            if (m.lesion) level = spec.lesion_level;
            g.at(r, c) = level;
        }
    return g;
}

constexpr std::uint64_t kNoiseSalt = 0x4E01;

// Corrupts a ground-truth image with non-stationary Rician noise,
// V(s) ~ Rice(G(s), Phi(s)). Per-pixel streams derived from the seed keep
// the draw reproducible and schedule-independent.
inline Image apply_nonstationary_rician(const Image& g, const ScaleMap& scale_map,
                                        std::uint64_t seed, int threads = 0) {
    if (!scale_map.values.same_shape(g))
        throw std::invalid_argument(
            "apply_nonstationary_rician: scale map dimensions differ from image");
    Image v(g.rows, g.cols, g.spacing_mm);
    parallel_for(static_cast<std::size_t>(g.rows), threads, [&](std::size_t r) {
        const int row = static_cast<int>(r);
        for (int col = 0; col < g.cols; ++col) {
            SplitMix64 rng = pixel_stream(seed, row, col, kNoiseSalt);
            v.at(row, col) =
                sample_rician(RicianParams{g.at(row, col), scale_map.values.at(row, col)}, rng);
        }
    });
    return v;
}

namespace detail {

// Deterministic search for an all-`level` rectangle of size h x w; among the
// candidates the one whose centre is farthest from (resp. nearest to) the
// reference point wins, scanning row-major on a stride-2 grid.
inline bool find_rectangle(const Image& g, double level, int h, int w, double ref_row,
                           double ref_col, bool farthest, int& best_r, int& best_c) {
    bool found = false;
    double best_score = 0.0;
    for (int r0 = 0; r0 + h <= g.rows; r0 += 2)
        for (int c0 = 0; c0 + w <= g.cols; c0 += 2) {
            bool ok = true;
            for (int r = r0; r < r0 + h && ok; ++r)
                for (int c = c0; c < c0 + w; ++c)
                    if (g.at(r, c) != level) {
                        ok = false;
                        break;
                    }
            if (!ok) continue;
            const double d =
                std::hypot(r0 + 0.5 * h - ref_row, c0 + 0.5 * w - ref_col);
            const double score = farthest ? d : -d;
            if (!found || score > best_score) {
                found = true;
                best_score = score;
                best_r = r0;
                best_c = c0;
            }
        }
    return found;
}

} // namespace detail

// Mask of the whole prostate gland (the ellipse, structures included);
// this is the region edge-preservation is evaluated on.
inline RegionMask prostate_gland_mask(const PhantomSpec& spec) {
    spec.validate();
    RegionMask mask(spec.rows, spec.cols);
    for (int r = 0; r < spec.rows; ++r)
        for (int c = 0; c < spec.cols; ++c)
            if (detail::classify_pixel(spec, r, c).prostate) mask.set(r, c);
    return mask;
}

// Fixed evaluation regions on the phantom: a structure-free background
// rectangle far from the coil and a rectangle inside the prostate clear of
// lesions and the urethra.
inline std::pair<RegionMask, RegionMask> preset_regions(const PhantomSpec& spec) {
    const Image g = generate_phantom(spec);

    const int bg_h = std::max(8, spec.rows / 8);
    const int bg_w = std::max(8, spec.cols / 4);
    const double coil_row = 0.5 * (spec.coil.p0_row + spec.coil.p1_row);
    const double coil_col = 0.5 * (spec.coil.p0_col + spec.coil.p1_col);
    int br = 0, bc = 0;
    if (!detail::find_rectangle(g, spec.background_level, bg_h, bg_w, coil_row, coil_col, true,
                                br, bc))
        throw invalid_spec_error("preset_regions: no room for the background region");

    const int pr_h = std::max(6, spec.rows / 16);
    const int pr_w = std::max(6, spec.cols / 16);
    int pr = 0, pc = 0;
    if (!detail::find_rectangle(g, spec.prostate_level, pr_h, pr_w, spec.prostate_row,
                                spec.prostate_col, false, pr, pc))
        throw invalid_spec_error("preset_regions: no room for the prostate region");

    RegionMask background(spec.rows, spec.cols);
    for (int r = br; r < br + bg_h; ++r)
        for (int c = bc; c < bc + bg_w; ++c) background.set(r, c);
    RegionMask prostate(spec.rows, spec.cols);
    for (int r = pr; r < pr + pr_h; ++r)
        for (int c = pc; c < pc + pr_w; ++c) prostate.set(r, c);
    return {std::move(background), std::move(prostate)};
}

} // namespace acer

#endif
