#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "acer/erc.hpp"
#include "acer/phantom.hpp"

using acer::ErcSnrProfile;
using acer::Image;
using acer::PhantomSpec;
using acer::RegionMask;
using acer::ScaleMap;

namespace {

ScaleMap default_scale_map(const PhantomSpec& spec, double sigma0) {
    acer::CoilGeometry coil = spec.coil;
    coil.spacing_mm = spec.spacing_mm;
    const Image dmap = acer::distance_map(coil, spec.rows, spec.cols);
    return acer::scale_map_from_profile(dmap, ErcSnrProfile::rigid(), sigma0);
}

} // namespace

TEST_CASE("generate_phantom default preset has exactly the five levels", "[phantom]") {
    const PhantomSpec spec;
    const Image g = acer::generate_phantom(spec);
    std::set<double> levels(g.data.begin(), g.data.end());
    const std::set<double> want{spec.background_level, spec.wall_level, spec.prostate_level,
                                spec.urethra_level, spec.lesion_level};
    CHECK(levels == want);
}

TEST_CASE("generate_phantom lesions are hypointense to the prostate", "[phantom]") {
    const PhantomSpec spec;
    const Image g = acer::generate_phantom(spec);
    CHECK(spec.lesion_level < spec.prostate_level);
    std::size_t lesion_pixels = 0;
    for (double v : g.data)
        if (v == spec.lesion_level) ++lesion_pixels;
    CHECK(lesion_pixels > 0);
}

TEST_CASE("generate_phantom with no lesions and disabled extras is two-level", "[phantom]") {
    PhantomSpec spec;
    spec.lesions.clear();
    spec.urethra_enabled = false;
    spec.wall_enabled = false;
    const Image g = acer::generate_phantom(spec);
    std::set<double> levels(g.data.begin(), g.data.end());
    CHECK(levels == std::set<double>{spec.background_level, spec.prostate_level});
}

TEST_CASE("generate_phantom rejects structures outside the prostate", "[phantom]") {
    PhantomSpec spec;
    spec.lesions = {{30.0, 30.0, 4.0}}; // far from the ellipse
    CHECK_THROWS_AS(acer::generate_phantom(spec), acer::invalid_spec_error);

    PhantomSpec wall_overlap;
    wall_overlap.wall_row = wall_overlap.prostate_row; // band through the gland
    CHECK_THROWS_AS(acer::generate_phantom(wall_overlap), acer::invalid_spec_error);

    PhantomSpec urethra_out;
    urethra_out.urethra_row = 20.0;
    urethra_out.urethra_col = 20.0;
    CHECK_THROWS_AS(acer::generate_phantom(urethra_out), acer::invalid_spec_error);
}

TEST_CASE("preset_regions are disjoint and structure-free", "[phantom]") {
    const PhantomSpec spec;
    const Image g = acer::generate_phantom(spec);
    const auto [background, prostate] = acer::preset_regions(spec);

    REQUIRE(background.count() > 0);
    REQUIRE(prostate.count() > 0);
    for (int r = 0; r < spec.rows; ++r)
        for (int c = 0; c < spec.cols; ++c) {
            CHECK_FALSE((background.at(r, c) && prostate.at(r, c)));
            if (background.at(r, c)) CHECK(g.at(r, c) == spec.background_level);
            if (prostate.at(r, c)) CHECK(g.at(r, c) == spec.prostate_level);
        }
}

TEST_CASE("preset_regions fails when the grid has no room", "[phantom]") {
    PhantomSpec spec;
    spec.rows = 40;
    spec.cols = 40;
    spec.spacing_mm = 0.6;
    spec.prostate_row = 20;
    spec.prostate_col = 20;
    spec.prostate_semi_row_mm = 11.0;
    spec.prostate_semi_col_mm = 11.0;
    spec.lesions.clear();
    spec.urethra_enabled = false;
    spec.wall_enabled = false;
    spec.coil = {acer::CoilKind::point, 38.0, 20.0, 0.0, 0.0, 0.6};
    CHECK_THROWS_AS(acer::preset_regions(spec), acer::invalid_spec_error);
}

TEST_CASE("prostate_gland_mask covers the ellipse including structures", "[phantom]") {
    const PhantomSpec spec;
    const Image g = acer::generate_phantom(spec);
    const RegionMask gland = acer::prostate_gland_mask(spec);
    std::size_t structures = 0;
    for (int r = 0; r < spec.rows; ++r)
        for (int c = 0; c < spec.cols; ++c)
            if (gland.at(r, c)) {
                const double v = g.at(r, c);
                CHECK((v == spec.prostate_level || v == spec.lesion_level ||
                       v == spec.urethra_level));
                if (v != spec.prostate_level) ++structures;
            }
    CHECK(structures > 0);
}

TEST_CASE("apply_nonstationary_rician noiseless limit and reproducibility", "[phantom]") {
    PhantomSpec spec;
    spec.rows = 64;
    spec.cols = 64;
    spec.prostate_row = 32;
    spec.prostate_col = 32;
    spec.prostate_semi_row_mm = 10.0;
    spec.prostate_semi_col_mm = 10.0;
    spec.lesions.clear();
    spec.urethra_enabled = false;
    spec.wall_enabled = false;
    spec.coil = {acer::CoilKind::point, 60.0, 32.0, 0.0, 0.0, 0.6};
    const Image g = acer::generate_phantom(spec);

    ScaleMap tiny;
    tiny.sigma0 = 1e-12;
    tiny.values = Image(spec.rows, spec.cols, spec.spacing_mm, 1e-12);
    const Image v = acer::apply_nonstationary_rician(g, tiny, 1, 2);
    for (std::size_t i = 0; i < g.size(); ++i)
        CHECK_THAT(v.data[i], Catch::Matchers::WithinAbs(g.data[i], 1e-9));

    const ScaleMap map = default_scale_map(spec, 4.0);
    const Image a = acer::apply_nonstationary_rician(g, map, 9, 1);
    const Image b = acer::apply_nonstationary_rician(g, map, 9, 4);
    CHECK(a.data == b.data);
    CHECK(a.data != g.data);
    for (double x : a.data) CHECK(x >= 0.0);

    ScaleMap wrong;
    wrong.sigma0 = 1.0;
    wrong.values = Image(10, 10, 1.0, 1.0);
    CHECK_THROWS_AS(acer::apply_nonstationary_rician(g, wrong, 1), std::invalid_argument);
}

TEST_CASE("apply_nonstationary_rician matches the Rician mean", "[phantom]") {
    const Image g(128, 128, 1.0, 50.0);
    ScaleMap map;
    map.sigma0 = 5.0;
    map.values = Image(128, 128, 1.0, 5.0);
    const Image v = acer::apply_nonstationary_rician(g, map, 3, 2);

    // analytic mean of Rice(50, 5) via quadrature of x f(x)
    double mean = 0.0;
    const double h = 100.0 / 20000;
    for (int i = 1; i <= 20000; ++i) {
        const double x = i * h;
        mean += h * x * std::exp(acer::rician_log_pdf(x, acer::RicianParams{50.0, 5.0}));
    }
    double sample_mean = 0.0;
    for (double x : v.data) sample_mean += x;
    sample_mean /= static_cast<double>(v.size());
    CHECK_THAT(sample_mean / mean, Catch::Matchers::WithinAbs(1.0, 0.005));
}

TEST_CASE("apply_nonstationary_rician second moment", "[phantom]") {
    // E[V^2] = G^2 + 2 Phi^2 at fixed (G, Phi) over many draws
    const double G = 50.0, phi = 5.0;
    const Image g(1000, 1000, 1.0, G);
    ScaleMap map;
    map.sigma0 = phi;
    map.values = Image(1000, 1000, 1.0, phi);
    const Image v = acer::apply_nonstationary_rician(g, map, 17, 2);
    double m2 = 0.0;
    for (double x : v.data) m2 += x * x;
    m2 /= static_cast<double>(v.size());
    CHECK_THAT(m2 / (G * G + 2.0 * phi * phi), Catch::Matchers::WithinAbs(1.0, 0.01));
}

TEST_CASE("noise scale tracks the profile ratio across distance", "[phantom]") {
    // windowed sd on a pure-noise image: far-coil noise exceeds near-coil
    // noise by the gamma ratio
    const int n = 160;
    acer::CoilGeometry coil{acer::CoilKind::segment, n - 2.0, n * 0.3, n - 2.0, n * 0.7, 0.6};
    const Image dmap = acer::distance_map(coil, n, n);
    const ErcSnrProfile profile = ErcSnrProfile::rigid();
    const ScaleMap map = acer::scale_map_from_profile(dmap, profile, 6.0);
    const Image zero(n, n, 0.6, 0.0);
    const Image v = acer::apply_nonstationary_rician(zero, map, 5, 2);

    auto window_sd = [&](int r0, int c0, int half) {
        double mean = 0.0;
        int count = 0;
        for (int r = r0 - half; r <= r0 + half; ++r)
            for (int c = c0 - half; c <= c0 + half; ++c) {
                mean += v.at(r, c);
                ++count;
            }
        mean /= count;
        double ss = 0.0;
        for (int r = r0 - half; r <= r0 + half; ++r)
            for (int c = c0 - half; c <= c0 + half; ++c)
                ss += (v.at(r, c) - mean) * (v.at(r, c) - mean);
        return std::sqrt(ss / (count - 1));
    };

    const int near_r = n - 22, far_r = 16, c0 = n / 2, half = 12;
    const double ratio = window_sd(far_r, c0, half) / window_sd(near_r, c0, half);
    const double gamma_ratio =
        acer::snr_gain(profile, dmap.at(near_r, c0)) / acer::snr_gain(profile, dmap.at(far_r, c0));
    CHECK_THAT(ratio / gamma_ratio, Catch::Matchers::WithinAbs(1.0, 0.15));
}
