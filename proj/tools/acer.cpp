#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "acer/acer.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "key=value configuration file");
    cmd->add_option("--seed", o.seed, "random seed (overrides the config)");
    cmd->add_option("--threads", o.threads, "worker threads (0 = hardware)");
}

acer::RunConfig load_config(const CommonOpts& o) {
    acer::RunConfig cfg;
    if (!o.config_path.empty()) cfg = acer::parse_config_file(o.config_path);
    if (o.seed) {
        cfg.seed = *o.seed;
        cfg.sampler.seed = *o.seed;
    }
    return cfg;
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

ordered_json echo_json(const acer::RunConfig& cfg) {
    ordered_json j = ordered_json::object();
    for (const auto& [k, v] : acer::config_echo(cfg)) j[k] = v;
    return j;
}

void emit_json(const ordered_json& j, const std::string& out_path) {
    const std::string text = j.dump(2) + "\n";
    if (out_path.empty() || out_path == "-") {
        std::cout << text;
    } else {
        std::ofstream out(out_path, std::ios::trunc);
        if (!out) throw acer::parse_error("cannot open output file: " + out_path);
        out << text;
    }
}

acer::RegionMask rect_mask(const acer::RegionRect& r, int rows, int cols) {
    if (r.row0 < 0 || r.col0 < 0 || r.row0 + r.rows > rows || r.col0 + r.cols > cols)
        throw std::invalid_argument("region rectangle leaves the image grid");
    acer::RegionMask mask(rows, cols);
    for (int i = r.row0; i < r.row0 + r.rows; ++i)
        for (int j = r.col0; j < r.col0 + r.cols; ++j) mask.set(i, j);
    return mask;
}

int run_phantom(const CommonOpts& opts, const std::string& out_dir) {
    acer::RunConfig cfg = load_config(opts);
    acer::PhantomSpec spec = cfg.phantom;
    spec.coil.spacing_mm = spec.spacing_mm;

    const acer::Image g = acer::generate_phantom(spec);
    const acer::Image dmap = acer::distance_map(spec.coil, spec.rows, spec.cols);
    const acer::ScaleMap smap = acer::scale_map_from_profile(dmap, cfg.profile, cfg.sigma0);
    const acer::Image v = acer::apply_nonstationary_rician(g, smap, cfg.seed, opts.threads);

    acer::RegionMask background, prostate;
    if (cfg.background_region && cfg.prostate_region) {
        background = rect_mask(*cfg.background_region, spec.rows, spec.cols);
        prostate = rect_mask(*cfg.prostate_region, spec.rows, spec.cols);
    } else {
        auto masks = acer::preset_regions(spec);
        background = std::move(masks.first);
        prostate = std::move(masks.second);
    }

    fs::create_directories(out_dir.empty() ? "." : out_dir);
    const fs::path dir(out_dir.empty() ? "." : out_dir);
    acer::write_image((dir / "ground_truth.f32").string(), g);
    acer::write_image((dir / "observed.f32").string(), v);
    acer::write_image((dir / "scale_map.f32").string(), smap.values);
    acer::write_mask((dir / "mask_background.pgm").string(), background);
    acer::write_mask((dir / "mask_prostate.pgm").string(), prostate);
    std::cout << "phantom: wrote ground_truth.f32 observed.f32 scale_map.f32 "
                 "mask_background.pgm mask_prostate.pgm under "
              << dir.string() << "\n";
    return 0;
}

int run_denoise(const CommonOpts& opts, const std::string& input, const std::string& map_path,
                const std::string& out_path) {
    const auto t0 = std::chrono::steady_clock::now();
    acer::RunConfig cfg = load_config(opts);
    const acer::Image img = acer::read_image(input);

    acer::ScaleMap smap;
    if (!map_path.empty()) {
        smap.values = acer::read_image(map_path);
        if (!smap.values.same_shape(img))
            throw std::invalid_argument("scale map dimensions differ from the input image");
        for (double p : smap.values.data)
            if (!(p > 0.0))
                throw std::invalid_argument("scale map must be strictly positive");
        smap.sigma0 = 0.0; // unknown for precomputed maps
    } else {
        acer::CoilGeometry coil = cfg.coil();
        coil.spacing_mm = img.spacing_mm;
        const acer::Image dmap = acer::distance_map(coil, img.rows, img.cols);
        smap = acer::fit_scale_map(img, dmap, cfg.profile, cfg.scalefit_window_radius,
                                   cfg.scalefit_stride, opts.threads);
        std::fprintf(stderr, "denoise: fitted sigma0 = %.6g\n", smap.sigma0);
    }

    const int report_every = std::max(1, img.rows / 10);
    const acer::Image out = acer::reconstruct(
        img, smap, cfg.sampler, opts.threads, [&](int done, int total) {
            if (done % report_every == 0 || done == total)
                std::fprintf(stderr, "denoise: %d/%d rows\n", done, total);
        });
    acer::write_image(out_path, out);
    std::fprintf(stderr, "denoise: wrote %s (%.1f ms)\n", out_path.c_str(), elapsed_ms(t0));
    return 0;
}

int run_metrics(const CommonOpts& opts, const std::string& image_path,
                const std::string& background_path, const std::string& signal_path,
                const std::string& reference_path, const std::string& out_path) {
    const auto t0 = std::chrono::steady_clock::now();
    acer::RunConfig cfg = load_config(opts);
    const acer::Image img = acer::read_image(image_path);
    const acer::RegionMask background = acer::read_mask(background_path);

    ordered_json metrics = ordered_json::object();
    metrics["snr_background_db"] = acer::round_sig10(acer::snr_db(img, background));
    if (!signal_path.empty()) {
        const acer::RegionMask signal = acer::read_mask(signal_path);
        metrics["snr_signal_db"] = acer::round_sig10(acer::snr_db(img, signal));
        metrics["cnr_db"] = acer::round_sig10(acer::cnr_db(img, background, signal));
        if (!reference_path.empty()) {
            const acer::Image ref = acer::read_image(reference_path);
            metrics["edge_preservation"] =
                acer::round_sig10(acer::edge_preservation(ref, img, signal));
        }
    } else if (!reference_path.empty()) {
        throw std::invalid_argument("--reference requires --signal for the EP region");
    }

    ordered_json j = ordered_json::object();
    ordered_json inputs = ordered_json::object();
    inputs["image"] = image_path;
    inputs["background_mask"] = background_path;
    if (!signal_path.empty()) inputs["signal_mask"] = signal_path;
    if (!reference_path.empty()) inputs["reference"] = reference_path;
    j["inputs"] = inputs;
    j["config_echo"] = echo_json(cfg);
    j["metrics"] = metrics;
    j["timings_ms"] = {{"total", acer::round_sig10(elapsed_ms(t0))}};
    emit_json(j, out_path);
    return 0;
}

int run_scores(const CommonOpts& opts, const std::string& csv_path,
               const std::string& out_path) {
    const auto t0 = std::chrono::steady_clock::now();
    acer::RunConfig cfg = load_config(opts);
    const auto rows = acer::read_csv(csv_path);
    const int n_eval = static_cast<int>(rows.size());
    const int n_slice = static_cast<int>(rows.front().size());
    std::vector<int> scores;
    std::vector<double> flat;
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != n_slice)
            throw acer::parse_error("scores: ragged CSV rows");
        for (double v : row) {
            scores.push_back(static_cast<int>(v));
            flat.push_back(v);
        }
    }
    const acer::ScoreMatrix m(n_eval, n_slice, scores);

    ordered_json j = ordered_json::object();
    j["inputs"] = {{"scores", csv_path}};
    j["config_echo"] = echo_json(cfg);
    ordered_json metrics = ordered_json::object();
    metrics["evaluators"] = n_eval;
    metrics["slices"] = n_slice;
    metrics["rank_sum"] = acer::rank_sum(m);
    metrics["median"] = acer::round_sig10(acer::median(flat));
    metrics["f_pseudosigma"] = acer::round_sig10(acer::f_pseudosigma(flat));
    j["metrics"] = metrics;
    j["timings_ms"] = {{"total", acer::round_sig10(elapsed_ms(t0))}};
    emit_json(j, out_path);
    return 0;
}

int run_ttest(const CommonOpts& opts, const std::string& csv_path, int col_a, int col_b,
              const std::string& out_path) {
    const auto t0 = std::chrono::steady_clock::now();
    acer::RunConfig cfg = load_config(opts);
    const auto rows = acer::read_csv(csv_path);
    const auto a = acer::csv_column(rows, static_cast<std::size_t>(col_a));
    const auto b = acer::csv_column(rows, static_cast<std::size_t>(col_b));
    double mean_diff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) mean_diff += a[i] - b[i];
    mean_diff /= static_cast<double>(a.size());

    ordered_json j = ordered_json::object();
    j["inputs"] = {{"csv", csv_path}, {"col_a", col_a}, {"col_b", col_b}};
    j["config_echo"] = echo_json(cfg);
    ordered_json metrics = ordered_json::object();
    metrics["n"] = a.size();
    metrics["mean_difference"] = acer::round_sig10(mean_diff);
    metrics["p_value"] = acer::round_sig10(acer::paired_p_value(a, b));
    j["metrics"] = metrics;
    j["timings_ms"] = {{"total", acer::round_sig10(elapsed_ms(t0))}};
    emit_json(j, out_path);
    return 0;
}

int run_profile(const CommonOpts& opts, double max_mm, double step_mm,
                const std::string& out_path) {
    acer::RunConfig cfg = load_config(opts);
    if (!(step_mm > 0.0) || !(max_mm >= 0.0))
        throw std::invalid_argument("profile: --max-mm and --step-mm must be positive");
    std::string csv = "distance_mm,gain\n";
    char line[80];
    for (double d = 0.0; d <= max_mm + 1e-9; d += step_mm) {
        std::snprintf(line, sizeof(line), "%.10g,%.10g\n", d, acer::snr_gain(cfg.profile, d));
        csv += line;
    }
    if (out_path.empty() || out_path == "-") {
        std::cout << csv;
    } else {
        std::ofstream out(out_path, std::ios::trunc);
        if (!out) throw acer::parse_error("cannot open output file: " + out_path);
        out << csv;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ACER: Monte Carlo noise compensation for coil intensity corrected "
                 "endorectal MRI"};
    app.require_subcommand(1);

    CommonOpts phantom_opts;
    std::string phantom_out = ".";
    auto* phantom = app.add_subcommand("phantom",
                                       "generate a synthetic phantom: ground truth, noisy "
                                       "observation, scale map and evaluation masks");
    add_common(phantom, phantom_opts);
    phantom->add_option("--out", phantom_out, "output directory");

    CommonOpts denoise_opts;
    std::string denoise_in, denoise_map, denoise_out = "denoised.f32";
    auto* denoise =
        app.add_subcommand("denoise", "reconstruct a noise-compensated image");
    add_common(denoise, denoise_opts);
    denoise->add_option("input", denoise_in, "input image (.pgm or raw .f32)")->required();
    denoise->add_option("--scale-map", denoise_map,
                        "precomputed scale map image (skips the profile fit)");
    denoise->add_option("--out", denoise_out, "output image path");

    CommonOpts metrics_opts;
    std::string metrics_img, metrics_bg, metrics_signal, metrics_ref, metrics_out;
    auto* metrics = app.add_subcommand("metrics", "SNR/CNR/EP report for an image");
    add_common(metrics, metrics_opts);
    metrics->add_option("image", metrics_img, "image to evaluate")->required();
    metrics->add_option("--background", metrics_bg, "background region mask (8-bit PGM)")
        ->required();
    metrics->add_option("--signal", metrics_signal, "signal region mask (8-bit PGM)");
    metrics->add_option("--reference", metrics_ref,
                        "reference image for edge preservation over the signal mask");
    metrics->add_option("--out", metrics_out, "report path (default: stdout)");

    CommonOpts scores_opts;
    std::string scores_csv, scores_out;
    auto* scores = app.add_subcommand(
        "scores", "aggregate subjective scores: rank sum, median, F-pseudosigma");
    add_common(scores, scores_opts);
    scores->add_option("csv", scores_csv, "score matrix CSV, rows = evaluators")->required();
    scores->add_option("--out", scores_out, "report path (default: stdout)");

    CommonOpts ttest_opts;
    std::string ttest_csv, ttest_out;
    int ttest_col_a = 0, ttest_col_b = 1;
    auto* ttest =
        app.add_subcommand("ttest", "two-tailed paired t-test between two CSV columns");
    add_common(ttest, ttest_opts);
    ttest->add_option("csv", ttest_csv, "numeric CSV")->required();
    ttest->add_option("--col-a", ttest_col_a, "0-based column of the method values");
    ttest->add_option("--col-b", ttest_col_b, "0-based column of the reference values");
    ttest->add_option("--out", ttest_out, "report path (default: stdout)");

    CommonOpts profile_opts;
    std::string profile_out;
    double profile_max = 120.0, profile_step = 1.0;
    auto* profile = app.add_subcommand("profile", "emit the gamma(d) SNR gain table as CSV");
    add_common(profile, profile_opts);
    profile->add_option("--max-mm", profile_max, "last distance to tabulate");
    profile->add_option("--step-mm", profile_step, "distance step");
    profile->add_option("--out", profile_out, "CSV path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (phantom->parsed()) return run_phantom(phantom_opts, phantom_out);
        if (denoise->parsed())
            return run_denoise(denoise_opts, denoise_in, denoise_map, denoise_out);
        if (metrics->parsed())
            return run_metrics(metrics_opts, metrics_img, metrics_bg, metrics_signal,
                               metrics_ref, metrics_out);
        if (scores->parsed()) return run_scores(scores_opts, scores_csv, scores_out);
        if (ttest->parsed())
            return run_ttest(ttest_opts, ttest_csv, ttest_col_a, ttest_col_b, ttest_out);
        if (profile->parsed())
            return run_profile(profile_opts, profile_max, profile_step, profile_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
