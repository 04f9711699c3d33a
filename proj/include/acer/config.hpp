#ifndef ACER_CONFIG_HPP
#define ACER_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "acer/erc.hpp"
#include "acer/error.hpp"
#include "acer/io.hpp"
#include "acer/phantom.hpp"
#include "acer/sampler.hpp"

namespace acer {

struct RegionRect {
    int row0 = 0, col0 = 0, rows = 0, cols = 0;
};

// Resolved run settings. Every field has a working default; the key=value
// config overrides them and rejects unknown keys.
struct RunConfig {
    std::string profile_preset = "rigid";
    ErcSnrProfile profile = ErcSnrProfile::rigid();
    PhantomSpec phantom;
    SamplerConfig sampler;
    double sigma0 = 9.0; // base noise scale used by the phantom generator
    int scalefit_window_radius = 4;
    int scalefit_stride = 4;
    std::uint64_t seed = 1;
    std::optional<RegionRect> background_region;
    std::optional<RegionRect> prostate_region;

    // The coil lives in PhantomSpec so the phantom and the scale-map fit
    // share one geometry.
    CoilGeometry& coil() { return phantom.coil; }
    const CoilGeometry& coil() const { return phantom.coil; }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && (s[a] == ' ' || s[a] == '\t')) ++a;
    while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
    return s.substr(a, b - a);
}

inline double parse_double(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0')
        throw parse_error("config: key '" + key + "' expects a number, got '" + value + "'");
    return v;
}

inline long parse_long(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const long v = std::strtol(value.c_str(), &end, 10);
    if (end == value.c_str() || *end != '\0')
        throw parse_error("config: key '" + key + "' expects an integer, got '" + value + "'");
    return v;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
    if (end == value.c_str() || *end != '\0')
        throw parse_error("config: key '" + key + "' expects an unsigned integer");
    return static_cast<std::uint64_t>(v);
}

inline bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "on" || value == "true" || value == "1") return true;
    if (value == "off" || value == "false" || value == "0") return false;
    throw parse_error("config: key '" + key + "' expects on/off");
}

// "r,c,rad;r,c,rad;..." -> lesion list; an empty value clears the list.
inline std::vector<Lesion> parse_lesions(const std::string& key, const std::string& value) {
    std::vector<Lesion> lesions;
    if (trim(value).empty()) return lesions;
    std::size_t pos = 0;
    while (pos <= value.size()) {
        std::size_t semi = value.find(';', pos);
        if (semi == std::string::npos) semi = value.size();
        const std::string item = trim(value.substr(pos, semi - pos));
        if (!item.empty()) {
            Lesion l;
            char trailing = '\0';
            if (std::sscanf(item.c_str(), "%lf , %lf , %lf %c", &l.row, &l.col, &l.radius_mm,
                            &trailing) != 3)
                throw parse_error("config: key '" + key + "' expects 'row,col,radius_mm;...'");
            lesions.push_back(l);
        }
        if (semi == value.size()) break;
        pos = semi + 1;
    }
    return lesions;
}

inline RegionRect parse_rect(const std::string& key, const std::string& value) {
    RegionRect r;
    char trailing = '\0';
    if (std::sscanf(value.c_str(), "%d , %d , %d , %d %c", &r.row0, &r.col0, &r.rows, &r.cols,
                    &trailing) != 4 ||
        r.rows <= 0 || r.cols <= 0)
        throw parse_error("config: key '" + key + "' expects 'row0,col0,rows,cols'");
    return r;
}

inline void apply_config_key(RunConfig& cfg, const std::string& key, const std::string& value) {
    auto& ph = cfg.phantom;
    if (key == "profile.preset") {
        if (value == "rigid")
            cfg.profile = ErcSnrProfile::rigid();
        else if (value == "inflatable")
            cfg.profile = ErcSnrProfile::inflatable();
        else
            throw parse_error("config: unknown profile preset '" + value + "'");
        cfg.profile_preset = value;
    } else if (key == "profile.surface_gain")
        cfg.profile.surface_gain = parse_double(key, value);
    else if (key == "profile.decay_length_mm")
        cfg.profile.decay_length_mm = parse_double(key, value);
    else if (key == "profile.cutoff_mm")
        cfg.profile.cutoff_mm = parse_double(key, value);
    else if (key == "profile.post_cutoff_gain")
        cfg.profile.post_cutoff_gain = parse_double(key, value);
    else if (key == "coil.kind") {
        if (value == "point")
            ph.coil.kind = CoilKind::point;
        else if (value == "segment")
            ph.coil.kind = CoilKind::segment;
        else
            throw parse_error("config: coil.kind must be point or segment");
    } else if (key == "coil.p0_row")
        ph.coil.p0_row = parse_double(key, value);
    else if (key == "coil.p0_col")
        ph.coil.p0_col = parse_double(key, value);
    else if (key == "coil.p1_row")
        ph.coil.p1_row = parse_double(key, value);
    else if (key == "coil.p1_col")
        ph.coil.p1_col = parse_double(key, value);
    else if (key == "sampler.search_radius")
        cfg.sampler.search_radius = static_cast<int>(parse_long(key, value));
    else if (key == "sampler.patch_radius")
        cfg.sampler.patch_radius = static_cast<int>(parse_long(key, value));
    else if (key == "sampler.target_accepted")
        cfg.sampler.target_accepted = static_cast<int>(parse_long(key, value));
    else if (key == "sampler.max_draws")
        cfg.sampler.max_draws = static_cast<int>(parse_long(key, value));
    else if (key == "scalefit.window_radius")
        cfg.scalefit_window_radius = static_cast<int>(parse_long(key, value));
    else if (key == "scalefit.stride")
        cfg.scalefit_stride = static_cast<int>(parse_long(key, value));
    else if (key == "phantom.rows")
        ph.rows = static_cast<int>(parse_long(key, value));
    else if (key == "phantom.cols")
        ph.cols = static_cast<int>(parse_long(key, value));
    else if (key == "phantom.spacing_mm") {
        ph.spacing_mm = parse_double(key, value);
        ph.coil.spacing_mm = ph.spacing_mm;
    } else if (key == "phantom.background_level")
        ph.background_level = parse_double(key, value);
    else if (key == "phantom.prostate_level")
        ph.prostate_level = parse_double(key, value);
    else if (key == "phantom.lesion_level")
        ph.lesion_level = parse_double(key, value);
    else if (key == "phantom.urethra_level")
        ph.urethra_level = parse_double(key, value);
    else if (key == "phantom.wall_level")
        ph.wall_level = parse_double(key, value);
    else if (key == "phantom.prostate_row")
        ph.prostate_row = parse_double(key, value);
    else if (key == "phantom.prostate_col")
        ph.prostate_col = parse_double(key, value);
    else if (key == "phantom.prostate_semi_row_mm")
        ph.prostate_semi_row_mm = parse_double(key, value);
    else if (key == "phantom.prostate_semi_col_mm")
        ph.prostate_semi_col_mm = parse_double(key, value);
    else if (key == "phantom.lesions")
        ph.lesions = parse_lesions(key, value);
    else if (key == "phantom.urethra")
        ph.urethra_enabled = parse_bool(key, value);
    else if (key == "phantom.urethra_row")
        ph.urethra_row = parse_double(key, value);
    else if (key == "phantom.urethra_col")
        ph.urethra_col = parse_double(key, value);
    else if (key == "phantom.urethra_radius_mm")
        ph.urethra_radius_mm = parse_double(key, value);
    else if (key == "phantom.wall")
        ph.wall_enabled = parse_bool(key, value);
    else if (key == "phantom.wall_row")
        ph.wall_row = parse_double(key, value);
    else if (key == "phantom.wall_thickness_mm")
        ph.wall_thickness_mm = parse_double(key, value);
    else if (key == "phantom.wall_halfwidth_mm")
        ph.wall_halfwidth_mm = parse_double(key, value);
    else if (key == "phantom.sigma0")
        cfg.sigma0 = parse_double(key, value);
    else if (key == "regions.background")
        cfg.background_region = parse_rect(key, value);
    else if (key == "regions.prostate")
        cfg.prostate_region = parse_rect(key, value);
    else if (key == "seed")
        cfg.seed = parse_u64(key, value);
    else
        throw parse_error("config: unknown key '" + key + "'");
}

} // namespace detail

// key=value configuration with '#' comments and dotted section prefixes.
inline RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::size_t pos = 0;
    int line_no = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string line = text.substr(pos, eol - pos);
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (!line.empty()) {
            const std::size_t eq = line.find('=');
            if (eq == std::string::npos)
                throw parse_error("config: line " + std::to_string(line_no) +
                                  " is not 'key=value'");
            const std::string key = detail::trim(line.substr(0, eq));
            const std::string value = detail::trim(line.substr(eq + 1));
            detail::apply_config_key(cfg, key, value);
        }
        if (eol == text.size()) break;
        pos = eol + 1;
    }
    cfg.sampler.seed = cfg.seed;
    return cfg;
}

inline RunConfig parse_config_file(const std::string& path) {
    return parse_config_text(detail::read_file(path));
}

// Resolved settings as ordered key=value pairs (echoed into reports).
inline std::vector<std::pair<std::string, std::string>> config_echo(const RunConfig& cfg) {
    auto fmt = [](double v) {
        char buf[48];
        std::snprintf(buf, sizeof(buf), "%.10g", v);
        return std::string(buf);
    };
    std::vector<std::pair<std::string, std::string>> kv;
    kv.emplace_back("profile.preset", cfg.profile_preset);
    kv.emplace_back("profile.surface_gain", fmt(cfg.profile.surface_gain));
    kv.emplace_back("profile.decay_length_mm", fmt(cfg.profile.decay_length_mm));
    kv.emplace_back("profile.cutoff_mm", fmt(cfg.profile.cutoff_mm));
    kv.emplace_back("profile.post_cutoff_gain", fmt(cfg.profile.post_cutoff_gain));
    kv.emplace_back("coil.kind", cfg.coil().kind == CoilKind::point ? "point" : "segment");
    kv.emplace_back("coil.p0_row", fmt(cfg.coil().p0_row));
    kv.emplace_back("coil.p0_col", fmt(cfg.coil().p0_col));
    kv.emplace_back("coil.p1_row", fmt(cfg.coil().p1_row));
    kv.emplace_back("coil.p1_col", fmt(cfg.coil().p1_col));
    kv.emplace_back("sampler.search_radius", std::to_string(cfg.sampler.search_radius));
    kv.emplace_back("sampler.patch_radius", std::to_string(cfg.sampler.patch_radius));
    kv.emplace_back("sampler.target_accepted", std::to_string(cfg.sampler.target_accepted));
    kv.emplace_back("sampler.max_draws", std::to_string(cfg.sampler.max_draws));
    kv.emplace_back("scalefit.window_radius", std::to_string(cfg.scalefit_window_radius));
    kv.emplace_back("scalefit.stride", std::to_string(cfg.scalefit_stride));
    kv.emplace_back("phantom.sigma0", fmt(cfg.sigma0));
    kv.emplace_back("seed", std::to_string(cfg.seed));
    return kv;
}

} // namespace acer

#endif
