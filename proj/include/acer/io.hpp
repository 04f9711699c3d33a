#ifndef ACER_IO_HPP
#define ACER_IO_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "acer/error.hpp"
#include "acer/image.hpp"

namespace acer {

namespace detail {

constexpr std::size_t kMaxPixels = std::size_t(1) << 28;

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw parse_error("cannot open file for writing: " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw parse_error("write failed: " + path);
}

// Header tokenizer for PGM: skips whitespace and '#' comment lines, keeping
// the comment text so the scale/spacing annotations can be recovered.
struct PgmHeaderScanner {
    const std::string& bytes;
    std::size_t pos = 0;
    std::vector<std::string> comments;

    explicit PgmHeaderScanner(const std::string& b) : bytes(b) {}

    void skip_separators() {
        while (pos < bytes.size()) {
            const char ch = bytes[pos];
            if (ch == '#') {
                std::size_t end = bytes.find('\n', pos);
                if (end == std::string::npos) end = bytes.size();
                comments.push_back(bytes.substr(pos, end - pos));
                pos = end;
            } else if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n') {
                ++pos;
            } else {
                return;
            }
        }
    }

    long next_int(const char* what) {
        skip_separators();
        const std::size_t start = pos;
        while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') ++pos;
        if (pos == start)
            throw parse_error(std::string("PGM: expected ") + what, start);
        return std::stol(bytes.substr(start, pos - start));
    }
};

inline bool comment_value(const std::vector<std::string>& comments, const std::string& key,
                          double& out) {
    for (const std::string& c : comments) {
        const std::size_t at = c.find(key + "=");
        if (at == std::string::npos) continue;
        out = std::strtod(c.c_str() + at + key.size() + 1, nullptr);
        return true;
    }
    return false;
}

inline void check_dimensions(long rows, long cols) {
    if (rows <= 0 || cols <= 0)
        throw std::invalid_argument("image dimensions must be positive");
    if (static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) > kMaxPixels)
        throw std::invalid_argument("image dimensions overflow the supported size");
}

} // namespace detail

// Formats a double with 10 significant digits (round-tripped through text so
// serialized reports are stable across runs).
inline double round_sig10(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return std::strtod(buf, nullptr);
}

// 16-bit binary PGM with the float dynamic range preserved through a
// "# scale=" header comment; pixel spacing rides along as "# spacing_mm=".
inline void write_image_pgm(const std::string& path, const Image& img) {
    double maxval = 0.0;
    for (double v : img.data) maxval = std::max(maxval, v);
    const double scale = maxval > 0.0 ? maxval / 65535.0 : 1.0;

    std::string out;
    char header[160];
    std::snprintf(header, sizeof(header), "P5\n# scale=%.17g\n# spacing_mm=%.17g\n%d %d\n65535\n",
                  scale, img.spacing_mm, img.cols, img.rows);
    out = header;
    out.reserve(out.size() + img.size() * 2);
    for (double v : img.data) {
        long q = std::lround(v / scale);
        q = std::clamp(q, 0L, 65535L);
        out.push_back(static_cast<char>((q >> 8) & 0xFF));
        out.push_back(static_cast<char>(q & 0xFF));
    }
    detail::write_file(path, out);
}

// Raw grid format: one text line "rows cols spacing_mm", then rows*cols
// little-endian 32-bit floats in row-major order.
inline void write_image_raw(const std::string& path, const Image& img) {
    char header[96];
    std::snprintf(header, sizeof(header), "%d %d %.17g\n", img.rows, img.cols, img.spacing_mm);
    std::string out = header;
    out.reserve(out.size() + img.size() * 4);
    for (double v : img.data) {
        const float f = static_cast<float>(v);
        char b[4];
        std::memcpy(b, &f, 4);
        out.append(b, 4);
    }
    detail::write_file(path, out);
}

// Dispatches on extension: ".pgm" writes the 16-bit PGM container, anything
// else the raw float grid.
inline void write_image(const std::string& path, const Image& img) {
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".pgm") == 0)
        write_image_pgm(path, img);
    else
        write_image_raw(path, img);
}

inline Image read_image(const std::string& path) {
    const std::string bytes = detail::read_file(path);
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') {
        detail::PgmHeaderScanner scan(bytes);
        scan.pos = 2;
        const long cols = scan.next_int("width");
        const long rows = scan.next_int("height");
        const long maxval = scan.next_int("maxval");
        if (maxval != 65535)
            throw parse_error("PGM image: expected maxval 65535", scan.pos);
        if (scan.pos >= bytes.size())
            throw parse_error("PGM image: truncated header", scan.pos);
        ++scan.pos; // single whitespace byte after maxval
        detail::check_dimensions(rows, cols);

        double scale = 1.0, spacing = 1.0;
        detail::comment_value(scan.comments, "scale", scale);
        detail::comment_value(scan.comments, "spacing_mm", spacing);
        if (!(scale > 0.0)) throw parse_error("PGM image: non-positive scale", 0);
        if (!(spacing > 0.0)) throw parse_error("PGM image: non-positive spacing", 0);

        const std::size_t need = static_cast<std::size_t>(rows) * cols * 2;
        if (bytes.size() - scan.pos < need)
            throw parse_error("PGM image: truncated pixel data", bytes.size());
        Image img(static_cast<int>(rows), static_cast<int>(cols), spacing);
        for (std::size_t i = 0; i < img.size(); ++i) {
            const unsigned hi = static_cast<unsigned char>(bytes[scan.pos + 2 * i]);
            const unsigned lo = static_cast<unsigned char>(bytes[scan.pos + 2 * i + 1]);
            img.data[i] = static_cast<double>((hi << 8) | lo) * scale;
        }
        return img;
    }

    // Raw grid: text header line, then float32 payload.
    const std::size_t eol = bytes.find('\n');
    if (eol == std::string::npos)
        throw parse_error("raw image: missing header line", bytes.size());
    long rows = 0, cols = 0;
    double spacing = 0.0;
    if (std::sscanf(bytes.c_str(), "%ld %ld %lf", &rows, &cols, &spacing) != 3)
        throw parse_error("raw image: malformed header (want \"rows cols spacing_mm\")", 0);
    detail::check_dimensions(rows, cols);
    if (!(spacing > 0.0)) throw parse_error("raw image: non-positive spacing", 0);
    const std::size_t start = eol + 1;
    const std::size_t need = static_cast<std::size_t>(rows) * cols * 4;
    if (bytes.size() - start < need)
        throw parse_error("raw image: truncated pixel data", bytes.size());
    Image img(static_cast<int>(rows), static_cast<int>(cols), spacing);
    for (std::size_t i = 0; i < img.size(); ++i) {
        float f;
        std::memcpy(&f, bytes.data() + start + 4 * i, 4);
        img.data[i] = static_cast<double>(f);
    }
    return img;
}

// Masks are 8-bit binary PGM, maxval 255, nonzero = true.
inline void write_mask(const std::string& path, const RegionMask& mask) {
    char header[64];
    std::snprintf(header, sizeof(header), "P5\n%d %d\n255\n", mask.cols, mask.rows);
    std::string out = header;
    out.reserve(out.size() + mask.on.size());
    for (std::uint8_t v : mask.on) out.push_back(static_cast<char>(v ? 255 : 0));
    detail::write_file(path, out);
}

inline RegionMask read_mask(const std::string& path) {
    const std::string bytes = detail::read_file(path);
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5')
        throw parse_error("mask: not a binary PGM (P5)", 0);
    detail::PgmHeaderScanner scan(bytes);
    scan.pos = 2;
    const long cols = scan.next_int("width");
    const long rows = scan.next_int("height");
    const long maxval = scan.next_int("maxval");
    if (maxval != 255)
        throw parse_error("mask: expected maxval 255", scan.pos);
    if (scan.pos >= bytes.size()) throw parse_error("mask: truncated header", scan.pos);
    ++scan.pos;
    detail::check_dimensions(rows, cols);
    const std::size_t need = static_cast<std::size_t>(rows) * cols;
    if (bytes.size() - scan.pos < need)
        throw parse_error("mask: truncated pixel data", bytes.size());
    RegionMask mask(static_cast<int>(rows), static_cast<int>(cols));
    for (std::size_t i = 0; i < need; ++i)
        mask.on[i] = bytes[scan.pos + i] != 0 ? 1 : 0;
    return mask;
}

// Numeric CSV, no header, rows of comma-separated values.
inline std::vector<std::vector<double>> read_csv(const std::string& path) {
    const std::string bytes = detail::read_file(path);
    std::vector<std::vector<double>> rows;
    std::size_t pos = 0;
    while (pos < bytes.size()) {
        std::size_t eol = bytes.find('\n', pos);
        if (eol == std::string::npos) eol = bytes.size();
        std::string line = bytes.substr(pos, eol - pos);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        bool blank = true;
        for (char ch : line)
            if (ch != ' ' && ch != '\t') blank = false;
        if (!blank) {
            std::vector<double> row;
            std::size_t cell_start = 0;
            while (cell_start <= line.size()) {
                std::size_t comma = line.find(',', cell_start);
                if (comma == std::string::npos) comma = line.size();
                const std::string cell = line.substr(cell_start, comma - cell_start);
                char* end = nullptr;
                const double v = std::strtod(cell.c_str(), &end);
                while (end && *end == ' ') ++end;
                if (end == cell.c_str() || (end && *end != '\0'))
                    throw parse_error("CSV: malformed numeric cell '" + cell + "'",
                                      pos + cell_start);
                row.push_back(v);
                cell_start = comma + 1;
                if (comma == line.size()) break;
            }
            rows.push_back(std::move(row));
        }
        pos = eol + 1;
    }
    if (rows.empty()) throw parse_error("CSV: no data rows", 0);
    return rows;
}

// Extracts one 0-based column; all rows must be long enough.
inline std::vector<double> csv_column(const std::vector<std::vector<double>>& rows,
                                      std::size_t col) {
    std::vector<double> out;
    out.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (col >= rows[r].size())
            throw parse_error("CSV: row " + std::to_string(r) + " has no column " +
                              std::to_string(col));
        out.push_back(rows[r][col]);
    }
    return out;
}

} // namespace acer

#endif
