#ifndef ACER_IMAGE_HPP
#define ACER_IMAGE_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace acer {

// 2-D grid of magnitude intensities with isotropic pixel spacing, row-major.
struct Image {
    int rows = 0;
    int cols = 0;
    double spacing_mm = 1.0;
    std::vector<double> data;

    Image() = default;

    Image(int rows_, int cols_, double spacing, double fill = 0.0)
        : rows(rows_), cols(cols_), spacing_mm(spacing) {
        if (rows_ <= 0 || cols_ <= 0)
            throw std::invalid_argument("Image: dimensions must be positive");
        if (spacing <= 0.0)
            throw std::invalid_argument("Image: pixel spacing must be positive");
        data.assign(static_cast<std::size_t>(rows_) * cols_, fill);
    }

    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

    bool inside(int r, int c) const { return r >= 0 && r < rows && c >= 0 && c < cols; }
    bool same_shape(const Image& o) const { return rows == o.rows && cols == o.cols; }
    std::size_t size() const { return data.size(); }
};

// Half-sample symmetric reflection: -1 -> 0, -2 -> 1, n -> n-1, ...
inline int mirror_index(int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

// Boolean pixel region on the same grid as an image.
struct RegionMask {
    int rows = 0;
    int cols = 0;
    std::vector<std::uint8_t> on;

    RegionMask() = default;

    RegionMask(int rows_, int cols_) : rows(rows_), cols(cols_) {
        if (rows_ <= 0 || cols_ <= 0)
            throw std::invalid_argument("RegionMask: dimensions must be positive");
        on.assign(static_cast<std::size_t>(rows_) * cols_, 0);
    }

    bool at(int r, int c) const { return on[static_cast<std::size_t>(r) * cols + c] != 0; }
    void set(int r, int c, bool v = true) {
        on[static_cast<std::size_t>(r) * cols + c] = v ? 1 : 0;
    }

    std::size_t count() const {
        std::size_t n = 0;
        for (std::uint8_t v : on) n += (v != 0);
        return n;
    }

    bool same_shape(const Image& img) const { return rows == img.rows && cols == img.cols; }
};

// Collects the intensities of mask pixels in row-major order.
inline std::vector<double> mask_values(const Image& img, const RegionMask& mask) {
    if (!mask.same_shape(img))
        throw std::invalid_argument("mask_values: mask and image dimensions differ");
    std::vector<double> out;
    out.reserve(mask.count());
    for (int r = 0; r < img.rows; ++r)
        for (int c = 0; c < img.cols; ++c)
            if (mask.at(r, c)) out.push_back(img.at(r, c));
    return out;
}

} // namespace acer

#endif
