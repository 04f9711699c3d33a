#ifndef ACER_ERROR_HPP
#define ACER_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace acer {

// Not enough data points/windows to produce the requested estimate.
class insufficient_data_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A region, contrast or sample set is degenerate for the requested metric
// (zero variance, zero contrast, identical paired lists).
class degenerate_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Phantom geometry that cannot be realised (structure outside the prostate,
// outside the grid, no room for the preset regions).
class invalid_spec_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed file contents. byte_offset() is the position where parsing stopped.
class parse_error : public std::runtime_error {
public:
    parse_error(const std::string& what, std::size_t byte_offset)
        : std::runtime_error(what + " (byte offset " + std::to_string(byte_offset) + ")"),
          offset_(byte_offset) {}

    explicit parse_error(const std::string& what) : std::runtime_error(what), offset_(0) {}

    std::size_t byte_offset() const noexcept { return offset_; }

private:
    std::size_t offset_ = 0;
};

} // namespace acer

#endif
