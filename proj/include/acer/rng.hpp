#ifndef ACER_RNG_HPP
#define ACER_RNG_HPP

#include <cmath>
#include <cstdint>
#include <utility>

namespace acer {

// SplitMix64 finalizer; full-avalanche 64-bit mix.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Small, portable counter-based generator. Output sequence is a pure
// function of the seed, so streams can be derived per pixel and results
// do not depend on scheduling.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~0ULL; }

    result_type operator()() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix64(state_);
    }

private:
    std::uint64_t state_;
};

// Derives an independent stream seed from (seed, a, b, salt).
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                                 std::uint64_t salt = 0) {
    std::uint64_t h = mix64(seed + 0x9E3779B97F4A7C15ULL);
    h = mix64(h ^ (a + 0xD1B54A32D192ED03ULL));
    h = mix64(h ^ (b + 0x8BB84B93962EACC9ULL));
    h = mix64(h ^ (salt + 0xA0761D6478BD642FULL));
    return h;
}

// Per-pixel stream; salt separates independent uses of the same user seed.
inline SplitMix64 pixel_stream(std::uint64_t seed, int row, int col, std::uint64_t salt = 0) {
    return SplitMix64(stream_seed(seed, static_cast<std::uint64_t>(row),
                                  static_cast<std::uint64_t>(col), salt));
}

// Uniform on [0, 1), 53-bit resolution.
template <class Rng>
double uniform_co(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform on (0, 1]; safe to pass through log().
template <class Rng>
double uniform_oc(Rng& rng) {
    return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
}

// One pair of independent standard Gaussians (Box-Muller).
template <class Rng>
std::pair<double, double> gaussian_pair(Rng& rng) {
    const double u1 = uniform_oc(rng);
    const double u2 = uniform_co(rng);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * 3.14159265358979323846 * u2;
    return {r * std::cos(t), r * std::sin(t)};
}

} // namespace acer

#endif
