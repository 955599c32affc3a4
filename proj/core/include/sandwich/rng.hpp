#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace sandwich {

/// SplitMix64 output finaliser.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Counter-based generator, reproducible in any language:
///
///   word k      = mix64(seed + (k + 1) · 0x9E3779B97F4A7C15)      (k = 0, 1, ...)
///   uniform     = (word >> 11) · 2⁻⁵³                               in [0, 1)
///   normals     = Box–Muller on consecutive uniforms (u₁, u₂):
///                 r = √(−2 ln(1 − u₁)),  r cos 2πu₂  then  r sin 2πu₂
///
/// The second normal of each pair is returned by the following call.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}

    std::uint64_t next_u64() noexcept {
        ++counter_;
        return mix64(seed_ + counter_ * 0x9E3779B97F4A7C15ULL);
    }

    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(angle);
        has_spare_ = true;
        return r * std::cos(angle);
    }

    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Independent stream key for replicate `stream` under `master`.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
    return mix64(master ^ mix64(stream + 0x632BE59BD9B4E019ULL));
}

} // namespace sandwich
