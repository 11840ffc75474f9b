#pragma once

#include <cstdint>

namespace rgflow {

/// SplitMix64 (Steele, Lea, Flood 2014). Every value is a pure function of
/// (seed, call count), so streams are identical on every platform. Doubles
/// use the top 53 bits; no std:: distributions are involved because their
/// output is implementation-defined.
class SplitMix64 {
public:
    static constexpr const char* kName = "splitmix64/v1";

    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Child stream for sub-task `stream`; does not advance this generator.
    SplitMix64 split(std::uint64_t stream) const noexcept {
        SplitMix64 mix(state_ ^ (0xd1b54a32d192ed03ULL * (stream + 1)));
        return SplitMix64(mix.next());
    }

private:
    std::uint64_t state_;
};

} // namespace rgflow
