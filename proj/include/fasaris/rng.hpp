#pragma once

#include <complex>
#include <cstdint>

namespace fasaris {

// Counter-based deterministic generator: SplitMix64 stream with Box-Muller
// gaussians. Output sequence depends only on the seed, so experiment runs
// are reproducible across processes and can be re-derived from metadata.
class SplitMix64 {
public:
    static constexpr const char* kAlgorithmId = "splitmix64-boxmuller-v1";

    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // [0, 1), 53-bit resolution
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double next_uniform(double lo, double hi) {
        return lo + (hi - lo) * next_unit();
    }

    // One Box-Muller pair per call; both outputs consumed (re, im) so the
    // draw order is fixed. Circularly symmetric CN(0, variance).
    std::complex<double> next_cn(double variance);

    // Sub-stream seed for a purpose tag (0 = channel draw, 1 = AO init,
    // 2 = random-phase baseline). Keeps streams independent per seed.
    static std::uint64_t derive(std::uint64_t base, std::uint64_t stream) {
        std::uint64_t z = base + (stream + 1) * 0xD1B54A32D192ED03ull;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

} // namespace fasaris
