#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace clickwitness {

// SplitMix64 stream. Cheap to construct, so per-shot and per-replicate
// substreams are derived by hashing (seed, counter) pairs; results are then
// independent of how work is split across threads.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, bound) via rejection-free Lemire reduction.
    std::uint64_t next_below(std::uint64_t bound);

private:
    std::uint64_t state_;
};

// Mixes a seed and a counter into the seed of an independent substream.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t counter);

// Exact binomial draw by inverse-CDF, walking outward from the mode.
// Expected cost O(sqrt(n p (1-p))); exact for any n representable in int64.
std::int64_t sample_binomial(SplitMix64& gen, std::int64_t n, double p);

// Multinomial draw via the conditional-binomial chain. `weights` need not be
// normalized; all entries must be >= 0 with a positive sum.
std::vector<std::int64_t> sample_multinomial(SplitMix64& gen, std::int64_t n,
                                             std::span<const double> weights);

} // namespace clickwitness
