#include "clickwitness/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "clickwitness/errors.hpp"

namespace clickwitness {

std::uint64_t SplitMix64::next_below(std::uint64_t bound) {
    // Lemire's multiply-shift; the rejection loop removes modulo bias.
    while (true) {
        std::uint64_t x = next();
        __uint128_t m = static_cast<__uint128_t>(x) * bound;
        std::uint64_t lo = static_cast<std::uint64_t>(m);
        if (lo >= bound || lo >= (-bound) % bound) {
            return static_cast<std::uint64_t>(m >> 64);
        }
    }
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t counter) {
    // One finalizer round over (seed, counter); the SplitMix64 finalizer is
    // bijective and avalanching, so distinct counters give distinct streams.
    SplitMix64 mixer(seed ^ (0x632be59bd9b4e019ULL * (counter + 1)));
    return mixer.next();
}

namespace {

double log_binomial_pmf(std::int64_t n, double p, std::int64_t k) {
    double dn = static_cast<double>(n);
    double dk = static_cast<double>(k);
    return std::lgamma(dn + 1.0) - std::lgamma(dk + 1.0) - std::lgamma(dn - dk + 1.0) +
           dk * std::log(p) + (dn - dk) * std::log1p(-p);
}

} // namespace

std::int64_t sample_binomial(SplitMix64& gen, std::int64_t n, double p) {
    if (n < 0) throw ValidationError("sample_binomial: negative trial count");
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("sample_binomial: p outside [0,1]");
    if (n == 0 || p == 0.0) return 0;
    if (p == 1.0) return n;

    double u = gen.next_unit();

    // Inverse CDF, consuming pmf terms outward from the mode. The ratios
    // pmf(k+1)/pmf(k) = (n-k)/(k+1) * p/(1-p) keep each step O(1).
    std::int64_t mode = static_cast<std::int64_t>(std::floor((static_cast<double>(n) + 1.0) * p));
    if (mode > n) mode = n;
    double pmf_mode = std::exp(log_binomial_pmf(n, p, mode));
    double ratio = p / (1.0 - p);

    double up_pmf = pmf_mode;
    double down_pmf = pmf_mode;
    std::int64_t up = mode;    // next candidate on the upper side
    std::int64_t down = mode;  // last consumed on the lower side

    u -= pmf_mode;
    if (u < 0.0) return mode;

    while (true) {
        bool moved = false;
        if (up < n) {
            up_pmf *= ratio * static_cast<double>(n - up) / static_cast<double>(up + 1);
            ++up;
            u -= up_pmf;
            if (u < 0.0) return up;
            moved = true;
        }
        if (down > 0) {
            down_pmf *= static_cast<double>(down) / (ratio * static_cast<double>(n - down + 1));
            --down;
            u -= down_pmf;
            if (u < 0.0) return down;
            moved = true;
        }
        if (!moved) return mode; // rounding residue; u was within ~1e-15 of 1
    }
}

std::vector<std::int64_t> sample_multinomial(SplitMix64& gen, std::int64_t n,
                                             std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0 || !std::isfinite(w)) {
            throw ValidationError("sample_multinomial: weights must be finite and nonnegative");
        }
        total += w;
    }
    if (!(total > 0.0)) throw ValidationError("sample_multinomial: weight sum must be positive");

    std::vector<std::int64_t> counts(weights.size(), 0);
    std::int64_t remaining = n;
    double weight_left = total;
    for (std::size_t j = 0; j + 1 < weights.size() && remaining > 0; ++j) {
        if (!(weight_left > 0.0)) break; // rounding exhausted the tail weight
        double p = std::min(1.0, weights[j] / weight_left);
        if (p >= 1.0) {
            counts[j] = remaining;
            remaining = 0;
            break;
        }
        counts[j] = sample_binomial(gen, remaining, p);
        remaining -= counts[j];
        weight_left -= weights[j];
    }
    if (!counts.empty()) counts.back() += remaining;
    return counts;
}

} // namespace clickwitness
