#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "clickwitness/click_core.hpp"
#include "clickwitness/photon_models.hpp"

namespace clickwitness {

// Per-shot detector outcomes (k_1,...,k_N), shot-major.
class ShotRecords {
public:
    ShotRecords(int detector_count, int outcome_count, std::vector<std::uint8_t> outcomes,
                std::optional<std::int64_t> seed);

    int detector_count() const { return detector_count_; }
    int outcome_count() const { return outcome_count_; }
    std::int64_t shot_count() const {
        return static_cast<std::int64_t>(outcomes_.size()) / detector_count_;
    }
    std::span<const std::uint8_t> shot(std::int64_t i) const {
        return {outcomes_.data() + i * detector_count_, static_cast<std::size_t>(detector_count_)};
    }
    const std::vector<std::uint8_t>& outcomes() const { return outcomes_; }
    std::optional<std::int64_t> seed() const { return seed_; }

private:
    int detector_count_;
    int outcome_count_;
    std::vector<std::uint8_t> outcomes_;
    std::optional<std::int64_t> seed_;
};

// Witness estimate from finite shots, with a bootstrap confidence interval
// for the minimal eigenvalue.
struct EstimatedWitness {
    WitnessReport report;
    std::int64_t shot_count = 0;
    int bootstrap_resamples = 0;
    double confidence = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::optional<double> systematic_shift;
};

// I.i.d. shots from the click table. Outcomes are assigned to detector labels
// uniformly at random within each drawn configuration. Each shot derives its
// randomness from (seed, shot index) only, so results do not depend on any
// internal work splitting.
ShotRecords sample_records(const ClickStatistics& stats, std::int64_t shots, std::int64_t seed);

// Empirical click table: relative configuration frequencies.
ClickStatistics configurations_from_records(const ShotRecords& records);

// Sample-moment witness with a nonparametric bootstrap over shots.
// Covariances use 1/S normalization so that an empirical table equal to the
// true table reproduces the exact M. The interval is the basic (reflected)
// bootstrap interval; the verdict requires the entire interval below zero.
// When `bootstrap_seed` is not given, the records' provenance seed is used.
EstimatedWitness estimate_witness(const ShotRecords& records, int bootstrap_resamples,
                                  double confidence,
                                  std::optional<std::int64_t> bootstrap_seed = std::nullopt);

// Worst-case shift of the exact minimal eigenvalue when the uniform splitting
// ratios are perturbed by +-imbalance, exhausting all sign patterns that keep
// the ratios summing to one.
double splitting_systematics(const PhotonStatistics& state, const DetectorResponse& response,
                             int n_detectors, double imbalance,
                             double tail_tol = kDefaultTailTolerance);

} // namespace clickwitness
