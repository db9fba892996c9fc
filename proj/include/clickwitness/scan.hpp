#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "clickwitness/config.hpp"
#include "clickwitness/estimation.hpp"

namespace clickwitness {

// One grid point of a herald or power scan. Empty optionals are emitted as
// `na` (heralding bins that cannot fire, e.g. k >= 1 at lambda = 0).
struct ScanPoint {
    double lambda = 0.0;
    int herald_bin = 0;
    std::optional<double> herald_probability;
    std::optional<double> min_eigenvalue;
    std::optional<EstimatedWitness> estimate;
};

// Minimal witness eigenvalue per heralding bin at the configured lambda.
// Finite-shot estimates are attached when estimation.shots > 0, each point
// seeded deterministically from (estimation.seed, point index).
std::vector<ScanPoint> herald_scan(const ExperimentConfig& config);

// Grid over scan.lambdas x scan.bins, rows ordered by (lambda, bin).
std::vector<ScanPoint> power_scan(const ExperimentConfig& config);

void write_herald_scan(std::ostream& out, const ExperimentConfig& config,
                       const std::vector<ScanPoint>& points);
void write_power_scan(std::ostream& out, const ExperimentConfig& config,
                      const std::vector<ScanPoint>& points);

} // namespace clickwitness
