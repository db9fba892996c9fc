#pragma once

#include <optional>
#include <string>
#include <vector>

#include "clickwitness/click_core.hpp"
#include "clickwitness/photon_models.hpp"

namespace clickwitness {

// Experiment description parsed from a flat `section.key = value` file.
struct ExperimentConfig {
    struct State {
        enum class Kind { coherent, thermal, fock, heralded };
        Kind kind = Kind::coherent;
        double mean_photons = 0.0;        // coherent | thermal
        int photon_number = 0;            // fock
        double lambda = 0.0;              // heralded; tanh^2 r
        std::optional<double> r;          // heralded, alternative to lambda
        double herald_efficiency = 1.0;   // heralded
        int herald_bin = 0;               // heralded
    };

    struct Detector {
        enum class Kind { pnr, file };
        Kind kind = Kind::pnr;
        double efficiency = 1.0;
        int saturation_bin = 7;
        std::string response_file;
    };

    struct Tree {
        int detectors = 2;
        std::optional<std::vector<double>> ratios; // nullopt = uniform
    };

    struct Truncation {
        int n_max = 40;
        double tail_tol = kDefaultTailTolerance;
    };

    struct Estimation {
        std::int64_t shots = 0; // 0 = exact only
        std::int64_t seed = 0;
        int bootstrap = 1000;
        double confidence = 0.95;
    };

    struct Scan {
        std::vector<int> bins;       // default 0..5
        std::vector<double> lambdas; // power scan grid
    };

    State state;
    Detector detector;
    Tree tree;
    Truncation truncation;
    Estimation estimation;
    Scan scan;
};

ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config(std::istream& in);

// Applies one `section.key = value` assignment; throws ParseError on unknown
// keys or malformed values.
void apply_config_entry(ExperimentConfig& config, const std::string& key,
                        const std::string& value);

// Model builders. Range checks live in the owning module constructors.
PhotonStatistics build_state(const ExperimentConfig& config);
DetectorResponse build_response(const ExperimentConfig& config);
SplittingTree build_tree(const ExperimentConfig& config);

// Exact click statistics of the configured experiment.
ClickStatistics simulate_config(const ExperimentConfig& config);

} // namespace clickwitness
