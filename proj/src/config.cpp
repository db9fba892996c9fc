#include "clickwitness/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "clickwitness/formats.hpp"

namespace clickwitness {

namespace {

std::string trim(const std::string& text) {
    auto begin = text.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    auto end = text.find_last_not_of(" \t\r");
    return text.substr(begin, end - begin + 1);
}

double to_real(const std::string& key, const std::string& value) {
    std::istringstream in(value);
    double parsed = 0.0;
    in >> parsed;
    if (!in || !in.eof()) throw ParseError("config: bad real for " + key + ": `" + value + "`");
    return parsed;
}

std::int64_t to_int(const std::string& key, const std::string& value) {
    std::istringstream in(value);
    std::int64_t parsed = 0;
    in >> parsed;
    if (!in || !in.eof()) {
        throw ParseError("config: bad integer for " + key + ": `" + value + "`");
    }
    return parsed;
}

int to_bounded_int(const std::string& key, const std::string& value, std::int64_t low,
                   std::int64_t high) {
    std::int64_t parsed = to_int(key, value);
    if (parsed < low || parsed > high) {
        throw ParseError("config: " + key + " out of range: `" + value + "`");
    }
    return static_cast<int>(parsed);
}

std::vector<double> to_real_list(const std::string& key, const std::string& value) {
    std::string spaced = value;
    std::replace(spaced.begin(), spaced.end(), ',', ' ');
    std::istringstream in(spaced);
    std::vector<double> parsed;
    double item = 0.0;
    while (in >> item) parsed.push_back(item);
    if (!in.eof() || parsed.empty()) {
        throw ParseError("config: bad list for " + key + ": `" + value + "`");
    }
    return parsed;
}

std::vector<int> to_int_list(const std::string& key, const std::string& value) {
    std::vector<int> parsed;
    for (double item : to_real_list(key, value)) {
        int as_int = static_cast<int>(item);
        if (static_cast<double>(as_int) != item) {
            throw ParseError("config: bad integer list for " + key + ": `" + value + "`");
        }
        parsed.push_back(as_int);
    }
    return parsed;
}

} // namespace

void apply_config_entry(ExperimentConfig& config, const std::string& key,
                        const std::string& value) {
    if (key == "state.kind") {
        using Kind = ExperimentConfig::State::Kind;
        if (value == "coherent") {
            config.state.kind = Kind::coherent;
        } else if (value == "thermal") {
            config.state.kind = Kind::thermal;
        } else if (value == "fock") {
            config.state.kind = Kind::fock;
        } else if (value == "heralded") {
            config.state.kind = Kind::heralded;
        } else {
            throw ParseError("config: unknown state.kind `" + value + "`");
        }
    } else if (key == "state.mean_photons") {
        config.state.mean_photons = to_real(key, value);
    } else if (key == "state.photon_number") {
        config.state.photon_number = to_bounded_int(key, value, 0, 1000);
    } else if (key == "state.lambda") {
        config.state.lambda = to_real(key, value);
    } else if (key == "state.r") {
        config.state.r = to_real(key, value);
    } else if (key == "state.herald_efficiency") {
        config.state.herald_efficiency = to_real(key, value);
    } else if (key == "state.herald_bin") {
        config.state.herald_bin = to_bounded_int(key, value, 0, 1000);
    } else if (key == "detector.kind") {
        using Kind = ExperimentConfig::Detector::Kind;
        if (value == "pnr") {
            config.detector.kind = Kind::pnr;
        } else if (value == "file") {
            config.detector.kind = Kind::file;
        } else {
            throw ParseError("config: unknown detector.kind `" + value + "`");
        }
    } else if (key == "detector.efficiency") {
        config.detector.efficiency = to_real(key, value);
    } else if (key == "detector.saturation_bin") {
        config.detector.saturation_bin = to_bounded_int(key, value, 1, 255);
    } else if (key == "detector.response_file") {
        config.detector.response_file = value;
    } else if (key == "tree.detectors") {
        config.tree.detectors = to_bounded_int(key, value, 2, 64);
    } else if (key == "tree.ratios") {
        config.tree.ratios = to_real_list(key, value);
    } else if (key == "truncation.n_max") {
        config.truncation.n_max = to_bounded_int(key, value, 0, 1000);
    } else if (key == "truncation.tail_tol") {
        config.truncation.tail_tol = to_real(key, value);
    } else if (key == "estimation.shots") {
        config.estimation.shots = to_int(key, value);
    } else if (key == "estimation.seed") {
        config.estimation.seed = to_int(key, value);
    } else if (key == "estimation.bootstrap") {
        config.estimation.bootstrap = to_bounded_int(key, value, 2, 1000000);
    } else if (key == "estimation.confidence") {
        config.estimation.confidence = to_real(key, value);
    } else if (key == "scan.bins") {
        config.scan.bins = to_int_list(key, value);
    } else if (key == "scan.lambdas") {
        config.scan.lambdas = to_real_list(key, value);
    } else {
        throw ParseError("config: unknown key `" + key + "`");
    }
}

ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig config;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string trimmed = trim(line);
        if (trimmed.empty()) continue;
        auto equals = trimmed.find('=');
        if (equals == std::string::npos) {
            std::ostringstream msg;
            msg << "config line " << line_number << ": expected `section.key = value`";
            throw ParseError(msg.str());
        }
        std::string key = trim(trimmed.substr(0, equals));
        std::string value = trim(trimmed.substr(equals + 1));
        if (key.empty() || value.empty()) {
            std::ostringstream msg;
            msg << "config line " << line_number << ": empty key or value";
            throw ParseError(msg.str());
        }
        try {
            apply_config_entry(config, key, value);
        } catch (const ParseError& e) {
            std::ostringstream msg;
            msg << "config line " << line_number << ": " << e.what();
            throw ParseError(msg.str());
        }
    }
    return config;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config `" + path + "`");
    try {
        return parse_config(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

PhotonStatistics build_state(const ExperimentConfig& config) {
    using Kind = ExperimentConfig::State::Kind;
    const auto& state = config.state;
    const auto& truncation = config.truncation;
    switch (state.kind) {
        case Kind::coherent:
            return coherent_statistics(state.mean_photons, truncation.n_max,
                                       truncation.tail_tol);
        case Kind::thermal:
            return thermal_statistics(state.mean_photons, truncation.n_max, truncation.tail_tol);
        case Kind::fock:
            return fock_statistics(state.photon_number);
        case Kind::heralded: {
            auto source = state.r ? TwoModeSqueezedVacuum::from_r(*state.r)
                                  : TwoModeSqueezedVacuum::from_lambda(state.lambda);
            return heralded_statistics(source, state.herald_efficiency, state.herald_bin,
                                       truncation.n_max, truncation.tail_tol)
                .state;
        }
    }
    throw ValidationError("build_state: unreachable state kind");
}

namespace {

// Photon range the detector response must cover for the configured state.
int required_photon_range(const ExperimentConfig& config) {
    if (config.state.kind == ExperimentConfig::State::Kind::fock) {
        return config.state.photon_number;
    }
    return config.truncation.n_max;
}

} // namespace

DetectorResponse build_response(const ExperimentConfig& config) {
    using Kind = ExperimentConfig::Detector::Kind;
    if (config.detector.kind == Kind::file) {
        return read_detector_response_file(config.detector.response_file);
    }
    return pnr_response(required_photon_range(config), config.detector.saturation_bin,
                        config.detector.efficiency);
}

SplittingTree build_tree(const ExperimentConfig& config) {
    if (config.tree.ratios) {
        if (static_cast<int>(config.tree.ratios->size()) != config.tree.detectors) {
            throw ValidationError("tree.ratios length must match tree.detectors");
        }
        return SplittingTree(*config.tree.ratios);
    }
    return SplittingTree::uniform(config.tree.detectors);
}

ClickStatistics simulate_config(const ExperimentConfig& config) {
    auto state = build_state(config);
    auto response = build_response(config);
    auto tree = build_tree(config);
    return click_statistics_from_state(state, tree, response, config.truncation.tail_tol);
}

} // namespace clickwitness
