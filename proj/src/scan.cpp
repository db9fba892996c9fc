#include "clickwitness/scan.hpp"

#include <ostream>

#include "clickwitness/formats.hpp"
#include "clickwitness/rng.hpp"

namespace clickwitness {

namespace {

std::vector<int> scan_bins(const ExperimentConfig& config) {
    if (!config.scan.bins.empty()) return config.scan.bins;
    return {0, 1, 2, 3, 4, 5};
}

std::vector<double> scan_lambdas(const ExperimentConfig& config) {
    if (!config.scan.lambdas.empty()) return config.scan.lambdas;
    std::vector<double> grid;
    for (int i = 1; i <= 10; ++i) grid.push_back(0.05 * i);
    return grid;
}

void require_heralded(const ExperimentConfig& config, const char* what) {
    if (config.state.kind != ExperimentConfig::State::Kind::heralded) {
        throw ValidationError(std::string(what) + " requires state.kind = heralded");
    }
}

// Evaluates one (lambda, bin) grid point. Bins that cannot fire (lambda or
// herald efficiency zero with k >= 1) yield herald probability 0 and no
// eigenvalue.
ScanPoint evaluate_point(const TwoModeSqueezedVacuum& source, int herald_bin,
                         const ExperimentConfig& config, const SplittingTree& tree,
                         const DetectorResponse& response, std::size_t point_index) {
    ScanPoint point;
    point.lambda = source.lambda();
    point.herald_bin = herald_bin;
    if (herald_bin >= 1 && source.lambda() * config.state.herald_efficiency == 0.0) {
        point.herald_probability = 0.0;
        return point;
    }
    auto heralded = heralded_statistics(source, config.state.herald_efficiency, herald_bin,
                                        config.truncation.n_max, config.truncation.tail_tol);
    point.herald_probability = heralded.herald_probability;
    auto stats = click_statistics_from_state(heralded.state, tree, response,
                                             config.truncation.tail_tol);
    auto moments = statistics_moments(stats);
    point.min_eigenvalue =
        build_witness_matrix(moments.means, moments.covariances, tree.detector_count())
            .min_eigenvalue;
    if (config.estimation.shots > 0) {
        auto seed = static_cast<std::int64_t>(substream_seed(
            static_cast<std::uint64_t>(config.estimation.seed), point_index));
        auto records = sample_records(stats, config.estimation.shots, seed);
        point.estimate = estimate_witness(records, config.estimation.bootstrap,
                                          config.estimation.confidence);
    }
    return point;
}

void write_point_columns(std::ostream& out, const ScanPoint& point, bool with_estimate) {
    out << point.herald_bin;
    out << ' ' << (point.herald_probability ? format_double(*point.herald_probability) : "na");
    out << ' ' << (point.min_eigenvalue ? format_double(*point.min_eigenvalue) : "na");
    if (with_estimate) {
        if (point.estimate) {
            const auto& est = *point.estimate;
            out << ' ' << format_double(est.report.min_eigenvalue);
            out << ' '
                << (est.report.min_eigenvalue_stderr
                        ? format_double(*est.report.min_eigenvalue_stderr)
                        : "na");
            out << ' ' << format_double(est.ci_low);
            out << ' ' << format_double(est.ci_high);
            out << ' ' << to_string(est.report.verdict);
        } else {
            out << " na na na na na";
        }
    }
    out << '\n';
}

} // namespace

std::vector<ScanPoint> herald_scan(const ExperimentConfig& config) {
    require_heralded(config, "herald_scan");
    auto source = config.state.r ? TwoModeSqueezedVacuum::from_r(*config.state.r)
                                 : TwoModeSqueezedVacuum::from_lambda(config.state.lambda);
    auto tree = build_tree(config);
    auto response = build_response(config);
    std::vector<ScanPoint> points;
    auto bins = scan_bins(config);
    points.reserve(bins.size());
    for (std::size_t i = 0; i < bins.size(); ++i) {
        points.push_back(evaluate_point(source, bins[i], config, tree, response, i));
    }
    return points;
}

std::vector<ScanPoint> power_scan(const ExperimentConfig& config) {
    require_heralded(config, "power_scan");
    auto tree = build_tree(config);
    auto response = build_response(config);
    auto bins = scan_bins(config);
    auto lambdas = scan_lambdas(config);
    std::vector<ScanPoint> points;
    points.reserve(bins.size() * lambdas.size());
    std::size_t index = 0;
    for (double lambda : lambdas) {
        auto source = TwoModeSqueezedVacuum::from_lambda(lambda);
        for (int bin : bins) {
            points.push_back(evaluate_point(source, bin, config, tree, response, index));
            ++index;
        }
    }
    return points;
}

namespace {

void write_scan_meta(std::ostream& out, const ExperimentConfig& config) {
    out << "# herald_efficiency=" << format_double(config.state.herald_efficiency)
        << " N=" << config.tree.detectors << " n_max=" << config.truncation.n_max
        << " shots=" << config.estimation.shots << '\n';
}

} // namespace

void write_herald_scan(std::ostream& out, const ExperimentConfig& config,
                       const std::vector<ScanPoint>& points) {
    bool with_estimate = config.estimation.shots > 0;
    out << "# clickwitness herald-scan v1\n";
    out << "# lambda=" << format_double(config.state.lambda);
    if (config.state.r) out << " r=" << format_double(*config.state.r);
    out << '\n';
    write_scan_meta(out, config);
    out << "# columns: bin herald_probability min_eigenvalue";
    if (with_estimate) out << " estimate stderr ci_low ci_high verdict";
    out << '\n';
    for (const auto& point : points) write_point_columns(out, point, with_estimate);
}

void write_power_scan(std::ostream& out, const ExperimentConfig& config,
                      const std::vector<ScanPoint>& points) {
    bool with_estimate = config.estimation.shots > 0;
    out << "# clickwitness power-scan v1\n";
    write_scan_meta(out, config);
    out << "# columns: lambda bin herald_probability min_eigenvalue";
    if (with_estimate) out << " estimate stderr ci_low ci_high verdict";
    out << '\n';
    for (const auto& point : points) {
        out << format_double(point.lambda) << ' ';
        write_point_columns(out, point, with_estimate);
    }
}

} // namespace clickwitness
