// Acceptance suite for the click-counting nonclassicality witness.
// Each criterion prints exactly one PASS/FAIL line; the binary exits
// nonzero if any criterion fails.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "clickwitness/config.hpp"
#include "clickwitness/estimation.hpp"
#include "clickwitness/formats.hpp"
#include "clickwitness/scan.hpp"
#include "oracles.hpp"

using namespace clickwitness;
namespace fs = std::filesystem;

namespace {

struct Failure {
    std::string reason;
};

void expect(bool condition, const std::string& reason) {
    if (!condition) throw Failure{reason};
}

std::vector<double> random_simplex(std::mt19937& gen, int size) {
    std::uniform_real_distribution<double> unit(0.05, 1.0);
    std::vector<double> probs(static_cast<std::size_t>(size));
    double sum = 0.0;
    for (double& p : probs) {
        p = unit(gen);
        sum += p;
    }
    for (double& p : probs) p /= sum;
    return probs;
}

WitnessReport witness_of(const ClickStatistics& stats) {
    auto moments = statistics_moments(stats);
    return build_witness_matrix(moments.means, moments.covariances, stats.detector_count());
}

// Discrete ensemble of coherent components pushed through a uniform tree and
// an efficiency-eta saturating detector.
ClassicalEnsemble coherent_ensemble(std::mt19937& gen, int n_detectors, int saturation_bin,
                                    int max_components) {
    std::uniform_int_distribution<int> count(1, max_components);
    std::uniform_real_distribution<double> mean(0.0, 3.0);
    std::uniform_real_distribution<double> eta(0.4, 1.0);
    int components = count(gen);
    auto weights = random_simplex(gen, components);
    std::vector<IntensityComponent> intensities;
    for (int j = 0; j < components; ++j) {
        intensities.push_back({weights[static_cast<std::size_t>(j)], mean(gen)});
    }
    auto response = pnr_response(60, saturation_bin, eta(gen));
    return classical_ensemble_from_intensities(intensities, SplittingTree::uniform(n_detectors),
                                               response, 1e-10);
}

ClickStatistics fock_table(int photons, int saturation_bin, double efficiency = 1.0) {
    return click_statistics_from_state(fock_statistics(photons), SplittingTree::uniform(2),
                                       pnr_response(photons, saturation_bin, efficiency),
                                       1e-12);
}

ClickStatistics poisson_table() {
    auto state = coherent_statistics(1.0, 40, 1e-10);
    return click_statistics_from_state(state, SplittingTree::uniform(2),
                                       pnr_response(40, 3, 0.55), 1e-10);
}

int run_cli(const std::string& args, const fs::path& stdout_path) {
    std::string command = std::string(CLICKWITNESS_CLI_PATH) + " " + args + " > " +
                          stdout_path.string() + " 2> /dev/null";
    int status = std::system(command.c_str());
    if (status == -1) throw Failure{"failed to spawn the CLI"};
    return WEXITSTATUS(status);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// ---- criteria ------------------------------------------------------------

void criterion_classical_bound() {
    std::mt19937 gen(1001);
    std::uniform_int_distribution<int> n_dist(2, 4);
    std::uniform_int_distribution<int> k_dist(1, 7);
    for (int trial = 0; trial < 200; ++trial) {
        auto ensemble = coherent_ensemble(gen, n_dist(gen), k_dist(gen), 6);
        auto report = witness_of(mixture_click_statistics(ensemble, n_dist(gen)));
        expect(report.min_eigenvalue >= -1e-8,
               "classical ensemble produced min eigenvalue " +
                   std::to_string(report.min_eigenvalue));
    }
}

void criterion_coherent_point() {
    std::mt19937 gen(1002);
    std::uniform_int_distribution<int> n_dist(2, 4);
    std::uniform_int_distribution<int> k_dist(1, 7);
    for (int trial = 0; trial < 20; ++trial) {
        auto ensemble = coherent_ensemble(gen, n_dist(gen), k_dist(gen), 1);
        auto report = witness_of(mixture_click_statistics(ensemble, n_dist(gen)));
        double largest = report.matrix_m.cwiseAbs().maxCoeff();
        expect(largest <= 1e-8,
               "single coherent component gave |M|_max = " + std::to_string(largest));
    }
}

void criterion_fock_values() {
    auto one = fock_table(1, 1);
    auto oracle_one = oracles::click_table(std::vector<double>{0.0, 1.0}, {0.5, 0.5},
                                           pnr_response(1, 1, 1.0).matrix());
    expect(oracles::table_distance(oracle_one, one.table()) < 1e-12,
           "single-photon table disagrees with the enumeration oracle");
    auto report_one = witness_of(one);
    expect(std::abs(report_one.min_eigenvalue + 2.0) <= 1e-9,
           "single photon: expected -2, got " + std::to_string(report_one.min_eigenvalue));

    auto two = fock_table(2, 2);
    auto oracle_two = oracles::click_table(std::vector<double>{0.0, 0.0, 1.0}, {0.5, 0.5},
                                           pnr_response(2, 2, 1.0).matrix());
    expect(oracles::table_distance(oracle_two, two.table()) < 1e-12,
           "two-photon table disagrees with the enumeration oracle");
    auto report_two = witness_of(two);
    expect(std::abs(report_two.min_eigenvalue + 1.0) <= 1e-9,
           "two photons: expected -1, got " + std::to_string(report_two.min_eigenvalue));
    Eigen::Vector3d direction(1.0, 0.0, -1.0);
    Eigen::Vector3d residual =
        report_two.matrix_m * direction - report_two.min_eigenvalue * direction;
    expect(residual.cwiseAbs().maxCoeff() <= 1e-9,
           "two-photon eigenvector is not proportional to (1,0,-1)");
}

void criterion_route_equivalence() {
    std::mt19937 gen(1004);
    std::uniform_int_distribution<int> n_dist(2, 4);
    std::uniform_int_distribution<int> comp_dist(1, 6);
    std::uniform_int_distribution<int> k_dist(1, 5);
    for (int trial = 0; trial < 100; ++trial) {
        int outcome_count = k_dist(gen) + 1;
        int components = comp_dist(gen);
        auto weights = random_simplex(gen, components);
        std::vector<ClassicalEnsemble::Component> built;
        for (int j = 0; j < components; ++j) {
            built.push_back({weights[static_cast<std::size_t>(j)],
                             OutcomeProbabilities(random_simplex(gen, outcome_count))});
        }
        // classical_bound_check throws if its two computation paths disagree
        classical_bound_check(ClassicalEnsemble(std::move(built)), n_dist(gen));
    }
}

void criterion_herald_scan_structure() {
    ExperimentConfig config;
    config.state.kind = ExperimentConfig::State::Kind::heralded;
    config.state.lambda = 0.25;
    config.state.herald_efficiency = 0.98;
    config.detector.saturation_bin = 7;
    config.detector.efficiency = 1.0;
    config.tree.detectors = 2;
    config.truncation.n_max = 40;
    auto points = herald_scan(config);
    expect(points.size() == 6, "expected bins 0..5");
    expect(points[0].min_eigenvalue.has_value() &&
               *points[0].min_eigenvalue >= -1e-8 && *points[0].min_eigenvalue <= 1e-8 + 1e-9,
           "thermal bin 0 should sit at zero within tolerance");
    for (std::size_t bin = 1; bin <= 5; ++bin) {
        expect(points[bin].min_eigenvalue.has_value() && *points[bin].min_eigenvalue < 0.0,
               "heralded bin " + std::to_string(bin) + " should be strictly negative");
    }
}

void criterion_power_scan_structure() {
    ExperimentConfig config;
    config.state.kind = ExperimentConfig::State::Kind::heralded;
    config.state.herald_efficiency = 0.98;
    config.detector.saturation_bin = 7;
    config.detector.efficiency = 1.0;
    config.tree.detectors = 2;
    config.truncation.n_max = 60;
    config.scan.bins = {0, 1, 2, 3};
    for (int i = 1; i <= 10; ++i) config.scan.lambdas.push_back(0.05 * i);
    auto points = power_scan(config);
    expect(points.size() == 40, "expected a 10x4 grid");
    std::vector<std::vector<double>> per_bin(4);
    for (const auto& point : points) {
        expect(point.min_eigenvalue.has_value(), "grid point missing an eigenvalue");
        per_bin[static_cast<std::size_t>(point.herald_bin)].push_back(*point.min_eigenvalue);
    }
    for (double value : per_bin[0]) {
        expect(std::abs(value) <= 1e-8, "bin 0 drifted from zero: " + std::to_string(value));
    }
    for (int bin = 1; bin <= 3; ++bin) {
        const auto& column = per_bin[static_cast<std::size_t>(bin)];
        for (std::size_t i = 1; i < column.size(); ++i) {
            expect(column[i] >= column[i - 1] - 1e-12,
                   "bin " + std::to_string(bin) + " is not nondecreasing in lambda");
        }
        expect(column.front() < 0.0, "bin " + std::to_string(bin) + " lost its negativity");
    }
}

void criterion_estimator_calibration() {
    // 25% loss keeps the single-photon table genuinely random (a lossless one
    // is deterministic, which would make coverage trivial)
    auto quantum = fock_table(1, 1, 0.75);
    auto classical = poisson_table();
    double exact_quantum = witness_of(quantum).min_eigenvalue;
    double exact_classical = witness_of(classical).min_eigenvalue;

    int quantum_covered = 0, classical_covered = 0, false_positives = 0;
    for (int seed = 0; seed < 50; ++seed) {
        auto q = estimate_witness(sample_records(quantum, 100000, seed), 1000, 0.95);
        if (q.ci_low <= exact_quantum && exact_quantum <= q.ci_high) ++quantum_covered;
        auto c = estimate_witness(sample_records(classical, 100000, seed), 1000, 0.95);
        if (c.ci_low <= exact_classical && exact_classical <= c.ci_high) ++classical_covered;
        if (c.report.verdict == Verdict::nonclassical) ++false_positives;
    }
    expect(quantum_covered >= 45, "single-photon coverage " + std::to_string(quantum_covered) +
                                      "/50 below 45");
    expect(classical_covered >= 45,
           "classical coverage " + std::to_string(classical_covered) + "/50 below 45");
    expect(false_positives <= 3,
           std::to_string(false_positives) + "/50 classical runs flagged nonclassical");
}

void criterion_onoff_binomial() {
    // single Poisson component: each detector clicks independently with
    // probability 1 - exp(-eta mu / N)
    double mean = 1.3, eta = 0.7;
    int n = 3;
    auto state = coherent_statistics(mean, 60, 1e-10);
    auto stats = click_statistics_from_state(state, SplittingTree::uniform(n),
                                             pnr_response(60, 1, eta), 1e-10);
    double click = 1.0 - std::exp(-eta * mean / n);
    for (int j = 0; j <= n; ++j) {
        ClickConfiguration config{{n - j, j}};
        double expected = oracles::binomial_pmf(n, j, click);
        expect(std::abs(stats.probability(config) - expected) <= 1e-9,
               "on-off table is not binomial at N_1=" + std::to_string(j));
    }

    // two-component mixture: binomial mixture over N_1
    std::vector<IntensityComponent> intensities{{0.6, 0.5}, {0.4, 2.0}};
    auto ensemble = classical_ensemble_from_intensities(intensities, SplittingTree::uniform(n),
                                                        pnr_response(60, 1, eta), 1e-10);
    auto mixed = mixture_click_statistics(ensemble, n);
    for (int j = 0; j <= n; ++j) {
        double expected = 0.0;
        for (const auto& component : intensities) {
            double p = 1.0 - std::exp(-eta * component.mean_photons / n);
            expected += component.weight * oracles::binomial_pmf(n, j, p);
        }
        expect(std::abs(mixed.probability(ClickConfiguration{{n - j, j}}) - expected) <= 1e-9,
               "mixture on-off table is not a binomial mixture at N_1=" + std::to_string(j));
    }
}

void criterion_herald_self_consistency() {
    auto source = TwoModeSqueezedVacuum::from_lambda(0.5);
    for (int k = 0; k <= 5; ++k) {
        auto heralded = heralded_statistics(source, 0.9, k, 80, 1e-9);
        double sum = heralded.state.tail_mass();
        for (double p : heralded.state.probs()) sum += p;
        expect(std::abs(sum - 1.0) <= 1e-9,
               "conditional state at k=" + std::to_string(k) + " sums to " +
                   std::to_string(sum));
        expect(heralded.state.tail_mass() <= 1e-9, "tail too large at k=" + std::to_string(k));
    }
    double total = 0.0;
    for (int k = 0; k <= 30; ++k) {
        total += heralded_statistics(source, 0.9, k, 200, 1e-6).herald_probability;
    }
    expect(std::abs(total - 1.0) <= 1e-6,
           "herald probabilities over k<=30 sum to " + std::to_string(total));
}

void criterion_cli_determinism() {
    fs::path dir =
        fs::temp_directory_path() / ("clickwitness_accept_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "fock.cfg") << "state.kind = fock\n"
                                       "state.photon_number = 1\n"
                                       "detector.saturation_bin = 1\n"
                                       "tree.detectors = 2\n";
    std::string sample_args = "sample --config " + (dir / "fock.cfg").string() +
                              " --shots 5000 --seed 424242 --out ";
    expect(run_cli(sample_args + (dir / "a.rec").string(), dir / "a.out") == 0,
           "first sample run failed");
    expect(run_cli(sample_args + (dir / "b.rec").string(), dir / "b.out") == 0,
           "second sample run failed");
    expect(read_file(dir / "a.rec") == read_file(dir / "b.rec"),
           "repeated sampling differed byte-wise");

    int code_a = run_cli("witness " + (dir / "a.rec").string(), dir / "a.report");
    int code_b = run_cli("witness " + (dir / "a.rec").string(), dir / "b.report");
    expect(code_a == code_b, "witness exit codes differed between runs");
    expect(code_a == 0, "single-photon records should be flagged nonclassical");
    expect(read_file(dir / "a.report") == read_file(dir / "b.report"),
           "repeated witness runs differed byte-wise");
    fs::remove_all(dir);
}

struct Criterion {
    int id;
    const char* label;
    double budget_seconds;
    std::function<void()> body;
};

} // namespace

int main() {
    std::vector<Criterion> criteria{
        {1, "classical bound holds on 200 randomized coherent ensembles", 10.0,
         criterion_classical_bound},
        {2, "single coherent components give an elementwise-zero witness", 5.0,
         criterion_coherent_point},
        {3, "one- and two-photon witness values match frozen oracles", 1.0,
         criterion_fock_values},
        {4, "both witness computation routes agree on 100 random ensembles", 5.0,
         criterion_route_equivalence},
        {5, "herald scan: bin 0 classical, bins 1-5 strictly negative", 30.0,
         criterion_herald_scan_structure},
        {6, "power scan: bins 1-3 nondecreasing in lambda, bin 0 at zero", 120.0,
         criterion_power_scan_structure},
        {7, "bootstrap calibration: coverage >= 45/50, false positives <= 3/50", 600.0,
         criterion_estimator_calibration},
        {8, "on-off detectors reduce the table to a binomial mixture", 1.0,
         criterion_onoff_binomial},
        {9, "conditional states normalize; herald probabilities sum to one", 1.0,
         criterion_herald_self_consistency},
        {10, "repeated sample and witness runs are byte-identical", 1.0,
         criterion_cli_determinism},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        auto start = std::chrono::steady_clock::now();
        std::string verdict = "PASS";
        std::string detail;
        try {
            criterion.body();
        } catch (const Failure& failure) {
            verdict = "FAIL";
            detail = failure.reason;
        } catch (const std::exception& e) {
            verdict = "FAIL";
            detail = e.what();
        }
        double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (verdict == "PASS" && elapsed > criterion.budget_seconds) {
            verdict = "FAIL";
            detail = "exceeded the runtime budget of " +
                     std::to_string(criterion.budget_seconds) + " s";
        }
        if (verdict == "FAIL") ++failures;
        std::printf("criterion %2d %s (%.2f s) %s%s%s\n", criterion.id, verdict.c_str(),
                    elapsed, criterion.label, detail.empty() ? "" : " -- ", detail.c_str());
    }
    if (failures == 0) {
        std::printf("acceptance: all %zu criteria passed\n", criteria.size());
        return 0;
    }
    std::printf("acceptance: %d of %zu criteria FAILED\n", failures, criteria.size());
    return 1;
}
