#include "clickwitness/click_core.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace clickwitness {

namespace {

void check_probability_vector(const std::vector<double>& probs, const char* what) {
    if (probs.size() < 2) {
        throw ValidationError(std::string(what) + ": need at least two outcome bins");
    }
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0) || !std::isfinite(p)) {
            throw ValidationError(std::string(what) + ": entries must be finite and >= 0");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > kProbabilitySumTolerance) {
        std::ostringstream msg;
        msg << what << ": probabilities sum to " << sum << ", expected 1";
        throw ValidationError(msg.str());
    }
}

} // namespace

OutcomeProbabilities::OutcomeProbabilities(std::vector<double> probs) : probs_(std::move(probs)) {
    check_probability_vector(probs_, "OutcomeProbabilities");
}

int ClickConfiguration::total() const {
    return std::accumulate(counts.begin(), counts.end(), 0);
}

std::vector<ClickConfiguration> enumerate_configurations(int n_detectors, int outcome_count) {
    if (n_detectors < 1 || outcome_count < 1) {
        throw ValidationError("enumerate_configurations: counts must be positive");
    }
    std::vector<ClickConfiguration> result;
    std::vector<int> current(static_cast<std::size_t>(outcome_count), 0);
    // Depth-first over N_0, N_1, ... emits lexicographic order directly.
    auto recurse = [&](auto&& self, int bin, int left) -> void {
        if (bin == outcome_count - 1) {
            current[static_cast<std::size_t>(bin)] = left;
            result.push_back(ClickConfiguration{current});
            return;
        }
        for (int c = 0; c <= left; ++c) {
            current[static_cast<std::size_t>(bin)] = c;
            self(self, bin + 1, left - c);
        }
    };
    recurse(recurse, 0, n_detectors);
    return result;
}

ClickStatistics::ClickStatistics(int detector_count, int outcome_count, Table table)
    : detector_count_(detector_count), outcome_count_(outcome_count), table_(std::move(table)) {
    if (detector_count_ < 2) throw ValidationError("ClickStatistics: need at least 2 detectors");
    if (outcome_count_ < 2) throw ValidationError("ClickStatistics: need at least 2 outcome bins");
    double sum = 0.0;
    for (const auto& [config, prob] : table_) {
        if (static_cast<int>(config.counts.size()) != outcome_count_) {
            throw ValidationError("ClickStatistics: configuration dimension mismatch");
        }
        for (int c : config.counts) {
            if (c < 0) throw ValidationError("ClickStatistics: negative configuration count");
        }
        if (config.total() != detector_count_) {
            throw ValidationError("ClickStatistics: configuration does not sum to N");
        }
        if (!(prob >= 0.0) || !std::isfinite(prob)) {
            throw ValidationError("ClickStatistics: probabilities must be finite and >= 0");
        }
        sum += prob;
    }
    if (std::abs(sum - 1.0) > kProbabilitySumTolerance) {
        std::ostringstream msg;
        msg << "ClickStatistics: table sums to " << sum << ", expected 1";
        throw ValidationError(msg.str());
    }
}

double ClickStatistics::probability(const ClickConfiguration& config) const {
    auto it = table_.find(config);
    return it == table_.end() ? 0.0 : it->second;
}

ClassicalEnsemble::ClassicalEnsemble(std::vector<Component> components)
    : components_(std::move(components)) {
    if (components_.empty()) throw ValidationError("ClassicalEnsemble: empty ensemble");
    int k = components_.front().outcome_probs.outcome_count();
    double wsum = 0.0;
    for (const auto& c : components_) {
        if (c.outcome_probs.outcome_count() != k) {
            throw ValidationError("ClassicalEnsemble: inconsistent outcome count across components");
        }
        if (!(c.weight >= 0.0 && c.weight <= 1.0)) {
            throw ValidationError("ClassicalEnsemble: weights must lie in [0,1]");
        }
        wsum += c.weight;
    }
    if (std::abs(wsum - 1.0) > kProbabilitySumTolerance) {
        throw ValidationError("ClassicalEnsemble: weights must sum to 1");
    }
}

std::string to_string(Verdict v) {
    return v == Verdict::nonclassical ? "nonclassical" : "consistent-with-classical";
}

double multinomial_pmf(const OutcomeProbabilities& p, int n_detectors,
                       const ClickConfiguration& config) {
    if (static_cast<int>(config.counts.size()) != p.outcome_count()) {
        throw ValidationError("multinomial_pmf: configuration/probability dimension mismatch");
    }
    for (int c : config.counts) {
        if (c < 0) throw ValidationError("multinomial_pmf: negative count");
    }
    if (config.total() != n_detectors) {
        throw ValidationError("multinomial_pmf: configuration does not sum to the detector count");
    }
    // Log space keeps N up to a few hundred well away from overflow.
    double log_value = std::lgamma(static_cast<double>(n_detectors) + 1.0);
    for (std::size_t k = 0; k < config.counts.size(); ++k) {
        int c = config.counts[k];
        if (c == 0) continue;
        double pk = p[static_cast<int>(k)];
        if (pk == 0.0) return 0.0;
        log_value += c * std::log(pk) - std::lgamma(static_cast<double>(c) + 1.0);
    }
    return std::exp(log_value);
}

ClickStatistics mixture_click_statistics(const ClassicalEnsemble& ensemble, int n_detectors) {
    if (n_detectors < 2) throw ValidationError("mixture_click_statistics: need N >= 2");
    int outcome_count = ensemble.outcome_count();
    ClickStatistics::Table table;
    for (const auto& config : enumerate_configurations(n_detectors, outcome_count)) {
        double prob = 0.0;
        for (const auto& component : ensemble.components()) {
            prob += component.weight * multinomial_pmf(component.outcome_probs, n_detectors, config);
        }
        table.emplace(config, prob);
    }
    return ClickStatistics(n_detectors, outcome_count, std::move(table));
}

ClickMoments statistics_moments(const ClickStatistics& stats) {
    int dim = stats.outcome_count();
    ClickMoments moments;
    moments.means = Eigen::VectorXd::Zero(dim);
    moments.second_moments = Eigen::MatrixXd::Zero(dim, dim);
    for (const auto& [config, prob] : stats.table()) {
        Eigen::VectorXd n(dim);
        for (int k = 0; k < dim; ++k) n(k) = config.counts[static_cast<std::size_t>(k)];
        moments.means += prob * n;
        moments.second_moments += prob * (n * n.transpose());
    }
    moments.covariances =
        moments.second_moments - moments.means * moments.means.transpose();
    return moments;
}

WitnessReport build_witness_matrix(const Eigen::VectorXd& means,
                                   const Eigen::MatrixXd& covariances, int n_detectors) {
    const auto dim = means.size();
    if (covariances.rows() != dim || covariances.cols() != dim) {
        throw ValidationError("build_witness_matrix: mean/covariance dimension mismatch");
    }
    if (n_detectors < 2) throw ValidationError("build_witness_matrix: need N >= 2");

    double n = static_cast<double>(n_detectors);
    Eigen::MatrixXd m(dim, dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
        for (Eigen::Index kk = 0; kk < dim; ++kk) {
            double delta = (k == kk) ? 1.0 : 0.0;
            m(k, kk) = n * covariances(k, kk) - means(k) * (n * delta - means(kk));
        }
    }
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
        throw ValidationError("build_witness_matrix: matrix asymmetric beyond tolerance");
    }
    m = ((m + m.transpose()) / 2.0).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw Error("build_witness_matrix: eigensolver failed");
    }

    WitnessReport report;
    report.matrix_m = std::move(m);
    report.eigenvalues = solver.eigenvalues();
    report.min_eigenvalue = report.eigenvalues(0);
    report.verdict = report.min_eigenvalue < -kVerdictMargin ? Verdict::nonclassical
                                                             : Verdict::consistent_with_classical;
    return report;
}

WitnessReport classical_bound_check(const ClassicalEnsemble& ensemble, int n_detectors) {
    ClickStatistics stats = mixture_click_statistics(ensemble, n_detectors);
    ClickMoments moments = statistics_moments(stats);
    WitnessReport report = build_witness_matrix(moments.means, moments.covariances, n_detectors);

    // Independent route: M = N^2 (N-1) <Delta p Delta p'> over the ensemble.
    int dim = ensemble.outcome_count();
    Eigen::VectorXd mean_p = Eigen::VectorXd::Zero(dim);
    Eigen::MatrixXd second_p = Eigen::MatrixXd::Zero(dim, dim);
    for (const auto& component : ensemble.components()) {
        Eigen::VectorXd p(dim);
        for (int k = 0; k < dim; ++k) p(k) = component.outcome_probs[k];
        mean_p += component.weight * p;
        second_p += component.weight * (p * p.transpose());
    }
    double n = static_cast<double>(n_detectors);
    Eigen::MatrixXd direct =
        n * n * (n - 1.0) * (second_p - mean_p * mean_p.transpose());

    double max_diff = (report.matrix_m - direct).cwiseAbs().maxCoeff();
    if (max_diff > 1e-9) {
        std::ostringstream msg;
        msg << "classical_bound_check: the two routes to M disagree by " << max_diff;
        throw Error(msg.str());
    }
    return report;
}

} // namespace clickwitness
