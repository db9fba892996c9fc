#pragma once

#include <Eigen/Dense>

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "clickwitness/errors.hpp"

namespace clickwitness {

// Tolerance for "sums to one" checks on probability vectors and tables.
inline constexpr double kProbabilitySumTolerance = 1e-9;

// Numerical significance margin for verdicts. The witness matrix always has
// an exact zero eigenvalue along (1,...,1); eigensolver noise puts it at
// +-1e-16, so a verdict of "nonclassical" requires the relevant bound to sit
// below -kVerdictMargin rather than below zero.
inline constexpr double kVerdictMargin = 1e-10;

// Single-detector outcome distribution p_0..p_K over the K+1 bins.
class OutcomeProbabilities {
public:
    explicit OutcomeProbabilities(std::vector<double> probs);

    int outcome_count() const { return static_cast<int>(probs_.size()); }
    const std::vector<double>& probs() const { return probs_; }
    double operator[](int k) const { return probs_[static_cast<std::size_t>(k)]; }

private:
    std::vector<double> probs_;
};

// Counts (N_0,...,N_K) of detectors sharing each outcome in one shot.
struct ClickConfiguration {
    std::vector<int> counts;

    int total() const;
    auto operator<=>(const ClickConfiguration&) const = default;
};

// All configurations of `n_detectors` detectors over `outcome_count` bins,
// in lexicographic order over (N_0,...,N_K).
std::vector<ClickConfiguration> enumerate_configurations(int n_detectors, int outcome_count);

// Probability distribution over all click configurations for fixed (N, K).
class ClickStatistics {
public:
    using Table = std::map<ClickConfiguration, double>;

    ClickStatistics(int detector_count, int outcome_count, Table table);

    int detector_count() const { return detector_count_; }
    int outcome_count() const { return outcome_count_; }
    const Table& table() const { return table_; }

    // Zero for configurations absent from the table.
    double probability(const ClickConfiguration& config) const;

private:
    int detector_count_;
    int outcome_count_;
    Table table_;
};

// Finite mixture of single-detector outcome laws with weights summing to one.
class ClassicalEnsemble {
public:
    struct Component {
        double weight;
        OutcomeProbabilities outcome_probs;
    };

    explicit ClassicalEnsemble(std::vector<Component> components);

    const std::vector<Component>& components() const { return components_; }
    int outcome_count() const { return components_.front().outcome_probs.outcome_count(); }

private:
    std::vector<Component> components_;
};

enum class Verdict {
    nonclassical,
    consistent_with_classical,
};

std::string to_string(Verdict v);

// Witness matrix M, its spectrum, and the resulting verdict.
struct WitnessReport {
    Eigen::MatrixXd matrix_m;      // symmetric (K+1)x(K+1)
    Eigen::VectorXd eigenvalues;   // ascending
    double min_eigenvalue = 0.0;
    std::optional<double> min_eigenvalue_stderr;
    Verdict verdict = Verdict::consistent_with_classical;
};

// First and second moments of the configuration counts N_k.
struct ClickMoments {
    Eigen::VectorXd means;
    Eigen::MatrixXd second_moments;
    Eigen::MatrixXd covariances;
};

// N!/(N_0!...N_K!) p_0^{N_0}...p_K^{N_K}, assembled in log space.
double multinomial_pmf(const OutcomeProbabilities& p, int n_detectors,
                       const ClickConfiguration& config);

// Click table of a classical mixture: weighted multinomials over all
// configurations.
ClickStatistics mixture_click_statistics(const ClassicalEnsemble& ensemble, int n_detectors);

ClickMoments statistics_moments(const ClickStatistics& stats);

// M_{kk'} = N cov_{kk'} - mean_k (N delta_{kk'} - mean_{k'}), symmetrized,
// with eigenvalues from a dense self-adjoint solve.
WitnessReport build_witness_matrix(const Eigen::VectorXd& means,
                                   const Eigen::MatrixXd& covariances, int n_detectors);

// Computes M via the click-table moments and directly as
// N^2 (N-1) <Delta p Delta p'>, asserting elementwise agreement within 1e-9.
WitnessReport classical_bound_check(const ClassicalEnsemble& ensemble, int n_detectors);

} // namespace clickwitness
