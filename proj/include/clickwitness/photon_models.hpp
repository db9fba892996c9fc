#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "clickwitness/click_core.hpp"

namespace clickwitness {

// Probability mass above n_max beyond this bound is an error, not a warning:
// silent truncation corrupts witness eigenvalues.
inline constexpr double kDefaultTailTolerance = 1e-10;

// Photon-number distribution truncated at n_max with explicit residual mass.
class PhotonStatistics {
public:
    PhotonStatistics(std::vector<double> probs, double tail_mass);

    int n_max() const { return static_cast<int>(probs_.size()) - 1; }
    const std::vector<double>& probs() const { return probs_; }
    double tail_mass() const { return tail_mass_; }

private:
    std::vector<double> probs_;
    double tail_mass_;
};

// Stochastic map R(k|m) from m absorbed photons to outcome bin k.
// Rows m = 0..max_photons, columns k = 0..K; each row sums to one.
class DetectorResponse {
public:
    explicit DetectorResponse(Eigen::MatrixXd response);

    int max_photons() const { return static_cast<int>(response_.rows()) - 1; }
    int outcome_count() const { return static_cast<int>(response_.cols()); }
    double prob(int outcome, int photons) const { return response_(photons, outcome); }
    const Eigen::MatrixXd& matrix() const { return response_; }

private:
    Eigen::MatrixXd response_;
};

// Splitting ratios q_1..q_N of the multiplexing tree, summing to one.
class SplittingTree {
public:
    explicit SplittingTree(std::vector<double> ratios);
    static SplittingTree uniform(int n_detectors);

    int detector_count() const { return static_cast<int>(ratios_.size()); }
    const std::vector<double>& ratios() const { return ratios_; }
    bool is_uniform(double tol = 1e-12) const;

private:
    std::vector<double> ratios_;
};

// Two-mode squeezed vacuum, lambda = tanh^2 r in [0, 1).
class TwoModeSqueezedVacuum {
public:
    static TwoModeSqueezedVacuum from_lambda(double lambda);
    static TwoModeSqueezedVacuum from_r(double r);

    double lambda() const { return lambda_; }
    std::optional<double> r() const { return r_; }

private:
    TwoModeSqueezedVacuum(double lambda, std::optional<double> r);

    double lambda_;
    std::optional<double> r_;
};

// Poisson photon statistics of a coherent field.
PhotonStatistics coherent_statistics(double mean_photons, int n_max,
                                     double tail_tol = kDefaultTailTolerance);

// Geometric photon statistics p(n) = mu^n / (1+mu)^{n+1}.
PhotonStatistics thermal_statistics(double mean_photons, int n_max,
                                    double tail_tol = kDefaultTailTolerance);

// Point mass at the given photon number.
PhotonStatistics fock_statistics(int photon_number);

struct HeraldedState {
    PhotonStatistics state;
    double herald_probability; // N_k, also the normalization of the state
};

// Signal statistics conditioned on the heralding detector reporting k counts:
// p(n|k) proportional to C(n,k) eta^k (1-eta)^{n-k} (1-lambda) lambda^n for
// n >= k. The normalization constant equals the heralding probability
// N_k = (1-lambda)(lambda eta)^k / [1 - lambda(1-eta)]^{k+1}.
HeraldedState heralded_statistics(const TwoModeSqueezedVacuum& source, double herald_efficiency,
                                  int herald_bin, int n_max,
                                  double tail_tol = kDefaultTailTolerance);

// Idealized binned PNR detector: absorbed photons thin binomially with the
// given efficiency, detected counts at or above the saturation bin collapse
// into it.
DetectorResponse pnr_response(int max_photons, int saturation_bin, double efficiency);

// Exact click statistics of a photon-number-diagonal state split over the
// tree and read out through the response map.
ClickStatistics click_statistics_from_state(const PhotonStatistics& state,
                                            const SplittingTree& tree,
                                            const DetectorResponse& response,
                                            double tail_tol = kDefaultTailTolerance);

struct IntensityComponent {
    double weight;
    double mean_photons;
};

// Classical ensemble of coherent intensities mapped to single-detector
// outcome laws: p_k = sum_m Poisson(m; mu/N) R(k|m). Requires uniform ratios,
// otherwise the per-detector laws would differ and the mixture-of-multinomials
// form would not apply.
ClassicalEnsemble classical_ensemble_from_intensities(
    const std::vector<IntensityComponent>& intensities, const SplittingTree& tree,
    const DetectorResponse& response, double tail_tol = kDefaultTailTolerance);

} // namespace clickwitness
