#include "clickwitness/photon_models.hpp"

#include <cmath>
#include <map>
#include <sstream>

namespace clickwitness {

namespace {

// Pascal rows stay finite in double up to ~1020; anything near that is far
// beyond a sane truncation bound anyway.
constexpr int kMaxPhotonTruncation = 1000;

void check_tail(double tail, double tail_tol, const char* what) {
    if (tail > tail_tol) {
        std::ostringstream msg;
        msg << what << ": truncation tail mass " << tail << " exceeds tolerance " << tail_tol;
        throw TruncationError(msg.str());
    }
}

void check_n_max(int n_max) {
    if (n_max < 0) throw ValidationError("n_max must be >= 0");
    if (n_max > kMaxPhotonTruncation) {
        throw ValidationError("n_max exceeds the supported truncation bound");
    }
}

} // namespace

PhotonStatistics::PhotonStatistics(std::vector<double> probs, double tail_mass)
    : probs_(std::move(probs)), tail_mass_(tail_mass) {
    if (probs_.empty()) throw ValidationError("PhotonStatistics: empty distribution");
    if (!(tail_mass_ >= 0.0)) throw ValidationError("PhotonStatistics: negative tail mass");
    double sum = tail_mass_;
    for (double p : probs_) {
        if (!(p >= 0.0) || !std::isfinite(p)) {
            throw ValidationError("PhotonStatistics: entries must be finite and >= 0");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > kProbabilitySumTolerance) {
        throw ValidationError("PhotonStatistics: probabilities plus tail must sum to 1");
    }
}

DetectorResponse::DetectorResponse(Eigen::MatrixXd response) : response_(std::move(response)) {
    if (response_.rows() < 1 || response_.cols() < 2) {
        throw ValidationError("DetectorResponse: need >= 1 photon row and >= 2 outcome bins");
    }
    for (Eigen::Index m = 0; m < response_.rows(); ++m) {
        double row_sum = 0.0;
        for (Eigen::Index k = 0; k < response_.cols(); ++k) {
            double value = response_(m, k);
            if (!(value >= 0.0) || !std::isfinite(value)) {
                throw ValidationError("DetectorResponse: entries must be finite and >= 0");
            }
            row_sum += value;
        }
        if (std::abs(row_sum - 1.0) > kProbabilitySumTolerance) {
            std::ostringstream msg;
            msg << "DetectorResponse: row " << m << " sums to " << row_sum << ", expected 1";
            throw ValidationError(msg.str());
        }
    }
}

SplittingTree::SplittingTree(std::vector<double> ratios) : ratios_(std::move(ratios)) {
    if (ratios_.size() < 2) throw ValidationError("SplittingTree: need at least 2 arms");
    double sum = 0.0;
    for (double q : ratios_) {
        if (!(q > 0.0) || !std::isfinite(q)) {
            throw ValidationError("SplittingTree: ratios must be finite and > 0");
        }
        sum += q;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw ValidationError("SplittingTree: ratios must sum to 1 within 1e-12");
    }
}

SplittingTree SplittingTree::uniform(int n_detectors) {
    if (n_detectors < 2) throw ValidationError("SplittingTree: need at least 2 arms");
    return SplittingTree(
        std::vector<double>(static_cast<std::size_t>(n_detectors), 1.0 / n_detectors));
}

bool SplittingTree::is_uniform(double tol) const {
    double q = 1.0 / static_cast<double>(ratios_.size());
    for (double ratio : ratios_) {
        if (std::abs(ratio - q) > tol) return false;
    }
    return true;
}

TwoModeSqueezedVacuum::TwoModeSqueezedVacuum(double lambda, std::optional<double> r)
    : lambda_(lambda), r_(r) {}

TwoModeSqueezedVacuum TwoModeSqueezedVacuum::from_lambda(double lambda) {
    if (!(lambda >= 0.0 && lambda < 1.0)) {
        throw ValidationError("TwoModeSqueezedVacuum: lambda must lie in [0,1)");
    }
    return {lambda, std::nullopt};
}

TwoModeSqueezedVacuum TwoModeSqueezedVacuum::from_r(double r) {
    if (!(r >= 0.0) || !std::isfinite(r)) {
        throw ValidationError("TwoModeSqueezedVacuum: r must be finite and >= 0");
    }
    double t = std::tanh(r);
    double lambda = t * t;
    if (lambda >= 1.0) {
        throw ValidationError("TwoModeSqueezedVacuum: r too large, tanh^2 r rounds to 1");
    }
    return {lambda, r};
}

PhotonStatistics coherent_statistics(double mean_photons, int n_max, double tail_tol) {
    if (!(mean_photons >= 0.0) || !std::isfinite(mean_photons)) {
        throw ValidationError("coherent_statistics: mean photon number must be finite and >= 0");
    }
    check_n_max(n_max);
    std::vector<double> probs(static_cast<std::size_t>(n_max) + 1, 0.0);
    double term = std::exp(-mean_photons);
    double sum = 0.0;
    for (int n = 0; n <= n_max; ++n) {
        probs[static_cast<std::size_t>(n)] = term;
        sum += term;
        term *= mean_photons / static_cast<double>(n + 1);
    }
    double tail = std::max(0.0, 1.0 - sum);
    check_tail(tail, tail_tol, "coherent_statistics");
    return PhotonStatistics(std::move(probs), tail);
}

PhotonStatistics thermal_statistics(double mean_photons, int n_max, double tail_tol) {
    if (!(mean_photons >= 0.0) || !std::isfinite(mean_photons)) {
        throw ValidationError("thermal_statistics: mean photon number must be finite and >= 0");
    }
    check_n_max(n_max);
    double ratio = mean_photons / (1.0 + mean_photons);
    std::vector<double> probs(static_cast<std::size_t>(n_max) + 1, 0.0);
    double term = 1.0 / (1.0 + mean_photons);
    for (int n = 0; n <= n_max; ++n) {
        probs[static_cast<std::size_t>(n)] = term;
        term *= ratio;
    }
    double tail = std::pow(ratio, n_max + 1); // closed-form geometric tail
    check_tail(tail, tail_tol, "thermal_statistics");
    return PhotonStatistics(std::move(probs), tail);
}

PhotonStatistics fock_statistics(int photon_number) {
    if (photon_number < 0) throw ValidationError("fock_statistics: photon number must be >= 0");
    check_n_max(photon_number);
    std::vector<double> probs(static_cast<std::size_t>(photon_number) + 1, 0.0);
    probs.back() = 1.0;
    return PhotonStatistics(std::move(probs), 0.0);
}

HeraldedState heralded_statistics(const TwoModeSqueezedVacuum& source, double herald_efficiency,
                                  int herald_bin, int n_max, double tail_tol) {
    if (!(herald_efficiency > 0.0 && herald_efficiency <= 1.0)) {
        throw ValidationError("heralded_statistics: herald efficiency must lie in (0,1]");
    }
    if (herald_bin < 0) throw ValidationError("heralded_statistics: herald bin must be >= 0");
    check_n_max(n_max);
    if (n_max < herald_bin) {
        throw ValidationError("heralded_statistics: n_max below the herald bin");
    }

    double lambda = source.lambda();
    double eta = herald_efficiency;
    int k = herald_bin;

    // Normalization in closed form; it is also the heralding probability.
    double herald_prob = (1.0 - lambda) * std::pow(lambda * eta, k) /
                         std::pow(1.0 - lambda * (1.0 - eta), k + 1);
    if (!(herald_prob > 0.0)) {
        throw ValidationError("heralded_statistics: herald bin has zero probability");
    }

    // Unnormalized terms via the ratio recurrence; every term is bounded by
    // the normalization, so linear space cannot overflow.
    std::vector<double> probs(static_cast<std::size_t>(n_max) + 1, 0.0);
    double term = std::pow(eta * lambda, k) * (1.0 - lambda);
    double sum = 0.0;
    for (int n = k; n <= n_max; ++n) {
        probs[static_cast<std::size_t>(n)] = term;
        sum += term;
        term *= (1.0 - eta) * lambda * static_cast<double>(n + 1) /
                static_cast<double>(n + 1 - k);
    }
    for (double& p : probs) p /= herald_prob;
    double tail = std::max(0.0, 1.0 - sum / herald_prob);
    check_tail(tail, tail_tol, "heralded_statistics");
    return HeraldedState{PhotonStatistics(std::move(probs), tail), herald_prob};
}

DetectorResponse pnr_response(int max_photons, int saturation_bin, double efficiency) {
    if (max_photons < 0) throw ValidationError("pnr_response: max photons must be >= 0");
    if (saturation_bin < 1) throw ValidationError("pnr_response: saturation bin must be >= 1");
    if (!(efficiency > 0.0 && efficiency <= 1.0)) {
        throw ValidationError("pnr_response: efficiency must lie in (0,1]");
    }
    check_n_max(max_photons);

    int k1 = saturation_bin + 1;
    Eigen::MatrixXd response = Eigen::MatrixXd::Zero(max_photons + 1, k1);
    for (int m = 0; m <= max_photons; ++m) {
        // Binomial thinning; detected counts >= K collapse into the last bin.
        double below = 0.0;
        if (efficiency < 1.0) {
            double term = std::pow(1.0 - efficiency, m); // d = 0
            for (int d = 0; d < saturation_bin && d <= m; ++d) {
                response(m, d) = term;
                below += term;
                term *= (efficiency / (1.0 - efficiency)) * static_cast<double>(m - d) /
                        static_cast<double>(d + 1);
            }
        } else if (m < saturation_bin) {
            response(m, m) = 1.0;
            below = 1.0;
        }
        response(m, saturation_bin) = std::max(0.0, 1.0 - below);
    }
    return DetectorResponse(std::move(response));
}

ClickStatistics click_statistics_from_state(const PhotonStatistics& state,
                                            const SplittingTree& tree,
                                            const DetectorResponse& response, double tail_tol) {
    int n_max = state.n_max();
    int n_detectors = tree.detector_count();
    int outcome_count = response.outcome_count();
    if (response.max_photons() < n_max) {
        throw ValidationError(
            "click_statistics_from_state: response does not cover the state's photon range");
    }
    check_tail(state.tail_mass(), std::min(tail_tol, kProbabilitySumTolerance),
               "click_statistics_from_state");

    // Pascal triangle up to n_max.
    std::vector<std::vector<double>> binom(static_cast<std::size_t>(n_max) + 1);
    for (int n = 0; n <= n_max; ++n) {
        auto& row = binom[static_cast<std::size_t>(n)];
        row.assign(static_cast<std::size_t>(n) + 1, 1.0);
        for (int j = 1; j < n; ++j) {
            row[static_cast<std::size_t>(j)] = binom[static_cast<std::size_t>(n) - 1][j - 1] +
                                               binom[static_cast<std::size_t>(n) - 1][j];
        }
    }

    // Dynamic program over detectors. For each partial outcome histogram h
    // and photon total u it accumulates
    //   S(h, u) = sum u!/(m_1!..m_i!) prod_j q_j^{m_j} R(k_j|m_j)
    // over arm counts m_j summing to u and outcomes k_j forming h. Every
    // S(h, u) is a sub-sum of a multinomial expansion of (q_1+...+q_i)^u,
    // hence bounded by 1.
    using Layer = std::map<std::vector<int>, std::vector<double>>;
    Layer layer;
    {
        std::vector<double> unit(static_cast<std::size_t>(n_max) + 1, 0.0);
        unit[0] = 1.0;
        layer.emplace(std::vector<int>(static_cast<std::size_t>(outcome_count), 0),
                      std::move(unit));
    }

    std::vector<double> q_pow(static_cast<std::size_t>(n_max) + 1);
    for (int arm = 0; arm < n_detectors; ++arm) {
        double q = tree.ratios()[static_cast<std::size_t>(arm)];
        q_pow[0] = 1.0;
        for (int m = 1; m <= n_max; ++m) q_pow[static_cast<std::size_t>(m)] = q_pow[m - 1] * q;

        Layer next;
        for (const auto& [hist, weights] : layer) {
            for (int used = 0; used <= n_max; ++used) {
                double s = weights[static_cast<std::size_t>(used)];
                if (s == 0.0) continue;
                for (int m = 0; m + used <= n_max; ++m) {
                    double base = s * binom[static_cast<std::size_t>(used + m)]
                                          [static_cast<std::size_t>(m)] *
                                  q_pow[static_cast<std::size_t>(m)];
                    if (base == 0.0) continue;
                    for (int k = 0; k < outcome_count; ++k) {
                        double r = response.prob(k, m);
                        if (r == 0.0) continue;
                        std::vector<int> hist_next = hist;
                        ++hist_next[static_cast<std::size_t>(k)];
                        auto [it, inserted] = next.try_emplace(
                            std::move(hist_next),
                            std::vector<double>(static_cast<std::size_t>(n_max) + 1, 0.0));
                        it->second[static_cast<std::size_t>(used + m)] += base * r;
                    }
                }
            }
        }
        layer = std::move(next);
    }

    ClickStatistics::Table table;
    for (const auto& [hist, weights] : layer) {
        double prob = 0.0;
        for (int n = 0; n <= n_max; ++n) {
            prob += state.probs()[static_cast<std::size_t>(n)] *
                    weights[static_cast<std::size_t>(n)];
        }
        table.emplace(ClickConfiguration{hist}, prob);
    }
    return ClickStatistics(n_detectors, outcome_count, std::move(table));
}

ClassicalEnsemble classical_ensemble_from_intensities(
    const std::vector<IntensityComponent>& intensities, const SplittingTree& tree,
    const DetectorResponse& response, double tail_tol) {
    if (intensities.empty()) {
        throw ValidationError("classical_ensemble_from_intensities: empty intensity list");
    }
    if (!tree.is_uniform()) {
        throw ValidationError(
            "classical_ensemble_from_intensities: non-uniform tree; per-detector laws would "
            "differ");
    }
    int n = tree.detector_count();
    int m_max = response.max_photons();
    int outcome_count = response.outcome_count();

    std::vector<ClassicalEnsemble::Component> components;
    components.reserve(intensities.size());
    for (const auto& [weight, mean_photons] : intensities) {
        if (!(mean_photons >= 0.0) || !std::isfinite(mean_photons)) {
            throw ValidationError(
                "classical_ensemble_from_intensities: mean photons must be finite and >= 0");
        }
        double arm_mean = mean_photons / static_cast<double>(n);
        std::vector<double> outcome_probs(static_cast<std::size_t>(outcome_count), 0.0);
        double term = std::exp(-arm_mean);
        double covered = 0.0;
        for (int m = 0; m <= m_max; ++m) {
            for (int k = 0; k < outcome_count; ++k) {
                outcome_probs[static_cast<std::size_t>(k)] += term * response.prob(k, m);
            }
            covered += term;
            term *= arm_mean / static_cast<double>(m + 1);
        }
        check_tail(std::max(0.0, 1.0 - covered), std::min(tail_tol, kProbabilitySumTolerance),
                   "classical_ensemble_from_intensities");
        components.push_back({weight, OutcomeProbabilities(std::move(outcome_probs))});
    }
    return ClassicalEnsemble(std::move(components));
}

} // namespace clickwitness
