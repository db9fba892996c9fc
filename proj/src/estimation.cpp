#include "clickwitness/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <utility>

#include "clickwitness/rng.hpp"

namespace clickwitness {

namespace {

// Domain tag keeping bootstrap substreams disjoint from the per-shot
// substreams derived from the same seed.
constexpr std::uint64_t kBootstrapDomain = 0x9d5c0ac4d9aa8d1dULL;

struct DistinctConfigurations {
    std::vector<ClickConfiguration> configs;
    std::vector<std::int64_t> counts;
};

DistinctConfigurations tally_records(const ShotRecords& records) {
    std::map<ClickConfiguration, std::int64_t> histogram;
    ClickConfiguration config;
    config.counts.resize(static_cast<std::size_t>(records.outcome_count()));
    for (std::int64_t i = 0; i < records.shot_count(); ++i) {
        std::fill(config.counts.begin(), config.counts.end(), 0);
        for (std::uint8_t outcome : records.shot(i)) ++config.counts[outcome];
        ++histogram[config];
    }
    DistinctConfigurations result;
    result.configs.reserve(histogram.size());
    result.counts.reserve(histogram.size());
    for (auto& [cfg, count] : histogram) {
        result.configs.push_back(cfg);
        result.counts.push_back(count);
    }
    return result;
}

// Witness from a weighted set of configurations, without materializing a
// ClickStatistics table; `weights` must sum to 1.
WitnessReport weighted_witness(const std::vector<ClickConfiguration>& configs,
                               const std::vector<double>& weights, int n_detectors,
                               int outcome_count) {
    Eigen::VectorXd means = Eigen::VectorXd::Zero(outcome_count);
    Eigen::MatrixXd second = Eigen::MatrixXd::Zero(outcome_count, outcome_count);
    for (std::size_t j = 0; j < configs.size(); ++j) {
        double w = weights[j];
        if (w == 0.0) continue;
        const auto& counts = configs[j].counts;
        for (int k = 0; k < outcome_count; ++k) {
            double ck = static_cast<double>(counts[static_cast<std::size_t>(k)]);
            means(k) += w * ck;
            for (int l = k; l < outcome_count; ++l) {
                second(k, l) += w * ck * counts[static_cast<std::size_t>(l)];
            }
        }
    }
    for (int k = 0; k < outcome_count; ++k) {
        for (int l = 0; l < k; ++l) second(k, l) = second(l, k);
    }
    Eigen::MatrixXd covariances = second - means * means.transpose();
    return build_witness_matrix(means, covariances, n_detectors);
}

double interpolated_quantile(const std::vector<double>& sorted, double q) {
    double pos = q * static_cast<double>(sorted.size() - 1);
    auto lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= sorted.size()) return sorted.back();
    double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

} // namespace

ShotRecords::ShotRecords(int detector_count, int outcome_count,
                         std::vector<std::uint8_t> outcomes, std::optional<std::int64_t> seed)
    : detector_count_(detector_count),
      outcome_count_(outcome_count),
      outcomes_(std::move(outcomes)),
      seed_(seed) {
    if (detector_count_ < 2) throw ValidationError("ShotRecords: need at least 2 detectors");
    if (outcome_count_ < 2 || outcome_count_ > 256) {
        throw ValidationError("ShotRecords: outcome count must lie in 2..256");
    }
    if (outcomes_.empty() || outcomes_.size() % static_cast<std::size_t>(detector_count_) != 0) {
        throw ValidationError("ShotRecords: outcome data is not a whole number of shots");
    }
    for (std::size_t i = 0; i < outcomes_.size(); ++i) {
        if (outcomes_[i] >= outcome_count_) {
            std::ostringstream msg;
            msg << "ShotRecords: shot " << i / static_cast<std::size_t>(detector_count_)
                << " has outcome " << static_cast<int>(outcomes_[i]) << " outside 0.."
                << outcome_count_ - 1;
            throw ValidationError(msg.str());
        }
    }
}

ShotRecords sample_records(const ClickStatistics& stats, std::int64_t shots, std::int64_t seed) {
    if (shots < 1) throw ValidationError("sample_records: need at least 1 shot");
    int n = stats.detector_count();
    int outcome_count = stats.outcome_count();

    // Cumulative weights plus, per configuration, the outcome multiset to
    // scatter over detector labels.
    std::vector<double> cumulative;
    std::vector<std::vector<std::uint8_t>> pools;
    cumulative.reserve(stats.table().size());
    pools.reserve(stats.table().size());
    double acc = 0.0;
    for (const auto& [config, prob] : stats.table()) {
        acc += prob;
        cumulative.push_back(acc);
        std::vector<std::uint8_t> pool;
        pool.reserve(static_cast<std::size_t>(n));
        for (int k = 0; k < outcome_count; ++k) {
            pool.insert(pool.end(), static_cast<std::size_t>(config.counts[static_cast<std::size_t>(k)]),
                        static_cast<std::uint8_t>(k));
        }
        pools.push_back(std::move(pool));
    }

    std::vector<std::uint8_t> outcomes(static_cast<std::size_t>(shots * n));
    std::vector<std::uint8_t> pool;
    for (std::int64_t shot = 0; shot < shots; ++shot) {
        SplitMix64 gen(substream_seed(static_cast<std::uint64_t>(seed),
                                      static_cast<std::uint64_t>(shot)));
        double u = gen.next_unit();
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        std::size_t index = std::min(static_cast<std::size_t>(it - cumulative.begin()),
                                     cumulative.size() - 1);
        pool = pools[index];
        // Fisher-Yates: uniformly random assignment of outcomes to labels.
        for (std::size_t i = pool.size() - 1; i > 0; --i) {
            std::size_t j = static_cast<std::size_t>(gen.next_below(i + 1));
            std::swap(pool[i], pool[j]);
        }
        std::copy(pool.begin(), pool.end(),
                  outcomes.begin() + static_cast<std::ptrdiff_t>(shot * n));
    }
    return ShotRecords(n, outcome_count, std::move(outcomes), seed);
}

ClickStatistics configurations_from_records(const ShotRecords& records) {
    auto distinct = tally_records(records);
    double total = static_cast<double>(records.shot_count());
    ClickStatistics::Table table;
    for (std::size_t j = 0; j < distinct.configs.size(); ++j) {
        table.emplace(distinct.configs[j], static_cast<double>(distinct.counts[j]) / total);
    }
    return ClickStatistics(records.detector_count(), records.outcome_count(), std::move(table));
}

EstimatedWitness estimate_witness(const ShotRecords& records, int bootstrap_resamples,
                                  double confidence, std::optional<std::int64_t> bootstrap_seed) {
    std::int64_t shots = records.shot_count();
    if (shots < 2) throw ValidationError("estimate_witness: need at least 2 shots");
    if (bootstrap_resamples < 2) {
        throw ValidationError("estimate_witness: need at least 2 bootstrap resamples");
    }
    if (!(confidence > 0.0 && confidence < 1.0)) {
        throw ValidationError("estimate_witness: confidence must lie in (0,1)");
    }

    auto distinct = tally_records(records);
    int n = records.detector_count();
    int outcome_count = records.outcome_count();

    std::vector<double> weights(distinct.counts.size());
    for (std::size_t j = 0; j < weights.size(); ++j) {
        weights[j] = static_cast<double>(distinct.counts[j]) / static_cast<double>(shots);
    }
    WitnessReport report = weighted_witness(distinct.configs, weights, n, outcome_count);
    double point = report.min_eigenvalue;

    // Resampling shots with replacement is a multinomial redraw of the
    // distinct-configuration counts, which costs O(distinct) per replicate
    // instead of O(shots).
    std::vector<double> count_weights(distinct.counts.begin(), distinct.counts.end());
    std::uint64_t seed = static_cast<std::uint64_t>(
                             bootstrap_seed ? *bootstrap_seed : records.seed().value_or(0)) ^
                         kBootstrapDomain;
    std::vector<double> replicates(static_cast<std::size_t>(bootstrap_resamples));
    std::vector<double> resample_weights(weights.size());
    for (int b = 0; b < bootstrap_resamples; ++b) {
        SplitMix64 gen(substream_seed(seed, static_cast<std::uint64_t>(b)));
        auto drawn = sample_multinomial(gen, shots, count_weights);
        for (std::size_t j = 0; j < resample_weights.size(); ++j) {
            resample_weights[j] = static_cast<double>(drawn[j]) / static_cast<double>(shots);
        }
        replicates[static_cast<std::size_t>(b)] =
            weighted_witness(distinct.configs, resample_weights, n, outcome_count)
                .min_eigenvalue;
    }

    double mean = 0.0;
    for (double r : replicates) mean += r;
    mean /= static_cast<double>(replicates.size());
    double var = 0.0;
    for (double r : replicates) var += (r - mean) * (r - mean);
    var /= static_cast<double>(replicates.size() - 1);
    report.min_eigenvalue_stderr = std::sqrt(var);

    // Basic (reflected) bootstrap interval: 2*point - upper/lower percentile.
    // The percentile interval is miscalibrated here because the minimal
    // eigenvalue is a downward-biased statistic near the classical boundary
    // (M always has an exact zero mode), and reflection corrects the bias
    // direction; see the estimator calibration tests.
    std::sort(replicates.begin(), replicates.end());
    double alpha = 1.0 - confidence;
    double q_low = interpolated_quantile(replicates, alpha / 2.0);
    double q_high = interpolated_quantile(replicates, 1.0 - alpha / 2.0);
    double ci_low = 2.0 * point - q_high;
    double ci_high = 2.0 * point - q_low;
    ci_low = std::min(ci_low, point);
    ci_high = std::max(ci_high, point);

    report.verdict = ci_high < -kVerdictMargin ? Verdict::nonclassical
                                               : Verdict::consistent_with_classical;

    EstimatedWitness estimate;
    estimate.report = std::move(report);
    estimate.shot_count = shots;
    estimate.bootstrap_resamples = bootstrap_resamples;
    estimate.confidence = confidence;
    estimate.ci_low = ci_low;
    estimate.ci_high = ci_high;
    return estimate;
}

double splitting_systematics(const PhotonStatistics& state, const DetectorResponse& response,
                             int n_detectors, double imbalance, double tail_tol) {
    if (n_detectors < 2) throw ValidationError("splitting_systematics: need at least 2 arms");
    if (!(imbalance >= 0.0) || !std::isfinite(imbalance)) {
        throw ValidationError("splitting_systematics: imbalance must be finite and >= 0");
    }
    if (imbalance >= 1.0 / static_cast<double>(n_detectors)) {
        throw ValidationError("splitting_systematics: imbalance must stay below 1/N");
    }

    auto min_eigenvalue_for = [&](const SplittingTree& tree) {
        auto stats = click_statistics_from_state(state, tree, response, tail_tol);
        auto moments = statistics_moments(stats);
        return build_witness_matrix(moments.means, moments.covariances, n_detectors)
            .min_eigenvalue;
    };

    double balanced = min_eigenvalue_for(SplittingTree::uniform(n_detectors));
    if (imbalance == 0.0) return 0.0;

    // Exhaust sign patterns in {-1,0,+1}^N with zero sum so the perturbed
    // ratios still sum to one; take the worst absolute shift.
    double worst = 0.0;
    std::vector<int> signs(static_cast<std::size_t>(n_detectors), 0);
    auto visit = [&](auto&& self, int arm, int sum, bool any) -> void {
        if (arm == n_detectors) {
            if (sum != 0 || !any) return;
            std::vector<double> ratios(static_cast<std::size_t>(n_detectors));
            for (int i = 0; i < n_detectors; ++i) {
                ratios[static_cast<std::size_t>(i)] =
                    1.0 / static_cast<double>(n_detectors) +
                    static_cast<double>(signs[static_cast<std::size_t>(i)]) * imbalance;
            }
            double shifted = min_eigenvalue_for(SplittingTree(std::move(ratios)));
            worst = std::max(worst, std::abs(shifted - balanced));
            return;
        }
        for (int s : {-1, 0, 1}) {
            signs[static_cast<std::size_t>(arm)] = s;
            self(self, arm + 1, sum + s, any || s != 0);
        }
    };
    visit(visit, 0, 0, false);
    return worst;
}

} // namespace clickwitness
