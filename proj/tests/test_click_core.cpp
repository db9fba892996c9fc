#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "clickwitness/click_core.hpp"
#include "oracles.hpp"

using namespace clickwitness;

namespace {

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

ClassicalEnsemble random_ensemble(std::mt19937& gen, int max_components, int outcome_count) {
    std::uniform_int_distribution<int> count(1, max_components);
    int components = count(gen);
    auto weights = random_simplex(gen, components);
    std::vector<ClassicalEnsemble::Component> built;
    built.reserve(static_cast<std::size_t>(components));
    for (int j = 0; j < components; ++j) {
        built.push_back({weights[static_cast<std::size_t>(j)],
                         OutcomeProbabilities(random_simplex(gen, outcome_count))});
    }
    return ClassicalEnsemble(std::move(built));
}

WitnessReport witness_of(const ClickStatistics& stats) {
    auto moments = statistics_moments(stats);
    return build_witness_matrix(moments.means, moments.covariances, stats.detector_count());
}

} // namespace

TEST_CASE("configuration enumeration is complete, lexicographic, and sums to N") {
    for (int n = 2; n <= 5; ++n) {
        for (int outcome_count = 2; outcome_count <= 4; ++outcome_count) {
            auto configs = enumerate_configurations(n, outcome_count);
            // compositions of n into outcome_count parts
            double expected = oracles::binomial(n + outcome_count - 1, outcome_count - 1);
            CHECK(static_cast<double>(configs.size()) == expected);
            CHECK(std::is_sorted(configs.begin(), configs.end()));
            CHECK(std::adjacent_find(configs.begin(), configs.end()) == configs.end());
            for (const auto& config : configs) CHECK(config.total() == n);
        }
    }
}

TEST_CASE("multinomial pmf matches factorial oracle and sums to one") {
    std::mt19937 gen(11);
    for (int n = 2; n <= 5; ++n) {
        for (int outcome_count = 2; outcome_count <= 4; ++outcome_count) {
            OutcomeProbabilities p(random_simplex(gen, outcome_count));
            double sum = 0.0;
            for (const auto& config : enumerate_configurations(n, outcome_count)) {
                double pmf = multinomial_pmf(p, n, config);
                CHECK(pmf == doctest::Approx(oracles::multinomial_pmf(p.probs(), config))
                                 .epsilon(1e-12));
                sum += pmf;
            }
            CHECK(std::abs(sum - 1.0) < 1e-9);
        }
    }
}

TEST_CASE("multinomial pmf handles zero-probability bins") {
    OutcomeProbabilities p(std::vector<double>{0.0, 1.0});
    CHECK(multinomial_pmf(p, 2, ClickConfiguration{{0, 2}}) == doctest::Approx(1.0));
    CHECK(multinomial_pmf(p, 2, ClickConfiguration{{1, 1}}) == 0.0);
}

TEST_CASE("pure multinomial moments: mean N p_k, covariance N p_k (delta - p_l)") {
    std::mt19937 gen(12);
    for (int n : {2, 3, 4}) {
        auto probs = random_simplex(gen, 3);
        ClassicalEnsemble single({{1.0, OutcomeProbabilities(probs)}});
        auto moments = statistics_moments(mixture_click_statistics(single, n));
        for (int k = 0; k < 3; ++k) {
            CHECK(moments.means(k) == doctest::Approx(n * probs[static_cast<std::size_t>(k)])
                                          .epsilon(1e-9));
            for (int l = 0; l < 3; ++l) {
                double expected = n * probs[static_cast<std::size_t>(k)] *
                                  ((k == l ? 1.0 : 0.0) - probs[static_cast<std::size_t>(l)]);
                CHECK(moments.covariances(k, l) == doctest::Approx(expected).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("mixture moments match ensemble averages") {
    std::mt19937 gen(13);
    int n = 3;
    auto ensemble = random_ensemble(gen, 4, 3);
    auto moments = statistics_moments(mixture_click_statistics(ensemble, n));
    for (int k = 0; k < 3; ++k) {
        double mean_p = 0.0;
        for (const auto& component : ensemble.components()) {
            mean_p += component.weight * component.outcome_probs[k];
        }
        CHECK(moments.means(k) == doctest::Approx(n * mean_p).epsilon(1e-9));
        for (int l = 0; l < 3; ++l) {
            double mean_pk = 0.0, mean_pl = 0.0, mean_pkl = 0.0;
            for (const auto& component : ensemble.components()) {
                mean_pk += component.weight * component.outcome_probs[k];
                mean_pl += component.weight * component.outcome_probs[l];
                mean_pkl += component.weight * component.outcome_probs[k] *
                            component.outcome_probs[l];
            }
            double spread = mean_pkl - mean_pk * mean_pl;
            double expected =
                n * mean_pk * ((k == l ? 1.0 : 0.0) - mean_pl) + n * (n - 1) * spread;
            CHECK(moments.covariances(k, l) == doctest::Approx(expected).epsilon(1e-9));
        }
    }
}

TEST_CASE("mixture table matches tuple-enumeration oracle") {
    std::mt19937 gen(14);
    for (int trial = 0; trial < 10; ++trial) {
        int n = 2 + trial % 3;
        int outcome_count = 2 + trial % 3;
        auto ensemble = random_ensemble(gen, 4, outcome_count);
        std::vector<double> weights;
        std::vector<std::vector<double>> components;
        for (const auto& component : ensemble.components()) {
            weights.push_back(component.weight);
            components.push_back(component.outcome_probs.probs());
        }
        auto expected = oracles::mixture_table(weights, components, n);
        auto actual = mixture_click_statistics(ensemble, n).table();
        CHECK(oracles::table_distance(expected, actual) < 1e-12);
    }
}

TEST_CASE("classical ensembles never produce a negative witness eigenvalue") {
    std::mt19937 gen(15);
    std::uniform_int_distribution<int> n_dist(2, 4);
    std::uniform_int_distribution<int> k_dist(1, 7);
    for (int trial = 0; trial < 40; ++trial) {
        int n = n_dist(gen);
        int outcome_count = k_dist(gen) + 1;
        auto ensemble = random_ensemble(gen, 6, outcome_count);
        auto report = witness_of(mixture_click_statistics(ensemble, n));
        CHECK(report.min_eigenvalue >= -1e-9);
        CHECK(report.verdict == Verdict::consistent_with_classical);
    }
}

TEST_CASE("classical_bound_check: both routes agree and stay nonnegative") {
    std::mt19937 gen(16);
    for (int trial = 0; trial < 30; ++trial) {
        auto ensemble = random_ensemble(gen, 6, 2 + trial % 4);
        // throws if the table route and the direct spread route disagree
        auto report = classical_bound_check(ensemble, 2 + trial % 3);
        CHECK(report.min_eigenvalue >= -1e-9);
    }
}

TEST_CASE("witness matrix is invariant under permuting ensemble components") {
    std::mt19937 gen(17);
    auto ensemble = random_ensemble(gen, 5, 3);
    auto components = ensemble.components();
    std::vector<ClassicalEnsemble::Component> reversed(components.rbegin(), components.rend());
    auto report_a = witness_of(mixture_click_statistics(ensemble, 3));
    auto report_b =
        witness_of(mixture_click_statistics(ClassicalEnsemble(std::move(reversed)), 3));
    CHECK((report_a.matrix_m - report_b.matrix_m).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("single-component ensembles give an elementwise-zero witness matrix") {
    std::mt19937 gen(18);
    for (int trial = 0; trial < 10; ++trial) {
        ClassicalEnsemble single({{1.0, OutcomeProbabilities(random_simplex(gen, 4))}});
        auto report = witness_of(mixture_click_statistics(single, 2 + trial % 3));
        CHECK(report.matrix_m.cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("two-bin tables are binomial mixtures over the click count") {
    std::mt19937 gen(19);
    int n = 4;
    auto ensemble = random_ensemble(gen, 3, 2);
    auto stats = mixture_click_statistics(ensemble, n);
    for (int j = 0; j <= n; ++j) {
        double expected = 0.0;
        for (const auto& component : ensemble.components()) {
            expected +=
                component.weight * oracles::binomial_pmf(n, j, component.outcome_probs[1]);
        }
        CHECK(stats.probability(ClickConfiguration{{n - j, j}}) ==
              doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("witness report for the ideal single-photon table") {
    // Both photons never hit the same detector: the (1,1) configuration has
    // probability one.
    ClickStatistics::Table table;
    table.emplace(ClickConfiguration{{1, 1}}, 1.0);
    table.emplace(ClickConfiguration{{2, 0}}, 0.0);
    ClickStatistics stats(2, 2, std::move(table));
    auto report = witness_of(stats);
    CHECK(report.matrix_m(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(report.matrix_m(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(report.min_eigenvalue == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(report.eigenvalues(0) == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(report.eigenvalues(1) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(report.verdict == Verdict::nonclassical);
    CHECK(to_string(report.verdict) == "nonclassical");
}

TEST_CASE("eigenvalues are reported in ascending order") {
    std::mt19937 gen(20);
    auto ensemble = random_ensemble(gen, 4, 5);
    auto report = witness_of(mixture_click_statistics(ensemble, 3));
    CHECK(std::is_sorted(report.eigenvalues.begin(), report.eigenvalues.end()));
    CHECK(report.min_eigenvalue == report.eigenvalues(0));
}

TEST_CASE("validation rejects malformed inputs") {
    CHECK_THROWS_AS(OutcomeProbabilities(std::vector<double>{0.5}), ValidationError);
    CHECK_THROWS_AS(OutcomeProbabilities(std::vector<double>{0.7, 0.7}), ValidationError);
    CHECK_THROWS_AS(OutcomeProbabilities(std::vector<double>{-0.1, 1.1}), ValidationError);

    CHECK_THROWS_AS(ClassicalEnsemble({}), ValidationError);
    CHECK_THROWS_AS(
        ClassicalEnsemble({{0.5, OutcomeProbabilities(std::vector<double>{0.5, 0.5})}}),
        ValidationError);
    CHECK_THROWS_AS(
        ClassicalEnsemble({{0.5, OutcomeProbabilities(std::vector<double>{0.5, 0.5})},
                           {0.5, OutcomeProbabilities(std::vector<double>{0.3, 0.3, 0.4})}}),
        ValidationError);

    ClickStatistics::Table bad_total;
    bad_total.emplace(ClickConfiguration{{1, 2}}, 1.0);
    CHECK_THROWS_AS(ClickStatistics(2, 2, std::move(bad_total)), ValidationError);

    ClickStatistics::Table bad_sum;
    bad_sum.emplace(ClickConfiguration{{1, 1}}, 0.5);
    CHECK_THROWS_AS(ClickStatistics(2, 2, std::move(bad_sum)), ValidationError);

    ClickStatistics::Table negative;
    negative.emplace(ClickConfiguration{{1, 1}}, 1.5);
    negative.emplace(ClickConfiguration{{2, 0}}, -0.5);
    CHECK_THROWS_AS(ClickStatistics(2, 2, std::move(negative)), ValidationError);

    CHECK_THROWS_AS(enumerate_configurations(0, 2), ValidationError);
    CHECK_THROWS_AS(enumerate_configurations(2, 0), ValidationError);
}

TEST_CASE("absent configurations read as zero probability") {
    ClickStatistics::Table table;
    table.emplace(ClickConfiguration{{1, 1}}, 1.0);
    ClickStatistics stats(2, 2, std::move(table));
    CHECK(stats.probability(ClickConfiguration{{0, 2}}) == 0.0);
}
