#include <doctest.h>

#include <cmath>
#include <random>

#include "cimbi/montecarlo.hpp"
#include "test_helpers.hpp"

using namespace cimbi;
using namespace cimbi::mc;
using testutil::d1_spec;
using testutil::d2_spec;

TEST_CASE("wilson interval basics and shrinkage") {
    auto [lo, hi] = wilson_interval(50, 100);
    CHECK(lo < 0.5);
    CHECK(hi > 0.5);
    auto [lo2, hi2] = wilson_interval(100, 200);
    CHECK(hi2 - lo2 < hi - lo);
    auto [l0, h0] = wilson_interval(0, 0);
    CHECK(l0 == 0.0);
    CHECK(h0 == 1.0);
    // the interval always contains the point estimate
    for (std::uint64_t n : std::vector<std::uint64_t>{10, 100, 5000})
        for (std::uint64_t k : std::vector<std::uint64_t>{0, 1, n / 2, n}) {
            auto [l, h] = wilson_interval(k, n);
            double p = static_cast<double>(k) / static_cast<double>(n);
            CHECK(l <= p);
            CHECK(h >= p);
        }
}

TEST_CASE("wilson interval coverage on synthetic Bernoulli data") {
    std::mt19937 gen(601);
    const double p = 0.3;
    const int n = 400, reps = 1000;
    std::binomial_distribution<int> binom(n, p);
    int covered = 0;
    for (int r = 0; r < reps; ++r) {
        int k = binom(gen);
        auto [lo, hi] = wilson_interval(static_cast<std::uint64_t>(k), n);
        if (lo <= p && p <= hi) ++covered;
    }
    double coverage = static_cast<double>(covered) / reps;
    CHECK(coverage >= 0.93);
    CHECK(coverage <= 0.97);
}

TEST_CASE("hit probability in the strong-immigration regime is tiny") {
    auto s = d2_spec({2.0, 2.0}, {1.0, 1.0}, {-1.0, 0.0, 0.0, -1.0}, {-1.0, -0.2, -0.2, -1.0});
    engine::PathConfig cfg;
    cfg.dt = 2e-3;
    cfg.T = 5.0;
    auto est = estimate_hit_probability(s, cfg, 500, 606, 2);
    CHECK(est.p_hat <= 0.01);
    CHECK(est.n == 500);
    CHECK(!est.unreliable);
}

TEST_CASE("doubling the sample count shrinks the interval like a square root") {
    auto s = d1_spec(0.3, 1.0, -1.0, -1.0, 0.5);
    engine::PathConfig cfg;
    cfg.dt = 2e-3;
    cfg.T = 3.0;
    auto a = estimate_hit_probability(s, cfg, 2000, 610, 2);
    auto b = estimate_hit_probability(s, cfg, 4000, 611, 2);
    double ratio = (b.ci_high - b.ci_low) / (a.ci_high - a.ci_low);
    CHECK(ratio > 0.7071 * 0.8);
    CHECK(ratio < 0.7071 * 1.2);
}

TEST_CASE("estimates are identical for every worker count") {
    auto s = d1_spec(0.3, 1.0, -1.0, -1.0, 0.5);
    engine::PathConfig cfg;
    cfg.dt = 2e-3;
    cfg.T = 3.0;
    auto a = estimate_hit_probability(s, cfg, 1000, 612, 1);
    auto b = estimate_hit_probability(s, cfg, 1000, 612, 3);
    CHECK(a.p_hat == b.p_hat);
    CHECK(a.ci_low == b.ci_low);
    CHECK(a.ci_high == b.ci_high);
    CHECK(a.config_digest == b.config_digest);
}

TEST_CASE("hitting time quantiles on a deterministic flow match the closed form") {
    auto s = d1_spec(0.0, 0.0, -1.0, 0.0, 1.0, false);  // x(t) = exp(-t)
    engine::PathConfig cfg;
    cfg.dt = 1e-3;
    cfg.T = 5.0;
    cfg.eps_hit = 0.1;
    auto stats = hitting_time_quantiles(s, cfg, 120, 613, {0.1, 0.5, 0.9}, 2);
    REQUIRE(!stats.withheld);
    CHECK(stats.hit_fraction == doctest::Approx(1.0));
    double expected = std::log(10.0);
    for (const auto& [q, t] : stats.quantiles) {
        (void)q;
        CHECK(t == doctest::Approx(expected).epsilon(5e-3));
    }
    // quantiles are non-decreasing in q
    for (std::size_t i = 1; i < stats.quantiles.size(); ++i)
        CHECK(stats.quantiles[i].second >= stats.quantiles[i - 1].second);
}

TEST_CASE("quantiles are withheld when few paths hit") {
    auto s = d1_spec(0.0, 0.0, -1.0, 0.0, 1.0, false);
    engine::PathConfig cfg;
    cfg.dt = 1e-3;
    cfg.T = 1.0;  // the flow needs ln(10) > 1 to reach the threshold
    cfg.eps_hit = 0.1;
    auto stats = hitting_time_quantiles(s, cfg, 150, 614, {0.5}, 2);
    CHECK(stats.withheld);
    CHECK(stats.n_hit == 0);
    CHECK(!stats.note.empty());
}

TEST_CASE("extinction estimator enforces zero immigration") {
    auto s = d1_spec(0.5, 1.0, -1.0, -1.0, 0.5);
    engine::PathConfig cfg;
    cfg.dt = 1e-3;
    cfg.T = 1.0;
    CHECK_THROWS_AS(extinction_probability(s, cfg, 10, 1, 1), std::invalid_argument);
    auto s2 = d1_spec(0.0, 1.0, -1.0, -1.0, 0.5);
    s2.nu.atoms.push_back({0.1, {1.0}});
    CHECK_THROWS_AS(extinction_probability(s2, cfg, 10, 1, 1), std::invalid_argument);
}

TEST_CASE("extinction probability grows toward one without immigration") {
    auto s = d1_spec(0.0, 1.0, -1.0, -1.0, 0.5);
    engine::PathConfig cfg;
    cfg.dt = 1e-3;
    cfg.T = 10.0;
    auto est = extinction_probability(s, cfg, 500, 615, 2);
    CHECK(est.p_hat >= 0.95);
}

TEST_CASE("bound34: the no-jump probability is the exact exponential") {
    auto s = d1_spec(0.3, 1.0, 0.2, -1.0, 1.0);
    s.nu.atoms.push_back({0.1, {1.0}});
    s.mu[0].atoms.push_back({0.2, {0.5}});
    engine::PathConfig cfg;
    cfg.dt = 1e-3;
    cfg.T = 1.0;
    auto b = hit_probability_lower_bound(s, cfg, 1.0, 10.0, 200, 616, 2);
    double expected = std::exp(-2.1);
    CHECK(std::abs(b.pB_exact - expected) <= 1e-12 * expected);
    CHECK(b.bound == doctest::Approx(b.pA.ci_low * b.pB_exact));
}

TEST_CASE("bound34 with empty measures reduces to the diffusion estimate") {
    auto s = d1_spec(0.2, 1.0, -1.0, -1.0, 0.5);
    engine::PathConfig cfg;
    cfg.dt = 1e-3;
    cfg.T = 5.0;
    auto b = hit_probability_lower_bound(s, cfg, 5.0, 10.0, 300, 617, 2);
    CHECK(b.pB_exact == 1.0);
    CHECK(b.bound == doctest::Approx(b.pA.ci_low));
    CHECK(b.pA.p_hat > 0.9);
}

TEST_CASE("bound34 preconditions") {
    auto s = d2_spec({0.2, 0.2}, {1.0, 1.0}, {-1.0, 0.5, 0.0, -1.0}, {-1.0, 0.0, 0.0, -1.0});
    engine::PathConfig cfg;
    cfg.dt = 1e-3;
    cfg.T = 1.0;
    CHECK_THROWS_AS(hit_probability_lower_bound(s, cfg, 1.0, 10.0, 10, 1, 1), std::invalid_argument);  // B off-diagonal
    auto s2 = d1_spec(0.2, 1.0, -1.0, -1.0, 0.5);
    CHECK_THROWS_AS(hit_probability_lower_bound(s2, cfg, 1.0, 0.4, 10, 1, 1), std::invalid_argument);  // M below x0
}

TEST_CASE("domination: identical dynamics give zero violations") {
    auto s = d2_spec({0.5, 0.5}, {1.0, 1.0}, {-1.0, 0.0, 0.0, -1.0}, {-1.0, 0.0, 0.0, -1.0});
    s.strict_interaction = true;
    engine::PathConfig cfg;
    cfg.dt = 1e-3;
    cfg.T = 2.0;
    auto st = comparison_domination_rate(s, cfg, 100, 618, -1.0, 2);
    CHECK(st.rate == 0.0);
    CHECK(st.n_excluded == 0);
}

TEST_CASE("domination with shared jumps stays within tolerance") {
    auto s = d2_spec({0.5, 0.5}, {1.0, 1.0}, {-1.0, 0.0, 0.0, -1.0}, {-1.0, -0.3, -0.3, -1.0});
    s.nu.atoms.push_back({0.2, {0.3, 0.1}});
    s.mu[0].atoms.push_back({0.4, {0.5, 0.0}});
    s.mu[1].atoms.push_back({0.4, {0.0, 0.5}});
    engine::PathConfig cfg;
    cfg.dt = 1e-3;
    cfg.T = 3.0;
    auto st = comparison_domination_rate(s, cfg, 200, 619, -1.0, 2);
    CHECK(st.rate <= 0.01);
    REQUIRE(st.per_coordinate_rate.size() == 2);
}

TEST_CASE("domination rejects non-competitive specs") {
    auto s = d2_spec({0.5, 0.5}, {1.0, 1.0}, {-1.0, 0.0, 0.0, -1.0}, {-1.0, 0.2, -0.3, -1.0});
    engine::PathConfig cfg;
    cfg.dt = 1e-3;
    cfg.T = 1.0;
    CHECK_THROWS_AS(comparison_domination_rate(s, cfg, 10, 1, -1.0, 1), std::invalid_argument);
}

TEST_CASE("adding cross-competition does not raise the first coordinate's mean") {
    auto base = d2_spec({0.5, 0.5}, {1.0, 1.0}, {-1.0, 0.0, 0.0, -1.0}, {-1.0, 0.0, 0.0, -1.0});
    auto cross = d2_spec({0.5, 0.5}, {1.0, 1.0}, {-1.0, 0.0, 0.0, -1.0}, {-1.0, -0.3, 0.0, -1.0});
    engine::PathConfig cfg;
    cfg.dt = 1e-3;
    cfg.T = 2.0;
    const std::uint64_t n = 5000;
    auto a = engine::simulate_batch(base, cfg, n, 620, 2);
    auto b = engine::simulate_batch(cross, cfg, n, 620, 2);
    double sum = 0.0, sumsq = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) {
        double diff = b[i].final_state[0] - a[i].final_state[0];  // coupled through the shared seed
        sum += diff;
        sumsq += diff * diff;
    }
    double mean = sum / static_cast<double>(n);
    double se = std::sqrt((sumsq / n - mean * mean) / static_cast<double>(n));
    CHECK(mean <= 3.0 * se);
}
