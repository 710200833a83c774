#include <doctest.h>

#include <cmath>
#include <random>

#include "cimbi/transform.hpp"
#include "test_helpers.hpp"

using namespace cimbi;
using namespace cimbi::transform;
using testutil::d1_spec;
using testutil::d2_spec;

TEST_CASE("lamperti forward hand cases") {
    CHECK(lamperti_forward({2.0}, {1.0})[0] == doctest::Approx(2.0));
    CHECK(lamperti_forward({0.0}, {1.0})[0] == 0.0);
    // x_i = sigma_i / 2 maps to 1
    CHECK(lamperti_forward({0.35}, {0.7})[0] == doctest::Approx(1.0));
    CHECK_THROWS_AS(lamperti_forward({1.0}, {0.0}), std::invalid_argument);
}

TEST_CASE("lamperti inverse and round trip") {
    CHECK(lamperti_inverse({2.0}, {1.0})[0] == doctest::Approx(2.0));
    CHECK(lamperti_inverse({0.0}, {1.0})[0] == 0.0);
    std::mt19937 gen(303);
    std::uniform_real_distribution<double> ux(1e-6, 50.0), us(0.05, 5.0);
    for (int rep = 0; rep < 1000; ++rep) {
        Vec x{ux(gen), ux(gen)}, sig{us(gen), us(gen)};
        auto back = lamperti_inverse(lamperti_forward(x, sig), sig);
        for (int i = 0; i < 2; ++i)
            CHECK(std::abs(back[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(i)]) <=
                  1e-12 * x[static_cast<std::size_t>(i)]);
    }
}

TEST_CASE("z_drift hand cases") {
    // eta = sigma/2 cancels the singular part
    auto s = d1_spec(0.5, 1.0, -1.0, -2.0, 1.0);
    double z = 1.3;
    auto dr = z_drift({z}, s);
    CHECK(dr[0] == doctest::Approx(-1.0 * z / 2.0 + (-2.0) * 1.0 * z * z * z / 4.0));

    auto s2 = d1_spec(1.0, 1.0, 0.0, 0.0, 1.0, false);
    CHECK(z_drift({1.0}, s2)[0] == doctest::Approx(0.5));
    CHECK_THROWS_AS(z_drift({0.0}, s2), std::invalid_argument);
}

TEST_CASE("u_drift hand cases and relation to z_drift") {
    auto s = d2_spec({0.2, 0.2}, {1.0, 1.0}, {-1.0, 0.0, 0.0, -1.0}, {-1.0, 0.0, 0.0, -1.0});
    auto du = u_drift({0.0, 0.0}, s);
    CHECK(du[0] == 0.0);
    CHECK(du[1] == 0.0);
    auto du1 = u_drift({1.0, 1.0}, s);
    CHECK(du1[0] == doctest::Approx(-0.75));
    CHECK(du1[1] == doctest::Approx(-0.75));

    std::mt19937 gen(305);
    std::uniform_real_distribution<double> uz(0.1, 3.0);
    for (int rep = 0; rep < 1000; ++rep) {
        Vec z{uz(gen), uz(gen)};
        auto dz = z_drift(z, s);
        auto du2 = u_drift(z, s);
        for (int i = 0; i < 2; ++i) {
            double expected = s.eta[static_cast<std::size_t>(i)] /
                                  (s.sigma[static_cast<std::size_t>(i)] * z[static_cast<std::size_t>(i)]) -
                              1.0 / (2.0 * z[static_cast<std::size_t>(i)]);
            CHECK(std::abs(dz[static_cast<std::size_t>(i)] - du2[static_cast<std::size_t>(i)] - expected) <=
                  1e-12 * (1.0 + std::abs(expected)));
        }
    }
}

TEST_CASE("transformed drift matches a finite-difference weak estimate") {
    auto s = d1_spec(0.4, 1.0, -1.0, -1.0, 1.0);
    const double dt = 1e-4;
    const int n = 400000;
    std::mt19937 gen(307);
    std::normal_distribution<double> normal(0.0, std::sqrt(dt));
    for (double x : {0.6, 1.5}) {
        double z0 = lamperti_forward({x}, s.sigma)[0];
        double sum = 0.0, sumsq = 0.0;
        for (int k = 0; k < n; ++k) {
            auto x1 = engine::step_diffusion({x}, s, dt, {normal(gen)});
            double v = (lamperti_forward(x1, s.sigma)[0] - z0) / dt;
            sum += v;
            sumsq += v * v;
        }
        double mean = sum / n;
        double se = std::sqrt((sumsq / n - mean * mean) / n);
        double exact = z_drift({z0}, s)[0];
        CHECK(std::abs(mean - exact) <= 20.0 * dt + 3.0 * se);
    }
}

TEST_CASE("kolmogorov generator hand cases and symmetry") {
    auto s = d2_spec({0.2, 0.2}, {1.0, 1.0}, {-1.0, 0.0, 0.0, -1.0}, {-1.0, -0.2, -0.2, -1.0});
    CHECK(kolmogorov_generator_f({0.0, 0.0}, s) == doctest::Approx(2.0));

    auto s1 = d1_spec(0.2, 1.0, -1.0, -1.0, 1.0);
    CHECK(kolmogorov_generator_f({1.0}, s1) == doctest::Approx(-0.5));

    std::mt19937 gen(309);
    std::uniform_real_distribution<double> uz(-2.0, 2.0);
    for (int rep = 0; rep < 200; ++rep) {
        Vec u{uz(gen), uz(gen)};
        Vec flipped{-u[0], u[1]};
        CHECK(kolmogorov_generator_f(u, s) == doctest::Approx(kolmogorov_generator_f(flipped, s)).epsilon(1e-14));
    }
}

TEST_CASE("kolmogorov generator agrees with a finite-difference application") {
    auto s = d2_spec({0.2, 0.2}, {1.0, 1.0}, {-0.7, 0.0, 0.0, -1.3}, {-1.0, -0.4, -0.1, -0.8});
    std::mt19937 gen(311);
    std::uniform_real_distribution<double> uz(-1.5, 1.5);
    const double h = 1e-4;
    auto f = [](const Vec& u) {
        double v = 1.0;
        for (double ui : u) v += ui * ui;
        return v;
    };
    for (int rep = 0; rep < 100; ++rep) {
        Vec u{uz(gen), uz(gen)};
        auto dr = u_drift(u, s);
        double fd = 0.0;
        for (int i = 0; i < 2; ++i) {
            Vec up = u, dn = u;
            up[static_cast<std::size_t>(i)] += h;
            dn[static_cast<std::size_t>(i)] -= h;
            double grad = (f(up) - f(dn)) / (2.0 * h);
            double lap = (f(up) - 2.0 * f(u) + f(dn)) / (h * h);
            fd += dr[static_cast<std::size_t>(i)] * grad + 0.5 * lap;
        }
        CHECK(std::abs(fd - kolmogorov_generator_f(u, s)) <= 1e-6 * (1.0 + std::abs(fd)));
    }
}

TEST_CASE("find_drift_bound: negative-definite route reproduces the closed-form radius") {
    auto s = d1_spec(0.2, 1.0, -1.0, -1.0, 1.0);
    // generator value 1 - u^2 - u^4/2 vanishes at u^2 = sqrt(3) - 1
    double root = std::sqrt(std::sqrt(3.0) - 1.0);
    auto b = find_drift_bound(s, 3.0, 65);
    CHECK(b.k == doctest::Approx(1.0));
    CHECK(b.argmax[0] == doctest::Approx(0.0));
    CHECK(b.certified.value == conditions::Tri::Holds);
    CHECK(b.r_certified == doctest::Approx(root).epsilon(1e-12));

    auto small = find_drift_bound(s, 0.5, 65);  // below the certified radius
    CHECK(small.certified.value == conditions::Tri::Unknown);
}

TEST_CASE("find_drift_bound: copositive route with zero interaction") {
    auto s = d1_spec(0.2, 1.0, -1.0, 0.0, 1.0, false);
    auto b = find_drift_bound(s, 1.0, 65);
    CHECK(b.k == doctest::Approx(1.0));
    CHECK(b.r_certified == doctest::Approx(1.0));
    CHECK(b.certified.value == conditions::Tri::Holds);
}

TEST_CASE("find_drift_bound grid refinement never decreases k") {
    auto s = d2_spec({0.2, 0.2}, {1.0, 1.0}, {-1.0, 0.0, 0.0, -1.0}, {-1.0, -0.2, -0.2, -1.0});
    double prev = -kInf;
    for (int grid : {9, 17, 33, 65}) {
        auto b = find_drift_bound(s, 2.0, grid);
        CHECK(b.k >= prev - 1e-12);
        prev = b.k;
    }
}

TEST_CASE("coupled Z/U comparison on the benchmark") {
    auto s = d2_spec({0.1, 0.1}, {1.0, 1.0}, {-1.0, 0.0, 0.0, -1.0}, {-1.0, -0.2, -0.2, -1.0});
    engine::PathConfig cfg;
    cfg.dt = 1e-3;
    cfg.T = 5.0;
    auto base = coupled_zu_batch(s, cfg, 100, 2121, 1e-6, 2);
    CHECK(base.n_excluded == 0);
    CHECK(base.rate < 0.01);
    engine::PathConfig half = cfg;
    half.dt = 5e-4;
    auto fine = coupled_zu_batch(s, half, 100, 2121, 1e-6, 2);
    CHECK(fine.rate < base.rate);

    // borderline immigration eta = sigma/2: the singular drift gap vanishes,
    // so only the default sqrt(dt)-scaled tolerance absorbs the scheme noise
    auto s2 = d2_spec({0.5, 0.5}, {1.0, 1.0}, {-1.0, 0.0, 0.0, -1.0}, {-1.0, -0.2, -0.2, -1.0});
    auto border = coupled_zu_batch(s2, cfg, 100, 2122, -1.0, 2);
    CHECK(border.rate < 0.01);
}

TEST_CASE("coupled Z/U rejects non-diffusion specs") {
    auto s = d1_spec(0.2, 1.0, -1.0, -1.0, 0.5);
    s.mu[0].atoms.push_back({1.0, {1.0}});
    engine::PathConfig cfg;
    cfg.dt = 1e-3;
    cfg.T = 1.0;
    rng::RandomStream stream(1, 0);
    CHECK_THROWS_AS(simulate_coupled_ZU(s, cfg, stream), std::invalid_argument);
}
