#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cimbi/conditions.hpp"
#include "cimbi/model.hpp"
#include "cimbi/rng.hpp"
#include "cimbi/sde_engine.hpp"
#include "cimbi/util.hpp"

// Proof machinery for the almost-sure attainment criterion, made executable:
// the square-root change of variables Z_i = 2 sqrt(X_i / (2 sigma_i)), the
// unit-noise comparison diffusion U that dominates Z before the hit time,
// and the drift bound A f <= k 1_{|x| <= r} for f(x) = 1 + sum x_i^2.

namespace cimbi::transform {

inline Vec lamperti_forward(const Vec& x, const Vec& sigma) {
    if (x.size() != sigma.size()) throw std::invalid_argument("lamperti_forward: size mismatch");
    Vec z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(sigma[i] > 0.0)) throw std::invalid_argument("lamperti_forward: sigma must be strictly positive");
        if (x[i] < 0.0) throw std::invalid_argument("lamperti_forward: state must be nonnegative");
        z[i] = 2.0 * std::sqrt(x[i] / (2.0 * sigma[i]));
    }
    return z;
}

inline Vec lamperti_inverse(const Vec& z, const Vec& sigma) {
    if (z.size() != sigma.size()) throw std::invalid_argument("lamperti_inverse: size mismatch");
    Vec x(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) x[i] = sigma[i] * z[i] * z[i] / 2.0;
    return x;
}

namespace detail {

inline void require_diffusion_shape(const ModelSpec& spec, const char* who) {
    if (!measures_empty(spec)) throw std::invalid_argument(std::string(who) + ": spec must have no jump measures");
    if (!spec.B.is_diagonal()) throw std::invalid_argument(std::string(who) + ": spec must have diagonal B");
    for (double s : spec.sigma)
        if (!(s > 0.0)) throw std::invalid_argument(std::string(who) + ": sigma must be strictly positive");
}

}  // namespace detail

// Drift of the comparison diffusion U (unit additive noise, whole space):
//   b_ii u_i / 2 + sum_j c_ij sigma_j u_i u_j^2 / 4.
inline Vec u_drift(const Vec& u, const ModelSpec& spec) {
    if (!spec.B.is_diagonal()) throw std::invalid_argument("u_drift: spec must have diagonal B");
    const int d = spec.d;
    Vec out(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        double quart = 0.0;
        for (int j = 0; j < d; ++j) {
            double uj = u[static_cast<std::size_t>(j)];
            quart += spec.C(i, j) * spec.sigma[static_cast<std::size_t>(j)] * uj * uj;
        }
        out[static_cast<std::size_t>(i)] =
            spec.B(i, i) * u[static_cast<std::size_t>(i)] / 2.0 + u[static_cast<std::size_t>(i)] * quart / 4.0;
    }
    return out;
}

// Drift of the transformed process Z on the open orthant:
//   eta_i / (sigma_i z_i) - 1 / (2 z_i) + b_ii z_i / 2 + sum_j c_ij sigma_j z_i z_j^2 / 4.
// Shares the polynomial part with u_drift so their difference is exactly the
// singular term.
inline Vec z_drift(const Vec& z, const ModelSpec& spec) {
    detail::require_diffusion_shape(spec, "z_drift");
    for (double zi : z)
        if (!(zi > 0.0)) throw std::invalid_argument("z_drift: z must be strictly positive");
    Vec out = u_drift(z, spec);
    for (int i = 0; i < spec.d; ++i) {
        double zi = z[static_cast<std::size_t>(i)];
        out[static_cast<std::size_t>(i)] +=
            spec.eta[static_cast<std::size_t>(i)] / (spec.sigma[static_cast<std::size_t>(i)] * zi) - 1.0 / (2.0 * zi);
    }
    return out;
}

// Generator of U applied to f(u) = 1 + sum u_i^2:
//   d + sum_i b_ii u_i^2 + sum_{ij} c_ij sigma_j u_i^2 u_j^2 / 2.
inline double kolmogorov_generator_f(const Vec& u, const ModelSpec& spec) {
    if (!spec.B.is_diagonal()) throw std::invalid_argument("kolmogorov_generator_f: spec must have diagonal B");
    const int d = spec.d;
    double v = static_cast<double>(d);
    for (int i = 0; i < d; ++i) {
        double ui2 = u[static_cast<std::size_t>(i)] * u[static_cast<std::size_t>(i)];
        v += spec.B(i, i) * ui2;
        double quart = 0.0;
        for (int j = 0; j < d; ++j) {
            double uj = u[static_cast<std::size_t>(j)];
            quart += spec.C(i, j) * spec.sigma[static_cast<std::size_t>(j)] * uj * uj;
        }
        v += ui2 * quart / 2.0;
    }
    return v;
}

struct DriftBound {
    double k = 0.0;                  // max of the generator over the grid on {|u| <= r}
    Vec argmax;
    conditions::TriState certified;  // Holds when a sufficient bound gives A f <= 0 outside radius r
    double r_certified = kInf;       // smallest radius certified by the sufficient bounds
};

// Grid maximum of the generator on the ball of radius r, plus a radial
// sufficient bound for nonpositivity outside a certified radius:
//  - if the symmetrized interaction-diffusion form is negative definite with
//    top eigenvalue -delta:  A f <= d + beta rho - delta rho^2 / (2 d),
//  - else if it is copositive-nonpositive on the orthant and all b_ii < 0:
//    A f <= d + beta rho,
// with rho = |u|^2 and beta = max_i b_ii.
inline DriftBound find_drift_bound(const ModelSpec& spec, double r, int grid) {
    if (!spec.B.is_diagonal()) throw std::invalid_argument("find_drift_bound: spec must have diagonal B");
    if (!(r > 0.0)) throw std::invalid_argument("find_drift_bound: r must be positive");
    const int d = spec.d;
    if (grid < 3) grid = 3;
    if ((grid & 1) == 0) ++grid;  // keep 0 on the grid
    while (grid > 3 && std::pow(static_cast<double>(grid), d) > 2e6) grid -= 2;

    DriftBound out;
    out.k = -kInf;
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    Vec u(static_cast<std::size_t>(d));
    for (;;) {
        double norm2 = 0.0;
        for (int i = 0; i < d; ++i) {
            u[static_cast<std::size_t>(i)] = -r + 2.0 * r * idx[static_cast<std::size_t>(i)] / (grid - 1);
            norm2 += u[static_cast<std::size_t>(i)] * u[static_cast<std::size_t>(i)];
        }
        if (norm2 <= r * r) {
            double v = kolmogorov_generator_f(u, spec);
            if (v > out.k) {
                out.k = v;
                out.argmax = u;
            }
        }
        int i = 0;
        while (i < d && ++idx[static_cast<std::size_t>(i)] == grid) {
            idx[static_cast<std::size_t>(i)] = 0;
            ++i;
        }
        if (i == d) break;
    }

    double beta = -kInf;
    for (int i = 0; i < d; ++i) beta = std::max(beta, spec.B(i, i));
    SquareMat M(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) M(i, j) = spec.C(i, j) * spec.sigma[static_cast<std::size_t>(j)];

    double r_cert = kInf;
    auto eig = eigen_sym(symmetrize(M));
    double lmax = eig.values.back();
    if (lmax < 0.0) {
        // largest root of d + beta rho - (delta / 2d) rho^2 = 0
        double a = -lmax / (2.0 * d);
        double rho = (beta + std::sqrt(beta * beta + 4.0 * a * d)) / (2.0 * a);
        r_cert = std::min(r_cert, std::sqrt(std::max(rho, 0.0)));
    }
    if (beta < 0.0) {
        conditions::TriState cop = conditions::is_copositive(negate(symmetrize(M)), 40);
        if (cop.value == conditions::Tri::Holds) r_cert = std::min(r_cert, std::sqrt(d / (-beta)));
    }
    out.r_certified = r_cert;
    out.certified = (r >= r_cert) ? conditions::tri_holds() : conditions::tri_unknown();
    return out;
}

struct ComparisonResult {
    std::uint64_t n_steps = 0;    // windows checked strictly before the hit time
    std::uint64_t violations = 0; // windows with Z_i > U_i + tol for some i
    double max_excess = 0.0;
    std::optional<double> hit_time_X;
    bool u_exploded = false;
};

inline double default_tol_cmp(double dt) { return 1e-6 + 3.0 * std::sqrt(dt); }

// Couples X (full-truncation Euler, then transformed to Z) with the Euler
// scheme for U, driving both with the same Gaussian increments, and counts
// the discrete violations of Z <= U before X hits the boundary. The
// continuous statement is exact; the discrete slack shrinks with dt.
inline ComparisonResult simulate_coupled_ZU(const ModelSpec& spec, const engine::PathConfig& cfg,
                                            rng::RandomStream& stream, double tol = -1.0) {
    detail::require_diffusion_shape(spec, "simulate_coupled_ZU");
    engine::validate_config(spec, cfg);
    if (tol < 0.0) tol = default_tol_cmp(cfg.dt);
    const int d = spec.d;

    Vec x = spec.x0;
    Vec uproc = lamperti_forward(x, spec.sigma);
    ComparisonResult res;

    Vec drx(static_cast<std::size_t>(d)), dru(static_cast<std::size_t>(d)), capped(static_cast<std::size_t>(d));
    double t = 0.0;
    bool stop = false;

    auto drift_x = [&](const Vec& s) {
        for (int i = 0; i < d; ++i) capped[static_cast<std::size_t>(i)] = std::max(s[static_cast<std::size_t>(i)], 0.0);
        for (int i = 0; i < d; ++i) {
            double v = spec.eta[static_cast<std::size_t>(i)] + spec.B(i, i) * capped[static_cast<std::size_t>(i)];
            double dot = 0.0;
            for (int j = 0; j < d; ++j) dot += spec.C(i, j) * capped[static_cast<std::size_t>(j)];
            drx[static_cast<std::size_t>(i)] = v + capped[static_cast<std::size_t>(i)] * dot;
        }
    };

    // shared segment integrator; one Gaussian per coordinate per segment
    auto segment = [&](auto&& self, double h, int depth) -> void {
        if (stop) return;
        drift_x(x);
        dru = u_drift(uproc, spec);
        bool halve = false;
        if (depth < 48) {
            for (int i = 0; i < d && !halve; ++i) {
                double xi = x[static_cast<std::size_t>(i)];
                if (std::abs(drx[static_cast<std::size_t>(i)]) * h > cfg.substep_cap * (1.0 + xi)) halve = true;
                if (std::abs(dru[static_cast<std::size_t>(i)]) * h >
                    cfg.substep_cap * (1.0 + std::abs(uproc[static_cast<std::size_t>(i)])))
                    halve = true;
                double var = 2.0 * spec.sigma[static_cast<std::size_t>(i)] * capped[static_cast<std::size_t>(i)] * h;
                double lim = (xi + cfg.eps_hit) / cfg.noise_cap;
                if (var > lim * lim) halve = true;
            }
        }
        if (halve) {
            self(self, h / 2.0, depth + 1);
            if (stop) return;
            self(self, h / 2.0, depth + 1);
            return;
        }
        double sq = std::sqrt(h);
        for (int i = 0; i < d; ++i) {
            double dw = stream.normal() * sq;
            double diff = std::sqrt(2.0 * spec.sigma[static_cast<std::size_t>(i)] * capped[static_cast<std::size_t>(i)]);
            double xn = x[static_cast<std::size_t>(i)] + drx[static_cast<std::size_t>(i)] * h + diff * dw;
            x[static_cast<std::size_t>(i)] = xn > 0.0 ? xn : 0.0;
            uproc[static_cast<std::size_t>(i)] += dru[static_cast<std::size_t>(i)] * h + dw;
        }
        for (int i = 0; i < d; ++i) {
            if (!std::isfinite(x[static_cast<std::size_t>(i)]) || !std::isfinite(uproc[static_cast<std::size_t>(i)]) ||
                std::abs(uproc[static_cast<std::size_t>(i)]) > 1e9) {
                res.u_exploded = true;
                stop = true;
                return;
            }
        }
        double mn = kInf;
        for (double xi : x) mn = std::min(mn, xi);
        if (mn <= cfg.eps_hit) {
            res.hit_time_X = t + h;  // approximate within the window
            stop = true;
        }
    };

    while (!stop && t < cfg.T - 1e-12 * cfg.T) {
        double h = std::min(cfg.dt, cfg.T - t);
        segment(segment, h, 0);
        t += h;
        if (stop) break;
        ++res.n_steps;
        Vec z = lamperti_forward(x, spec.sigma);
        bool violated = false;
        for (int i = 0; i < d; ++i) {
            double excess = z[static_cast<std::size_t>(i)] - uproc[static_cast<std::size_t>(i)];
            if (excess > res.max_excess) res.max_excess = excess;
            if (excess > tol) violated = true;
        }
        if (violated) ++res.violations;
    }
    return res;
}

struct ZUBatch {
    std::uint64_t n_paths = 0;
    std::uint64_t total_steps = 0;
    std::uint64_t violations = 0;
    double rate = 0.0;
    double max_excess = 0.0;
    std::uint64_t n_excluded = 0;  // paths dropped because U exploded
    std::uint64_t n_hit = 0;
    double tol = 0.0;
};

inline ZUBatch coupled_zu_batch(const ModelSpec& spec, const engine::PathConfig& cfg, std::uint64_t n,
                                std::uint64_t seed, double tol = -1.0, int threads = 0) {
    if (tol < 0.0) tol = default_tol_cmp(cfg.dt);
    auto results = parallel_map<ComparisonResult>(n, threads, [&](std::uint64_t pid) {
        rng::RandomStream stream(seed, pid);
        return simulate_coupled_ZU(spec, cfg, stream, tol);
    });
    ZUBatch agg;
    agg.n_paths = n;
    agg.tol = tol;
    for (const auto& r : results) {
        if (r.u_exploded) {
            ++agg.n_excluded;
            continue;
        }
        agg.total_steps += r.n_steps;
        agg.violations += r.violations;
        agg.max_excess = std::max(agg.max_excess, r.max_excess);
        if (r.hit_time_X) ++agg.n_hit;
    }
    agg.rate = agg.total_steps ? static_cast<double>(agg.violations) / static_cast<double>(agg.total_steps) : 0.0;
    return agg;
}

}  // namespace cimbi::transform
