#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cimbi/model.hpp"
#include "cimbi/rng.hpp"
#include "cimbi/sde_engine.hpp"
#include "cimbi/serialize.hpp"
#include "cimbi/util.hpp"

// Regime-verification estimators. Every estimator is a pure function of
// (spec, cfg, n, seed): path summaries are collected by path id and reduced
// in a fixed order, so results do not depend on the thread count. Exploded
// paths are excluded and counted, never silently dropped. All probabilities
// carry Wilson 95% intervals.

namespace cimbi::mc {

struct Estimate {
    double p_hat = 0.0;
    double ci_low = 0.0;
    double ci_high = 1.0;
    std::uint64_t n = 0;           // usable paths
    std::uint64_t n_excluded = 0;  // exploded paths
    bool unreliable = false;       // more than 1% of paths excluded
    std::string config_digest;
};

inline std::pair<double, double> wilson_interval(std::uint64_t k, std::uint64_t n) {
    if (n == 0) return {0.0, 1.0};
    const double z = 1.959963984540054;
    double nn = static_cast<double>(n);
    double p = static_cast<double>(k) / nn;
    double z2 = z * z;
    double denom = 1.0 + z2 / nn;
    double center = (p + z2 / (2.0 * nn)) / denom;
    double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    double lo = std::max(0.0, center - half);
    double hi = std::min(1.0, center + half);
    // roundoff must not push the bounds across the point estimate at 0 or n
    if (k == 0) lo = 0.0;
    if (k == n) hi = 1.0;
    return {lo, hi};
}

struct PathSummary {
    bool hit = false;
    double hit_time = 0.0;
    bool extinct = false;
    double extinct_time = 0.0;
    bool exceeded = false;
    bool nonfinite = false;
    double inf_min = kInf;
};

// Lean per-path summaries in path-id order; the building block of every
// estimator below.
inline std::vector<PathSummary> path_summaries(const ModelSpec& spec, const engine::PathConfig& cfg, std::uint64_t n,
                                               std::uint64_t seed, int threads = 0) {
    engine::validate_config(spec, cfg);
    return parallel_map<PathSummary>(n, threads, [&](std::uint64_t pid) {
        rng::RandomStream stream(seed, pid);
        auto r = engine::simulate_path(spec, cfg, stream);
        PathSummary s;
        s.hit = r.hit;
        s.hit_time = r.hit_time;
        s.extinct = r.extinct;
        s.extinct_time = r.extinct_time;
        s.exceeded = r.exceeded_trunc;
        s.nonfinite = r.nonfinite;
        s.inf_min = r.inf_min;
        return s;
    });
}

namespace detail {

inline Estimate make_estimate(std::uint64_t k, std::uint64_t usable, std::uint64_t excluded, std::string digest) {
    Estimate e;
    e.n = usable;
    e.n_excluded = excluded;
    e.p_hat = usable ? static_cast<double>(k) / static_cast<double>(usable) : 0.0;
    auto ci = wilson_interval(k, usable);
    e.ci_low = ci.first;
    e.ci_high = ci.second;
    e.unreliable = excluded * 100 > (usable + excluded);
    e.config_digest = std::move(digest);
    return e;
}

}  // namespace detail

// Fraction of paths whose minimum coordinate reaches eps_hit before T.
inline Estimate estimate_hit_probability(const ModelSpec& spec, const engine::PathConfig& cfg, std::uint64_t n,
                                         std::uint64_t seed, int threads = 0) {
    auto sums = path_summaries(spec, cfg, n, seed, threads);
    std::uint64_t hits = 0, excluded = 0;
    for (const auto& s : sums) {
        if (s.nonfinite || s.exceeded) {
            ++excluded;
            continue;
        }
        if (s.hit) ++hits;
    }
    return detail::make_estimate(hits, n - excluded, excluded, config_digest(spec, cfg, "hitprob", n, seed));
}

struct HitTimeStats {
    double hit_fraction = 0.0;
    std::uint64_t n_hit = 0;
    std::uint64_t n_excluded = 0;
    bool withheld = false;  // fewer than 100 hitting paths
    std::vector<std::pair<double, double>> quantiles;
    std::string note;
    std::string config_digest;
};

// Empirical quantiles of the hit time among hitting paths (linear
// interpolation of the order statistics).
inline HitTimeStats hitting_time_quantiles(const ModelSpec& spec, const engine::PathConfig& cfg, std::uint64_t n,
                                           std::uint64_t seed, const std::vector<double>& qs, int threads = 0) {
    auto sums = path_summaries(spec, cfg, n, seed, threads);
    HitTimeStats out;
    out.config_digest = config_digest(spec, cfg, "hittimes", n, seed);
    std::vector<double> times;
    std::uint64_t usable = 0;
    for (const auto& s : sums) {
        if (s.nonfinite || s.exceeded) {
            ++out.n_excluded;
            continue;
        }
        ++usable;
        if (s.hit) times.push_back(s.hit_time);
    }
    out.n_hit = times.size();
    out.hit_fraction = usable ? static_cast<double>(times.size()) / static_cast<double>(usable) : 0.0;
    if (times.size() < 100) {
        out.withheld = true;
        out.note = "fewer than 100 hitting paths; quantiles withheld";
        return out;
    }
    std::sort(times.begin(), times.end());
    for (double q : qs) {
        if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("hitting_time_quantiles: q must be in [0,1]");
        double pos = q * static_cast<double>(times.size() - 1);
        std::size_t lo = static_cast<std::size_t>(pos);
        std::size_t hi = std::min(lo + 1, times.size() - 1);
        double frac = pos - static_cast<double>(lo);
        out.quantiles.emplace_back(q, times[lo] * (1.0 - frac) + times[hi] * frac);
    }
    return out;
}

// Fraction of paths fully extinct (max coordinate at or below eps_hit) before
// T. Requires zero immigration: eta = 0 and an empty immigration measure.
inline Estimate extinction_probability(const ModelSpec& spec, const engine::PathConfig& cfg, std::uint64_t n,
                                       std::uint64_t seed, int threads = 0) {
    for (double e : spec.eta)
        if (e != 0.0) throw std::invalid_argument("extinction_probability: eta must be the zero vector");
    if (!spec.nu.empty()) throw std::invalid_argument("extinction_probability: immigration measure must be empty");
    engine::PathConfig cfg2 = cfg;
    cfg2.stop_at_hit = false;
    cfg2.stop_at_extinct = true;
    auto sums = path_summaries(spec, cfg2, n, seed, threads);
    std::uint64_t ext = 0, excluded = 0;
    for (const auto& s : sums) {
        if (s.nonfinite || s.exceeded) {
            ++excluded;
            continue;
        }
        if (s.extinct) ++ext;
    }
    return detail::make_estimate(ext, n - excluded, excluded, config_digest(spec, cfg2, "extinction", n, seed));
}

struct Bound34 {
    double bound = 0.0;    // pA.ci_low * pB_exact, a conservative lower bound
    Estimate pA;           // P(hit before T and sup-norm stays below M) for the compensated diffusion
    double pB_exact = 0.0; // exp(-T (nu_total + M sum_j mu_j_total)), the no-jump probability
    bool pB_underflow = false;
    double T = 0.0;
    double M = 0.0;
};

// Constructive lower bound for the hit probability of the jump model: the
// compensated diffusion (diagonal drift b_ii - int z_i mu_i(dz), jumps
// removed) must hit before T while staying below M, and independently no jump
// may occur; the probabilities multiply.
inline Bound34 hit_probability_lower_bound(const ModelSpec& spec, const engine::PathConfig& cfg, double T, double M,
                                           std::uint64_t n, std::uint64_t seed, int threads = 0) {
    if (!spec.B.is_diagonal()) throw std::invalid_argument("hit_probability_lower_bound: B must be diagonal");
    for (double s : spec.sigma)
        if (!(s > 0.0)) throw std::invalid_argument("hit_probability_lower_bound: sigma must be strictly positive");
    for (double xi : spec.x0)
        if (!(M > xi)) throw std::invalid_argument("hit_probability_lower_bound: need M > max_i x0_i");
    if (!(T > 0.0)) throw std::invalid_argument("hit_probability_lower_bound: T must be positive");

    ModelSpec mod = spec;
    for (int i = 0; i < spec.d; ++i) mod.B(i, i) = spec.B(i, i) - own_jump_mean(spec, i);
    mod.nu.atoms.clear();
    for (auto& m : mod.mu) m.atoms.clear();

    engine::PathConfig cfg2 = cfg;
    cfg2.T = T;
    cfg2.m_trunc = M;
    cfg2.stop_at_hit = false;
    cfg2.stop_at_extinct = false;

    auto sums = path_summaries(mod, cfg2, n, seed, threads);
    std::uint64_t good = 0, excluded = 0;
    for (const auto& s : sums) {
        if (s.nonfinite) {
            ++excluded;
            continue;
        }
        if (s.hit && !s.exceeded) ++good;  // exceeding M is event failure, not exclusion
    }

    Bound34 out;
    out.T = T;
    out.M = M;
    out.pA = detail::make_estimate(good, n - excluded, excluded, config_digest(mod, cfg2, "bound34", n, seed));
    double mu_total = 0.0;
    for (const auto& m : spec.mu) mu_total += m.total_mass();
    double expo = -T * (spec.nu.total_mass() + M * mu_total);
    out.pB_exact = std::exp(expo);
    if (out.pB_exact < 1e-300) {
        out.pB_exact = 0.0;
        out.pB_underflow = true;
    }
    out.bound = out.pA.ci_low * out.pB_exact;
    return out;
}

struct DominationStats {
    std::uint64_t n_paths = 0;
    std::uint64_t total_steps = 0;   // window ends checked, per path
    std::uint64_t violations = 0;    // (step, coordinate) pairs with X_i > Y_i + tol
    double rate = 0.0;               // violations / (total_steps * d)
    double max_excess = 0.0;
    std::vector<double> per_coordinate_rate;
    std::uint64_t n_excluded = 0;
    double tol = 0.0;
};

namespace detail {

struct XYPathOut {
    std::uint64_t steps = 0;
    std::vector<std::uint64_t> viol;
    double max_excess = 0.0;
    bool bad = false;
};

// Couples the full model X with the dominating per-type system Y (interaction
// reduced to its own-type term) through shared Gaussian increments and shared
// jump candidates; each system thins candidates against its own state.
inline XYPathOut coupled_xy_path(const ModelSpec& spec, const engine::PathConfig& cfg, rng::RandomStream& stream,
                                 double tol) {
    const int d = spec.d;
    const double m = cfg.m_trunc;
    XYPathOut out;
    out.viol.assign(static_cast<std::size_t>(d), 0);

    Vec x = spec.x0, y = spec.x0;
    Vec m1(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) m1[static_cast<std::size_t>(i)] = own_jump_mean(spec, i);

    Vec cx(static_cast<std::size_t>(d)), cy(static_cast<std::size_t>(d));
    Vec drx(static_cast<std::size_t>(d)), dry(static_cast<std::size_t>(d));

    auto drifts = [&] {
        for (int i = 0; i < d; ++i) {
            cx[static_cast<std::size_t>(i)] = std::min(std::max(x[static_cast<std::size_t>(i)], 0.0), m);
            cy[static_cast<std::size_t>(i)] = std::min(std::max(y[static_cast<std::size_t>(i)], 0.0), m);
        }
        for (int i = 0; i < d; ++i) {
            double vx = spec.eta[static_cast<std::size_t>(i)];
            double dot = 0.0;
            for (int j = 0; j < d; ++j) {
                vx += spec.B(i, j) * cx[static_cast<std::size_t>(j)];
                dot += spec.C(i, j) * cx[static_cast<std::size_t>(j)];
            }
            drx[static_cast<std::size_t>(i)] = vx + cx[static_cast<std::size_t>(i)] * (dot - m1[static_cast<std::size_t>(i)]);
            double cyi = cy[static_cast<std::size_t>(i)];
            dry[static_cast<std::size_t>(i)] = spec.eta[static_cast<std::size_t>(i)] + spec.B(i, i) * cyi +
                                               cyi * (spec.C(i, i) * cyi - m1[static_cast<std::size_t>(i)]);
        }
    };

    bool stop = false;
    bool touched = false;  // either system reached the eps layer; relax the noise rule after
    auto segment = [&](auto&& self, double h, int depth) -> void {
        if (stop) return;
        drifts();
        bool halve = false;
        if (depth < 48) {
            for (int i = 0; i < d && !halve; ++i) {
                double xi = x[static_cast<std::size_t>(i)], yi = y[static_cast<std::size_t>(i)];
                if (std::abs(drx[static_cast<std::size_t>(i)]) * h > cfg.substep_cap * (1.0 + xi)) halve = true;
                if (std::abs(dry[static_cast<std::size_t>(i)]) * h > cfg.substep_cap * (1.0 + yi)) halve = true;
                if (touched) continue;
                double sig = spec.sigma[static_cast<std::size_t>(i)];
                double vx = 2.0 * sig * cx[static_cast<std::size_t>(i)] * h;
                double limx = (xi + cfg.eps_hit) / cfg.noise_cap;
                if (vx > limx * limx) halve = true;
                double vy = 2.0 * sig * cy[static_cast<std::size_t>(i)] * h;
                double limy = (yi + cfg.eps_hit) / cfg.noise_cap;
                if (vy > limy * limy) halve = true;
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
            double sig = spec.sigma[static_cast<std::size_t>(i)];
            double xn = x[static_cast<std::size_t>(i)] + drx[static_cast<std::size_t>(i)] * h +
                        std::sqrt(2.0 * sig * cx[static_cast<std::size_t>(i)]) * dw;
            double yn = y[static_cast<std::size_t>(i)] + dry[static_cast<std::size_t>(i)] * h +
                        std::sqrt(2.0 * sig * cy[static_cast<std::size_t>(i)]) * dw;
            x[static_cast<std::size_t>(i)] = xn > 0.0 ? xn : 0.0;
            y[static_cast<std::size_t>(i)] = yn > 0.0 ? yn : 0.0;
            if (!std::isfinite(x[static_cast<std::size_t>(i)]) || !std::isfinite(y[static_cast<std::size_t>(i)]) ||
                x[static_cast<std::size_t>(i)] > 1e12 || y[static_cast<std::size_t>(i)] > 1e12) {
                out.bad = true;
                stop = true;
                return;
            }
            if (x[static_cast<std::size_t>(i)] <= cfg.eps_hit || y[static_cast<std::size_t>(i)] <= cfg.eps_hit)
                touched = true;
        }
    };

    struct Candidate {
        double time;
        int source;
        double level;
        int atom;
        std::uint64_t order;
    };

    double t = 0.0;
    while (!stop && t < cfg.T - 1e-12 * cfg.T) {
        double h = std::min(cfg.dt, cfg.T - t);

        std::vector<Candidate> cands;
        std::uint64_t order = 0;
        auto pick_atom = [&](const JumpMeasure& jm, double total) {
            double u = stream.atom_uniform() * total;
            double acc = 0.0;
            for (std::size_t a = 0; a < jm.atoms.size(); ++a) {
                acc += jm.atoms[a].weight;
                if (u < acc) return static_cast<int>(a);
            }
            return static_cast<int>(jm.atoms.size()) - 1;
        };
        if (!spec.nu.empty()) {
            double total = spec.nu.total_mass();
            std::uint64_t k = stream.poisson(total * h);
            for (std::uint64_t e = 0; e < k; ++e)
                cands.push_back({t + stream.uniform() * h, -1, 0.0, pick_atom(spec.nu, total), order++});
        }
        for (int j = 0; j < d; ++j) {
            const auto& mu_j = spec.mu[static_cast<std::size_t>(j)];
            if (mu_j.empty()) continue;
            double bound = std::min(std::max(std::max(x[static_cast<std::size_t>(j)], y[static_cast<std::size_t>(j)]), 0.0), m);
            if (!(bound > 0.0)) continue;
            double total = mu_j.total_mass();
            std::uint64_t k = stream.poisson(bound * total * h);
            for (std::uint64_t e = 0; e < k; ++e) {
                double time = t + stream.uniform() * h;
                double level = stream.uniform() * bound;
                cands.push_back({time, j, level, pick_atom(mu_j, total), order++});
            }
        }
        std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
            return a.time < b.time || (a.time == b.time && a.order < b.order);
        });

        // acceptance against jump-updated copies, engine convention
        Vec sx = x, sy = y;
        struct Applied {
            double time;
            Vec z;
            bool to_x;
            bool to_y;
        };
        std::vector<Applied> applied;
        for (const auto& c : cands) {
            const JumpMeasure& jm = c.source < 0 ? spec.nu : spec.mu[static_cast<std::size_t>(c.source)];
            bool ax = true, ay = true;
            if (c.source >= 0) {
                ax = c.level <= std::min(std::max(sx[static_cast<std::size_t>(c.source)], 0.0), m);
                ay = c.level <= std::min(std::max(sy[static_cast<std::size_t>(c.source)], 0.0), m);
            }
            if (!ax && !ay) continue;
            Vec z = jm.atoms[static_cast<std::size_t>(c.atom)].z;
            for (double& zi : z) zi = std::min(zi, m);
            for (int i = 0; i < d; ++i) {
                if (ax) sx[static_cast<std::size_t>(i)] += z[static_cast<std::size_t>(i)];
                if (ay) sy[static_cast<std::size_t>(i)] += z[static_cast<std::size_t>(i)];
            }
            applied.push_back({c.time, std::move(z), ax, ay});
        }

        double cursor = t;
        for (const auto& ev : applied) {
            if (ev.time > cursor) segment(segment, ev.time - cursor, 0);
            cursor = ev.time;
            if (stop) break;
            for (int i = 0; i < d; ++i) {
                if (ev.to_x) x[static_cast<std::size_t>(i)] += ev.z[static_cast<std::size_t>(i)];
                if (ev.to_y) y[static_cast<std::size_t>(i)] += ev.z[static_cast<std::size_t>(i)];
            }
        }
        if (!stop && t + h > cursor) segment(segment, t + h - cursor, 0);
        t += h;
        if (stop) break;

        ++out.steps;
        for (int i = 0; i < d; ++i) {
            double excess = x[static_cast<std::size_t>(i)] - y[static_cast<std::size_t>(i)];
            if (excess > out.max_excess) out.max_excess = excess;
            if (excess > tol) ++out.viol[static_cast<std::size_t>(i)];
        }
    }
    return out;
}

}  // namespace detail

// Discrete check of the per-type domination X_i <= Y_i for competitive
// interaction. Requires c_ij <= 0 off-diagonal.
inline DominationStats comparison_domination_rate(const ModelSpec& spec, const engine::PathConfig& cfg,
                                                  std::uint64_t n, std::uint64_t seed, double tol = -1.0,
                                                  int threads = 0) {
    for (int i = 0; i < spec.d; ++i)
        for (int j = 0; j < spec.d; ++j)
            if (i != j && spec.C(i, j) > 0.0)
                throw std::invalid_argument("comparison_domination_rate: spec must be competitive (c_ij <= 0)");
    engine::validate_config(spec, cfg);
    if (tol < 0.0) tol = 1e-6 + 3.0 * std::sqrt(cfg.dt);

    auto outs = parallel_map<detail::XYPathOut>(n, threads, [&](std::uint64_t pid) {
        rng::RandomStream stream(seed, pid);
        return detail::coupled_xy_path(spec, cfg, stream, tol);
    });

    DominationStats agg;
    agg.n_paths = n;
    agg.tol = tol;
    agg.per_coordinate_rate.assign(static_cast<std::size_t>(spec.d), 0.0);
    std::vector<std::uint64_t> per(static_cast<std::size_t>(spec.d), 0);
    for (const auto& o : outs) {
        if (o.bad) {
            ++agg.n_excluded;
            continue;
        }
        agg.total_steps += o.steps;
        agg.max_excess = std::max(agg.max_excess, o.max_excess);
        for (int i = 0; i < spec.d; ++i) {
            per[static_cast<std::size_t>(i)] += o.viol[static_cast<std::size_t>(i)];
            agg.violations += o.viol[static_cast<std::size_t>(i)];
        }
    }
    if (agg.total_steps > 0) {
        agg.rate = static_cast<double>(agg.violations) / (static_cast<double>(agg.total_steps) * spec.d);
        for (int i = 0; i < spec.d; ++i)
            agg.per_coordinate_rate[static_cast<std::size_t>(i)] =
                static_cast<double>(per[static_cast<std::size_t>(i)]) / static_cast<double>(agg.total_steps);
    }
    return agg;
}

}  // namespace cimbi::mc
