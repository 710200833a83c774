#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cimbi/model.hpp"
#include "cimbi/rng.hpp"
#include "cimbi/util.hpp"

// Discrete-time simulation of the jump SDE. Scheme choices:
//  - full-truncation explicit Euler for the square-root diffusion part
//    (coefficients evaluated at the positive part, clamp after the step);
//  - branching jumps by thinning against the window-start intensity bound;
//    own-type jumps are applied raw and compensated through the drift;
//  - optional state truncation at level m_trunc (coefficients and jump sizes
//    capped at m); m_trunc = inf reproduces the plain dynamics bit for bit;
//  - local step halving for stiff drift and inside the boundary layer, where
//    one full step's noise would overshoot zero.

namespace cimbi::engine {

struct PathConfig {
    double dt = 1e-3;
    double T = 1.0;
    double eps_hit = 1e-8;       // boundary threshold for hit detection
    double m_trunc = kInf;       // truncation level; inf = none
    int record_stride = 0;       // 0 = keep no samples; k = record every k-th window
    double substep_cap = 0.5;    // halve locally when |drift_i| * dt > cap * (1 + x_i)
    double noise_cap = 3.5;      // halve locally when noise sd * cap > x_i + eps_hit
    bool stop_at_hit = true;
    bool stop_at_extinct = false;

    friend bool operator==(const PathConfig&, const PathConfig&) = default;
};

struct PathResult {
    bool hit = false;
    double hit_time = std::numeric_limits<double>::quiet_NaN();
    std::vector<int> hit_face;  // coordinates at or below eps_hit at the hit time
    bool extinct = false;       // all coordinates at or below eps_hit at once
    double extinct_time = std::numeric_limits<double>::quiet_NaN();
    Vec final_state;
    double t_end = 0.0;
    bool nonfinite = false;       // overflow or NaN; path unusable past t_end
    bool exceeded_trunc = false;  // some coordinate exceeded m_trunc
    double sup_max = 0.0;         // running sup of max_i X_i
    double inf_min = kInf;        // running inf of min_i X_i
    std::uint64_t n_windows = 0;
    std::vector<std::pair<double, Vec>> samples;

    bool exploded() const { return nonfinite || exceeded_trunc; }
};

struct JumpEvent {
    double time;
    int source;  // -1 immigration, j >= 0 branching of type j
    Vec z;
};

namespace detail {
constexpr double kOverflowGuard = 1e12;
}  // namespace detail

inline void validate_config(const ModelSpec& spec, const PathConfig& cfg) {
    if (!(cfg.dt > 0.0)) throw std::invalid_argument("PathConfig: dt must be positive");
    if (!(cfg.T >= cfg.dt)) throw std::invalid_argument("PathConfig: need dt <= T");
    if (!(cfg.eps_hit > 0.0)) throw std::invalid_argument("PathConfig: eps_hit must be positive");
    if (!(cfg.m_trunc > 0.0)) throw std::invalid_argument("PathConfig: m_trunc must be positive");
    if (!(cfg.substep_cap > 0.0)) throw std::invalid_argument("PathConfig: substep_cap must be positive");
    for (double xi : spec.x0)
        if (!(cfg.eps_hit < xi)) throw std::invalid_argument("PathConfig: eps_hit must be below every x0 coordinate");
}

// One full-truncation Euler step. `dW` holds N(0, dt) increments. The drift
// includes the own-type jump compensator -x_i * int z_i mu_i(dz) because the
// jump part is applied uncompensated.
inline Vec step_diffusion(const Vec& state, const ModelSpec& spec, double dt, const Vec& dW, double m_trunc = kInf) {
    const int d = spec.d;
    Vec xt(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) xt[static_cast<std::size_t>(i)] = std::min(std::max(state[static_cast<std::size_t>(i)], 0.0), m_trunc);
    Vec out(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        double v = spec.eta[static_cast<std::size_t>(i)];
        double dot = 0.0;
        for (int j = 0; j < d; ++j) {
            v += spec.B(i, j) * xt[static_cast<std::size_t>(j)];
            dot += spec.C(i, j) * xt[static_cast<std::size_t>(j)];
        }
        v += xt[static_cast<std::size_t>(i)] * dot;
        v -= xt[static_cast<std::size_t>(i)] * own_jump_mean(spec, i);
        double x_new = state[static_cast<std::size_t>(i)] + v * dt +
                       std::sqrt(2.0 * spec.sigma[static_cast<std::size_t>(i)] * xt[static_cast<std::size_t>(i)]) *
                           dW[static_cast<std::size_t>(i)];
        out[static_cast<std::size_t>(i)] = x_new > 0.0 ? x_new : 0.0;
    }
    return out;
}

// Samples the accepted jump events of one window (t0, t0 + len]. Candidate
// intensities are frozen at the window-start state; acceptance levels compare
// against the jump-updated (not diffused) state, which biases by O(dt).
inline std::vector<JumpEvent> sample_jumps(const Vec& state, const ModelSpec& spec, double t0, double len,
                                           rng::RandomStream& stream, double m_trunc = kInf) {
    const int d = spec.d;
    struct Candidate {
        double time;
        int source;
        double level;  // thinning level, ignored for immigration
        int atom;
        std::uint64_t order;
    };
    std::vector<Candidate> cands;

    auto pick_atom = [&](const JumpMeasure& m, double total) {
        double u = stream.atom_uniform() * total;
        double acc = 0.0;
        for (std::size_t a = 0; a < m.atoms.size(); ++a) {
            acc += m.atoms[a].weight;
            if (u < acc) return static_cast<int>(a);
        }
        return static_cast<int>(m.atoms.size()) - 1;
    };

    std::uint64_t order = 0;
    if (!spec.nu.empty()) {
        double total = spec.nu.total_mass();
        std::uint64_t k = stream.poisson(total * len);
        for (std::uint64_t e = 0; e < k; ++e)
            cands.push_back({t0 + stream.uniform() * len, -1, 0.0, pick_atom(spec.nu, total), order++});
    }
    for (int j = 0; j < d; ++j) {
        const auto& mu_j = spec.mu[static_cast<std::size_t>(j)];
        if (mu_j.empty()) continue;
        double bound = std::min(std::max(state[static_cast<std::size_t>(j)], 0.0), m_trunc);
        if (!(bound > 0.0)) continue;
        double total = mu_j.total_mass();
        std::uint64_t k = stream.poisson(bound * total * len);
        for (std::uint64_t e = 0; e < k; ++e) {
            double time = t0 + stream.uniform() * len;
            double level = stream.uniform() * bound;
            cands.push_back({time, j, level, pick_atom(mu_j, total), order++});
        }
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        return a.time < b.time || (a.time == b.time && a.order < b.order);
    });

    std::vector<JumpEvent> events;
    Vec s = state;  // jump-updated acceptance state
    for (const auto& c : cands) {
        const JumpMeasure& m = c.source < 0 ? spec.nu : spec.mu[static_cast<std::size_t>(c.source)];
        bool accept = true;
        if (c.source >= 0) {
            double avail = std::min(std::max(s[static_cast<std::size_t>(c.source)], 0.0), m_trunc);
            accept = c.level <= avail;
        }
        if (!accept) continue;
        Vec z = m.atoms[static_cast<std::size_t>(c.atom)].z;
        for (double& zi : z) zi = std::min(zi, m_trunc);
        for (int i = 0; i < d; ++i) s[static_cast<std::size_t>(i)] += z[static_cast<std::size_t>(i)];
        events.push_back({c.time, c.source, std::move(z)});
    }
    return events;
}

namespace detail {

class PathRunner {
public:
    PathRunner(const ModelSpec& spec, const PathConfig& cfg, rng::RandomStream& stream)
        : spec_(spec), cfg_(cfg), stream_(stream), d_(spec.d) {
        m1_.resize(static_cast<std::size_t>(d_));
        for (int i = 0; i < d_; ++i) m1_[static_cast<std::size_t>(i)] = own_jump_mean(spec, i);
    }

    PathResult run() {
        state_ = spec_.x0;
        t_ = 0.0;
        res_ = PathResult{};
        res_.final_state = state_;
        observe(0.0);
        if (cfg_.record_stride > 0) res_.samples.emplace_back(0.0, state_);

        std::uint64_t window = 0;
        while (!stopped_ && t_ < cfg_.T - 1e-12 * cfg_.T) {
            double h = std::min(cfg_.dt, cfg_.T - t_);
            auto events = sample_jumps(state_, spec_, t_, h, stream_, cfg_.m_trunc);
            double cursor = t_;
            for (const auto& ev : events) {
                diffuse(cursor, ev.time);
                if (stopped_) break;
                for (int i = 0; i < d_; ++i) state_[static_cast<std::size_t>(i)] += ev.z[static_cast<std::size_t>(i)];
                observe(ev.time);
                if (stopped_) break;
            }
            if (!stopped_) diffuse(cursor, t_ + h);
            t_ = cursor;
            ++window;
            ++res_.n_windows;
            if (cfg_.record_stride > 0 && !stopped_ && window % static_cast<std::uint64_t>(cfg_.record_stride) == 0)
                res_.samples.emplace_back(t_, state_);
        }
        res_.final_state = state_;
        res_.t_end = now_;
        if (cfg_.record_stride > 0 && (res_.samples.empty() || res_.samples.back().first != now_))
            res_.samples.emplace_back(now_, state_);
        return res_;
    }

private:
    void observe(double now) {
        now_ = now;
        double mn = kInf, mx = 0.0;
        for (double xi : state_) {
            if (!std::isfinite(xi)) {
                res_.nonfinite = true;
                stopped_ = true;
                return;
            }
            mn = std::min(mn, xi);
            mx = std::max(mx, xi);
        }
        if (mx > kOverflowGuard) {
            res_.nonfinite = true;
            stopped_ = true;
            return;
        }
        res_.sup_max = std::max(res_.sup_max, mx);
        res_.inf_min = std::min(res_.inf_min, mn);
        if (mx > cfg_.m_trunc) res_.exceeded_trunc = true;
        if (!res_.hit && mn <= cfg_.eps_hit) {
            res_.hit = true;
            res_.hit_time = now;
            for (int i = 0; i < d_; ++i)
                if (state_[static_cast<std::size_t>(i)] <= cfg_.eps_hit) res_.hit_face.push_back(i);
            if (cfg_.stop_at_hit) stopped_ = true;
        }
        if (!res_.extinct && mx <= cfg_.eps_hit) {
            res_.extinct = true;
            res_.extinct_time = now;
            if (cfg_.stop_at_extinct) stopped_ = true;
        }
    }

    void drift_at(const Vec& x, Vec& out) const {
        for (int i = 0; i < d_; ++i) {
            double xi = std::min(std::max(x[static_cast<std::size_t>(i)], 0.0), cfg_.m_trunc);
            capped_[static_cast<std::size_t>(i)] = xi;
        }
        for (int i = 0; i < d_; ++i) {
            double v = spec_.eta[static_cast<std::size_t>(i)];
            double dot = 0.0;
            for (int j = 0; j < d_; ++j) {
                v += spec_.B(i, j) * capped_[static_cast<std::size_t>(j)];
                dot += spec_.C(i, j) * capped_[static_cast<std::size_t>(j)];
            }
            out[static_cast<std::size_t>(i)] =
                v + capped_[static_cast<std::size_t>(i)] * (dot - m1_[static_cast<std::size_t>(i)]);
        }
    }

    // The noise rule resolves the boundary layer so the first hit is detected
    // at eps_hit rather than at the dt-scale clamp floor; once the hit is on
    // record the rule is dropped, otherwise paths continuing past the hit
    // would crawl near zero at dt proportional to the state.
    bool needs_halving(const Vec& dr, double h) const {
        for (int i = 0; i < d_; ++i) {
            double xi = state_[static_cast<std::size_t>(i)];
            if (std::abs(dr[static_cast<std::size_t>(i)]) * h > cfg_.substep_cap * (1.0 + xi)) return true;
            if (res_.hit) continue;
            double var = 2.0 * spec_.sigma[static_cast<std::size_t>(i)] * capped_[static_cast<std::size_t>(i)] * h;
            double lim = (xi + cfg_.eps_hit) / cfg_.noise_cap;
            if (var > lim * lim) return true;
        }
        return false;
    }

    void diffuse(double& cursor, double target) {
        if (target <= cursor) return;
        segment(cursor, target - cursor, 0);
        if (!stopped_) cursor = target;
    }

    void segment(double start, double h, int depth) {
        if (stopped_) return;
        if (dr_.size() != static_cast<std::size_t>(d_)) {
            dr_.resize(static_cast<std::size_t>(d_));
            capped_.resize(static_cast<std::size_t>(d_));
        }
        drift_at(state_, dr_);
        if (depth < 48 && needs_halving(dr_, h)) {
            segment(start, h / 2.0, depth + 1);
            if (stopped_) return;
            segment(start + h / 2.0, h / 2.0, depth + 1);
            return;
        }
        double sq = std::sqrt(h);
        for (int i = 0; i < d_; ++i) {
            double diff = std::sqrt(2.0 * spec_.sigma[static_cast<std::size_t>(i)] * capped_[static_cast<std::size_t>(i)]);
            double x_new = state_[static_cast<std::size_t>(i)] + dr_[static_cast<std::size_t>(i)] * h +
                           diff * stream_.normal() * sq;
            state_[static_cast<std::size_t>(i)] = x_new > 0.0 ? x_new : 0.0;
        }
        observe(start + h);
    }

    const ModelSpec& spec_;
    const PathConfig& cfg_;
    rng::RandomStream& stream_;
    int d_;
    Vec m1_;
    Vec state_;
    mutable Vec capped_;
    Vec dr_;
    double t_ = 0.0;
    double now_ = 0.0;
    bool stopped_ = false;
    PathResult res_;
};

}  // namespace detail

// Simulates one trajectory. Deterministic given (spec, cfg, stream identity):
// every random draw is a pure function of the stream's (seed, path_id).
inline PathResult simulate_path(const ModelSpec& spec, const PathConfig& cfg, rng::RandomStream& stream) {
    validate_config(spec, cfg);
    detail::PathRunner runner(spec, cfg, stream);
    return runner.run();
}

// n independent paths with path ids 0..n-1. Results are ordered by path id
// and bit-identical for every thread count.
inline std::vector<PathResult> simulate_batch(const ModelSpec& spec, const PathConfig& cfg, std::uint64_t n_paths,
                                              std::uint64_t seed, int threads = 0) {
    validate_config(spec, cfg);
    return parallel_map<PathResult>(n_paths, threads, [&](std::uint64_t pid) {
        rng::RandomStream stream(seed, pid);
        detail::PathRunner runner(spec, cfg, stream);
        return runner.run();
    });
}

inline std::uint64_t count_exploded(const std::vector<PathResult>& rs) {
    std::uint64_t k = 0;
    for (const auto& r : rs)
        if (r.exploded()) ++k;
    return k;
}

}  // namespace cimbi::engine
