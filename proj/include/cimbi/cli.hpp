#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cimbi/config.hpp"
#include "cimbi/lyapunov.hpp"
#include "cimbi/montecarlo.hpp"
#include "cimbi/transform.hpp"

// Batch front door. Subcommands map one-to-one onto library operations:
//   validate classify simulate hitprob hittimes extinction bound34
//   compareZU compareY lyapunov cd1
// Outputs: fixed-column CSV per subcommand (plus plot-ready .dat files for
// sweeps), an optional summary.json, and an append-only JSONL run ledger.
// Exit codes: 0 ok, 1 config/schema error, 2 invariant or precondition
// violation, 3 numerical failure.

namespace cimbi::cli {

constexpr const char* kCodeVersion = "0.1.0";

struct RunOptions {
    std::string config_path;
    std::string out_dir = "out";
    bool json_summary = false;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::uint64_t> paths_override;
    int threads = 0;
};

struct RunOutcome {
    int exit_code = 0;
    std::map<std::string, std::string> files;  // name -> content
    nlohmann::ordered_json summary;
    std::string message;
};

namespace detail {

inline std::string bool_str(bool b) { return b ? "1" : "0"; }

inline std::string face_str(const std::vector<int>& face) {
    std::string s;
    for (std::size_t i = 0; i < face.size(); ++i) {
        if (i) s += ';';
        s += std::to_string(face[i]);
    }
    return s;
}

inline std::string iso_timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline nlohmann::ordered_json estimate_json(const mc::Estimate& e) {
    return {{"p_hat", e.p_hat},     {"ci_low", e.ci_low},           {"ci_high", e.ci_high},
            {"n", e.n},             {"n_excluded", e.n_excluded},   {"unreliable", e.unreliable},
            {"config_digest", e.config_digest}};
}

inline std::string estimate_csv(const char* what, const mc::Estimate& e, const engine::PathConfig& cfg,
                                std::uint64_t seed) {
    std::string csv = "p_hat,ci_low,ci_high,n,n_excluded,unreliable,T,dt,eps_hit,seed,config_digest\n";
    (void)what;
    csv += fmt_g17(e.p_hat) + "," + fmt_g17(e.ci_low) + "," + fmt_g17(e.ci_high) + "," + std::to_string(e.n) + "," +
           std::to_string(e.n_excluded) + "," + bool_str(e.unreliable) + "," + fmt_g17(cfg.T) + "," + fmt_g17(cfg.dt) +
           "," + fmt_g17(cfg.eps_hit) + "," + std::to_string(seed) + "," + e.config_digest + "\n";
    return csv;
}

inline std::string tri_detail(const conditions::TriState& t) {
    std::string s;
    if (t.witness_value) s += fmt_g17(*t.witness_value);
    if (t.witness) {
        s += " at (";
        for (std::size_t i = 0; i < t.witness->size(); ++i) {
            if (i) s += ' ';
            s += fmt_g17((*t.witness)[i]);
        }
        s += ")";
    }
    return s;
}

}  // namespace detail

// ----- subcommand runners -------------------------------------------------

inline RunOutcome run_validate(const config::ParsedConfig& pc) {
    RunOutcome out;
    auto rep = validate(pc.spec);
    std::string csv = "index,field,i,j,message\n";
    for (std::size_t k = 0; k < rep.size(); ++k)
        csv += std::to_string(k) + "," + rep[k].field + "," + std::to_string(rep[k].i) + "," + std::to_string(rep[k].j) +
               "," + rep[k].message + "\n";
    out.files["validate.csv"] = csv;
    out.summary = {{"violations", rep.size()}};
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& v : rep) arr.push_back({{"field", v.field}, {"i", v.i}, {"j", v.j}, {"message", v.message}});
    out.summary["details"] = arr;
    out.exit_code = rep.empty() ? 0 : 2;
    out.message = rep.empty() ? "spec valid" : std::to_string(rep.size()) + " violation(s)";
    return out;
}

inline RunOutcome run_classify(const config::ParsedConfig& pc) {
    RunOutcome out;
    auto R = conditions::classify(pc.spec, pc.exp.sign_mode, pc.exp.grid_depth);
    std::string csv = "theorem,verdict,check,status,detail\n";
    for (const auto& rep : R.per_theorem) {
        for (const auto& c : rep.checks)
            csv += rep.theorem + "," + conditions::to_string(rep.verdict) + "," + c.name + "," +
                   conditions::to_string(c.state.value) + "," + detail::tri_detail(c.state) + "\n";
        if (rep.checks.empty())
            csv += rep.theorem + "," + conditions::to_string(rep.verdict) + ",,,\n";
    }
    csv += std::string("aggregate,") + conditions::to_string(R.aggregate) + ",interaction regime," +
           to_string(R.regime) + ",\n";
    csv += std::string("aggregate,") + conditions::to_string(R.aggregate) + ",interaction sign condition (" +
           conditions::to_string(R.interaction_mode) + ")," + conditions::to_string(R.interaction_condition.value) +
           "," + detail::tri_detail(R.interaction_condition) + "\n";
    csv += std::string("aggregate,") + conditions::to_string(R.aggregate) + ",contradiction," +
           (R.contradiction ? "yes" : "no") + ",\n";
    out.files["classify.csv"] = csv;

    nlohmann::ordered_json per = nlohmann::ordered_json::array();
    for (const auto& rep : R.per_theorem) {
        nlohmann::ordered_json checks = nlohmann::ordered_json::array();
        for (const auto& c : rep.checks) checks.push_back({{"name", c.name}, {"status", conditions::to_string(c.state.value)}});
        per.push_back({{"theorem", rep.theorem},
                       {"verdict", conditions::to_string(rep.verdict)},
                       {"checks", checks},
                       {"notes", rep.notes}});
    }
    out.summary = {{"aggregate", conditions::to_string(R.aggregate)},
                   {"regime", to_string(R.regime)},
                   {"contradiction", R.contradiction},
                   {"interaction_mode", conditions::to_string(R.interaction_mode)},
                   {"interaction_condition", conditions::to_string(R.interaction_condition.value)},
                   {"per_theorem", per},
                   {"notes", R.notes}};
    out.message = std::string("aggregate verdict: ") + conditions::to_string(R.aggregate);
    return out;
}

inline RunOutcome run_simulate(const config::ParsedConfig& pc, std::uint64_t n, std::uint64_t seed, int threads) {
    RunOutcome out;
    auto results = engine::simulate_batch(pc.spec, pc.path, n, seed, threads);
    std::string csv = "path_id,hit,hit_time,hit_face,extinct,extinct_time,exploded,sup_max,inf_min";
    for (int i = 0; i < pc.spec.d; ++i) csv += ",final_" + std::to_string(i + 1);
    csv += "\n";
    std::string samples = "path_id,t";
    for (int i = 0; i < pc.spec.d; ++i) samples += ",x_" + std::to_string(i + 1);
    samples += "\n";
    std::uint64_t hits = 0, exploded = 0;
    for (std::uint64_t p = 0; p < results.size(); ++p) {
        const auto& r = results[p];
        if (r.hit) ++hits;
        if (r.exploded()) ++exploded;
        csv += std::to_string(p) + "," + detail::bool_str(r.hit) + "," + fmt_g17(r.hit_time) + "," +
               detail::face_str(r.hit_face) + "," + detail::bool_str(r.extinct) + "," + fmt_g17(r.extinct_time) + "," +
               detail::bool_str(r.exploded()) + "," + fmt_g17(r.sup_max) + "," + fmt_g17(r.inf_min);
        for (double x : r.final_state) csv += "," + fmt_g17(x);
        csv += "\n";
        for (const auto& [t, state] : r.samples) {
            samples += std::to_string(p) + "," + fmt_g17(t);
            for (double x : state) samples += "," + fmt_g17(x);
            samples += "\n";
        }
    }
    out.files["simulate.csv"] = csv;
    if (pc.path.record_stride > 0) out.files["samples.csv"] = samples;
    out.summary = {{"n", n},
                   {"hits", hits},
                   {"exploded", exploded},
                   {"hit_fraction", n ? static_cast<double>(hits) / static_cast<double>(n) : 0.0},
                   {"config_digest", config_digest(pc.spec, pc.path, "simulate", n, seed)}};
    out.message = "simulated " + std::to_string(n) + " paths, " + std::to_string(hits) + " hit";
    if (exploded * 100 > n) {
        out.exit_code = 3;
        out.message += " (exploded fraction above 1%)";
    }
    return out;
}

inline RunOutcome run_hitprob(const config::ParsedConfig& pc, std::uint64_t n, std::uint64_t seed, int threads) {
    RunOutcome out;
    auto est = mc::estimate_hit_probability(pc.spec, pc.path, n, seed, threads);
    out.files["hitprob.csv"] = detail::estimate_csv("hitprob", est, pc.path, seed);
    out.summary = detail::estimate_json(est);
    out.summary["T"] = pc.path.T;
    out.summary["dt"] = pc.path.dt;
    out.summary["eps_hit"] = pc.path.eps_hit;
    out.message = "p_hat = " + fmt_g17(est.p_hat) + "  ci = [" + fmt_g17(est.ci_low) + ", " + fmt_g17(est.ci_high) + "]";
    if (est.unreliable) out.exit_code = 3;

    if (!pc.exp.sweep_T.empty()) {
        engine::PathConfig cfg = pc.path;
        for (double t : pc.exp.sweep_T) cfg.T = std::max(cfg.T, t);
        auto sums = mc::path_summaries(pc.spec, cfg, n, seed, threads);
        std::string csv = "param,value,p_hat,ci_low,ci_high\n";
        std::string dat;
        for (double t : pc.exp.sweep_T) {
            std::uint64_t k = 0, usable = 0;
            for (const auto& s : sums) {
                if (s.nonfinite || s.exceeded) continue;
                ++usable;
                if (s.hit && s.hit_time <= t) ++k;
            }
            auto ci = mc::wilson_interval(k, usable);
            double p = usable ? static_cast<double>(k) / static_cast<double>(usable) : 0.0;
            csv += "T," + fmt_g17(t) + "," + fmt_g17(p) + "," + fmt_g17(ci.first) + "," + fmt_g17(ci.second) + "\n";
            dat += fmt_g17(t) + " " + fmt_g17(p) + "\n";
        }
        out.files["hitprob_sweep_T.csv"] = csv;
        out.files["hitprob_sweep_T.dat"] = dat;
    }
    if (!pc.exp.sweep_eps.empty()) {
        engine::PathConfig cfg = pc.path;
        cfg.stop_at_hit = false;
        for (double e : pc.exp.sweep_eps) cfg.eps_hit = std::min(cfg.eps_hit, e);
        auto sums = mc::path_summaries(pc.spec, cfg, n, seed, threads);
        std::string csv = "param,value,p_hat,ci_low,ci_high\n";
        std::string dat;
        for (double e : pc.exp.sweep_eps) {
            std::uint64_t k = 0, usable = 0;
            for (const auto& s : sums) {
                if (s.nonfinite || s.exceeded) continue;
                ++usable;
                if (s.inf_min <= e) ++k;
            }
            auto ci = mc::wilson_interval(k, usable);
            double p = usable ? static_cast<double>(k) / static_cast<double>(usable) : 0.0;
            csv += "eps_hit," + fmt_g17(e) + "," + fmt_g17(p) + "," + fmt_g17(ci.first) + "," + fmt_g17(ci.second) + "\n";
            dat += fmt_g17(e) + " " + fmt_g17(p) + "\n";
        }
        out.files["hitprob_sweep_eps.csv"] = csv;
        out.files["hitprob_sweep_eps.dat"] = dat;
    }
    return out;
}

inline RunOutcome run_hittimes(const config::ParsedConfig& pc, std::uint64_t n, std::uint64_t seed, int threads) {
    RunOutcome out;
    auto stats = mc::hitting_time_quantiles(pc.spec, pc.path, n, seed, pc.exp.qs, threads);
    std::string csv = "stat,q,value\n";
    csv += "hit_fraction,," + fmt_g17(stats.hit_fraction) + "\n";
    csv += "n_hit,," + std::to_string(stats.n_hit) + "\n";
    csv += "n_excluded,," + std::to_string(stats.n_excluded) + "\n";
    csv += std::string("withheld,,") + detail::bool_str(stats.withheld) + "\n";
    for (const auto& [q, t] : stats.quantiles) csv += "quantile," + fmt_g17(q) + "," + fmt_g17(t) + "\n";
    out.files["hittimes.csv"] = csv;
    nlohmann::ordered_json qj = nlohmann::ordered_json::array();
    for (const auto& [q, t] : stats.quantiles) qj.push_back({{"q", q}, {"t", t}});
    out.summary = {{"hit_fraction", stats.hit_fraction}, {"n_hit", stats.n_hit},
                   {"withheld", stats.withheld},         {"note", stats.note},
                   {"quantiles", qj},                    {"config_digest", stats.config_digest}};
    out.message = stats.withheld ? "quantiles withheld: " + stats.note
                                 : "hit fraction " + fmt_g17(stats.hit_fraction) + " over " + std::to_string(n) + " paths";
    return out;
}

inline RunOutcome run_extinction(const config::ParsedConfig& pc, std::uint64_t n, std::uint64_t seed, int threads) {
    RunOutcome out;
    auto est = mc::extinction_probability(pc.spec, pc.path, n, seed, threads);
    out.files["extinction.csv"] = detail::estimate_csv("extinction", est, pc.path, seed);
    out.summary = detail::estimate_json(est);
    out.summary["T"] = pc.path.T;
    out.message = "extinction p_hat = " + fmt_g17(est.p_hat);
    if (est.unreliable) out.exit_code = 3;

    if (!pc.exp.sweep_T.empty()) {
        engine::PathConfig cfg = pc.path;
        cfg.stop_at_hit = false;
        cfg.stop_at_extinct = true;
        for (double t : pc.exp.sweep_T) cfg.T = std::max(cfg.T, t);
        auto sums = mc::path_summaries(pc.spec, cfg, n, seed, threads);
        std::string csv = "param,value,p_hat,ci_low,ci_high\n";
        std::string dat;
        for (double t : pc.exp.sweep_T) {
            std::uint64_t k = 0, usable = 0;
            for (const auto& s : sums) {
                if (s.nonfinite || s.exceeded) continue;
                ++usable;
                if (s.extinct && s.extinct_time <= t) ++k;
            }
            auto ci = mc::wilson_interval(k, usable);
            double p = usable ? static_cast<double>(k) / static_cast<double>(usable) : 0.0;
            csv += "T," + fmt_g17(t) + "," + fmt_g17(p) + "," + fmt_g17(ci.first) + "," + fmt_g17(ci.second) + "\n";
            dat += fmt_g17(t) + " " + fmt_g17(p) + "\n";
        }
        out.files["extinction_sweep_T.csv"] = csv;
        out.files["extinction_sweep_T.dat"] = dat;
    }
    return out;
}

inline RunOutcome run_bound34(const config::ParsedConfig& pc, std::uint64_t n, std::uint64_t seed, int threads) {
    RunOutcome out;
    double T = pc.exp.bound_T > 0.0 ? pc.exp.bound_T : pc.path.T;
    double xmax = 0.0;
    for (double x : pc.spec.x0) xmax = std::max(xmax, x);
    double M = pc.exp.bound_M > 0.0 ? pc.exp.bound_M : 10.0 * std::max(1.0, xmax);
    auto b = mc::hit_probability_lower_bound(pc.spec, pc.path, T, M, n, seed, threads);
    std::string csv = "bound,pA_hat,pA_ci_low,pA_ci_high,pB_exact,pB_underflow,n,n_excluded,T,M,seed,config_digest\n";
    csv += fmt_g17(b.bound) + "," + fmt_g17(b.pA.p_hat) + "," + fmt_g17(b.pA.ci_low) + "," + fmt_g17(b.pA.ci_high) +
           "," + fmt_g17(b.pB_exact) + "," + detail::bool_str(b.pB_underflow) + "," + std::to_string(b.pA.n) + "," +
           std::to_string(b.pA.n_excluded) + "," + fmt_g17(b.T) + "," + fmt_g17(b.M) + "," + std::to_string(seed) +
           "," + b.pA.config_digest + "\n";
    out.files["bound34.csv"] = csv;
    out.summary = {{"bound", b.bound},       {"pA", detail::estimate_json(b.pA)}, {"pB_exact", b.pB_exact},
                   {"pB_underflow", b.pB_underflow}, {"T", b.T},                  {"M", b.M}};
    out.message = "lower bound " + fmt_g17(b.bound) + " (pA.ci_low " + fmt_g17(b.pA.ci_low) + " * pB " +
                  fmt_g17(b.pB_exact) + ")";
    if (b.pA.unreliable) out.exit_code = 3;
    return out;
}

inline RunOutcome run_compare_zu(const config::ParsedConfig& pc, std::uint64_t n, std::uint64_t seed, int threads) {
    RunOutcome out;
    auto zu = transform::coupled_zu_batch(pc.spec, pc.path, n, seed, pc.exp.tol_cmp, threads);
    std::string csv = "n_paths,total_steps,violations,rate,max_excess,n_hit,n_excluded,tol,dt,seed\n";
    csv += std::to_string(zu.n_paths) + "," + std::to_string(zu.total_steps) + "," + std::to_string(zu.violations) +
           "," + fmt_g17(zu.rate) + "," + fmt_g17(zu.max_excess) + "," + std::to_string(zu.n_hit) + "," +
           std::to_string(zu.n_excluded) + "," + fmt_g17(zu.tol) + "," + fmt_g17(pc.path.dt) + "," +
           std::to_string(seed) + "\n";
    out.files["comparezu.csv"] = csv;
    out.summary = {{"n_paths", zu.n_paths},   {"total_steps", zu.total_steps}, {"violations", zu.violations},
                   {"rate", zu.rate},         {"max_excess", zu.max_excess},   {"n_hit", zu.n_hit},
                   {"n_excluded", zu.n_excluded}, {"tol", zu.tol}};
    out.message = "Z<=U violation rate " + fmt_g17(zu.rate) + " over " + std::to_string(zu.total_steps) + " steps";
    if (zu.n_excluded * 100 > zu.n_paths) out.exit_code = 3;
    return out;
}

inline RunOutcome run_compare_y(const config::ParsedConfig& pc, std::uint64_t n, std::uint64_t seed, int threads) {
    RunOutcome out;
    auto st = mc::comparison_domination_rate(pc.spec, pc.path, n, seed, pc.exp.tol_cmp, threads);
    std::string csv = "n_paths,total_steps,violations,rate,max_excess,n_excluded,tol,dt,seed";
    for (int i = 0; i < pc.spec.d; ++i) csv += ",rate_" + std::to_string(i + 1);
    csv += "\n";
    csv += std::to_string(st.n_paths) + "," + std::to_string(st.total_steps) + "," + std::to_string(st.violations) +
           "," + fmt_g17(st.rate) + "," + fmt_g17(st.max_excess) + "," + std::to_string(st.n_excluded) + "," +
           fmt_g17(st.tol) + "," + fmt_g17(pc.path.dt) + "," + std::to_string(seed);
    for (double r : st.per_coordinate_rate) csv += "," + fmt_g17(r);
    csv += "\n";
    out.files["comparey.csv"] = csv;
    out.summary = {{"n_paths", st.n_paths},       {"total_steps", st.total_steps},
                   {"violations", st.violations}, {"rate", st.rate},
                   {"max_excess", st.max_excess}, {"n_excluded", st.n_excluded},
                   {"tol", st.tol},               {"per_coordinate_rate", st.per_coordinate_rate}};
    out.message = "X<=Y violation rate " + fmt_g17(st.rate);
    if (st.n_excluded * 100 > st.n_paths) out.exit_code = 3;
    return out;
}

inline RunOutcome run_lyapunov(const config::ParsedConfig& pc) {
    RunOutcome out;
    double xmax = 0.0;
    for (double x : pc.spec.x0) xmax = std::max(xmax, x);
    double m = pc.exp.lyap_m > 0.0 ? pc.exp.lyap_m : 10.0 * std::max(1.0, xmax);
    auto cert = lyap::find_domination_constant(pc.spec, m, pc.exp.lyap_grid);
    std::string csv = "m,K_m,grid_points,status,shell0,shell1,shell2";
    for (int i = 0; i < pc.spec.d; ++i) csv += ",worst_" + std::to_string(i + 1);
    csv += "\n";
    csv += fmt_g17(cert.m) + "," + fmt_g17(cert.K_m) + "," + std::to_string(cert.grid_points) + "," +
           conditions::to_string(cert.status.value) + "," + fmt_g17(cert.shell_max[0]) + "," +
           fmt_g17(cert.shell_max[1]) + "," + fmt_g17(cert.shell_max[2]);
    for (double x : cert.worst_ratio_point) csv += "," + fmt_g17(x);
    csv += "\n";
    out.files["lyapunov.csv"] = csv;
    out.summary = {{"m", cert.m},
                   {"K_m", cert.K_m},
                   {"grid_points", cert.grid_points},
                   {"status", conditions::to_string(cert.status.value)},
                   {"worst_ratio_point", cert.worst_ratio_point}};
    out.message = std::string("K_m = ") + fmt_g17(cert.K_m) + " (" + conditions::to_string(cert.status.value) + ")";
    return out;
}

inline RunOutcome run_cd1(const config::ParsedConfig& pc) {
    RunOutcome out;
    auto b = transform::find_drift_bound(pc.spec, pc.exp.cd1_r, pc.exp.cd1_grid);
    std::string csv = "r,k,certified,r_certified,grid";
    for (int i = 0; i < pc.spec.d; ++i) csv += ",argmax_" + std::to_string(i + 1);
    csv += "\n";
    csv += fmt_g17(pc.exp.cd1_r) + "," + fmt_g17(b.k) + "," + conditions::to_string(b.certified.value) + "," +
           fmt_g17(b.r_certified) + "," + std::to_string(pc.exp.cd1_grid);
    for (double x : b.argmax) csv += "," + fmt_g17(x);
    csv += "\n";
    out.files["cd1.csv"] = csv;
    out.summary = {{"r", pc.exp.cd1_r},
                   {"k", b.k},
                   {"certified", conditions::to_string(b.certified.value)},
                   {"r_certified", b.r_certified}};
    out.message = "k = " + fmt_g17(b.k) + ", certified " + conditions::to_string(b.certified.value) +
                  " (r_certified " + fmt_g17(b.r_certified) + ")";
    return out;
}

// ----- dispatcher ----------------------------------------------------------

inline int run_subcommand(const std::string& name, const RunOptions& opt) {
    auto started = std::chrono::steady_clock::now();
    auto parsed = config::parse_config_file(opt.config_path);
    if (auto* errs = std::get_if<std::vector<config::ParseError>>(&parsed)) {
        for (const auto& e : *errs) std::fprintf(stderr, "config error (line %d): %s\n", e.line, e.message.c_str());
        return 1;
    }
    config::ParsedConfig pc = std::get<config::ParsedConfig>(parsed);
    if (opt.seed_override) pc.exp.seed = *opt.seed_override;
    if (opt.paths_override) pc.exp.n_paths = *opt.paths_override;

    if (name != "validate") {
        auto rep = validate(pc.spec);
        if (!rep.empty()) {
            for (const auto& v : rep) std::fprintf(stderr, "invalid model: %s\n", v.message.c_str());
            return 2;
        }
    }

    RunOutcome out;
    try {
        if (name == "validate")
            out = run_validate(pc);
        else if (name == "classify")
            out = run_classify(pc);
        else if (name == "simulate")
            out = run_simulate(pc, pc.exp.n_paths, pc.exp.seed, opt.threads);
        else if (name == "hitprob")
            out = run_hitprob(pc, pc.exp.n_paths, pc.exp.seed, opt.threads);
        else if (name == "hittimes")
            out = run_hittimes(pc, pc.exp.n_paths, pc.exp.seed, opt.threads);
        else if (name == "extinction")
            out = run_extinction(pc, pc.exp.n_paths, pc.exp.seed, opt.threads);
        else if (name == "bound34")
            out = run_bound34(pc, pc.exp.n_paths, pc.exp.seed, opt.threads);
        else if (name == "compareZU")
            out = run_compare_zu(pc, pc.exp.n_paths, pc.exp.seed, opt.threads);
        else if (name == "compareY")
            out = run_compare_y(pc, pc.exp.n_paths, pc.exp.seed, opt.threads);
        else if (name == "lyapunov")
            out = run_lyapunov(pc);
        else if (name == "cd1")
            out = run_cd1(pc);
        else {
            std::fprintf(stderr, "unknown subcommand '%s'\n", name.c_str());
            return 1;
        }
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "precondition violation: %s\n", e.what());
        return 2;
    } catch (const std::runtime_error& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    }

    bool commit = out.exit_code == 0 || name == "validate";
    if (out.exit_code != 0 && !commit) std::fprintf(stderr, "run failed: %s\n", out.message.c_str());
    if (!commit) return out.exit_code;

    namespace fs = std::filesystem;
    fs::create_directories(opt.out_dir);
    std::string all_bytes;
    for (const auto& [fname, content] : out.files) {
        std::ofstream f(fs::path(opt.out_dir) / fname, std::ios::binary | std::ios::trunc);
        f << content;
        all_bytes += fname + "\n" + content;
    }
    std::string cfg_digest = config_digest(pc.spec, pc.path, name, pc.exp.n_paths, pc.exp.seed);
    std::string summary_digest = fnv1a64_hex(all_bytes);

    if (opt.json_summary) {
        nlohmann::ordered_json j = {{"subcommand", name},
                                    {"config_digest", cfg_digest},
                                    {"seed", pc.exp.seed},
                                    {"code_version", kCodeVersion},
                                    {"summary_digest", summary_digest},
                                    {"outputs", out.summary}};
        std::ofstream f(fs::path(opt.out_dir) / "summary.json", std::ios::binary | std::ios::trunc);
        f << j.dump(2) << "\n";
    }

    auto dur = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
    nlohmann::ordered_json entry = {{"ts", detail::iso_timestamp()},
                                    {"subcommand", name},
                                    {"config_digest", cfg_digest},
                                    {"seed", pc.exp.seed},
                                    {"code_version", kCodeVersion},
                                    {"summary_digest", summary_digest},
                                    {"duration_ms", dur.count()},
                                    {"outputs", out.summary}};
    {
        std::ofstream ledger(fs::path(opt.out_dir) / "ledger.jsonl", std::ios::binary | std::ios::app);
        ledger << entry.dump() << "\n";
    }

    std::printf("%s: %s\n", name.c_str(), out.message.c_str());
    std::printf("outputs in %s (digest %s)\n", opt.out_dir.c_str(), summary_digest.c_str());
    return out.exit_code;
}

inline int run_cli(int argc, char** argv) {
    CLI::App app{"simulation and verification laboratory for interacting multi-type branching processes with immigration"};
    app.require_subcommand(1);

    RunOptions opt;
    std::uint64_t seed_val = 0, paths_val = 0;
    bool seed_set = false, paths_set = false;
    std::string format = "csv";

    static const char* kSubs[] = {"validate", "classify",  "simulate", "hitprob",  "hittimes", "extinction",
                                  "bound34",  "compareZU", "compareY", "lyapunov", "cd1"};
    std::vector<CLI::App*> subs;
    for (const char* s : kSubs) {
        auto* sub = app.add_subcommand(s);
        sub->add_option("--config", opt.config_path, "config file")->required();
        sub->add_option("--seed", seed_val, "seed override")->each([&](const std::string&) { seed_set = true; });
        sub->add_option("--paths", paths_val, "path count override")->each([&](const std::string&) { paths_set = true; });
        sub->add_option("--out-dir", opt.out_dir, "output directory");
        sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--threads", opt.threads, "worker threads (speed only, never results)");
        subs.push_back(sub);
    }

    CLI11_PARSE(app, argc, argv);

    opt.json_summary = format == "json";
    if (seed_set) opt.seed_override = seed_val;
    if (paths_set) opt.paths_override = paths_val;
    for (std::size_t i = 0; i < subs.size(); ++i)
        if (subs[i]->parsed()) return run_subcommand(kSubs[i], opt);
    return 1;
}

}  // namespace cimbi::cli
