// Acceptance suite: runs every top-level criterion at its stated tolerance
// and prints one [PASS]/[FAIL] line per criterion. Exits nonzero if any fail.
//
// usage: acceptance <path-to-cimbi-cli> <configs-dir>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "cimbi/cli.hpp"
#include "cimbi/conditions.hpp"
#include "cimbi/lyapunov.hpp"
#include "cimbi/montecarlo.hpp"
#include "cimbi/transform.hpp"

using namespace cimbi;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int idx, bool pass, const std::string& what, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s  (%s)\n", pass ? "PASS" : "FAIL", idx, what.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string g_cli_path;
std::string g_config_dir;

config::ParsedConfig load(const std::string& name) {
    auto res = config::parse_config_file(g_config_dir + "/" + name);
    if (!std::holds_alternative<config::ParsedConfig>(res)) {
        std::fprintf(stderr, "cannot load config %s\n", name.c_str());
        std::exit(2);
    }
    return std::get<config::ParsedConfig>(res);
}

ModelSpec scalar_spec(double eta, double sigma, double b, double c, double x0) {
    ModelSpec s;
    s.d = 1;
    s.x0 = {x0};
    s.eta = {eta};
    s.sigma = {sigma};
    s.B = SquareMat::from_rows(1, {b});
    s.C = SquareMat::from_rows(1, {c});
    s.mu.resize(1);
    return s;
}

// criterion 1: strong immigration never reaches the boundary
void criterion_1() {
    auto pc = load("nonattainment_d2.cfg");
    auto R = conditions::classify(pc.spec);
    bool verdict_ok = R.aggregate == conditions::Verdict::NeverHits;
    engine::PathConfig cfg = pc.path;
    cfg.dt = 1e-3;
    cfg.T = 10.0;
    cfg.eps_hit = 1e-8;
    auto est = mc::estimate_hit_probability(pc.spec, cfg, 10000, pc.exp.seed, 0);
    bool p_ok = est.p_hat <= 0.01 && !est.unreliable;
    report(1, verdict_ok && p_ok, "non-attainment regime (classify + small hit fraction)",
           "verdict=" + std::string(conditions::to_string(R.aggregate)) + " p_hat=" + fmt_g17(est.p_hat));
}

// criterion 2: almost-sure attainment via the diffusion criterion
void criterion_2() {
    auto pc = load("attainment_diffusion_d1.cfg");
    auto R = conditions::classify(pc.spec);
    bool verdict_ok = R.aggregate == conditions::Verdict::HitsAlmostSurely;
    bool via_negdef = false;
    for (const auto& rep : R.per_theorem)
        if (rep.theorem == "attainment-diffusion" && rep.verdict == conditions::Verdict::HitsAlmostSurely)
            for (const auto& n : rep.notes)
                if (n.find("condition 2") != std::string::npos) via_negdef = true;
    engine::PathConfig cfg = pc.path;
    cfg.T = 30.0;
    auto est = mc::estimate_hit_probability(pc.spec, cfg, 10000, pc.exp.seed, 0);
    bool p_ok = est.p_hat >= 0.95;
    report(2, verdict_ok && via_negdef && p_ok, "a.s. attainment regime (negative-definite route + hit fraction)",
           "p_hat=" + fmt_g17(est.p_hat));
}

// criterion 3: sharp one-type contrast across the immigration margin
void criterion_3() {
    auto lo = scalar_spec(0.9, 1.0, -1.0, -1.0, 0.5);
    auto hi = scalar_spec(1.1, 1.0, -1.0, -1.0, 0.5);
    auto Rlo = conditions::classify(lo);
    auto Rhi = conditions::classify(hi);
    bool verdicts_ok = Rlo.aggregate == conditions::Verdict::HitsAlmostSurely &&
                       Rhi.aggregate == conditions::Verdict::NeverHits;
    engine::PathConfig cfg;
    cfg.dt = 1e-3;
    cfg.T = 10.0;
    cfg.eps_hit = 1e-14;
    auto p_lo = mc::estimate_hit_probability(lo, cfg, 10000, 11, 0);
    auto p_hi = mc::estimate_hit_probability(hi, cfg, 10000, 12, 0);
    double gap = p_lo.p_hat - p_hi.p_hat;
    bool gap_ok = gap >= 0.5;
    bool disjoint = p_lo.ci_low > p_hi.ci_high;
    report(3, verdicts_ok && gap_ok && disjoint, "sharp 1-d contrast across the immigration margin",
           "p(0.9)=" + fmt_g17(p_lo.p_hat) + " p(1.1)=" + fmt_g17(p_hi.p_hat) + " gap=" + fmt_g17(gap));
}

// criterion 4: full extinction without immigration, monotone in the horizon
void criterion_4() {
    auto pc = load("extinction_d1.cfg");
    engine::PathConfig cfg = pc.path;
    cfg.T = 50.0;
    cfg.stop_at_hit = false;
    cfg.stop_at_extinct = true;
    auto sums = mc::path_summaries(pc.spec, cfg, 10000, pc.exp.seed, 0);
    double fracs[3] = {0, 0, 0};
    double horizons[3] = {10.0, 25.0, 50.0};
    std::uint64_t usable = 0;
    for (const auto& s : sums) {
        if (s.nonfinite || s.exceeded) continue;
        ++usable;
        for (int k = 0; k < 3; ++k)
            if (s.extinct && s.extinct_time <= horizons[k]) fracs[k] += 1.0;
    }
    for (double& f : fracs) f /= static_cast<double>(usable);
    bool ok = fracs[2] >= 0.9 && fracs[0] <= fracs[1] && fracs[1] <= fracs[2];
    report(4, ok, "extinction without immigration (>= 0.9 at T=50, non-decreasing in T)",
           "frac(10)=" + fmt_g17(fracs[0]) + " frac(25)=" + fmt_g17(fracs[1]) + " frac(50)=" + fmt_g17(fracs[2]));
}

// criterion 5: constructive positive lower bound with jumps
void criterion_5() {
    auto pc = load("attainment_jumps_d1.cfg");
    double btilde = pc.spec.B(0, 0) - own_jump_mean(pc.spec, 0);
    auto b = mc::hit_probability_lower_bound(pc.spec, pc.path, 3.0, 6.0, 10000, pc.exp.seed, 0);
    double mu_total = 0.0;
    for (const auto& m : pc.spec.mu) mu_total += m.total_mass();
    double expected_pB = std::exp(-3.0 * (pc.spec.nu.total_mass() + 6.0 * mu_total));
    bool pB_ok = std::abs(b.pB_exact - expected_pB) <= 1e-12 * expected_pB;
    bool ok = btilde < 0.0 && b.bound > 0.0 && b.pA.ci_low > 0.0 && pB_ok;
    report(5, ok, "positive-probability attainment with jumps (product lower bound)",
           "bound=" + fmt_g17(b.bound) + " pA_ci=[" + fmt_g17(b.pA.ci_low) + "," + fmt_g17(b.pA.ci_high) +
               "] pB=" + fmt_g17(b.pB_exact));
}

// criterion 6: coupled Z/U comparison, violation rate small and shrinking in dt
void criterion_6() {
    auto pc = load("comparison_zu_d2.cfg");
    engine::PathConfig base = pc.path;
    base.dt = 1e-3;
    engine::PathConfig fine = pc.path;
    fine.dt = 5e-4;
    const double tol = 1e-6;
    auto zb = transform::coupled_zu_batch(pc.spec, base, 1000, 21, tol, 0);
    auto zf = transform::coupled_zu_batch(pc.spec, fine, 1000, 21, tol, 0);
    bool ok = zb.rate <= 0.01 && zf.rate < zb.rate && zb.n_excluded == 0 && zf.n_excluded == 0;
    report(6, ok, "comparison machinery (Z<=U discrete violation rate shrinks with dt)",
           "rate(1e-3)=" + fmt_g17(zb.rate) + " rate(5e-4)=" + fmt_g17(zf.rate));
}

// criterion 7: generator identities, exact and weak
void criterion_7() {
    std::mt19937 gen(8191);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    bool exact_ok = true;
    for (int rep = 0; rep < 100; ++rep) {
        int d = 1 + rep % 5;
        ModelSpec s;
        s.d = d;
        s.B = SquareMat(d);
        s.C = SquareMat(d);
        s.mu.resize(static_cast<std::size_t>(d));
        double expected = 0.0;
        for (int i = 0; i < d; ++i) {
            s.x0.push_back(0.5 + unit(gen));
            s.eta.push_back(3.0 * unit(gen));
            s.sigma.push_back(2.0 * unit(gen));
            expected += s.sigma.back();
            for (int j = 0; j < d; ++j) {
                s.B(i, j) = i == j ? 2.0 * unit(gen) - 1.0 : unit(gen);
                s.C(i, j) = i == j ? -0.1 - unit(gen) : 2.0 * unit(gen) - 1.0;
            }
        }
        Vec ones(static_cast<std::size_t>(d), 1.0);
        if (lyap::generator_L1(s, ones) != expected) exact_ok = false;
    }

    auto spec_a = scalar_spec(2.0, 1.0, -1.0, -1.0, 1.0);
    auto pc = load("nonattainment_d2.cfg");
    struct Point {
        const ModelSpec* s;
        Vec x;
        double C;
    };
    Point points[] = {{&spec_a, {1.0}, 50.0}, {&spec_a, {10.0}, 2000.0}, {&pc.spec, {1.0, 2.0}, 500.0}};
    bool weak_ok = true;
    std::string detail;
    const double h = 1e-3;
    for (const auto& p : points) {
        auto w = lyap::weak_generator_check(*p.s, p.x, h, 1000000, 777, 0);
        double err = std::abs(w.estimate - w.exact);
        if (err > p.C * h + 3.0 * w.se) weak_ok = false;
        detail += " err=" + fmt_g17(err) + "/band=" + fmt_g17(p.C * h + 3.0 * w.se);
    }
    report(7, exact_ok && weak_ok, "generator correctness (exact all-ones identity + weak MC check)", detail);
}

// criterion 8: transform identities at 1e-12
void criterion_8() {
    std::mt19937 gen(8209);
    std::uniform_real_distribution<double> ux(1e-6, 50.0), us(0.05, 5.0), uz(0.1, 3.0);
    bool round_ok = true;
    for (int rep = 0; rep < 100000; ++rep) {
        Vec x{ux(gen)}, sig{us(gen)};
        double back = transform::lamperti_inverse(transform::lamperti_forward(x, sig), sig)[0];
        if (std::abs(back - x[0]) > 1e-12 * x[0]) round_ok = false;
    }
    auto s = scalar_spec(0.3, 1.2, -0.8, -1.5, 1.0);
    ModelSpec s2;
    s2.d = 2;
    s2.x0 = {1.0, 1.0};
    s2.eta = {0.3, 0.4};
    s2.sigma = {1.2, 0.7};
    s2.B = SquareMat::from_rows(2, {-0.8, 0.0, 0.0, -1.1});
    s2.C = SquareMat::from_rows(2, {-1.5, -0.3, -0.2, -0.9});
    s2.mu.resize(2);
    bool drift_ok = true;
    for (int rep = 0; rep < 10000; ++rep) {
        Vec z{uz(gen)};
        double diff = transform::z_drift(z, s)[0] - transform::u_drift(z, s)[0];
        double expected = s.eta[0] / (s.sigma[0] * z[0]) - 1.0 / (2.0 * z[0]);
        if (std::abs(diff - expected) > 1e-12 * (1.0 + std::abs(expected))) drift_ok = false;
        Vec z2{uz(gen), uz(gen)};
        auto dz = transform::z_drift(z2, s2);
        auto du = transform::u_drift(z2, s2);
        for (int i = 0; i < 2; ++i) {
            double d2 = dz[static_cast<std::size_t>(i)] - du[static_cast<std::size_t>(i)];
            double e2 = s2.eta[static_cast<std::size_t>(i)] /
                            (s2.sigma[static_cast<std::size_t>(i)] * z2[static_cast<std::size_t>(i)]) -
                        1.0 / (2.0 * z2[static_cast<std::size_t>(i)]);
            if (std::abs(d2 - e2) > 1e-12 * (1.0 + std::abs(e2))) drift_ok = false;
        }
    }
    report(8, round_ok && drift_ok, "transform identities (round trip + singular drift difference at 1e-12)",
           round_ok && drift_ok ? "all points within tolerance" : "tolerance exceeded");
}

// criterion 9: condition algebra vs brute-force oracles
void criterion_9() {
    std::mt19937 gen(8219);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    bool cop_ok = true;
    int unknowns_2x2 = 0;
    for (int rep = 0; rep < 2000; ++rep) {
        int d = rep < 1000 ? 2 : 3;
        SquareMat M(d);
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j) M(i, j) = M(j, i) = u(gen);
        auto t = conditions::is_copositive(M, 40);
        double mn = kInf;
        if (d == 2) {
            for (int k = 0; k <= 10000; ++k) {
                double s = static_cast<double>(k) / 10000;
                Vec y{1.0 - s, s};
                mn = std::min(mn, quad_form(M, y));
            }
        } else {
            const int depth = 140;  // 10011 simplex points
            for (int i = 0; i <= depth; ++i)
                for (int j = 0; i + j <= depth; ++j) {
                    Vec y{static_cast<double>(i) / depth, static_cast<double>(j) / depth,
                          static_cast<double>(depth - i - j) / depth};
                    mn = std::min(mn, quad_form(M, y));
                }
        }
        if (t.value == conditions::Tri::Holds && mn < -1e-9) cop_ok = false;
        if (t.value == conditions::Tri::Fails && mn > 1e-9) cop_ok = false;
        if (t.value == conditions::Tri::Unknown && d == 2) ++unknowns_2x2;
    }

    bool eig_ok = true;
    for (int rep = 0; rep < 1000; ++rep) {
        int d = 2 + rep % 3;
        SquareMat M(d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) M(i, j) = u(gen);
        for (int i = 0; i < d; ++i) M(i, i) -= 0.3;
        auto t = conditions::is_negative_definite(M);
        // independent oracle: power iteration on the shifted symmetric part
        SquareMat S = symmetrize(M);
        double shift = 1.0;
        for (int i = 0; i < d; ++i) {
            double row = 0.0;
            for (int j = 0; j < d; ++j) row += std::abs(S(i, j));
            shift = std::max(shift, row + 1.0);
        }
        SquareMat A = S;
        for (int i = 0; i < d; ++i) A(i, i) += shift;
        Vec v(static_cast<std::size_t>(d), 1.0);
        v[0] = 1.3;  // break symmetry
        for (int it = 0; it < 5000; ++it) {
            Vec w = mat_vec(A, v);
            double norm = 0.0;
            for (double x : w) norm += x * x;
            norm = std::sqrt(norm);
            for (int i = 0; i < d; ++i) v[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(i)] / norm;
        }
        Vec w = mat_vec(A, v);
        double num = 0.0;
        for (int i = 0; i < d; ++i) num += v[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(i)];
        double lmax = num - shift;
        if (std::abs(lmax) > 1e-6 && (t.value == conditions::Tri::Holds) != (lmax < 0.0)) eig_ok = false;
    }
    report(9, cop_ok && eig_ok && unknowns_2x2 == 0, "condition algebra vs brute-force oracles",
           std::string("copositivity ") + (cop_ok ? "consistent" : "contradicted") + ", definiteness " +
               (eig_ok ? "consistent" : "contradicted"));
}

// criterion 10: byte-identical CSV across thread counts
void criterion_10() {
    fs::path base = fs::temp_directory_path() / "cimbi_acceptance";
    fs::remove_all(base);
    std::string cfg = g_config_dir + "/attainment_jumps_d1.cfg";
    auto run = [&](int threads) {
        fs::path out = base / ("t" + std::to_string(threads));
        std::string cmd = "\"" + g_cli_path + "\" hitprob --config \"" + cfg + "\" --paths 500 --seed 7 --threads " +
                          std::to_string(threads) + " --out-dir \"" + out.string() + "\" > /dev/null";
        if (std::system(cmd.c_str()) != 0) return std::string();
        std::ifstream in(out / "hitprob.csv", std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    std::string c1 = run(1), c4 = run(4), c8 = run(8);
    bool ok = !c1.empty() && c1 == c4 && c1 == c8;
    report(10, ok, "determinism: identical CSV under thread counts {1,4,8}",
           ok ? "byte-identical" : "outputs differ or run failed");
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::fprintf(stderr, "usage: acceptance <cimbi-cli-path> <configs-dir>\n");
        return 2;
    }
    g_cli_path = argv[1];
    g_config_dir = argv[2];

    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();

    if (g_failures == 0)
        std::printf("acceptance: all criteria passed\n");
    else
        std::printf("acceptance: %d criterion(s) FAILED\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
