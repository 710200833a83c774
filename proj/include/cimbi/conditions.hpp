#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cimbi/linalg.hpp"
#include "cimbi/model.hpp"

// Mechanical verification of the boundary-regime criteria: copositivity and
// negative-definiteness of the interaction-diffusion form, immigration-margin
// checks, and an aggregate classifier with per-check provenance.

namespace cimbi::conditions {

enum class Tri { Holds, Fails, Unknown };

inline const char* to_string(Tri t) {
    switch (t) {
        case Tri::Holds: return "Holds";
        case Tri::Fails: return "Fails";
        default: return "Unknown";
    }
}

struct TriState {
    Tri value = Tri::Unknown;
    std::optional<Vec> witness;           // point demonstrating a failure
    std::optional<double> witness_value;  // value of the tested quantity there
};

inline TriState tri_holds() { return {Tri::Holds, {}, {}}; }
inline TriState tri_unknown() { return {Tri::Unknown, {}, {}}; }
inline TriState tri_fails(Vec w, double v) { return {Tri::Fails, std::move(w), v}; }

inline Vec unit_vec(int d, int i) {
    Vec e(static_cast<std::size_t>(d), 0.0);
    e[static_cast<std::size_t>(i)] = 1.0;
    return e;
}

namespace detail {

// Enumerates lattice points k/depth on the unit simplex and reports the
// minimum of y^T M y together with its argmin.
inline void simplex_grid_min(const SquareMat& M, int depth, double& min_val, Vec& argmin) {
    const int d = M.n();
    std::vector<int> k(static_cast<std::size_t>(d), 0);
    k[0] = depth;
    Vec y(static_cast<std::size_t>(d));
    min_val = kInf;
    for (;;) {
        for (int i = 0; i < d; ++i) y[static_cast<std::size_t>(i)] = static_cast<double>(k[static_cast<std::size_t>(i)]) / depth;
        double v = quad_form(M, y);
        if (v < min_val) {
            min_val = v;
            argmin = y;
        }
        // next composition of `depth` into d parts
        int i = d - 2;
        while (i >= 0 && k[static_cast<std::size_t>(i)] == 0) --i;
        if (i < 0) break;
        --k[static_cast<std::size_t>(i)];
        int tail = depth;
        for (int t = 0; t <= i; ++t) tail -= k[static_cast<std::size_t>(t)];
        k[static_cast<std::size_t>(i + 1)] = tail;
        for (int t = i + 2; t < d; ++t) k[static_cast<std::size_t>(t)] = 0;
    }
}

// Local descent on the simplex: shift mass between coordinate pairs at a few
// shrinking step sizes. Sharpens a coarse-grid argmin before a verdict.
inline void simplex_polish(const SquareMat& M, int depth, Vec& y, double& val) {
    const int d = M.n();
    const double base = 1.0 / depth;
    for (int round = 0; round < 200; ++round) {
        bool improved = false;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                if (i == j) continue;
                for (double delta : {base / 4.0, base / 16.0, base / 64.0}) {
                    if (y[static_cast<std::size_t>(j)] < delta) continue;
                    Vec cand = y;
                    cand[static_cast<std::size_t>(i)] += delta;
                    cand[static_cast<std::size_t>(j)] -= delta;
                    double v = quad_form(M, cand);
                    if (v < val) {
                        val = v;
                        y = cand;
                        improved = true;
                    }
                }
            }
        if (!improved) return;
    }
}

inline std::uint64_t simplex_point_count(int depth, int d) {
    // C(depth + d - 1, d - 1), saturating
    long double v = 1.0L;
    for (int i = 1; i <= d - 1; ++i) v = v * (depth + i) / i;
    return v > 4e18L ? UINT64_MAX : static_cast<std::uint64_t>(v);
}

}  // namespace detail

// Decides y^T M y >= 0 on the nonnegative orthant. Exact for d <= 2. For
// d >= 3: nonnegative entries or positive semidefiniteness certify Holds; a
// simplex-grid scan (plus local polish) at the given depth either refutes with
// a witness, certifies Holds on grid evidence when depth >= 20, or returns
// Unknown. Grid-certified verdicts are evidence, not proof.
inline TriState is_copositive(const SquareMat& M_in, int grid_depth = 40) {
    const int d = M_in.n();
    if (d < 1) throw std::invalid_argument("is_copositive: empty matrix");
    if (max_asymmetry(M_in) > 1e-9 * (1.0 + max_abs(M_in)))
        throw std::invalid_argument("is_copositive: input must be symmetric (symmetrize first)");
    SquareMat S = symmetrize(M_in);

    if (d == 1) {
        if (S(0, 0) >= 0.0) return tri_holds();
        return tri_fails({1.0}, S(0, 0));
    }
    if (d == 2) {
        double a = S(0, 0), b = S(1, 1), c = S(0, 1);
        if (a < 0.0) return tri_fails(unit_vec(2, 0), a);
        if (b < 0.0) return tri_fails(unit_vec(2, 1), b);
        if (c + std::sqrt(a * b) >= 0.0) return tri_holds();
        // here c < 0 and a, b >= 0 with c^2 > a b
        if (a > 0.0 && b > 0.0) {
            Vec w{std::sqrt(b), std::sqrt(a)};
            return tri_fails(w, quad_form(S, w));
        }
        if (b > 0.0) {
            Vec w{1.0, -c / b};
            return tri_fails(w, quad_form(S, w));
        }
        if (a > 0.0) {
            Vec w{-c / a, 1.0};
            return tri_fails(w, quad_form(S, w));
        }
        Vec w{1.0, 1.0};
        return tri_fails(w, quad_form(S, w));
    }

    bool all_nonneg = true;
    for (double v : S.data())
        if (v < 0.0) all_nonneg = false;
    if (all_nonneg) return tri_holds();
    auto eig = eigen_sym(S);
    const double scale = 1.0 + max_abs(S);
    if (eig.values.front() >= -1e-12 * scale) return tri_holds();

    if (grid_depth < 1) grid_depth = 1;
    int depth = grid_depth;
    while (depth > 2 && detail::simplex_point_count(depth, d) > 2000000ull) depth = depth * 3 / 4;

    double min_val;
    Vec argmin;
    detail::simplex_grid_min(S, depth, min_val, argmin);
    detail::simplex_polish(S, depth, argmin, min_val);
    const double tol = 1e-12 * scale;
    if (min_val < -tol) return tri_fails(argmin, min_val);
    if (depth >= 20) return tri_holds();  // grid-certified
    return tri_unknown();
}

// Strict negative definiteness of the symmetric part. Never Unknown.
inline TriState is_negative_definite(const SquareMat& M) {
    auto eig = eigen_sym(symmetrize(M));
    double lmax = eig.values.back();
    constexpr double tol_eig = 1e-10;
    if (lmax < -tol_eig) return tri_holds();
    Vec w(static_cast<std::size_t>(M.n()));
    int last = M.n() - 1;
    for (int r = 0; r < M.n(); ++r) w[static_cast<std::size_t>(r)] = eig.vectors(r, last);
    return tri_fails(w, lmax);
}

// Sign convention tested for the interaction form sum_i gamma_i(x) = x^T C x
// on the orthant. SumNonnegative is the condition as displayed; NonExplosion
// is the upper bound the moment estimate actually uses, and is the default.
enum class SignMode { SumNonnegative, NonExplosion };

inline const char* to_string(SignMode m) {
    return m == SignMode::SumNonnegative ? "sum-nonnegative" : "non-explosion";
}

inline TriState check_interaction_condition(const ModelSpec& spec, SignMode mode, int grid_depth = 40) {
    SquareMat S = symmetrize(spec.C);
    SquareMat tested = (mode == SignMode::SumNonnegative) ? S : negate(S);
    TriState t = is_copositive(tested, grid_depth);
    if (t.value == Tri::Fails && t.witness) t.witness_value = quad_form(S, *t.witness);
    return t;
}

// Largest epsilon in (0,1] with eta_i >= sigma_i + (1/2) int_{|z|<=eps} z_i^2 mu_i(dz).
// With atom measures the integral is a step function of eps, so the supremum
// sits either at 1 (attained) or just below an atom radius (open).
struct EpsilonBound {
    double value = 0.0;
    bool inclusive = true;
};

inline std::optional<EpsilonBound> max_epsilon(const ModelSpec& spec, int i) {
    const auto& mu_i = spec.mu[static_cast<std::size_t>(i)];
    const double eta_i = spec.eta[static_cast<std::size_t>(i)];
    const double sigma_i = spec.sigma[static_cast<std::size_t>(i)];
    auto margin = [&](double eps) { return eta_i - sigma_i - 0.5 * measure_moment(mu_i, i, 2, eps); };

    if (margin(1.0) >= 0.0) return EpsilonBound{1.0, true};
    if (eta_i - sigma_i < 0.0) return std::nullopt;

    std::vector<double> radii;
    for (const auto& a : mu_i.atoms)
        if (a.z[static_cast<std::size_t>(i)] > 0.0) {
            double r = atom_norm(a);
            if (r <= 1.0) radii.push_back(r);
        }
    std::sort(radii.begin(), radii.end());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());

    // margin(1) < 0 here, so some radius <= 1 carries mass; walk down the steps
    for (std::size_t k = radii.size(); k-- > 0;) {
        if (margin(radii[k]) >= 0.0) {
            double next = (k + 1 < radii.size()) ? radii[k + 1] : 1.0;
            return EpsilonBound{next, false};
        }
    }
    return EpsilonBound{radii.front(), false};  // feasible only below the smallest atom radius
}

enum class Verdict {
    NeverHits,
    HitsAlmostSurely,
    HitsWithPositiveProbability,
    ExtinctInFiniteTime,
    Inapplicable,
    Inconclusive
};

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::NeverHits: return "NeverHits";
        case Verdict::HitsAlmostSurely: return "HitsAlmostSurely";
        case Verdict::HitsWithPositiveProbability: return "HitsWithPositiveProbability";
        case Verdict::ExtinctInFiniteTime: return "ExtinctInFiniteTime";
        case Verdict::Inapplicable: return "Inapplicable";
        default: return "Inconclusive";
    }
}

struct NamedCheck {
    std::string name;
    TriState state;
};

struct ConditionReport {
    std::string theorem;  // descriptive label of the criterion
    Verdict verdict = Verdict::Inapplicable;
    std::vector<NamedCheck> checks;
    std::vector<std::string> notes;
};

struct RegimeReport {
    std::vector<ConditionReport> per_theorem;
    Verdict aggregate = Verdict::Inconclusive;
    InteractionRegime regime = InteractionRegime::Mixed;
    bool contradiction = false;
    SignMode interaction_mode = SignMode::NonExplosion;
    TriState interaction_condition;
    std::vector<std::string> notes;
};

namespace detail {

inline TriState diag_negative(const SquareMat& C, int d) {
    for (int i = 0; i < d; ++i)
        if (!(C(i, i) < 0.0)) return tri_fails(unit_vec(d, i), C(i, i));
    return tri_holds();
}

inline std::string coord_str(int i) { return "coordinate " + std::to_string(i); }

}  // namespace detail

// Boundary never attained: every coordinate must satisfy eta_i > sigma_i, or
// eta_i = sigma_i with a finite small-jump first moment (automatic for atom
// measures). Mixing the two margins across coordinates is allowed and noted.
inline ConditionReport check_nonattainment(const ModelSpec& spec) {
    ConditionReport r;
    r.theorem = "nonattainment";
    TriState cii = detail::diag_negative(spec.C, spec.d);

    bool all_ok = true;
    bool any_strict = false, any_equal = false;
    TriState margins = tri_holds();
    for (int i = 0; i < spec.d; ++i) {
        double eta_i = spec.eta[static_cast<std::size_t>(i)];
        double sigma_i = spec.sigma[static_cast<std::size_t>(i)];
        if (eta_i > sigma_i) {
            any_strict = true;
            if (auto eps = max_epsilon(spec, i))
                r.notes.push_back(detail::coord_str(i) + ": strict margin, feasible epsilon " +
                                  (eps->inclusive ? "= " : "just below ") + std::to_string(eps->value));
        } else if (eta_i == sigma_i) {
            any_equal = true;
            double small_moment = measure_moment(spec.mu[static_cast<std::size_t>(i)], i, 1, 1.0);
            r.notes.push_back(detail::coord_str(i) + ": equality margin, small-jump first moment " +
                              std::to_string(small_moment) + " (finite by atom construction)");
        } else {
            if (all_ok) margins = tri_fails(unit_vec(spec.d, i), eta_i - sigma_i);
            all_ok = false;
        }
    }

    if (cii.value == Tri::Holds && all_ok) {
        r.verdict = Verdict::NeverHits;
        r.checks.push_back({"intraspecific competition (c_ii < 0)", cii});
        r.checks.push_back({"immigration margin (eta_i >= sigma_i per coordinate)", margins});
        if (any_strict && any_equal)
            r.notes.push_back("coordinates mix the strict and equality margins; the per-coordinate argument extends "
                              "beyond the uniformly-quantified statement");
    } else {
        r.verdict = Verdict::Inapplicable;
        r.checks.push_back({"intraspecific competition (c_ii < 0)", cii});
        r.checks.push_back({"immigration margin (eta_i >= sigma_i per coordinate)", margins});
    }
    return r;
}

// Almost-sure attainment for the pure-diffusion model: no jumps, diagonal B,
// sigma_i > 0, eta_i <= sigma_i / 2, and either (1) negative diagonal drift
// with the interaction-diffusion form nonpositive on the orthant, or (2) that
// form negative definite.
inline ConditionReport check_attainment_diffusion(const ModelSpec& spec, int grid_depth = 40) {
    ConditionReport r;
    r.theorem = "attainment-diffusion";

    TriState cii = detail::diag_negative(spec.C, spec.d);
    TriState nojumps = measures_empty(spec) ? tri_holds() : tri_fails(Vec(static_cast<std::size_t>(spec.d), 0.0), 0.0);
    TriState bdiag = spec.B.is_diagonal() ? tri_holds() : tri_fails(Vec(static_cast<std::size_t>(spec.d), 0.0), 0.0);
    TriState sigpos = tri_holds();
    for (int i = 0; i < spec.d; ++i)
        if (!(spec.sigma[static_cast<std::size_t>(i)] > 0.0)) {
            sigpos = tri_fails(unit_vec(spec.d, i), spec.sigma[static_cast<std::size_t>(i)]);
            break;
        }
    TriState etahalf = tri_holds();
    for (int i = 0; i < spec.d; ++i)
        if (!(spec.eta[static_cast<std::size_t>(i)] <= spec.sigma[static_cast<std::size_t>(i)] / 2.0)) {
            etahalf = tri_fails(unit_vec(spec.d, i),
                                spec.eta[static_cast<std::size_t>(i)] - spec.sigma[static_cast<std::size_t>(i)] / 2.0);
            break;
        }

    std::vector<NamedCheck> structural{{"intraspecific competition (c_ii < 0)", cii},
                                       {"no jump measures", nojumps},
                                       {"B diagonal", bdiag},
                                       {"sigma > 0", sigpos},
                                       {"eta <= sigma/2", etahalf}};
    bool structural_ok = cii.value == Tri::Holds && nojumps.value == Tri::Holds && bdiag.value == Tri::Holds &&
                         sigpos.value == Tri::Holds && etahalf.value == Tri::Holds;
    if (!structural_ok) {
        r.verdict = Verdict::Inapplicable;
        r.checks = structural;
        return r;
    }

    SquareMat M(spec.d);
    for (int i = 0; i < spec.d; ++i)
        for (int j = 0; j < spec.d; ++j) M(i, j) = spec.C(i, j) * spec.sigma[static_cast<std::size_t>(j)];

    TriState cond2 = is_negative_definite(M);
    TriState bneg = tri_holds();
    for (int i = 0; i < spec.d; ++i)
        if (!(spec.B(i, i) < 0.0)) {
            bneg = tri_fails(unit_vec(spec.d, i), spec.B(i, i));
            break;
        }
    TriState cond1cop = is_copositive(negate(symmetrize(M)), grid_depth);

    if (cond2.value == Tri::Holds) {
        r.verdict = Verdict::HitsAlmostSurely;
        r.checks = structural;
        r.checks.push_back({"interaction-diffusion form negative definite", cond2});
        r.notes.push_back("route: negative definiteness (condition 2)");
        return r;
    }
    if (bneg.value == Tri::Holds && cond1cop.value == Tri::Holds) {
        r.verdict = Verdict::HitsAlmostSurely;
        r.checks = structural;
        r.checks.push_back({"diagonal linear drift negative (b_ii < 0)", bneg});
        r.checks.push_back({"interaction-diffusion form nonpositive on orthant", cond1cop});
        r.notes.push_back("route: orthant nonpositivity with negative diagonal drift (condition 1)");
        return r;
    }
    if (bneg.value == Tri::Holds && cond1cop.value == Tri::Unknown) {
        r.verdict = Verdict::Inconclusive;
        r.checks = structural;
        r.checks.push_back({"diagonal linear drift negative (b_ii < 0)", bneg});
        r.checks.push_back({"interaction-diffusion form nonpositive on orthant", cond1cop});
        r.notes.push_back("negative definiteness fails and orthant nonpositivity is undecided at this grid depth");
        return r;
    }
    r.verdict = Verdict::Inapplicable;
    r.checks = structural;
    r.checks.push_back({"diagonal linear drift negative (b_ii < 0)", bneg});
    r.checks.push_back({"interaction-diffusion form nonpositive on orthant", cond1cop});
    r.checks.push_back({"interaction-diffusion form negative definite", cond2});
    return r;
}

// Positive-probability attainment with finite jump measures: as the diffusion
// criterion, but condition (1) uses the compensated diagonal drift
// b_ii - int z_i mu_i(dz).
inline ConditionReport check_attainment_jumps(const ModelSpec& spec, int grid_depth = 40) {
    ConditionReport r;
    r.theorem = "attainment-jumps";

    TriState cii = detail::diag_negative(spec.C, spec.d);
    TriState bdiag = spec.B.is_diagonal() ? tri_holds() : tri_fails(Vec(static_cast<std::size_t>(spec.d), 0.0), 0.0);
    TriState sigpos = tri_holds();
    for (int i = 0; i < spec.d; ++i)
        if (!(spec.sigma[static_cast<std::size_t>(i)] > 0.0)) {
            sigpos = tri_fails(unit_vec(spec.d, i), spec.sigma[static_cast<std::size_t>(i)]);
            break;
        }
    TriState etahalf = tri_holds();
    for (int i = 0; i < spec.d; ++i)
        if (!(spec.eta[static_cast<std::size_t>(i)] <= spec.sigma[static_cast<std::size_t>(i)] / 2.0)) {
            etahalf = tri_fails(unit_vec(spec.d, i),
                                spec.eta[static_cast<std::size_t>(i)] - spec.sigma[static_cast<std::size_t>(i)] / 2.0);
            break;
        }

    std::vector<NamedCheck> structural{{"intraspecific competition (c_ii < 0)", cii},
                                       {"jump measures finite (atoms)", tri_holds()},
                                       {"B diagonal", bdiag},
                                       {"sigma > 0", sigpos},
                                       {"eta <= sigma/2", etahalf}};
    bool structural_ok = cii.value == Tri::Holds && bdiag.value == Tri::Holds && sigpos.value == Tri::Holds &&
                         etahalf.value == Tri::Holds;
    if (!structural_ok) {
        r.verdict = Verdict::Inapplicable;
        r.checks = structural;
        return r;
    }

    SquareMat M(spec.d);
    for (int i = 0; i < spec.d; ++i)
        for (int j = 0; j < spec.d; ++j) M(i, j) = spec.C(i, j) * spec.sigma[static_cast<std::size_t>(j)];

    TriState cond2 = is_negative_definite(M);
    TriState btilde_neg = tri_holds();
    for (int i = 0; i < spec.d; ++i) {
        double bt = spec.B(i, i) - own_jump_mean(spec, i);
        if (!(bt < 0.0)) {
            btilde_neg = tri_fails(unit_vec(spec.d, i), bt);
            break;
        }
    }
    TriState cond1cop = is_copositive(negate(symmetrize(M)), grid_depth);

    if (cond2.value == Tri::Holds) {
        r.verdict = Verdict::HitsWithPositiveProbability;
        r.checks = structural;
        r.checks.push_back({"interaction-diffusion form negative definite", cond2});
        r.notes.push_back("route: negative definiteness (condition 2)");
        return r;
    }
    if (btilde_neg.value == Tri::Holds && cond1cop.value == Tri::Holds) {
        r.verdict = Verdict::HitsWithPositiveProbability;
        r.checks = structural;
        r.checks.push_back({"compensated diagonal drift negative (b_ii - mean jump < 0)", btilde_neg});
        r.checks.push_back({"interaction-diffusion form nonpositive on orthant", cond1cop});
        r.notes.push_back("route: orthant nonpositivity with compensated negative diagonal drift (condition 1)");
        return r;
    }
    if (btilde_neg.value == Tri::Holds && cond1cop.value == Tri::Unknown) {
        r.verdict = Verdict::Inconclusive;
        r.checks = structural;
        r.checks.push_back({"compensated diagonal drift negative (b_ii - mean jump < 0)", btilde_neg});
        r.checks.push_back({"interaction-diffusion form nonpositive on orthant", cond1cop});
        r.notes.push_back("negative definiteness fails and orthant nonpositivity is undecided at this grid depth");
        return r;
    }
    r.verdict = Verdict::Inapplicable;
    r.checks = structural;
    r.checks.push_back({"compensated diagonal drift negative (b_ii - mean jump < 0)", btilde_neg});
    r.checks.push_back({"interaction-diffusion form nonpositive on orthant", cond1cop});
    r.checks.push_back({"interaction-diffusion form negative definite", cond2});
    return r;
}

// Competitive relaxation: c_ij <= 0 off-diagonal, sigma_i > 0 and
// eta_i < sigma_i. Almost-sure attainment without jumps, positive probability
// with finite jump measures. B is not restricted here.
inline ConditionReport check_attainment_competitive(const ModelSpec& spec) {
    ConditionReport r;
    r.theorem = "attainment-competitive";

    TriState cii = detail::diag_negative(spec.C, spec.d);
    TriState comp = tri_holds();
    for (int i = 0; i < spec.d && comp.value == Tri::Holds; ++i)
        for (int j = 0; j < spec.d; ++j) {
            if (i == j) continue;
            if (spec.C(i, j) > 0.0) {
                Vec w(static_cast<std::size_t>(spec.d), 0.0);
                w[static_cast<std::size_t>(i)] = 1.0;
                w[static_cast<std::size_t>(j)] = 1.0;
                comp = tri_fails(w, spec.C(i, j));
                break;
            }
        }
    TriState sigpos = tri_holds();
    for (int i = 0; i < spec.d; ++i)
        if (!(spec.sigma[static_cast<std::size_t>(i)] > 0.0)) {
            sigpos = tri_fails(unit_vec(spec.d, i), spec.sigma[static_cast<std::size_t>(i)]);
            break;
        }
    TriState etamargin = tri_holds();
    for (int i = 0; i < spec.d; ++i)
        if (!(spec.eta[static_cast<std::size_t>(i)] < spec.sigma[static_cast<std::size_t>(i)])) {
            etamargin = tri_fails(unit_vec(spec.d, i),
                                  spec.eta[static_cast<std::size_t>(i)] - spec.sigma[static_cast<std::size_t>(i)]);
            break;
        }

    bool ok = cii.value == Tri::Holds && comp.value == Tri::Holds && sigpos.value == Tri::Holds &&
              etamargin.value == Tri::Holds;
    r.checks = {{"intraspecific competition (c_ii < 0)", cii},
                {"competitive off-diagonals (c_ij <= 0)", comp},
                {"sigma > 0", sigpos},
                {"eta < sigma", etamargin}};
    if (!ok) {
        r.verdict = Verdict::Inapplicable;
        return r;
    }
    r.notes.push_back("off-diagonal linear drift B is not restricted by this criterion");
    if (measures_empty(spec)) {
        r.verdict = Verdict::HitsAlmostSurely;
        r.checks.push_back({"no jump measures", tri_holds()});
    } else {
        r.verdict = Verdict::HitsWithPositiveProbability;
        r.checks.push_back({"jump measures finite (atoms)", tri_holds()});
    }
    return r;
}

// Runs every checker and aggregates. NeverHits and any attainment verdict are
// mutually exclusive by the hypotheses; if both ever apply the report carries
// a contradiction flag instead of picking a side.
inline RegimeReport classify(const ModelSpec& spec, SignMode mode = SignMode::NonExplosion, int grid_depth = 40) {
    RegimeReport R;
    R.regime = interaction_regime(spec.C);
    R.interaction_mode = mode;
    R.interaction_condition = check_interaction_condition(spec, mode, grid_depth);
    R.notes.push_back(std::string("interaction sign condition (mode ") + to_string(mode) +
                      "): " + to_string(R.interaction_condition.value));

    ConditionReport na = check_nonattainment(spec);
    ConditionReport ad = check_attainment_diffusion(spec, grid_depth);
    ConditionReport aj = check_attainment_jumps(spec, grid_depth);
    ConditionReport ac = check_attainment_competitive(spec);

    bool eta_zero = true;
    for (double e : spec.eta)
        if (e != 0.0) eta_zero = false;
    bool as_attain = ad.verdict == Verdict::HitsAlmostSurely || ac.verdict == Verdict::HitsAlmostSurely;
    bool pos_attain = aj.verdict == Verdict::HitsWithPositiveProbability ||
                      ac.verdict == Verdict::HitsWithPositiveProbability;

    R.per_theorem = {na, ad, aj, ac};

    if (as_attain && eta_zero) {
        ConditionReport ext;
        ext.theorem = "extinction";
        ext.verdict = Verdict::ExtinctInFiniteTime;
        ext.checks = {{"eta == 0", tri_holds()}, {"almost-sure boundary attainment basis", tri_holds()}};
        ext.notes.push_back(std::string("basis: ") +
                            (ad.verdict == Verdict::HitsAlmostSurely ? "attainment-diffusion" : "attainment-competitive"));
        R.per_theorem.push_back(ext);
    }

    bool never = na.verdict == Verdict::NeverHits;
    bool any_attain = as_attain || pos_attain;
    if (never && any_attain) {
        R.contradiction = true;
        R.aggregate = Verdict::Inconclusive;
        R.notes.push_back("internal contradiction: non-attainment and attainment criteria both applicable");
        return R;
    }
    if (never)
        R.aggregate = Verdict::NeverHits;
    else if (as_attain && eta_zero)
        R.aggregate = Verdict::ExtinctInFiniteTime;
    else if (as_attain)
        R.aggregate = Verdict::HitsAlmostSurely;
    else if (pos_attain)
        R.aggregate = Verdict::HitsWithPositiveProbability;
    else
        R.aggregate = Verdict::Inconclusive;
    return R;
}

}  // namespace cimbi::conditions
