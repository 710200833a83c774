#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "cimbi/linalg.hpp"

// Domain types for interacting multi-type branching dynamics with immigration
// on the nonnegative orthant:
//
//   dX_i = (eta_i + sum_j B_ij X_j + gamma_i(X)) dt + sqrt(2 sigma_i X_i) dW_i
//          + immigration jumps (measure nu)
//          + branching jumps of type j at intensity X_j (measures mu_j;
//            own-type jumps are compensated),
//
// with gamma_i(x) = x_i * sum_j C_ij x_j. Jump measures are finite lists of
// weighted atoms, so every moment below is an exact finite sum.

namespace cimbi {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct JumpAtom {
    double weight = 0.0;  // intensity contribution, > 0
    Vec z;                // jump vector in the nonnegative orthant, != 0

    friend bool operator==(const JumpAtom&, const JumpAtom&) = default;
};

struct JumpMeasure {
    std::vector<JumpAtom> atoms;

    bool empty() const { return atoms.empty(); }

    double total_mass() const {
        double s = 0.0;
        for (const auto& a : atoms) s += a.weight;
        return s;
    }

    friend bool operator==(const JumpMeasure&, const JumpMeasure&) = default;
};

inline double atom_norm(const JumpAtom& a) {
    double s = 0.0;
    for (double zi : a.z) s += zi * zi;
    return std::sqrt(s);
}

// sum over atoms with |z| <= radius of weight * z_coord^power, power in {1,2}.
inline double measure_moment(const JumpMeasure& m, int coord, int power, double radius) {
    if (power != 1 && power != 2) throw std::invalid_argument("measure_moment: power must be 1 or 2");
    if (coord < 0) throw std::invalid_argument("measure_moment: negative coordinate");
    double s = 0.0;
    for (const auto& a : m.atoms) {
        if (coord >= static_cast<int>(a.z.size())) throw std::invalid_argument("measure_moment: coordinate out of range");
        if (atom_norm(a) <= radius) {
            double zc = a.z[static_cast<std::size_t>(coord)];
            s += a.weight * (power == 1 ? zc : zc * zc);
        }
    }
    return s;
}

struct ModelSpec {
    int d = 0;
    Vec x0;        // initial state, strictly positive
    Vec eta;       // immigration drift, >= 0
    Vec sigma;     // diffusion coefficients, >= 0
    SquareMat B;   // linear drift; off-diagonal entries >= 0
    SquareMat C;   // interaction matrix; diagonal < 0 (<= 0 in relaxed mode)
    JumpMeasure nu;               // immigration jumps
    std::vector<JumpMeasure> mu;  // branching jumps, one measure per type
    bool strict_interaction = true;

    friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

enum class InteractionRegime { Competition, Cooperation, Mixed };

inline const char* to_string(InteractionRegime r) {
    switch (r) {
        case InteractionRegime::Competition: return "Competition";
        case InteractionRegime::Cooperation: return "Cooperation";
        default: return "Mixed";
    }
}

// Off-diagonal sign pattern of C. All zero off-diagonals count as Competition
// (they satisfy the competitive checks downstream).
inline InteractionRegime interaction_regime(const SquareMat& C) {
    bool all_nonpos = true, all_nonneg = true;
    for (int i = 0; i < C.n(); ++i)
        for (int j = 0; j < C.n(); ++j) {
            if (i == j) continue;
            if (C(i, j) > 0.0) all_nonpos = false;
            if (C(i, j) < 0.0) all_nonneg = false;
        }
    if (all_nonpos) return InteractionRegime::Competition;
    if (all_nonneg) return InteractionRegime::Cooperation;
    return InteractionRegime::Mixed;
}

struct Violation {
    std::string field;
    int i = -1;  // coordinate / row, -1 when not applicable
    int j = -1;  // column / atom index, -1 when not applicable
    std::string message;
};

using ValidationReport = std::vector<Violation>;

namespace detail {
inline void check_measure(const JumpMeasure& m, int d, const std::string& name, ValidationReport& rep) {
    for (int a = 0; a < static_cast<int>(m.atoms.size()); ++a) {
        const auto& atom = m.atoms[static_cast<std::size_t>(a)];
        if (!(atom.weight > 0.0) || !std::isfinite(atom.weight))
            rep.push_back({name, -1, a, name + " atom " + std::to_string(a) + ": weight must be positive and finite"});
        if (static_cast<int>(atom.z.size()) != d)
            rep.push_back({name, -1, a, name + " atom " + std::to_string(a) + ": jump vector must have d entries"});
        bool some_pos = false;
        for (int i = 0; i < static_cast<int>(atom.z.size()); ++i) {
            double zi = atom.z[static_cast<std::size_t>(i)];
            if (!(zi >= 0.0) || !std::isfinite(zi))
                rep.push_back({name, i, a, name + " atom " + std::to_string(a) + ": z[" + std::to_string(i) +
                                               "] must be nonnegative and finite"});
            if (zi > 0.0) some_pos = true;
        }
        if (!some_pos) rep.push_back({name, -1, a, name + " atom " + std::to_string(a) + ": jump vector must be nonzero"});
    }
}
}  // namespace detail

// Lists every violated invariant; an empty report means the spec is valid.
inline ValidationReport validate(const ModelSpec& s) {
    ValidationReport rep;
    if (s.d < 1) {
        rep.push_back({"d", -1, -1, "dimension must be >= 1"});
        return rep;
    }
    auto check_len = [&](const Vec& v, const char* name) {
        if (static_cast<int>(v.size()) != s.d) rep.push_back({name, -1, -1, std::string(name) + " must have d entries"});
    };
    check_len(s.x0, "x0");
    check_len(s.eta, "eta");
    check_len(s.sigma, "sigma");
    if (s.B.n() != s.d) rep.push_back({"B", -1, -1, "B must be d x d"});
    if (s.C.n() != s.d) rep.push_back({"C", -1, -1, "C must be d x d"});
    if (static_cast<int>(s.mu.size()) != s.d) rep.push_back({"mu", -1, -1, "need one branching measure per type"});
    if (!rep.empty()) return rep;  // shape errors make entry checks meaningless

    for (int i = 0; i < s.d; ++i) {
        if (!(s.x0[static_cast<std::size_t>(i)] > 0.0) || !std::isfinite(s.x0[static_cast<std::size_t>(i)]))
            rep.push_back({"x0", i, -1, "x0[" + std::to_string(i) + "] must be strictly positive"});
        if (!(s.eta[static_cast<std::size_t>(i)] >= 0.0) || !std::isfinite(s.eta[static_cast<std::size_t>(i)]))
            rep.push_back({"eta", i, -1, "eta[" + std::to_string(i) + "] must be nonnegative"});
        if (!(s.sigma[static_cast<std::size_t>(i)] >= 0.0) || !std::isfinite(s.sigma[static_cast<std::size_t>(i)]))
            rep.push_back({"sigma", i, -1, "sigma[" + std::to_string(i) + "] must be nonnegative"});
    }
    for (int i = 0; i < s.d; ++i)
        for (int j = 0; j < s.d; ++j) {
            if (!std::isfinite(s.B(i, j)))
                rep.push_back({"B", i, j, "B[" + std::to_string(i) + "][" + std::to_string(j) + "] must be finite"});
            else if (i != j && s.B(i, j) < 0.0)
                rep.push_back({"B", i, j,
                               "off-diagonal B negative at (" + std::to_string(i) + "," + std::to_string(j) + ")"});
            if (!std::isfinite(s.C(i, j)))
                rep.push_back({"C", i, j, "C[" + std::to_string(i) + "][" + std::to_string(j) + "] must be finite"});
        }
    for (int i = 0; i < s.d; ++i) {
        double cii = s.C(i, i);
        if (s.strict_interaction) {
            if (!(cii < 0.0)) rep.push_back({"C", i, i, "c_ii must be < 0 at i=" + std::to_string(i)});
        } else if (cii > 0.0) {
            rep.push_back({"C", i, i, "c_ii must be <= 0 at i=" + std::to_string(i) + " (relaxed mode)"});
        }
    }
    detail::check_measure(s.nu, s.d, "nu", rep);
    for (int i = 0; i < s.d; ++i) detail::check_measure(s.mu[static_cast<std::size_t>(i)], s.d, "mu" + std::to_string(i + 1), rep);
    return rep;
}

// gamma_i(x) = x_i * sum_j C_ij x_j
inline Vec gamma(const ModelSpec& s, const Vec& x) {
    Vec g(static_cast<std::size_t>(s.d));
    for (int i = 0; i < s.d; ++i) {
        double dot = 0.0;
        for (int j = 0; j < s.d; ++j) dot += s.C(i, j) * x[static_cast<std::size_t>(j)];
        g[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] * dot;
    }
    return g;
}

// Raw SDE drift eta + Bx + gamma(x) (no jump compensation; the simulation
// engine adds that separately).
inline Vec drift(const ModelSpec& s, const Vec& x) {
    Vec f(static_cast<std::size_t>(s.d));
    for (int i = 0; i < s.d; ++i) {
        double v = s.eta[static_cast<std::size_t>(i)];
        double dot = 0.0;
        for (int j = 0; j < s.d; ++j) {
            v += s.B(i, j) * x[static_cast<std::size_t>(j)];
            dot += s.C(i, j) * x[static_cast<std::size_t>(j)];
        }
        f[static_cast<std::size_t>(i)] = v + x[static_cast<std::size_t>(i)] * dot;
    }
    return f;
}

inline bool measures_empty(const ModelSpec& s) {
    if (!s.nu.empty()) return false;
    for (const auto& m : s.mu)
        if (!m.empty()) return false;
    return true;
}

// Mean own-type jump size: int z_i mu_i(dz).
inline double own_jump_mean(const ModelSpec& s, int i) {
    return measure_moment(s.mu[static_cast<std::size_t>(i)], i, 1, kInf);
}

}  // namespace cimbi
