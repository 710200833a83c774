#pragma once

#include <string>

#include "cimbi/model.hpp"
#include "cimbi/sde_engine.hpp"
#include "cimbi/util.hpp"

// Canonical text form of the model and path sections. This is both the
// canonical config emitter's body and the byte stream behind config digests.

namespace cimbi {

inline std::string canonical_model_text(const ModelSpec& s) {
    std::string out = "[model]\n";
    out += "d = " + std::to_string(s.d) + "\n";
    auto vec_line = [&](const char* key, const Vec& v) {
        out += key;
        out += " =";
        for (double x : v) out += " " + fmt_g17(x);
        out += "\n";
    };
    vec_line("x0", s.x0);
    vec_line("eta", s.eta);
    vec_line("sigma", s.sigma);
    auto mat_line = [&](const char* key, const SquareMat& m) {
        out += key;
        out += " =";
        for (int i = 0; i < m.n(); ++i)
            for (int j = 0; j < m.n(); ++j) out += " " + fmt_g17(m(i, j));
        out += "\n";
    };
    mat_line("B", s.B);
    mat_line("C", s.C);
    out += std::string("strict_interaction = ") + (s.strict_interaction ? "true" : "false") + "\n";
    auto atom_lines = [&](const std::string& key, const JumpMeasure& m) {
        for (const auto& a : m.atoms) {
            out += key + " = " + fmt_g17(a.weight);
            for (double z : a.z) out += " " + fmt_g17(z);
            out += "\n";
        }
    };
    atom_lines("nu_atom", s.nu);
    for (int i = 0; i < s.d; ++i) atom_lines("mu" + std::to_string(i + 1) + "_atom", s.mu[static_cast<std::size_t>(i)]);
    return out;
}

inline std::string canonical_path_text(const engine::PathConfig& c) {
    std::string out = "[path]\n";
    out += "dt = " + fmt_g17(c.dt) + "\n";
    out += "T = " + fmt_g17(c.T) + "\n";
    out += "eps_hit = " + fmt_g17(c.eps_hit) + "\n";
    out += "m_trunc = " + (c.m_trunc == kInf ? std::string("inf") : fmt_g17(c.m_trunc)) + "\n";
    out += "record_stride = " + std::to_string(c.record_stride) + "\n";
    out += "substep_cap = " + fmt_g17(c.substep_cap) + "\n";
    out += "noise_cap = " + fmt_g17(c.noise_cap) + "\n";
    out += std::string("stop_at_hit = ") + (c.stop_at_hit ? "true" : "false") + "\n";
    out += std::string("stop_at_extinct = ") + (c.stop_at_extinct ? "true" : "false") + "\n";
    return out;
}

inline std::string config_digest(const ModelSpec& s, const engine::PathConfig& c, const std::string& op,
                                 std::uint64_t n, std::uint64_t seed) {
    std::string blob = canonical_model_text(s) + canonical_path_text(c) + op + "\nn = " + std::to_string(n) +
                       "\nseed = " + std::to_string(seed) + "\n";
    return fnv1a64_hex(blob);
}

}  // namespace cimbi
