#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "cimbi/conditions.hpp"
#include "cimbi/model.hpp"
#include "cimbi/sde_engine.hpp"
#include "cimbi/serialize.hpp"

// Declarative run configuration: a single text file with [model], [path] and
// [experiment] sections. Keys take whitespace-separated values; matrices are
// row-major lists; jump measures are repeated atom lines
// (nu_atom / mu<i>_atom = weight z_1 ... z_d). '#' starts a comment.

namespace cimbi::config {

struct ExperimentParams {
    std::uint64_t n_paths = 1000;
    std::uint64_t seed = 0;
    std::vector<double> qs{0.1, 0.25, 0.5, 0.75, 0.9};
    double bound_T = 0.0;   // 0 = use path T
    double bound_M = 0.0;   // 0 = 10 * max(1, max x0)
    int grid_depth = 40;
    conditions::SignMode sign_mode = conditions::SignMode::NonExplosion;
    double lyap_m = 0.0;    // 0 = 10 * max(1, max x0)
    int lyap_grid = 64;
    double cd1_r = 3.0;
    int cd1_grid = 65;
    double tol_cmp = -1.0;  // < 0 = default tolerance model
    std::vector<double> sweep_T;
    std::vector<double> sweep_eps;
};

struct ParsedConfig {
    ModelSpec spec;
    engine::PathConfig path;
    ExperimentParams exp;
};

struct ParseError {
    int line = 0;
    std::string message;
};

using ParseResult = std::variant<ParsedConfig, std::vector<ParseError>>;

namespace detail {

inline bool parse_double(const std::string& tok, double& out) {
    if (tok == "inf") {
        out = kInf;
        return true;
    }
    try {
        std::size_t used = 0;
        out = std::stod(tok, &used);
        return used == tok.size();
    } catch (...) {
        return false;
    }
}

inline bool parse_bool(const std::string& tok, bool& out) {
    if (tok == "true" || tok == "1") {
        out = true;
        return true;
    }
    if (tok == "false" || tok == "0") {
        out = false;
        return true;
    }
    return false;
}

struct Line {
    int no;
    std::string key;
    std::vector<std::string> values;
};

}  // namespace detail

inline ParseResult parse_config_text(const std::string& text) {
    std::vector<ParseError> errors;
    std::map<std::string, std::vector<detail::Line>> sections;
    {
        std::istringstream in(text);
        std::string raw;
        int lineno = 0;
        std::string section;
        while (std::getline(in, raw)) {
            ++lineno;
            auto hash = raw.find('#');
            if (hash != std::string::npos) raw.erase(hash);
            std::istringstream ls(raw);
            std::string first;
            if (!(ls >> first)) continue;
            if (first.front() == '[') {
                if (first.back() != ']') {
                    errors.push_back({lineno, "malformed section header"});
                    continue;
                }
                section = first.substr(1, first.size() - 2);
                if (section != "model" && section != "path" && section != "experiment")
                    errors.push_back({lineno, "unknown section [" + section + "]"});
                continue;
            }
            if (section.empty()) {
                errors.push_back({lineno, "key outside of any section"});
                continue;
            }
            detail::Line line;
            line.no = lineno;
            line.key = first;
            std::string tok;
            bool saw_eq = false;
            while (ls >> tok) {
                if (!saw_eq) {
                    if (tok == "=") {
                        saw_eq = true;
                        continue;
                    }
                    auto eq = tok.find('=');
                    if (eq == 0) {
                        saw_eq = true;
                        if (tok.size() > 1) line.values.push_back(tok.substr(1));
                        continue;
                    }
                    errors.push_back({lineno, "expected '=' after key '" + line.key + "'"});
                    saw_eq = true;
                    continue;
                }
                line.values.push_back(tok);
            }
            if (line.key.find('=') != std::string::npos) {
                auto eq = line.key.find('=');
                std::string rest = line.key.substr(eq + 1);
                line.key.erase(eq);
                if (!rest.empty()) line.values.insert(line.values.begin(), rest);
            }
            sections[section].push_back(std::move(line));
        }
    }

    ParsedConfig out;
    auto err = [&](int line, const std::string& msg) { errors.push_back({line, msg}); };

    auto get_doubles = [&](const detail::Line& l, std::size_t count) {
        std::vector<double> v;
        if (count != 0 && l.values.size() != count) {
            err(l.no, l.key + ": expected " + std::to_string(count) + " values, got " + std::to_string(l.values.size()));
            return v;
        }
        for (const auto& tok : l.values) {
            double x;
            if (!detail::parse_double(tok, x)) {
                err(l.no, l.key + ": cannot parse number '" + tok + "'");
                return std::vector<double>{};
            }
            v.push_back(x);
        }
        return v;
    };

    // ---- [model] ----
    int d = 0;
    {
        auto it = sections.find("model");
        if (it == sections.end()) {
            err(0, "missing [model] section");
            return errors;
        }
        for (const auto& l : it->second)
            if (l.key == "d") {
                if (l.values.size() != 1 || !(std::istringstream(l.values[0]) >> d) || d < 1)
                    err(l.no, "d: expected a positive integer");
            }
        if (d < 1) {
            err(0, "model dimension d missing or invalid");
            return errors;
        }
        out.spec.d = d;
        out.spec.B = SquareMat(d);
        out.spec.C = SquareMat(d);
        out.spec.mu.resize(static_cast<std::size_t>(d));
        bool saw_x0 = false, saw_eta = false, saw_sigma = false, saw_B = false, saw_C = false;
        for (const auto& l : it->second) {
            if (l.key == "d") continue;
            if (l.key == "x0") {
                out.spec.x0 = get_doubles(l, static_cast<std::size_t>(d));
                saw_x0 = true;
            } else if (l.key == "eta") {
                out.spec.eta = get_doubles(l, static_cast<std::size_t>(d));
                saw_eta = true;
            } else if (l.key == "sigma") {
                out.spec.sigma = get_doubles(l, static_cast<std::size_t>(d));
                saw_sigma = true;
            } else if (l.key == "B" || l.key == "C") {
                auto v = get_doubles(l, static_cast<std::size_t>(d) * d);
                if (static_cast<int>(v.size()) == d * d) {
                    if (l.key == "B")
                        out.spec.B = SquareMat::from_rows(d, v), saw_B = true;
                    else
                        out.spec.C = SquareMat::from_rows(d, v), saw_C = true;
                }
            } else if (l.key == "strict_interaction") {
                bool b;
                if (l.values.size() == 1 && detail::parse_bool(l.values[0], b))
                    out.spec.strict_interaction = b;
                else
                    err(l.no, "strict_interaction: expected true/false");
            } else if (l.key == "nu_atom" || (l.key.rfind("mu", 0) == 0 && l.key.find("_atom") != std::string::npos)) {
                auto v = get_doubles(l, static_cast<std::size_t>(d) + 1);
                if (static_cast<int>(v.size()) != d + 1) continue;
                JumpAtom atom;
                atom.weight = v[0];
                atom.z.assign(v.begin() + 1, v.end());
                JumpMeasure* target = nullptr;
                int which = -1;
                if (l.key == "nu_atom") {
                    target = &out.spec.nu;
                } else {
                    std::string idx = l.key.substr(2, l.key.size() - 2 - 5);
                    try {
                        which = std::stoi(idx);
                    } catch (...) {
                        which = -1;
                    }
                    if (which < 1 || which > d) {
                        err(l.no, l.key + ": branching measure index out of range 1.." + std::to_string(d));
                        continue;
                    }
                    target = &out.spec.mu[static_cast<std::size_t>(which - 1)];
                }
                int atom_index = static_cast<int>(target->atoms.size());
                if (!(atom.weight > 0.0)) {
                    err(l.no, l.key + " atom " + std::to_string(atom_index) + ": weight must be positive");
                    continue;
                }
                bool zok = true, some_pos = false;
                for (double z : atom.z) {
                    if (z < 0.0) zok = false;
                    if (z > 0.0) some_pos = true;
                }
                if (!zok || !some_pos) {
                    err(l.no, l.key + " atom " + std::to_string(atom_index) + ": jump vector must be nonnegative and nonzero");
                    continue;
                }
                target->atoms.push_back(std::move(atom));
            } else {
                err(l.no, "unknown [model] key '" + l.key + "'");
            }
        }
        if (!saw_x0) err(0, "missing model key x0");
        if (!saw_eta) err(0, "missing model key eta");
        if (!saw_sigma) err(0, "missing model key sigma");
        if (!saw_B) err(0, "missing model key B");
        if (!saw_C) err(0, "missing model key C");
    }

    // ---- [path] ----
    {
        auto it = sections.find("path");
        if (it == sections.end()) {
            err(0, "missing [path] section");
        } else {
            bool saw_dt = false, saw_T = false;
            for (const auto& l : it->second) {
                auto one = [&](double& field) {
                    auto v = get_doubles(l, 1);
                    if (v.size() == 1) field = v[0];
                };
                if (l.key == "dt") {
                    one(out.path.dt);
                    saw_dt = true;
                } else if (l.key == "T") {
                    one(out.path.T);
                    saw_T = true;
                } else if (l.key == "eps_hit")
                    one(out.path.eps_hit);
                else if (l.key == "m_trunc")
                    one(out.path.m_trunc);
                else if (l.key == "substep_cap")
                    one(out.path.substep_cap);
                else if (l.key == "noise_cap")
                    one(out.path.noise_cap);
                else if (l.key == "record_stride") {
                    auto v = get_doubles(l, 1);
                    if (v.size() == 1) out.path.record_stride = static_cast<int>(v[0]);
                } else if (l.key == "stop_at_hit" || l.key == "stop_at_extinct") {
                    bool b;
                    if (l.values.size() == 1 && detail::parse_bool(l.values[0], b)) {
                        if (l.key == "stop_at_hit")
                            out.path.stop_at_hit = b;
                        else
                            out.path.stop_at_extinct = b;
                    } else
                        err(l.no, l.key + ": expected true/false");
                } else
                    err(l.no, "unknown [path] key '" + l.key + "'");
            }
            if (!saw_dt) err(0, "missing path key dt");
            if (!saw_T) err(0, "missing path key T");
        }
    }

    // ---- [experiment] ----
    if (auto it = sections.find("experiment"); it != sections.end()) {
        for (const auto& l : it->second) {
            auto one = [&](double& field) {
                auto v = get_doubles(l, 1);
                if (v.size() == 1) field = v[0];
            };
            auto one_u64 = [&](std::uint64_t& field) {
                auto v = get_doubles(l, 1);
                if (v.size() == 1 && v[0] >= 0) field = static_cast<std::uint64_t>(v[0]);
            };
            auto one_int = [&](int& field) {
                auto v = get_doubles(l, 1);
                if (v.size() == 1) field = static_cast<int>(v[0]);
            };
            if (l.key == "n_paths")
                one_u64(out.exp.n_paths);
            else if (l.key == "seed")
                one_u64(out.exp.seed);
            else if (l.key == "qs")
                out.exp.qs = get_doubles(l, 0);
            else if (l.key == "bound_T")
                one(out.exp.bound_T);
            else if (l.key == "bound_M")
                one(out.exp.bound_M);
            else if (l.key == "grid_depth")
                one_int(out.exp.grid_depth);
            else if (l.key == "lyap_m")
                one(out.exp.lyap_m);
            else if (l.key == "lyap_grid")
                one_int(out.exp.lyap_grid);
            else if (l.key == "cd1_r")
                one(out.exp.cd1_r);
            else if (l.key == "cd1_grid")
                one_int(out.exp.cd1_grid);
            else if (l.key == "tol_cmp")
                one(out.exp.tol_cmp);
            else if (l.key == "sweep_T")
                out.exp.sweep_T = get_doubles(l, 0);
            else if (l.key == "sweep_eps")
                out.exp.sweep_eps = get_doubles(l, 0);
            else if (l.key == "sign_mode") {
                if (l.values.size() == 1 && l.values[0] == "nonexplosion")
                    out.exp.sign_mode = conditions::SignMode::NonExplosion;
                else if (l.values.size() == 1 && l.values[0] == "nonnegative")
                    out.exp.sign_mode = conditions::SignMode::SumNonnegative;
                else
                    err(l.no, "sign_mode: expected nonexplosion or nonnegative");
            } else
                err(l.no, "unknown [experiment] key '" + l.key + "'");
        }
    }

    if (!errors.empty()) return errors;
    return out;
}

inline ParseResult parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) return std::vector<ParseError>{{0, "cannot open config file '" + path + "'"}};
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

inline std::string emit_canonical(const ParsedConfig& c) {
    std::string out = canonical_model_text(c.spec);
    out += canonical_path_text(c.path);
    out += "[experiment]\n";
    out += "n_paths = " + std::to_string(c.exp.n_paths) + "\n";
    out += "seed = " + std::to_string(c.exp.seed) + "\n";
    out += "qs =";
    for (double q : c.exp.qs) out += " " + fmt_g17(q);
    out += "\n";
    out += "bound_T = " + fmt_g17(c.exp.bound_T) + "\n";
    out += "bound_M = " + fmt_g17(c.exp.bound_M) + "\n";
    out += "grid_depth = " + std::to_string(c.exp.grid_depth) + "\n";
    out += std::string("sign_mode = ") +
           (c.exp.sign_mode == conditions::SignMode::NonExplosion ? "nonexplosion" : "nonnegative") + "\n";
    out += "lyap_m = " + fmt_g17(c.exp.lyap_m) + "\n";
    out += "lyap_grid = " + std::to_string(c.exp.lyap_grid) + "\n";
    out += "cd1_r = " + fmt_g17(c.exp.cd1_r) + "\n";
    out += "cd1_grid = " + std::to_string(c.exp.cd1_grid) + "\n";
    out += "tol_cmp = " + fmt_g17(c.exp.tol_cmp) + "\n";
    if (!c.exp.sweep_T.empty()) {
        out += "sweep_T =";
        for (double t : c.exp.sweep_T) out += " " + fmt_g17(t);
        out += "\n";
    }
    if (!c.exp.sweep_eps.empty()) {
        out += "sweep_eps =";
        for (double e : c.exp.sweep_eps) out += " " + fmt_g17(e);
        out += "\n";
    }
    return out;
}

}  // namespace cimbi::config
