#pragma once

// JSON model files and result serialization.
//
// Model file keys: "x", "s", "y", "z" (arrays of strings), "channel"
// (nested [x][s][y][z] numbers), "p_s", optional "q_s", optional "s_hat" +
// "distortion" (nested [s_hat][s]). Any other key is rejected.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "isac/error.hpp"
#include "isac/frontier.hpp"
#include "isac/model.hpp"
#include "isac/sensing.hpp"
#include "isac/simulator.hpp"

namespace isac {

using json = nlohmann::json;

namespace detail {

inline Alphabet parse_alphabet(const json& j, const char* key) {
    if (!j.contains(key)) throw ModelError(std::string("missing key '") + key + "'");
    const json& a = j.at(key);
    if (!a.is_array()) throw ModelError(std::string("'") + key + "' must be an array of strings");
    Alphabet out;
    for (const auto& v : a) {
        if (!v.is_string()) throw ModelError(std::string("'") + key + "' must be an array of strings");
        out.labels.push_back(v.get<std::string>());
    }
    return out;
}

inline double parse_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ModelError("'" + where + "' must contain numbers");
    return v.get<double>();
}

/// Flattens a nested array with the given extents, row-major.
inline void flatten(const json& j, std::span<const std::size_t> dims, const std::string& where,
                    std::vector<double>& out) {
    if (dims.empty()) {
        out.push_back(parse_number(j, where));
        return;
    }
    if (!j.is_array() || j.size() != dims.front()) {
        throw ModelError("'" + where + "' must be a nested array with extent " + std::to_string(dims.front()) +
                         " at this level");
    }
    for (const auto& v : j) flatten(v, dims.subspan(1), where, out);
}

inline Pmf parse_vector(const json& j, const char* key) {
    const json& a = j.at(key);
    if (!a.is_array()) throw ModelError(std::string("'") + key + "' must be an array of numbers");
    Pmf out;
    for (const auto& v : a) out.push_back(parse_number(v, key));
    return out;
}

inline json number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

} // namespace detail

inline ProblemInstance parse_model(const json& j) {
    if (!j.is_object()) throw ModelError("model file must contain a JSON object");
    static const std::vector<std::string> known = {"x", "s", "y", "z", "channel", "p_s", "q_s", "s_hat", "distortion"};
    for (const auto& [k, v] : j.items()) {
        if (std::find(known.begin(), known.end(), k) == known.end()) throw ModelError("unknown key '" + k + "'");
    }
    Alphabet x = detail::parse_alphabet(j, "x");
    Alphabet s = detail::parse_alphabet(j, "s");
    Alphabet y = detail::parse_alphabet(j, "y");
    Alphabet z = detail::parse_alphabet(j, "z");
    if (!j.contains("channel")) throw ModelError("missing key 'channel'");
    if (!j.contains("p_s")) throw ModelError("missing key 'p_s'");

    const std::size_t dims[] = {x.size(), s.size(), y.size(), z.size()};
    std::vector<double> w;
    detail::flatten(j.at("channel"), dims, "channel", w);

    ProblemInstance inst{ChannelModel(std::move(x), std::move(s), std::move(y), std::move(z), std::move(w)),
                         detail::parse_vector(j, "p_s"), std::nullopt, std::nullopt};
    if (j.contains("q_s")) inst.q_s = detail::parse_vector(j, "q_s");

    if (j.contains("s_hat") != j.contains("distortion"))
        throw ModelError("'s_hat' and 'distortion' must be given together");
    if (j.contains("s_hat")) {
        Alphabet s_hat = detail::parse_alphabet(j, "s_hat");
        const std::size_t ddims[] = {s_hat.size(), inst.channel.ns()};
        std::vector<double> d;
        detail::flatten(j.at("distortion"), ddims, "distortion", d);
        inst.distortion = DistortionSpec(std::move(s_hat), inst.channel.ns(), std::move(d));
    }
    return inst;
}

inline ProblemInstance parse_model(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ModelError(std::string("malformed JSON: ") + e.what());
    }
    return parse_model(j);
}

inline ProblemInstance load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open model file '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str());
}

inline json to_json(const ProblemInstance& inst) {
    const ChannelModel& ch = inst.channel;
    json j;
    j["x"] = ch.x().labels;
    j["s"] = ch.s().labels;
    j["y"] = ch.y().labels;
    j["z"] = ch.z().labels;
    json w = json::array();
    for (std::size_t a = 0; a < ch.nx(); ++a) {
        json ws = json::array();
        for (std::size_t b = 0; b < ch.ns(); ++b) {
            json wy = json::array();
            for (std::size_t c = 0; c < ch.ny(); ++c) {
                json wz = json::array();
                for (std::size_t d = 0; d < ch.nz(); ++d) wz.push_back(ch(a, b, c, d));
                wy.push_back(std::move(wz));
            }
            ws.push_back(std::move(wy));
        }
        w.push_back(std::move(ws));
    }
    j["channel"] = std::move(w);
    j["p_s"] = inst.p_s;
    if (inst.q_s) j["q_s"] = *inst.q_s;
    if (inst.distortion) {
        const DistortionSpec& d = *inst.distortion;
        j["s_hat"] = d.s_hat().labels;
        json rows = json::array();
        for (std::size_t sh = 0; sh < d.n_shat(); ++sh) {
            json row = json::array();
            for (std::size_t s = 0; s < d.ns(); ++s) row.push_back(d(sh, s));
            rows.push_back(std::move(row));
        }
        j["distortion"] = std::move(rows);
    }
    return j;
}

inline json to_json(const ValidationReport& report) {
    json out = json::array();
    for (const auto& v : report) out.push_back({{"field", v.field}, {"message", v.message}});
    return out;
}

inline json to_json(const FrontierPoint& pt) {
    return {{"target", detail::number(pt.target)}, {"rate", detail::number(pt.rate)},
            {"objective", detail::number(pt.objective)}, {"p_x", pt.p_x},
            {"converged", pt.converged}, {"iterations", pt.iterations},
            {"clamped", pt.clamped}};
}

inline json to_json(const SolverConfig& cfg) {
    return {{"max_iterations", cfg.max_iterations}, {"convergence_tol", cfg.convergence_tol},
            {"bisection_tol", cfg.bisection_tol}, {"kl_clamp", cfg.kl_clamp}, {"grid_step", cfg.grid_step}};
}

/// Flat object: every populated report field, intervals as *_lo / *_hi.
inline json to_json(const SimulationReport& r) {
    json j;
    j["experiment"] = r.experiment;
    j["mode"] = to_string(r.mode);
    if (r.seed) j["seed"] = *r.seed;
    else j["seed"] = nullptr;
    j["n"] = r.n;
    j["trials"] = r.trials;
    j["p_x"] = r.p_x;
    auto put = [&](const char* key, const std::optional<double>& v) {
        if (v) j[key] = detail::number(*v);
    };
    auto put_ci = [&](const std::string& key, const std::optional<Interval>& v) {
        if (!v) return;
        j[key + "_lo"] = detail::number(v->lo);
        j[key + "_hi"] = detail::number(v->hi);
    };
    put("rate", r.rate);
    put("distortion", r.distortion);
    if (r.num_messages) j["num_messages"] = *r.num_messages;
    if (r.codebook) j["codebook"] = to_string(*r.codebook);
    if (r.input) j["input"] = to_string(*r.input);
    put("p_error_hat", r.p_error_hat);
    put_ci("p_error_ci", r.p_error_ci);
    put("excess_distortion_hat", r.excess_distortion_hat);
    put_ci("excess_distortion_ci", r.excess_distortion_ci);
    if (r.experiment == "rd") j["undecodable"] = r.undecodable;
    put("alpha_target", r.alpha_target);
    put("bin_width", r.bin_width);
    put("threshold", r.threshold);
    put("alpha_exact", r.alpha_exact);
    put("alpha_hat", r.alpha_hat);
    put_ci("alpha_ci", r.alpha_ci);
    put("beta", r.beta);
    put_ci("beta_ci", r.beta_ci);
    put("exponent_hat", r.exponent_hat);
    put("stein_limit", r.stein_limit);
    if (r.experiment == "ht") j["infinite_llr"] = r.infinite_llr;
    return j;
}

/// Writes to a sibling temporary and renames, so a failed run leaves no partial file.
inline void write_file_atomically(const std::filesystem::path& path, const std::string& contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << contents;
        out.flush();
        if (!out) {
            out.close();
            std::filesystem::remove(tmp);
            throw std::runtime_error("cannot write '" + tmp.string() + "'");
        }
    }
    std::filesystem::rename(tmp, path);
}

} // namespace isac
