#pragma once

// Sweep configuration in INI form:
//
//   [sweep]      preset, alpha_sq | alpha_sq_start/alpha_sq_stop/alpha_sq_steps,
//                n_states, mode, pulses, seed, prf, mc_phase_points
//   [amplifier]  comparison_reflectivity (r1^2), subtraction_transmissivity (t2^2)
//   [d0] [d1] [da] [db]
//                efficiency, loss, dark_prob | background_rate + background_retention,
//                signal_retention, gate_halfwidth
//   [analysis]   epsilon | outer_visibility, phase_points
//   [output]     path, format, counts_path
//
// `preset = lab` (default) starts from the measured detector parameters with the
// fitted heralding loss; `preset = ideal` starts from perfect detectors. Unknown
// sections and keys are rejected.

#include <charconv>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "sca/dataset.hpp"
#include "sca/errors.hpp"
#include "sca/lab_defaults.hpp"
#include "sca/sweep.hpp"

namespace sca {

namespace config_detail {

using Section = std::map<std::string, std::string>;
using Document = std::map<std::string, Section>;

inline const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s{
        {"sweep",
         {"preset", "alpha_sq", "alpha_sq_start", "alpha_sq_stop", "alpha_sq_steps", "n_states", "mode",
          "pulses", "seed", "prf", "mc_phase_points"}},
        {"amplifier", {"comparison_reflectivity", "subtraction_transmissivity"}},
        {"d0", {"efficiency", "loss", "dark_prob", "background_rate", "background_retention",
                "signal_retention", "gate_halfwidth"}},
        {"analysis", {"epsilon", "outer_visibility", "phase_points"}},
        {"output", {"path", "format", "counts_path"}},
    };
    return s;
}

inline bool is_detector_section(const std::string& name) {
    return name == "d0" || name == "d1" || name == "da" || name == "db";
}

inline Document load(std::istream& is) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(is, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError("config", std::string("line ") + std::to_string(e.line()) + ": " + e.message());
    }
    Document doc;
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw ConfigError(section, "keys must appear inside a [section]");
        const std::string schema_name = is_detector_section(section) ? "d0" : section;
        const auto it = schema().find(schema_name);
        if (it == schema().end()) throw ConfigError(section, "unknown section");
        for (const auto& [key, value] : body) {
            if (!it->second.contains(key)) throw ConfigError(section + "." + key, "unknown key");
            doc[section][key] = value.data();
        }
    }
    return doc;
}

inline double number(const std::string& field, const std::string& text) {
    try {
        return detail::parse_double(text, field);
    } catch (const Error&) {
        throw ConfigError(field, "not a number: '" + text + "'");
    }
}

inline std::uint64_t unsigned_integer(const std::string& field, const std::string& text) {
    const std::string s = detail::trim(text);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
        throw ConfigError(field, "not a non-negative integer: '" + text + "'");
    }
    return v;
}

inline std::vector<double> number_list(const std::string& field, const std::string& text) {
    std::vector<double> out;
    for (const auto& cell : detail::split(text, ',')) out.push_back(number(field, cell));
    if (out.empty()) throw ConfigError(field, "list must not be empty");
    return out;
}

}  // namespace config_detail

/// Parses a sweep configuration; every field is validated before returning.
inline SweepSpec parse_sweep_config(std::istream& is) {
    using namespace config_detail;
    const Document doc = load(is);
    auto get = [&](const std::string& section, const std::string& key) -> const std::string* {
        const auto s = doc.find(section);
        if (s == doc.end()) return nullptr;
        const auto k = s->second.find(key);
        return k == s->second.end() ? nullptr : &k->second;
    };

    SweepSpec spec;
    nlohmann::json echo = nlohmann::json::object();
    for (const auto& [section, body] : doc) {
        for (const auto& [key, value] : body) echo[section][key] = value;
    }
    spec.echo = echo;

    const std::string preset = get("sweep", "preset") ? detail::trim(*get("sweep", "preset")) : "lab";
    if (preset == "lab") {
        spec.detectors = lab::detectors();
    } else if (preset == "ideal") {
        spec.detectors = lab::ideal_detectors();
    } else {
        throw ConfigError("sweep.preset", "expected 'lab' or 'ideal', got '" + preset + "'");
    }

    if (const auto* v = get("sweep", "alpha_sq")) {
        if (get("sweep", "alpha_sq_start") || get("sweep", "alpha_sq_stop") || get("sweep", "alpha_sq_steps")) {
            throw ConfigError("sweep.alpha_sq", "give either a list or start/stop/steps, not both");
        }
        spec.alpha_sq_grid = number_list("sweep.alpha_sq", *v);
    } else if (get("sweep", "alpha_sq_start") || get("sweep", "alpha_sq_stop") || get("sweep", "alpha_sq_steps")) {
        for (const char* k : {"alpha_sq_start", "alpha_sq_stop", "alpha_sq_steps"}) {
            if (!get("sweep", k)) throw ConfigError(std::string("sweep.") + k, "missing");
        }
        const double start = number("sweep.alpha_sq_start", *get("sweep", "alpha_sq_start"));
        const double stop = number("sweep.alpha_sq_stop", *get("sweep", "alpha_sq_stop"));
        const auto steps = unsigned_integer("sweep.alpha_sq_steps", *get("sweep", "alpha_sq_steps"));
        if (steps < 1) throw ConfigError("sweep.alpha_sq_steps", "must be >= 1");
        for (std::uint64_t i = 0; i < steps; ++i) {
            spec.alpha_sq_grid.push_back(steps == 1 ? start
                                                    : start + (stop - start) * static_cast<double>(i) /
                                                                  static_cast<double>(steps - 1));
        }
    } else {
        throw ConfigError("sweep.alpha_sq", "missing");
    }

    if (const auto* v = get("sweep", "n_states")) {
        spec.n_states_list.clear();
        for (const auto& cell : detail::split(*v, ',')) {
            spec.n_states_list.push_back(static_cast<int>(unsigned_integer("sweep.n_states", cell)));
        }
    }
    if (const auto* v = get("sweep", "mode")) {
        const auto m = detail::trim(*v);
        if (m == "analytic") spec.mode = SweepMode::analytic;
        else if (m == "montecarlo") spec.mode = SweepMode::montecarlo;
        else if (m == "both") spec.mode = SweepMode::both;
        else throw ConfigError("sweep.mode", "expected analytic, montecarlo or both");
    }
    if (const auto* v = get("sweep", "pulses")) spec.pulses = unsigned_integer("sweep.pulses", *v);
    if (const auto* v = get("sweep", "seed")) spec.seed = unsigned_integer("sweep.seed", *v);
    if (const auto* v = get("sweep", "prf")) spec.prf = number("sweep.prf", *v);
    if (const auto* v = get("sweep", "mc_phase_points")) {
        spec.mc_phase_points = static_cast<int>(unsigned_integer("sweep.mc_phase_points", *v));
    }

    if (const auto* v = get("amplifier", "comparison_reflectivity")) {
        spec.comparison_reflectivity = number("amplifier.comparison_reflectivity", *v);
    }
    if (const auto* v = get("amplifier", "subtraction_transmissivity")) {
        spec.subtraction_transmissivity = number("amplifier.subtraction_transmissivity", *v);
    }

    const std::pair<const char*, DetectorModel*> dets[] = {{"d0", &spec.detectors.d0},
                                                           {"d1", &spec.detectors.d1},
                                                           {"da", &spec.detectors.da},
                                                           {"db", &spec.detectors.db}};
    for (const auto& [name, det] : dets) {
        const std::string s = name;
        auto field = [&](const char* key) { return s + "." + key; };
        if (const auto* v = get(s, "efficiency")) det->efficiency = number(field("efficiency"), *v);
        if (const auto* v = get(s, "loss")) det->loss_transmission = number(field("loss"), *v);
        if (const auto* v = get(s, "signal_retention")) det->signal_retention = number(field("signal_retention"), *v);
        if (const auto* v = get(s, "gate_halfwidth")) det->gate_halfwidth = number(field("gate_halfwidth"), *v);
        const auto* dark = get(s, "dark_prob");
        const auto* rate = get(s, "background_rate");
        const auto* retention = get(s, "background_retention");
        if (dark && (rate || retention)) {
            throw ConfigError(field("dark_prob"), "give either dark_prob or background_rate, not both");
        }
        if (dark) det->dark_prob_per_gate = number(field("dark_prob"), *dark);
        if (rate || retention) {
            const double r = rate ? number(field("background_rate"), *rate) : lab::kBackgroundRate;
            const double keep = retention ? number(field("background_retention"), *retention)
                                          : lab::kBackgroundRetention;
            try {
                det->dark_prob_per_gate = dark_prob_per_pulse(r, spec.prf, keep);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(field("background_rate"), e.what());
            }
        }
    }

    const auto* eps = get("analysis", "epsilon");
    const auto* vis = get("analysis", "outer_visibility");
    if (eps && vis) throw ConfigError("analysis.epsilon", "give either epsilon or outer_visibility, not both");
    if (eps) spec.epsilon = number("analysis.epsilon", *eps);
    if (vis) {
        const double v = number("analysis.outer_visibility", *vis);
        if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("analysis.outer_visibility", "must lie in [0, 1]");
        spec.epsilon = epsilon_from_visibility(v);
    }
    if (const auto* v = get("analysis", "phase_points")) {
        spec.phase_points = static_cast<int>(unsigned_integer("analysis.phase_points", *v));
    }

    if (const auto* v = get("output", "path")) spec.output_path = detail::trim(*v);
    if (const auto* v = get("output", "counts_path")) spec.counts_path = detail::trim(*v);
    if (const auto* v = get("output", "format")) {
        const auto f = detail::trim(*v);
        if (f == "csv") spec.output_format = OutputFormat::csv;
        else if (f == "json") spec.output_format = OutputFormat::json;
        else throw ConfigError("output.format", "expected csv or json");
    }

    spec.validate();
    return spec;
}

inline SweepSpec parse_sweep_config_text(const std::string& text) {
    std::istringstream is(text);
    return parse_sweep_config(is);
}

}  // namespace sca
