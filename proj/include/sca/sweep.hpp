#pragma once

// Parameter sweeps, figure datasets and the count-file fidelity estimator
// behind the command-line tool.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sca/amplifier.hpp"
#include "sca/analysis.hpp"
#include "sca/dataset.hpp"
#include "sca/errors.hpp"
#include "sca/lab_defaults.hpp"
#include "sca/montecarlo.hpp"
#include "sca/observables.hpp"

namespace sca {

enum class SweepMode { analytic, montecarlo, both };

struct SweepSpec {
    std::vector<double> alpha_sq_grid;
    std::vector<int> n_states_list{2, 4, 8};
    SweepMode mode = SweepMode::analytic;
    std::string output_path;  // empty: stdout
    OutputFormat output_format = OutputFormat::csv;
    std::string counts_path;  // Monte Carlo count tables, optional

    double comparison_reflectivity = lab::kComparisonReflectivity;
    double subtraction_transmissivity = lab::kSubtractionTransmissivity;
    lab::DetectorSet detectors = lab::detectors();
    double epsilon = 0.0;
    int phase_points = 256;

    double prf = lab::kPulseRate;
    std::uint64_t pulses = 1'000'000;
    std::uint64_t seed = 1;
    int mc_phase_points = 16;
    unsigned workers = 1;

    nlohmann::json echo = nlohmann::json::object();  // configuration as read

    bool wants_analytic() const { return mode != SweepMode::montecarlo; }
    bool wants_montecarlo() const { return mode != SweepMode::analytic; }

    void validate() const {
        if (alpha_sq_grid.empty()) throw ConfigError("sweep.alpha_sq", "grid must not be empty");
        for (std::size_t i = 0; i < alpha_sq_grid.size(); ++i) {
            if (!(alpha_sq_grid[i] >= 0.0)) throw ConfigError("sweep.alpha_sq", "values must be >= 0");
            if (i > 0 && !(alpha_sq_grid[i] > alpha_sq_grid[i - 1])) {
                throw ConfigError("sweep.alpha_sq", "values must be distinct and increasing");
            }
        }
        if (n_states_list.empty()) throw ConfigError("sweep.n_states", "list must not be empty");
        for (int n : n_states_list) {
            if (n < 1) throw ConfigError("sweep.n_states", "N must be >= 1");
        }
        if (!(comparison_reflectivity > 0.0 && comparison_reflectivity <= 1.0)) {
            throw ConfigError("amplifier.comparison_reflectivity", "must lie in (0, 1]");
        }
        if (!(subtraction_transmissivity > 0.0 && subtraction_transmissivity <= 1.0)) {
            throw ConfigError("amplifier.subtraction_transmissivity", "must lie in (0, 1]");
        }
        const std::pair<const char*, const DetectorModel*> dets[] = {
            {"d0", &detectors.d0}, {"d1", &detectors.d1}, {"da", &detectors.da}, {"db", &detectors.db}};
        for (const auto& [name, d] : dets) {
            try {
                d->validate();
            } catch (const std::invalid_argument& e) {
                throw ConfigError(name, e.what());
            }
        }
        if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ConfigError("analysis.epsilon", "must lie in [0, 1)");
        if (phase_points < 8) throw ConfigError("analysis.phase_points", "must be >= 8");
        if (!(prf > 0.0)) throw ConfigError("sweep.prf", "must be > 0");
        if (wants_montecarlo()) {
            if (pulses < 1) throw ConfigError("sweep.pulses", "a Monte Carlo run needs at least one pulse");
            if (mc_phase_points < 1) throw ConfigError("sweep.mc_phase_points", "must be >= 1");
        }
    }
};

inline AmplifierConfig sweep_amplifier(const SweepSpec& s, double alpha_sq, int n_states) {
    return AmplifierConfig::from_ratios(s.comparison_reflectivity, s.subtraction_transmissivity,
                                        StateSet(CoherentAmplitude::from_mean_photons(alpha_sq), n_states));
}

inline AnalysisConfig sweep_analysis(const SweepSpec& s, const AmplifierConfig& cfg) {
    AnalysisConfig a;
    a.reference_amplitude = target_state(cfg, 0);
    a.epsilon = s.epsilon;
    a.detector = s.detectors.da;
    a.phase_points = s.phase_points;
    return a;
}

inline RunSpec sweep_run(const SweepSpec& s, const AmplifierConfig& cfg, std::uint64_t point_index) {
    RunSpec r;
    r.amplifier = cfg;
    r.d0 = s.detectors.d0;
    r.d1 = s.detectors.d1;
    r.da = s.detectors.da;
    r.db = s.detectors.db;
    r.analysis = sweep_analysis(s, cfg);
    r.phases = phase_scan(s.mc_phase_points);
    r.n_pulses = s.pulses;
    r.master_seed = chunk_seed(s.seed, point_index);
    return r;
}

inline constexpr const char* kConditioningNames[] = {"unconditioned", "d0_silent", "heralded"};
inline constexpr Conditioning kConditionings[] = {Conditioning::none, Conditioning::d0_silent,
                                                  Conditioning::d0_silent_and_d1_fires};

inline std::vector<std::string> sweep_columns(SweepMode mode) {
    std::vector<std::string> cols{"n_states", "alpha_sq", "gain_sq"};
    if (mode != SweepMode::montecarlo) {
        for (const char* c : {"fidelity", "correct_state_fraction", "success_probability", "success_rate",
                              "visibility_unconditioned", "visibility_d0_silent", "visibility_heralded"}) {
            cols.emplace_back(c);
        }
    }
    if (mode != SweepMode::analytic) {
        for (const char* c :
             {"mc_pulses", "mc_accepted", "mc_fidelity", "mc_fidelity_se", "mc_correct_state_fraction",
              "mc_correct_state_fraction_se", "mc_success_probability", "mc_success_probability_se",
              "mc_success_rate", "mc_visibility_unconditioned", "mc_visibility_d0_silent",
              "mc_visibility_heralded"}) {
            cols.emplace_back(c);
        }
    }
    return cols;
}

inline const std::vector<std::string>& counts_columns() {
    static const std::vector<std::string> cols{"n_states", "alpha_sq", "g2a2",     "eta_l",
                                               "epsilon",  "n_A_sig",  "n_B_sig",  "n_A_vac",
                                               "n_B_vac",  "pulses_sig", "pulses_vac"};
    return cols;
}

struct SweepResult {
    Dataset rows;
    Dataset counts;  // heralded count tables at analysis phase 0, Monte Carlo only
};

/// One row per (N, alpha^2), ordered by grid position.
inline SweepResult run_sweep(const SweepSpec& spec) {
    spec.validate();
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    SweepResult out;
    out.rows.spec = spec.echo;
    out.rows.columns = sweep_columns(spec.mode);
    out.counts.spec = spec.echo;
    out.counts.columns = counts_columns();

    std::uint64_t point = 0;
    for (int n : spec.n_states_list) {
        for (double a2 : spec.alpha_sq_grid) {
            const auto cfg = sweep_amplifier(spec, a2, n);
            const auto& d = spec.detectors;
            const double g = nominal_gain(cfg);
            std::vector<double> row{static_cast<double>(n), a2, g * g};
            if (spec.wants_analytic()) {
                const auto analysis = sweep_analysis(spec, cfg);
                double fid = nan, csf = nan, succ = 0.0;
                try {
                    const auto f = figures_of_merit(cfg, d.d0, d.d1);
                    fid = f.fidelity;
                    csf = f.correct_state_fraction;
                    succ = f.success_probability;
                } catch (const NeverHeralded&) {
                }
                row.insert(row.end(), {fid, csf, succ, succ * spec.prf});
                for (auto c : kConditionings) {
                    double v = nan;
                    try {
                        v = conditioned_visibility(cfg, d.d0, d.d1, analysis, c);
                    } catch (const NeverHeralded&) {
                    }
                    row.push_back(v);
                }
            }
            if (spec.wants_montecarlo()) {
                const auto run = sweep_run(spec, cfg, point);
                const auto tally = simulate_run(run, spec.workers);
                const auto h = summarize(tally, run, Conditioning::d0_silent_and_d1_fires);
                row.insert(row.end(),
                           {static_cast<double>(h.pulses), static_cast<double>(h.accepted), h.fidelity,
                            h.fidelity_se, h.correct_state_fraction, h.correct_state_fraction_se,
                            h.success_probability, h.success_probability_se, h.success_probability * spec.prf});
                for (auto c : kConditionings) row.push_back(summarize(tally, run, c).visibility);

                const auto ct = conditioned_counts(tally, Conditioning::d0_silent_and_d1_fires, 0);
                out.counts.rows.push_back(
                    {static_cast<double>(n), a2, g * g * a2, d.da.effective_efficiency(), spec.epsilon,
                     static_cast<double>(ct.n_A_sig), static_cast<double>(ct.n_B_sig),
                     static_cast<double>(ct.n_A_vac), static_cast<double>(ct.n_B_vac),
                     static_cast<double>(ct.pulses_sig), static_cast<double>(ct.pulses_vac)});
            }
            out.rows.rows.push_back(std::move(row));
            ++point;
        }
    }
    return out;
}

// --- figures ---------------------------------------------------------------

struct FigureParams {
    lab::DetectorSet detectors = lab::detectors();
    std::vector<double> alpha_sq_grid;  // empty: 0.01, 0.02, ..., 1.00
    int phase_points = 256;
    double prf = lab::kPulseRate;
};

inline std::vector<double> default_figure_grid() {
    std::vector<double> g;
    for (int i = 1; i <= 100; ++i) g.push_back(i / 100.0);
    return g;
}

inline bool is_figure_id(const std::string& id) {
    return id == "fig3a" || id == "fig3b" || id == "fig3c" || id == "fig3d" || id == "fig4";
}

/// Model curves for one figure id, on its axes (alpha^2 vs metric).
inline Dataset reproduce_figure(const std::string& id, const FigureParams& params = {}) {
    if (!is_figure_id(id)) throw ConfigError("figure", "unknown figure id '" + id + "'");
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    const auto grid = params.alpha_sq_grid.empty() ? default_figure_grid() : params.alpha_sq_grid;
    const auto& d = params.detectors;

    Dataset out;
    out.spec = {{"figure", id}, {"prf", params.prf}, {"phase_points", params.phase_points},
                {"d1_effective_efficiency", d.d1.effective_efficiency()},
                {"d0_effective_efficiency", d.d0.effective_efficiency()}};

    auto guarded = [&](auto&& f) {
        try {
            return f();
        } catch (const NeverHeralded&) {
            return nan;
        }
    };

    if (id == "fig3a") {
        out.columns = {"alpha_sq", "visibility_unconditioned", "visibility_d0_silent", "visibility_heralded"};
        for (double a2 : grid) {
            const auto cfg = lab::amplifier(a2, 2);
            auto analysis = lab::analysis(cfg, d.da);
            analysis.phase_points = params.phase_points;
            std::vector<double> row{a2};
            for (auto c : kConditionings) {
                row.push_back(guarded([&] { return conditioned_visibility(cfg, d.d0, d.d1, analysis, c); }));
            }
            out.rows.push_back(std::move(row));
        }
    } else if (id == "fig4") {
        out.columns = {"alpha_sq", "success_probability", "success_rate", "success_rate_n4", "success_rate_n8"};
        for (double a2 : grid) {
            const double r2 = success_rate(lab::amplifier(a2, 2), d.d0, d.d1, params.prf);
            out.rows.push_back({a2, r2 / params.prf, r2,
                                success_rate(lab::amplifier(a2, 4), d.d0, d.d1, params.prf),
                                success_rate(lab::amplifier(a2, 8), d.d0, d.d1, params.prf)});
        }
    } else {
        const int n = id == "fig3b" ? 2 : id == "fig3c" ? 4 : 8;
        out.spec["n_states"] = n;
        out.columns = {"alpha_sq", "correct_state_fraction", "fidelity", "fidelity_unconditioned"};
        for (double a2 : grid) {
            const auto cfg = lab::amplifier(a2, n);
            double csf = nan, fid = nan;
            try {
                const auto f = figures_of_merit(cfg, d.d0, d.d1);
                csf = f.correct_state_fraction;
                fid = f.fidelity;
            } catch (const NeverHeralded&) {
            }
            const double unc = guarded([&] { return figures_of_merit(cfg, d.d0, d.d1, Conditioning::none).fidelity; });
            out.rows.push_back({a2, csf, fid, unc});
        }
    }
    return out;
}

// --- estimator ---------------------------------------------------------------

struct EstimatorParams {
    double g2a2 = nan_value();
    double eta_l = nan_value();

    static constexpr double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }
};

struct EstimatorReport {
    CountTable counts;
    double g2a2 = 0.0;
    double eta_l = 0.0;
    struct Line {
        ExponentConvention convention;
        PulseNumbers pulses;
        double p_signal;
        double p_vacuum;
        double fidelity;
    };
    std::vector<Line> lines;  // one per exponent convention
};

inline EstimatorReport run_estimator(const CountTable& counts, const EstimatorParams& p) {
    if (std::isnan(p.g2a2)) throw ConfigError("g2a2", "missing (flag or column)");
    if (std::isnan(p.eta_l)) throw ConfigError("eta_l", "missing (flag or column)");
    EstimatorReport r;
    r.counts = counts;
    r.g2a2 = p.g2a2;
    r.eta_l = p.eta_l;
    for (auto conv : {ExponentConvention::standard, ExponentConvention::printed}) {
        const auto n = estimate_pulse_numbers(counts, p.g2a2, p.eta_l, conv);
        if (!(n.total() > 0.0)) throw InsufficientSignal("all counts are zero");
        const auto rho = reconstruct_density(n.signal, n.vacuum, CoherentAmplitude::from_mean_photons(p.g2a2));
        r.lines.push_back({conv, n, rho.components()[0].weight, rho.components()[1].weight,
                           estimate_fidelity(n.signal, n.vacuum, p.g2a2, conv)});
    }
    return r;
}

inline nlohmann::json to_json(const EstimatorReport& r) {
    nlohmann::json j{{"g2a2", r.g2a2},
                     {"eta_l", r.eta_l},
                     {"counts",
                      {{"n_A_sig", r.counts.n_A_sig},
                       {"n_B_sig", r.counts.n_B_sig},
                       {"n_A_vac", r.counts.n_A_vac},
                       {"n_B_vac", r.counts.n_B_vac}}}};
    for (const auto& l : r.lines) {
        j["estimates"][to_string(l.convention)] = {{"N_sig", l.pulses.signal},
                                                   {"N_vac", l.pulses.vacuum},
                                                   {"P_signal", l.p_signal},
                                                   {"P_vacuum", l.p_vacuum},
                                                   {"fidelity", l.fidelity}};
    }
    return j;
}

/// Count tables from a dataset with at least the columns n_A_sig, n_B_sig,
/// n_A_vac, n_B_vac. Values given in `fallback` take precedence over optional
/// g2a2 / eta_l columns.
struct CountRecord {
    CountTable counts;
    EstimatorParams params;
};

inline std::vector<CountRecord> parse_count_records(const Dataset& d, const EstimatorParams& fallback) {
    for (const char* c : {"n_A_sig", "n_B_sig", "n_A_vac", "n_B_vac"}) {
        if (std::find(d.columns.begin(), d.columns.end(), c) == d.columns.end()) {
            throw Error(std::string("count file is missing column ") + c);
        }
    }
    auto has = [&](const char* c) { return std::find(d.columns.begin(), d.columns.end(), c) != d.columns.end(); };
    auto count = [&](std::size_t row, const char* c) -> std::uint64_t {
        const double v = d.at(row, c);
        if (!(v >= 0.0) || v != std::floor(v)) {
            throw Error("count file row " + std::to_string(row + 1) + ": " + c + " must be a non-negative integer");
        }
        return static_cast<std::uint64_t>(v);
    };
    if (d.rows.empty()) throw Error("count file has no rows");
    std::vector<CountRecord> out;
    for (std::size_t i = 0; i < d.rows.size(); ++i) {
        CountRecord rec;
        rec.counts.n_A_sig = count(i, "n_A_sig");
        rec.counts.n_B_sig = count(i, "n_B_sig");
        rec.counts.n_A_vac = count(i, "n_A_vac");
        rec.counts.n_B_vac = count(i, "n_B_vac");
        if (has("pulses_sig")) rec.counts.pulses_sig = count(i, "pulses_sig");
        if (has("pulses_vac")) rec.counts.pulses_vac = count(i, "pulses_vac");
        rec.params = fallback;
        if (std::isnan(rec.params.g2a2) && has("g2a2")) rec.params.g2a2 = d.at(i, "g2a2");
        if (std::isnan(rec.params.eta_l) && has("eta_l")) rec.params.eta_l = d.at(i, "eta_l");
        out.push_back(rec);
    }
    return out;
}

}  // namespace sca
