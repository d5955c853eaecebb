#pragma once

// Analytic predictions that join the amplifier model and the analysis
// interferometer: fringe visibility of the conditioned output and the
// per-pulse probabilities behind every Monte Carlo tally entry.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "sca/amplifier.hpp"
#include "sca/analysis.hpp"
#include "sca/montecarlo.hpp"

namespace sca {

/// Visibility of D_A over an analysis phase scan, for outputs conditioned on
/// `c` and averaged over inputs. The test state follows the input phase.
inline double conditioned_visibility(const AmplifierConfig& cfg, const DetectorModel& det0,
                                     const DetectorModel& det1, const AnalysisConfig& analysis,
                                     Conditioning c) {
    const int n = cfg.n_states();
    struct Term {
        double weight;
        CoherentAmplitude output;
        CoherentAmplitude reference;
    };
    std::vector<Term> terms;
    double total = 0.0;
    for (int m = 0; m < n; ++m) {
        const auto reference = analysis.reference_amplitude.rotated(cfg.input_set.phase(m));
        for (const auto& b : enumerate_branches(cfg, m)) {
            const double w = acceptance_weight(b, det0, det1, c) / n;
            if (w > 0.0) terms.push_back({w, b.output_amplitude, reference});
            total += w;
        }
    }
    if (!(total > 0.0)) throw NeverHeralded();

    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int j = 0; j < analysis.phase_points; ++j) {
        const double phase = 2.0 * std::numbers::pi * j / analysis.phase_points;
        double p = 0.0;
        for (const auto& t : terms) {
            p += t.weight *
                 click_probability(analysis_port_means(t.output, t.reference, phase).a, analysis.detector);
        }
        p /= total;
        lo = std::min(lo, p);
        hi = std::max(hi, p);
    }
    if (hi + lo <= 0.0) return 0.0;
    return std::clamp((hi - lo) / (hi + lo), 0.0, 1.0);
}

/// Per-pulse probabilities matching `conditioned_counts(tally, c, phase) / pulses`
/// and the raw D0 / D1 marginals.
struct ExpectedRates {
    double d0_click = 0.0;
    double d1_click = 0.0;
    double accepted = 0.0;
    double pulses_sig = 0.0;
    double pulses_vac = 0.0;
    double n_A_sig = 0.0;
    double n_B_sig = 0.0;
    double n_A_vac = 0.0;
    double n_B_vac = 0.0;

    double correct_state_fraction() const { return pulses_sig / accepted; }
};

inline ExpectedRates expected_rates(const RunSpec& spec, Conditioning c, double phase = 0.0) {
    const auto& cfg = spec.amplifier;
    const int n = cfg.n_states();
    ExpectedRates r;
    for (int m = 0; m < n; ++m) {
        const auto reference = spec.analysis.reference_amplitude.rotated(cfg.input_set.phase(m));
        for (const auto& b : enumerate_branches(cfg, m)) {
            const double prior = b.prior_probability / n;
            r.d0_click += prior * click_probability(b.d0_amplitude.mean_photon_number(), spec.d0);
            r.d1_click += prior * click_probability(b.d1_amplitude.mean_photon_number(), spec.d1);
            const double w = prior * conditioning_probability(b, spec.d0, spec.d1, c);
            const auto p = count_probabilities(b.output_amplitude, reference, spec.analysis.epsilon,
                                               spec.da, spec.db, phase);
            r.accepted += w;
            if (b.correct()) {
                r.pulses_sig += w;
                r.n_A_sig += w * p.a_marginal();
                r.n_B_sig += w * p.b_marginal();
            } else {
                r.pulses_vac += w;
                r.n_A_vac += w * p.a_marginal();
                r.n_B_vac += w * p.b_marginal();
            }
        }
    }
    return r;
}

}  // namespace sca
