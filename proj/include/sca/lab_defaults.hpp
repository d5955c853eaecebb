#pragma once

// Measured parameters of the reference experiment and the detector models
// built from them.

#include <cmath>
#include <stdexcept>

#include "sca/amplifier.hpp"
#include "sca/analysis.hpp"
#include "sca/detector.hpp"

namespace sca::lab {

inline constexpr double kDetectionEfficiency = 0.405;
inline constexpr double kBackgroundRate = 296.0;       // counts per second
inline constexpr double kGateHalfwidth = 2e-9;         // seconds
inline constexpr double kSignalRetention = 0.965;      // signal events kept by the gate
inline constexpr double kBackgroundRetention = 0.03;   // background events kept by the gate
inline constexpr double kPulseRate = 1e6;              // pulses per second
inline constexpr double kInnerVisibility = 0.9241;
inline constexpr double kOuterVisibility = 0.9224;
inline constexpr double kComparisonReflectivity = 0.5; // r1^2
inline constexpr double kSubtractionTransmissivity = 0.9;  // t2^2

/// Heralded rate the loss is fitted to: N = 2, mean input photon number 0.94.
inline constexpr double kFitAlphaSq = 0.94;
inline constexpr double kFitTargetRate = 26000.0;

/// Optical transmission of the heralding and analysis paths, fitted once with
/// `fit_heralding_loss()` and frozen here.
inline constexpr double kFittedLoss = 0.72661202366;

/// Retained background rate spread over the pulse period.
inline double dark_probability() {
    return dark_prob_per_pulse(kBackgroundRate, kPulseRate, kBackgroundRetention);
}

/// A lab detector behind an optical path of transmission `loss`.
inline DetectorModel detector(double loss = 1.0) {
    DetectorModel d;
    d.efficiency = kDetectionEfficiency;
    d.loss_transmission = loss;
    d.dark_prob_per_gate = dark_probability();
    d.gate_halfwidth = kGateHalfwidth;
    d.signal_retention = kSignalRetention;
    return d;
}

/// D0 sits at the comparison port; D1, D_A and D_B share the fitted loss.
struct DetectorSet {
    DetectorModel d0;
    DetectorModel d1;
    DetectorModel da;
    DetectorModel db;
};

inline DetectorSet detectors(double heralding_loss = kFittedLoss) {
    return {detector(1.0), detector(heralding_loss), detector(heralding_loss),
            detector(heralding_loss)};
}

inline DetectorSet ideal_detectors() {
    return {DetectorModel::ideal(), DetectorModel::ideal(), DetectorModel::ideal(),
            DetectorModel::ideal()};
}

inline AmplifierConfig amplifier(double alpha_sq, int n_states) {
    return AmplifierConfig::from_ratios(kComparisonReflectivity, kSubtractionTransmissivity,
                                        StateSet(CoherentAmplitude::from_mean_photons(alpha_sq), n_states));
}

inline double modelled_rate(double heralding_loss) {
    const auto dets = detectors(heralding_loss);
    return success_rate(amplifier(kFitAlphaSq, 2), dets.d0, dets.d1, kPulseRate);
}

/// Bisection for the heralding-path transmission in [0.3, 1] that reproduces
/// the reference heralded rate.
inline double fit_heralding_loss(double lo = 0.3, double hi = 1.0) {
    double f_lo = modelled_rate(lo) - kFitTargetRate;
    const double f_hi = modelled_rate(hi) - kFitTargetRate;
    if (f_lo * f_hi > 0.0) throw std::runtime_error("reference rate is not bracketed by the loss range");
    for (int i = 0; i < 200 && hi - lo > 1e-14; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = modelled_rate(mid) - kFitTargetRate;
        if ((f_mid < 0.0) == (f_lo < 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

inline AnalysisConfig analysis(const AmplifierConfig& cfg, const DetectorModel& analysis_detector,
                               double epsilon = 0.0) {
    AnalysisConfig a;
    a.reference_amplitude = target_state(cfg, 0);
    a.epsilon = epsilon;
    a.detector = analysis_detector;
    return a;
}

}  // namespace sca::lab
