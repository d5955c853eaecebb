#pragma once

// Threshold checks of the analytic model against the reference figures of
// merit, run by `sca selfcheck`.

#include <cmath>
#include <string>
#include <vector>

#include "sca/amplifier.hpp"
#include "sca/lab_defaults.hpp"
#include "sca/dataset.hpp"
#include "sca/observables.hpp"

namespace sca {

struct CheckResult {
    std::string name;
    bool passed;
    std::string detail;
};

/// Mean photon number at which the reference correct-state fractions are compared.
inline constexpr double kMidRangeAlphaSq = 0.5;

inline std::vector<CheckResult> run_selfcheck() {
    std::vector<CheckResult> out;
    auto add = [&](std::string name, bool ok, std::string detail) {
        out.push_back({std::move(name), ok, std::move(detail)});
    };
    auto fmt = [](double v) { return format_double(v); };

    {
        const double g = nominal_gain(lab::amplifier(0.5, 2));
        add("gain", std::abs(g * g - 1.8) <= 1e-12, "g^2 = " + fmt(g * g));
    }
    {
        const double f = overlap_sq(CoherentAmplitude{}, CoherentAmplitude::from_mean_photons(2.0 * 0.25));
        add("vacuum benchmark", f > 0.6, "F(vacuum) = " + fmt(f));
    }
    {
        const auto ideal = DetectorModel::ideal();
        bool ok = true;
        for (int n : {2, 4, 8}) {
            const auto f = figures_of_merit(lab::amplifier(0.5, n), ideal, ideal, Conditioning::none);
            ok = ok && std::abs(f.correct_state_fraction - 1.0 / n) <= 1e-12;
        }
        add("unconditioned fractions", ok, "1/N for N = 2, 4, 8");
    }

    const auto dets = lab::detectors();
    auto fom = [&](double a2, int n) { return figures_of_merit(lab::amplifier(a2, n), dets.d0, dets.d1); };
    {
        const double f2a = fom(0.5, 2).fidelity, f2b = fom(0.3, 2).fidelity;
        const double f4a = fom(0.5, 4).fidelity, f4b = fom(0.3, 4).fidelity, f4c = fom(0.25, 4).fidelity;
        const double f8 = fom(0.21, 8).fidelity;
        const bool ok = f2a >= 0.98 - 0.01 && f2b >= 0.985 - 0.01 && f4a >= 0.8 &&
                        std::abs(f4b - 0.9) <= 0.03 && std::abs(f4c - 0.9) <= 0.03 && f8 >= 0.9 - 0.03;
        add("fidelities", ok,
            "N=2: " + fmt(f2a) + ", " + fmt(f2b) + "; N=4: " + fmt(f4a) + ", " + fmt(f4b) + ", " + fmt(f4c) +
                "; N=8: " + fmt(f8));
    }
    {
        const double c2 = fom(kMidRangeAlphaSq, 2).correct_state_fraction;
        const double c4 = fom(kMidRangeAlphaSq, 4).correct_state_fraction;
        const double c8 = fom(kMidRangeAlphaSq, 8).correct_state_fraction;
        add("state fractions", c2 > 0.95 && c4 > 0.60 && std::abs(c8 - 0.30) <= 0.05,
            "N=2: " + fmt(c2) + ", N=4: " + fmt(c4) + ", N=8: " + fmt(c8));
    }
    {
        const double fitted = lab::modelled_rate(lab::kFittedLoss);
        const double unfitted = lab::modelled_rate(1.0);
        add("success rate", fitted >= 13e3 && fitted <= 39e3 && unfitted >= lab::kFitTargetRate,
            "fitted " + fmt(fitted) + "/s, unit transmission " + fmt(unfitted) + "/s");
    }
    return out;
}

}  // namespace sca
