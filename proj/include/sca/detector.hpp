#pragma once

// Threshold (click / no-click) photodetector with efficiency, optical loss and
// a per-gate dark-count probability.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace sca {

struct DetectorModel {
    double efficiency = 1.0;          // eta
    double loss_transmission = 1.0;   // l, optical transmission before the detector
    double dark_prob_per_gate = 0.0;  // d
    double gate_halfwidth = 0.0;      // seconds; bookkeeping only
    double signal_retention = 1.0;    // fraction of signal events kept by the software gate

    static DetectorModel ideal() { return {}; }

    /// Product of everything that thins the photon stream before a click.
    double effective_efficiency() const {
        return efficiency * loss_transmission * signal_retention;
    }

    void validate() const {
        auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
        if (!unit(efficiency) || !unit(loss_transmission) || !unit(dark_prob_per_gate) ||
            !unit(signal_retention)) {
            throw std::invalid_argument("detector probabilities must lie in [0, 1]");
        }
        if (gate_halfwidth < 0.0) throw std::invalid_argument("gate half-width must be >= 0");
    }
};

/// 1 - (1 - d) exp(-eta l n); reduces to 1 - exp(-eta l n) without dark counts.
inline double click_probability(double mean_photons, const DetectorModel& det) {
    if (!(mean_photons >= 0.0)) throw std::invalid_argument("mean photon number must be >= 0");
    return 1.0 - (1.0 - det.dark_prob_per_gate) *
                     std::exp(-det.effective_efficiency() * mean_photons);
}

/// Dark probability per gate from a background rate, a gate width and the fraction
/// of background events that survive gating. Clamped to [0, 1].
inline double dark_prob_from_rate(double background_rate, double gate_width,
                                  double gate_retention) {
    if (background_rate < 0.0) throw std::invalid_argument("background rate must be >= 0");
    if (!(gate_width > 0.0)) throw std::invalid_argument("gate width must be > 0");
    if (gate_retention < 0.0 || gate_retention > 1.0) {
        throw std::invalid_argument("gate retention must lie in [0, 1]");
    }
    return std::clamp(background_rate * gate_width * gate_retention, 0.0, 1.0);
}

/// Alternative reading: the retained background rate spread over every pulse period.
inline double dark_prob_per_pulse(double background_rate, double pulse_rate,
                                  double retained_fraction) {
    if (!(pulse_rate > 0.0)) throw std::invalid_argument("pulse rate must be > 0");
    return dark_prob_from_rate(background_rate, 1.0 / pulse_rate, retained_fraction);
}

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit engine.
template <class Engine>
double uniform01(Engine& rng) {
    static_assert(Engine::min() == 0 && Engine::max() == ~std::uint64_t{0},
                  "uniform01 expects a full-range 64-bit engine");
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Bernoulli(p). p = 0 never fires and p = 1 always fires.
template <class Engine>
bool sample_click(double p, Engine& rng) {
    return uniform01(rng) < p;
}

}  // namespace sca
