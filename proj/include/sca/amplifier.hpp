#pragma once

// The state comparison amplifier: an input drawn from a circle of N coherent
// states is compared against a guess on the first beamsplitter (monitor port
// D0), then a small fraction is tapped onto D1 by the subtraction beamsplitter.
// Success is heralded by D0 silent and D1 firing.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "sca/coherent.hpp"
#include "sca/detector.hpp"
#include "sca/errors.hpp"

namespace sca {

/// The N phase-symmetric coherent states alpha * exp(2 pi i m / N).
class StateSet {
public:
    StateSet(CoherentAmplitude base, int n_states) : base_(base), n_(n_states) {
        if (n_states < 1) throw std::invalid_argument("state set needs N >= 1");
    }

    CoherentAmplitude base_amplitude() const { return base_; }
    int size() const { return n_; }
    double mean_photon_number() const { return base_.mean_photon_number(); }

    double phase(int m) const { return 2.0 * std::numbers::pi * wrap(m) / n_; }
    CoherentAmplitude state(int m) const { return base_.rotated(phase(m)); }

    int wrap(int m) const { return ((m % n_) + n_) % n_; }

private:
    CoherentAmplitude base_;
    int n_;
};

struct SubtractionStage {
    double t = 1.0;
    double r = 0.0;
};

struct AmplifierConfig {
    double comparison_r1 = std::sqrt(0.5);
    double comparison_t1 = std::sqrt(0.5);
    // A single stage. Chained subtraction is not modelled.
    SubtractionStage subtraction{std::sqrt(0.9), std::sqrt(0.1)};
    StateSet input_set{CoherentAmplitude{}, 1};
    std::vector<double> guess_distribution;  // empty means uniform

    /// Build from intensity ratios r1^2 (comparison reflectivity) and t2^2
    /// (subtraction transmissivity).
    static AmplifierConfig from_ratios(double r1_sq, double t2_sq, StateSet set,
                                       std::vector<double> guesses = {}) {
        if (!(r1_sq > 0.0 && r1_sq <= 1.0)) throw std::invalid_argument("r1^2 must lie in (0, 1]");
        if (!(t2_sq >= 0.0 && t2_sq <= 1.0)) throw std::invalid_argument("t2^2 must lie in [0, 1]");
        AmplifierConfig cfg;
        cfg.comparison_r1 = std::sqrt(r1_sq);
        cfg.comparison_t1 = std::sqrt(1.0 - r1_sq);
        cfg.subtraction = {std::sqrt(t2_sq), std::sqrt(1.0 - t2_sq)};
        cfg.input_set = set;
        cfg.guess_distribution = std::move(guesses);
        cfg.validate();
        return cfg;
    }

    int n_states() const { return input_set.size(); }

    double guess_probability(int k) const {
        if (guess_distribution.empty()) return 1.0 / n_states();
        return guess_distribution.at(static_cast<std::size_t>(input_set.wrap(k)));
    }

    void validate() const {
        auto unitary = [](double a, double b) {
            return a >= 0.0 && b >= 0.0 && std::abs(a * a + b * b - 1.0) <= kUnitarityTolerance;
        };
        if (!unitary(comparison_r1, comparison_t1)) {
            throw std::invalid_argument("comparison beamsplitter is not unitary");
        }
        if (!unitary(subtraction.t, subtraction.r)) {
            throw std::invalid_argument("subtraction beamsplitter is not unitary");
        }
        if (!(comparison_r1 > 0.0)) throw std::invalid_argument("r1 must be > 0");
        if (!(subtraction.t > 0.0)) throw std::invalid_argument("t2 must be > 0");
        if (!guess_distribution.empty()) {
            if (static_cast<int>(guess_distribution.size()) != n_states()) {
                throw std::invalid_argument("guess distribution must have N entries");
            }
            double sum = 0.0;
            for (double p : guess_distribution) {
                if (!(p >= 0.0)) throw std::invalid_argument("guess probabilities must be >= 0");
                sum += p;
            }
            if (std::abs(sum - 1.0) > kNormalizationTolerance) {
                throw std::invalid_argument("guess distribution must sum to 1");
            }
        }
    }
};

/// g = t2 / r1.
inline double nominal_gain(const AmplifierConfig& cfg) {
    return cfg.subtraction.t / cfg.comparison_r1;
}

/// The ideal amplified version of input state m.
inline CoherentAmplitude target_state(const AmplifierConfig& cfg, int m) {
    return nominal_gain(cfg) * cfg.input_set.state(m);
}

struct BranchOutcome {
    int input_index = 0;
    int guess_index = 0;
    CoherentAmplitude d0_amplitude;
    CoherentAmplitude d1_amplitude;
    CoherentAmplitude output_amplitude;
    double prior_probability = 0.0;

    bool correct() const { return input_index == guess_index; }
};

/// One branch per guess k for the given input.
inline std::vector<BranchOutcome> enumerate_branches(const AmplifierConfig& cfg,
                                                     int input_index) {
    const int n = cfg.n_states();
    if (input_index < 0 || input_index >= n) throw std::out_of_range("input index out of range");
    const double t1 = cfg.comparison_t1;
    const double r1 = cfg.comparison_r1;
    const CoherentAmplitude input = cfg.input_set.state(input_index);

    std::vector<BranchOutcome> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const CoherentAmplitude guess = (t1 / r1) * cfg.input_set.state(k);
        const auto cmp = beamsplitter(input, guess, t1, r1);
        BranchOutcome b;
        b.input_index = input_index;
        b.guess_index = k;
        b.d0_amplitude = cmp.monitor;
        if (k == input_index) b.d0_amplitude = CoherentAmplitude{};  // exact null, no rounding residue
        b.d1_amplitude = cfg.subtraction.r * cmp.retained;
        b.output_amplitude =
            k == input_index ? target_state(cfg, input_index) : cfg.subtraction.t * cmp.retained;
        b.prior_probability = cfg.guess_probability(k);
        out.push_back(b);
    }
    return out;
}

/// Which detector events an output pulse is conditioned on.
enum class Conditioning { none, d0_silent, d0_silent_and_d1_fires };

inline double conditioning_probability(const BranchOutcome& b, const DetectorModel& det0,
                                       const DetectorModel& det1, Conditioning c) {
    double p = 1.0;
    if (c != Conditioning::none) {
        p *= 1.0 - click_probability(b.d0_amplitude.mean_photon_number(), det0);
    }
    if (c == Conditioning::d0_silent_and_d1_fires) {
        p *= click_probability(b.d1_amplitude.mean_photon_number(), det1);
    }
    return p;
}

/// prior * P(D0 silent) * P(D1 fires).
inline double acceptance_weight(const BranchOutcome& b, const DetectorModel& det0,
                                const DetectorModel& det1,
                                Conditioning c = Conditioning::d0_silent_and_d1_fires) {
    return b.prior_probability * conditioning_probability(b, det0, det1, c);
}

/// Conditioned output state for one input, renormalized over accepted branches.
inline Mixture output_mixture(const AmplifierConfig& cfg, const DetectorModel& det0,
                              const DetectorModel& det1, int input_index,
                              Conditioning c = Conditioning::d0_silent_and_d1_fires) {
    std::vector<Mixture::Component> comps;
    double total = 0.0;
    for (const auto& b : enumerate_branches(cfg, input_index)) {
        const double w = acceptance_weight(b, det0, det1, c);
        comps.push_back({w, b.output_amplitude});
        total += w;
    }
    if (!(total > 0.0)) throw NeverHeralded();
    return Mixture(std::move(comps)).normalized();
}

struct FiguresOfMerit {
    double fidelity = 0.0;
    double correct_state_fraction = 0.0;
    double success_probability = 0.0;  // per pulse, before renormalization
};

/// Figures of merit over a uniformly drawn input. Fidelity and correct-state
/// fraction are averages over heralded events.
inline FiguresOfMerit figures_of_merit(const AmplifierConfig& cfg, const DetectorModel& det0,
                                       const DetectorModel& det1,
                                       Conditioning c = Conditioning::d0_silent_and_d1_fires) {
    const int n = cfg.n_states();
    const double input_prior = 1.0 / n;
    double accepted = 0.0;
    double accepted_correct = 0.0;
    double fidelity_mass = 0.0;
    for (int m = 0; m < n; ++m) {
        const CoherentAmplitude target = target_state(cfg, m);
        for (const auto& b : enumerate_branches(cfg, m)) {
            const double w = input_prior * acceptance_weight(b, det0, det1, c);
            accepted += w;
            if (b.correct()) accepted_correct += w;
            fidelity_mass += w * overlap_sq(b.output_amplitude, target);
        }
    }
    if (!(accepted > 0.0)) throw NeverHeralded();
    return {fidelity_mass / accepted, accepted_correct / accepted, accepted};
}

/// Heralded events per second at pulse rate `prf`.
inline double success_rate(const AmplifierConfig& cfg, const DetectorModel& det0,
                           const DetectorModel& det1, double prf) {
    if (!(prf > 0.0)) throw std::invalid_argument("pulse repetition frequency must be > 0");
    double accepted = 0.0;
    const int n = cfg.n_states();
    for (int m = 0; m < n; ++m) {
        for (const auto& b : enumerate_branches(cfg, m)) {
            accepted += acceptance_weight(b, det0, det1) / n;
        }
    }
    return accepted * prf;
}

}  // namespace sca
