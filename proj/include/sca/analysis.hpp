#pragma once

// The outer analysis interferometer. The amplifier output is mixed with a test
// copy of the target state on a 50/50 beamsplitter. For a perfect match all
// light exits towards D_A. The photocount statistics at D_A / D_B are inverted
// into pulse numbers, an output density operator and a fidelity.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "sca/coherent.hpp"
#include "sca/detector.hpp"
#include "sca/errors.hpp"

namespace sca {

struct AnalysisConfig {
    CoherentAmplitude reference_amplitude;  // the test state g*alpha
    double epsilon = 0.0;                   // analysis interferometer imperfection
    DetectorModel detector;                 // D_A and D_B are assumed identical
    int phase_points = 256;

    void validate() const {
        if (!(epsilon >= 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1)");
        if (phase_points < 8) throw std::invalid_argument("phase_points must be >= 8");
        detector.validate();
    }
};

/// Maps an interferometric fringe visibility to the fraction of light in the
/// nominally dark port, (1 - V) / 2.
inline double epsilon_from_visibility(double visibility) {
    if (!(visibility >= 0.0 && visibility <= 1.0)) {
        throw std::invalid_argument("visibility must lie in [0, 1]");
    }
    return 0.5 * (1.0 - visibility);
}

/// Joint click probabilities at (D_A, D_B).
struct CountProbabilities {
    double p10 = 0.0;
    double p01 = 0.0;
    double p11 = 0.0;
    double p00 = 1.0;

    double a_marginal() const { return p10 + p11; }
    double b_marginal() const { return p01 + p11; }
};

/// Mean photon numbers reaching D_A and D_B for an output mixed with
/// reference * exp(i phase) at 50/50.
struct PortMeans {
    double a;
    double b;
};

inline PortMeans analysis_port_means(CoherentAmplitude output, CoherentAmplitude reference,
                                     double phase) {
    const auto ref = reference.rotated(phase);
    return {0.5 * std::norm(output.value + ref.value), 0.5 * std::norm(output.value - ref.value)};
}

inline constexpr double kMatchTolerance = 1e-20;

inline bool matches_reference(CoherentAmplitude output, CoherentAmplitude reference, double phase) {
    return std::norm(output.value - reference.rotated(phase).value) <= kMatchTolerance;
}

/// Count probabilities for a coherent output. D_A and D_B are independent
/// threshold detectors on their port means. When the output matches the test
/// state, epsilon moves probability out of the (1,0) cell into (0,1) and (1,1)
/// in the proportions (1 - P_A) : P_A. Without dark counts this is exactly
///   P10 = 1 - e^{-2x} - eps, P01 = eps e^{-2x}, P11 = eps (1 - e^{-2x})
/// with x = eta l |g alpha|^2, and the vacuum row is
///   P10 = P01 = e^{-x/2} (1 - e^{-x/2}), P11 = (1 - e^{-x/2})^2.
inline CountProbabilities count_probabilities(CoherentAmplitude output, CoherentAmplitude reference,
                                              double epsilon, const DetectorModel& det_a,
                                              const DetectorModel& det_b, double phase = 0.0) {
    const PortMeans means = analysis_port_means(output, reference, phase);
    const double pa = click_probability(means.a, det_a);
    const double pb = click_probability(means.b, det_b);
    CountProbabilities p;
    p.p10 = pa * (1.0 - pb);
    p.p01 = (1.0 - pa) * pb;
    p.p11 = pa * pb;
    if (epsilon > 0.0 && matches_reference(output, reference, phase)) {
        if (p.p10 < epsilon) {
            throw InvalidEpsilon("epsilon " + std::to_string(epsilon) +
                                 " exceeds P(1,0) = " + std::to_string(p.p10));
        }
        p.p10 -= epsilon;
        p.p01 += epsilon * (1.0 - pa);
        p.p11 += epsilon * pa;
    }
    p.p00 = std::max(0.0, 1.0 - p.p10 - p.p01 - p.p11);
    return p;
}

inline CountProbabilities count_probabilities(CoherentAmplitude output, const AnalysisConfig& cfg,
                                              double phase = 0.0) {
    return count_probabilities(output, cfg.reference_amplitude, cfg.epsilon, cfg.detector,
                               cfg.detector, phase);
}

/// D_A click probability of a mixture against reference * exp(i phase).
inline double mixture_click_a(const Mixture& m, const AnalysisConfig& cfg, double phase) {
    double p = 0.0;
    for (const auto& c : m.components()) {
        p += c.weight *
             click_probability(analysis_port_means(c.amplitude, cfg.reference_amplitude, phase).a,
                               cfg.detector);
    }
    return p;
}

/// Fringe visibility (max - min) / (max + min) of the D_A click probability
/// over a uniform scan of the relative phase.
inline double visibility(const Mixture& m, const AnalysisConfig& cfg) {
    if (!m.is_normalized()) throw std::invalid_argument("visibility needs a normalized mixture");
    if (cfg.phase_points < 8) throw std::invalid_argument("phase_points must be >= 8");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int j = 0; j < cfg.phase_points; ++j) {
        const double phase = 2.0 * std::numbers::pi * j / cfg.phase_points;
        const double p = mixture_click_a(m, cfg, phase);
        lo = std::min(lo, p);
        hi = std::max(hi, p);
    }
    if (hi + lo <= 0.0) return 0.0;
    return std::clamp((hi - lo) / (hi + lo), 0.0, 1.0);
}

/// D_A / D_B counts split by what the amplifier emitted: the target state
/// ("sig") or anything else ("vac", which for N = 2 is the vacuum).
struct CountTable {
    std::uint64_t n_A_sig = 0;
    std::uint64_t n_B_sig = 0;
    std::uint64_t n_A_vac = 0;
    std::uint64_t n_B_vac = 0;
    std::uint64_t pulses_sig = 0;
    std::uint64_t pulses_vac = 0;

    friend bool operator==(const CountTable&, const CountTable&) = default;
};

/// Which exponent to use where the printed vacuum formulas disagree with the
/// coherent-state algebra.
///   printed:  vacuum counts ~ 1 - e^{-2x}, fidelity vacuum term e^{-2 g^2 a^2}
///   standard: vacuum counts ~ 1 - e^{-x/2}, fidelity vacuum term e^{-g^2 a^2}
enum class ExponentConvention { standard, printed };

inline const char* to_string(ExponentConvention c) {
    return c == ExponentConvention::standard ? "standard" : "printed";
}

struct PulseNumbers {
    double signal = 0.0;
    double vacuum = 0.0;

    double total() const { return signal + vacuum; }
};

inline constexpr double kMinimumSignal = 1e-12;

/// Inverts the per-class marginal counts into the number of pulses that
/// produced them. The signal inversion is independent of epsilon. Counts are
/// real-valued so expected (non-integer) tables can be inverted too.
inline PulseNumbers estimate_pulse_numbers(double n_A_sig, double n_B_sig, double n_A_vac, double n_B_vac,
                                           double g2a2, double eta_l,
                                           ExponentConvention convention = ExponentConvention::printed) {
    if (!(eta_l > 0.0 && eta_l <= 1.0)) throw std::invalid_argument("eta_l must lie in (0, 1]");
    if (!(g2a2 >= 0.0)) throw std::invalid_argument("g^2 alpha^2 must be >= 0");
    if (n_A_sig < 0.0 || n_B_sig < 0.0 || n_A_vac < 0.0 || n_B_vac < 0.0) {
        throw std::invalid_argument("counts must be >= 0");
    }
    const double x = eta_l * g2a2;
    if (x < kMinimumSignal) {
        throw InsufficientSignal("eta_l * g^2 alpha^2 = " + std::to_string(x) + " is below 1e-12");
    }
    const double e2 = std::exp(-2.0 * x);
    PulseNumbers out;
    out.signal = (n_A_sig + n_B_sig * e2) / -std::expm1(-2.0 * x);
    const double vac_click = convention == ExponentConvention::printed ? -std::expm1(-2.0 * x)
                                                                       : -std::expm1(-0.5 * x);
    out.vacuum = (n_A_vac + n_B_vac) / (2.0 * vac_click);
    return out;
}

inline PulseNumbers estimate_pulse_numbers(const CountTable& counts, double g2a2, double eta_l,
                                           ExponentConvention convention = ExponentConvention::printed) {
    return estimate_pulse_numbers(static_cast<double>(counts.n_A_sig), static_cast<double>(counts.n_B_sig),
                                  static_cast<double>(counts.n_A_vac), static_cast<double>(counts.n_B_vac),
                                  g2a2, eta_l, convention);
}

inline double estimate_fidelity(double n_sig, double n_vac, double g2a2,
                                ExponentConvention convention) {
    if (n_sig < 0.0 || n_vac < 0.0) throw std::invalid_argument("pulse numbers must be >= 0");
    const double total = n_sig + n_vac;
    if (!(total > 0.0)) throw InsufficientSignal("no pulses attributed to either output");
    const double vac_overlap = convention == ExponentConvention::standard ? std::exp(-g2a2)
                                                                          : std::exp(-2.0 * g2a2);
    return n_sig / total + vac_overlap * n_vac / total;
}

/// rho = P(g alpha) |g alpha><g alpha| + P(0) |0><0|.
inline Mixture reconstruct_density(double n_sig, double n_vac, CoherentAmplitude signal) {
    if (n_sig < 0.0 || n_vac < 0.0) throw std::invalid_argument("pulse numbers must be >= 0");
    const double total = n_sig + n_vac;
    if (!(total > 0.0)) throw InsufficientSignal("no pulses attributed to either output");
    return Mixture({{n_sig / total, signal}, {n_vac / total, CoherentAmplitude{}}});
}

// --- N-state generalization --------------------------------------------------
//
// For larger sets the output is assumed to be one of a known list of candidate
// amplitudes (one per guess branch). Heralded D_A / D_B click frequencies at
// several analysis phases give a linear system in the candidate populations,
// solved by least squares with the populations constrained to sum to one.

struct PhaseObservation {
    double phase = 0.0;
    std::uint64_t pulses = 0;  // heralded pulses analysed at this phase
    std::uint64_t n_A = 0;
    std::uint64_t n_B = 0;
};

inline std::vector<double> estimate_branch_populations(
    const std::vector<PhaseObservation>& observations,
    const std::vector<CoherentAmplitude>& candidates, const AnalysisConfig& cfg) {
    if (candidates.empty()) throw std::invalid_argument("need at least one candidate amplitude");
    const auto k = static_cast<Eigen::Index>(candidates.size());
    std::vector<PhaseObservation> usable;
    for (const auto& o : observations) {
        if (o.pulses > 0) usable.push_back(o);
    }
    if (usable.empty()) throw InsufficientSignal("no heralded pulses in any phase bin");

    const auto rows = static_cast<Eigen::Index>(2 * usable.size() + 1);
    Eigen::MatrixXd design(rows, k);
    Eigen::VectorXd rhs(rows);
    for (std::size_t j = 0; j < usable.size(); ++j) {
        const auto& o = usable[j];
        const auto ra = static_cast<Eigen::Index>(2 * j);
        for (Eigen::Index i = 0; i < k; ++i) {
            const auto p = count_probabilities(candidates[static_cast<std::size_t>(i)], cfg, o.phase);
            design(ra, i) = p.a_marginal();
            design(ra + 1, i) = p.b_marginal();
        }
        rhs(ra) = static_cast<double>(o.n_A) / static_cast<double>(o.pulses);
        rhs(ra + 1) = static_cast<double>(o.n_B) / static_cast<double>(o.pulses);
    }
    // Normalization row, weighted so it dominates the fit.
    constexpr double kConstraintWeight = 1e3;
    design.row(rows - 1).setConstant(kConstraintWeight);
    rhs(rows - 1) = kConstraintWeight;

    const Eigen::VectorXd q = design.colPivHouseholderQr().solve(rhs);
    std::vector<double> out(static_cast<std::size_t>(k));
    double sum = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
        out[static_cast<std::size_t>(i)] = std::max(0.0, q(i));
        sum += out[static_cast<std::size_t>(i)];
    }
    if (!(sum > 0.0)) throw InsufficientSignal("fitted populations are all non-positive");
    for (double& v : out) v /= sum;
    return out;
}

}  // namespace sca
