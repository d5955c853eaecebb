#pragma once

// Coherent-state algebra: amplitudes, overlaps, beamsplitter transforms and
// mixtures of coherent components.

#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

namespace sca {

inline constexpr double kUnitarityTolerance = 1e-12;
inline constexpr double kNormalizationTolerance = 1e-12;

/// Complex amplitude of a coherent state |alpha>.
struct CoherentAmplitude {
    std::complex<double> value{};

    constexpr CoherentAmplitude() = default;
    constexpr CoherentAmplitude(double re, double im = 0.0) : value(re, im) {}
    constexpr explicit CoherentAmplitude(std::complex<double> v) : value(v) {}

    static CoherentAmplitude polar(double magnitude, double phase) {
        return CoherentAmplitude{std::polar(magnitude, phase)};
    }
    /// Real amplitude with the given mean photon number.
    static CoherentAmplitude from_mean_photons(double n) {
        if (n < 0.0) throw std::invalid_argument("mean photon number must be >= 0");
        return CoherentAmplitude{std::sqrt(n), 0.0};
    }

    constexpr double re() const { return value.real(); }
    constexpr double im() const { return value.imag(); }
    double mean_photon_number() const { return std::norm(value); }

    CoherentAmplitude rotated(double theta) const {
        return CoherentAmplitude{value * std::polar(1.0, theta)};
    }

    friend CoherentAmplitude operator+(CoherentAmplitude a, CoherentAmplitude b) {
        return CoherentAmplitude{a.value + b.value};
    }
    friend CoherentAmplitude operator-(CoherentAmplitude a, CoherentAmplitude b) {
        return CoherentAmplitude{a.value - b.value};
    }
    friend CoherentAmplitude operator*(double s, CoherentAmplitude a) {
        return CoherentAmplitude{s * a.value};
    }
    friend CoherentAmplitude operator*(CoherentAmplitude a, double s) { return s * a; }
    friend bool operator==(const CoherentAmplitude&, const CoherentAmplitude&) = default;
};

/// |<a|b>|^2 = exp(-|a - b|^2).
inline double overlap_sq(CoherentAmplitude a, CoherentAmplitude b) {
    return std::exp(-std::norm(a.value - b.value));
}

struct BeamsplitterOutputs {
    CoherentAmplitude retained;
    CoherentAmplitude monitor;
};

/// Two-mode beamsplitter with real amplitudes t, r:
///   monitor  = t*a - r*b
///   retained = r*a + t*b
/// With b = (t/r)*a the monitor port is dark and retained = a/r.
inline BeamsplitterOutputs beamsplitter(CoherentAmplitude a, CoherentAmplitude b, double t,
                                        double r) {
    if (t < 0.0 || r < 0.0 || t > 1.0 || r > 1.0 ||
        std::abs(t * t + r * r - 1.0) > kUnitarityTolerance) {
        throw std::invalid_argument("beamsplitter amplitudes must satisfy t^2 + r^2 = 1");
    }
    return {CoherentAmplitude{r * a.value + t * b.value},
            CoherentAmplitude{t * a.value - r * b.value}};
}

/// Weighted set of coherent components, the conditioned output density operator
/// rho = sum_i w_i |a_i><a_i|.
class Mixture {
public:
    struct Component {
        double weight;
        CoherentAmplitude amplitude;
    };

    explicit Mixture(std::vector<Component> components) : components_(std::move(components)) {
        if (components_.empty()) throw std::invalid_argument("mixture must have a component");
        for (const auto& c : components_) {
            if (!(c.weight >= 0.0)) throw std::invalid_argument("mixture weights must be >= 0");
        }
    }

    static Mixture pure(CoherentAmplitude a) { return Mixture({{1.0, a}}); }

    const std::vector<Component>& components() const { return components_; }
    std::size_t size() const { return components_.size(); }

    double total_weight() const {
        return std::accumulate(components_.begin(), components_.end(), 0.0,
                               [](double s, const Component& c) { return s + c.weight; });
    }
    bool is_normalized() const {
        return std::abs(total_weight() - 1.0) <= kNormalizationTolerance;
    }

    Mixture normalized() const {
        const double total = total_weight();
        if (!(total > 0.0)) throw std::invalid_argument("cannot normalize a zero-weight mixture");
        auto out = components_;
        for (auto& c : out) c.weight /= total;
        return Mixture(std::move(out));
    }

private:
    std::vector<Component> components_;
};

/// <target|rho|target> for a normalized mixture.
inline double mixture_fidelity(const Mixture& m, CoherentAmplitude target) {
    if (!m.is_normalized()) throw std::invalid_argument("mixture_fidelity needs a normalized mixture");
    double f = 0.0;
    for (const auto& c : m.components()) f += c.weight * overlap_sq(c.amplitude, target);
    return f;
}

}  // namespace sca
