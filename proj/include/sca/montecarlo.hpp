#pragma once

// Pulse-by-pulse simulation of the full experiment: random input and guess,
// photon-number sampling at D0, D1, D_A and D_B, and a tally of every click
// pattern. The run is split into fixed-size chunks, each with its own random
// stream derived from the master seed, so the tally does not depend on how
// many workers execute it.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include "sca/amplifier.hpp"
#include "sca/analysis.hpp"
#include "sca/detector.hpp"

namespace sca {

struct RunSpec {
    AmplifierConfig amplifier;
    DetectorModel d0;
    DetectorModel d1;
    DetectorModel da;
    DetectorModel db;
    AnalysisConfig analysis;  // reference amplitude and epsilon; D_A / D_B come from da, db
    std::vector<double> phases{0.0};  // pulse i is analysed at phases[i % phases.size()]
    std::uint64_t n_pulses = 0;
    std::uint64_t master_seed = 0;

    void validate() const {
        if (n_pulses < 1) throw std::invalid_argument("n_pulses must be >= 1");
        if (phases.empty()) throw std::invalid_argument("phase schedule must not be empty");
        amplifier.validate();
        for (const auto* d : {&d0, &d1, &da, &db}) d->validate();
        if (!(analysis.epsilon >= 0.0 && analysis.epsilon < 1.0)) {
            throw std::invalid_argument("epsilon must lie in [0, 1)");
        }
    }
};

/// Click-pattern bits.
enum PatternBit : unsigned { kD0 = 1u, kD1 = 2u, kDA = 4u, kDB = 8u };
inline constexpr int kPatterns = 16;

inline bool satisfies(unsigned pattern, Conditioning c) {
    switch (c) {
        case Conditioning::none: return true;
        case Conditioning::d0_silent: return (pattern & kD0) == 0;
        case Conditioning::d0_silent_and_d1_fires: return (pattern & kD0) == 0 && (pattern & kD1) != 0;
    }
    return false;
}

/// Counts per (phase bin, input, guess, click pattern).
class TallyTable {
public:
    TallyTable() = default;
    TallyTable(int n_phases, int n_states)
        : n_phases_(n_phases),
          n_states_(n_states),
          counts_(static_cast<std::size_t>(n_phases) * n_states * n_states * kPatterns, 0) {}

    int n_phases() const { return n_phases_; }
    int n_states() const { return n_states_; }

    std::uint64_t& at(int phase, int input, int guess, unsigned pattern) {
        return counts_[index(phase, input, guess, pattern)];
    }
    std::uint64_t at(int phase, int input, int guess, unsigned pattern) const {
        return counts_[index(phase, input, guess, pattern)];
    }

    std::uint64_t total() const {
        std::uint64_t s = 0;
        for (auto c : counts_) s += c;
        return s;
    }

    /// Pulses in a phase bin (or all bins when phase < 0) satisfying a condition.
    std::uint64_t conditioned_pulses(Conditioning c, int phase = -1) const {
        std::uint64_t s = 0;
        for_each(phase, [&](int, int, int, unsigned pat, std::uint64_t n) {
            if (satisfies(pat, c)) s += n;
        });
        return s;
    }

    template <class F>
    void for_each(int phase, F&& f) const {
        for (int j = 0; j < n_phases_; ++j) {
            if (phase >= 0 && j != phase) continue;
            for (int m = 0; m < n_states_; ++m) {
                for (int k = 0; k < n_states_; ++k) {
                    for (unsigned p = 0; p < kPatterns; ++p) f(j, m, k, p, at(j, m, k, p));
                }
            }
        }
    }

    TallyTable& operator+=(const TallyTable& other) {
        if (counts_.empty()) {
            *this = other;
            return *this;
        }
        if (other.n_phases_ != n_phases_ || other.n_states_ != n_states_) {
            throw std::invalid_argument("cannot merge tallies of different shape");
        }
        for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
        return *this;
    }
    friend TallyTable operator+(TallyTable a, const TallyTable& b) { return a += b; }
    friend bool operator==(const TallyTable&, const TallyTable&) = default;

private:
    std::size_t index(int phase, int input, int guess, unsigned pattern) const {
        return ((static_cast<std::size_t>(phase) * n_states_ + input) * n_states_ + guess) * kPatterns +
               pattern;
    }

    int n_phases_ = 0;
    int n_states_ = 0;
    std::vector<std::uint64_t> counts_;
};

inline constexpr std::uint64_t kChunkPulses = 1u << 16;

/// splitmix64 finalizer; mixes the chunk counter into the master seed.
inline std::uint64_t chunk_seed(std::uint64_t master_seed, std::uint64_t chunk) {
    std::uint64_t z = master_seed + (chunk + 1) * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t chunk_count(std::uint64_t n_pulses) {
    return (n_pulses + kChunkPulses - 1) / kChunkPulses;
}

namespace detail {

struct BranchPlan {
    double d0_mean;
    double d1_mean;
    std::vector<PortMeans> port_means;   // per phase bin
    std::vector<double> epsilon_flip;     // per phase bin: P(relabel a (1,0) event)
    std::vector<double> a_click;          // per phase bin: physical P_A
};

struct RunPlan {
    int n_states;
    std::vector<double> guess_cdf;
    std::vector<BranchPlan> branches;  // [input * N + guess]
};

inline RunPlan make_plan(const RunSpec& spec) {
    const auto& cfg = spec.amplifier;
    const int n = cfg.n_states();
    RunPlan plan;
    plan.n_states = n;
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
        acc += cfg.guess_probability(k);
        plan.guess_cdf.push_back(acc);
    }
    plan.guess_cdf.back() = 1.0;
    for (int m = 0; m < n; ++m) {
        // The test state tracks the input phase.
        const auto reference = spec.analysis.reference_amplitude.rotated(cfg.input_set.phase(m));
        for (const auto& b : enumerate_branches(cfg, m)) {
            BranchPlan bp;
            bp.d0_mean = b.d0_amplitude.mean_photon_number();
            bp.d1_mean = b.d1_amplitude.mean_photon_number();
            for (double phase : spec.phases) {
                const auto means = analysis_port_means(b.output_amplitude, reference, phase);
                const double pa = click_probability(means.a, spec.da);
                const double pb = click_probability(means.b, spec.db);
                double flip = 0.0;
                if (spec.analysis.epsilon > 0.0 &&
                    matches_reference(b.output_amplitude, reference, phase)) {
                    const double p10 = pa * (1.0 - pb);
                    if (p10 < spec.analysis.epsilon) {
                        throw InvalidEpsilon("epsilon exceeds P(1,0) in the Monte Carlo run");
                    }
                    flip = spec.analysis.epsilon / p10;
                }
                bp.port_means.push_back(means);
                bp.epsilon_flip.push_back(flip);
                bp.a_click.push_back(pa);
            }
            plan.branches.push_back(std::move(bp));
        }
    }
    return plan;
}

/// Photon-level threshold detection: a Poisson number of photons arrives, each
/// is registered with the detector's effective efficiency, and an independent
/// dark count may fire the gate.
template <class Engine>
bool detect(double mean_photons, const DetectorModel& det, Engine& rng) {
    bool click = false;
    if (mean_photons > 0.0) {
        const int photons = std::poisson_distribution<int>(mean_photons)(rng);
        if (photons > 0) {
            const double p_any = 1.0 - std::pow(1.0 - det.effective_efficiency(), photons);
            click = sample_click(p_any, rng);
        }
    }
    const bool dark = det.dark_prob_per_gate > 0.0 && sample_click(det.dark_prob_per_gate, rng);
    return click || dark;
}

}  // namespace detail

/// Simulates chunk `chunk` of the run into a fresh tally.
inline TallyTable simulate_chunk(const RunSpec& spec, const detail::RunPlan& plan,
                                 std::uint64_t chunk) {
    const int n = plan.n_states;
    const int n_phases = static_cast<int>(spec.phases.size());
    TallyTable tally(n_phases, n);
    std::mt19937_64 rng(chunk_seed(spec.master_seed, chunk));
    const std::uint64_t begin = chunk * kChunkPulses;
    const std::uint64_t end = std::min(spec.n_pulses, begin + kChunkPulses);
    for (std::uint64_t pulse = begin; pulse < end; ++pulse) {
        const int phase = static_cast<int>(pulse % static_cast<std::uint64_t>(n_phases));
        const int m = std::min(n - 1, static_cast<int>(uniform01(rng) * n));
        const double ug = uniform01(rng);
        const int k = static_cast<int>(
            std::upper_bound(plan.guess_cdf.begin(), plan.guess_cdf.end() - 1, ug) -
            plan.guess_cdf.begin());
        const auto& bp = plan.branches[static_cast<std::size_t>(m * n + k)];

        unsigned pattern = 0;
        if (detail::detect(bp.d0_mean, spec.d0, rng)) pattern |= kD0;
        if (detail::detect(bp.d1_mean, spec.d1, rng)) pattern |= kD1;
        const auto& means = bp.port_means[static_cast<std::size_t>(phase)];
        bool a = detail::detect(means.a, spec.da, rng);
        bool b = detail::detect(means.b, spec.db, rng);
        const double flip = bp.epsilon_flip[static_cast<std::size_t>(phase)];
        if (flip > 0.0 && a && !b && sample_click(flip, rng)) {
            // Imperfect interference: the event reappears at D_B, with D_A still
            // firing in proportion to its own click probability.
            a = sample_click(bp.a_click[static_cast<std::size_t>(phase)], rng);
            b = true;
        }
        if (a) pattern |= kDA;
        if (b) pattern |= kDB;
        ++tally.at(phase, m, k, pattern);
    }
    return tally;
}

inline TallyTable simulate_chunk(const RunSpec& spec, std::uint64_t chunk) {
    return simulate_chunk(spec, detail::make_plan(spec), chunk);
}

/// Runs every chunk on `workers` threads and merges the tallies.
inline TallyTable simulate_run(const RunSpec& spec, unsigned workers = 1) {
    spec.validate();
    const auto plan = detail::make_plan(spec);
    const std::uint64_t chunks = chunk_count(spec.n_pulses);
    std::vector<TallyTable> partial(static_cast<std::size_t>(chunks));
    std::atomic<std::uint64_t> next{0};
    auto work = [&] {
        for (std::uint64_t c = next++; c < chunks; c = next++) partial[c] = simulate_chunk(spec, plan, c);
    };
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(chunks)));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    TallyTable out(static_cast<int>(spec.phases.size()), plan.n_states);
    for (const auto& t : partial) out += t;
    return out;
}

/// Projects a tally onto one conditioning class. Correct-guess pulses count as
/// "sig", every other branch as "vac".
inline CountTable conditioned_counts(const TallyTable& t, Conditioning condition, int phase = 0) {
    CountTable out;
    t.for_each(phase, [&](int, int m, int k, unsigned pat, std::uint64_t n) {
        if (n == 0 || !satisfies(pat, condition)) return;
        const bool a = (pat & kDA) != 0;
        const bool b = (pat & kDB) != 0;
        if (m == k) {
            out.pulses_sig += n;
            if (a) out.n_A_sig += n;
            if (b) out.n_B_sig += n;
        } else {
            out.pulses_vac += n;
            if (a) out.n_A_vac += n;
            if (b) out.n_B_vac += n;
        }
    });
    return out;
}

/// Binomial standard error sqrt(p (1 - p) / n) of the frequency k / n.
inline double standard_error(std::uint64_t k, std::uint64_t n) {
    if (n < 1) throw std::invalid_argument("standard_error needs n >= 1");
    if (k > n) throw std::invalid_argument("standard_error needs k <= n");
    const double p = static_cast<double>(k) / static_cast<double>(n);
    return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

/// Monte Carlo estimates of the figures of merit for one conditioning class.
struct TallyEstimates {
    std::uint64_t pulses = 0;
    std::uint64_t accepted = 0;
    double success_probability = 0.0;
    double success_probability_se = 0.0;
    double correct_state_fraction = 0.0;
    double correct_state_fraction_se = 0.0;
    double fidelity = 0.0;
    double fidelity_se = 0.0;
    double visibility = 0.0;  // over the phase schedule; 0 for a single phase
};

inline TallyEstimates summarize(const TallyTable& t, const RunSpec& spec, Conditioning c) {
    const auto& cfg = spec.amplifier;
    const int n = cfg.n_states();
    std::vector<double> overlap(static_cast<std::size_t>(n * n));
    for (int m = 0; m < n; ++m) {
        const auto target = target_state(cfg, m);
        for (const auto& b : enumerate_branches(cfg, m)) {
            overlap[static_cast<std::size_t>(m * n + b.guess_index)] = overlap_sq(b.output_amplitude, target);
        }
    }

    TallyEstimates e;
    e.pulses = t.total();
    std::uint64_t correct = 0;
    double f_sum = 0.0;
    double f_sq = 0.0;
    std::vector<std::uint64_t> bin_accepted(static_cast<std::size_t>(t.n_phases()), 0);
    std::vector<std::uint64_t> bin_a(static_cast<std::size_t>(t.n_phases()), 0);
    t.for_each(-1, [&](int j, int m, int k, unsigned pat, std::uint64_t cnt) {
        if (cnt == 0 || !satisfies(pat, c)) return;
        e.accepted += cnt;
        if (m == k) correct += cnt;
        const double f = overlap[static_cast<std::size_t>(m * n + k)];
        f_sum += f * static_cast<double>(cnt);
        f_sq += f * f * static_cast<double>(cnt);
        bin_accepted[static_cast<std::size_t>(j)] += cnt;
        if (pat & kDA) bin_a[static_cast<std::size_t>(j)] += cnt;
    });
    if (e.pulses > 0) {
        e.success_probability = static_cast<double>(e.accepted) / static_cast<double>(e.pulses);
        e.success_probability_se = standard_error(e.accepted, e.pulses);
    }
    if (e.accepted > 0) {
        const double na = static_cast<double>(e.accepted);
        e.correct_state_fraction = static_cast<double>(correct) / na;
        e.correct_state_fraction_se = standard_error(correct, e.accepted);
        e.fidelity = f_sum / na;
        const double var = std::max(0.0, f_sq / na - e.fidelity * e.fidelity);
        e.fidelity_se = std::sqrt(var / na);
    } else {
        e.correct_state_fraction = e.fidelity = std::nan("");
    }
    if (t.n_phases() > 1) {
        double lo = 1.0;
        double hi = 0.0;
        bool any = false;
        for (std::size_t j = 0; j < bin_a.size(); ++j) {
            if (bin_accepted[j] == 0) continue;
            const double p = static_cast<double>(bin_a[j]) / static_cast<double>(bin_accepted[j]);
            lo = std::min(lo, p);
            hi = std::max(hi, p);
            any = true;
        }
        e.visibility = any && hi + lo > 0.0 ? (hi - lo) / (hi + lo) : 0.0;
    }
    return e;
}

/// Heralded D_A / D_B counts per phase bin, pooled over inputs and guesses.
inline std::vector<PhaseObservation> phase_observations(const TallyTable& t, const RunSpec& spec,
                                                        Conditioning c) {
    std::vector<PhaseObservation> out(static_cast<std::size_t>(t.n_phases()));
    for (int j = 0; j < t.n_phases(); ++j) out[static_cast<std::size_t>(j)].phase = spec.phases[static_cast<std::size_t>(j)];
    t.for_each(-1, [&](int j, int, int, unsigned pat, std::uint64_t cnt) {
        if (cnt == 0 || !satisfies(pat, c)) return;
        auto& o = out[static_cast<std::size_t>(j)];
        o.pulses += cnt;
        if (pat & kDA) o.n_A += cnt;
        if (pat & kDB) o.n_B += cnt;
    });
    return out;
}

/// n equally spaced phases on [0, 2 pi).
inline std::vector<double> phase_scan(int n) {
    std::vector<double> out;
    for (int j = 0; j < n; ++j) out.push_back(2.0 * std::numbers::pi * j / n);
    return out;
}

}  // namespace sca
