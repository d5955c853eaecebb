#include <cmath>

#include <gtest/gtest.h>

#include "sca/lab_defaults.hpp"
#include "sca/montecarlo.hpp"
#include "sca/observables.hpp"

namespace sca {
namespace {

RunSpec make_spec(double alpha_sq, int n, const lab::DetectorSet& d, std::uint64_t pulses,
                  std::uint64_t seed = 7, std::vector<double> phases = {0.0}) {
    RunSpec s;
    s.amplifier = lab::amplifier(alpha_sq, n);
    s.d0 = d.d0;
    s.d1 = d.d1;
    s.da = d.da;
    s.db = d.db;
    s.analysis = lab::analysis(s.amplifier, d.da, 0.0);
    s.phases = std::move(phases);
    s.n_pulses = pulses;
    s.master_seed = seed;
    return s;
}

// |observed/n - p| in units of the binomial standard error at p.
double sigmas(std::uint64_t k, std::uint64_t n, double p) {
    const double se = std::sqrt(p * (1 - p) / static_cast<double>(n));
    const double diff = std::abs(static_cast<double>(k) / static_cast<double>(n) - p);
    if (se == 0.0) return diff == 0.0 ? 0.0 : INFINITY;
    return diff / se;
}

TEST(StandardError, Examples) {
    EXPECT_EQ(standard_error(0, 10), 0.0);
    EXPECT_EQ(standard_error(10, 10), 0.0);
    EXPECT_NEAR(standard_error(500, 1000), 0.015811, 1e-6);
    EXPECT_THROW(standard_error(0, 0), std::invalid_argument);
    EXPECT_THROW(standard_error(3, 2), std::invalid_argument);
}

TEST(ChunkSeed, DistinctStreams) {
    EXPECT_NE(chunk_seed(1, 0), chunk_seed(1, 1));
    EXPECT_NE(chunk_seed(1, 0), chunk_seed(2, 0));
    EXPECT_EQ(chunk_seed(5, 9), chunk_seed(5, 9));
    EXPECT_EQ(chunk_count(1), 1u);
    EXPECT_EQ(chunk_count(kChunkPulses), 1u);
    EXPECT_EQ(chunk_count(kChunkPulses + 1), 2u);
}

TEST(RunSpec, Validation) {
    auto s = make_spec(0.5, 2, lab::detectors(), 0);
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s.n_pulses = 10;
    s.phases.clear();
    EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(SimulateRun, TotalsMatchPulses) {
    const auto s = make_spec(0.5, 4, lab::detectors(), 200'001, 3, phase_scan(5));
    const auto t = simulate_run(s, 2);
    EXPECT_EQ(t.total(), 200'001u);
    EXPECT_EQ(t.conditioned_pulses(Conditioning::none), 200'001u);
    std::uint64_t per_bin = 0;
    for (int j = 0; j < 5; ++j) per_bin += t.conditioned_pulses(Conditioning::none, j);
    EXPECT_EQ(per_bin, 200'001u);
    EXPECT_EQ(t.conditioned_pulses(Conditioning::none, 0), 40'001u);
}

TEST(SimulateRun, IdealTwoStatesHeraldOnlyCorrectGuesses) {
    const auto s = make_spec(0.5, 2, lab::ideal_detectors(), 1'000'000);
    const auto t = simulate_run(s, 4);
    const auto c = conditioned_counts(t, Conditioning::d0_silent_and_d1_fires);
    EXPECT_GT(c.pulses_sig, 0u);
    EXPECT_EQ(c.pulses_vac, 0u);
    EXPECT_EQ(c.n_A_vac + c.n_B_vac, 0u);
    // A matched output never reaches D_B without epsilon.
    EXPECT_EQ(c.n_B_sig, 0u);
}

TEST(SimulateRun, VacuumInputNeverClicks) {
    const auto s = make_spec(0.0, 4, lab::ideal_detectors(), 100'000);
    const auto t = simulate_run(s);
    EXPECT_EQ(t.conditioned_pulses(Conditioning::none), 100'000u);
    std::uint64_t clicks = 0;
    t.for_each(-1, [&](int, int, int, unsigned pat, std::uint64_t n) {
        if (pat != 0) clicks += n;
    });
    EXPECT_EQ(clicks, 0u);
    EXPECT_EQ(t.conditioned_pulses(Conditioning::d0_silent_and_d1_fires), 0u);
}

TEST(SimulateRun, BitIdenticalAcrossWorkerCounts) {
    const auto s = make_spec(0.5, 8, lab::detectors(), 700'000, 99, phase_scan(4));
    const auto one = simulate_run(s, 1);
    for (unsigned w : {2u, 3u, 8u, 64u}) EXPECT_TRUE(simulate_run(s, w) == one) << "workers " << w;
    auto other = s;
    other.master_seed = 100;
    EXPECT_FALSE(simulate_run(other, 2) == one);
}

TEST(SimulateRun, ChunkMergeIsAssociative) {
    const auto s = make_spec(0.3, 4, lab::detectors(), 5 * kChunkPulses + 17, 11);
    const auto plan = detail::make_plan(s);
    std::vector<TallyTable> parts;
    for (std::uint64_t c = 0; c < chunk_count(s.n_pulses); ++c) parts.push_back(simulate_chunk(s, plan, c));
    ASSERT_EQ(parts.size(), 6u);
    const auto left = ((parts[0] + parts[1]) + parts[2]) + ((parts[3] + parts[4]) + parts[5]);
    const auto right = parts[5] + (parts[4] + (parts[3] + (parts[2] + (parts[1] + parts[0]))));
    EXPECT_TRUE(left == right);
    EXPECT_TRUE(left == simulate_run(s, 3));
    EXPECT_TRUE(simulate_chunk(s, 2) == parts[2]);
}

TEST(ConditionedCounts, HandBuiltTable) {
    TallyTable t(1, 2);
    t.at(0, 0, 0, kD1 | kDA) = 5;        // heralded, correct, D_A
    t.at(0, 0, 0, kD1 | kDA | kDB) = 2;  // heralded, correct, both
    t.at(0, 1, 0, kD1 | kDB) = 3;        // heralded, wrong, D_B
    t.at(0, 1, 0, kD0 | kD1 | kDA) = 7;  // D0 fired, wrong guess
    t.at(0, 0, 1, 0) = 11;               // nothing
    const auto h = conditioned_counts(t, Conditioning::d0_silent_and_d1_fires);
    EXPECT_EQ(h.pulses_sig, 7u);
    EXPECT_EQ(h.n_A_sig, 7u);
    EXPECT_EQ(h.n_B_sig, 2u);
    EXPECT_EQ(h.pulses_vac, 3u);
    EXPECT_EQ(h.n_B_vac, 3u);
    EXPECT_EQ(h.n_A_vac, 0u);
    const auto s = conditioned_counts(t, Conditioning::d0_silent);
    EXPECT_EQ(s.pulses_vac, 14u);
    const auto all = conditioned_counts(t, Conditioning::none);
    EXPECT_EQ(all.pulses_sig + all.pulses_vac, t.total());
    EXPECT_EQ(all.n_A_vac, 7u);
}

TEST(SimulateRun, AgreesWithAnalyticProbabilities) {
    for (int n : {2, 4, 8}) {
        const auto s = make_spec(0.5, n, lab::detectors(), 400'000, 1000 + n);
        const auto t = simulate_run(s, 4);
        for (int ci = 0; ci < 3; ++ci) {
            const auto c = static_cast<Conditioning>(ci);
            const auto e = expected_rates(s, c);
            const auto ct = conditioned_counts(t, c);
            const std::uint64_t acc = ct.pulses_sig + ct.pulses_vac;
            EXPECT_LT(sigmas(acc, s.n_pulses, e.accepted), 5.0) << n << " " << ci;
            EXPECT_LT(sigmas(ct.pulses_sig, acc, e.correct_state_fraction()), 5.0) << n << " " << ci;
            EXPECT_LT(sigmas(ct.n_A_sig, s.n_pulses, e.n_A_sig), 5.0) << n << " " << ci;
            EXPECT_LT(sigmas(ct.n_A_vac, s.n_pulses, e.n_A_vac), 5.0) << n << " " << ci;
            EXPECT_LT(sigmas(ct.n_B_vac, s.n_pulses, e.n_B_vac), 5.0) << n << " " << ci;
        }
        const auto e = expected_rates(s, Conditioning::none);
        EXPECT_LT(sigmas(t.total() - t.conditioned_pulses(Conditioning::d0_silent), s.n_pulses, e.d0_click), 5.0);
    }
}

TEST(SimulateRun, EpsilonLeakMatchesTable) {
    auto s = make_spec(1.0, 2, lab::ideal_detectors(), 500'000, 5);
    s.analysis.epsilon = 0.05;
    const auto t = simulate_run(s, 2);
    const auto e = expected_rates(s, Conditioning::d0_silent_and_d1_fires);
    const auto ct = conditioned_counts(t, Conditioning::d0_silent_and_d1_fires);
    EXPECT_GT(ct.n_B_sig, 0u);
    EXPECT_LT(sigmas(ct.n_B_sig, s.n_pulses, e.n_B_sig), 5.0);
    EXPECT_LT(sigmas(ct.n_A_sig, s.n_pulses, e.n_A_sig), 5.0);
    // Per signal pulse the D_B rate is epsilon itself.
    EXPECT_NEAR(static_cast<double>(ct.n_B_sig) / ct.pulses_sig, 0.05,
                5 * std::sqrt(0.05 * 0.95 / ct.pulses_sig));
}

TEST(SimulateRun, SuccessRateAtFitPoint) {
    const auto s = make_spec(lab::kFitAlphaSq, 2, lab::detectors(), 1'000'000, 21);
    const auto t = simulate_run(s, 4);
    const double p = success_rate(s.amplifier, s.d0, s.d1, 1.0);
    EXPECT_LT(sigmas(t.conditioned_pulses(Conditioning::d0_silent_and_d1_fires), s.n_pulses, p), 5.0);
}

TEST(Summarize, MatchesFiguresOfMerit) {
    const auto d = lab::detectors();
    const auto s = make_spec(0.5, 4, d, 1'000'000, 77);
    const auto t = simulate_run(s, 4);
    const auto h = summarize(t, s, Conditioning::d0_silent_and_d1_fires);
    const auto f = figures_of_merit(s.amplifier, d.d0, d.d1);
    EXPECT_LT(std::abs(h.correct_state_fraction - f.correct_state_fraction), 5 * h.correct_state_fraction_se);
    EXPECT_LT(std::abs(h.fidelity - f.fidelity), 5 * h.fidelity_se);
    EXPECT_LT(std::abs(h.success_probability - f.success_probability), 5 * h.success_probability_se);
    EXPECT_EQ(h.visibility, 0.0);
}

TEST(Summarize, VisibilityFollowsAnalyticCurve) {
    const auto d = lab::detectors();
    const auto s = make_spec(0.5, 2, d, 1'000'000, 78, phase_scan(16));
    const auto t = simulate_run(s, 4);
    auto analysis = s.analysis;
    analysis.phase_points = 16;
    for (int ci = 0; ci < 3; ++ci) {
        const auto c = static_cast<Conditioning>(ci);
        const double want = conditioned_visibility(s.amplifier, d.d0, d.d1, analysis, c);
        EXPECT_NEAR(summarize(t, s, c).visibility, want, 0.03) << ci;
    }
}

TEST(PulseNumbers, RecoveredFromSimulatedCounts) {
    // N = 2 wrong guesses leave vacuum, so the two-class estimator applies exactly.
    const auto d = lab::detectors();
    const auto s = make_spec(0.8, 2, d, 1'000'000, 314);
    const auto t = simulate_run(s, 4);
    const auto ct = conditioned_counts(t, Conditioning::d0_silent);
    const double g2a2 = s.analysis.reference_amplitude.mean_photon_number();
    const double eta_l = d.da.effective_efficiency();
    const auto est = estimate_pulse_numbers(ct, g2a2, eta_l, ExponentConvention::standard);
    const double x = eta_l * g2a2;
    const double e2 = std::exp(-2 * x), h = std::exp(-x / 2);
    const double sig_se = std::sqrt(ct.pulses_sig * e2 * (1 - e2)) / (1 - e2);
    const double vac_se = std::sqrt(2 * ct.pulses_vac * h * (1 - h)) / (2 * (1 - h));
    EXPECT_LT(std::abs(est.signal - ct.pulses_sig), 5 * sig_se);
    EXPECT_LT(std::abs(est.vacuum - ct.pulses_vac), 5 * vac_se);
    const double ratio = est.signal / est.vacuum;
    const double truth = static_cast<double>(ct.pulses_sig) / ct.pulses_vac;
    const double ratio_se = ratio * std::hypot(sig_se / est.signal, vac_se / est.vacuum);
    EXPECT_LT(std::abs(ratio - truth), 5 * ratio_se);
}

TEST(BranchPopulations, RecoveredFromSimulatedScan) {
    const auto d = lab::detectors();
    const auto s = make_spec(1.0, 4, d, 2'000'000, 55, phase_scan(16));
    const auto t = simulate_run(s, 4);
    const auto obs = phase_observations(t, s, Conditioning::d0_silent_and_d1_fires);
    std::vector<CoherentAmplitude> candidates;
    for (const auto& b : enumerate_branches(s.amplifier, 0)) candidates.push_back(b.output_amplitude);
    auto analysis = s.analysis;
    analysis.detector = d.da;
    const auto q = estimate_branch_populations(obs, candidates, analysis);
    const auto truth = output_mixture(s.amplifier, d.d0, d.d1, 0);
    for (std::size_t i = 0; i < q.size(); ++i) {
        EXPECT_NEAR(q[i], truth.components()[i].weight, 0.03) << i;
    }
}

}  // namespace
}  // namespace sca
