#include <catch2/catch.hpp>

#include <random>
#include <set>

#include "frilift/bench.hpp"
#include "frilift/fri_signals.hpp"
#include "support/reference.hpp"

using namespace frilift;

TEST_CASE("sample_omega respects its modes", "[bench]") {
    std::mt19937_64 rng(1);
    const SampleSet full = sample_omega(10, 10, SamplingMode::WithoutReplacementForceDC, rng);
    std::set<Index> distinct(full.indices.begin(), full.indices.end());
    CHECK(distinct.size() == 10);
    CHECK(full.dc_forced);

    for (int rep = 0; rep < 20; ++rep) {
        const SampleSet s = sample_omega(40, 7, SamplingMode::WithoutReplacementForceDC, rng);
        CHECK(std::count(s.indices.begin(), s.indices.end(), 0) == 1);
        CHECK(std::set<Index>(s.indices.begin(), s.indices.end()).size() == 7);
    }

    std::mt19937_64 a(42), b(42);
    const SampleSet sa = sample_omega(64, 12, SamplingMode::IidWithReplacement, a);
    const SampleSet sb = sample_omega(64, 12, SamplingMode::IidWithReplacement, b);
    CHECK(sa.indices == sb.indices);

    CHECK_THROWS_AS(sample_omega(5, 6, SamplingMode::WithoutReplacementForceDC, rng),
                    std::invalid_argument);
    // with replacement m may exceed n
    CHECK_NOTHROW(sample_omega(5, 9, SamplingMode::IidWithReplacement, rng));
}

TEST_CASE("add_noise hits the requested SNR on average", "[bench]") {
    std::mt19937_64 rng(7);
    const Index m = 50;
    CxVector signal(m);
    for (Index i = 0; i < m; ++i) signal[i] = testing::random_amplitude(rng);

    double ratio_sum = 0.0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        const CxVector noisy = add_noise(signal, 30.0, rng);
        ratio_sum += (noisy - signal).squaredNorm() / signal.squaredNorm();
    }
    const double mean_ratio = ratio_sum / draws;
    CHECK(mean_ratio == Approx(1e-3).epsilon(0.05));

    std::mt19937_64 a(3), b(3);
    const CxVector na = add_noise(signal, 20.0, a);
    const CxVector nb = add_noise(signal, 20.0, b);
    CHECK((na - nb).norm() == 0.0);

    CHECK_THROWS_AS(add_noise(CxVector::Zero(4), 30.0, rng), std::invalid_argument);
}

TEST_CASE("empirical SNR stays within 1 dB over 1000-draw averages", "[bench]") {
    std::mt19937_64 rng(11);
    CxVector signal(32);
    for (Index i = 0; i < 32; ++i) signal[i] = testing::random_amplitude(rng);
    for (double snr : {20.0, 40.0}) {
        double ratio_sum = 0.0;
        for (int i = 0; i < 1000; ++i) {
            ratio_sum += (add_noise(signal, snr, rng) - signal).squaredNorm() /
                         signal.squaredNorm();
        }
        const double achieved_db = -10.0 * std::log10(ratio_sum / 1000.0);
        CHECK(std::abs(achieved_db - snr) < 1.0);
    }
}

TEST_CASE("nmse arithmetic", "[bench]") {
    const CxVector t = CxVector::Ones(5);
    CHECK(nmse(t, t) == 0.0);
    CHECK(nmse(CxVector::Zero(5), t) == 1.0);
    CHECK(nmse(CxVector(2.0 * t), t) == Approx(1.0));
    CHECK_THROWS_AS(nmse(t, CxVector::Zero(5)), std::invalid_argument);
}

TEST_CASE("full sampling gives a perfect success ratio", "[bench]") {
    ExperimentConfig cfg;
    cfg.scenario = Scenario::Diracs;
    cfg.n = 24;
    cfg.d = 12;
    cfg.s_values = {1};
    cfg.m_values = {24};
    cfg.trials = 1;
    cfg.solver.max_iter = 50;
    cfg.seed = 9;
    const auto result = run_phase_transition(cfg);
    REQUIRE(result.success_grid.rows() == 1);
    CHECK(result.success_grid(0, 0) == 1.0);
    CHECK(result.trials[0].error.empty());
}

TEST_CASE("phase transition is deterministic across worker counts", "[bench]") {
    ExperimentConfig cfg;
    cfg.scenario = Scenario::Diracs;
    cfg.n = 32;
    cfg.d = 16;
    cfg.s_values = {1, 2};
    cfg.m_values = {8, 16};
    cfg.trials = 3;
    cfg.solver.max_iter = 120;
    cfg.solver.tol = 1e-8;
    cfg.seed = 31;

    const auto serial = run_phase_transition(cfg, 1);
    const auto parallel = run_phase_transition(cfg, 4);
    CHECK((serial.success_grid - parallel.success_grid).norm() == 0.0);
    REQUIRE(serial.trials.size() == parallel.trials.size());
    for (size_t i = 0; i < serial.trials.size(); ++i) {
        CHECK(serial.trials[i].trial_seed == parallel.trials[i].trial_seed);
        CHECK(serial.trials[i].nmse == parallel.trials[i].nmse);
    }
}

TEST_CASE("success ratio is monotone in the sample count", "[bench]") {
    ExperimentConfig cfg;
    cfg.scenario = Scenario::Diracs;
    cfg.n = 32;
    cfg.d = 16;
    cfg.s_values = {2};
    cfg.m_values = {6, 14, 26};
    cfg.trials = 100;
    cfg.solver.penalty = 1e2;  // spurious factor directions decay ~1/penalty
    cfg.solver.max_iter = 500;
    cfg.solver.tol = 1e-8;
    cfg.seed = 1234;
    const auto result = run_phase_transition(cfg, 2);
    const double tol = 1.0 / double(cfg.trials);  // one trial of slack
    CHECK(result.success_grid(0, 1) >= result.success_grid(0, 0) - tol);
    CHECK(result.success_grid(0, 2) >= result.success_grid(0, 1) - tol);
    CHECK(result.success_grid(0, 2) >= 0.9);  // comfortably oversampled column
}

TEST_CASE("weighted scenarios double the rank of Dirac components", "[bench]") {
    ExperimentConfig cfg;
    cfg.scenario = Scenario::PiecewiseConstantPlusDiracs;
    cfg.n = 64;
    cfg.d = 32;
    for (Index s : {4, 7}) {
        std::mt19937_64 rng(derive_seed(5, std::uint64_t(s), 0, 0));
        const auto sig = detail::make_trial_signal(cfg, s, rng);
        const Index steps = (s + 1) / 2, diracs = s / 2;
        CHECK(sig.effective_rank == steps + 2 * diracs);
        CHECK(sig.effective_rank <= 2 * s);
        const StructuredLift L(LiftKind::StandardHankel, cfg.n, cfg.d);
        const CxVector weighted = apply_weight(sig.truth, sig.weight);
        CHECK(numerical_rank(lift(weighted, L)) <= sig.effective_rank);
    }
}

TEST_CASE("scenario errors are recorded, not thrown", "[bench]") {
    ExperimentConfig cfg;
    cfg.scenario = Scenario::PiecewiseConstant;
    cfg.n = 24;
    cfg.d = 12;
    cfg.s_values = {1};  // needs s >= 2
    cfg.m_values = {12};
    cfg.trials = 2;
    cfg.seed = 3;
    const auto result = run_phase_transition(cfg);
    CHECK(result.success_grid(0, 0) == 0.0);
    for (const auto& t : result.trials) {
        CHECK_FALSE(t.error.empty());
        CHECK_FALSE(t.success);
    }
}

TEST_CASE("csv formatting is stable", "[bench]") {
    ExperimentConfig cfg;
    cfg.scenario = Scenario::Diracs;
    cfg.n = 16;
    cfg.d = 8;
    cfg.s_values = {1};
    cfg.m_values = {8, 16};
    cfg.trials = 1;
    cfg.solver.max_iter = 60;
    cfg.seed = 77;
    const auto result = run_phase_transition(cfg);
    const std::string grid = grid_csv(cfg, result);
    CHECK(grid.rfind("s\\m,8,16\n", 0) == 0);
    const std::string trials = trials_csv("deadbeef", result);
    CHECK(trials.find("config_digest") == 0);
    CHECK(trials.find("deadbeef") != std::string::npos);
}
