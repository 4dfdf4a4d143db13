#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "frilift/fri_signals.hpp"
#include "frilift/numeric.hpp"
#include "frilift/solvers.hpp"
#include "frilift/spectral_estimation.hpp"
#include "frilift/structured_matrix.hpp"
#include "frilift/weighting.hpp"

namespace frilift {

enum class Scenario {
    Diracs,
    PiecewiseConstant,
    PiecewiseConstantPlusDiracs,
    OffGridPiecewiseConstant,
    CardinalSpline
};

enum class SamplingMode { IidWithReplacement, WithoutReplacementForceDC };

struct ExperimentConfig {
    Scenario scenario = Scenario::Diracs;
    Index n = 100;
    Index d = 51;
    std::vector<Index> s_values;
    std::vector<Index> m_values;
    int trials = 1;
    double success_threshold = 1e-3;
    std::optional<double> snr_db;
    SamplingMode sampling_mode = SamplingMode::WithoutReplacementForceDC;
    std::optional<LiftKind> lift_kind;  // default: wrap-around for cardinal, standard otherwise
    int spline_order = 0;               // cardinal scenario only
    SolverParams solver;
    std::uint64_t seed = 0;
};

inline void validate(const ExperimentConfig& c) {
    if (c.n < 1 || c.d < 1 || c.d > c.n) throw std::invalid_argument("ExperimentConfig: bad n/d");
    if (c.trials < 1) throw std::invalid_argument("ExperimentConfig: trials must be positive");
    if (c.success_threshold <= 0.0) {
        throw std::invalid_argument("ExperimentConfig: threshold must be positive");
    }
    if (c.s_values.empty() || c.m_values.empty()) {
        throw std::invalid_argument("ExperimentConfig: empty sweep ranges");
    }
    for (Index s : c.s_values) {
        if (s < 1 || s > c.n) throw std::invalid_argument("ExperimentConfig: s out of [1, n]");
    }
    for (Index m : c.m_values) {
        if (m < 1 || m > c.n) throw std::invalid_argument("ExperimentConfig: m out of [1, n]");
    }
}

/// Default lift per scenario: the on-grid scenarios with discrete
/// whitening produce periodic DFT data, where the wrap-around lift applies
/// and roughly doubles the effective aperture; the off-grid scenario uses a
/// non-periodic continuous weight and must stay with the standard Hankel.
inline LiftKind effective_lift_kind(const ExperimentConfig& c) {
    if (c.lift_kind) return *c.lift_kind;
    switch (c.scenario) {
        case Scenario::PiecewiseConstant:
        case Scenario::PiecewiseConstantPlusDiracs:
        case Scenario::CardinalSpline:
            return LiftKind::WrapAroundHankel;
        case Scenario::Diracs:
        case Scenario::OffGridPiecewiseConstant:
            return LiftKind::StandardHankel;
    }
    return LiftKind::StandardHankel;
}

struct TrialRecord {
    std::uint64_t trial_seed = 0;
    Index s = 0;
    Index m = 0;
    double nmse = 0.0;
    bool success = false;
    Index iterations = 0;
    double elapsed_ms = 0.0;
    std::optional<double> edge_error;  // off-grid scenario only
    std::string error;                 // nonempty when the trial aborted
};

/// Draw a sampling pattern. IidWithReplacement returns a true multiset of
/// m uniform draws; WithoutReplacementForceDC returns m distinct indices
/// always containing 0. Values are zero-initialized placeholders.
inline SampleSet sample_omega(Index n, Index m, SamplingMode mode, std::mt19937_64& rng) {
    if (m < 1) throw std::invalid_argument("sample_omega: m must be positive");
    SampleSet out;
    out.n = n;
    out.values = CxVector::Zero(m);
    if (mode == SamplingMode::IidWithReplacement) {
        std::uniform_int_distribution<Index> pick(0, n - 1);
        for (Index i = 0; i < m; ++i) out.indices.push_back(pick(rng));
        return out;
    }
    if (m > n) throw std::invalid_argument("sample_omega: m > n without replacement");
    std::vector<Index> pool;
    for (Index k = 1; k < n; ++k) pool.push_back(k);
    std::shuffle(pool.begin(), pool.end(), rng);
    out.indices.push_back(0);
    for (Index i = 0; i + 1 < m; ++i) out.indices.push_back(pool[size_t(i)]);
    std::sort(out.indices.begin(), out.indices.end());
    out.dc_forced = true;
    return out;
}

/// Add circular complex Gaussian noise at the requested SNR. The noise
/// variance per entry is ||values||^2 / (m 10^{snr/10}), split evenly
/// between the real and imaginary parts.
inline CxVector add_noise(const CxVector& values, double snr_db, std::mt19937_64& rng) {
    const double power = values.squaredNorm();
    if (power == 0.0) throw std::invalid_argument("add_noise: zero signal");
    const double sigma2 = power / (double(values.size()) * std::pow(10.0, snr_db / 10.0));
    std::normal_distribution<double> gauss(0.0, std::sqrt(sigma2 / 2.0));
    CxVector out = values;
    for (Index i = 0; i < out.size(); ++i) out[i] += cx(gauss(rng), gauss(rng));
    return out;
}

inline double nmse(const CxVector& estimate, const CxVector& truth) {
    if (estimate.size() != truth.size()) throw std::invalid_argument("nmse: length mismatch");
    const double denom = truth.squaredNorm();
    if (denom == 0.0) throw std::invalid_argument("nmse: zero truth");
    return (estimate - truth).squaredNorm() / denom;
}

namespace detail {

/// Ground truth of one Monte Carlo trial: the unweighted spectrum, the
/// weight to apply before completion (empty for plain Diracs), and the
/// quantities needed for scoring.
struct TrialSignal {
    CxVector truth;
    CxVector weight;
    Index effective_rank = 0;
    std::vector<double> edge_locations;
};

inline std::vector<Index> draw_distinct_interior(Index n, Index count, std::mt19937_64& rng) {
    if (count > n - 2) throw std::invalid_argument("scenario: sparsity too large for grid");
    std::vector<Index> pool;
    for (Index k = 1; k <= n - 2; ++k) pool.push_back(k);
    std::shuffle(pool.begin(), pool.end(), rng);
    std::vector<Index> out(pool.begin(), pool.begin() + count);
    std::sort(out.begin(), out.end());
    return out;
}

inline cx random_amplitude(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> mag(0.5, 1.5);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * pi);
    return std::polar(mag(rng), phase(rng));
}

/// Piecewise-constant grid signal with the given jump positions; jumps are
/// centered so the signal wraps back to its zero boundary level.
inline CxVector step_signal(Index n, const std::vector<Index>& jumps, std::mt19937_64& rng) {
    std::vector<cx> amps;
    cx mean = 0.0;
    for (size_t i = 0; i < jumps.size(); ++i) {
        amps.push_back(random_amplitude(rng));
        mean += amps.back();
    }
    mean /= double(amps.size());
    CxVector x = CxVector::Zero(n);
    cx level = 0.0;
    size_t next = 0;
    for (Index t = 0; t < n; ++t) {
        while (next < jumps.size() && jumps[next] == t) level += amps[next++] - mean;
        x[t] = level;
    }
    return x;
}

inline TrialSignal make_trial_signal(const ExperimentConfig& cfg, Index s, std::mt19937_64& rng) {
    const Index n = cfg.n;
    TrialSignal sig;
    switch (cfg.scenario) {
        case Scenario::Diracs: {
            FriModel model;
            model.kind = SignalKind::Diracs;
            for (Index idx : draw_distinct_interior(n, s, rng)) {
                model.spikes.push_back({double(idx) / double(n), {random_amplitude(rng)}});
            }
            sig.truth = spectrum(model, n);
            sig.effective_rank = s;
            return sig;
        }
        case Scenario::PiecewiseConstant: {
            if (s < 2) throw std::invalid_argument("piecewise-constant scenario requires s >= 2");
            const CxVector x = step_signal(n, draw_distinct_interior(n, s, rng), rng);
            sig.truth = dft(x);
            sig.weight = weight_spectrum(WhiteningSpec::discrete_difference(0), n);
            sig.effective_rank = s;
            return sig;
        }
        case Scenario::PiecewiseConstantPlusDiracs: {
            const Index steps = (s + 1) / 2;
            const Index diracs = s / 2;
            if (steps < 2) {
                throw std::invalid_argument("piecewise-constant-plus-diracs requires s >= 3");
            }
            auto idx = draw_distinct_interior(n, steps + diracs, rng);
            std::shuffle(idx.begin(), idx.end(), rng);
            std::vector<Index> jump_idx(idx.begin(), idx.begin() + steps);
            std::sort(jump_idx.begin(), jump_idx.end());
            CxVector x = step_signal(n, jump_idx, rng);
            for (Index i = steps; i < steps + diracs; ++i) x[idx[size_t(i)]] += random_amplitude(rng);
            sig.truth = dft(x);
            sig.weight = weight_spectrum(WhiteningSpec::discrete_difference(0), n);
            sig.effective_rank = steps + 2 * diracs;
            return sig;
        }
        case Scenario::OffGridPiecewiseConstant: {
            if (s < 2 || s % 2 != 0) {
                throw std::invalid_argument("off-grid scenario needs an even edge count s");
            }
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            std::vector<double> edges;
            for (int attempt = 0; attempt < 1000; ++attempt) {
                edges.clear();
                for (Index i = 0; i < s; ++i) edges.push_back(unif(rng));
                std::sort(edges.begin(), edges.end());
                if (min_separation(edges) >= 2.0 / double(n)) break;
                edges.clear();
            }
            if (edges.empty()) throw std::runtime_error("off-grid scenario: separation rejection failed");
            std::vector<RectPiece> rects;
            for (Index i = 0; i + 1 < s; i += 2) {
                rects.push_back({edges[size_t(i)], edges[size_t(i + 1)], random_amplitude(rng)});
            }
            std::vector<Index> freqs;
            for (Index k = 0; k < n; ++k) freqs.push_back(k);
            sig.truth = rect_spectrum(rects, freqs);
            sig.weight = weight_spectrum(WhiteningSpec::continuous_differential({0.0, 1.0}), n);
            sig.effective_rank = s;
            sig.edge_locations = edges;
            return sig;
        }
        case Scenario::CardinalSpline: {
            FriModel model;
            model.kind = SignalKind::CardinalSpline;
            model.order = cfg.spline_order;
            model.grid = n;
            std::vector<cx> amps;
            cx mean = 0.0;
            const auto idx = draw_distinct_interior(n, s, rng);
            for (size_t i = 0; i < idx.size(); ++i) {
                amps.push_back(random_amplitude(rng));
                mean += amps.back();
            }
            mean /= double(amps.size());
            for (size_t i = 0; i < idx.size(); ++i) {
                model.spikes.push_back({double(idx[i]) / double(n), {amps[i] - mean}});
            }
            sig.truth = spectrum(model, n);
            sig.weight = weight_spectrum(WhiteningSpec::discrete_difference(cfg.spline_order), n);
            const CxVector u = cardinal_discrete_innovation(model);
            const double tol = 1e-12 * u.cwiseAbs().maxCoeff();
            sig.effective_rank = (u.cwiseAbs().array() > tol).count();
            return sig;
        }
    }
    throw std::logic_error("make_trial_signal: unreachable");
}

inline double wrap_distance(double a, double b) {
    double diff = std::abs(a - b);
    return std::min(diff, 1.0 - diff);
}

}  // namespace detail

/// Run one Monte Carlo trial at grid cell (s, m). Never throws: failures
/// are recorded in the TrialRecord.
inline TrialRecord run_trial(const ExperimentConfig& cfg, Index s, Index m, int trial_index) {
    TrialRecord rec;
    rec.s = s;
    rec.m = m;
    rec.trial_seed = derive_seed(cfg.seed, std::uint64_t(s), std::uint64_t(m),
                                 std::uint64_t(trial_index));
    const auto t0 = std::chrono::steady_clock::now();
    try {
        std::mt19937_64 rng(rec.trial_seed);
        const auto sig = detail::make_trial_signal(cfg, s, rng);
        const StructuredLift lift_(effective_lift_kind(cfg), cfg.n, cfg.d);

        SampleSet samples = sample_omega(cfg.n, m, cfg.sampling_mode, rng);
        CxVector raw(samples.indices.size());
        for (size_t i = 0; i < samples.indices.size(); ++i) {
            raw[Index(i)] = sig.truth[samples.indices[i]];
        }
        if (cfg.snr_db) raw = add_noise(raw, *cfg.snr_db, rng);

        const bool weighted = sig.weight.size() > 0;
        samples.values = raw;
        if (weighted) {
            for (size_t i = 0; i < samples.indices.size(); ++i) {
                samples.values[Index(i)] = raw[Index(i)] * sig.weight[samples.indices[i]];
            }
        }

        SolverParams params = cfg.solver;
        params.seed = rec.trial_seed;
        if (params.rank_cap == 0) {
            params.rank_cap = default_rank_cap(lift_, sig.effective_rank);
        }
        const CompletionResult res = cfg.snr_db ? complete_noisy(samples, lift_, params)
                                                : complete_noiseless(samples, lift_, params);
        rec.iterations = res.iterations;

        CxVector completed = res.g;
        if (weighted) {
            std::map<Index, cx> nulls;
            for (Index k : spectral_nulls(sig.weight)) {
                for (size_t i = 0; i < samples.indices.size(); ++i) {
                    if (samples.indices[i] == k) {
                        nulls[k] = raw[Index(i)];
                        break;
                    }
                }
            }
            completed = unweight(res.g, sig.weight, nulls);
        }
        rec.nmse = nmse(completed, sig.truth);
        rec.success = rec.nmse < cfg.success_threshold;

        if (!sig.edge_locations.empty()) {
            const PoleEstimate est = matrix_pencil(res.g, lift_, sig.effective_rank);
            double worst = 0.0;
            for (double t : sig.edge_locations) {
                double best = 1.0;
                for (double u : est.locations) best = std::min(best, detail::wrap_distance(t, u));
                worst = std::max(worst, best);
            }
            rec.edge_error = worst;
        }
    } catch (const std::exception& e) {
        rec.error = e.what();
        rec.nmse = std::numeric_limits<double>::infinity();
        rec.success = false;
    }
    rec.elapsed_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
    return rec;
}

struct PhaseTransitionResult {
    Eigen::MatrixXd success_grid;  // s rows x m columns, both ascending
    std::vector<TrialRecord> trials;
};

/// Sweep the (s, m) grid with `trials` Monte Carlo runs per cell. Per-trial
/// seeds are position-derived, so the outcome is independent of the worker
/// count and of execution order.
inline PhaseTransitionResult run_phase_transition(const ExperimentConfig& cfg, int workers = 1) {
    validate(cfg);
    std::vector<Index> s_sorted = cfg.s_values;
    std::vector<Index> m_sorted = cfg.m_values;
    std::sort(s_sorted.begin(), s_sorted.end());
    std::sort(m_sorted.begin(), m_sorted.end());

    struct Job {
        Index si, mi;
        int trial;
    };
    std::vector<Job> jobs;
    for (Index si = 0; si < Index(s_sorted.size()); ++si) {
        for (Index mi = 0; mi < Index(m_sorted.size()); ++mi) {
            for (int t = 0; t < cfg.trials; ++t) jobs.push_back({si, mi, t});
        }
    }

    PhaseTransitionResult out;
    out.trials.resize(jobs.size());
    std::atomic<size_t> cursor{0};
    auto worker = [&]() {
        while (true) {
            const size_t i = cursor.fetch_add(1);
            if (i >= jobs.size()) break;
            const Job& job = jobs[i];
            out.trials[i] = run_trial(cfg, s_sorted[size_t(job.si)], m_sorted[size_t(job.mi)],
                                      job.trial);
        }
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    out.success_grid = Eigen::MatrixXd::Zero(Index(s_sorted.size()), Index(m_sorted.size()));
    for (size_t i = 0; i < jobs.size(); ++i) {
        if (out.trials[i].success) out.success_grid(jobs[i].si, jobs[i].mi) += 1.0;
    }
    out.success_grid /= double(cfg.trials);
    return out;
}

/// Success-ratio grid as CSV: header row of m values, one row per s.
inline std::string grid_csv(const ExperimentConfig& cfg, const PhaseTransitionResult& result) {
    std::vector<Index> s_sorted = cfg.s_values, m_sorted = cfg.m_values;
    std::sort(s_sorted.begin(), s_sorted.end());
    std::sort(m_sorted.begin(), m_sorted.end());
    std::ostringstream os;
    os << "s\\m";
    for (Index m : m_sorted) os << ',' << m;
    os << '\n';
    for (Index si = 0; si < Index(s_sorted.size()); ++si) {
        os << s_sorted[size_t(si)];
        for (Index mi = 0; mi < Index(m_sorted.size()); ++mi) {
            os << ',' << result.success_grid(si, mi);
        }
        os << '\n';
    }
    return os.str();
}

/// One CSV row per trial, in deterministic job order. The wall-clock
/// column is diagnostic and varies between runs.
inline std::string trials_csv(const std::string& config_digest,
                              const PhaseTransitionResult& result) {
    std::ostringstream os;
    os.precision(17);
    os << "config_digest,trial_seed,s,m,nmse,success,iterations,edge_error,error,elapsed_ms\n";
    for (const TrialRecord& r : result.trials) {
        os << config_digest << ',' << r.trial_seed << ',' << r.s << ',' << r.m << ',' << r.nmse
           << ',' << (r.success ? 1 : 0) << ',' << r.iterations << ',';
        if (r.edge_error) os << *r.edge_error;
        os << ',' << r.error << ',' << r.elapsed_ms << '\n';
    }
    return os.str();
}

}  // namespace frilift
