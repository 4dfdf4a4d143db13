// frilift: spectrum completion for finite-rate-of-innovation signals.
//
// Subcommands:
//   interpolate       complete missing Fourier samples from a sample file
//   recover           matrix-pencil or cardinal-spline recovery from a spectrum
//   phase-transition  Monte Carlo success-ratio sweep over (s, m)
//   coherence         incoherence analysis of a model's lifted spectrum

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "frilift/frilift.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_parse = 1;
constexpr int exit_precondition = 2;
constexpr int exit_nonconvergence = 3;

frilift::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw frilift::config_error("cannot open " + path);
    return frilift::json::parse(in);  // json::parse_error carries the byte offset
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

void write_json_file(const std::string& path, const frilift::json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

struct InterpolateConfig {
    frilift::StructuredLift lift;
    frilift::SolverParams solver;
    bool noisy = false;
    std::optional<frilift::WhiteningSpec> weighting;
    bool centered = false;
};

InterpolateConfig interpolate_config_from_json(const frilift::json& j) {
    namespace fd = frilift::detail;
    fd::check_schema(j, "config");
    fd::check_keys(j,
                   {"schema_version", "lift", "solver", "mode", "weighting",
                    "centered_frequencies"},
                   "config");
    InterpolateConfig cfg;
    if (!j.contains("lift")) throw frilift::config_error("config: missing lift");
    cfg.lift = frilift::lift_from_json(j["lift"]);
    if (j.contains("solver")) cfg.solver = frilift::solver_from_json(j["solver"]);
    if (j.contains("mode")) {
        const auto mode = j["mode"].get<std::string>();
        if (mode == "noisy") {
            cfg.noisy = true;
        } else if (mode != "noiseless") {
            throw frilift::config_error("config: mode must be noiseless or noisy");
        }
    }
    if (j.contains("weighting")) cfg.weighting = frilift::whitening_from_json(j["weighting"]);
    if (j.contains("centered_frequencies")) cfg.centered = j["centered_frequencies"].get<bool>();
    return cfg;
}

int cmd_interpolate(const std::string& config_path, const std::string& samples_path,
                    const std::string& out_path, std::optional<std::uint64_t> seed_override,
                    bool quiet) {
    const auto cfg_json = read_json_file(config_path);
    InterpolateConfig cfg = interpolate_config_from_json(cfg_json);
    frilift::SampleSet samples = frilift::samples_from_json(read_json_file(samples_path));
    if (samples.n != cfg.lift.n) {
        throw std::invalid_argument("samples ambient length differs from the lift");
    }
    if (seed_override) cfg.solver.seed = *seed_override;
    if (cfg.solver.rank_cap == 0) cfg.solver.rank_cap = frilift::default_rank_cap(cfg.lift);

    const frilift::CxVector raw = samples.values;
    frilift::CxVector lhat;
    if (cfg.weighting) {
        lhat = frilift::weight_spectrum(*cfg.weighting, cfg.lift.n, cfg.centered);
        for (size_t i = 0; i < samples.indices.size(); ++i) {
            samples.values[frilift::Index(i)] = raw[frilift::Index(i)] * lhat[samples.indices[i]];
        }
    }

    const frilift::CompletionResult res =
        cfg.noisy ? frilift::complete_noisy(samples, cfg.lift, cfg.solver)
                  : frilift::complete_noiseless(samples, cfg.lift, cfg.solver);

    frilift::CxVector completed = res.g;
    if (cfg.weighting) {
        std::map<frilift::Index, frilift::cx> nulls;
        for (frilift::Index k : frilift::spectral_nulls(lhat)) {
            for (size_t i = 0; i < samples.indices.size(); ++i) {
                if (samples.indices[i] == k) {
                    nulls[k] = raw[frilift::Index(i)];
                    break;
                }
            }
        }
        completed = frilift::unweight(res.g, lhat, nulls);  // throws on uncovered nulls
    }

    const bool converged = res.iterations < cfg.solver.max_iter ||
                           cfg.solver.tol <= 0.0 || res.final_residual <= cfg.solver.tol;
    frilift::json out{
        {"schema_version", frilift::schema_version},
        {"spectrum", frilift::to_json(completed)},
        {"metadata",
         frilift::json{{"iterations", res.iterations},
                       {"final_residual", res.final_residual},
                       {"factor_rank", res.factor_rank},
                       {"converged", converged},
                       {"lift", frilift::to_json(cfg.lift)},
                       {"weighting", cfg.weighting ? frilift::to_json(*cfg.weighting)
                                                   : frilift::json(nullptr)}}}};
    write_json_file(out_path, out);
    if (!quiet) {
        std::cerr << "interpolate: " << res.iterations << " iterations, residual "
                  << res.final_residual << "\n";
    }
    return converged ? exit_ok : exit_nonconvergence;
}

frilift::CxVector spectrum_from_file(const std::string& path) {
    const auto j = read_json_file(path);
    if (j.is_array()) return frilift::cx_vector_from_json(j, "spectrum");
    if (j.is_object() && j.contains("spectrum")) {
        return frilift::cx_vector_from_json(j["spectrum"], "spectrum");
    }
    throw frilift::config_error("spectrum file: expected an array or an object with a "
                                "\"spectrum\" field");
}

int cmd_recover(const std::string& spectrum_path, const std::string& out_path,
                const std::string& kind, frilift::Index rank, frilift::Index d,
                const std::string& lift_kind, int weight_power, int spline_order,
                double cluster_radius, bool project_poles, bool centered, bool quiet) {
    const frilift::CxVector xhat = spectrum_from_file(spectrum_path);
    const frilift::Index n = xhat.size();

    if (kind == "cardinal") {
        const auto spec = frilift::WhiteningSpec::discrete_difference(spline_order);
        const frilift::CxVector lhat = frilift::weight_spectrum(spec, n);
        std::map<frilift::Index, frilift::cx> nulls;
        for (frilift::Index k : frilift::spectral_nulls(lhat)) nulls[k] = xhat[k];
        const auto rec = frilift::reconstruct_cardinal(frilift::apply_weight(xhat, lhat), spec, n,
                                                       nulls);
        frilift::json out{{"schema_version", frilift::schema_version},
                          {"samples", frilift::to_json(rec.samples)},
                          {"coefficients", frilift::to_json(rec.coefficients)}};
        write_json_file(out_path, out);
        return exit_ok;
    }

    if (d == 0) d = n / 2 + 1;
    const frilift::LiftKind lk = lift_kind == "wrap" ? frilift::LiftKind::WrapAroundHankel
                                                     : frilift::LiftKind::StandardHankel;
    const frilift::StructuredLift lift(lk, n, d);
    frilift::CxVector seq = xhat;
    if (weight_power > 0) {
        seq = frilift::apply_weight(
            xhat, frilift::weight_spectrum(frilift::WhiteningSpec::derivative_power(weight_power),
                                           n, centered));
    }
    frilift::PencilOptions opts;
    opts.cluster_radius = cluster_radius;
    opts.project_unit_circle = project_poles;
    const frilift::PoleEstimate est = frilift::matrix_pencil(seq, lift, rank, opts);
    const auto amps = frilift::amplitudes(est, seq, centered);

    frilift::json out = frilift::to_json(est);
    frilift::json amp_json = frilift::json::array();
    for (const auto& stack : amps) {
        frilift::json one = frilift::json::array();
        for (const frilift::cx& a : stack) one.push_back(frilift::to_json(a));
        amp_json.push_back(one);
    }
    out["amplitudes"] = amp_json;
    write_json_file(out_path, out);
    if (!quiet) std::cerr << "recover: " << est.poles.size() << " poles\n";
    return exit_ok;
}

int cmd_phase_transition(const std::string& config_path, const std::string& out_dir,
                         std::optional<std::uint64_t> seed_override, int workers, bool quiet) {
    const auto j = read_json_file(config_path);
    frilift::detail::check_schema(j, "config");
    frilift::detail::check_keys(j, {"schema_version", "experiment"}, "config");
    if (!j.contains("experiment")) throw frilift::config_error("config: missing experiment");
    frilift::ExperimentConfig cfg = frilift::experiment_from_json(j["experiment"]);
    if (seed_override) cfg.seed = *seed_override;

    const std::string digest = frilift::config_digest(frilift::to_json(cfg));
    const auto result = frilift::run_phase_transition(cfg, workers);

    std::filesystem::create_directories(out_dir);
    write_text_file(out_dir + "/grid.csv", frilift::grid_csv(cfg, result));
    write_text_file(out_dir + "/trials.csv", frilift::trials_csv(digest, result));

    int successes = 0, failures = 0;
    for (const auto& t : result.trials) {
        if (t.success) ++successes;
        if (!t.error.empty()) ++failures;
    }
    frilift::json summary{{"schema_version", frilift::schema_version},
                          {"config_digest", digest},
                          {"config", frilift::to_json(cfg)},
                          {"totals",
                           frilift::json{{"trials", result.trials.size()},
                                         {"successes", successes},
                                         {"errored", failures}}}};
    write_json_file(out_dir + "/summary.json", summary);
    if (!quiet) {
        std::cerr << "phase-transition: " << result.trials.size() << " trials, " << successes
                  << " successes\n";
    }
    return exit_ok;
}

int cmd_coherence(const std::string& config_path) {
    const auto j = read_json_file(config_path);
    frilift::detail::check_schema(j, "config");
    frilift::detail::check_keys(j, {"schema_version", "model", "lift", "rank"}, "config");
    if (!j.contains("model") || !j.contains("lift")) {
        throw frilift::config_error("config: coherence needs model and lift");
    }
    const frilift::FriModel model = frilift::model_from_json(j["model"]);
    const frilift::StructuredLift lift = frilift::lift_from_json(j["lift"]);
    const frilift::Index rank = j.contains("rank") ? j["rank"].get<frilift::Index>()
                                                   : frilift::total_order(model);
    const frilift::CxVector seq = frilift::annihilable_spectrum(model, lift.n);
    const frilift::IncoherenceReport rep = frilift::incoherence(seq, lift, rank, &model);
    std::cout << frilift::to_json(rep).dump(2) << "\n";
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Low-rank spectrum completion for FRI signals"};
    app.require_subcommand(1);

    std::string config_path, samples_path, out_path, spectrum_path;
    std::optional<std::uint64_t> seed_override;
    bool quiet = false;
    int workers = 1;
    if (const char* env = std::getenv("FRILIFT_WORKERS")) {
        workers = std::max(1, std::atoi(env));
    }

    auto* interp = app.add_subcommand("interpolate", "complete missing Fourier samples");
    interp->add_option("--config", config_path, "run configuration JSON")->required();
    interp->add_option("--samples", samples_path, "observed samples JSON")->required();
    interp->add_option("--out", out_path, "output spectrum JSON")->required();
    interp->add_option("--seed", seed_override, "override the solver seed");
    interp->add_flag("--quiet", quiet, "suppress progress output");

    std::string rec_kind = "pencil", rec_lift = "standard";
    frilift::Index rec_rank = 1, rec_d = 0;
    int rec_weight_power = 0, rec_spline_order = 0;
    double rec_cluster = 1e-4;
    bool rec_project = false, rec_centered = false;
    auto* recover = app.add_subcommand("recover", "recover the signal from a completed spectrum");
    recover->add_option("--spectrum", spectrum_path, "completed spectrum JSON")->required();
    recover->add_option("--out", out_path, "output JSON")->required();
    recover->add_option("--kind", rec_kind, "pencil|cardinal")
        ->check(CLI::IsMember({"pencil", "cardinal"}));
    recover->add_option("--rank", rec_rank, "model order for the pencil");
    recover->add_option("--d", rec_d, "matrix pencil parameter (default n/2+1)");
    recover->add_option("--lift", rec_lift, "standard|wrap")
        ->check(CLI::IsMember({"standard", "wrap"}));
    recover->add_option("--weight-power", rec_weight_power,
                        "apply (i 2 pi f)^p weighting before the pencil");
    recover->add_option("--spline-order", rec_spline_order, "cardinal spline order");
    recover->add_option("--cluster-radius", rec_cluster, "pole clustering radius");
    recover->add_flag("--project-poles", rec_project, "project poles onto the unit circle");
    recover->add_flag("--centered", rec_centered, "centered frequency convention");
    recover->add_flag("--quiet", quiet, "suppress progress output");

    auto* phase = app.add_subcommand("phase-transition", "Monte Carlo success-ratio sweep");
    phase->add_option("--config", config_path, "experiment configuration JSON")->required();
    phase->add_option("--out", out_path, "output directory")->required();
    phase->add_option("--seed", seed_override, "override the experiment seed");
    phase->add_option("--workers", workers, "concurrent trial workers");
    phase->add_flag("--quiet", quiet, "suppress progress output");

    auto* coher = app.add_subcommand("coherence", "incoherence report for a model");
    coher->add_option("--config", config_path, "model/lift configuration JSON")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(interp)) {
            return cmd_interpolate(config_path, samples_path, out_path, seed_override, quiet);
        }
        if (app.got_subcommand(recover)) {
            return cmd_recover(spectrum_path, out_path, rec_kind, rec_rank, rec_d, rec_lift,
                               rec_weight_power, rec_spline_order, rec_cluster, rec_project,
                               rec_centered, quiet);
        }
        if (app.got_subcommand(phase)) {
            return cmd_phase_transition(config_path, out_path, seed_override, workers, quiet);
        }
        if (app.got_subcommand(coher)) {
            return cmd_coherence(config_path);
        }
    } catch (const frilift::json::parse_error& e) {
        std::cerr << "error: malformed JSON at byte " << e.byte << ": " << e.what() << "\n";
        return exit_parse;
    } catch (const frilift::config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_parse;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_precondition;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_precondition;
    }
    return exit_ok;
}
