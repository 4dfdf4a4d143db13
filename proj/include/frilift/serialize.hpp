#pragma once

#include <json.hpp>

#include <cstdio>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "frilift/bench.hpp"
#include "frilift/fri_signals.hpp"
#include "frilift/solvers.hpp"
#include "frilift/spectral_estimation.hpp"
#include "frilift/structured_matrix.hpp"
#include "frilift/weighting.hpp"

namespace frilift {

using json = nlohmann::json;

inline constexpr int schema_version = 1;

/// Raised on structurally invalid documents (unknown fields, wrong schema
/// version, missing keys). Distinct from JSON syntax errors.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void check_keys(const json& j, std::initializer_list<const char*> allowed,
                       const std::string& context) {
    if (!j.is_object()) throw config_error(context + ": expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!ok.count(key)) {
            throw config_error("unknown field \"" + key + "\" in " + context);
        }
    }
}

inline void check_schema(const json& j, const std::string& context) {
    if (!j.contains("schema_version") || !j["schema_version"].is_number_integer() ||
        j["schema_version"].get<int>() != schema_version) {
        throw config_error(context + ": schema_version must be " +
                           std::to_string(schema_version));
    }
}

template <typename T>
T get_required(const json& j, const char* key, const std::string& context) {
    if (!j.contains(key)) throw config_error(context + ": missing field \"" + key + "\"");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw config_error(context + ": field \"" + std::string(key) + "\" has the wrong type");
    }
}

}  // namespace detail

// --- complex numbers and spectra: [re, im] pairs ---

inline json to_json(const cx& z) { return json::array({z.real(), z.imag()}); }

inline cx complex_from_json(const json& j, const std::string& context) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw config_error(context + ": complex values are [re, im] pairs");
    }
    return cx(j[0].get<double>(), j[1].get<double>());
}

inline json to_json(const CxVector& v) {
    json out = json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(to_json(v[i]));
    return out;
}

inline CxVector cx_vector_from_json(const json& j, const std::string& context) {
    if (!j.is_array()) throw config_error(context + ": expected an array");
    CxVector out(Index(j.size()));
    for (size_t i = 0; i < j.size(); ++i) {
        out[Index(i)] = complex_from_json(j[i], context);
    }
    return out;
}

// --- StructuredLift ---

inline json to_json(const StructuredLift& lift) {
    return json{{"kind", lift.kind == LiftKind::StandardHankel ? "standard_hankel"
                                                               : "wrap_around_hankel"},
                {"n", lift.n},
                {"d", lift.d}};
}

inline StructuredLift lift_from_json(const json& j) {
    detail::check_keys(j, {"kind", "n", "d"}, "lift");
    const auto kind = detail::get_required<std::string>(j, "kind", "lift");
    LiftKind k;
    if (kind == "standard_hankel") {
        k = LiftKind::StandardHankel;
    } else if (kind == "wrap_around_hankel") {
        k = LiftKind::WrapAroundHankel;
    } else {
        throw config_error("lift: unknown kind \"" + kind + "\"");
    }
    return StructuredLift(k, detail::get_required<Index>(j, "n", "lift"),
                          detail::get_required<Index>(j, "d", "lift"));
}

// --- WhiteningSpec ---

inline json to_json(const WhiteningSpec& spec) {
    switch (spec.kind) {
        case WhiteningKind::ContinuousDifferential: {
            json coeffs = json::array();
            for (const cx& b : spec.coeffs) coeffs.push_back(to_json(b));
            return json{{"kind", "continuous_differential"}, {"coeffs", coeffs}};
        }
        case WhiteningKind::DiscreteDifference:
            return json{{"kind", "discrete_difference"}, {"order", spec.order}};
        case WhiteningKind::PowerOfDerivative:
            return json{{"kind", "power_of_derivative"}, {"power", spec.power}};
    }
    throw std::logic_error("to_json(WhiteningSpec): unreachable");
}

inline WhiteningSpec whitening_from_json(const json& j) {
    const auto kind = detail::get_required<std::string>(j, "kind", "whitening");
    WhiteningSpec spec;
    if (kind == "continuous_differential") {
        detail::check_keys(j, {"kind", "coeffs"}, "whitening");
        spec.kind = WhiteningKind::ContinuousDifferential;
        if (!j.contains("coeffs") || !j["coeffs"].is_array()) {
            throw config_error("whitening: missing coeffs array");
        }
        for (const auto& b : j["coeffs"]) {
            spec.coeffs.push_back(complex_from_json(b, "whitening.coeffs"));
        }
    } else if (kind == "discrete_difference") {
        detail::check_keys(j, {"kind", "order"}, "whitening");
        spec.kind = WhiteningKind::DiscreteDifference;
        spec.order = detail::get_required<int>(j, "order", "whitening");
    } else if (kind == "power_of_derivative") {
        detail::check_keys(j, {"kind", "power"}, "whitening");
        spec.kind = WhiteningKind::PowerOfDerivative;
        spec.power = detail::get_required<int>(j, "power", "whitening");
    } else {
        throw config_error("whitening: unknown kind \"" + kind + "\"");
    }
    validate(spec);
    return spec;
}

// --- FriModel ---

inline json to_json(const FriModel& model) {
    json spikes = json::array();
    for (const Spike& s : model.spikes) {
        json amps = json::array();
        for (const cx& a : s.amplitudes) amps.push_back(to_json(a));
        spikes.push_back(json{{"t", s.t}, {"amplitudes", amps}});
    }
    json out{{"spikes", spikes}};
    switch (model.kind) {
        case SignalKind::Diracs:
            out["kind"] = "diracs";
            break;
        case SignalKind::DifferentiatedDiracs:
            out["kind"] = "differentiated_diracs";
            break;
        case SignalKind::NonUniformSpline:
            out["kind"] = "non_uniform_spline";
            out["whitening"] = to_json(model.whitening);
            break;
        case SignalKind::PiecewisePolynomial:
            out["kind"] = "piecewise_polynomial";
            out["degree"] = model.degree;
            break;
        case SignalKind::CardinalSpline:
            out["kind"] = "cardinal_spline";
            out["order"] = model.order;
            out["grid"] = model.grid;
            break;
    }
    return out;
}

inline FriModel model_from_json(const json& j) {
    const auto kind = detail::get_required<std::string>(j, "kind", "model");
    FriModel model;
    if (kind == "diracs") {
        detail::check_keys(j, {"kind", "spikes"}, "model");
        model.kind = SignalKind::Diracs;
    } else if (kind == "differentiated_diracs") {
        detail::check_keys(j, {"kind", "spikes"}, "model");
        model.kind = SignalKind::DifferentiatedDiracs;
    } else if (kind == "non_uniform_spline") {
        detail::check_keys(j, {"kind", "spikes", "whitening"}, "model");
        model.kind = SignalKind::NonUniformSpline;
        if (!j.contains("whitening")) throw config_error("model: missing whitening");
        model.whitening = whitening_from_json(j["whitening"]);
    } else if (kind == "piecewise_polynomial") {
        detail::check_keys(j, {"kind", "spikes", "degree"}, "model");
        model.kind = SignalKind::PiecewisePolynomial;
        model.degree = detail::get_required<int>(j, "degree", "model");
    } else if (kind == "cardinal_spline") {
        detail::check_keys(j, {"kind", "spikes", "order", "grid"}, "model");
        model.kind = SignalKind::CardinalSpline;
        model.order = detail::get_required<int>(j, "order", "model");
        model.grid = detail::get_required<Index>(j, "grid", "model");
    } else {
        throw config_error("model: unknown kind \"" + kind + "\"");
    }
    if (!j.contains("spikes") || !j["spikes"].is_array()) {
        throw config_error("model: missing spikes array");
    }
    for (const auto& sj : j["spikes"]) {
        detail::check_keys(sj, {"t", "amplitudes"}, "model.spikes");
        Spike s;
        s.t = detail::get_required<double>(sj, "t", "model.spikes");
        if (!sj.contains("amplitudes") || !sj["amplitudes"].is_array()) {
            throw config_error("model.spikes: missing amplitudes");
        }
        for (const auto& a : sj["amplitudes"]) {
            s.amplitudes.push_back(complex_from_json(a, "model.spikes.amplitudes"));
        }
        model.spikes.push_back(std::move(s));
    }
    validate(model);
    return model;
}

// --- SolverParams ---

inline json to_json(const SolverParams& p) {
    return json{{"penalty", p.penalty},       {"data_weight", p.data_weight},
                {"rank_cap", p.rank_cap},     {"max_iter", p.max_iter},
                {"tol", p.tol},               {"init_tol", p.init_tol},
                {"init_max_iter", p.init_max_iter}, {"init_relax", p.init_relax},
                {"seed", p.seed}};
}

inline SolverParams solver_from_json(const json& j) {
    detail::check_keys(j,
                       {"penalty", "data_weight", "rank_cap", "max_iter", "tol", "init_tol",
                        "init_max_iter", "init_relax", "seed"},
                       "solver");
    SolverParams p;
    if (j.contains("penalty")) p.penalty = j["penalty"].get<double>();
    if (j.contains("data_weight")) p.data_weight = j["data_weight"].get<double>();
    if (j.contains("rank_cap")) p.rank_cap = j["rank_cap"].get<Index>();
    if (j.contains("max_iter")) p.max_iter = j["max_iter"].get<Index>();
    if (j.contains("tol")) p.tol = j["tol"].get<double>();
    if (j.contains("init_tol")) p.init_tol = j["init_tol"].get<double>();
    if (j.contains("init_max_iter")) p.init_max_iter = j["init_max_iter"].get<Index>();
    if (j.contains("init_relax")) p.init_relax = j["init_relax"].get<double>();
    if (j.contains("seed")) p.seed = j["seed"].get<std::uint64_t>();
    return p;
}

// --- SampleSet document ---

inline json to_json(const SampleSet& s) {
    json idx = json::array();
    for (Index k : s.indices) idx.push_back(k);
    return json{{"schema_version", schema_version},
                {"n", s.n},
                {"indices", idx},
                {"values", to_json(s.values)},
                {"dc_forced", s.dc_forced}};
}

inline SampleSet samples_from_json(const json& j) {
    detail::check_schema(j, "samples");
    detail::check_keys(j, {"schema_version", "n", "indices", "values", "dc_forced"}, "samples");
    SampleSet s;
    s.n = detail::get_required<Index>(j, "n", "samples");
    if (!j.contains("indices") || !j["indices"].is_array()) {
        throw config_error("samples: missing indices array");
    }
    for (const auto& k : j["indices"]) s.indices.push_back(k.get<Index>());
    if (!j.contains("values")) throw config_error("samples: missing values array");
    s.values = cx_vector_from_json(j["values"], "samples.values");
    if (j.contains("dc_forced")) s.dc_forced = j["dc_forced"].get<bool>();
    validate(s);
    return s;
}

// --- ExperimentConfig ---

namespace detail {

inline std::vector<Index> range_from_json(const json& j, const std::string& context) {
    std::vector<Index> out;
    if (j.is_array()) {
        for (const auto& v : j) out.push_back(v.get<Index>());
    } else if (j.is_object()) {
        check_keys(j, {"from", "to", "step"}, context);
        const Index from = get_required<Index>(j, "from", context);
        const Index to = get_required<Index>(j, "to", context);
        const Index step = j.contains("step") ? j["step"].get<Index>() : 1;
        if (step < 1) throw config_error(context + ": step must be positive");
        for (Index v = from; v <= to; v += step) out.push_back(v);
    } else {
        throw config_error(context + ": expected an array or {from,to,step}");
    }
    return out;
}

inline json range_to_json(const std::vector<Index>& values) {
    json out = json::array();
    for (Index v : values) out.push_back(v);
    return out;
}

}  // namespace detail

inline json to_json(const ExperimentConfig& c) {
    json out{{"scenario",
              [&] {
                  switch (c.scenario) {
                      case Scenario::Diracs: return "diracs";
                      case Scenario::PiecewiseConstant: return "piecewise_constant";
                      case Scenario::PiecewiseConstantPlusDiracs:
                          return "piecewise_constant_plus_diracs";
                      case Scenario::OffGridPiecewiseConstant:
                          return "off_grid_piecewise_constant";
                      case Scenario::CardinalSpline: return "cardinal_spline";
                  }
                  return "diracs";
              }()},
             {"n", c.n},
             {"d", c.d},
             {"s_range", detail::range_to_json(c.s_values)},
             {"m_range", detail::range_to_json(c.m_values)},
             {"trials", c.trials},
             {"success_threshold", c.success_threshold},
             {"sampling_mode", c.sampling_mode == SamplingMode::IidWithReplacement
                                   ? "iid_with_replacement"
                                   : "without_replacement_force_dc"},
             {"spline_order", c.spline_order},
             {"solver", to_json(c.solver)},
             {"seed", c.seed}};
    if (c.snr_db) out["snr_db"] = *c.snr_db;
    if (c.lift_kind) {
        out["lift_kind"] = *c.lift_kind == LiftKind::StandardHankel ? "standard_hankel"
                                                                    : "wrap_around_hankel";
    }
    return out;
}

inline ExperimentConfig experiment_from_json(const json& j) {
    detail::check_keys(j,
                       {"scenario", "n", "d", "s_range", "m_range", "trials",
                        "success_threshold", "snr_db", "sampling_mode", "lift_kind",
                        "spline_order", "solver", "seed"},
                       "experiment");
    ExperimentConfig c;
    const auto scenario = detail::get_required<std::string>(j, "scenario", "experiment");
    if (scenario == "diracs") {
        c.scenario = Scenario::Diracs;
    } else if (scenario == "piecewise_constant") {
        c.scenario = Scenario::PiecewiseConstant;
    } else if (scenario == "piecewise_constant_plus_diracs") {
        c.scenario = Scenario::PiecewiseConstantPlusDiracs;
    } else if (scenario == "off_grid_piecewise_constant") {
        c.scenario = Scenario::OffGridPiecewiseConstant;
    } else if (scenario == "cardinal_spline") {
        c.scenario = Scenario::CardinalSpline;
    } else {
        throw config_error("experiment: unknown scenario \"" + scenario + "\"");
    }
    c.n = detail::get_required<Index>(j, "n", "experiment");
    c.d = detail::get_required<Index>(j, "d", "experiment");
    c.s_values = detail::range_from_json(j.at("s_range"), "experiment.s_range");
    c.m_values = detail::range_from_json(j.at("m_range"), "experiment.m_range");
    if (j.contains("trials")) c.trials = j["trials"].get<int>();
    if (j.contains("success_threshold")) c.success_threshold = j["success_threshold"].get<double>();
    if (j.contains("snr_db")) c.snr_db = j["snr_db"].get<double>();
    if (j.contains("sampling_mode")) {
        const auto mode = j["sampling_mode"].get<std::string>();
        if (mode == "iid_with_replacement") {
            c.sampling_mode = SamplingMode::IidWithReplacement;
        } else if (mode == "without_replacement_force_dc") {
            c.sampling_mode = SamplingMode::WithoutReplacementForceDC;
        } else {
            throw config_error("experiment: unknown sampling_mode \"" + mode + "\"");
        }
    }
    if (j.contains("lift_kind")) {
        const auto kind = j["lift_kind"].get<std::string>();
        if (kind == "standard_hankel") {
            c.lift_kind = LiftKind::StandardHankel;
        } else if (kind == "wrap_around_hankel") {
            c.lift_kind = LiftKind::WrapAroundHankel;
        } else {
            throw config_error("experiment: unknown lift_kind \"" + kind + "\"");
        }
    }
    if (j.contains("spline_order")) c.spline_order = j["spline_order"].get<int>();
    if (j.contains("solver")) c.solver = solver_from_json(j["solver"]);
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    validate(c);
    return c;
}

// --- estimation outputs ---

inline json to_json(const PoleEstimate& est) {
    json poles = json::array();
    for (size_t i = 0; i < est.poles.size(); ++i) {
        poles.push_back(json{{"pole", to_json(est.poles[i])},
                             {"multiplicity", est.multiplicities[i]},
                             {"t", est.locations[i]}});
    }
    return json{{"schema_version", schema_version}, {"poles", poles}};
}

inline json to_json(const IncoherenceReport& rep) {
    json out{{"schema_version", schema_version}, {"mu_empirical", rep.mu_empirical}};
    out["mu_bound_vandermonde"] =
        rep.mu_bound_vandermonde ? json(*rep.mu_bound_vandermonde) : json(nullptr);
    out["mu_bound_moitra"] = rep.mu_bound_moitra ? json(*rep.mu_bound_moitra) : json(nullptr);
    if (!rep.mu_bound_moitra) out["moitra_absent_reason"] = rep.moitra_absent_reason;
    if (rep.zeta_values) {
        out["zeta_values"] = json::array({rep.zeta_values->first, rep.zeta_values->second});
    } else {
        out["zeta_values"] = json(nullptr);
    }
    return out;
}

/// FNV-1a over a canonical dump; used to stamp trial records with their
/// generating configuration.
inline std::string config_digest(const json& j) {
    const std::string dump = j.dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace frilift
