#pragma once

// JSON experiment configs: process specs, coefficient sources, schedules.

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "wdlab/coefficients.hpp"
#include "wdlab/coupling.hpp"
#include "wdlab/error.hpp"
#include "wdlab/processes.hpp"

namespace wdlab {

using json = nlohmann::json;

namespace detail {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw LabError(std::string("config: bad value for '") + key + "'");
    }
}

inline const json& require(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw LabError(std::string("config: missing '") + key + "'");
    return j.at(key);
}

inline Eigen::MatrixXd matrix_from_json(const json& rows) {
    if (!rows.is_array() || rows.empty()) throw LabError("config: transition must be a non-empty array of rows");
    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = rows.at(static_cast<std::size_t>(i));
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
            throw LabError("config: transition must be square");
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
    }
    return m;
}

}  // namespace detail

/// Finite chains only; used where the process must be a chain.
inline FiniteChain make_chain(const json& spec) {
    const auto type = detail::get_or<std::string>(spec, "type", "");
    FiniteChain chain;
    if (type == "flip") {
        chain = make_flip_chain(detail::get_or(spec, "a", 0.25));
    } else if (type == "chain") {
        chain = build_finite_chain(detail::matrix_from_json(detail::require(spec, "transition")),
                                   detail::require(spec, "observable").get<std::vector<double>>(),
                                   detail::get_or(spec, "step", 1.0),
                                   detail::get_or(spec, "labels", std::vector<std::string>{}));
        if (spec.contains("id")) chain.id = spec.at("id").get<std::string>();
    } else if (type == "coboundary") {
        chain = make_coboundary(make_chain(detail::require(spec, "base")),
                                detail::require(spec, "g").get<std::vector<double>>(), detail::get_or(spec, "g_step", 1.0));
    } else if (type == "surrogate") {
        chain = make_intermittent_surrogate(detail::require(spec, "gamma").get<double>(),
                                            detail::get_or<std::size_t>(spec, "height", 32));
    } else if (type == "lsv") {
        throw LabError("process admits no exact coupling: LSV orbits are not a finite chain");
    } else {
        throw LabError("config: unknown process type '" + type + "'");
    }
    if (detail::get_or(spec, "normalize", false)) chain = normalize(chain);
    if (detail::get_or(spec, "symmetrize", false)) chain = symmetrize(chain);
    return chain;
}

inline Process make_process(const json& spec) {
    if (detail::get_or<std::string>(spec, "type", "") != "lsv") return make_chain(spec);
    Process p = make_lsv_process(detail::require(spec, "gamma").get<double>(),
                                 detail::get_or<std::string>(spec, "observable", "identity"),
                                 detail::get_or<std::size_t>(spec, "burn_in", 10'000),
                                 detail::get_or<std::size_t>(spec, "reference_steps", 10'000'000));
    if (detail::get_or(spec, "symmetrize", false)) p = symmetrize(p);
    return p;
}

struct CoefficientSpec {
    /// "exact" (computed from the chain) or "declared" (values + tail below).
    std::string source = "exact";
    int p = 4;
    int q = 4;
    std::size_t horizon = 6;
    int tuple_horizon = 6;
    /// Tail beyond the horizon: "spectral" or an explicit model.
    std::string tail_kind = "spectral";
    TailModel tail;
    std::vector<double> values;
};

struct ScheduleSpec {
    ScheduleVariant variant = ScheduleVariant::balanced;
    double p = 4.0;
    double epsilon = 0.0;
    double c_fit = 1.0;
};

struct BoundSpec {
    std::vector<std::size_t> n_list{64, 256, 1024};
    std::size_t per_n = 4;
    std::uint64_t replicates = 100'000;
    std::uint64_t holdout_replicates = 100'000;
    /// Constants for `bound check`.
    double c1 = 1.0;
    double c2 = 1.0;
};

struct DegenerateSpec {
    double q = 2.0;
    double r = 2.0;
    double p = 4.0;
    double alpha = 0.5;
    double epsilon = 1.0;
    /// Allowed |growth exponent| of ||S_n*||_r.
    double growth_tolerance = 0.05;
};

struct ExperimentConfig {
    json process = {{"type", "flip"}, {"a", 0.25}};
    CoefficientSpec coefficients;
    ScheduleSpec schedule;
    std::vector<std::size_t> n_list;
    std::uint64_t replicates = 64;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::string output = "out";
    double tolerance = 0.08;
    bool identity_coupling = false;
    /// Add a log log n regressor to rate fits.
    bool log_correction = false;
    /// Declared sigma^2 for processes without a closed form.
    std::optional<double> sigma2;
    BoundSpec bound;
    DegenerateSpec degenerate;
    /// Surrogate tower height for the LSV experiment.
    std::size_t surrogate_height = 32;
    std::uint64_t coupled_path_length = 0;
};

inline TailModel tail_from_json(const json& j) {
    const auto kind = detail::get_or<std::string>(j, "kind", "zero");
    if (kind == "zero") return TailModel::zero();
    if (kind == "geometric") return TailModel::geometric(detail::require(j, "rate").get<double>());
    if (kind == "polynomial")
        return TailModel::polynomial(detail::require(j, "coefficient").get<double>(),
                                     detail::require(j, "exponent").get<double>());
    throw LabError("config: unknown tail kind '" + kind + "'");
}

inline json tail_to_json(const TailModel& t) {
    switch (t.kind) {
        case TailModel::Kind::zero: return {{"kind", "zero"}};
        case TailModel::Kind::geometric: return {{"kind", "geometric"}, {"rate", t.rate}};
        case TailModel::Kind::polynomial:
            return {{"kind", "polynomial"}, {"coefficient", t.coefficient}, {"exponent", t.exponent}};
    }
    return {};
}

inline bool is_power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

/// Checks shared by every pipeline; runs before any file is written.
inline void validate(const ExperimentConfig& c, bool rate_experiment = true) {
    if (c.n_list.empty()) throw LabError("config: n_list is empty");
    for (std::size_t i = 0; i < c.n_list.size(); ++i) {
        if (i > 0 && c.n_list[i] <= c.n_list[i - 1]) throw LabError("config: n_list must be strictly increasing");
        if (rate_experiment && !is_power_of_two(c.n_list[i])) throw LabError("config: n_list entries must be powers of two");
    }
    if (rate_experiment && c.replicates < 16) throw LabError("config: rate experiments need at least 16 replicates");
    if (c.threads == 0) throw LabError("config: threads must be positive");
    if (!(c.tolerance > 0.0)) throw LabError("config: tolerance must be positive");
}

inline ExperimentConfig parse_config(const json& j) {
    if (!j.is_object()) throw LabError("config: top level must be an object");
    ExperimentConfig c;
    if (j.contains("process")) c.process = j.at("process");
    if (j.contains("coefficients")) {
        const auto& k = j.at("coefficients");
        c.coefficients.source = detail::get_or<std::string>(k, "source", "exact");
        if (c.coefficients.source != "exact" && c.coefficients.source != "declared")
            throw LabError("config: coefficient source must be 'exact' or 'declared'");
        c.coefficients.p = detail::get_or(k, "p", 4);
        c.coefficients.q = detail::get_or(k, "q", 4);
        c.coefficients.horizon = detail::get_or<std::size_t>(k, "horizon", 6);
        c.coefficients.tuple_horizon = detail::get_or(k, "tuple_horizon", 6);
        c.coefficients.values = detail::get_or(k, "values", std::vector<double>{});
        if (k.contains("tail") && k.at("tail").is_object()) {
            c.coefficients.tail_kind = "declared";
            c.coefficients.tail = tail_from_json(k.at("tail"));
        } else {
            c.coefficients.tail_kind = detail::get_or<std::string>(k, "tail", "spectral");
            if (c.coefficients.tail_kind != "spectral" && c.coefficients.tail_kind != "zero")
                throw LabError("config: tail must be 'spectral', 'zero' or an object");
        }
        if (c.coefficients.source == "declared" && c.coefficients.values.empty())
            throw LabError("config: declared coefficients need values");
    }
    if (j.contains("schedule")) {
        const auto& s = j.at("schedule");
        c.schedule.variant = parse_schedule_variant(detail::get_or<std::string>(s, "variant", "balanced"));
        c.schedule.p = detail::get_or(s, "p", 4.0);
        c.schedule.epsilon = detail::get_or(s, "epsilon", 0.0);
        c.schedule.c_fit = detail::get_or(s, "c_fit", 1.0);
    }
    c.n_list = detail::get_or(j, "n_list", std::vector<std::size_t>{});
    c.replicates = detail::get_or<std::uint64_t>(j, "replicates", 64);
    c.seed = detail::get_or<std::uint64_t>(j, "seed", 1);
    c.threads = detail::get_or(j, "threads", 1u);
    c.output = detail::get_or<std::string>(j, "output", "out");
    c.tolerance = detail::get_or(j, "tolerance", 0.08);
    c.identity_coupling = detail::get_or(j, "identity_coupling", false);
    c.log_correction = detail::get_or(j, "log_correction", false);
    if (j.contains("sigma2") && !j.at("sigma2").is_null()) c.sigma2 = j.at("sigma2").get<double>();
    if (j.contains("bound")) {
        const auto& b = j.at("bound");
        c.bound.n_list = detail::get_or(b, "n_list", c.bound.n_list);
        c.bound.per_n = detail::get_or(b, "per_n", c.bound.per_n);
        c.bound.replicates = detail::get_or(b, "replicates", c.bound.replicates);
        c.bound.holdout_replicates = detail::get_or(b, "holdout_replicates", c.bound.holdout_replicates);
        c.bound.c1 = detail::get_or(b, "c1", c.bound.c1);
        c.bound.c2 = detail::get_or(b, "c2", c.bound.c2);
    }
    if (j.contains("degenerate")) {
        const auto& d = j.at("degenerate");
        c.degenerate.q = detail::get_or(d, "q", c.degenerate.q);
        c.degenerate.r = detail::get_or(d, "r", c.degenerate.r);
        c.degenerate.p = detail::get_or(d, "p", c.degenerate.p);
        c.degenerate.alpha = detail::get_or(d, "alpha", c.degenerate.alpha);
        c.degenerate.epsilon = detail::get_or(d, "epsilon", c.degenerate.epsilon);
        c.degenerate.growth_tolerance = detail::get_or(d, "growth_tolerance", c.degenerate.growth_tolerance);
    }
    c.surrogate_height = detail::get_or(j, "surrogate_height", c.surrogate_height);
    c.coupled_path_length = detail::get_or<std::uint64_t>(j, "coupled_path_length", 0);
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LabError("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw LabError("config: parse error in '" + path + "': " + e.what());
    }
    return parse_config(j);
}

/// Everything that determines the results. Thread count and output
/// directory are execution details and stay out, so reports compare
/// byte for byte across machines.
inline json config_echo(const ExperimentConfig& c) {
    json coeff = {{"source", c.coefficients.source},
                  {"p", c.coefficients.p},
                  {"q", c.coefficients.q},
                  {"horizon", c.coefficients.horizon},
                  {"tuple_horizon", c.coefficients.tuple_horizon},
                  {"tail", c.coefficients.tail_kind == "declared" ? tail_to_json(c.coefficients.tail)
                                                                   : json(c.coefficients.tail_kind)}};
    if (!c.coefficients.values.empty()) coeff["values"] = c.coefficients.values;
    return {{"process", c.process},
            {"coefficients", coeff},
            {"schedule",
             {{"variant", to_string(c.schedule.variant)},
              {"p", c.schedule.p},
              {"epsilon", c.schedule.epsilon},
              {"c_fit", c.schedule.c_fit}}},
            {"n_list", c.n_list},
            {"replicates", c.replicates},
            {"seed", c.seed},
            {"tolerance", c.tolerance},
            {"identity_coupling", c.identity_coupling},
            {"log_correction", c.log_correction},
            {"sigma2", c.sigma2 ? json(*c.sigma2) : json(nullptr)},
            {"bound",
             {{"n_list", c.bound.n_list},
              {"per_n", c.bound.per_n},
              {"replicates", c.bound.replicates},
              {"holdout_replicates", c.bound.holdout_replicates},
              {"c1", c.bound.c1},
              {"c2", c.bound.c2}}},
            {"degenerate",
             {{"q", c.degenerate.q},
              {"r", c.degenerate.r},
              {"p", c.degenerate.p},
              {"alpha", c.degenerate.alpha},
              {"epsilon", c.degenerate.epsilon},
              {"growth_tolerance", c.degenerate.growth_tolerance}}},
            {"surrogate_height", c.surrogate_height},
            {"coupled_path_length", c.coupled_path_length}};
}

inline CouplingSchedule make_schedule(const ScheduleSpec& s, int top_level) {
    return make_schedule(top_level, s.p, s.variant, s.epsilon, s.c_fit);
}

/// Coefficient table for the configured source.
inline ThetaTable coefficient_table(const Process& process, const CoefficientSpec& spec) {
    if (spec.source == "declared") {
        ThetaTable t;
        t.values = spec.values;
        t.p = spec.p;
        t.q = spec.q;
        t.kind = "theta_{" + std::to_string(spec.p) + "," + std::to_string(spec.q) + "}";
        t.tail = spec.tail_kind == "declared" ? spec.tail : TailModel::zero();
        validate(t);
        return t;
    }
    const auto* chain = std::get_if<FiniteChain>(&process);
    if (!chain) throw LabError("exact coefficients need a finite chain; declare the table instead");
    if (spec.tail_kind == "declared")
        return theta_table(*chain, spec.p, spec.q, spec.horizon, spec.tail, spec.tuple_horizon);
    auto t = theta_table(*chain, spec.p, spec.q, spec.horizon, TailModel::zero(), spec.tuple_horizon);
    if (spec.tail_kind == "spectral") t.tail = spectral_tail(*chain, t.values);
    validate(t);
    return t;
}

}  // namespace wdlab
