#pragma once

// Experiment pipelines: coupling rates, LSV surrogate rates, Donsker line
// distances, the degenerate suite, coefficient and bound reports.
//
// Rate checks are slope checks at finite n with declared tolerances. They
// are consistency checks, not proofs of the asymptotic statements.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wdlab/bounds.hpp"
#include "wdlab/coefficients.hpp"
#include "wdlab/config.hpp"
#include "wdlab/coupling.hpp"
#include "wdlab/parallel.hpp"
#include "wdlab/report.hpp"
#include "wdlab/stats.hpp"

namespace wdlab {

struct ErrorRow {
    std::size_t n = 0;
    /// Root mean square across replicates.
    double rms = 0.0;
    double rms_se = 0.0;
    double log_se = 0.0;
    double mean = 0.0;
    double max = 0.0;
    /// Reference line value (e.g. a competing rate anchored at the first n).
    double reference = 0.0;
};

struct RateEstimate {
    std::string name;
    double exponent = 0.0;
    double exponent_se = 0.0;
    std::optional<double> log_correction;
    double target = 0.0;
    double tolerance = 0.0;
    /// False when every error is zero (nothing to regress).
    bool applicable = true;
    /// Reported for context only; no pass flag.
    bool informational = false;
    bool pass = false;
    std::vector<ErrorRow> rows;
    std::optional<double> reference_exponent;

    std::string status() const {
        if (informational) return "informational";
        if (!applicable) return "not_applicable";
        return pass ? "pass" : "fail";
    }
};

/// Root mean square of the samples with a delta-method standard error.
inline ErrorRow error_row(std::size_t n, const std::vector<double>& errors) {
    RunningMoments sq;
    ErrorRow row;
    row.n = n;
    double sum = 0.0;
    for (double e : errors) {
        sq.add(e * e);
        sum += e;
        row.max = std::max(row.max, e);
    }
    row.mean = errors.empty() ? 0.0 : sum / static_cast<double>(errors.size());
    row.rms = std::sqrt(sq.mean);
    row.rms_se = row.rms > 0.0 ? sq.standard_error() / (2.0 * row.rms) : 0.0;
    row.log_se = row.rms > 0.0 ? row.rms_se / row.rms : 0.0;
    return row;
}

/// Regress log rms on log n and compare the slope with the target.
inline void fit_rate(RateEstimate& est, bool log_correction) {
    const bool any_zero = std::any_of(est.rows.begin(), est.rows.end(), [](const ErrorRow& r) { return r.rms <= 0.0; });
    if (any_zero || est.rows.size() < 2) {
        est.applicable = false;
        est.pass = false;
        return;
    }
    std::vector<double> ns, ys, se;
    for (const auto& r : est.rows) {
        ns.push_back(static_cast<double>(r.n));
        ys.push_back(r.rms);
        se.push_back(r.log_se);
    }
    const auto fit = fit_power_law(ns, ys, se, log_correction);
    est.exponent = fit.exponent;
    est.exponent_se = fit.exponent_se;
    est.log_correction = fit.log_correction;
    est.pass = std::abs(est.exponent - est.target) <= est.tolerance;
}

struct CouplingSample {
    double sup_error = 0.0;
    /// sup_t |B_n(t) - sigma B(t)|.
    double donsker = 0.0;
    /// Same supremum over breakpoints t = k/n only.
    double donsker_breakpoints = 0.0;
    /// Rescaling identity and interpolation remainder bound both hold.
    bool identity_holds = true;
};

/// Donsker line against the piecewise-linear Gaussian line on one coupled path.
///
/// B_n(t) = (S_[nt] + (nt - [nt]) X_[nt]) / sqrt(n) with X_0 = 0, and
/// sigma B(t) interpolates T_k / sqrt(n) linearly. On [k/n, (k+1)/n) the
/// difference is affine, so the supremum is attained at the left end or
/// approached at the right end.
inline CouplingSample donsker_sample(const CoupledPath& path, double sup_norm) {
    const std::size_t n = path.horizon;
    const double root = std::sqrt(static_cast<double>(n));
    CouplingSample s;
    s.sup_error = coupling_errors(path).sup_error;
    double at_breaks = 0.0, inside = 0.0, max_z = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
        const double d = path.s[k] - path.t[k];
        at_breaks = std::max(at_breaks, std::abs(d));
        if (k < n) {
            const double x = k == 0 ? 0.0 : path.x[k];
            inside = std::max(inside, std::abs(d + x - path.z[k + 1]));
            max_z = std::max(max_z, std::abs(path.z[k + 1]));
        }
    }
    s.donsker_breakpoints = at_breaks / root;
    s.donsker = std::max(at_breaks, inside) / root;
    s.identity_holds = s.donsker_breakpoints == s.sup_error / root &&
                       s.donsker <= (s.sup_error + sup_norm + max_z) / root * (1.0 + 1e-12);
    return s;
}

/// Couplings for every n of the list, `replicates` each, sharing one block-law
/// cache (m(L) does not depend on the top level, so the largest schedule
/// covers all smaller ones).
inline std::vector<std::vector<CouplingSample>> coupling_samples(const FiniteChain& chain, const ScheduleSpec& spec,
                                                                 double sigma2, const std::vector<std::size_t>& n_list,
                                                                 std::uint64_t replicates, std::uint64_t seed,
                                                                 unsigned threads, bool identity) {
    if (!(sigma2 > 1e-12)) throw LabError("degenerate process (sigma^2 = 0): use the degenerate pipeline");
    const auto top = [](std::size_t n) { return static_cast<int>(std::bit_width(n)) - 2; };
    const auto largest = make_schedule(spec, top(n_list.back()));
    const BlockDistCache cache(chain, largest.m);
    const ChainSampler sampler(chain);
    std::vector<std::vector<CouplingSample>> out;
    for (std::size_t n : n_list) {
        if (!is_power_of_two(n)) throw LabError("coupling: n must be a power of two");
        const auto schedule = make_schedule(spec, top(n));
        std::vector<CouplingSample> row(replicates);
        parallel_for(replicates, threads, [&](std::size_t r) {
            const auto path = build_coupling(chain, schedule, sigma2, n, seed, r, cache, {identity, false}, &sampler);
            row[r] = donsker_sample(path, chain.sup_norm);
        });
        out.push_back(std::move(row));
    }
    return out;
}

inline double process_sigma2(const ExperimentConfig& c, const FiniteChain& chain) {
    return c.sigma2 ? *c.sigma2 : sigma2_exact(chain).value;
}

/// L^2 norm of sup_{k<=n} |S_k - T_k| against n, target slope 1/p.
inline RateEstimate run_rate_experiment(const ExperimentConfig& c) {
    validate(c);
    const auto chain = make_chain(c.process);
    const double sigma2 = process_sigma2(c, chain);
    const auto samples =
        coupling_samples(chain, c.schedule, sigma2, c.n_list, c.replicates, c.seed, c.threads, c.identity_coupling);
    RateEstimate est;
    est.name = "coupling_rate";
    est.target = 1.0 / c.schedule.p;
    est.tolerance = c.tolerance;
    for (std::size_t i = 0; i < c.n_list.size(); ++i) {
        std::vector<double> e;
        for (const auto& s : samples[i]) e.push_back(s.sup_error);
        est.rows.push_back(error_row(c.n_list[i], e));
    }
    fit_rate(est, c.log_correction);
    return est;
}

struct DonskerResult {
    RateEstimate rate;
    bool identity_holds = true;
};

/// ||sup_t |B_n - sigma B| ||_2 against n, target slope -1/4, with the
/// n^{-1/6} rate shown as a reference line.
inline DonskerResult donsker_wasserstein(const ExperimentConfig& c) {
    validate(c);
    const auto chain = make_chain(c.process);
    const double sigma2 = process_sigma2(c, chain);
    const auto samples =
        coupling_samples(chain, c.schedule, sigma2, c.n_list, c.replicates, c.seed, c.threads, c.identity_coupling);
    DonskerResult out;
    auto& est = out.rate;
    est.name = "donsker_wasserstein";
    est.target = -0.25;
    est.tolerance = c.tolerance;
    est.reference_exponent = -1.0 / 6.0;
    for (std::size_t i = 0; i < c.n_list.size(); ++i) {
        std::vector<double> e;
        for (const auto& s : samples[i]) {
            e.push_back(s.donsker);
            out.identity_holds = out.identity_holds && s.identity_holds;
        }
        est.rows.push_back(error_row(c.n_list[i], e));
    }
    const double anchor = est.rows.front().rms;
    for (auto& r : est.rows)
        r.reference = anchor * std::pow(static_cast<double>(r.n) / static_cast<double>(est.rows.front().n), -1.0 / 6.0);
    fit_rate(est, c.log_correction);
    return out;
}

struct LsvResult {
    double gamma = 0.0;
    double target = 0.0;
    /// Coupled rate of the intermittent surrogate chain.
    RateEstimate surrogate;
    /// Growth of ||S_n*||_2 along LSV orbits.
    RateEstimate direct;
};

inline double lsv_gamma(const ExperimentConfig& c) {
    if (!c.process.contains("gamma")) throw LabError("run_lsv_experiment: process needs a gamma");
    const double gamma = c.process.at("gamma").get<double>();
    if (!(gamma > 0.0 && gamma < 0.5)) throw LabError("run_lsv_experiment: gamma must lie in (0, 1/2)");
    return gamma;
}

inline LsvResult run_lsv_experiment(const ExperimentConfig& c) {
    validate(c);
    LsvResult out;
    out.gamma = lsv_gamma(c);
    out.target = std::max(out.gamma, 0.25);

    const auto chain = make_intermittent_surrogate(out.gamma, c.surrogate_height);
    ScheduleSpec spec = c.schedule;
    spec.p = 1.0 / out.target;
    const double sigma2 = sigma2_exact(chain).value;
    const auto samples = coupling_samples(chain, spec, sigma2, c.n_list, c.replicates, c.seed, c.threads, false);
    out.surrogate.name = "lsv_surrogate_coupling_rate";
    out.surrogate.target = out.target;
    out.surrogate.tolerance = c.tolerance;
    for (std::size_t i = 0; i < c.n_list.size(); ++i) {
        std::vector<double> e;
        for (const auto& s : samples[i]) e.push_back(s.sup_error);
        out.surrogate.rows.push_back(error_row(c.n_list[i], e));
    }
    fit_rate(out.surrogate, c.log_correction);

    json spec_json = c.process;
    spec_json["type"] = "lsv";
    const Process orbit = make_process(spec_json);
    out.direct.name = "lsv_orbit_max_norm";
    out.direct.informational = true;
    out.direct.target = 0.5;
    for (std::size_t n : c.n_list) {
        const auto paths = simulate_extremes(orbit, n, c.replicates, c.seed, c.threads);
        std::vector<double> e;
        for (const auto& p : paths) e.push_back(p.abs_max);
        out.direct.rows.push_back(error_row(n, e));
    }
    fit_rate(out.direct, false);
    return out;
}

struct DegenerateResult {
    MomentCheck moments;
    SeriesCheck series;
    bool growth_flat = false;
    bool pass = false;
};

inline DegenerateResult run_degenerate_suite(const ExperimentConfig& c) {
    validate(c, false);
    const auto chain = make_chain(c.process);
    DegenerateResult out;
    const auto& d = c.degenerate;
    out.moments = degenerate_moment_check(chain, d.q, c.n_list, c.replicates, c.seed, d.r, d.p, c.threads);
    out.series = series_convergence_check(Process{chain}, d.alpha, d.p, d.epsilon, c.n_list, c.replicates, c.seed, true,
                                          c.threads);
    out.growth_flat = !out.moments.growth || std::abs(out.moments.growth->exponent) <= d.growth_tolerance;
    const bool zeros = !chain.partial_sum_bound || (out.series.pathwise_zero_from && out.series.zero_beyond_bound);
    out.pass = out.moments.all_below_bound && out.growth_flat && zeros;
    return out;
}

// ---------------------------------------------------------------------------
// Reports

inline json rate_json(const RateEstimate& e) {
    json j = {{"name", e.name},
              {"exponent", e.exponent},
              {"exponent_se", e.exponent_se},
              {"target", e.target},
              {"tolerance", e.tolerance},
              {"status", e.status()},
              {"check", "slope consistency at finite n"}};
    if (e.log_correction) j["log_correction"] = *e.log_correction;
    if (e.reference_exponent) j["reference_exponent"] = *e.reference_exponent;
    return j;
}

inline Table rate_table(const RateEstimate& e) {
    Table t{{"n", "rms", "rms_se", "mean", "max"}, {}};
    if (e.reference_exponent) t.columns.push_back("reference");
    for (const auto& r : e.rows) {
        std::vector<double> row{static_cast<double>(r.n), r.rms, r.rms_se, r.mean, r.max};
        if (e.reference_exponent) row.push_back(r.reference);
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline json run_header(const ExperimentConfig& c) {
    return {{"config", config_echo(c)}, {"seed", c.seed}};
}

inline Report rate_report(const ExperimentConfig& c, const RateEstimate& e) {
    json s = run_header(c);
    s["result"] = rate_json(e);
    s["c_fit"] = c.schedule.c_fit;
    return {"rates", rate_table(e), s};
}

inline Report donsker_report(const ExperimentConfig& c, const DonskerResult& r) {
    json s = run_header(c);
    s["result"] = rate_json(r.rate);
    s["rescaling_identity_holds"] = r.identity_holds;
    s["c_fit"] = c.schedule.c_fit;
    return {"wasserstein", rate_table(r.rate), s};
}

inline std::vector<Report> lsv_reports(const ExperimentConfig& c, const LsvResult& r) {
    json s = run_header(c);
    s["gamma"] = r.gamma;
    s["target"] = r.target;
    s["surrogate_coupled_rate"] = rate_json(r.surrogate);
    s["direct_orbit_statistics"] = rate_json(r.direct);
    return {{"lsv_surrogate", rate_table(r.surrogate), s}, {"lsv_direct", rate_table(r.direct), s}};
}

inline Report degenerate_report(const ExperimentConfig& c, const DegenerateResult& r) {
    Table t{{"n", "moment", "moment_se", "bound", "max_norm", "reference", "level", "tail", "summand"}, {}};
    for (std::size_t i = 0; i < r.moments.rows.size(); ++i) {
        const auto& m = r.moments.rows[i];
        const auto& s = r.series.rows[i];
        t.rows.push_back({static_cast<double>(m.n), m.moment, m.moment_se, m.bound, m.max_norm, m.reference, s.level,
                          s.tail.p_hat, s.summand});
    }
    json s = run_header(c);
    s["moment_bound"] = r.moments.bound;
    s["all_below_bound"] = r.moments.all_below_bound;
    s["growth_exponent"] = r.moments.growth ? json(r.moments.growth->exponent) : json(nullptr);
    s["growth_flat"] = r.growth_flat;
    s["pathwise_zero_from"] = r.series.pathwise_zero_from ? json(*r.series.pathwise_zero_from) : json(nullptr);
    s["zero_beyond_bound"] = r.series.zero_beyond_bound;
    s["status"] = r.pass ? "pass" : "fail";
    return {"degenerate", t, s};
}

/// theta_{1,1}, theta_{p,q} and alpha_{inf,4} by lag, with sigma^2 and the series sums.
inline Report coefficient_report(const ExperimentConfig& c) {
    const auto process = make_process(c.process);
    const auto table = coefficient_table(process, c.coefficients);
    const auto series = series_summary(table);
    Table t{{"k", table.kind}, {}};
    const auto* chain = std::get_if<FiniteChain>(&process);
    const bool with_alpha = chain && chain->size() <= 8;
    const bool with_first = chain && table.kind != "theta_{1,1}";
    if (with_first) t.columns.push_back("theta_{1,1}");
    if (with_alpha) t.columns.push_back("alpha_{inf,4}");
    for (std::size_t k = 0; k < table.values.size(); ++k) {
        std::vector<double> row{static_cast<double>(k), table.values[k]};
        if (with_first) row.push_back(theta_exact(*chain, 1, 1, static_cast<std::int64_t>(k), c.coefficients.tuple_horizon));
        if (with_alpha)
            row.push_back(k == 0 ? std::nan("") : alpha_inf4_exact(*chain, static_cast<std::int64_t>(k), std::max(3, c.coefficients.tuple_horizon)));
        t.rows.push_back(std::move(row));
    }
    json s = run_header(c);
    s["process"] = process_id(process);
    s["kind"] = table.kind;
    s["tail"] = tail_to_json(table.tail);
    s["truncation_bound"] = table.truncation_bound;
    s["theta1"] = series.theta1();
    s["theta2"] = series.theta2_finite() ? json(series.theta2()) : json("infinite");
    if (chain) {
        try {
            const auto sig = sigma2_exact(*chain);
            s["sigma2"] = sig.value;
            s["sigma2_radius"] = sig.radius;
        } catch (const LabError& e) {
            s["sigma2"] = e.what();
        }
    }
    return {"coefficients", t, s};
}

inline double bound_sigma2(const ExperimentConfig& c, const Process& process) {
    if (c.sigma2) return *c.sigma2;
    if (const auto* chain = std::get_if<FiniteChain>(&process)) {
        const double v = sigma2_exact(*chain).value;
        return v < 1e-10 ? 0.0 : v;
    }
    throw LabError("bounds: declare sigma2 for processes without a closed form");
}

inline Table bound_table(const std::vector<BoundPoint>& points, double split_flag) {
    Table t{{"n", "x", "p_hat", "ci_high", "gaussian", "polynomial", "rhs", "dominated", "holdout"}, {}};
    for (const auto& p : points)
        t.rows.push_back({static_cast<double>(p.at.n), p.at.x, p.tail.p_hat, p.tail.ci_high, p.gaussian, p.polynomial,
                          p.rhs, p.dominated ? 1.0 : 0.0, split_flag});
    return t;
}

/// Fit (c1, c2) on the training grid, then check them on the holdout grid.
inline Report bound_fit_report(const ExperimentConfig& c) {
    const auto process = make_process(c.process);
    const double sigma2 = bound_sigma2(c, process);
    const auto series = series_summary(coefficient_table(process, c.coefficients));
    const auto [train, holdout] = split_grid(c.bound.n_list, c.bound.per_n, sup_norm(process));
    const auto fit = fit_constants(process, train, sigma2, series, c.bound.replicates, c.seed, c.threads);
    auto hold = evaluate_grid(process, holdout, sigma2, series, c.bound.holdout_replicates,
                              derive_key(c.seed, {tag::experiment, 1}), c.threads);
    const bool dominated = check_dominance(hold, fit.c1, fit.c2);
    Table t = bound_table(fit.points, 0.0);
    for (auto& row : bound_table(hold, 1.0).rows) t.rows.push_back(row);
    json s = run_header(c);
    s["sigma2"] = sigma2;
    s["theta1"] = series.theta1();
    s["theta2"] = series.theta2();
    s["c1"] = fit.c1;
    s["c2"] = fit.c2;
    s["c1_irrelevant"] = fit.c1_irrelevant;
    s["binding_points"] = fit.binding;
    s["holdout_dominated"] = dominated;
    return {"bound_fit", t, s};
}

/// Configured constants against the full grid, plus the series diagnostic.
inline Report bound_check_report(const ExperimentConfig& c) {
    const auto process = make_process(c.process);
    const double sigma2 = bound_sigma2(c, process);
    const auto series = series_summary(coefficient_table(process, c.coefficients));
    auto [train, holdout] = split_grid(c.bound.n_list, c.bound.per_n, sup_norm(process));
    train.insert(train.end(), holdout.begin(), holdout.end());
    auto points = evaluate_grid(process, train, sigma2, series, c.bound.replicates, c.seed, c.threads);
    const bool dominated = check_dominance(points, c.bound.c1, c.bound.c2);
    json s = run_header(c);
    s["c1"] = c.bound.c1;
    s["c2"] = c.bound.c2;
    s["dominated"] = dominated;
    if (sigma2 > 0.0 && !c.n_list.empty()) {
        const auto check = series_convergence_check(process, 0.75, 4.0, 1.0, c.n_list, c.bound.replicates, c.seed,
                                                    false, c.threads);
        json rows = json::array();
        for (const auto& r : check.rows)
            rows.push_back({{"n", r.n}, {"level", r.level}, {"summand", r.summand}, {"summand_high", r.summand_high}});
        s["series"] = {{"alpha", 0.75}, {"p", 4.0}, {"epsilon", 1.0}, {"rows", rows}, {"decaying", check.decaying}};
    }
    return {"bound_check", bound_table(points, 0.0), s};
}

/// One coupled path: (k, S_k, T_k) and per-level error statistics.
struct CoupledRunOutput {
    std::string path_csv;
    json levels;
};

inline CoupledRunOutput couple_run(const ExperimentConfig& c) {
    const auto chain = make_chain(c.process);
    const double sigma2 = process_sigma2(c, chain);
    const std::size_t n = c.coupled_path_length ? c.coupled_path_length : (c.n_list.empty() ? 1024 : c.n_list.back());
    if (!is_power_of_two(n)) throw LabError("couple run: path length must be a power of two");
    const auto schedule = make_schedule(c.schedule, static_cast<int>(std::bit_width(n)) - 2);
    const BlockDistCache cache(chain, schedule.m);
    if (!(sigma2 > 1e-12)) throw LabError("degenerate process (sigma^2 = 0): use the degenerate pipeline");
    const auto path = build_coupling(chain, schedule, sigma2, n, c.seed, 0, cache, {c.identity_coupling, false});
    const auto errors = coupling_errors(path);
    CoupledRunOutput out;
    out.path_csv = "k,S_k,T_k\n";
    for (std::size_t k = 0; k <= n; ++k)
        out.path_csv += std::to_string(k) + "," + format_number(path.s[k]) + "," + format_number(path.t[k]) + "\n";
    json levels = json::object();
    for (const auto& st : errors.per_level)
        levels[std::to_string(st.level)] = {{"m", st.m},
                                            {"lambda", schedule.lambda[static_cast<std::size_t>(st.level)]},
                                            {"D", st.d},
                                            {"D1", st.d1},
                                            {"D2", st.d2}};
    out.levels = run_header(c);
    out.levels["n"] = n;
    out.levels["sigma2"] = sigma2;
    out.levels["c_fit"] = c.schedule.c_fit;
    out.levels["sup_error"] = errors.sup_error;
    out.levels["first_error"] = path.first_error;
    out.levels["level_decomposition_holds"] = errors.level_decomposition_holds;
    out.levels["dyadic_decomposition_holds"] = errors.dyadic_decomposition_holds;
    out.levels["levels"] = levels;
    return out;
}

}  // namespace wdlab
