// wdlab: command-line front end for the weak-dependence lab.
//
//   wdlab coeffs      --config run.json
//   wdlab bound fit   --config run.json
//   wdlab bound check --config run.json
//   wdlab couple run  --config run.json
//   wdlab rates       --config run.json     (LSV processes run the surrogate experiment)
//   wdlab wasserstein --config run.json
//   wdlab degenerate  --config run.json
//
// --seed, --out and --threads override the config.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "wdlab/lab.hpp"

namespace {

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<unsigned> threads;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
}

wdlab::ExperimentConfig load(const Overrides& o) {
    auto c = wdlab::load_config(o.config);
    if (o.seed) c.seed = *o.seed;
    if (o.out) c.output = *o.out;
    if (o.threads) c.threads = *o.threads;
    return c;
}

void emit(const wdlab::ExperimentConfig& c, const wdlab::Report& r) {
    for (const auto& f : wdlab::emit_report(c.output, r)) std::cout << "wrote " << f.string() << "\n";
}

void print_rate(const wdlab::RateEstimate& e) {
    std::printf("%s: exponent %.4f (se %.4f), target %.4f +- %.3f: %s\n", e.name.c_str(), e.exponent, e.exponent_se,
                e.target, e.tolerance, e.status().c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"weak-dependence lab"};
    app.require_subcommand(1);
    Overrides o;

    auto* coeffs = app.add_subcommand("coeffs", "dependence coefficients, sigma^2 and series sums");
    add_common(coeffs, o);

    auto* bound = app.add_subcommand("bound", "Fuk-Nagaev bound against Monte Carlo tails");
    bound->require_subcommand(1);
    auto* bound_fit = bound->add_subcommand("fit", "fit (c1, c2) on a training grid and check a holdout grid");
    add_common(bound_fit, o);
    auto* bound_check = bound->add_subcommand("check", "check configured (c1, c2) and the series diagnostic");
    add_common(bound_check, o);

    auto* couple = app.add_subcommand("couple", "coupling construction");
    couple->require_subcommand(1);
    auto* couple_run = couple->add_subcommand("run", "one coupled path with per-level error statistics");
    add_common(couple_run, o);

    auto* rates = app.add_subcommand("rates", "L2 coupling error rate in n");
    add_common(rates, o);
    auto* wasserstein = app.add_subcommand("wasserstein", "Donsker line against the Gaussian line");
    add_common(wasserstein, o);
    auto* degenerate = app.add_subcommand("degenerate", "moment and series checks for a coboundary");
    add_common(degenerate, o);

    CLI11_PARSE(app, argc, argv);

    try {
        const auto c = load(o);
        if (*coeffs) {
            emit(c, wdlab::coefficient_report(c));
        } else if (*bound_fit) {
            const auto r = wdlab::bound_fit_report(c);
            std::printf("c1 = %g, c2 = %g, holdout dominated: %s\n", r.summary["c1"].get<double>(),
                        r.summary["c2"].get<double>(), r.summary["holdout_dominated"].get<bool>() ? "yes" : "no");
            emit(c, r);
        } else if (*bound_check) {
            const auto r = wdlab::bound_check_report(c);
            std::printf("dominated: %s\n", r.summary["dominated"].get<bool>() ? "yes" : "no");
            emit(c, r);
        } else if (*couple_run) {
            const auto r = wdlab::couple_run(c);
            const std::filesystem::path dir(c.output);
            std::error_code ec;
            std::filesystem::create_directories(dir, ec);
            if (ec) throw wdlab::LabError("unwritable output directory '" + c.output + "'");
            wdlab::detail::write_file(dir / "coupled_path.csv", r.path_csv);
            wdlab::detail::write_file(dir / "coupled_levels.json", r.levels.dump(2) + "\n");
            std::printf("sup |S - T| = %.6g over n = %zu\n", r.levels["sup_error"].get<double>(),
                        r.levels["n"].get<std::size_t>());
            std::cout << "wrote " << (dir / "coupled_path.csv").string() << "\nwrote "
                      << (dir / "coupled_levels.json").string() << "\n";
        } else if (*rates) {
            if (c.process.value("type", "") == "lsv") {
                const auto r = wdlab::run_lsv_experiment(c);
                print_rate(r.surrogate);
                print_rate(r.direct);
                for (const auto& rep : wdlab::lsv_reports(c, r)) emit(c, rep);
            } else {
                const auto r = wdlab::run_rate_experiment(c);
                print_rate(r);
                emit(c, wdlab::rate_report(c, r));
            }
        } else if (*wasserstein) {
            const auto r = wdlab::donsker_wasserstein(c);
            print_rate(r.rate);
            emit(c, wdlab::donsker_report(c, r));
        } else if (*degenerate) {
            const auto r = wdlab::run_degenerate_suite(c);
            std::printf("degenerate suite: %s\n", r.pass ? "pass" : "fail");
            emit(c, wdlab::degenerate_report(c, r));
        }
    } catch (const std::exception& e) {
        std::cerr << "wdlab: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
