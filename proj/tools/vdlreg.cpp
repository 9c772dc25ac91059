// vdlreg command-line front end. Exit codes: 0 ok, 1 user error, 2 internal
// error; `screen` additionally returns 10 (no signal) or 11 (indeterminate).

#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "vdlr/commands.hpp"
#include "vdlr/errors.hpp"

int main(int argc, char** argv) {
    using namespace vdlr;
    CLI::App app{"Variable-dimension local regression: simulate, screen, fit, predict, evaluate"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_help_all_flag("--help-all", "Expand all help");

    std::optional<std::uint64_t> seed;
    int threads = 1;
    std::string out;
    app.add_option("--seed", seed, "Master seed")->type_name("UINT");
    app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--out", out, "Output path (file or directory, per command)");
    for (auto* opt : app.get_options()) opt->configurable(false);

    SimulateOptions sim;
    auto* c_sim = app.add_subcommand("simulate", "Generate synthetic train/test data");
    c_sim->add_option("--kind", sim.kind, "friedman | bench | screening | illustration")
        ->check(CLI::IsMember({"friedman", "bench", "screening", "illustration"}));
    c_sim->add_option("--m", sim.m, "Training rows");
    c_sim->add_option("--test-m", sim.test_m, "Test rows (0 to skip)");
    c_sim->add_option("--p", sim.p, "Covariates (bench)");
    c_sim->add_option("--bench-kind", sim.bench_kind, "step | linear")->check(CLI::IsMember({"step", "linear"}));
    c_sim->add_option("--scenario", sim.scenario, "Screening scenario 1-3")->check(CLI::Range(1, 3));
    c_sim->add_flag("--heteroscedastic", sim.heteroscedastic, "Friedman noise variance exp(x1)");
    c_sim->add_option("--missing-rate", sim.missing_rate, "Friedman missing rate")->check(CLI::Range(0.0, 0.99));
    c_sim->add_option("--mechanism", sim.mechanism, "mcar | mnar")->check(CLI::IsMember({"mcar", "mnar"}));
    c_sim->add_option("--steepness", sim.steepness, "MNAR logistic slope");

    ScreenOptions scr;
    auto* c_scr = app.add_subcommand("screen", "Local-linearity screening of a dataset");
    c_scr->add_option("data", scr.data, "CSV file")->required();
    c_scr->add_option("--response", scr.response, "Response column");
    c_scr->add_option("--missing-token", scr.missing_token, "Missing-value marker");
    c_scr->add_option("--measure", scr.measure, "pvalue | r2 | adjr2")
        ->check(CLI::IsMember({"pvalue", "r2", "adjr2"}));
    c_scr->add_option("--threshold", scr.threshold, "Decision threshold");
    c_scr->add_option("--k-max", scr.k_max, "Largest mixture size")->check(CLI::Range(1, 50));
    c_scr->add_option("--restarts", scr.restarts, "EM restarts per size")->check(CLI::PositiveNumber);

    FitOptions fit;
    auto* c_fit = app.add_subcommand("fit", "Run MCMC from an INI config");
    c_fit->add_option("config", fit.config, "Config file")->required();

    PredictOptions pred;
    auto* c_pred = app.add_subcommand("predict", "Predictive summaries for query rows");
    c_pred->add_option("fit", pred.fit, "Fit directory")->required();
    c_pred->add_option("query", pred.query, "Query CSV")->required();
    c_pred->add_option("--probs", pred.probs, "Quantile probabilities")->delimiter(',');
    c_pred->add_flag("--include-query-plugins", pred.include_query_in_plugins,
                     "Sensitivity variant: include the query point in cluster plug-ins");
    c_pred->add_option("--density-grid", pred.density_grid, "Response grid lo:hi:n");
    c_pred->add_option("--density-out", pred.density_out, "Density CSV path");

    MetricsOptions met;
    auto* c_met = app.add_subcommand("metrics", "MSPE, predictive deviance and K-S from a prediction CSV");
    c_met->add_option("predictions", met.predictions, "Prediction CSV")->required();

    BenchmarkOptions bench;
    auto* c_bench = app.add_subcommand("benchmark", "Timing grid over data kind, m, p and model");
    c_bench->add_option("--kinds", bench.kinds, "Data kinds")->delimiter(',');
    c_bench->add_option("--sizes", bench.sizes, "Values of m")->delimiter(',');
    c_bench->add_option("--dims", bench.dims, "Values of p")->delimiter(',');
    c_bench->add_option("--repeats", bench.repeats, "Timed blocks per cell")->check(CLI::PositiveNumber);
    c_bench->add_option("--iterations", bench.iterations, "Scans per block")->check(CLI::PositiveNumber);

    FriedmanDesign fd;
    auto* c_fr = app.add_subcommand("replicate-friedman", "Desk-scale Friedman study");
    c_fr->add_option("--replicates", fd.replicates, "Independent datasets")->check(CLI::PositiveNumber);
    c_fr->add_option("--m", fd.m, "Train and test size")->check(CLI::PositiveNumber);
    c_fr->add_option("--n-iter", fd.n_iter, "MCMC iterations per fit")->check(CLI::PositiveNumber);
    c_fr->add_option("--n-burn", fd.n_burn, "Burn-in iterations");
    c_fr->add_option("--thin", fd.thin, "Keep every n-th draw")->check(CLI::PositiveNumber);
    c_fr->add_option("--rates", fd.rates, "Missing rates")->delimiter(',');
    c_fr->add_option("--mechanisms", fd.mechanisms, "mcar,mnar")->delimiter(',');
    std::vector<std::string> hetero = {"no"};
    c_fr->add_option("--heteroscedastic", hetero, "no,yes")->delimiter(',');
    c_fr->add_option("--steepness", fd.steepness, "MNAR logistic slope");

    CoclusterGridOptions cg;
    auto* c_cg = app.add_subcommand("cocluster-grid", "Prior co-clustering probabilities over a covariate grid");
    c_cg->add_option("--family", cg.family, "nn | nnig")->check(CLI::IsMember({"nn", "nnig"}));
    c_cg->add_option("--mass", cg.mass, "Concentration M");
    c_cg->add_option("--mean", cg.mean, "Prior mean of the covariate");
    c_cg->add_option("--prior-var", cg.prior_var, "Prior variance of the mean (nn)");
    c_cg->add_option("--kernel-var", cg.kernel_var, "Within-cluster variance (nn)");
    c_cg->add_option("--var-scale", cg.var_scale, "Mean variance scale (nnig)");
    c_cg->add_option("--shape", cg.shape, "Inverse-gamma shape (nnig)");
    c_cg->add_option("--scale", cg.scale, "Inverse-gamma scale (nnig)");
    c_cg->add_option("--lo", cg.lo, "Grid lower end");
    c_cg->add_option("--hi", cg.hi, "Grid upper end");
    c_cg->add_option("--n", cg.n, "Grid points")->check(CLI::Range(2, 10000));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        std::ostream& log = std::cerr;
        if (c_sim->parsed()) {
            if (seed) sim.seed = *seed;
            if (!out.empty()) sim.out = out;
            cmd_simulate(sim, log);
        } else if (c_scr->parsed()) {
            if (seed) scr.seed = *seed;
            scr.out = out;
            return static_cast<int>(cmd_screen(scr, log));
        } else if (c_fit->parsed()) {
            fit.seed = seed;
            fit.threads = threads;
            fit.out = out;
            cmd_fit(fit, log);
        } else if (c_pred->parsed()) {
            pred.seed = seed;
            if (!out.empty()) pred.out = out;
            cmd_predict(pred, log);
        } else if (c_met->parsed()) {
            met.out = out;
            cmd_metrics(met, log);
        } else if (c_bench->parsed()) {
            if (seed) bench.seed = *seed;
            if (!out.empty()) bench.out = out;
            cmd_benchmark(bench, log);
        } else if (c_fr->parsed()) {
            if (seed) fd.seed = *seed;
            fd.threads = threads;
            fd.heteroscedastic.clear();
            for (const auto& h : hetero) {
                if (h != "no" && h != "yes") throw DataError("--heteroscedastic takes no and/or yes");
                fd.heteroscedastic.push_back(h == "yes");
            }
            cmd_replicate_friedman(fd, out.empty() ? "friedman.csv" : out, log);
        } else if (c_cg->parsed()) {
            if (!out.empty()) cg.out = out;
            cmd_cocluster_grid(cg, log);
        }
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
