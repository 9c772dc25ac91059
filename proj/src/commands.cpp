#include "vdlr/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "vdlr/artifacts.hpp"
#include "vdlr/config.hpp"
#include "vdlr/csv.hpp"
#include "vdlr/errors.hpp"
#include "vdlr/metrics.hpp"

namespace vdlr {

using nlohmann::json;
namespace fs = std::filesystem;

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(mix(seed) ^ a) ^ (b * 0x632be59bd9b4e019ULL));
}

namespace {

std::ofstream open_out(const std::string& path) {
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    return out;
}

void write_dataset_file(const std::string& path, const Dataset& ds) {
    auto out = open_out(path);
    write_dataset_csv(out, ds);
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double sample_sd(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

Dataset ampute(const Dataset& ds, double rate, const std::string& mechanism, double steepness, std::uint64_t seed) {
    if (rate == 0.0) return ds;
    if (mechanism == "mcar") return ampute_mcar(ds, rate, seed);
    if (mechanism == "mnar") return ampute_mnar(ds, rate, steepness, seed);
    throw DataError("unknown missingness mechanism '" + mechanism + "' (expected mcar or mnar)");
}

// Runs `n` independent tasks on up to `threads` workers; the first exception
// (by task index) is rethrown after all workers finish.
template <class F>
void parallel_for(int n, int threads, F&& task) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (int t = next++; t < n; t = next++) {
            try {
                task(t);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        }
    };
    const int w = std::max(1, std::min(threads, n));
    if (w == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < w; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

json labels_json(const std::vector<int>& labels) { return json(labels); }

}  // namespace

// ---------------------------------------------------------------------------

void cmd_simulate(const SimulateOptions& o, std::ostream& log) {
    Dataset train, test;
    json truth{{"kind", o.kind}, {"seed", o.seed}};
    const bool want_test = o.test_m > 0;
    if (o.kind == "friedman") {
        train = friedman(o.m, o.heteroscedastic, derive_seed(o.seed, 0));
        if (want_test) test = friedman(o.test_m, o.heteroscedastic, derive_seed(o.seed, 1));
        train = ampute(train, o.missing_rate, o.mechanism, o.steepness, derive_seed(o.seed, 2));
        if (want_test) test = ampute(test, o.missing_rate, o.mechanism, o.steepness, derive_seed(o.seed, 3));
        truth["heteroscedastic"] = o.heteroscedastic;
        truth["missing_rate"] = o.missing_rate;
        truth["mechanism"] = o.mechanism;
        if (o.mechanism == "mnar") truth["steepness"] = o.steepness;
        truth["mean_function"] = "10 sin(pi x1 x2) + 20 (x3 - 0.5)^2 + 10 x4 + 5 x5";
        truth["noise_variance"] = o.heteroscedastic ? "exp(x1)" : "1";
    } else if (o.kind == "bench") {
        const BenchKind k = parse_bench_kind(o.bench_kind);
        const auto tr = bench_data(k, o.m, o.p, derive_seed(o.seed, 0));
        train = tr.data;
        truth["bench_kind"] = o.bench_kind;
        truth["p"] = o.p;
        truth["missing_rate"] = 0.2;
        truth["train_labels"] = labels_json(tr.labels);
        if (want_test) {
            const auto te = bench_data(k, o.test_m, o.p, derive_seed(o.seed, 1));
            test = te.data;
            truth["test_labels"] = labels_json(te.labels);
        }
    } else if (o.kind == "screening") {
        const auto tr = screening_scenario(o.scenario, derive_seed(o.seed, 0));
        train = tr.data;
        truth["scenario"] = o.scenario;
        truth["train_labels"] = labels_json(tr.labels);
        if (want_test) {
            const auto te = screening_scenario(o.scenario, derive_seed(o.seed, 1));
            test = te.data;
            truth["test_labels"] = labels_json(te.labels);
        }
    } else if (o.kind == "illustration") {
        const auto tr = illustration_data(derive_seed(o.seed, 0));
        train = tr.data;
        truth["missing_rate"] = 0.25;
        truth["train_labels"] = labels_json(tr.labels);
        if (want_test) {
            const auto te = illustration_data(derive_seed(o.seed, 1));
            test = te.data;
            truth["test_labels"] = labels_json(te.labels);
        }
    } else {
        throw DataError("unknown simulation kind '" + o.kind + "' (expected friedman, bench, screening or illustration)");
    }
    fs::create_directories(o.out);
    write_dataset_file((fs::path(o.out) / "train.csv").string(), train);
    if (want_test) write_dataset_file((fs::path(o.out) / "test.csv").string(), test);
    write_json_file((fs::path(o.out) / "truth.json").string(), truth);
    log << "wrote " << train.size() << " training rows" << (want_test ? " and " + std::to_string(test.size()) + " test rows" : "")
        << " to " << o.out << "\n";
}

// ---------------------------------------------------------------------------

ScreenOutcome cmd_screen(const ScreenOptions& o, std::ostream& log) {
    LoadOptions lo;
    lo.response = o.response;
    lo.missing_token = o.missing_token;
    const Dataset ds = load_dataset_file(o.data, lo);
    LinearityMeasure measure;
    if (o.measure == "pvalue")
        measure = LinearityMeasure::p_value;
    else if (o.measure == "r2")
        measure = LinearityMeasure::r2;
    else if (o.measure == "adjr2")
        measure = LinearityMeasure::adj_r2;
    else
        throw DataError("unknown screening measure '" + o.measure + "' (expected pvalue, r2 or adjr2)");
    const double threshold = o.threshold.value_or(measure == LinearityMeasure::p_value ? 0.05 : 0.5);

    GmmOptions go;
    go.k_max = o.k_max;
    go.restarts = o.restarts;
    go.seed = o.seed;
    const ScreeningResult res = linearity_indicator(ds, go);
    if (res.gmm.k == 0) log << "only " << res.m_complete << " complete rows; too few to screen\n";

    const auto value = res.indicator(measure);
    ScreenOutcome outcome = ScreenOutcome::indeterminate;
    if (value) {
        const bool signal = measure == LinearityMeasure::p_value ? *value < threshold : *value > threshold;
        outcome = signal ? ScreenOutcome::signal : ScreenOutcome::no_signal;
    }
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    json clusters = json::array();
    for (const auto& c : res.clusters) {
        json cj{{"size", c.size}, {"eligible", c.eligible}};
        if (c.eligible) {
            cj["r2"] = c.r2;
            cj["adj_r2"] = c.adj_r2;
            cj["p_value"] = c.p_value;
            cj["coefficients"] = std::vector<double>(c.coefficients.data(), c.coefficients.data() + c.coefficients.size());
        }
        clusters.push_back(cj);
    }
    const char* names[] = {"signal", "no-signal", "indeterminate"};
    const int idx = outcome == ScreenOutcome::signal ? 0 : outcome == ScreenOutcome::no_signal ? 1 : 2;
    json j{{"m_complete", res.m_complete},
           {"p", res.p},
           {"k", res.gmm.k},
           {"bic", res.gmm.bic},
           {"clusters", clusters},
           {"indicator", {{"pvalue", opt(res.q_p_value)}, {"r2", opt(res.q_r2)}, {"adjr2", opt(res.q_adj_r2)}}},
           {"measure", o.measure},
           {"threshold", threshold},
           {"outcome", names[idx]}};
    if (o.out.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        write_json_file(o.out, j);
        log << "screening: k = " << res.gmm.k << ", outcome " << names[idx] << "\n";
    }
    return outcome;
}

// ---------------------------------------------------------------------------

void cmd_fit(const FitOptions& o, std::ostream& log) {
    FitPlan plan = load_fit_plan(o.config);
    const fs::path base = fs::path(o.config).parent_path();
    auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? p : (base / p).string(); };
    if (o.seed) plan.mcmc.seed = *o.seed;
    const std::string out_dir = !o.out.empty() ? o.out : (!plan.out_dir.empty() ? resolve(plan.out_dir) : "fit");

    const std::string data_path = resolve(plan.data.path);
    if (!fs::exists(data_path)) throw DataError("data file '" + data_path + "' does not exist");
    const Dataset raw = load_dataset_file(data_path, plan.data.load);

    Scaling scaling;
    scaling.covariates.assign(raw.num_covariates(), ColumnScaling{});
    if (plan.data.standardize == Standardize::train) {
        scaling = compute_scaling(raw);
    } else if (plan.data.standardize == Standardize::pooled) {
        if (plan.data.pool_with.empty()) throw DataError("config data.pool_with: required when standardize = pooled");
        LoadOptions lo = plan.data.load;
        lo.require_response = false;
        lo.covariates = raw.covariate_names();
        const Dataset extra = load_dataset_file(resolve(plan.data.pool_with), lo);
        const Dataset* parts[] = {&raw, &extra};
        scaling = compute_scaling(std::span<const Dataset* const>(parts));
    }
    const Dataset train = raw.standardize(scaling);
    finalize_model(plan, train);

    log << "fitting " << to_string(plan.model.kind) << " on " << train.size() << " rows, "
        << train.num_covariates() << " covariates, " << plan.mcmc.chains << " chain(s)\n";
    FitArtifacts fit;
    fit.chains = run_chains(train, plan.model, plan.mcmc, o.threads);
    fit.train = raw;
    fit.scaling = scaling;
    fit.model = plan.model;
    fit.mcmc = plan.mcmc;
    fit.manifest = json{{"command", "fit"},
                        {"seed", plan.mcmc.seed},
                        {"data", plan.data.path},
                        {"standardize", to_string(plan.data.standardize)},
                        {"missing_token", plan.data.load.missing_token}};
    write_fit_artifacts(out_dir, fit);
    for (const auto& c : fit.chains)
        log << "chain " << c.chain << ": " << c.draws.size() << " draws in " << c.seconds << " s\n";
    log << "wrote fit to " << out_dir << "\n";
}

// ---------------------------------------------------------------------------

void cmd_predict(const PredictOptions& o, std::ostream& log) {
    const FitArtifacts fit = read_fit_artifacts(o.fit);
    const Dataset train = fit.train.standardize(fit.scaling);

    LoadOptions lo;
    lo.response = train.response_name();
    lo.covariates = train.covariate_names();
    lo.require_response = false;
    std::ifstream qin(o.query);
    if (!qin) throw DataError("cannot open query file '" + o.query + "'");
    // Queries may legitimately have all-missing columns, so parse without the
    // loader's column check by reading the table directly.
    const CsvTable table = read_csv(qin);
    std::vector<int> cols;
    for (const auto& name : lo.covariates) {
        const int c = table.column(name);
        if (c < 0) throw DataError("query file is missing covariate column '" + name + "'");
        cols.push_back(c);
    }
    const int ycol = table.column(lo.response);
    const std::size_t p = cols.size();
    const std::string na = fit.manifest.value("missing_token", std::string("NA"));
    for (const double pr : o.probs)
        if (!(pr > 0.0 && pr < 1.0)) throw DataError("quantile probabilities must lie in (0, 1)");

    const std::uint64_t seed = o.seed.value_or(derive_seed(fit.mcmc.seed, 0x70726564ULL));
    const Predictor predictor(train, fit.model, fit.chains, seed, o.include_query_in_plugins);
    const ColumnScaling& ys = fit.scaling.response;

    auto out = open_out(o.out);
    CsvWriter w(out);
    std::vector<std::string> header = {"row", "mean", "sd"};
    for (double pr : o.probs) header.push_back("q" + format_double(pr));
    header.insert(header.end(), {"y", "qresid", "loglik"});
    w.row(header);

    std::vector<double> grid;
    if (!o.density_grid.empty()) {
        double lo_v = 0, hi_v = 0;
        int n = 0;
        char c1 = 0, c2 = 0;
        std::istringstream gs(o.density_grid);
        if (!(gs >> lo_v >> c1 >> hi_v >> c2 >> n) || c1 != ':' || c2 != ':' || n < 2 || !(hi_v > lo_v))
            throw DataError("density grid must look like lo:hi:n with lo < hi and n >= 2");
        for (int g = 0; g < n; ++g) grid.push_back(lo_v + (hi_v - lo_v) * g / (n - 1));
    }
    std::ofstream dens_out;
    std::optional<CsvWriter> dw;
    if (!grid.empty()) {
        dens_out = open_out(o.density_out);
        dw.emplace(dens_out);
        dw->row({"row", "y", "density"});
    }

    std::vector<double> x(p);
    std::vector<int> observed;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        observed.clear();
        for (std::size_t l = 0; l < p; ++l) {
            const std::string& cell = row[cols[l]];
            if (cell == na || cell.empty()) continue;
            x[l] = fit.scaling.covariates[l].forward(parse_double(cell, r + 1, lo.covariates[l]));
            observed.push_back(static_cast<int>(l));
        }
        std::optional<double> y;
        if (ycol >= 0 && row[ycol] != na && !row[ycol].empty()) y = parse_double(row[ycol], r + 1, lo.response);
        std::optional<double> y_model;
        if (y) y_model = ys.forward(*y);
        const PointPrediction pp = predictor.predict(x, observed, y_model, o.probs);
        w.field(r + 1).field(ys.inverse(pp.mean)).field(pp.sd * ys.scale);
        for (double q : pp.quantiles) w.field(ys.inverse(q));
        if (y) {
            w.field(*y).field(*pp.quantile_residual).field(*pp.mean_loglik - std::log(ys.scale));
        } else {
            w.field(std::string_view("NA")).field(std::string_view("NA")).field(std::string_view("NA"));
        }
        w.end_row();
        if (dw) {
            std::vector<double> gm(grid.size());
            for (std::size_t g = 0; g < grid.size(); ++g) gm[g] = ys.forward(grid[g]);
            const auto dens = predictor.density(x, observed, gm);
            for (std::size_t g = 0; g < grid.size(); ++g) {
                dw->field(r + 1).field(grid[g]).field(dens[g] / ys.scale);
                dw->end_row();
            }
        }
    }
    log << "wrote " << table.rows.size() << " predictions to " << o.out << "\n";
}

// ---------------------------------------------------------------------------

void cmd_metrics(const MetricsOptions& o, std::ostream& log) {
    const CsvTable t = read_csv_file(o.predictions);
    const int cm = t.column("mean"), cy = t.column("y"), cq = t.column("qresid"), cl = t.column("loglik");
    if (cm < 0 || cy < 0 || cq < 0 || cl < 0)
        throw DataError("'" + o.predictions + "' is not a prediction file (needs mean, y, qresid, loglik)");
    std::vector<double> y, yhat, q, ll;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        if (row[cy] == "NA" || row[cy].empty()) continue;
        y.push_back(parse_double(row[cy], r + 1, "y"));
        yhat.push_back(parse_double(row[cm], r + 1, "mean"));
        q.push_back(parse_double(row[cq], r + 1, "qresid"));
        ll.push_back(parse_double(row[cl], r + 1, "loglik"));
    }
    if (y.empty()) throw DataError("'" + o.predictions + "' has no rows with an observed response");
    std::ostringstream buf;
    CsvWriter w(buf);
    w.row({"n", "mspe", "deviance", "ks"});
    w.field(y.size()).field(mspe(y, yhat)).field(predictive_deviance_from_means(ll)).field(ks_uniform(q));
    w.end_row();
    if (o.out.empty()) {
        std::cout << buf.str();
    } else {
        auto out = open_out(o.out);
        out << buf.str();
        log << "wrote metrics for " << y.size() << " points to " << o.out << "\n";
    }
}

// ---------------------------------------------------------------------------

std::vector<BenchmarkRow> run_benchmark(const BenchmarkOptions& o, std::ostream* log) {
    std::vector<BenchmarkRow> rows;
    for (const auto& kind : o.kinds) {
        const BenchKind bk = parse_bench_kind(kind);
        for (std::size_t m : o.sizes)
            for (std::size_t p : o.dims) {
                const auto data = bench_data(bk, m, p, derive_seed(o.seed, m, p));
                const Dataset train = data.data.standardize(compute_scaling(data.data));
                for (ModelKind mk : {ModelKind::vdreg, ModelKind::vdlreg}) {
                    ModelConfig model;
                    model.kind = mk;
                    model.similarity.assign(p, SimilarityParams::nnsichi2(0.0, 0.1, 4.0, 0.04));
                    McmcConfig mc;
                    mc.seed = derive_seed(o.seed, m * 100 + p);
                    mc.n_iter = o.iterations;
                    Sampler sampler(train, model, mc);
                    std::vector<double> times;
                    for (int r = 0; r < o.repeats; ++r) {
                        const auto t0 = std::chrono::steady_clock::now();
                        for (int it = 0; it < o.iterations; ++it) sampler.scan();
                        times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
                    }
                    BenchmarkRow row{kind, m, mk, p, median(times), sample_sd(times)};
                    if (log)
                        *log << kind << " m=" << m << " p=" << p << " " << to_string(mk) << ": median " << row.median
                             << " s\n";
                    rows.push_back(row);
                }
            }
    }
    return rows;
}

void cmd_benchmark(const BenchmarkOptions& o, std::ostream& log) {
    const auto rows = run_benchmark(o, &log);
    auto out = open_out(o.out);
    CsvWriter w(out);
    w.row({"data", "m", "model", "p", "median", "sd"});
    for (const auto& r : rows) {
        w.field(std::string_view(r.data)).field(r.m).field(std::string_view(to_string(r.model))).field(r.p);
        w.field(r.median).field(r.sd);
        w.end_row();
    }
}

// ---------------------------------------------------------------------------

ModelConfig friedman_model_config(const Dataset& train, ModelKind kind) {
    const auto y = train.response();
    const double n = static_cast<double>(y.size());
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : y) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    ModelConfig m;
    m.kind = kind;
    m.mass = 1.0;
    m.similarity.assign(train.num_covariates(), SimilarityParams::nnsichi2(0.5, 0.1, 10.0, 0.04));
    m.m0 = mean;
    m.v = 2.0 * sd;
    m.a_sigma0 = 5.0 * sd;
    m.tau0 = 0.1;
    m.a_sigma = 2.0;
    // plug-in priors stay at their defaults although the covariates are unstandardized
    return m;
}

std::vector<FriedmanRow> replicate_friedman(const FriedmanDesign& d, std::ostream* log) {
    struct Task {
        int rep;
        double rate;
        std::string mech;
        bool hetero;
        ModelKind model;
    };
    std::vector<Task> tasks;
    for (int r = 0; r < d.replicates; ++r)
        for (bool h : d.heteroscedastic)
            for (const auto& mech : d.mechanisms)
                for (double rate : d.rates)
                    for (ModelKind mk : {ModelKind::vdreg, ModelKind::vdlreg}) tasks.push_back({r, rate, mech, h, mk});
    std::vector<FriedmanRow> rows(tasks.size());
    std::mutex log_mutex;
    parallel_for(static_cast<int>(tasks.size()), d.threads, [&](int t) {
        const Task& task = tasks[t];
        const std::uint64_t rs = derive_seed(d.seed, static_cast<std::uint64_t>(task.rep), task.hetero ? 1 : 0);
        Dataset train = friedman(d.m, task.hetero, derive_seed(rs, 1));
        Dataset test = friedman(d.m, task.hetero, derive_seed(rs, 2));
        const auto rate_key = static_cast<std::uint64_t>(std::llround(task.rate * 1e6));
        train = ampute(train, task.rate, task.mech, d.steepness, derive_seed(rs, 3, rate_key));
        test = ampute(test, task.rate, task.mech, d.steepness, derive_seed(rs, 4, rate_key));

        const ModelConfig model = friedman_model_config(train, task.model);
        McmcConfig mc;
        mc.n_iter = d.n_iter;
        mc.n_burn = d.n_burn;
        mc.thin = d.thin;
        mc.seed = derive_seed(rs, 5);
        const PosteriorSamples chain = run_chain(train, model, mc);

        std::vector<double> ks;
        for (const auto& dr : chain.draws) ks.push_back(static_cast<double>(dr.clusters.size()));
        const Predictor pred(train, model, std::span<const PosteriorSamples>(&chain, 1), derive_seed(rs, 6));
        std::vector<double> y, yhat, q, ll;
        for (std::size_t i = 0; i < test.size(); ++i) {
            const PointPrediction pp = pred.predict(test.row(i), test.observed_indices(i), test.y(i), {});
            y.push_back(test.y(i));
            yhat.push_back(pp.mean);
            q.push_back(*pp.quantile_residual);
            ll.push_back(*pp.mean_loglik);
        }
        FriedmanRow& row = rows[t];
        row.replicate = task.rep;
        row.rate = task.rate;
        row.mechanism = task.mech;
        row.heteroscedastic = task.hetero;
        row.model = task.model;
        row.mspe = mspe(y, yhat);
        row.deviance = predictive_deviance_from_means(ll);
        row.ks = ks_uniform(q);
        row.median_k = median(ks);
        if (log) {
            std::lock_guard lock(log_mutex);
            *log << "replicate " << task.rep << " rate " << task.rate << " " << task.mech << " "
                 << to_string(task.model) << ": deviance " << row.deviance << ", ks " << row.ks << ", median k "
                 << row.median_k << " (" << chain.seconds << " s)\n";
        }
    });
    return rows;
}

void write_friedman_rows(std::ostream& out, const std::vector<FriedmanRow>& rows) {
    CsvWriter w(out);
    w.row({"replicate", "rate", "mechanism", "heteroscedastic", "model", "mspe", "deviance", "ks", "median_k"});
    for (const auto& r : rows) {
        w.field(r.replicate).field(r.rate).field(std::string_view(r.mechanism)).field(r.heteroscedastic ? 1 : 0);
        w.field(std::string_view(to_string(r.model))).field(r.mspe).field(r.deviance).field(r.ks).field(r.median_k);
        w.end_row();
    }
}

void cmd_replicate_friedman(const FriedmanDesign& d, const std::string& out, std::ostream& log) {
    const auto rows = replicate_friedman(d, &log);
    auto f = open_out(out);
    write_friedman_rows(f, rows);
    log << "wrote " << rows.size() << " rows to " << out << "\n";
}

// ---------------------------------------------------------------------------

void cmd_cocluster_grid(const CoclusterGridOptions& o, std::ostream& log) {
    SimilarityParams sp;
    const SimilarityFamily fam = parse_similarity_family(o.family);
    if (fam == SimilarityFamily::nn)
        sp = SimilarityParams::nn(o.mean, o.prior_var, o.kernel_var);
    else if (fam == SimilarityFamily::nnig)
        sp = SimilarityParams::nnig(o.mean, o.var_scale, o.shape, o.scale);
    else
        throw DataError("cocluster-grid supports the nn and nnig families");
    sp.validate();
    if (o.n < 2 || !(o.hi > o.lo)) throw DataError("grid needs n >= 2 and lo < hi");
    const PartitionPrior prior = PartitionPrior::shared(o.mass, sp, 2, 8);
    const double origin[2] = {0.0, 0.0};
    const bool both[2] = {true, true};
    const bool first_only[2] = {true, false};
    auto out = open_out(o.out);
    CsvWriter w(out);
    w.row({"x1", "x2", "both_observed", "x2_missing", "difference"});
    for (int a = 0; a < o.n; ++a)
        for (int b = 0; b < o.n; ++b) {
            const double x[2] = {o.lo + (o.hi - o.lo) * a / (o.n - 1), o.lo + (o.hi - o.lo) * b / (o.n - 1)};
            const double pb = co_cluster_probability(origin, both, x, both, prior);
            const double pm = co_cluster_probability(origin, both, x, first_only, prior);
            w.field(x[0]).field(x[1]).field(pb).field(pm).field(pb - pm);
            w.end_row();
        }
    log << "wrote " << o.n * o.n << " grid points to " << o.out << "\n";
}

}  // namespace vdlr
