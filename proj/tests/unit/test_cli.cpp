#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include "vdlr/artifacts.hpp"
#include "vdlr/commands.hpp"
#include "vdlr/config.hpp"
#include "vdlr/csv.hpp"
#include "vdlr/errors.hpp"

using namespace vdlr;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("vdlr_cli_" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

// Small simulated problem plus a short-run config next to it.
fs::path make_fit_dir(const std::string& name, const std::string& kind = "vdlreg", int chains = 1) {
    const fs::path dir = scratch(name);
    SimulateOptions so;
    so.kind = "bench";
    so.m = 40;
    so.test_m = 12;
    so.p = 2;
    so.bench_kind = "linear";
    so.seed = 3;
    so.out = (dir / "data").string();
    std::ostringstream log;
    cmd_simulate(so, log);
    write_text(dir / "fit.ini", "[data]\npath = data/train.csv\n\n[model]\nkind = " + kind +
                                    "\nm0 = auto\nv = auto\na_sigma0 = auto\n\n[mcmc]\nn_iter = 300\nn_burn = 100\n"
                                    "thin = 2\nseed = 11\nchains = " +
                                    std::to_string(chains) + "\n\n[output]\ndir = out\n");
    return dir;
}

const std::vector<std::string> kFitFiles = {"manifest.json", "training_data.csv", "samples_global.csv",
                                            "samples_clusters.csv", "labels.csv", "coclustering.csv"};

}  // namespace

TEST_CASE("config: defaults, auto values and overrides") {
    const FitPlan s = parse_fit_plan("[data]\npath = d.csv\n");
    CHECK(s.data.path == "d.csv");
    CHECK(s.data.standardize == Standardize::train);
    CHECK(s.model.kind == ModelKind::vdlreg);
    CHECK(s.model.mass == 1.0);
    CHECK(s.model.tau0 == 0.1);
    CHECK(s.mcmc.tau_update == TauUpdate::gig);
    CHECK(s.similarity_default.family == SimilarityFamily::nnsichi2);

    const FitPlan t = parse_fit_plan(
        "[data]\npath = d.csv\n[model]\nkind = vdreg\nm0 = auto\nmass = 2.5\n[similarity]\nfamily = nn\n"
        "[similarity.b]\nfamily = nnig\nvar_scale = 2\nshape = 3\nscale = 1\n[mcmc]\nn_iter = 50\n");
    CHECK(t.model.kind == ModelKind::vdreg);
    CHECK(t.autos.m0);
    CHECK_FALSE(t.autos.v);
    CHECK(t.model.mass == 2.5);
    CHECK(t.mcmc.n_iter == 50);
    REQUIRE(t.similarity_overrides.size() == 1);
    CHECK(t.similarity_overrides[0].first == "b");

    FitPlan f = t;
    const Dataset train({1.0, 3.0, 5.0}, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6}, std::vector<std::uint8_t>(6, 1), 2,
                        {"a", "b"});
    finalize_model(f, train);
    CHECK(f.model.m0 == doctest::Approx(3.0));
    CHECK(f.model.similarity[0].family == SimilarityFamily::nn);
    CHECK(f.model.similarity[1].family == SimilarityFamily::nnig);

    FitPlan g = parse_fit_plan("[data]\npath = d.csv\n[similarity.zz]\nfamily = nn\n");
    CHECK_THROWS_WITH_AS(finalize_model(g, train), doctest::Contains("similarity.zz"), DataError);
}

TEST_CASE("config: errors name the offending field") {
    auto err = [](const std::string& text) {
        try {
            parse_fit_plan(text);
        } catch (const DataError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(err("[data]\npath = d.csv\n[model]\nmas = 1\n").find("model.mas") != std::string::npos);
    CHECK(err("[data]\npath = d.csv\n[mcmc]\nn_iter = ten\n").find("mcmc.n_iter") != std::string::npos);
    CHECK(err("[data]\n").find("data.path") != std::string::npos);
    CHECK(err("[data]\npath = d.csv\n[model]\nkind = bart\n").find("model.kind") != std::string::npos);
    CHECK(err("[data]\npath = d.csv\n[extras]\nx = 1\n").find("extras") != std::string::npos);
    CHECK(err("[data]\npath = d.csv\n[mcmc]\ntau_update = newton\n").find("mcmc.tau_update") != std::string::npos);
    CHECK_FALSE(err("[data]\npath = d.csv\n[mcmc]\nthin = 0\n").empty());
}

TEST_CASE("fit: artifacts round-trip and are deterministic") {
    const fs::path dir = make_fit_dir("fit_det", "vdlreg", 2);
    std::ostringstream log;
    FitOptions fo;
    fo.config = (dir / "fit.ini").string();
    fo.threads = 2;
    fo.out = (dir / "a").string();
    cmd_fit(fo, log);
    fo.out = (dir / "b").string();
    fo.threads = 1;
    cmd_fit(fo, log);
    for (const auto& f : kFitFiles) {
        CAPTURE(f);
        CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    }

    const FitArtifacts a = read_fit_artifacts((dir / "a").string());
    const fs::path c = dir / "c";
    write_fit_artifacts(c.string(), a);
    for (const auto& f : kFitFiles) CHECK(slurp(dir / "a" / f) == slurp(c / f));
    REQUIRE(a.chains.size() == 2);
    CHECK(a.chains[0].draws.size() == 100);
    CHECK(a.mcmc.seed == 11);

    // the config's [output] dir is used when --out is absent
    fo.out.clear();
    cmd_fit(fo, log);
    CHECK(fs::exists(dir / "out" / "labels.csv"));
}

TEST_CASE("fit: vdreg writes identically zero coefficients") {
    const fs::path dir = make_fit_dir("fit_vdreg", "vdreg");
    std::ostringstream log;
    cmd_fit({(dir / "fit.ini").string(), std::nullopt, 1, (dir / "o").string()}, log);
    const CsvTable t = read_csv_file((dir / "o" / "samples_clusters.csv").string());
    const int b1 = t.column("beta_1"), b2 = t.column("beta_2");
    REQUIRE(b1 >= 0);
    REQUIRE(b2 >= 0);
    REQUIRE_FALSE(t.rows.empty());
    for (const auto& r : t.rows) {
        CHECK(std::stod(r[b1]) == 0.0);
        CHECK(std::stod(r[b2]) == 0.0);
    }
}

TEST_CASE("fit: a missing data file is reported by path") {
    const fs::path dir = scratch("fit_missing");
    write_text(dir / "fit.ini", "[data]\npath = nowhere.csv\n");
    std::ostringstream log;
    CHECK_THROWS_WITH_AS(cmd_fit({(dir / "fit.ini").string(), std::nullopt, 1, ""}, log),
                         doctest::Contains("nowhere.csv"), DataError);
}

TEST_CASE("predict and metrics: all-missing query rows, determinism") {
    const fs::path dir = make_fit_dir("predict");
    std::ostringstream log;
    cmd_fit({(dir / "fit.ini").string(), std::nullopt, 1, (dir / "f").string()}, log);
    write_text(dir / "query.csv", "x1,x2,y\nNA,NA,0.5\n0.3,NA,NA\n-2,1,1.5\n");
    PredictOptions po;
    po.fit = (dir / "f").string();
    po.query = (dir / "query.csv").string();
    po.out = (dir / "p1.csv").string();
    po.density_grid = "-8:8:81";
    po.density_out = (dir / "d1.csv").string();
    cmd_predict(po, log);
    po.out = (dir / "p2.csv").string();
    po.density_out = (dir / "d2.csv").string();
    cmd_predict(po, log);
    CHECK(slurp(dir / "p1.csv") == slurp(dir / "p2.csv"));
    CHECK(slurp(dir / "d1.csv") == slurp(dir / "d2.csv"));

    const CsvTable t = read_csv_file((dir / "p1.csv").string());
    REQUIRE(t.rows.size() == 3);
    CHECK(t.header == std::vector<std::string>{"row", "mean", "sd", "q0.025", "q0.5", "q0.975", "y", "qresid", "loglik"});
    for (const auto& r : t.rows) CHECK(std::isfinite(std::stod(r[1])));
    CHECK(t.rows[1][7] == "NA");
    const double q = std::stod(t.rows[0][7]);
    CHECK(q > 0.0);
    CHECK(q < 1.0);

    // the predictive density on the grid integrates to about one
    const CsvTable d = read_csv_file((dir / "d1.csv").string());
    double mass = 0.0;
    for (std::size_t g = 0; g < 81; ++g) mass += std::stod(d.rows[g][2]) * (g == 0 || g == 80 ? 0.1 : 0.2);
    CHECK(mass == doctest::Approx(1.0).epsilon(0.05));

    MetricsOptions mo;
    mo.predictions = (dir / "p1.csv").string();
    mo.out = (dir / "m.csv").string();
    cmd_metrics(mo, log);
    const CsvTable m = read_csv_file(mo.out);
    REQUIRE(m.rows.size() == 1);
    CHECK(m.rows[0][0] == "2");

    write_text(dir / "bad.csv", "x1,y\n1,2\n");
    po.query = (dir / "bad.csv").string();
    CHECK_THROWS_WITH_AS(cmd_predict(po, log), doctest::Contains("x2"), DataError);
}

TEST_CASE("simulate: files and determinism") {
    const fs::path a = scratch("sim_a"), b = scratch("sim_b");
    SimulateOptions so;
    so.kind = "friedman";
    so.m = 30;
    so.test_m = 10;
    so.missing_rate = 0.25;
    so.mechanism = "mnar";
    so.out = a.string();
    std::ostringstream log;
    cmd_simulate(so, log);
    so.out = b.string();
    cmd_simulate(so, log);
    for (const char* f : {"train.csv", "test.csv", "truth.json"}) CHECK(slurp(a / f) == slurp(b / f));
    so.kind = "nonsense";
    CHECK_THROWS_AS(cmd_simulate(so, log), DataError);
}

TEST_CASE("replicate_friedman: row count and 0% MCAR equals 0% MNAR") {
    FriedmanDesign d;
    d.replicates = 2;
    d.m = 30;
    d.n_iter = 60;
    d.n_burn = 20;
    d.thin = 2;
    d.rates = {0.0};
    d.mechanisms = {"mcar", "mnar"};
    d.threads = 2;
    const auto rows = replicate_friedman(d);
    CHECK(rows.size() == 2u * 2u * 2u);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].mechanism != "mcar") continue;
        for (const auto& o : rows)
            if (o.mechanism == "mnar" && o.replicate == rows[i].replicate && o.model == rows[i].model) {
                CHECK(o.mspe == rows[i].mspe);
                CHECK(o.deviance == rows[i].deviance);
                CHECK(o.ks == rows[i].ks);
            }
    }
    std::ostringstream a, b;
    write_friedman_rows(a, rows);
    d.threads = 1;
    write_friedman_rows(b, replicate_friedman(d));
    CHECK(a.str() == b.str());
}

TEST_CASE("benchmark: schema") {
    BenchmarkOptions o;
    o.kinds = {"step"};
    o.sizes = {20};
    o.dims = {2};
    o.repeats = 2;
    o.iterations = 5;
    o.out = (scratch("bench") / "b.csv").string();
    std::ostringstream log;
    cmd_benchmark(o, log);
    const CsvTable t = read_csv_file(o.out);
    CHECK(t.header == std::vector<std::string>{"data", "m", "model", "p", "median", "sd"});
    CHECK(t.rows.size() == 2);
}

TEST_CASE("cocluster-grid: both-missing corner and file shape") {
    CoclusterGridOptions o;
    o.n = 5;
    o.out = (scratch("grid") / "g.csv").string();
    std::ostringstream log;
    cmd_cocluster_grid(o, log);
    const CsvTable t = read_csv_file(o.out);
    CHECK(t.rows.size() == 25);
    for (const auto& r : t.rows) {
        const double pb = std::stod(r[2]), pm = std::stod(r[3]);
        CHECK(pb > 0.0);
        CHECK(pb < 1.0);
        CHECK(std::stod(r[4]) == doctest::Approx(pb - pm));
    }
    o.family = "nnsichi2";
    CHECK_THROWS_AS(cmd_cocluster_grid(o, log), DataError);
}

TEST_CASE("executable: exit codes and byte-identical reruns") {
    const std::string exe = VDLREG_EXE;
    const fs::path dir = make_fit_dir("exe");
    auto run = [&](const std::string& args) {
        const std::string cmd = "\"" + exe + "\" " + args + " > \"" + (dir / "stdout.txt").string() + "\" 2>&1";
        const int rc = std::system(cmd.c_str());
        return WEXITSTATUS(rc);
    };
    CHECK(run("") == 1);
    CHECK(run("--help") == 0);
    CHECK(run("fit " + (dir / "nope.ini").string()) == 1);
    CHECK(run("--seed 4 --out " + (dir / "r1").string() + " fit " + (dir / "fit.ini").string()) == 0);
    CHECK(run("--seed 4 --out " + (dir / "r2").string() + " fit " + (dir / "fit.ini").string()) == 0);
    for (const auto& f : kFitFiles) CHECK(slurp(dir / "r1" / f) == slurp(dir / "r2" / f));
    CHECK(slurp(dir / "r1" / "labels.csv") != slurp(dir / "out" / "labels.csv"));

    CHECK(run("--seed 2 --out " + (dir / "s2").string() + " simulate --kind screening --scenario 2") == 0);
    CHECK(run("--out " + (dir / "s2.json").string() + " screen " + (dir / "s2" / "train.csv").string()) == 10);
    CHECK(run("--seed 2 --out " + (dir / "s1").string() + " simulate --kind screening --scenario 1") == 0);
    CHECK(run("--out " + (dir / "s1.json").string() + " screen " + (dir / "s1" / "train.csv").string()) == 0);
    CHECK(run("screen " + (dir / "s1" / "train.csv").string() + " --measure r3") == 1);
}
