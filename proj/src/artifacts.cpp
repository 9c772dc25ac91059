#include "vdlr/artifacts.hpp"

#include <filesystem>
#include <fstream>
#include <map>

#include "vdlr/config.hpp"
#include "vdlr/csv.hpp"
#include "vdlr/errors.hpp"

namespace vdlr {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    return out;
}

json acceptance_json(const AcceptanceStats& a) {
    auto mc = [](const MoveCounts& c) { return json{{"proposed", c.proposed}, {"accepted", c.accepted}}; };
    return json{{"join", mc(a.join)},
                {"split", mc(a.split)},
                {"transfer", mc(a.transfer)},
                {"ess_calls", a.ess_calls},
                {"ess_shrinks", a.ess_shrinks},
                {"ess_stalls", a.ess_stalls}};
}

long long to_int(const std::string& s, std::size_t row, const std::string& col) {
    const double v = parse_double(s, row, col);
    const auto i = static_cast<long long>(v);
    if (static_cast<double>(i) != v) throw DataError("expected an integer in " + col + " at row " + std::to_string(row));
    return i;
}

AcceptanceStats acceptance_from_json(const json& j) {
    auto mc = [](const json& c) {
        MoveCounts m;
        m.proposed = c.at("proposed").get<decltype(m.proposed)>();
        m.accepted = c.at("accepted").get<decltype(m.accepted)>();
        return m;
    };
    AcceptanceStats a;
    a.join = mc(j.at("join"));
    a.split = mc(j.at("split"));
    a.transfer = mc(j.at("transfer"));
    a.ess_calls = j.at("ess_calls").get<long long>();
    a.ess_shrinks = j.at("ess_shrinks").get<long long>();
    a.ess_stalls = j.at("ess_stalls").get<long long>();
    return a;
}

int require_column(const CsvTable& t, const std::string& name, const std::string& file) {
    const int c = t.column(name);
    if (c < 0) throw DataError(file + ": missing column '" + name + "'");
    return c;
}

}  // namespace

void write_json_file(const std::string& path, const json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw DataError("malformed JSON in '" + path + "': " + e.what());
    }
}

std::vector<double> pooled_cocluster(const std::vector<PosteriorSamples>& chains) {
    if (chains.empty()) return {};
    const std::size_t m = chains.front().m;
    std::vector<double> out(m * m, 0.0);
    double draws = 0.0;
    for (const auto& c : chains) {
        for (std::size_t k = 0; k < m * m; ++k) out[k] += c.cocluster[k];
        draws += static_cast<double>(c.draws.size());
    }
    if (draws > 0)
        for (auto& v : out) v /= draws;
    return out;
}

void write_fit_artifacts(const std::string& dir, const FitArtifacts& fit) {
    const fs::path root(dir);
    fs::create_directories(root);
    const std::size_t p = fit.train.num_covariates();
    const std::size_t m = fit.train.size();

    json manifest = fit.manifest;
    manifest["model"] = to_json(fit.model);
    manifest["mcmc"] = to_json(fit.mcmc);
    manifest["scaling"] = to_json(fit.scaling);
    manifest["m"] = m;
    manifest["p"] = p;
    manifest["response"] = fit.train.response_name();
    manifest["covariates"] = fit.train.covariate_names();
    json acc = json::array();
    json timing = json::array();
    for (const auto& c : fit.chains) {
        acc.push_back(acceptance_json(c.acceptance));
        timing.push_back(json{{"chain", c.chain}, {"seconds", c.seconds}});
    }
    manifest["acceptance"] = acc;
    write_json_file((root / "manifest.json").string(), manifest);
    write_json_file((root / "timing.json").string(), json{{"chains", timing}});

    {
        auto out = open_out(root / "training_data.csv");
        write_dataset_csv(out, fit.train);
    }
    {
        auto out = open_out(root / "samples_global.csv");
        CsvWriter w(out);
        w.row({"chain", "draw", "iteration", "k", "mu0", "sigma0", "logpost"});
        for (const auto& c : fit.chains)
            for (std::size_t d = 0; d < c.draws.size(); ++d) {
                const Draw& dr = c.draws[d];
                w.field(c.chain).field(d).field(dr.iteration).field(dr.clusters.size());
                w.field(dr.baseline.mu0).field(dr.baseline.sigma0).field(dr.logpost);
                w.end_row();
            }
    }
    {
        auto out = open_out(root / "samples_clusters.csv");
        CsvWriter w(out);
        std::vector<std::string> header = {"chain", "draw", "cluster", "size", "mu", "sigma", "tau"};
        for (std::size_t l = 0; l < p; ++l) header.push_back("beta_" + std::to_string(l + 1));
        w.row(header);
        for (const auto& c : fit.chains)
            for (std::size_t d = 0; d < c.draws.size(); ++d) {
                const Draw& dr = c.draws[d];
                std::vector<int> sizes(dr.clusters.size(), 0);
                for (int lab : dr.labels) ++sizes[lab];
                for (std::size_t j = 0; j < dr.clusters.size(); ++j) {
                    const ClusterParams& t = dr.clusters[j];
                    w.field(c.chain).field(d).field(j).field(sizes[j]).field(t.mu).field(t.sigma).field(t.tau);
                    for (std::size_t l = 0; l < p; ++l) w.field(t.beta.empty() ? 0.0 : t.beta[l]);
                    w.end_row();
                }
            }
    }
    {
        auto out = open_out(root / "labels.csv");
        CsvWriter w(out);
        std::vector<std::string> header = {"chain", "draw"};
        for (std::size_t i = 0; i < m; ++i) header.push_back("obs_" + std::to_string(i + 1));
        w.row(header);
        for (const auto& c : fit.chains)
            for (std::size_t d = 0; d < c.draws.size(); ++d) {
                w.field(c.chain).field(d);
                for (int lab : c.draws[d].labels) w.field(lab);
                w.end_row();
            }
    }
    {
        auto out = open_out(root / "coclustering.csv");
        CsvWriter w(out);
        std::vector<std::string> header;
        for (std::size_t i = 0; i < m; ++i) header.push_back("obs_" + std::to_string(i + 1));
        w.row(header);
        const auto cc = pooled_cocluster(fit.chains);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) w.field(cc[i * m + j]);
            w.end_row();
        }
    }
}

FitArtifacts read_fit_artifacts(const std::string& dir) {
    const fs::path root(dir);
    if (!fs::is_directory(root)) throw DataError("fit directory '" + dir + "' does not exist");
    FitArtifacts fit;
    fit.manifest = read_json_file((root / "manifest.json").string());
    try {
        fit.model = model_from_json(fit.manifest.at("model"));
        fit.mcmc = mcmc_from_json(fit.manifest.at("mcmc"));
        fit.scaling = scaling_from_json(fit.manifest.at("scaling"));
    } catch (const json::exception& e) {
        throw DataError("incomplete manifest in '" + dir + "': " + e.what());
    }
    const std::size_t p = fit.manifest.at("p").get<std::size_t>();

    LoadOptions lo;
    lo.response = fit.manifest.at("response").get<std::string>();
    lo.covariates = fit.manifest.at("covariates").get<std::vector<std::string>>();
    fit.train = load_dataset_file((root / "training_data.csv").string(), lo);
    const std::size_t m = fit.train.size();

    const std::string gfile = (root / "samples_global.csv").string();
    const CsvTable global = read_csv_file(gfile);
    const std::string cfile = (root / "samples_clusters.csv").string();
    const CsvTable clusters = read_csv_file(cfile);
    const std::string lfile = (root / "labels.csv").string();
    const CsvTable labels = read_csv_file(lfile);

    std::map<int, PosteriorSamples> by_chain;
    const int gc = require_column(global, "chain", gfile), gd = require_column(global, "draw", gfile),
              gi = require_column(global, "iteration", gfile), gk = require_column(global, "k", gfile),
              gm = require_column(global, "mu0", gfile), gs = require_column(global, "sigma0", gfile),
              gl = require_column(global, "logpost", gfile);
    for (std::size_t r = 0; r < global.rows.size(); ++r) {
        const auto& row = global.rows[r];
        PosteriorSamples& ch = by_chain[static_cast<int>(to_int(row[gc], r, "chain"))];
        if (static_cast<std::size_t>(to_int(row[gd], r, "draw")) != ch.draws.size())
            throw DataError(gfile + ": draws out of order at row " + std::to_string(r + 1));
        Draw d;
        d.iteration = static_cast<int>(to_int(row[gi], r, "iteration"));
        d.clusters.resize(static_cast<std::size_t>(to_int(row[gk], r, "k")));
        d.baseline.mu0 = parse_double(row[gm], r, "mu0");
        d.baseline.sigma0 = parse_double(row[gs], r, "sigma0");
        d.logpost = parse_double(row[gl], r, "logpost");
        ch.draws.push_back(std::move(d));
    }
    for (auto& [c, ch] : by_chain) {
        ch.chain = c;
        ch.m = m;
    }

    const int cc = require_column(clusters, "chain", cfile), cd = require_column(clusters, "draw", cfile),
              cj = require_column(clusters, "cluster", cfile), cmu = require_column(clusters, "mu", cfile),
              csg = require_column(clusters, "sigma", cfile), ct = require_column(clusters, "tau", cfile);
    std::vector<int> cb(p);
    for (std::size_t l = 0; l < p; ++l) cb[l] = require_column(clusters, "beta_" + std::to_string(l + 1), cfile);
    for (std::size_t r = 0; r < clusters.rows.size(); ++r) {
        const auto& row = clusters.rows[r];
        auto it = by_chain.find(static_cast<int>(to_int(row[cc], r, "chain")));
        const auto d = static_cast<std::size_t>(to_int(row[cd], r, "draw"));
        const auto j = static_cast<std::size_t>(to_int(row[cj], r, "cluster"));
        if (it == by_chain.end() || d >= it->second.draws.size() || j >= it->second.draws[d].clusters.size())
            throw DataError(cfile + ": row " + std::to_string(r + 1) + " refers to an unknown draw or cluster");
        ClusterParams& t = it->second.draws[d].clusters[j];
        t.mu = parse_double(row[cmu], r, "mu");
        t.sigma = parse_double(row[csg], r, "sigma");
        t.tau = parse_double(row[ct], r, "tau");
        t.beta.resize(p);
        for (std::size_t l = 0; l < p; ++l) t.beta[l] = parse_double(row[cb[l]], r, "beta");
    }

    const int lc = require_column(labels, "chain", lfile), ld = require_column(labels, "draw", lfile);
    if (labels.header.size() != m + 2) throw DataError(lfile + ": expected one label column per training row");
    for (std::size_t r = 0; r < labels.rows.size(); ++r) {
        const auto& row = labels.rows[r];
        auto it = by_chain.find(static_cast<int>(to_int(row[lc], r, "chain")));
        const auto d = static_cast<std::size_t>(to_int(row[ld], r, "draw"));
        if (it == by_chain.end() || d >= it->second.draws.size())
            throw DataError(lfile + ": row " + std::to_string(r + 1) + " refers to an unknown draw");
        auto& lab = it->second.draws[d].labels;
        lab.resize(m);
        const auto k = static_cast<long long>(it->second.draws[d].clusters.size());
        for (std::size_t i = 0; i < m; ++i) {
            const long long v = to_int(row[i + 2], r, labels.header[i + 2]);
            if (v < 0 || v >= k) throw DataError(lfile + ": row " + std::to_string(r + 1) + " has a label outside 0.." + std::to_string(k - 1));
            lab[i] = static_cast<int>(v);
        }
    }
    for (auto& [c, ch] : by_chain) {
        // co-clustering counts are not stored per chain; rebuild them from the labels
        ch.m = m;
        ch.cocluster.assign(m * m, 0);
        for (const auto& dr : ch.draws) {
            if (dr.labels.size() != m) throw DataError(lfile + ": a draw of chain " + std::to_string(c) + " has no labels");
            std::vector<std::vector<int>> groups;
            for (std::size_t i = 0; i < m; ++i) {
                const auto g = static_cast<std::size_t>(dr.labels[i]);
                if (g >= groups.size()) groups.resize(g + 1);
                groups[g].push_back(static_cast<int>(i));
            }
            for (const auto& mem : groups)
                for (int a : mem)
                    for (int b : mem) ++ch.cocluster[static_cast<std::size_t>(a) * m + b];
        }
        fit.chains.push_back(std::move(ch));
    }
    const json& acc = fit.manifest.value("acceptance", json::array());
    if (!acc.empty() && acc.size() != fit.chains.size())
        throw DataError("manifest in '" + dir + "' lists acceptance for " + std::to_string(acc.size()) + " chains");
    try {
        for (std::size_t c = 0; c < acc.size(); ++c) fit.chains[c].acceptance = acceptance_from_json(acc[c]);
    } catch (const json::exception& e) {
        throw DataError("malformed acceptance in '" + dir + "': " + e.what());
    }
    // timing is informational; a missing timing.json is not an error
    const fs::path tfile = root / "timing.json";
    if (fs::exists(tfile)) {
        const json t = read_json_file(tfile.string());
        for (const auto& e : t.value("chains", json::array()))
            for (auto& ch : fit.chains)
                if (ch.chain == e.value("chain", -1)) ch.seconds = e.value("seconds", 0.0);
    }
    return fit;
}

}  // namespace vdlr
