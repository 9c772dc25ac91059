#include "vdlr/config.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "vdlr/errors.hpp"

namespace vdlr {

namespace pt = boost::property_tree;
using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Section reader that records which keys were consumed so leftovers can be
// reported as unknown.
class Section {
public:
    Section(const pt::ptree* node, std::string name) : node_(node), name_(std::move(name)) {}

    std::optional<std::string> text(const std::string& key) {
        used_.insert(key);
        if (!node_) return std::nullopt;
        auto v = node_->get_optional<std::string>(key);
        if (!v) return std::nullopt;
        return trim(*v);
    }
    std::string text(const std::string& key, const std::string& fallback) { return text(key).value_or(fallback); }

    double number(const std::string& key, double fallback) {
        auto t = text(key);
        return t ? parse_number(key, *t) : fallback;
    }
    // Returns nullopt for "auto".
    std::optional<double> number_or_auto(const std::string& key, double fallback, bool& is_auto) {
        auto t = text(key);
        is_auto = t && *t == "auto";
        if (is_auto) return std::nullopt;
        return t ? parse_number(key, *t) : fallback;
    }
    long long integer(const std::string& key, long long fallback) {
        auto t = text(key);
        if (!t) return fallback;
        long long v = 0;
        auto [ptr, ec] = std::from_chars(t->data(), t->data() + t->size(), v);
        if (ec != std::errc() || ptr != t->data() + t->size()) fail(key, "expected an integer, got '" + *t + "'");
        return v;
    }
    bool boolean(const std::string& key, bool fallback) {
        auto t = text(key);
        if (!t) return fallback;
        if (*t == "true" || *t == "1" || *t == "yes") return true;
        if (*t == "false" || *t == "0" || *t == "no") return false;
        fail(key, "expected true or false, got '" + *t + "'");
    }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        throw DataError("config " + name_ + "." + key + ": " + what);
    }

    void reject_unknown() const {
        if (!node_) return;
        for (const auto& [key, child] : *node_)
            if (!used_.count(key)) throw DataError("config " + name_ + "." + key + ": unknown key");
    }

private:
    double parse_number(const std::string& key, const std::string& t) const {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v))
            fail(key, "expected a number, got '" + t + "'");
        return v;
    }

    const pt::ptree* node_;
    std::string name_;
    std::set<std::string> used_;
};

SimilarityParams read_similarity(Section& s, const SimilarityParams& base) {
    SimilarityParams out = base;
    if (auto f = s.text("family")) {
        try {
            out.family = parse_similarity_family(*f);
        } catch (const std::exception& e) {
            s.fail("family", e.what());
        }
    }
    out.mean = s.number("mean", out.mean);
    out.prior_var = s.number("prior_var", out.prior_var);
    out.kernel_var = s.number("kernel_var", out.kernel_var);
    out.var_scale = s.number("var_scale", out.var_scale);
    out.shape = s.number("shape", out.shape);
    out.scale = s.number("scale", out.scale);
    out.kappa = s.number("kappa", out.kappa);
    out.nu = s.number("nu", out.nu);
    out.s0sq = s.number("s0sq", out.s0sq);
    s.reject_unknown();
    return out;
}

double sample_sd(std::span<const double> y) {
    const double n = static_cast<double>(y.size());
    if (y.size() < 2) return 1.0;
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : y) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    return sd > 0 ? sd : 1.0;
}

}  // namespace

ModelKind parse_model_kind(const std::string& s) {
    if (s == "vdlreg") return ModelKind::vdlreg;
    if (s == "vdreg") return ModelKind::vdreg;
    throw DataError("unknown model kind '" + s + "' (expected vdlreg or vdreg)");
}

std::string to_string(ModelKind k) { return k == ModelKind::vdlreg ? "vdlreg" : "vdreg"; }

Standardize parse_standardize(const std::string& s) {
    if (s == "none") return Standardize::none;
    if (s == "train") return Standardize::train;
    if (s == "pooled") return Standardize::pooled;
    throw DataError("unknown standardize option '" + s + "' (expected none, train or pooled)");
}

std::string to_string(Standardize s) {
    switch (s) {
        case Standardize::none: return "none";
        case Standardize::train: return "train";
        case Standardize::pooled: return "pooled";
    }
    return "none";
}

FitPlan parse_fit_plan(const std::string& text, const std::string& origin) {
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw DataError("config " + origin + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    auto section = [&](const std::string& name) {
        auto it = tree.find(name);
        return Section(it == tree.not_found() ? nullptr : &it->second, name);
    };
    static const std::set<std::string> known = {"data", "model", "similarity", "mcmc", "output"};
    for (const auto& [name, child] : tree) {
        if (known.count(name) || name.rfind("similarity.", 0) == 0) continue;
        throw DataError("config " + name + ": unknown section");
    }

    FitPlan plan;
    {
        Section s = section("data");
        auto path = s.text("path");
        if (!path || path->empty()) s.fail("path", "required");
        plan.data.path = *path;
        plan.data.load.response = s.text("response", "y");
        plan.data.load.missing_token = s.text("missing_token", "NA");
        try {
            plan.data.standardize = parse_standardize(s.text("standardize", "train"));
        } catch (const DataError& e) {
            s.fail("standardize", e.what());
        }
        plan.data.pool_with = s.text("pool_with", "");
        if (auto cols = s.text("covariates")) {
            std::istringstream cs(*cols);
            std::string c;
            while (std::getline(cs, c, ',')) {
                c = trim(c);
                if (!c.empty()) plan.data.load.covariates.push_back(c);
            }
        }
        s.reject_unknown();
    }
    {
        Section s = section("model");
        ModelConfig& m = plan.model;
        try {
            m.kind = parse_model_kind(s.text("kind", "vdlreg"));
        } catch (const DataError& e) {
            s.fail("kind", e.what());
        }
        m.zero_coefficients = s.boolean("zero_coefficients", false);
        m.mass = s.number("mass", 1.0);
        if (auto v = s.number_or_auto("m0", 0.0, plan.autos.m0)) m.m0 = *v;
        if (auto v = s.number_or_auto("v", 1.0, plan.autos.v)) m.v = *v;
        if (auto v = s.number_or_auto("a_sigma0", 2.0, plan.autos.a_sigma0)) m.a_sigma0 = *v;
        m.a_sigma = s.number("a_sigma", 0.5);
        m.tau0 = s.number("tau0", 0.1);
        m.plugin.nu = s.number("nu", 1.0);
        m.plugin.nu_s = s.number("nu_s", 1.0);
        m.plugin.mean = s.number("mu0_x", 0.0);
        m.plugin.var = s.number("s0_x2", 1.0);
        s.reject_unknown();
    }
    {
        Section s = section("similarity");
        plan.similarity_default = read_similarity(s, SimilarityParams::nnsichi2(0.0, 0.1, 4.0, 0.04));
        for (const auto& [name, child] : tree) {
            if (name.rfind("similarity.", 0) != 0) continue;
            Section o(&child, name);
            plan.similarity_overrides.emplace_back(name.substr(11), read_similarity(o, plan.similarity_default));
        }
    }
    {
        Section s = section("mcmc");
        McmcConfig& c = plan.mcmc;
        c.n_iter = static_cast<int>(s.integer("n_iter", c.n_iter));
        c.n_burn = static_cast<int>(s.integer("n_burn", c.n_burn));
        c.thin = static_cast<int>(s.integer("thin", c.thin));
        c.seed = static_cast<std::uint64_t>(s.integer("seed", static_cast<long long>(c.seed)));
        c.chains = static_cast<int>(s.integer("chains", c.chains));
        c.p_type1 = s.number("p_type1", c.p_type1);
        c.slice.width = s.number("slice_width", c.slice.width);
        c.slice.max_steps = static_cast<int>(s.integer("slice_max_steps", c.slice.max_steps));
        c.ess_max_shrink = static_cast<int>(s.integer("ess_max_shrink", c.ess_max_shrink));
        const std::string init = s.text("init", "single");
        if (init == "single")
            c.init = InitKind::single;
        else if (init == "random")
            c.init = InitKind::random;
        else
            s.fail("init", "expected single or random");
        c.init_clusters = static_cast<int>(s.integer("init_clusters", c.init_clusters));
        const std::string tau = s.text("tau_update", "gig");
        if (tau == "gig")
            c.tau_update = TauUpdate::gig;
        else if (tau == "slice")
            c.tau_update = TauUpdate::slice;
        else
            s.fail("tau_update", "expected gig or slice");
        const std::string alloc = s.text("allocation", "metropolis");
        if (alloc == "metropolis")
            c.allocation = AllocationKind::metropolis;
        else if (alloc == "gibbs")
            c.allocation = AllocationKind::gibbs;
        else
            s.fail("allocation", "expected metropolis or gibbs");
        c.keep_params = true;
        s.reject_unknown();
        try {
            c.validate();
        } catch (const std::exception& e) {
            throw DataError(std::string("config mcmc: ") + e.what());
        }
    }
    {
        Section s = section("output");
        plan.out_dir = s.text("dir", "");
        s.reject_unknown();
    }
    return plan;
}

FitPlan load_fit_plan(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_fit_plan(buf.str(), path);
}

void finalize_model(FitPlan& plan, const Dataset& train) {
    const std::size_t p = train.num_covariates();
    const auto& names = train.covariate_names();
    plan.model.similarity.assign(p, plan.similarity_default);
    for (const auto& [col, params] : plan.similarity_overrides) {
        auto it = std::find(names.begin(), names.end(), col);
        if (it == names.end()) throw DataError("config similarity." + col + ": no covariate named '" + col + "'");
        plan.model.similarity[it - names.begin()] = params;
    }
    const auto y = train.response();
    if (plan.autos.m0 || plan.autos.v || plan.autos.a_sigma0) {
        double mean = 0.0;
        for (double v : y) mean += v;
        mean /= static_cast<double>(y.size());
        const double sd = sample_sd(y);
        if (plan.autos.m0) plan.model.m0 = mean;
        if (plan.autos.v) plan.model.v = 2.0 * sd;
        if (plan.autos.a_sigma0) plan.model.a_sigma0 = 5.0 * sd;
    }
    plan.model.validate(p);
}

json to_json(const SimilarityParams& s) {
    json j{{"family", to_string(s.family)}, {"mean", s.mean}};
    switch (s.family) {
        case SimilarityFamily::nn:
            j["prior_var"] = s.prior_var;
            j["kernel_var"] = s.kernel_var;
            break;
        case SimilarityFamily::nnig:
            j["var_scale"] = s.var_scale;
            j["shape"] = s.shape;
            j["scale"] = s.scale;
            break;
        case SimilarityFamily::nnsichi2:
            j["kappa"] = s.kappa;
            j["nu"] = s.nu;
            j["s0sq"] = s.s0sq;
            break;
    }
    return j;
}

SimilarityParams similarity_from_json(const json& j) {
    SimilarityParams s;
    s.family = parse_similarity_family(j.at("family").get<std::string>());
    s.mean = j.at("mean").get<double>();
    s.prior_var = j.value("prior_var", s.prior_var);
    s.kernel_var = j.value("kernel_var", s.kernel_var);
    s.var_scale = j.value("var_scale", s.var_scale);
    s.shape = j.value("shape", s.shape);
    s.scale = j.value("scale", s.scale);
    s.kappa = j.value("kappa", s.kappa);
    s.nu = j.value("nu", s.nu);
    s.s0sq = j.value("s0sq", s.s0sq);
    return s;
}

json to_json(const ModelConfig& m) {
    json sims = json::array();
    for (const auto& s : m.similarity) sims.push_back(to_json(s));
    return json{{"kind", to_string(m.kind)},
                {"zero_coefficients", m.zero_coefficients},
                {"mass", m.mass},
                {"m0", m.m0},
                {"v", m.v},
                {"a_sigma0", m.a_sigma0},
                {"a_sigma", m.a_sigma},
                {"tau0", m.tau0},
                {"nu", m.plugin.nu},
                {"nu_s", m.plugin.nu_s},
                {"mu0_x", m.plugin.mean},
                {"s0_x2", m.plugin.var},
                {"similarity", sims}};
}

ModelConfig model_from_json(const json& j) {
    ModelConfig m;
    m.kind = parse_model_kind(j.at("kind").get<std::string>());
    m.zero_coefficients = j.at("zero_coefficients").get<bool>();
    m.mass = j.at("mass").get<double>();
    m.m0 = j.at("m0").get<double>();
    m.v = j.at("v").get<double>();
    m.a_sigma0 = j.at("a_sigma0").get<double>();
    m.a_sigma = j.at("a_sigma").get<double>();
    m.tau0 = j.at("tau0").get<double>();
    m.plugin.nu = j.at("nu").get<double>();
    m.plugin.nu_s = j.at("nu_s").get<double>();
    m.plugin.mean = j.at("mu0_x").get<double>();
    m.plugin.var = j.at("s0_x2").get<double>();
    for (const auto& s : j.at("similarity")) m.similarity.push_back(similarity_from_json(s));
    return m;
}

json to_json(const McmcConfig& c) {
    return json{{"n_iter", c.n_iter},
                {"n_burn", c.n_burn},
                {"thin", c.thin},
                {"seed", c.seed},
                {"chains", c.chains},
                {"p_type1", c.p_type1},
                {"slice_width", c.slice.width},
                {"slice_max_steps", c.slice.max_steps},
                {"ess_max_shrink", c.ess_max_shrink},
                {"init", c.init == InitKind::single ? "single" : "random"},
                {"init_clusters", c.init_clusters},
                {"tau_update", c.tau_update == TauUpdate::gig ? "gig" : "slice"},
                {"allocation", c.allocation == AllocationKind::metropolis ? "metropolis" : "gibbs"}};
}

McmcConfig mcmc_from_json(const json& j) {
    McmcConfig c;
    c.n_iter = j.at("n_iter").get<int>();
    c.n_burn = j.at("n_burn").get<int>();
    c.thin = j.at("thin").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.chains = j.at("chains").get<int>();
    c.p_type1 = j.at("p_type1").get<double>();
    c.slice.width = j.at("slice_width").get<double>();
    c.slice.max_steps = j.at("slice_max_steps").get<int>();
    c.ess_max_shrink = j.at("ess_max_shrink").get<int>();
    c.init = j.at("init").get<std::string>() == "random" ? InitKind::random : InitKind::single;
    c.init_clusters = j.at("init_clusters").get<int>();
    c.tau_update = j.at("tau_update").get<std::string>() == "slice" ? TauUpdate::slice : TauUpdate::gig;
    c.allocation =
        j.at("allocation").get<std::string>() == "gibbs" ? AllocationKind::gibbs : AllocationKind::metropolis;
    return c;
}

json to_json(const Scaling& s) {
    json cols = json::array();
    for (const auto& c : s.covariates) cols.push_back(json{{"center", c.center}, {"scale", c.scale}});
    return json{{"response", {{"center", s.response.center}, {"scale", s.response.scale}}}, {"covariates", cols}};
}

Scaling scaling_from_json(const json& j) {
    Scaling s;
    s.response.center = j.at("response").at("center").get<double>();
    s.response.scale = j.at("response").at("scale").get<double>();
    for (const auto& c : j.at("covariates"))
        s.covariates.push_back(ColumnScaling{c.at("center").get<double>(), c.at("scale").get<double>()});
    return s;
}

}  // namespace vdlr
