#include "chaoslab/config.hpp"

#include <fstream>

namespace chaoslab {

using nlohmann::json;

namespace {

const json& require_key(const json& j, const char* key, const char* where)
{
    if (!j.is_object() || !j.contains(key))
        throw ConfigError(std::string(where) + ": missing key '" + key + "'");
    return j.at(key);
}

template <class T>
T get_or(const json& j, const char* key, T fallback)
{
    if (!j.is_object() || !j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("key '") + key + "': " + e.what());
    }
}

// A number means that multiple of the identity; nested arrays give the matrix.
Mat parse_matrix(const json& j, int d, const char* what)
{
    if (j.is_number()) return j.get<double>() * Mat::Identity(d, d);
    if (!j.is_array() || j.size() != static_cast<std::size_t>(d))
        throw ConfigError(std::string(what) + ": expected a number or a " + std::to_string(d) + "x" +
                          std::to_string(d) + " array");
    Mat m(d, d);
    for (int i = 0; i < d; ++i) {
        const auto& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || row.size() != static_cast<std::size_t>(d))
            throw ConfigError(std::string(what) + ": ragged matrix");
        for (int k = 0; k < d; ++k) m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
    }
    return m;
}

Vec parse_vector(const json& j, int d, const char* what)
{
    if (j.is_number()) return Vec::Constant(d, j.get<double>());
    if (!j.is_array() || j.size() != static_cast<std::size_t>(d))
        throw ConfigError(std::string(what) + ": expected a number or " + std::to_string(d) + " entries");
    Vec v(d);
    for (int i = 0; i < d; ++i) v[i] = j[static_cast<std::size_t>(i)].get<double>();
    return v;
}

std::string kind_of(const json& j, const char* what)
{
    const auto& k = require_key(j, "kind", what);
    if (!k.is_string()) throw ConfigError(std::string(what) + ": 'kind' must be a string");
    return k.get<std::string>();
}

SmoothMap parse_smooth(const json& j, int d)
{
    const auto kind = kind_of(j, "g");
    if (kind == "tanh") return SmoothMap::scaled_tanh(get_or(j, "scale", 1.0));
    if (kind == "sin") return SmoothMap::scaled_sin(get_or(j, "scale", 1.0));
    if (kind == "linear") return SmoothMap::linear(parse_matrix(require_key(j, "B", "g"), d, "g.B"));
    if (kind == "zero") return SmoothMap::zero();
    throw ConfigError("g: unknown kind '" + kind + "'");
}

Potential parse_potential(const json& j, const char* what)
{
    const auto kind = kind_of(j, what);
    if (kind == "quadratic_well") return Potential::quadratic_well(get_or(j, "curvature", 1.0));
    if (kind == "logcosh") return Potential::logcosh(get_or(j, "scale", 1.0));
    throw ConfigError(std::string(what) + ": unknown kind '" + kind + "'");
}

GaussianMeasure parse_gaussian(const json& j, int d)
{
    GaussianMeasure g{parse_vector(require_key(j, "mean", "init"), d, "init.mean"),
                      parse_matrix(require_key(j, "cov", "init"), d, "init.cov")};
    try {
        g.validate();
    } catch (const DomainError& e) {
        throw ConfigError(std::string("init: ") + e.what());
    }
    return g;
}

template <class T>
std::vector<T> get_list(const json& j, const char* key, std::vector<T> fallback)
{
    auto v = get_or(j, key, fallback);
    if (v.empty()) throw ConfigError(std::string("grid '") + key + "' must be nonempty");
    return v;
}

const json& section(const json& j, const char* key)
{
    static const json empty = json::object();
    if (!j.contains(key)) return empty;
    if (!j.at(key).is_object()) throw ConfigError(std::string("'") + key + "' must be an object");
    return j.at(key);
}

LinearMeanField require_linear(const ModelFamily& m, const char* where)
{
    if (const auto* lin = std::get_if<LinearMeanField>(&m)) return *lin;
    throw ConfigError(std::string(where) + " requires the linear_mean_field family");
}

std::size_t get_count(const json& j, const char* key, std::size_t fallback)
{
    const auto v = get_or<long long>(j, key, static_cast<long long>(fallback));
    if (v < 0) throw ConfigError(std::string("'") + key + "' must be nonnegative");
    return static_cast<std::size_t>(v);
}

}  // namespace

ModelFamily parse_model(const json& j, int d)
{
    const auto& fam = require_key(j, "family", "model");
    if (!fam.is_string()) throw ConfigError("model.family must be a string");
    const auto name = fam.get<std::string>();
    if (name == "linear_mean_field")
        return LinearMeanField{parse_matrix(require_key(j, "A", "model"), d, "model.A"),
                               parse_matrix(require_key(j, "B", "model"), d, "model.B"),
                               j.contains("b0") ? parse_vector(j.at("b0"), d, "model.b0") : Vec(Vec::Zero(d))};
    if (name == "mean_nonlinearity")
        return MeanNonlinearity{parse_matrix(require_key(j, "A", "model"), d, "model.A"),
                                parse_smooth(require_key(j, "g", "model"), d)};
    if (name == "pairwise_kernel") {
        const auto& phi = require_key(j, "phi", "model");
        const auto kind = kind_of(phi, "phi");
        if (kind == "confined_sine")
            return PairwiseKernel{PairInteraction::confined_sine(get_or(phi, "kappa", 1.0), get_or(phi, "scale", 1.0)), d};
        if (kind == "linear")
            return PairwiseKernel{PairInteraction::linear(parse_matrix(require_key(phi, "A", "phi"), d, "phi.A"),
                                                          parse_matrix(require_key(phi, "B", "phi"), d, "phi.B")),
                                  d};
        throw ConfigError("phi: unknown kind '" + kind + "'");
    }
    if (name == "kernel_composition") {
        const auto& G = require_key(j, "G", "model");
        const auto& h = require_key(j, "h", "model");
        if (kind_of(G, "G") != "confined_tanh") throw ConfigError("G: unknown kind");
        if (kind_of(h, "h") != "gaussian_bump") throw ConfigError("h: unknown kind");
        return KernelComposition{OuterMap::confined_tanh(get_or(G, "kappa", 1.0), get_or(G, "scale", 1.0)),
                                 InnerKernel::gaussian_bump(get_or(h, "width", 1.0)), d};
    }
    if (name == "langevin_gradient") {
        LangevinGradient lg{parse_potential(require_key(j, "U", "model"), "U"),
                            parse_potential(require_key(j, "W", "model"), "W"), {}, d};
        if (j.contains("g")) lg.g = parse_potential(j.at("g"), "g");
        return lg;
    }
    throw ConfigError("model.family: unknown family '" + name + "'");
}

SimConfig parse_sim(const json& j, std::uint64_t seed)
{
    SimConfig c;
    c.n = get_count(j, "n", 1);
    c.d = get_or(j, "d", 1);
    c.sigma = get_or(j, "sigma", 1.0);
    c.dt = get_or(j, "dt", 1e-3);
    c.t_end = get_or(j, "t_end", 1.0);
    c.record_stride = get_count(j, "record_stride", 1);
    c.seed = seed;
    if (c.d < 1) throw ConfigError("sim.d must be at least 1");
    if (j.contains("init")) {
        const auto& init = j.at("init");
        if (init.contains("points"))
            c.init = InitialLaw::explicit_points(init.at("points").get<std::vector<double>>());
        else
            c.init = InitialLaw{parse_gaussian(init, c.d), {}};
    } else {
        c.init = InitialLaw::normal(Vec::Zero(c.d), Mat::Identity(c.d, c.d));
    }
    return c;
}

ExperimentConfig parse_config(const json& j)
{
    if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
    ExperimentConfig cfg;
    cfg.raw = j;
    const auto& name = require_key(j, "experiment", "config");
    if (!name.is_string()) throw ConfigError("'experiment' must be a string");
    cfg.experiment = name.get<std::string>();
    static const char* known[] = {"oracle-rates", "hierarchy-certify", "chaos-mc", "flows-check", "quantization-demo"};
    if (std::find(std::begin(known), std::end(known), cfg.experiment) == std::end(known))
        throw ConfigError("unknown experiment '" + cfg.experiment + "'");
    const auto& seed = require_key(j, "seed", "config");
    if (!seed.is_number_unsigned()) throw ConfigError("'seed' must be a nonnegative integer");
    cfg.seed = seed.get<std::uint64_t>();
    cfg.workers = get_count(j, "workers", 0);
    cfg.output_path = get_or<std::string>(j, "output_path", cfg.experiment + ".csv");
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open configuration " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return parse_config(j);
}

std::filesystem::path table_path(const ExperimentConfig& cfg, const std::string& suffix,
                                 const std::string& dir_override)
{
    auto p = cfg.output_path;
    if (!suffix.empty()) p.replace_filename(p.stem().string() + suffix + p.extension().string());
    if (!dir_override.empty()) p = std::filesystem::path(dir_override) / p.filename();
    return p;
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg)
{
    const json& j = cfg.raw;
    const json& grids = section(j, "grids");
    const json& params = section(j, "params");
    const json& sim_j = section(j, "sim");
    const SimConfig sim = parse_sim(sim_j, cfg.seed);
    auto model = [&](const json& owner, const SimConfig& s) -> std::optional<ModelFamily> {
        if (!owner.contains("model")) return std::nullopt;
        return parse_model(owner.at("model"), s.d);
    };

    if (cfg.experiment == "oracle-rates") {
        OracleRatesParams p;
        if (auto m = model(j, sim)) p.model = require_linear(*m, "oracle-rates");
        p.sigma = sim.sigma;
        if (sim.init.gaussian) p.mu0 = *sim.init.gaussian;
        else throw ConfigError("oracle-rates needs a Gaussian initial law");
        if (p.model.A.rows() != sim.d) throw ConfigError("oracle-rates: model dimension must equal sim.d");
        p.n_grid = get_list(grids, "n_grid", p.n_grid);
        p.k_grid = get_list(grids, "k_grid", p.k_grid);
        p.t_grid = get_list(grids, "t_grid", p.t_grid);
        p.t_fit = get_or(params, "t_fit", p.t_fit);
        p.early_until = get_or(params, "early_until", p.early_until);
        p.n_tolerance = get_or(params, "n_tolerance", p.n_tolerance);
        p.k_tolerance = get_or(params, "k_tolerance", p.k_tolerance);
        return run_oracle_rates(p);
    }
    if (cfg.experiment == "hierarchy-certify") {
        HierarchyCertifyParams p;
        p.n_grid = get_list(grids, "n_grid", p.n_grid);
        p.a_grid = get_list(params, "a_grid", p.a_grid);
        p.c_grid = get_list(params, "c_grid", p.c_grid);
        p.p_grid = get_list(params, "p_grid", p.p_grid);
        p.r_grid = get_list(params, "r_grid", p.r_grid);
        p.b = get_or(params, "b", p.b);
        p.C0 = get_or(params, "C0", p.C0);
        p.T = get_or(params, "T", p.T);
        p.moment_n = get_count(params, "moment_n", p.moment_n);
        p.moment_a = get_or(params, "moment_a", p.moment_a);
        p.moment_t = get_list(params, "moment_t", p.moment_t);
        p.seed = cfg.seed;
        return run_hierarchy_certify(p);
    }
    if (cfg.experiment == "flows-check") {
        FlowsCheckParams p;
        if (auto m = model(j, sim)) p.fd_model = *m;
        if (j.contains("sim")) p.fd_sim = sim;
        if (auto m = model(params, sim)) p.fd_extra = *m;
        p.tangent_dt = get_or(params, "tangent_dt", p.tangent_dt);
        p.tangent_t = get_or(params, "tangent_t", p.tangent_t);
        p.fd_x0 = get_or(params, "fd_x0", p.fd_x0);
        p.fd_h = get_or(params, "fd_h", p.fd_h);
        p.fd_reference = get_count(params, "fd_reference", p.fd_reference);
        if (params.contains("lions")) {
            const json& l = section(params, "lions");
            if (l.contains("sim")) p.lions_sim = parse_sim(l.at("sim"), cfg.seed);
            if (auto m = model(l, p.lions_sim)) p.lions_model = require_linear(*m, "flows-check lions");
            p.lions_M = get_count(l, "M", p.lions_M);
            p.lions_y = get_or(l, "y", p.lions_y);
            p.lions_check_t = get_or(l, "check_t", p.lions_check_t);
        }
        p.lambda = get_or(params, "lambda", p.lambda);
        p.seed = cfg.seed;
        return run_flows_check(p);
    }
    if (cfg.experiment == "chaos-mc") {
        ChaosParams p;
        p.workers = cfg.workers;
        if (auto m = model(j, sim)) p.model = *m;
        if (j.contains("sim")) p.sim = sim;
        p.sim.seed = cfg.seed;
        p.n_grid = get_list(grids, "n_grid", p.n_grid);
        p.weak_replicas = get_count(j, "replicas", p.weak_replicas);
        p.remainder_replicas = get_count(params, "remainder_replicas", p.remainder_replicas);
        p.tolerance = get_or(params, "tolerance", p.tolerance);
        p.weak = get_or(params, "weak_chaos", p.weak);
        p.remainder = get_or(params, "remainder", p.remainder);
        p.coupling = get_or(params, "coupling", p.coupling);
        if (params.contains("coupling_setup")) {
            const json& c = section(params, "coupling_setup");
            if (c.contains("sim")) p.coupling_sim = parse_sim(c.at("sim"), cfg.seed);
            if (auto m = model(c, p.coupling_sim)) p.coupling_model = require_linear(*m, "chaos-mc coupling");
            p.coupling_n = get_list(c, "n_grid", p.coupling_n);
            p.coupling_replicas = get_count(c, "replicas", p.coupling_replicas);
        }
        p.coupling_sim.seed = cfg.seed;
        return run_chaos_mc(p);
    }
    QuantizationParams p;
    p.d = sim.d;
    if (!j.contains("sim")) p.d = 3;
    p.n_grid = get_list(grids, "n_grid", p.n_grid);
    p.replicas = get_count(j, "replicas", p.replicas);
    p.regularization = get_or(params, "regularization", p.regularization);
    p.seed = cfg.seed;
    p.workers = cfg.workers;
    return run_quantization_demo(p);
}

}  // namespace chaoslab
