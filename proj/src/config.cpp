#include "txadapt/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "txadapt/errors.hpp"

namespace txadapt {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& value) {
    if (value == "inf") return std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': not a number: '" + value + "'");
    }
    if (used != value.size())
        throw ConfigError("key '" + key + "': trailing characters in '" + value + "'");
    return v;
}

int to_int(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(value, &used);
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': not an integer: '" + value + "'");
    }
    if (used != value.size())
        throw ConfigError("key '" + key + "': trailing characters in '" + value + "'");
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
        throw ConfigError("key '" + key + "': out of range: '" + value + "'");
    return static_cast<int>(v);
}

std::int64_t to_int64(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(value, &used);
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': not an integer: '" + value + "'");
    }
    if (used != value.size())
        throw ConfigError("key '" + key + "': trailing characters in '" + value + "'");
    return v;
}

std::uint64_t to_uint64(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(value, &used);
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': not an unsigned integer: '" + value + "'");
    }
    if (used != value.size())
        throw ConfigError("key '" + key + "': trailing characters in '" + value + "'");
    return v;
}

Scheme parse_scheme(const std::string& name) {
    if (name == "power_scaling") return Scheme::power_scaling;
    if (name == "benchmark1") return Scheme::benchmark1;
    if (name == "benchmark2") return Scheme::benchmark2;
    if (name == "meta_adapt") return Scheme::meta_adapt;
    throw ConfigError("unknown scheme '" + name + "'");
}

std::vector<Scheme> parse_scheme_list(const std::string& value) {
    std::vector<Scheme> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw ConfigError("empty scheme name in list '" + value + "'");
        out.push_back(parse_scheme(item));
    }
    if (out.empty()) throw ConfigError("scheme list is empty");
    return out;
}

void apply_field(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    auto& f = cfg.field;
    if (key == "x_min_m") f.x_min_m = to_double(key, value);
    else if (key == "x_max_m") f.x_max_m = to_double(key, value);
    else if (key == "y_min_m") f.y_min_m = to_double(key, value);
    else if (key == "y_max_m") f.y_max_m = to_double(key, value);
    else if (key == "grid_spacing_m") f.grid_spacing_m = to_double(key, value);
    else if (key == "bs_x_m") f.bs_x_m = to_double(key, value);
    else if (key == "bs_y_m") f.bs_y_m = to_double(key, value);
    else if (key == "bs_height_m") f.bs_height_m = to_double(key, value);
    else if (key == "device_height_m") f.device_height_m = to_double(key, value);
    else if (key == "ref_gain_db") f.ref_gain_db = to_double(key, value);
    else if (key == "path_loss_exponent") f.path_loss_exponent = to_double(key, value);
    else if (key == "shadow_sigma_db") f.shadow_sigma_db = to_double(key, value);
    else if (key == "shadow_corr_dist_m") f.shadow_corr_dist_m = to_double(key, value);
    else if (key == "fading") f.fading = parse_fading(value);
    else if (key == "rician_k") f.rician_k = to_double(key, value);
    else if (key == "BN0_dbm") f.noise_power_w = std::pow(10.0, (to_double(key, value) - 30.0) / 10.0);
    else throw ConfigError("unknown key '" + key + "' in [field]");
}

void apply_traffic(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "lambda") cfg.lambda = to_double(key, value);
    else if (key == "n") cfg.n = to_int(key, value);
    else if (key == "D_max") cfg.D_max = to_int(key, value);
    else if (key == "xi") cfg.xi = to_double(key, value);
    else if (key == "nu") cfg.nu = to_int(key, value);
    else if (key == "Delta") cfg.Delta = to_double(key, value);
    else if (key == "budget_frac") cfg.budget_frac = to_double(key, value);
    else if (key == "T") cfg.T = to_int(key, value);
    else throw ConfigError("unknown key '" + key + "' in [traffic]");
}

void apply_learning(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    auto& t = cfg.train;
    if (key == "gamma") t.discount = to_double(key, value);
    else if (key == "lambda_gae") t.gae_lambda = to_double(key, value);
    else if (key == "epsilon_p") t.clip_ratio = to_double(key, value);
    else if (key == "lr") t.learning_rate = to_double(key, value);
    else if (key == "T_g") t.update_period = to_int(key, value);
    else if (key == "minibatch") t.minibatch = to_int(key, value);
    else if (key == "epochs") t.epochs = to_int(key, value);
    else if (key == "entropy_coef") t.entropy_coef = to_double(key, value);
    else if (key == "Z") cfg.Z = to_int(key, value);
    else if (key == "power_levels") cfg.power_levels = to_int(key, value);
    else throw ConfigError("unknown key '" + key + "' in [learning]");
}

void apply_map(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "M") cfg.M = to_int(key, value);
    else if (key == "U") cfg.U = to_int(key, value);
    else if (key == "G") cfg.G = to_int(key, value);
    else throw ConfigError("unknown key '" + key + "' in [map]");
}

void apply_deploy(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "K") cfg.K = to_int(key, value);
    else if (key == "restarts") cfg.restarts = to_int(key, value);
    else if (key == "eval_slots") cfg.eval_slots = to_int64(key, value);
    else if (key == "eval_pool") cfg.eval_pool = to_int(key, value);
    else if (key == "schemes") cfg.schemes = parse_scheme_list(value);
    else throw ConfigError("unknown key '" + key + "' in [deploy]");
}

void apply_meta(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "N") cfg.N = to_int(key, value);
    else if (key == "Z_meta") cfg.Z_meta = to_int(key, value);
    else if (key == "beta") cfg.beta = to_double(key, value);
    else if (key == "inner_T_g") cfg.inner_T_g = to_int(key, value);
    else if (key == "inner_epochs") cfg.inner_epochs = to_int(key, value);
    else if (key == "inner_minibatch") cfg.inner_minibatch = to_int(key, value);
    else if (key == "inner_lr") cfg.inner_lr = to_double(key, value);
    else if (key == "adapt_steps") cfg.adapt_steps = to_int(key, value);
    else if (key == "T_ap") cfg.T_ap = to_int(key, value);
    else throw ConfigError("unknown key '" + key + "' in [meta]");
}

void apply_run(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "seed") cfg.seed = to_uint64(key, value);
    else if (key == "threads") cfg.threads = to_int(key, value);
    else if (key == "out") cfg.out = value;
    else throw ConfigError("unknown key '" + key + "' in [run]");
}

}  // namespace

EnvConfig ExperimentConfig::env_template() const {
    EnvConfig e;
    e.lambda_bits = lambda;
    e.channel_uses = n;
    e.d_max = D_max;
    e.dvp_target = xi;
    e.budget_frac = budget_frac;
    e.nu = nu;
    e.delta = Delta;
    e.episode_slots = T;
    e.p_max_w = 0.0;
    return e;
}

TrainConfig ExperimentConfig::inner_train() const {
    TrainConfig t = train;
    if (inner_T_g > 0) t.update_period = inner_T_g;
    if (inner_epochs > 0) t.epochs = inner_epochs;
    if (inner_minibatch > 0) t.minibatch = inner_minibatch;
    if (inner_lr > 0.0) t.learning_rate = inner_lr;
    return t;
}

std::vector<double> ExperimentConfig::level_grid() const { return epsilon_levels(G, 0.01); }

void ExperimentConfig::validate() const {
    field.validate();
    if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
    if (n < 1) throw ConfigError("n must be at least 1");
    if (D_max < 1) throw ConfigError("D_max must be at least 1");
    if (!(xi > 0.0) || !(xi < 1.0)) throw ConfigError("xi must lie in (0, 1)");
    if (nu < 1) throw ConfigError("nu must be at least 1");
    if (!(budget_frac > 0.0) || budget_frac > 1.0)
        throw ConfigError("budget_frac must lie in (0, 1]");
    if (T < 0) throw ConfigError("T must be non-negative");
    if (!(train.discount > 0.0) || train.discount > 1.0)
        throw ConfigError("gamma must lie in (0, 1]");
    if (train.gae_lambda < 0.0 || train.gae_lambda > 1.0)
        throw ConfigError("lambda_gae must lie in [0, 1]");
    if (!(train.clip_ratio > 0.0)) throw ConfigError("epsilon_p must be positive");
    if (!(train.learning_rate > 0.0)) throw ConfigError("lr must be positive");
    if (train.update_period < 1) throw ConfigError("T_g must be at least 1");
    if (train.minibatch < 1) throw ConfigError("minibatch must be at least 1");
    if (train.epochs < 1) throw ConfigError("epochs must be at least 1");
    if (train.entropy_coef < 0.0) throw ConfigError("entropy_coef must be non-negative");
    if (Z < 1) throw ConfigError("Z must be at least 1");
    if (power_levels < 2) throw ConfigError("power_levels must be at least 2");
    if (M < 2) throw ConfigError("M must be at least 2");
    if (U < 100)
        throw ConfigError("U must be at least 100, or the 1% outage level has no order statistic");
    if (G < 1 || G > 99) throw ConfigError("G must lie in [1, 99]");
    if (K < 1) throw ConfigError("K must be at least 1");
    if (restarts < 1) throw ConfigError("restarts must be at least 1");
    if (eval_slots < 1) throw ConfigError("eval_slots must be at least 1");
    if (eval_pool < 1) throw ConfigError("eval_pool must be at least 1");
    if (schemes.empty()) throw ConfigError("at least one scheme is required");
    if (N < 1) throw ConfigError("N must be at least 1");
    if (Z_meta < 1) throw ConfigError("Z_meta must be at least 1");
    if (!(beta > 0.0)) throw ConfigError("beta must be positive");
    if (inner_T_g < 0 || inner_epochs < 0 || inner_minibatch < 0 || inner_lr < 0.0)
        throw ConfigError("meta inner overrides must be non-negative");
    if (adapt_steps < 0) throw ConfigError("adapt_steps must be non-negative");
    if (T_ap < 1) throw ConfigError("T_ap must be at least 1");
    if (threads < 1) throw ConfigError("threads must be at least 1");
    if (out.empty()) throw ConfigError("out must not be empty");
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::stringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(line_no) + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "field" && section != "traffic" && section != "learning" &&
                section != "map" && section != "deploy" && section != "meta" && section != "run")
                throw ConfigError("unknown section [" + section + "]");
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        if (value.empty()) throw ConfigError("key '" + key + "': empty value");
        if (section.empty())
            throw ConfigError("key '" + key + "' appears before any section header");
        if (section == "field") apply_field(cfg, key, value);
        else if (section == "traffic") apply_traffic(cfg, key, value);
        else if (section == "learning") apply_learning(cfg, key, value);
        else if (section == "map") apply_map(cfg, key, value);
        else if (section == "deploy") apply_deploy(cfg, key, value);
        else if (section == "meta") apply_meta(cfg, key, value);
        else apply_run(cfg, key, value);
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

}  // namespace txadapt
