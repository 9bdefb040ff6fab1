#include "normbound/config.hpp"

#include "normbound/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace normbound {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// Typed accessors over the raw map; every getter marks its key as consumed so
// leftovers can be rejected by name.
struct Reader {
    const KeyValues& kv;
    std::set<std::string> consumed;

    std::optional<std::string> raw(const std::string& key) {
        auto it = kv.values.find(key);
        if (it == kv.values.end()) return std::nullopt;
        consumed.insert(key);
        return it->second;
    }

    std::string str(const std::string& key, const std::string& fallback) {
        return raw(key).value_or(fallback);
    }

    double num(const std::string& key, double fallback) {
        auto v = raw(key);
        if (!v) return fallback;
        try {
            std::size_t pos = 0;
            const double out = std::stod(*v, &pos);
            if (pos != v->size()) throw std::invalid_argument("trailing junk");
            return out;
        } catch (const std::exception&) {
            throw config_error("config key '" + key + "': invalid number '" + *v + "'");
        }
    }

    std::uint64_t uint(const std::string& key, std::uint64_t fallback) {
        const double v = num(key, static_cast<double>(fallback));
        if (v < 0 || v != std::floor(v)) {
            throw config_error("config key '" + key + "': expected a non-negative integer");
        }
        return static_cast<std::uint64_t>(v);
    }

    bool boolean(const std::string& key, bool fallback) {
        auto v = raw(key);
        if (!v) return fallback;
        if (*v == "true" || *v == "1") return true;
        if (*v == "false" || *v == "0") return false;
        throw config_error("config key '" + key + "': expected true/false");
    }

    std::vector<std::size_t> uint_list(const std::string& key,
                                       const std::vector<std::size_t>& fallback) {
        auto v = raw(key);
        if (!v) return fallback;
        std::vector<std::size_t> out;
        std::stringstream ss(*v);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            try {
                out.push_back(static_cast<std::size_t>(std::stoull(item)));
            } catch (const std::exception&) {
                throw config_error("config key '" + key + "': invalid list entry '" + item + "'");
            }
        }
        if (out.empty()) throw config_error("config key '" + key + "': empty list");
        return out;
    }
};

Norm parse_norm(const std::string& key, const std::string& v) {
    if (v == "l1") return Norm::l1;
    if (v == "l2") return Norm::l2;
    if (v == "lp") return Norm::lp;
    if (v == "linf") return Norm::linf;
    throw config_error("config key '" + key + "': unknown norm '" + v + "'");
}

} // namespace

KeyValues parse_key_values(const std::string& text) {
    KeyValues kv;
    std::stringstream ss(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw config_error("config line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw config_error("config line " + std::to_string(lineno) + ": empty key");
        }
        if (kv.values.count(key)) {
            throw config_error("config key '" + key + "': duplicated");
        }
        kv.values[key] = value;
    }
    return kv;
}

KeyValues load_key_values(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error(path.string() + ": cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_key_values(ss.str());
}

ExperimentConfig parse_experiment_config(const KeyValues& kv) {
    Reader r{kv, {}};
    ExperimentConfig c;

    c.seed = r.uint("seed", 1);
    c.output_dir = r.str("output_dir", "runs/out");

    // model
    c.model.input_dim = r.uint("model.input_dim", 0);
    c.model.output_dim = r.uint("model.output_dim", 0);
    c.model.block_count = r.uint("model.blocks", 0);
    c.model.hidden_width = r.uint("model.hidden_width", 0);
    const std::string act = r.str("model.activation", "relu");
    if (act == "relu") c.model.activation = Activation::relu;
    else if (act == "tanh") c.model.activation = Activation::tanh;
    else if (act == "sigmoid") c.model.activation = Activation::sigmoid;
    else throw config_error("config key 'model.activation': unknown activation '" + act + "'");
    c.model.skip_connections = r.boolean("model.skip_connections", false);
    c.model.dropout_rate = r.num("model.dropout_rate", 0.0);
    const std::string head = r.str("model.head", "linear");
    if (head == "linear") c.model.head = ModelConfig::Head::linear;
    else if (head == "none") c.model.head = ModelConfig::Head::none;
    else throw config_error("config key 'model.head': expected linear or none");

    // init
    const std::string scheme = r.str("init.scheme", "he");
    if (scheme == "he") c.init.kind = InitScheme::Kind::he;
    else if (scheme == "xavier") c.init.kind = InitScheme::Kind::xavier;
    else throw config_error("config key 'init.scheme': expected he or xavier");
    c.init.seed = r.uint("init.seed", c.seed * 0x9e3779b9ULL + 1);

    // loss
    const std::string kind = r.str("loss.kind", "mse");
    const double beta = r.num("loss.beta", 1.0);
    const auto k = static_cast<int>(r.uint("loss.k", 2));
    c.loss = parse_loss_kind(kind, beta, k);
    if (r.raw("loss.profile.a") || kv.has("loss.profile.r") || kv.has("loss.profile.c")) {
        EmpiricalTriple t;
        t.a = r.num("loss.profile.a", 1.0);
        t.r = r.num("loss.profile.r", 2.0);
        t.c = r.num("loss.profile.c", 0.0);
        if (!(t.a > 0)) throw config_error("config key 'loss.profile.a': must be positive");
        if (!(t.r > 1)) throw config_error("config key 'loss.profile.r': must be > 1");
        if (!(t.c >= 0)) throw config_error("config key 'loss.profile.c': must be >= 0");
        c.loss_profile = t;
    }

    // optimizer
    c.optimizer.lr = r.num("optimizer.lr", 0.01);
    c.optimizer.momentum = r.num("optimizer.momentum", 0.9);
    c.optimizer.batch_size = r.uint("optimizer.batch_size", 64);
    c.optimizer.steps = r.uint("optimizer.steps", 0);
    c.optimizer.epochs = r.uint("optimizer.epochs", 0);
    c.optimizer.adaptive_step = r.boolean("optimizer.adaptive_step", false);
    c.optimizer.m_stride = r.uint("optimizer.m_stride", 10);
    const std::string omega_norm_name = r.str("optimizer.omega.norm", "l2");
    const double omega_p = r.num("optimizer.omega.p", 2.0);
    const double omega_order = r.num("optimizer.omega.order", 2.0);
    const double omega_scale = r.num("optimizer.omega.scale", 0.5);
    const double omega_relax = r.num("optimizer.omega.relaxation", 0.0);
    {
        const Norm n = parse_norm("optimizer.omega.norm", omega_norm_name);
        try {
            c.optimizer.omega.power = n == Norm::lp ? make_lp_power(omega_p, omega_order, omega_scale)
                                                    : make_power(n, omega_order, omega_scale);
        } catch (const domain_error& e) {
            throw config_error(std::string("config key 'optimizer.omega.*': ") + e.what());
        }
        if (!(omega_relax >= 0)) {
            throw config_error("config key 'optimizer.omega.relaxation': must be >= 0");
        }
        c.optimizer.omega.relaxation = omega_relax;
    }

    // diagnostics
    c.diagnostics.weights.alpha = r.num("diagnostics.alpha", 1.0);
    c.diagnostics.weights.beta = r.num("diagnostics.beta", 1.0);
    c.diagnostics.weights.gamma = r.num("diagnostics.gamma", 1.0);
    c.diagnostics.eig_floor_scale = r.num("diagnostics.eig_floor_scale", 1e-12);
    c.diagnostics.stride = r.uint("diagnostics.stride", 10);
    c.diagnostics.batch_size = r.uint("diagnostics.batch_size", 16);
    c.diagnostics.pearson_window = r.uint("diagnostics.pearson_window", 50);
    c.diagnostics.checkpoint_stride = r.uint("diagnostics.checkpoint_stride", 0);
    if (c.diagnostics.stride == 0) {
        throw config_error("config key 'diagnostics.stride': must be >= 1");
    }
    if (c.diagnostics.batch_size == 0) {
        throw config_error("config key 'diagnostics.batch_size': must be >= 1");
    }
    if (c.diagnostics.pearson_window < 2) {
        throw config_error("config key 'diagnostics.pearson_window': must be >= 2");
    }

    // data
    const std::string source = r.str("data.source", "synthetic");
    if (source == "synthetic") c.data.source = DataConfig::Source::synthetic;
    else if (source == "idx") c.data.source = DataConfig::Source::idx;
    else throw config_error("config key 'data.source': expected synthetic or idx");
    c.data.images_path = r.str("data.images", "");
    c.data.labels_path = r.str("data.labels", "");
    c.data.classes = r.uint("data.classes", 10);
    c.data.per_class = r.uint("data.per_class", 100);
    c.data.dim = r.uint("data.dim", 32);
    c.data.separation = r.num("data.separation", 4.0);
    c.data.subset_n = r.uint("data.subset", 0);
    c.data.seed = r.uint("data.seed", c.seed * 0x2545f491ULL + 7);
    if (c.data.source == DataConfig::Source::idx &&
        (c.data.images_path.empty() || c.data.labels_path.empty())) {
        throw config_error("config key 'data.images'/'data.labels': required for idx source");
    }

    // sweep / gic
    c.sweep.k_list = r.uint_list("sweep.k_list", c.sweep.k_list);
    c.sweep.seeds = r.uint("sweep.seeds", c.sweep.seeds);
    c.gic.mc_trials = r.uint("gic.mc_trials", 0);
    c.gic.mc_theta = r.uint("gic.mc_theta", 10000);
    c.gic.mc_mf = r.uint("gic.mc_mf", 50);
    c.gic.mc_epsilon = r.num("gic.mc_epsilon", 1.0);

    // basic cross-field checks
    if (!(c.optimizer.lr > 0)) throw config_error("config key 'optimizer.lr': must be positive");
    if (!(c.optimizer.momentum >= 0 && c.optimizer.momentum < 1)) {
        throw config_error("config key 'optimizer.momentum': must lie in [0, 1)");
    }
    if (c.optimizer.batch_size == 0) {
        throw config_error("config key 'optimizer.batch_size': must be >= 1");
    }
    if (!(c.model.dropout_rate >= 0 && c.model.dropout_rate < 1)) {
        throw config_error("config key 'model.dropout_rate': must lie in [0, 1)");
    }

    // anything not consumed is unknown
    for (const auto& [key, value] : kv.values) {
        if (!r.consumed.count(key)) {
            throw config_error("config key '" + key + "': unknown key");
        }
    }
    return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    return parse_experiment_config(load_key_values(path));
}

} // namespace normbound
