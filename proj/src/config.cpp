#include "bgcn/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace bgcn {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& section, const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw ConfigError("config: [" + section + "] " + key + " = '" + v + "' is not a number");
    }
}

std::size_t parse_count(const std::string& section, const std::string& key, const std::string& v) {
    const double x = parse_double(section, key, v);
    if (x < 0 || x != std::floor(x))
        throw ConfigError("config: [" + section + "] " + key + " must be a nonnegative integer");
    return static_cast<std::size_t>(x);
}

bool parse_bool(const std::string& section, const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("config: [" + section + "] " + key + " must be true or false");
}

std::vector<std::size_t> parse_count_list(const std::string& section, const std::string& key,
                                          const std::string& v) {
    std::vector<std::size_t> out;
    std::string item;
    std::istringstream is(v);
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_count(section, key, item));
    }
    if (out.empty()) throw ConfigError("config: [" + section + "] " + key + " list is empty");
    return out;
}

} // namespace

LrSchedule ExperimentConfig::schedule() const {
    if (lr_schedule == "constant") return LrSchedule::constant(lr);
    if (lr_schedule == "inverse_t") return LrSchedule::inverse_t(lr);
    throw ConfigError("config: lr_schedule must be constant or inverse_t");
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    std::size_t lineno = 0;

    auto fail_key = [](const std::string& sec, const std::string& key) {
        throw ConfigError("config: unknown key '" + key + "' in section [" + sec + "]");
    };

    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config: malformed section header at line " +
                                  std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            if (section != "graph" && section != "model" && section != "sampler" &&
                section != "run")
                throw ConfigError("config: unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: expected key = value at line " + std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty())
            throw ConfigError("config: key '" + key + "' appears before any section");

        if (section == "graph") {
            if (key == "edges") cfg.edges_path = value;
            else if (key == "features") cfg.features_path = value;
            else if (key == "labels") cfg.labels_path = value;
            else if (key == "train_split") cfg.train_path = value;
            else if (key == "val_split") cfg.val_path = value;
            else if (key == "test_split") cfg.test_path = value;
            else if (key == "weighting") {
                if (value == "symmetric") cfg.weighting = Weighting::symmetric_norm;
                else if (value == "uniform") cfg.weighting = Weighting::uniform;
                else throw ConfigError("config: weighting must be symmetric or uniform");
            } else if (key == "add_self_loops") cfg.add_self_loops = parse_bool(section, key, value);
            else if (key == "nodes") cfg.synth_nodes = parse_count(section, key, value);
            else if (key == "communities") cfg.synth_communities = parse_count(section, key, value);
            else if (key == "p_in") cfg.synth_p_in = parse_double(section, key, value);
            else if (key == "p_out") cfg.synth_p_out = parse_double(section, key, value);
            else if (key == "feature_dim") cfg.synth_feature_dim = parse_count(section, key, value);
            else if (key == "center_scale") cfg.synth_center_scale = parse_double(section, key, value);
            else if (key == "feature_noise") cfg.synth_feature_noise = parse_double(section, key, value);
            else if (key == "train_fraction") cfg.synth_train_fraction = parse_double(section, key, value);
            else if (key == "val_fraction") cfg.synth_val_fraction = parse_double(section, key, value);
            else fail_key(section, key);
        } else if (section == "model") {
            if (key == "model") cfg.model = value;
            else if (key == "depth") cfg.depth = parse_count(section, key, value);
            else if (key == "hidden_dim") cfg.hidden_dim = parse_count(section, key, value);
            else if (key == "activation") {
                if (value == "relu") cfg.activation = Activation::relu;
                else if (value == "tanh") cfg.activation = Activation::tanh;
                else throw ConfigError("config: activation must be relu or tanh");
            } else if (key == "lr") cfg.lr = parse_double(section, key, value);
            else if (key == "lr_schedule") cfg.lr_schedule = value;
            else fail_key(section, key);
        } else if (section == "sampler") {
            if (key == "sampler") {
                if (value == "uniform") cfg.sampler.kind = SamplerKind::uniform;
                else if (value == "banditsampler") cfg.sampler.kind = SamplerKind::banditsampler;
                else if (value == "thanos") cfg.sampler.kind = SamplerKind::thanos;
                else if (value == "thanos_m") cfg.sampler.kind = SamplerKind::thanos_m;
                else throw ConfigError("config: unknown sampler '" + value + "'");
            } else if (key == "k") cfg.sampler.k = parse_count(section, key, value);
            else if (key == "eta") cfg.sampler.eta = parse_double(section, key, value);
            else if (key == "gamma") cfg.sampler.gamma = parse_double(section, key, value);
            else if (key == "delta_t") cfg.sampler.delta_t = parse_count(section, key, value);
            else if (key == "estimator") {
                if (value == "biased") cfg.sampler.estimator = EstimatorKind::biased;
                else if (value == "unbiased") cfg.sampler.estimator = EstimatorKind::unbiased;
                else throw ConfigError("config: estimator must be biased or unbiased");
                cfg.estimator_given = true;
            } else if (key == "bs_eta") cfg.bs_eta = parse_double(section, key, value);
            else fail_key(section, key);
        } else { // run
            if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_count(section, key, value));
            else if (key == "trials") cfg.trials = parse_count(section, key, value);
            else if (key == "epochs") cfg.epochs = parse_count(section, key, value);
            else if (key == "batch_size") cfg.batch_size = parse_count(section, key, value);
            else if (key == "steps") cfg.steps = parse_count(section, key, value);
            else if (key == "corrupt_fraction") cfg.corrupt_fraction = parse_double(section, key, value);
            else if (key == "corrupt_scale") cfg.corrupt_scale = parse_double(section, key, value);
            else if (key == "probe_roots") cfg.probe_roots = parse_count(section, key, value);
            else if (key == "env") cfg.env = value;
            else if (key == "arms") cfg.arms = parse_count(section, key, value);
            else if (key == "plays") cfg.plays = parse_count(section, key, value);
            else if (key == "horizons") cfg.horizons = parse_count_list(section, key, value);
            else if (key == "env_seeds") cfg.env_seeds = parse_count(section, key, value);
            else if (key == "env_cap") cfg.env_cap = parse_double(section, key, value);
            else if (key == "env_c_v_bar") cfg.env_c_v_bar = parse_double(section, key, value);
            else if (key == "env_budget") cfg.env_budget = parse_double(section, key, value);
            else if (key == "env_changes") cfg.env_changes = parse_count(section, key, value);
            else if (key == "env_gap") cfg.env_gap = parse_double(section, key, value);
            else if (key == "env_noise") cfg.env_noise = parse_double(section, key, value);
            else if (key == "policy") cfg.policy = value;
            else fail_key(section, key);
        }
    }

    if (!cfg.estimator_given)
        cfg.sampler.estimator = SamplerConfig::default_estimator(cfg.sampler.kind);
    if (cfg.sampler.k < 1) throw ConfigError("config: k must be >= 1");
    if (cfg.sampler.gamma <= 0.0 || cfg.sampler.gamma > 1.0)
        throw ConfigError("config: gamma must lie in (0, 1]");
    if (cfg.sampler.eta < 0.0) throw ConfigError("config: eta must be >= 0");
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

const char* sampler_name(SamplerKind k) {
    switch (k) {
    case SamplerKind::uniform: return "uniform";
    case SamplerKind::banditsampler: return "banditsampler";
    case SamplerKind::thanos: return "thanos";
    case SamplerKind::thanos_m: return "thanos_m";
    }
    return "?";
}

} // namespace

std::string render_manifest(const ExperimentConfig& cfg, const std::string& experiment,
                            std::uint64_t seed) {
    std::ostringstream out;
    out << "version            : " << kVersion << "\n";
    out << "experiment         : " << experiment << "\n";
    out << "seed               : " << seed << "\n";
    out << "graph.edges        : " << cfg.edges_path << "\n";
    out << "graph.features     : " << cfg.features_path << "\n";
    out << "graph.labels       : " << cfg.labels_path << "\n";
    out << "graph.train_split  : " << cfg.train_path << "\n";
    out << "graph.val_split    : " << cfg.val_path << "\n";
    out << "graph.test_split   : " << cfg.test_path << "\n";
    out << "graph.weighting    : "
        << (cfg.weighting == Weighting::symmetric_norm ? "symmetric" : "uniform") << "\n";
    out << "graph.self_loops   : " << (cfg.add_self_loops ? "true" : "false") << "\n";
    out << "model.kind         : " << cfg.model << "\n";
    out << "model.depth        : " << cfg.depth << "\n";
    out << "model.hidden_dim   : " << cfg.hidden_dim << "\n";
    out << "model.activation   : " << (cfg.activation == Activation::relu ? "relu" : "tanh") << "\n";
    out << "model.lr           : " << fmt(cfg.lr) << "\n";
    out << "model.lr_schedule  : " << cfg.lr_schedule << "\n";
    out << "sampler.kind       : " << sampler_name(cfg.sampler.kind) << "\n";
    out << "sampler.k          : " << cfg.sampler.k << "\n";
    out << "sampler.eta        : " << fmt(cfg.sampler.eta) << "\n";
    out << "sampler.gamma      : " << fmt(cfg.sampler.gamma) << "\n";
    out << "sampler.delta_t    : " << cfg.sampler.delta_t << "\n";
    out << "sampler.estimator  : "
        << (cfg.sampler.estimator == EstimatorKind::biased ? "biased" : "unbiased") << "\n";
    out << "sampler.bs_eta     : " << fmt(cfg.bs_eta) << "\n";
    out << "run.trials         : " << cfg.trials << "\n";
    out << "run.epochs         : " << cfg.epochs << "\n";
    out << "run.batch_size     : " << cfg.batch_size << "\n";
    out << "run.steps          : " << cfg.steps << "\n";
    out << "run.corrupt        : " << fmt(cfg.corrupt_fraction) << " x" << fmt(cfg.corrupt_scale)
        << "\n";
    out << "run.env            : " << cfg.env << "\n";
    out << "run.policy         : " << cfg.policy << "\n";
    return out.str();
}

} // namespace bgcn
