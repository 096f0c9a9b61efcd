#include "ebsde/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ebsde/errors.hpp"

namespace ebsde {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
        return s.substr(1, s.size() - 2);
    }
    return s;
}

double parse_double(const std::string& key, const std::string& raw) {
    try {
        std::size_t used = 0;
        const double v = std::stod(raw, &used);
        if (used != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "' is not a number: '" + raw + "'");
    }
}

}  // namespace

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str());
}

ExperimentConfig ExperimentConfig::from_string(const std::string& text) {
    ExperimentConfig cfg;
    cfg.text_ = text;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) +
                              ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = unquote(trim(line.substr(eq + 1)));
        if (key.empty() || value.empty()) {
            throw ConfigError("line " + std::to_string(line_no) +
                              ": empty key or value");
        }
        cfg.kv_[key] = value;
    }
    return cfg;
}

bool ExperimentConfig::has(const std::string& key) const {
    return kv_.count(key) > 0;
}

std::string ExperimentConfig::get_string(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) throw ConfigError("missing config key '" + key + "'");
    return it->second;
}

std::string ExperimentConfig::get_string(const std::string& key,
                                         const std::string& fallback) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
}

double ExperimentConfig::get_double(const std::string& key) const {
    return parse_double(key, get_string(key));
}

double ExperimentConfig::get_double(const std::string& key,
                                    double fallback) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : parse_double(key, it->second);
}

long ExperimentConfig::get_long(const std::string& key) const {
    const double v = get_double(key);
    const long l = static_cast<long>(v);
    if (static_cast<double>(l) != v) {
        throw ConfigError("key '" + key + "' must be an integer");
    }
    return l;
}

long ExperimentConfig::get_long(const std::string& key, long fallback) const {
    return has(key) ? get_long(key) : fallback;
}

std::uint64_t ExperimentConfig::seed() const {
    if (!has("seed")) {
        throw ConfigError("config must set 'seed' explicitly");
    }
    const long v = get_long("seed");
    if (v < 0) throw ConfigError("'seed' must be non-negative");
    return static_cast<std::uint64_t>(v);
}

Params ExperimentConfig::params_with_prefix(const std::string& prefix) const {
    Params out;
    const std::string want = prefix + ".";
    for (const auto& [key, value] : kv_) {
        if (key.rfind(want, 0) == 0) {
            out[key.substr(want.size())] = parse_double(key, value);
        }
    }
    return out;
}

std::string ExperimentConfig::hash() const {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text_) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
}

SdeModel model_from_config(const ExperimentConfig& cfg) {
    return catalog_model(cfg.get_string("model"),
                         cfg.params_with_prefix("model"));
}

Driver driver_from_config(const ExperimentConfig& cfg, const SdeModel& model) {
    const std::string name = cfg.get_string("driver");
    if (name == "manufactured") {
        const double lambda_star = cfg.get_double("driver.lambda_star", 0.5);
        const double kappa = cfg.get_double("driver.kappa", 0.5);
        return manufactured_problem(model, one_minus_cos_field(), lambda_star,
                                    kappa)
            .driver;
    }
    return catalog_driver(name, cfg.params_with_prefix("driver"), &model);
}

TerminalCondition terminal_from_config(const ExperimentConfig& cfg) {
    return catalog_terminal(cfg.get_string("terminal", "zero"),
                            cfg.params_with_prefix("terminal"));
}

}  // namespace ebsde
