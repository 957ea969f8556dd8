#include "mqmc/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mqmc {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& message) {
    throw ConfigError("config field '" + field + "': " + message);
}

const json* find(const json& obj, const std::string& key) {
    if (!obj.is_object()) return nullptr;
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double number(const json& obj, const std::string& key, const std::string& path, std::optional<double> fallback = {}) {
    const json* v = find(obj, key);
    if (v == nullptr) {
        if (fallback) return *fallback;
        fail(path + "." + key, "missing");
    }
    if (!v->is_number()) fail(path + "." + key, "expected a number");
    return v->get<double>();
}

std::uint64_t integer(const json& obj, const std::string& key, const std::string& path,
                      std::optional<std::uint64_t> fallback = {}) {
    const json* v = find(obj, key);
    if (v == nullptr) {
        if (fallback) return *fallback;
        fail(path + "." + key, "missing");
    }
    if (!v->is_number_integer() || v->get<std::int64_t>() < 0) fail(path + "." + key, "expected a nonnegative integer");
    return v->get<std::uint64_t>();
}

std::string text(const json& obj, const std::string& key, const std::string& path,
                 std::optional<std::string> fallback = {}) {
    const json* v = find(obj, key);
    if (v == nullptr) {
        if (fallback) return *fallback;
        fail(path + "." + key, "missing");
    }
    if (!v->is_string()) fail(path + "." + key, "expected a string");
    return v->get<std::string>();
}

std::vector<double> number_list(const json& v, const std::string& path) {
    if (!v.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) fail(path, "expected an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

WeightFunction parse_weight_function(const json& v, const std::string& path) {
    if (!v.is_object()) fail(path, "expected an object");
    const auto kind = text(v, "kind", path);
    const double scale = number(v, "scale", path, 1.0);
    try {
        if (kind == "exp-abs") return WeightFunction::exp_abs(number(v, "alpha", path), scale);
        if (kind == "constant") return WeightFunction::constant(scale);
        if (kind == "gaussian") return WeightFunction::gaussian(number(v, "beta", path), scale);
    } catch (const ConfigError&) {
        throw;
    } catch (const ArgumentError& e) {
        fail(path, e.what());
    }
    fail(path + ".kind", "unknown weight function '" + kind + "' (expected exp-abs, constant or gaussian)");
}

std::vector<double> parse_gamma(const json& v, std::size_t s, const std::string& path) {
    if (v.is_array()) {
        auto g = number_list(v, path);
        if (g.size() != s) fail(path, "expected " + std::to_string(s) + " values");
        return g;
    }
    if (v.is_object()) {
        const auto rule = text(v, "rule", path);
        if (rule != "inverse-power") fail(path + ".rule", "unknown rule '" + rule + "' (expected inverse-power)");
        const double p = number(v, "exponent", path), c = number(v, "scale", path, 1.0);
        std::vector<double> g(s);
        for (std::size_t j = 0; j < s; ++j) g[j] = c * std::pow(static_cast<double>(j + 1), -p);
        return g;
    }
    fail(path, "expected an array or a rule object");
}

std::vector<std::uint64_t> powers_of_two(unsigned lo, unsigned hi) {
    std::vector<std::uint64_t> out;
    for (unsigned e = lo; e <= hi; ++e) out.push_back(std::uint64_t{1} << e);
    return out;
}

} // namespace

json parse_config_text(const std::string& content) {
    try {
        return json::parse(content);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, column = 1;
        const std::size_t limit = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, content.size());
        for (std::size_t i = 0; i < limit; ++i) {
            if (content[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw ConfigError("config syntax error at line " + std::to_string(line) + ", column " + std::to_string(column) +
                          ": " + e.what());
    }
}

json read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string config_digest(const json& config) {
    const std::string canonical = config.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

const json& require_section(const json& config, const std::string& name) {
    const json* v = find(config, name);
    if (v == nullptr) throw ConfigError("config is missing the '" + name + "' section");
    if (!v->is_object()) fail(name, "expected an object");
    return *v;
}

WeightedSpace parse_space(const json& section) {
    const std::string path = "space";
    if (!section.is_object()) fail(path, "expected an object");
    if (const json* preset = find(section, "preset")) {
        if (!preset->is_string() || preset->get<std::string>() != "example1") {
            fail(path + ".preset", "unknown preset (expected example1)");
        }
        return example1_space(integer(section, "dimension", path, 30));
    }
    const auto density = text(section, "density", path, "standard-normal");
    if (density != "standard-normal") fail(path + ".density", "unsupported density '" + density + "'");

    std::vector<WeightFunction> psi;
    if (const json* list = find(section, "weight_functions")) {
        if (!list->is_array() || list->empty()) fail(path + ".weight_functions", "expected a nonempty array");
        for (std::size_t j = 0; j < list->size(); ++j) {
            psi.push_back(parse_weight_function((*list)[j], path + ".weight_functions[" + std::to_string(j) + "]"));
        }
    } else if (const json* shared = find(section, "weight_function")) {
        const auto s = integer(section, "dimension", path);
        if (s < 1) fail(path + ".dimension", "must be >= 1");
        psi.assign(s, parse_weight_function(*shared, path + ".weight_function"));
    } else {
        fail(path, "needs 'weight_function' (with 'dimension') or 'weight_functions'");
    }
    if (const json* dim = find(section, "dimension"); dim != nullptr && dim->is_number_integer() &&
                                                      dim->get<std::uint64_t>() != psi.size()) {
        fail(path + ".dimension", "does not match the number of weight functions");
    }
    const std::size_t s = psi.size();

    const json* weights = find(section, "weights");
    if (weights == nullptr || !weights->is_object()) fail(path + ".weights", "missing or not an object");
    const auto kind = text(*weights, "kind", path + ".weights");
    const json* gamma_json = find(*weights, "gamma");
    if (gamma_json == nullptr) fail(path + ".weights.gamma", "missing");
    auto gamma = parse_gamma(*gamma_json, s, path + ".weights.gamma");
    try {
        if (kind == "product") return WeightedSpace(Density{}, std::move(psi), WeightScheme::product(std::move(gamma)));
        if (kind == "pod") {
            const json* order = find(*weights, "order_weights");
            if (order == nullptr) fail(path + ".weights.order_weights", "missing");
            return WeightedSpace(Density{}, std::move(psi),
                                 WeightScheme::pod(number_list(*order, path + ".weights.order_weights"), std::move(gamma)));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const ArgumentError& e) {
        fail(path + ".weights", e.what());
    }
    fail(path + ".weights.kind", "unknown weight kind '" + kind + "' (expected product or pod)");
}

ProblemConfig parse_problem(const json& section) {
    const std::string path = "problem";
    if (!section.is_object()) fail(path, "expected an object");
    const auto kind = text(section, "kind", path);
    ProblemConfig out;
    try {
        if (kind == "exp-linear") {
            const json* a = find(section, "a");
            if (a == nullptr) fail(path + ".a", "missing");
            out.kind = ProblemKind::exp_linear;
            out.integrand = exp_linear_integrand(number_list(*a, path + ".a"));
            out.default_grid = {127, 257, 521, 1021, 2053, 4099, 8191};
            out.full_grid = {127, 257, 521, 1021, 2053, 4099, 8191, 16381, 32771};
            const std::size_t s = out.integrand.dimension;
            out.default_space = [s] { return example1_space(s); };
            return out;
        }
        if (kind == "asian") {
            AsianSpec spec;
            spec.S0 = number(section, "S0", path, spec.S0);
            spec.rate = number(section, "R_rate", path, spec.rate);
            spec.sigma = number(section, "sigma", path, spec.sigma);
            spec.T = number(section, "T", path, spec.T);
            spec.steps = integer(section, "steps", path, spec.steps);
            const auto mode = text(section, "mode", path, "value");
            if (mode == "value") {
                spec.mode = AsianMode::value;
                spec.threshold = number(section, "K", path);
            } else if (mode == "cdf") {
                spec.mode = AsianMode::cdf;
                spec.threshold = number(section, "x", path);
            } else {
                fail(path + ".mode", "expected value or cdf");
            }
            spec.validate();
            out.kind = ProblemKind::asian;
            out.integrand = preintegrated_asian(spec, pca_matrix(spec.d(), spec.T));
            out.default_grid = {17, 31, 67, 127, 257, 521, 1021, 2053, 4099};
            out.full_grid = {17, 31, 67, 127, 257, 521, 1021, 2053, 4099, 8191, 16381, 32771};
            out.default_space = [spec] { return asian_weight_recipe(spec); };
            return out;
        }
        if (kind == "pde") {
            PDESpec spec;
            spec.s = integer(section, "s", path, spec.s);
            spec.x0 = number(section, "x0", path, spec.x0);
            const double lambda = number(section, "lambda", path, 0.55);
            spec.validate();
            out.kind = ProblemKind::pde;
            out.integrand = pde_integrand(spec);
            out.default_grid = powers_of_two(4, 12);
            out.full_grid = powers_of_two(4, 15);
            const std::size_t s = spec.s;
            out.default_space = [s, lambda] { return pde_weight_recipe(s, lambda); };
            return out;
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const ArgumentError& e) {
        fail(path, e.what());
    }
    fail(path + ".kind", "unknown problem '" + kind + "' (expected exp-linear, asian or pde)");
}

} // namespace mqmc
