#include "pcrlab/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "pcrlab/sample_io.hpp"

namespace pcrlab {

namespace {

std::string trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return std::string(s);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> items;
    if (trim(value).empty()) return items;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = value.find(',', start);
        items.push_back(trim(std::string_view(value).substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return items;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& expected) {
    throw ValidationError("config key '" + key + "': invalid value '" + value + "' (expected " + expected + ")");
}

double to_double(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t == "inf" || t == "infinity") return std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) bad_value(key, text, "a number");
    return v;
}

long long to_integer(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    long long v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) bad_value(key, text, "an integer");
    return v;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    std::uint64_t v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
        bad_value(key, text, "a nonnegative integer");
    }
    return v;
}

bool to_bool(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    bad_value(key, text, "true or false");
}

std::vector<double> to_doubles(const std::string& key, const std::string& text) {
    std::vector<double> out;
    for (const auto& item : split_list(text)) out.push_back(to_double(key, item));
    return out;
}

EigenPath to_fit_path(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t == "auto") return EigenPath::Auto;
    if (t == "covariance") return EigenPath::Covariance;
    if (t == "gram") return EigenPath::Gram;
    if (t == "leading") return EigenPath::Leading;
    bad_value(key, text, "auto, covariance, gram or leading");
}

std::string env_name(const std::string& key) {
    std::string name = "PCRLAB_";
    for (char c : key) name += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return name;
}

} // namespace

const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = {
        {"T", "200", "sample sizes, comma-separated; simulate uses the first"},
        {"p_rule", "T", "predictor count rule C*T^r (or T, T^r, C)"},
        {"p_max", "0", "cap on p after applying p_rule (0: none)"},
        {"K_rule", "1", "component count rule C*T^r"},
        {"alpha", "1", "spike exponent in (1/2, 1]"},
        {"rho", "0", "VAR(1) coefficient in [0, 1)"},
        {"spike_constants", "1", "c_1 >= ... >= c_K > 0; last value repeats"},
        {"tail_constant", "1", "common value of c_{K+1}, ..., c_p (>= 0)"},
        {"eigvec_style", "identity", "identity or haar"},
        {"link", "linear", "linear or linear_plus_quadratic"},
        {"score_coefs", "1", "coefficients on the population scores (vartheta*)"},
        {"tail_coefs", "", "coefficients on v_{K+1}, v_{K+2}, ... (gamma*)"},
        {"quad_coef", "0", "coefficient of the centred quadratic term"},
        {"quad_direction", "1", "eigenvector index j of w = v_j / sqrt(lambda_j)"},
        {"noise_sd", "1", "standard deviation of the target innovation"},
        {"replications", "200", "replications per cell"},
        {"seed", "1", "base seed"},
        {"r_alpha_proxy", "inf", "stand-in for the mixing exponent in the rate expression"},
        {"diagnostics", "false", "compute concentration diagnostics (O(p^3) per replication)"},
        {"threads", "1", "worker threads"},
        {"fit_path", "auto", "auto, covariance, gram or leading"},
        {"check_mode", "rate", "rate (slope band) or bound (excess-risk bound, degenerate fraction)"},
        {"check_response", "mean_estimation_residual", "response regressed on log T in rate mode"},
        {"slope_min", "-1.35", "lower end of the accepted slope band"},
        {"slope_max", "-0.65", "upper end of the accepted slope band"},
        {"r2_min", "0.9", "minimum R^2 of the log-log fit"},
        {"max_degenerate_fraction", "0.02", "bound mode: accepted fraction of degenerate replications"},
    };
    return keys;
}

std::string config_help() {
    std::ostringstream out;
    out << "Configuration keys (key = value; env override PCRLAB_<KEY>):\n";
    for (const auto& k : config_keys()) {
        out << "  " << k.name << " [default: " << (k.default_value.empty() ? "(empty)" : k.default_value) << "]  "
            << k.description << '\n';
    }
    return out.str();
}

std::optional<std::string> process_env(const std::string& name) {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
}

RunConfig parse_config(std::string_view text, const EnvLookup& env) {
    std::map<std::string, std::string> values;
    for (const auto& k : config_keys()) values[k.name] = k.default_value;

    std::map<std::string, long> seen;
    std::istringstream in{std::string(text)};
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string content = trim(line);
        if (content.empty()) continue;
        const std::size_t eq = content.find('=');
        if (eq == std::string::npos) {
            throw ParseError("config line " + std::to_string(line_no) + ": expected key = value", line_no);
        }
        const std::string key = trim(std::string_view(content).substr(0, eq));
        if (!values.count(key)) {
            throw ParseError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'", line_no);
        }
        if (seen.count(key)) {
            throw ParseError("config line " + std::to_string(line_no) + ": key '" + key + "' repeated", line_no);
        }
        seen[key] = line_no;
        values[key] = trim(std::string_view(content).substr(eq + 1));
    }
    if (env) {
        for (auto& [key, value] : values) {
            if (auto v = env(env_name(key))) value = *v;
        }
    }

    RunConfig cfg;
    cfg.sample_sizes.clear();
    for (const auto& item : split_list(values["T"])) cfg.sample_sizes.push_back(to_integer("T", item));
    if (cfg.sample_sizes.empty()) throw ValidationError("config key 'T': at least one sample size required");
    cfg.p_rule = GridRule::parse(values["p_rule"]);
    cfg.p_rule.cap = to_integer("p_max", values["p_max"]);
    cfg.k_rule = GridRule::parse(values["K_rule"]);

    DgpTemplate& d = cfg.dgp;
    d.alpha = to_double("alpha", values["alpha"]);
    d.rho = to_double("rho", values["rho"]);
    d.spike_constants = to_doubles("spike_constants", values["spike_constants"]);
    if (d.spike_constants.empty()) throw ValidationError("config key 'spike_constants': empty");
    d.tail_constant = to_double("tail_constant", values["tail_constant"]);
    d.eigvec_style = parse_eigvec_style(trim(values["eigvec_style"]));
    d.link = parse_link(trim(values["link"]));
    d.score_coefs = to_doubles("score_coefs", values["score_coefs"]);
    d.tail_coefs = to_doubles("tail_coefs", values["tail_coefs"]);
    d.quad_coef = to_double("quad_coef", values["quad_coef"]);
    d.quad_direction = to_integer("quad_direction", values["quad_direction"]);
    d.noise_sd = to_double("noise_sd", values["noise_sd"]);

    cfg.replications = to_integer("replications", values["replications"]);
    cfg.seed = to_unsigned("seed", values["seed"]);
    cfg.r_alpha_proxy = to_double("r_alpha_proxy", values["r_alpha_proxy"]);
    cfg.diagnostics = to_bool("diagnostics", values["diagnostics"]);
    const long long threads = to_integer("threads", values["threads"]);
    if (threads < 1) throw ValidationError("config key 'threads': must be at least 1");
    cfg.threads = static_cast<unsigned>(threads);
    cfg.fit_path = to_fit_path("fit_path", values["fit_path"]);

    const std::string mode = trim(values["check_mode"]);
    if (mode == "rate") {
        cfg.check.mode = CheckMode::Rate;
    } else if (mode == "bound") {
        cfg.check.mode = CheckMode::Bound;
    } else {
        bad_value("check_mode", mode, "rate or bound");
    }
    cfg.check.response = trim(values["check_response"]);
    response_by_name(cfg.check.response);
    cfg.check.slope_min = to_double("slope_min", values["slope_min"]);
    cfg.check.slope_max = to_double("slope_max", values["slope_max"]);
    cfg.check.r2_min = to_double("r2_min", values["r2_min"]);
    cfg.check.max_degenerate_fraction = to_double("max_degenerate_fraction", values["max_degenerate_fraction"]);
    return cfg;
}

RunConfig load_config(const std::string& path, const EnvLookup& env) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open config '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), env);
}

SweepConfig RunConfig::sweep_config() const {
    SweepConfig sc;
    sc.dgp = dgp;
    sc.grid = make_grid(sample_sizes, p_rule, k_rule);
    sc.replications = replications;
    sc.seed = seed;
    sc.diagnostics = diagnostics;
    sc.r_alpha_proxy = r_alpha_proxy;
    sc.threads = threads;
    sc.fit_path = fit_path;
    return sc;
}

CellSetup RunConfig::single_cell(Index T) const {
    SweepConfig sc = sweep_config();
    sc.grid = make_grid({T}, p_rule, k_rule);
    sc.replications = 1;
    if (sc.grid[0].K < 1 || sc.grid[0].K > sc.grid[0].p) {
        throw ValidationError("config: K_rule gives K outside [1, p]");
    }
    return make_cell(sc, 0);
}

} // namespace pcrlab
