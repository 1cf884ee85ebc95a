#pragma once

// Run configuration: `key = value` text, `#` comments, comma-separated
// lists. Unknown or repeated keys are rejected. Every key can be overridden
// by an environment variable PCRLAB_<KEY> (upper-case).

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pcrlab/harness.hpp"

namespace pcrlab {

struct ConfigKey {
    std::string name;
    std::string default_value;
    std::string description;
};

/// Every accepted key with its default, in documentation order.
const std::vector<ConfigKey>& config_keys();

/// One line per key: name, default and description.
std::string config_help();

struct RunConfig {
    std::vector<Index> sample_sizes{200};
    GridRule p_rule;
    GridRule k_rule;
    DgpTemplate dgp;
    Index replications = 200;
    std::uint64_t seed = 1;
    double r_alpha_proxy = std::numeric_limits<double>::infinity();
    bool diagnostics = false;
    unsigned threads = 1;
    EigenPath fit_path = EigenPath::Auto;
    SweepCheck check;

    SweepConfig sweep_config() const;
    /// Population setup for a single sample of length T (first grid rule
    /// evaluation), as used by `simulate`.
    CellSetup single_cell(Index T) const;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Reads the process environment.
std::optional<std::string> process_env(const std::string& name);

RunConfig parse_config(std::string_view text, const EnvLookup& env = process_env);
RunConfig load_config(const std::string& path, const EnvLookup& env = process_env);

} // namespace pcrlab
