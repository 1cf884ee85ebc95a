// Command-line front end: simulate, fit, decompose, sweep, diagnose.
//
// Exit codes: 0 success, 1 usage/validation/IO error or failed --check,
// 2 rank deficiency in `fit`.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

#include "pcrlab/config.hpp"
#include "pcrlab/estimator.hpp"
#include "pcrlab/harness.hpp"
#include "pcrlab/sample_io.hpp"

namespace {

using namespace pcrlab;

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw Error("write to '" + path + "' failed");
}

struct CommonOptions {
    std::string config_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
};

RunConfig load_with_overrides(const CommonOptions& opts) {
    RunConfig cfg = load_config(opts.config_path);
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.threads) {
        if (*opts.threads < 1) throw ValidationError("--threads must be at least 1");
        cfg.threads = *opts.threads;
    }
    return cfg;
}

int cmd_simulate(const CommonOptions& opts, std::optional<long long> t_override) {
    const RunConfig cfg = load_with_overrides(opts);
    const long long T = t_override ? *t_override : cfg.sample_sizes.front();
    if (T < 1) throw ValidationError("T must be at least 1, got " + std::to_string(T));
    const CellSetup cell = cfg.single_cell(T);
    const Sample sample = simulate(cell.spec, cell.cov, T, cfg.seed);
    write_sample_csv(opts.out_path, sample);
    std::cout << "seed " << sample.seed_used << '\n';
    return 0;
}

int cmd_fit(const std::string& sample_path, long long k, const std::string& out_path) {
    const Sample sample = read_sample_csv(sample_path);
    const PCRFit fit = pcr_fit(sample, k);
    const std::string report = fit_report_json(fit, sample);
    if (out_path.empty()) {
        std::cout << report;
    } else {
        write_text(out_path, report);
    }
    std::cerr << "empirical risk R_T(theta_hat) = " << format_double(empirical_risk(sample, fit.theta_hat)) << '\n';
    return 0;
}

int cmd_decompose(const CommonOptions& opts) {
    const RunConfig cfg = load_with_overrides(opts);
    const SweepConfig sc = cfg.sweep_config();
    const SweepResult result = run_sweep(sc);
    write_text(opts.out_path, decompositions_csv(sc, result));
    Index violations = 0;
    Index degenerate = 0;
    for (const auto& c : result.cells) {
        violations += c.slack_violations;
        degenerate += c.degenerate;
    }
    std::cout << "replications " << result.replications.size() << ", bound violations " << violations
              << ", degenerate " << degenerate << '\n';
    return 0;
}

int cmd_sweep(const CommonOptions& opts, const std::string& summary_path, bool check) {
    const RunConfig cfg = load_with_overrides(opts);
    const SweepConfig sc = cfg.sweep_config();
    const SweepResult result = run_sweep(sc);
    write_text(opts.out_path, cells_csv(result.cells));

    std::optional<CheckOutcome> outcome;
    if (check) outcome = evaluate_check(result, cfg.check);
    const std::string summary = summary_path.empty() ? opts.out_path + ".summary.json" : summary_path;
    write_text(summary, summary_json(sc, result, cfg.check, outcome));

    if (outcome) {
        for (const auto& m : outcome->messages) std::cout << m << '\n';
        std::cout << (outcome->passed ? "check passed" : "check FAILED") << '\n';
        return outcome->passed ? 0 : 1;
    }
    return 0;
}

int cmd_diagnose(const CommonOptions& opts) {
    RunConfig cfg = load_with_overrides(opts);
    cfg.diagnostics = true;
    const SweepConfig sc = cfg.sweep_config();
    const SweepResult result = run_sweep(sc);
    write_text(opts.out_path, diagnostics_csv(sc, result));
    for (const auto& c : result.cells) {
        std::cout << "T=" << c.point.T << " p=" << c.point.p << " K=" << c.point.K
                  << " freq(lambda_hat_K >= c_K p^a/2)=" << format_double(c.freq_eigenvalue_event)
                  << " freq(lambda_min(PP'/T) > 1/2)=" << format_double(c.freq_score_gram_event)
                  << " median ||HH'-I||=" << format_double(c.median_rotation_deviation) << '\n';
    }
    return 0;
}

void add_common(CLI::App* cmd, CommonOptions& opts, bool with_threads) {
    cmd->add_option("--config", opts.config_path, "configuration file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", opts.out_path, "output path")->required();
    cmd->add_option("--seed", opts.seed, "override the configured seed");
    if (with_threads) cmd->add_option("--threads", opts.threads, "worker threads (overrides config)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pcrlab: principal component regression laboratory"};
    app.require_subcommand(1);
    app.footer(pcrlab::config_help());

    CommonOptions sim_opts;
    std::optional<long long> sim_t;
    auto* sim = app.add_subcommand("simulate", "simulate one sample and write it as CSV");
    add_common(sim, sim_opts, false);
    sim->add_option("--T", sim_t, "sample length (default: first T in config)");

    std::string fit_sample;
    long long fit_k = 0;
    std::string fit_out;
    auto* fit = app.add_subcommand("fit", "fit PCR to a sample CSV and emit a JSON report");
    fit->add_option("--sample", fit_sample, "sample CSV")->required();
    fit->add_option("--K", fit_k, "number of components")->required();
    fit->add_option("--out", fit_out, "report path (default: stdout)");

    CommonOptions dec_opts;
    auto* dec = app.add_subcommand("decompose", "per-replication excess-risk decomposition CSV");
    add_common(dec, dec_opts, true);

    CommonOptions sweep_opts;
    std::string summary_path;
    bool check = false;
    auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep: per-cell CSV and JSON summary");
    add_common(sweep, sweep_opts, true);
    sweep->add_option("--summary", summary_path, "JSON summary path (default: <out>.summary.json)");
    sweep->add_flag("--check", check, "exit 1 when the configured check fails");

    CommonOptions diag_opts;
    auto* diag = app.add_subcommand("diagnose", "per-replication concentration diagnostics CSV");
    add_common(diag, diag_opts, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*sim) return cmd_simulate(sim_opts, sim_t);
        if (*fit) return cmd_fit(fit_sample, fit_k, fit_out);
        if (*dec) return cmd_decompose(dec_opts);
        if (*sweep) return cmd_sweep(sweep_opts, summary_path, check);
        if (*diag) return cmd_diagnose(diag_opts);
    } catch (const pcrlab::RankDeficiencyError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
