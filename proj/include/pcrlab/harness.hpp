#pragma once

// Monte Carlo replication engine: grids of (T, p, K) cells, per-replication
// simulate -> fit -> decompose pipelines, per-cell aggregation, log-log rate
// regression and concentration diagnostics.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pcrlab/risk.hpp"

namespace pcrlab {

/// Growth rule n(T) = floor(coef * T^power), optionally capped. Parsed from
/// "C*T^r", "T^r", "C*T", "T" or a plain integer "C".
struct GridRule {
    double coef = 1.0;
    double power = 0.0;
    Index cap = 0; ///< 0 means no cap

    Index evaluate(Index T) const;
    std::string to_string() const;
    static GridRule parse(std::string_view text);
};

struct GridPoint {
    Index T = 0;
    Index p = 0;
    Index K = 0;
};

std::vector<GridPoint> make_grid(const std::vector<Index>& sample_sizes, const GridRule& p_rule,
                                 const GridRule& k_rule);

/// Dimension-free description of the data-generating process; instantiated
/// per cell once p and K are known.
struct DgpTemplate {
    double alpha = 1.0;
    std::vector<double> spike_constants{1.0}; ///< last value repeats up to K
    double tail_constant = 1.0;
    double rho = 0.0;
    Link link = Link::Linear;
    std::vector<double> score_coefs{1.0}; ///< vartheta* (zero-padded to K)
    std::vector<double> tail_coefs;       ///< coefficients on v_{K+1}, v_{K+2}, ...
    double quad_coef = 0.0;
    Index quad_direction = 1; ///< w = v_j / sqrt(lambda_j)
    double noise_sd = 1.0;
    EigvecStyle eigvec_style = EigvecStyle::Identity;
};

struct SweepConfig {
    DgpTemplate dgp;
    std::vector<GridPoint> grid;
    Index replications = 200;
    std::uint64_t seed = 1;
    bool diagnostics = false;
    double r_alpha_proxy = std::numeric_limits<double>::infinity();
    unsigned threads = 1;
    /// Auto switches to EigenPath::Leading once min(T, p) exceeds 400.
    EigenPath fit_path = EigenPath::Auto;
};

void validate(const SweepConfig& config);

/// Population side of one cell, shared by all of its replications.
struct CellSetup {
    GridPoint point;
    DgpSpec spec;
    CovarianceModeld cov;
    JointMomentsd moments;
    PopulationPCAd pca;
    double approximation_error = 0.0;
};

CellSetup make_cell(const SweepConfig& config, std::size_t cell_index);

std::uint64_t replication_seed(std::uint64_t seed, std::size_t cell_index, Index replication);

EigenPath effective_fit_path(const SweepConfig& config, const GridPoint& point);

struct Diagnostics {
    double lambda_hat_K = 0.0;
    bool eigenvalue_event = false;     ///< lambda_hat_K >= c_K p^alpha / 2
    double cov_deviation = 0.0;        ///< ||Sigma_hat - Sigma||_2
    bool cov_deviation_event = false;  ///< cov_deviation <= c_K p^alpha / 2
    double score_gram_deviation = 0.0; ///< ||(1/T) P'P - I_K||_2
    double score_gram_min_eig = 0.0;   ///< lambda_min((1/T) P'P)
    bool score_gram_event = false;     ///< score_gram_min_eig > 1/2
    double score_idio_cross = 0.0;     ///< ||(1/T) sum P_t u_t'||_2
    double rotation_deviation = 0.0;   ///< ||H H' - I_K||_2
    double score_estimation_error = 0.0; ///< (1/sqrt T) ||P_hat - P H'||_2
    double idio_cov_deviation = 0.0;   ///< ||(1/T) sum u_t u_t' - E[u_t u_t']||_2
};

/// Concentration quantities for one sample. Cost is O(p^3).
Diagnostics concentration_diagnostics(const Sample& sample, const PCRFit& fit, const PopulationPCAd& pca,
                                      const RotationPair& rot);

struct ReplicationResult {
    std::size_t cell = 0;
    Index replication = 0;
    std::uint64_t seed = 0;
    bool failed = false;
    std::string failure;
    RiskDecomposition decomposition;
    RateInputs rate;
    std::optional<Diagnostics> diagnostics;
};

ReplicationResult run_replication(const SweepConfig& config, const CellSetup& cell, std::size_t cell_index,
                                  Index replication);

struct CellResult {
    GridPoint point;
    Index replications = 0;
    Index failures = 0;
    Index degenerate = 0;
    Index slack_violations = 0;
    bool flagged = false; ///< more than 10% of replications failed

    double mean_excess = 0.0;
    double median_excess = 0.0;
    double se_excess = 0.0;
    double mean_estimation_residual = 0.0;
    double median_estimation_residual = 0.0;
    double se_estimation_residual = 0.0;
    double approximation_error = 0.0;
    double mean_term_pc_estimation = 0.0;
    double mean_term_rotation_gap = 0.0;
    double mean_term_ls_gap = 0.0;
    double mean_term_approx = 0.0;
    double rate = 0.0;

    bool has_diagnostics = false;
    double freq_eigenvalue_event = 0.0;
    double freq_cov_deviation_event = 0.0;
    double freq_score_gram_event = 0.0;
    double median_rotation_deviation = 0.0;
    double median_score_estimation_error = 0.0;
    double mean_cov_deviation = 0.0;
    double mean_score_gram_deviation = 0.0;
    double mean_score_idio_cross = 0.0;
    double mean_idio_cov_deviation = 0.0;
};

/// Aggregates the replications of one cell (order-independent).
CellResult aggregate_cell(const CellSetup& cell, const std::vector<ReplicationResult>& replications);

struct SweepResult {
    std::vector<CellResult> cells;
    std::vector<ReplicationResult> replications; ///< cell-major, replication order
};

/// Runs every cell and replication. Replications of a cell are spread over
/// config.threads workers; output does not depend on the thread count.
SweepResult run_sweep(const SweepConfig& config);

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    Index used = 0;
    Index excluded = 0;
};

using ResponseSelector = std::function<double(const CellResult&)>;

/// OLS of log(response) on log(T). Cells with non-positive or non-finite
/// response are excluded and counted. Throws InsufficientDataError with
/// fewer than three usable cells.
RateFit fit_rate(const std::vector<CellResult>& cells, const ResponseSelector& response);

/// Named responses: mean_excess, median_excess, mean_estimation_residual,
/// median_estimation_residual, median_rotation_deviation.
ResponseSelector response_by_name(std::string_view name);

enum class CheckMode { Rate, Bound };

struct SweepCheck {
    CheckMode mode = CheckMode::Rate;
    std::string response = "mean_estimation_residual";
    double slope_min = -1.35;
    double slope_max = -0.65;
    double r2_min = 0.9;
    double max_degenerate_fraction = 0.02;
};

struct CheckOutcome {
    bool passed = false;
    std::vector<std::string> messages;
    std::optional<RateFit> fit;
};

CheckOutcome evaluate_check(const SweepResult& result, const SweepCheck& check);

std::string cells_csv(const std::vector<CellResult>& cells);
std::string decompositions_csv(const SweepConfig& config, const SweepResult& result);
std::string diagnostics_csv(const SweepConfig& config, const SweepResult& result);
std::string summary_json(const SweepConfig& config, const SweepResult& result, const SweepCheck& check,
                         const std::optional<CheckOutcome>& outcome);

} // namespace pcrlab
