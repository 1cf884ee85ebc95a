// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Run a subset with `acceptance 1 4 9`.

#include <json.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "pcrlab/config.hpp"
#include "pcrlab/harness.hpp"
#include "pcrlab/sample_io.hpp"

using namespace pcrlab;
namespace fs = std::filesystem;

namespace {

// Tolerances and sizes, pinned here rather than read from configs.
constexpr double kIdentityTol = 1e-8;
constexpr double kEquivalenceTol = 1e-8;
constexpr double kBoundTol = 1e-8;
constexpr double kMaxDegenerateFraction = 0.02;
constexpr double kStrongSlopeMin = -1.35;
constexpr double kStrongSlopeMax = -0.65;
constexpr double kWeakSlopeMin = -1.35;
constexpr double kWeakSlopeMax = -0.5;
constexpr double kR2Min = 0.9;
constexpr double kFloorSEs = 3.0;
constexpr double kEventFrequencyMin = 0.99;
constexpr double kSmallBallTarget = 0.6170750774519738; // 2 (1 - Phi(0.5))
constexpr double kSmallBallSEs = 3.0;
constexpr double kMomentSEs = 4.0;

struct Outcome {
    bool passed = true;
    std::vector<std::string> details;

    void require(bool ok, const std::string& what) {
        if (!ok) passed = false;
        details.push_back(std::string(ok ? "ok: " : "FAILED: ") + what);
    }
    void note(const std::string& what) { details.push_back("info: " + what); }
};

std::string num(double v) {
    std::ostringstream out;
    out.precision(4);
    out << v;
    return out.str();
}

unsigned worker_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string source_path(const std::string& rel) { return std::string(PCRLAB_SOURCE_DIR) + "/" + rel; }

RunConfig bundled_config(const std::string& name) {
    return load_config(source_path("configs/" + name), nullptr);
}

struct Command {
    int code = -1;
    std::string out;
};

Command run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd = "'" + std::string(PCRLAB_CLI_PATH) + "' " + args + " >'" + log.string() + "' 2>&1";
    Command c;
    const int status = std::system(cmd.c_str());
    c.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(log);
    std::ostringstream buf;
    buf << in.rdbuf();
    c.out = buf.str();
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / ("pcrlab_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir;
}

DgpSpec random_spec(Index p, Index k, std::mt19937_64& gen) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal;
    DgpSpec spec;
    spec.p = p;
    spec.K = k;
    spec.alpha = 0.55 + 0.45 * unif(gen);
    spec.spike_constants.resize(k);
    double c = 1.0 + 2.0 * unif(gen);
    for (Index i = 0; i < k; ++i) {
        spec.spike_constants(i) = c;
        c *= 0.5 + 0.5 * unif(gen);
    }
    spec.tail_constants.resize(p - k);
    double tail = 0.2 + 0.8 * unif(gen);
    tail = std::min(tail, spec.spike_constants(k - 1) * std::pow(static_cast<double>(p), spec.alpha));
    for (Index i = 0; i < p - k; ++i) {
        spec.tail_constants(i) = tail;
        tail *= 0.95 + 0.05 * unif(gen);
    }
    spec.eigvec_style = EigvecStyle::Haar;
    spec.theta.resize(p);
    for (Index i = 0; i < p; ++i) spec.theta(i) = normal(gen);
    spec.seed = gen();
    return spec;
}

MatrixXd gaussian(Index r, Index c, std::mt19937_64& gen) {
    std::normal_distribution<double> normal;
    MatrixXd m(r, c);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = normal(gen);
    return m;
}

// 1. Population decomposition identities on random instances.
Outcome population_identities() {
    Outcome o;
    std::mt19937_64 gen(1001);
    std::uniform_int_distribution<Index> pdist(2, 200);
    double worst_btb = 0, worst_recon = 0, worst_split = 0, worst_coef = 0;
    for (int i = 0; i < 100; ++i) {
        const Index p = pdist(gen);
        std::uniform_int_distribution<Index> kdist(1, std::min<Index>(p, 8));
        const Index k = kdist(gen);
        const DgpSpec spec = random_spec(p, k, gen);
        const auto cov = build_covariance(spec);
        const JointMomentsd m = exact_moments(spec, cov);
        const auto pca = build_population_pca(cov, min_norm_blp(m, cov.eigensystem()), k);

        const MatrixXd btb = pca.B.transpose() * pca.B;
        const MatrixXd off = btb - MatrixXd(btb.diagonal().asDiagonal());
        worst_btb = std::max(worst_btb, off.cwiseAbs().maxCoeff() / btb.diagonal().maxCoeff());

        const MatrixXd x = gaussian(1000, p, gen) * cov.Lambda.cwiseSqrt().asDiagonal() * cov.V.transpose();
        const MatrixXd recon = pca.scores(x) * pca.B.transpose() + pca.idiosyncratic(x);
        worst_recon = std::max(worst_recon, ((recon - x).rowwise().norm().array() /
                                             x.rowwise().norm().array()).maxCoeff());

        const VectorXd direct = x * pca.theta_star;
        const VectorXd split = pca.scores(x) * pca.vartheta_star + pca.idiosyncratic(x) * pca.gamma_star;
        const VectorXd denom = (x.rowwise().norm() * pca.theta_star.norm()).array() + 1e-300;
        worst_split = std::max(worst_split, ((direct - split).cwiseAbs().array() / denom.array()).maxCoeff());

        const VectorXd vt = pca.Lambda_K.cwiseSqrt().asDiagonal() * (pca.V_K.transpose() * pca.theta_star);
        const VectorXd gs = pca.V_R * (pca.V_R.transpose() * pca.theta_star);
        const VectorXd back =
            pca.V_K * (pca.Lambda_K.cwiseSqrt().cwiseInverse().asDiagonal() * pca.vartheta_star) + pca.gamma_star;
        const double scale = 1 + pca.theta_star.norm();
        worst_coef = std::max({worst_coef, (vt - pca.vartheta_star).norm() / (1 + vt.norm()),
                               (gs - pca.gamma_star).norm() / scale, (back - pca.theta_star).norm() / scale});
    }
    o.require(worst_btb <= kIdentityTol, "B'B diagonal, worst relative off-diagonal " + num(worst_btb));
    o.require(worst_recon <= kIdentityTol, "reconstruction, worst relative error " + num(worst_recon));
    o.require(worst_split <= kIdentityTol, "predictor split, worst relative error " + num(worst_split));
    o.require(worst_coef <= kIdentityTol, "score/idiosyncratic coefficient identities, worst " + num(worst_coef));
    return o;
}

// 2. Two-step estimator versus constrained least squares.
Outcome formulation_equivalence() {
    Outcome o;
    std::mt19937_64 gen(2002);
    std::uniform_int_distribution<Index> tdist(10, 150);
    std::uniform_int_distribution<Index> pdist(2, 200);
    double worst = 0;
    int wide = 0;
    for (int i = 0; i < 100; ++i) {
        const Index T = tdist(gen);
        const Index p = pdist(gen);
        if (p > T) ++wide;
        std::uniform_int_distribution<Index> kdist(1, std::min<Index>(std::min(T, p), 6));
        const Index k = kdist(gen);
        const DgpSpec spec = random_spec(p, std::min<Index>(k, p), gen);
        const Sample s = simulate(spec, T);
        const PCRFit fit = pcr_fit(s, k);
        const VectorXd a = s.X * fit.theta_hat;
        const VectorXd b = s.X * constrained_erm_fit(s, k);
        worst = std::max(worst, (a - b).cwiseAbs().maxCoeff() / (1 + b.cwiseAbs().maxCoeff()));
    }
    o.require(wide > 0, std::to_string(wide) + " of 100 instances have p > T");
    o.require(worst <= kEquivalenceTol, "worst relative prediction gap " + num(worst));
    return o;
}

// 3. Per-replication excess-risk bound across regimes.
Outcome excess_bound() {
    Outcome o;
    Index total = 0, violations = 0, degenerate = 0, failures = 0;
    double min_rel_slack = std::numeric_limits<double>::infinity();
    for (double alpha : {1.0, 0.75}) {
        SweepConfig sc;
        sc.dgp.alpha = alpha;
        sc.dgp.spike_constants = {2.0, 1.0};
        sc.dgp.tail_constant = 0.5;
        sc.dgp.rho = 0.3;
        sc.dgp.score_coefs = {1.0, -0.5};
        sc.dgp.tail_coefs = {0.4, 0.2};
        sc.dgp.link = Link::LinearPlusQuadratic;
        sc.dgp.quad_coef = 0.3;
        sc.dgp.quad_direction = 3;
        sc.dgp.eigvec_style = EigvecStyle::Haar;
        sc.grid = {{100, 20, 2}, {100, 200, 2}, {500, 20, 2}, {500, 200, 2}};
        sc.replications = 125;
        sc.seed = alpha == 1.0 ? 3001 : 3002;
        sc.threads = worker_threads();
        const SweepResult r = run_sweep(sc);
        for (const auto& rep : r.replications) {
            ++total;
            if (rep.failed) {
                ++failures;
                continue;
            }
            const auto& d = rep.decomposition;
            if (d.degenerate) {
                ++degenerate;
                continue;
            }
            if (d.excess_risk_exact > d.term_sum() + kBoundTol * d.scale()) ++violations;
            min_rel_slack = std::min(min_rel_slack, d.bound_slack / d.scale());
        }
    }
    const double frac = static_cast<double>(degenerate) / static_cast<double>(total);
    o.require(total == 1000, std::to_string(total) + " replications over 8 cells");
    o.require(failures == 0, std::to_string(failures) + " failed replications");
    o.require(violations == 0, std::to_string(violations) + " bound violations (smallest relative slack " +
                                   num(min_rel_slack) + ")");
    o.require(frac < kMaxDegenerateFraction, "degenerate fraction " + num(frac));
    return o;
}

// Shared by 4 and 5: the mean excess per cell, checked for a strict decrease.
void note_monotone(Outcome& o, const std::vector<CellResult>& cells) {
    bool decreasing = true;
    std::string values;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        values += (i ? ", " : "") + num(cells[i].mean_excess);
        if (i > 0 && !(cells[i].mean_excess < cells[i - 1].mean_excess)) decreasing = false;
    }
    o.note("mean excess by T: " + values + (decreasing ? " (strictly decreasing)" : " (not monotone)"));
}

// 4. Strong-signal rate, through the CLI with the bundled configuration.
Outcome strong_signal() {
    Outcome o;
    const RunConfig cfg = bundled_config("strong_signal.cfg");
    const SweepConfig sc = cfg.sweep_config();
    bool shape = sc.dgp.alpha == 1.0 && sc.dgp.rho == 0.0 && sc.replications == 200 && sc.grid.size() == 5;
    for (const auto& g : sc.grid) shape = shape && g.K == 1 && g.p == g.T;
    shape = shape && sc.grid.front().T == 200 && sc.grid.back().T == 3200;
    o.require(shape, "bundled config: alpha = 1, K = 1, rho = 0, p = T, T = 200..3200, 200 replications");

    const fs::path dir = scratch_dir();
    const fs::path cells = dir / "strong.csv";
    const fs::path summary = dir / "strong.summary.json";
    const Command c = run_cli("sweep --check --config '" + source_path("configs/strong_signal.cfg") + "' --out '" +
                                  cells.string() + "' --summary '" + summary.string() + "' --threads " +
                                  std::to_string(worker_threads()),
                              dir / "strong.log");
    o.require(c.code == 0, "`pcrlab sweep --check` exit code " + std::to_string(c.code));
    try {
        const auto j = nlohmann::json::parse(slurp(summary));
        const auto& s = j.at("slopes").at("mean_estimation_residual");
        const double slope = s.at("slope").get<double>();
        const double r2 = s.at("r_squared").get<double>();
        o.require(slope >= kStrongSlopeMin && slope <= kStrongSlopeMax,
                  "slope " + num(slope) + " in [" + num(kStrongSlopeMin) + ", " + num(kStrongSlopeMax) + "]");
        o.require(r2 >= kR2Min, "R^2 " + num(r2) + " >= " + num(kR2Min));
    } catch (const std::exception& e) {
        o.require(false, std::string("summary unreadable: ") + e.what());
    }
    return o;
}

// 5. Weak-signal approximation floor, as stated: the estimation part is
// excess - 2 * approximation error and the excess flattens at
// 2 * approximation error.
Outcome weak_signal() {
    Outcome o;
    RunConfig cfg = bundled_config("weak_signal.cfg");
    SweepConfig sc = cfg.sweep_config();
    sc.threads = worker_threads();
    bool shape = sc.dgp.alpha == 0.75 && sc.grid.size() == 5 && !sc.dgp.tail_coefs.empty();
    for (const auto& g : sc.grid) shape = shape && g.p == std::min<Index>(g.T * g.T, 2500);
    o.require(shape, "bundled config: alpha = 3/4, nonzero idiosyncratic coefficient, p = min(T^2, 2500)");

    const SweepResult r = run_sweep(sc);
    const double approx = r.cells.front().approximation_error;
    o.require(approx > 0, "approximation error " + num(approx) + " > 0");
    note_monotone(o, r.cells);

    try {
        const RateFit f = fit_rate(r.cells, response_by_name("mean_estimation_residual"));
        o.require(f.slope >= kWeakSlopeMin && f.slope <= kWeakSlopeMax && f.r_squared >= kR2Min,
                  "slope of mean excess - 2*approx " + num(f.slope) + " (R^2 " + num(f.r_squared) + ", " +
                      std::to_string(f.excluded) + " cells excluded)");
    } catch (const InsufficientDataError& e) {
        std::string values;
        for (const auto& c : r.cells) values += " " + num(c.mean_estimation_residual);
        o.require(false, std::string("slope of mean excess - 2*approx: ") + e.what() + "; values:" + values);
    }
    const CellResult& last = r.cells.back();
    const double gap = last.mean_excess - 2 * approx;
    o.require(std::abs(gap) <= kFloorSEs * last.se_excess,
              "excess at T=" + std::to_string(last.point.T) + " is " + num(last.mean_excess) + ", floor 2*approx = " +
                  num(2 * approx) + ", gap " + num(gap) + " vs " + num(kFloorSEs) + " SE = " +
                  num(kFloorSEs * last.se_excess));

    // Same data measured against a floor of one approximation error.
    std::vector<CellResult> shifted = r.cells;
    for (auto& c : shifted) c.mean_estimation_residual = c.mean_excess - approx;
    try {
        const RateFit f = fit_rate(shifted, response_by_name("mean_estimation_residual"));
        o.note("slope of mean excess - approx " + num(f.slope) + " (R^2 " + num(f.r_squared) + ")");
    } catch (const InsufficientDataError& e) {
        o.note(std::string("slope of mean excess - approx: ") + e.what());
    }
    o.note("excess at T=" + std::to_string(last.point.T) + " minus approx = " + num(last.mean_excess - approx) +
           " (" + num((last.mean_excess - approx) / last.se_excess) + " SE)");
    return o;
}

// 6. Concentration diagnostics.
Outcome diagnostics() {
    Outcome o;
    SweepConfig sc;
    sc.dgp.alpha = 1.0;
    sc.dgp.rho = 0.0;
    sc.dgp.spike_constants = {1.0};
    sc.dgp.tail_constant = 1.0;
    sc.dgp.eigvec_style = EigvecStyle::Haar;
    sc.grid = {{250, 50, 1}, {1000, 50, 1}, {4000, 50, 1}};
    sc.replications = 500;
    sc.seed = 6006;
    sc.diagnostics = true;
    sc.threads = worker_threads();
    const SweepResult r = run_sweep(sc);
    const CellResult& mid = r.cells[1];
    o.require(mid.freq_eigenvalue_event >= kEventFrequencyMin,
              "T=1000: freq(lambda_hat_K >= c_K p^alpha / 2) = " + num(mid.freq_eigenvalue_event));
    o.require(mid.freq_score_gram_event >= kEventFrequencyMin,
              "T=1000: freq(lambda_min(P'P/T) > 1/2) = " + num(mid.freq_score_gram_event));
    const double a = r.cells[0].median_rotation_deviation;
    const double b = r.cells[1].median_rotation_deviation;
    const double c = r.cells[2].median_rotation_deviation;
    o.require(a > b && b > c, "median ||HH' - I|| over T = 250, 1000, 4000: " + num(a) + ", " + num(b) + ", " +
                                  num(c));
    return o;
}

// 7. Small-ball probe against the normal CDF.
Outcome small_ball() {
    Outcome o;
    DgpSpec spec;
    spec.p = 20;
    spec.K = 2;
    spec.alpha = 1;
    spec.spike_constants = Eigen::Vector2d(1.0, 0.5);
    spec.tail_constants = VectorXd::Constant(18, 1.0);
    spec.theta = VectorXd::Zero(20);
    spec.eigvec_style = EigvecStyle::Haar;
    spec.seed = 7007;
    const Index draws = 100000;
    const SmallBallProbe probe = probe_small_ball(spec, 0.5, 10, draws);
    const double se = std::sqrt(kSmallBallTarget * (1 - kSmallBallTarget) / static_cast<double>(draws));
    const double dev = probe.min_frequency - kSmallBallTarget;
    o.require(std::abs(dev) <= kSmallBallSEs * se, "min over " + std::to_string(probe.frequencies.size()) +
                                                        " directions " + num(probe.min_frequency) + ", target " +
                                                        num(kSmallBallTarget) + ", " + num(dev / se) + " SE");
    return o;
}

double batch_se(const VectorXd& z, double& mean) {
    const Index batches = 100;
    const Index len = z.size() / batches;
    VectorXd means(batches);
    for (Index b = 0; b < batches; ++b) means(b) = z.segment(b * len, len).mean();
    mean = means.mean();
    return std::sqrt((means.array() - mean).square().sum() / static_cast<double>(batches - 1) /
                     static_cast<double>(batches));
}

// 8. Closed forms against simulation.
Outcome closed_forms() {
    Outcome o;
    std::mt19937_64 gen(8008);
    double worst_moment = 0;
    int moment_checks = 0;
    for (int variant = 0; variant < 3; ++variant) {
        DgpSpec spec = random_spec(4, 1, gen);
        if (variant >= 1) {
            spec.link = Link::LinearPlusQuadratic;
            spec.quad_coef = 0.7;
            spec.quad_weights = gaussian(4, 1, gen).col(0) * 0.3;
        }
        if (variant == 2) spec.rho = 0.5;
        const auto cov = build_covariance(spec);
        const JointMomentsd m = exact_moments(spec, cov);
        const Sample s = simulate(spec, cov, 1000000, spec.seed);
        auto check = [&](const VectorXd& z, double exact) {
            double mean = 0;
            const double se = batch_se(z, mean);
            worst_moment = std::max(worst_moment, std::abs(mean - exact) / se);
            ++moment_checks;
        };
        for (Index i = 0; i < 4; ++i) {
            check(s.X.col(i).cwiseProduct(s.Y), m.sigma_xy(i));
            for (Index j = i; j < 4; ++j) check(s.X.col(i).cwiseProduct(s.X.col(j)), m.Sigma(i, j));
        }
        check(s.Y.cwiseAbs2(), m.m_yy);
    }
    o.require(worst_moment <= kMomentSEs, std::to_string(moment_checks) +
                                              " moment checks (1e6 draws), worst deviation " +
                                              num(worst_moment) + " SE");

    double worst_trace = 0;
    for (int trial = 0; trial < 3; ++trial) {
        DgpSpec spec = random_spec(30, 1 + trial, gen);
        const auto cov = build_covariance(spec);
        const JointMomentsd m = exact_moments(spec, cov);
        const auto pca = build_population_pca(cov, min_norm_blp(m, cov.eigensystem()), spec.K);
        const Sample s = simulate(spec, cov, 80, spec.seed);
        const PCRFit fit = pcr_fit(s, spec.K);
        const RotationPair rot = rotation_and_infeasible(fit, pca, s);
        const RiskDecomposition d = decompose_excess_risk(fit, rot, pca, m, s);
        const Sample fresh = simulate(spec, cov, 100000, stream_seed(spec.seed, 8));
        const VectorXd inv_sqrt = fit.eigvals_hat.head(spec.K).cwiseSqrt().cwiseInverse();
        const MatrixXd p_hat = (fresh.X * fit.V_hat_K) * inv_sqrt.asDiagonal();
        const VectorXd sq = (p_hat - pca.scores(fresh.X) * rot.H.transpose()).rowwise().squaredNorm();
        double mean = 0;
        const double se = batch_se(sq, mean);
        worst_trace = std::max(worst_trace, std::abs(mean - d.conditional_score_error) / se);
    }
    o.require(worst_trace <= kMomentSEs,
              "conditional score error tr(M Sigma M') vs 1e5 fresh draws, worst deviation " + num(worst_trace) +
                  " SE");
    return o;
}

// 9. Byte-identical sweep output under 1 and N threads.
Outcome determinism() {
    Outcome o;
    const fs::path dir = scratch_dir();
    const fs::path cfg = dir / "det.cfg";
    std::ofstream(cfg) << "T = 60, 120, 240\np_rule = 0.5*T\nK_rule = 2\nalpha = 0.8\nrho = 0.4\n"
                          "spike_constants = 2, 1\neigvec_style = haar\ntail_coefs = 0.5\n"
                          "replications = 40\nseed = 9009\ndiagnostics = true\n";
    const unsigned n = std::max(4u, worker_threads());
    std::vector<std::string> csv, summary;
    for (unsigned threads : {1u, n, 1u}) {
        const fs::path out = dir / ("det_" + std::to_string(csv.size()) + ".csv");
        const Command c = run_cli("sweep --config '" + cfg.string() + "' --out '" + out.string() + "' --threads " +
                                      std::to_string(threads),
                                  dir / "det.log");
        o.require(c.code == 0, "sweep with " + std::to_string(threads) + " thread(s) exit code " +
                                   std::to_string(c.code));
        csv.push_back(slurp(out));
        summary.push_back(slurp(out.string() + ".summary.json"));
    }
    o.require(!csv[0].empty() && csv[0] == csv[1] && csv[0] == csv[2],
              "cell CSV identical across 1, " + std::to_string(n) + ", 1 threads (" +
                  std::to_string(csv[0].size()) + " bytes)");
    o.require(summary[0] == summary[1] && summary[0] == summary[2], "summary JSON identical");
    return o;
}

struct Criterion {
    int id;
    const char* name;
    double time_limit_s;
    std::function<Outcome()> run;
};

} // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria = {
        {1, "population decomposition identities", 10, population_identities},
        {2, "formulation equivalence", 30, formulation_equivalence},
        {3, "excess-risk bound per replication", 300, excess_bound},
        {4, "strong-signal rate", 600, strong_signal},
        {5, "weak-signal approximation floor", 900, weak_signal},
        {6, "concentration diagnostics", 300, diagnostics},
        {7, "small-ball probe", 5, small_ball},
        {8, "closed form vs simulation", 600, closed_forms},
        {9, "determinism across thread counts", 300, determinism},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

    int failed = 0;
    for (const auto& c : criteria) {
        if (!selected.empty() && !selected.count(c.id)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        o.require(secs <= c.time_limit_s, "runtime " + num(secs) + " s (limit " + num(c.time_limit_s) + " s)");
        if (!o.passed) ++failed;
        std::cout << (o.passed ? "PASS" : "FAIL") << "  criterion " << c.id << ": " << c.name << '\n';
        for (const auto& d : o.details) std::cout << "        " << d << '\n';
        std::cout.flush();
    }
    std::error_code ec;
    fs::remove_all(fs::temp_directory_path() / ("pcrlab_acceptance_" + std::to_string(::getpid())), ec);
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criterion(s) failed") << '\n';
    return failed == 0 ? 0 : 1;
}
