#include "pcrlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "pcrlab/sample_io.hpp"

namespace pcrlab {

namespace {

constexpr std::uint64_t kCellTag = 0xce11;
constexpr std::uint64_t kReplicationTag = 0x4e9;

std::string trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return std::string(s);
}

double parse_number(std::string_view text, std::string_view context) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
        throw ValidationError("grid rule '" + std::string(context) + "': invalid number '" + t + "'");
    }
    return v;
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double standard_error(const std::vector<double>& v) {
    if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

double fraction(Index count, Index total) {
    return total == 0 ? std::numeric_limits<double>::quiet_NaN()
                      : static_cast<double>(count) / static_cast<double>(total);
}

std::string csv_number(double v) { return std::isfinite(v) ? format_double(v) : std::string(); }

// Spectral norm of a difference of symmetric matrices. Rounding leaves an
// asymmetry that is large relative to a near-zero difference.
double symmetric_gap_norm(const MatrixXd& a, const MatrixXd& b) {
    const MatrixXd diff = a - b;
    return symmetric_spectral_norm(MatrixXd(0.5 * (diff + diff.transpose())));
}

} // namespace

Index GridRule::evaluate(Index T) const {
    const double raw = coef * std::pow(static_cast<double>(T), power);
    Index n = static_cast<Index>(std::floor(raw + 1e-9 * std::max(1.0, raw)));
    if (cap > 0) n = std::min(n, cap);
    return n;
}

std::string GridRule::to_string() const {
    std::string s = power == 0.0 ? format_double(coef) : format_double(coef) + "*T^" + format_double(power);
    if (cap > 0) s += " (cap " + std::to_string(cap) + ")";
    return s;
}

GridRule GridRule::parse(std::string_view text) {
    const std::string t = trim(text);
    if (t.empty()) throw ValidationError("grid rule is empty");
    GridRule rule;
    const std::size_t tpos = t.find('T');
    if (tpos == std::string::npos) {
        rule.coef = parse_number(t, t);
        return rule;
    }
    std::string_view head(t.data(), tpos);
    std::string_view tail(t.data() + tpos + 1, t.size() - tpos - 1);
    const std::string head_trim = trim(head);
    if (!head_trim.empty()) {
        if (head_trim.back() != '*') throw ValidationError("grid rule '" + t + "': expected C*T^r");
        rule.coef = parse_number(std::string_view(head_trim).substr(0, head_trim.size() - 1), t);
    }
    const std::string tail_trim = trim(tail);
    if (tail_trim.empty()) {
        rule.power = 1.0;
    } else {
        if (tail_trim.front() != '^') throw ValidationError("grid rule '" + t + "': expected C*T^r");
        rule.power = parse_number(std::string_view(tail_trim).substr(1), t);
    }
    if (!(rule.coef > 0.0) || !std::isfinite(rule.power)) {
        throw ValidationError("grid rule '" + t + "': coefficient must be positive");
    }
    return rule;
}

std::vector<GridPoint> make_grid(const std::vector<Index>& sample_sizes, const GridRule& p_rule,
                                 const GridRule& k_rule) {
    std::vector<GridPoint> grid;
    grid.reserve(sample_sizes.size());
    for (Index T : sample_sizes) grid.push_back({T, p_rule.evaluate(T), k_rule.evaluate(T)});
    return grid;
}

void validate(const SweepConfig& config) {
    if (config.grid.empty()) throw ValidationError("sweep: grid is empty");
    if (config.replications < 1) throw ValidationError("sweep: replications must be at least 1");
    if (config.threads < 1) throw ValidationError("sweep: threads must be at least 1");
    if (config.dgp.spike_constants.empty()) throw ValidationError("sweep: spike_constants is empty");
    for (const auto& g : config.grid) {
        if (g.T < 1 || g.p < 1 || g.K < 1 || g.K > std::min(g.T, g.p)) {
            throw ValidationError("sweep: cell (T=" + std::to_string(g.T) + ", p=" + std::to_string(g.p) +
                                  ", K=" + std::to_string(g.K) + ") violates 1 <= K <= min(T, p)");
        }
    }
    if (!(config.r_alpha_proxy > 0.0)) throw ValidationError("sweep: r_alpha_proxy must be positive");
}

CellSetup make_cell(const SweepConfig& config, std::size_t cell_index) {
    const GridPoint& point = config.grid.at(cell_index);
    const DgpTemplate& d = config.dgp;
    CellSetup cell;
    cell.point = point;

    DgpSpec& spec = cell.spec;
    spec.p = point.p;
    spec.K = point.K;
    spec.alpha = d.alpha;
    spec.spike_constants.resize(point.K);
    for (Index i = 0; i < point.K; ++i) {
        const std::size_t j = std::min<std::size_t>(static_cast<std::size_t>(i), d.spike_constants.size() - 1);
        spec.spike_constants(i) = d.spike_constants[j];
    }
    spec.tail_constants = VectorXd::Constant(point.p - point.K, d.tail_constant);
    spec.rho = d.rho;
    spec.link = d.link;
    spec.noise_sd = d.noise_sd;
    spec.eigvec_style = d.eigvec_style;
    spec.seed = stream_seed(config.seed, kCellTag, cell_index);

    cell.cov = build_covariance(spec);
    const VectorXd score = Eigen::Map<const VectorXd>(d.score_coefs.data(), static_cast<Index>(d.score_coefs.size()));
    const VectorXd tail = Eigen::Map<const VectorXd>(d.tail_coefs.data(), static_cast<Index>(d.tail_coefs.size()));
    spec.theta = theta_from_eigen_coefficients(cell.cov, score, tail);
    spec.quad_coef = d.quad_coef;
    if (d.link == Link::LinearPlusQuadratic) {
        spec.quad_weights = unit_variance_direction(cell.cov, d.quad_direction);
    }
    validate(spec);

    cell.moments = exact_moments(spec, cell.cov);
    const VectorXd theta_star = min_norm_blp(cell.moments, cell.cov.eigensystem());
    cell.pca = build_population_pca(cell.cov, theta_star, point.K);
    cell.approximation_error = approximation_error(cell.pca);
    return cell;
}

std::uint64_t replication_seed(std::uint64_t seed, std::size_t cell_index, Index replication) {
    return stream_seed(seed ^ kReplicationTag, cell_index, static_cast<std::uint64_t>(replication));
}

EigenPath effective_fit_path(const SweepConfig& config, const GridPoint& point) {
    if (config.fit_path == EigenPath::Auto && std::min(point.T, point.p) > 400) return EigenPath::Leading;
    return config.fit_path;
}

Diagnostics concentration_diagnostics(const Sample& sample, const PCRFit& fit, const PopulationPCAd& pca,
                                      const RotationPair& rot) {
    const Index T = sample.T();
    const Index K = fit.K;
    const double inv_t = 1.0 / static_cast<double>(T);
    const double spike_floor = pca.Lambda_K(K - 1); // c_K p^alpha

    Diagnostics d;
    d.lambda_hat_K = fit.eigvals_hat(K - 1);
    d.eigenvalue_event = d.lambda_hat_K >= spike_floor / 2.0;

    const MatrixXd sigma_hat = sample.X.transpose() * sample.X * inv_t;
    d.cov_deviation = symmetric_gap_norm(sigma_hat, pca.sigma());
    d.cov_deviation_event = d.cov_deviation <= spike_floor / 2.0;

    const MatrixXd scores = pca.scores(sample.X);
    const MatrixXd gram = scores.transpose() * scores * inv_t;
    d.score_gram_deviation = symmetric_gap_norm(gram, MatrixXd::Identity(K, K));
    d.score_gram_min_eig = symmetric_eig(gram).values(K - 1);
    d.score_gram_event = d.score_gram_min_eig > 0.5;

    // (1/T) P'U = (1/T) P'X V_R V_R'; V_R has orthonormal columns.
    d.score_idio_cross = spectral_norm(MatrixXd(scores.transpose() * sample.X * pca.V_R * inv_t));
    d.rotation_deviation = symmetric_gap_norm(rot.H * rot.H.transpose(), MatrixXd::Identity(K, K));
    d.score_estimation_error =
        spectral_norm(MatrixXd(fit.P_hat - scores * rot.H.transpose())) / std::sqrt(static_cast<double>(T));
    const MatrixXd idio = pca.V_R.transpose() * sigma_hat * pca.V_R;
    d.idio_cov_deviation = symmetric_gap_norm(idio, MatrixXd(pca.Lambda_R.asDiagonal()));
    return d;
}

ReplicationResult run_replication(const SweepConfig& config, const CellSetup& cell, std::size_t cell_index,
                                  Index replication) {
    ReplicationResult out;
    out.cell = cell_index;
    out.replication = replication;
    out.seed = replication_seed(config.seed, cell_index, replication);
    try {
        const Sample sample = simulate(cell.spec, cell.cov, cell.point.T, out.seed);
        FitOptions options;
        options.path = effective_fit_path(config, cell.point);
        const PCRFit fit = pcr_fit(sample, cell.point.K, options);
        const RotationPair rot = rotation_and_infeasible(fit, cell.pca, sample);
        out.decomposition = decompose_excess_risk(fit, rot, cell.pca, cell.moments, sample);
        out.rate = residual_rate_inputs(out.decomposition, cell.point.T, cell.point.p, cell.point.K,
                                                 cell.spec.alpha, config.r_alpha_proxy);
        if (config.diagnostics) out.diagnostics = concentration_diagnostics(sample, fit, cell.pca, rot);
    } catch (const Error& e) {
        out.failed = true;
        out.failure = e.what();
    }
    return out;
}

CellResult aggregate_cell(const CellSetup& cell, const std::vector<ReplicationResult>& replications) {
    CellResult r;
    r.point = cell.point;
    r.replications = static_cast<Index>(replications.size());
    r.approximation_error = cell.approximation_error;

    std::vector<double> excess, residual, pc, rotation, ls, approx;
    std::vector<double> rot_dev, score_err, cov_dev, gram_dev, cross, idio;
    Index eig_events = 0, cov_events = 0, gram_events = 0, diag_count = 0;
    for (const auto& rep : replications) {
        if (rep.failed) {
            ++r.failures;
            continue;
        }
        const auto& d = rep.decomposition;
        if (d.degenerate) ++r.degenerate;
        if (!d.bound_holds()) ++r.slack_violations;
        excess.push_back(d.excess_risk_exact);
        residual.push_back(rep.rate.estimation_residual);
        pc.push_back(d.term_pc_estimation);
        rotation.push_back(d.term_rotation_gap);
        ls.push_back(d.term_ls_gap);
        approx.push_back(d.term_approx);
        r.rate = rep.rate.rate;
        if (rep.diagnostics) {
            const auto& g = *rep.diagnostics;
            ++diag_count;
            eig_events += g.eigenvalue_event;
            cov_events += g.cov_deviation_event;
            gram_events += g.score_gram_event;
            rot_dev.push_back(g.rotation_deviation);
            score_err.push_back(g.score_estimation_error);
            cov_dev.push_back(g.cov_deviation);
            gram_dev.push_back(g.score_gram_deviation);
            cross.push_back(g.score_idio_cross);
            idio.push_back(g.idio_cov_deviation);
        }
    }
    r.flagged = 10 * r.failures > r.replications;
    r.mean_excess = mean_of(excess);
    r.median_excess = median_of(excess);
    r.se_excess = standard_error(excess);
    r.mean_estimation_residual = mean_of(residual);
    r.median_estimation_residual = median_of(residual);
    r.se_estimation_residual = standard_error(residual);
    r.mean_term_pc_estimation = mean_of(pc);
    r.mean_term_rotation_gap = mean_of(rotation);
    r.mean_term_ls_gap = mean_of(ls);
    r.mean_term_approx = mean_of(approx);
    if (excess.empty()) r.rate = std::numeric_limits<double>::quiet_NaN();

    r.has_diagnostics = diag_count > 0;
    if (r.has_diagnostics) {
        r.freq_eigenvalue_event = fraction(eig_events, diag_count);
        r.freq_cov_deviation_event = fraction(cov_events, diag_count);
        r.freq_score_gram_event = fraction(gram_events, diag_count);
        r.median_rotation_deviation = median_of(rot_dev);
        r.median_score_estimation_error = median_of(score_err);
        r.mean_cov_deviation = mean_of(cov_dev);
        r.mean_score_gram_deviation = mean_of(gram_dev);
        r.mean_score_idio_cross = mean_of(cross);
        r.mean_idio_cov_deviation = mean_of(idio);
    }
    return r;
}

SweepResult run_sweep(const SweepConfig& config) {
    validate(config);
    SweepResult result;
    const Index reps = config.replications;
    for (std::size_t c = 0; c < config.grid.size(); ++c) {
        const CellSetup cell = make_cell(config, c);
        std::vector<ReplicationResult> cell_reps(static_cast<std::size_t>(reps));
        std::atomic<Index> next{0};
        auto worker = [&] {
            for (Index r = next++; r < reps; r = next++) {
                cell_reps[static_cast<std::size_t>(r)] = run_replication(config, cell, c, r);
            }
        };
        const unsigned n_threads = static_cast<unsigned>(std::min<Index>(config.threads, reps));
        if (n_threads <= 1) {
            worker();
        } else {
            std::vector<std::jthread> pool;
            pool.reserve(n_threads);
            for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        }
        result.cells.push_back(aggregate_cell(cell, cell_reps));
        for (auto& rep : cell_reps) result.replications.push_back(std::move(rep));
    }
    return result;
}

RateFit fit_rate(const std::vector<CellResult>& cells, const ResponseSelector& response) {
    std::vector<double> xs, ys;
    RateFit fit;
    for (const auto& c : cells) {
        const double y = response(c);
        if (!(y > 0.0) || !std::isfinite(y) || c.point.T < 1) {
            ++fit.excluded;
            continue;
        }
        xs.push_back(std::log(static_cast<double>(c.point.T)));
        ys.push_back(std::log(y));
    }
    fit.used = static_cast<Index>(xs.size());
    if (fit.used < 3) {
        throw InsufficientDataError("fit_rate: need at least 3 cells with positive response, have " +
                                    std::to_string(fit.used));
    }
    const double mx = mean_of(xs);
    const double my = mean_of(ys);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (!(sxx > 0.0)) throw InsufficientDataError("fit_rate: all usable cells share the same T");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    const double ss_res = syy - fit.slope * sxy;
    fit.r_squared = syy > 0.0 ? 1.0 - std::max(ss_res, 0.0) / syy : 1.0;
    return fit;
}

ResponseSelector response_by_name(std::string_view name) {
    if (name == "mean_excess") return [](const CellResult& c) { return c.mean_excess; };
    if (name == "median_excess") return [](const CellResult& c) { return c.median_excess; };
    if (name == "mean_estimation_residual") return [](const CellResult& c) { return c.mean_estimation_residual; };
    if (name == "median_estimation_residual") {
        return [](const CellResult& c) { return c.median_estimation_residual; };
    }
    if (name == "median_rotation_deviation") {
        return [](const CellResult& c) { return c.median_rotation_deviation; };
    }
    throw ValidationError("unknown response '" + std::string(name) + "'");
}

CheckOutcome evaluate_check(const SweepResult& result, const SweepCheck& check) {
    CheckOutcome out;
    out.passed = true;
    for (const auto& c : result.cells) {
        if (c.flagged) {
            out.passed = false;
            out.messages.push_back("cell T=" + std::to_string(c.point.T) + " p=" + std::to_string(c.point.p) +
                                   " has more than 10% failed replications");
        }
    }
    if (check.mode == CheckMode::Bound) {
        Index violations = 0, degenerate = 0, total = 0;
        for (const auto& c : result.cells) {
            violations += c.slack_violations;
            degenerate += c.degenerate;
            total += c.replications - c.failures;
        }
        if (violations > 0) {
            out.passed = false;
            out.messages.push_back(std::to_string(violations) + " replications violate the excess-risk bound");
        }
        const double frac = fraction(degenerate, total);
        if (!(frac < check.max_degenerate_fraction)) {
            out.passed = false;
            out.messages.push_back("degenerate fraction " + format_double(frac) + " is not below " +
                                   format_double(check.max_degenerate_fraction));
        }
        if (out.passed) out.messages.push_back("bound holds on every non-degenerate replication");
        return out;
    }
    try {
        const RateFit fit = fit_rate(result.cells, response_by_name(check.response));
        out.fit = fit;
        if (fit.slope < check.slope_min || fit.slope > check.slope_max) {
            out.passed = false;
            out.messages.push_back("slope " + format_double(fit.slope) + " outside [" +
                                   format_double(check.slope_min) + ", " + format_double(check.slope_max) + "]");
        }
        if (fit.r_squared < check.r2_min) {
            out.passed = false;
            out.messages.push_back("R^2 " + format_double(fit.r_squared) + " below " + format_double(check.r2_min));
        }
        if (out.passed) out.messages.push_back("slope " + format_double(fit.slope) + " within band");
    } catch (const InsufficientDataError& e) {
        out.passed = false;
        out.messages.push_back(e.what());
    }
    return out;
}

std::string cells_csv(const std::vector<CellResult>& cells) {
    std::ostringstream out;
    out << "T,p,K,replications,failures,degenerate,flagged,slack_violations,mean_excess,median_excess,se_excess,"
           "mean_estimation_residual,median_estimation_residual,se_estimation_residual,approximation_error,"
           "mean_term_pc_estimation,mean_term_rotation_gap,mean_term_ls_gap,mean_term_approx,rate,"
           "freq_eigenvalue_event,freq_cov_deviation_event,freq_score_gram_event,median_rotation_deviation,"
           "median_score_estimation_error,mean_cov_deviation,mean_score_gram_deviation,mean_score_idio_cross,"
           "mean_idio_cov_deviation\n";
    for (const auto& c : cells) {
        out << c.point.T << ',' << c.point.p << ',' << c.point.K << ',' << c.replications << ',' << c.failures
            << ',' << c.degenerate << ',' << (c.flagged ? 1 : 0) << ',' << c.slack_violations;
        for (double v : {c.mean_excess, c.median_excess, c.se_excess, c.mean_estimation_residual,
                         c.median_estimation_residual, c.se_estimation_residual, c.approximation_error,
                         c.mean_term_pc_estimation, c.mean_term_rotation_gap, c.mean_term_ls_gap,
                         c.mean_term_approx, c.rate}) {
            out << ',' << csv_number(v);
        }
        for (double v : {c.freq_eigenvalue_event, c.freq_cov_deviation_event, c.freq_score_gram_event,
                         c.median_rotation_deviation, c.median_score_estimation_error, c.mean_cov_deviation,
                         c.mean_score_gram_deviation, c.mean_score_idio_cross, c.mean_idio_cov_deviation}) {
            out << ',' << (c.has_diagnostics ? csv_number(v) : std::string());
        }
        out << '\n';
    }
    return out.str();
}

std::string decompositions_csv(const SweepConfig& config, const SweepResult& result) {
    std::ostringstream out;
    out << decomposition_csv_header() << '\n';
    for (const auto& rep : result.replications) {
        if (rep.failed) continue;
        const GridPoint& g = config.grid.at(rep.cell);
        out << decomposition_csv_row(rep.decomposition, g.T, g.p, g.K, config.dgp.alpha, config.dgp.rho, rep.seed)
            << '\n';
    }
    return out.str();
}

std::string diagnostics_csv(const SweepConfig& config, const SweepResult& result) {
    std::ostringstream out;
    out << "T,p,K,seed,lambda_hat_K,eigenvalue_event,cov_deviation,cov_deviation_event,score_gram_deviation,"
           "score_gram_min_eig,score_gram_event,score_idio_cross,rotation_deviation,score_estimation_error,"
           "idio_cov_deviation\n";
    for (const auto& rep : result.replications) {
        if (rep.failed || !rep.diagnostics) continue;
        const GridPoint& g = config.grid.at(rep.cell);
        const Diagnostics& d = *rep.diagnostics;
        out << g.T << ',' << g.p << ',' << g.K << ',' << rep.seed << ',' << format_double(d.lambda_hat_K) << ','
            << d.eigenvalue_event << ',' << format_double(d.cov_deviation) << ',' << d.cov_deviation_event << ','
            << format_double(d.score_gram_deviation) << ',' << format_double(d.score_gram_min_eig) << ','
            << d.score_gram_event << ',' << format_double(d.score_idio_cross) << ','
            << format_double(d.rotation_deviation) << ',' << format_double(d.score_estimation_error) << ','
            << format_double(d.idio_cov_deviation) << '\n';
    }
    return out.str();
}

std::string summary_json(const SweepConfig& config, const SweepResult& result, const SweepCheck& check,
                         const std::optional<CheckOutcome>& outcome) {
    nlohmann::ordered_json j;
    j["note"] = "replication counts and slope tolerance bands are engineering choices, not derived bounds";
    j["seed"] = config.seed;
    j["replications"] = config.replications;
    j["cells"] = result.cells.size();
    nlohmann::ordered_json slopes = nlohmann::ordered_json::object();
    for (const char* name : {"mean_excess", "median_excess", "mean_estimation_residual",
                             "median_estimation_residual"}) {
        try {
            const RateFit f = fit_rate(result.cells, response_by_name(name));
            slopes[name] = {{"slope", f.slope}, {"intercept", f.intercept}, {"r_squared", f.r_squared},
                            {"used", f.used}, {"excluded", f.excluded}};
        } catch (const InsufficientDataError& e) {
            slopes[name] = {{"error", e.what()}};
        }
    }
    j["slopes"] = slopes;
    nlohmann::ordered_json c;
    c["mode"] = check.mode == CheckMode::Rate ? "rate" : "bound";
    if (check.mode == CheckMode::Rate) {
        c["response"] = check.response;
        c["slope_band"] = {check.slope_min, check.slope_max};
        c["r2_min"] = check.r2_min;
    } else {
        c["max_degenerate_fraction"] = check.max_degenerate_fraction;
    }
    if (outcome) {
        c["passed"] = outcome->passed;
        c["messages"] = outcome->messages;
    }
    j["check"] = c;
    return j.dump(2) + "\n";
}

} // namespace pcrlab
