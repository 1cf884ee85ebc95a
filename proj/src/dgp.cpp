#include "pcrlab/dgp.hpp"

#include <cmath>
#include <random>

namespace pcrlab {

namespace {

constexpr std::uint64_t kHaarStream = 0x4a11;
constexpr std::uint64_t kSampleStream = 0x5a3f;
constexpr std::uint64_t kProbeStream = 0x9b0e;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

void fill_normal(double* data, Index n, std::mt19937_64& gen) {
    std::normal_distribution<double> normal;
    for (Index i = 0; i < n; ++i) data[i] = normal(gen);
}

} // namespace

std::string_view to_string(Link link) {
    return link == Link::Linear ? "linear" : "linear_plus_quadratic";
}

std::string_view to_string(EigvecStyle style) {
    return style == EigvecStyle::Identity ? "identity" : "haar";
}

Link parse_link(std::string_view text) {
    if (text == "linear") return Link::Linear;
    if (text == "linear_plus_quadratic") return Link::LinearPlusQuadratic;
    throw ValidationError("unsupported link '" + std::string(text) + "'");
}

EigvecStyle parse_eigvec_style(std::string_view text) {
    if (text == "identity") return EigvecStyle::Identity;
    if (text == "haar") return EigvecStyle::Haar;
    throw ValidationError("unsupported eigvec_style '" + std::string(text) + "'");
}

void validate(const DgpSpec& spec) {
    if (spec.p < 1) throw ValidationError("dgp: p must be at least 1");
    if (spec.K < 1 || spec.K > spec.p) throw ValidationError("dgp: need 1 <= K <= p");
    if (spec.spike_constants.size() != spec.K || spec.tail_constants.size() != spec.p - spec.K) {
        throw ValidationError("dgp: need K spike constants and p - K tail constants");
    }
    if (!(spec.rho >= 0.0 && spec.rho < 1.0)) throw ValidationError("dgp: rho must lie in [0, 1)");
    if (!(spec.noise_sd >= 0.0) || !std::isfinite(spec.noise_sd)) {
        throw ValidationError("dgp: noise_sd must be finite and nonnegative");
    }
    if (spec.theta.size() != spec.p || !spec.theta.allFinite()) {
        throw ValidationError("dgp: theta must be a finite p-vector");
    }
    if (spec.link == Link::LinearPlusQuadratic) {
        if (!std::isfinite(spec.quad_coef)) throw ValidationError("dgp: quad_coef must be finite");
        if (spec.quad_weights.size() != spec.p || !spec.quad_weights.allFinite()) {
            throw ValidationError("dgp: quad_weights must be a finite p-vector");
        }
    }
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ (b * 0xd1342543de82ef95ULL));
}

MatrixXd haar_orthogonal(Index p, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    MatrixXd g(p, p);
    fill_normal(g.data(), g.size(), gen);
    Eigen::HouseholderQR<MatrixXd> qr(g);
    MatrixXd q = qr.householderQ() * MatrixXd::Identity(p, p);
    const MatrixXd& r = qr.matrixQR();
    for (Index j = 0; j < p; ++j) {
        if (r(j, j) < 0) q.col(j) *= -1;
    }
    return q;
}

CovarianceModeld build_covariance(const DgpSpec& spec) {
    if (spec.p < 1) throw ValidationError("dgp: p must be at least 1");
    MatrixXd v = spec.eigvec_style == EigvecStyle::Identity
                     ? MatrixXd::Identity(spec.p, spec.p)
                     : haar_orthogonal(spec.p, stream_seed(spec.seed, kHaarStream));
    return make_covariance_model<double>(spec.K, spec.alpha, spec.spike_constants,
                                         spec.tail_constants, std::move(v));
}

VectorXd theta_from_eigen_coefficients(const CovarianceModeld& cov, const VectorXd& score_coefs,
                                       const VectorXd& tail_coefs) {
    VectorXd theta = VectorXd::Zero(cov.p);
    for (Index j = 0; j < std::min(cov.K, score_coefs.size()); ++j) {
        theta += cov.V.col(j) * (score_coefs(j) / std::sqrt(cov.Lambda(j)));
    }
    for (Index j = 0; j < std::min(cov.p - cov.K, tail_coefs.size()); ++j) {
        theta += cov.V.col(cov.K + j) * tail_coefs(j);
    }
    return theta;
}

VectorXd unit_variance_direction(const CovarianceModeld& cov, Index j) {
    if (j < 1 || j > cov.p || !(cov.Lambda(j - 1) > 0)) {
        throw ValidationError("unit_variance_direction: index out of range or zero eigenvalue");
    }
    return cov.V.col(j - 1) / std::sqrt(cov.Lambda(j - 1));
}

Sample simulate(const DgpSpec& spec, Index T) {
    return simulate(spec, build_covariance(spec), T, spec.seed);
}

Sample simulate(const DgpSpec& spec, const CovarianceModeld& cov, Index T, std::uint64_t seed) {
    validate(spec);
    if (T < 1) throw ValidationError("simulate: T must be at least 1");
    if (cov.p != spec.p) throw ValidationError("simulate: covariance dimension differs from spec");
    const Index p = spec.p;

    std::mt19937_64 gen(stream_seed(seed, kSampleStream));
    // Column t holds the standardized state at time t.
    MatrixXd w(p, T);
    fill_normal(w.data(), w.size(), gen);
    VectorXd e(T);
    fill_normal(e.data(), T, gen);

    if (spec.rho > 0.0) {
        const double innovation = std::sqrt(1.0 - spec.rho * spec.rho);
        for (Index t = 1; t < T; ++t) {
            w.col(t) = spec.rho * w.col(t - 1) + innovation * w.col(t);
        }
    }
    w = cov.Lambda.cwiseMax(0.0).cwiseSqrt().asDiagonal() * w;

    Sample sample;
    if (cov.V.isIdentity(0.0)) {
        sample.X = w.transpose();
    } else {
        sample.X = (cov.V * w).transpose();
    }
    sample.Y = sample.X * spec.theta;
    if (spec.link == Link::LinearPlusQuadratic && spec.quad_coef != 0.0) {
        const VectorXd proj = sample.X * spec.quad_weights;
        const VectorXd lam_w = cov.V.transpose() * spec.quad_weights;
        const double var_w = lam_w.dot(cov.Lambda.asDiagonal() * lam_w);
        sample.Y.array() += spec.quad_coef * (proj.array().square() - var_w);
    }
    if (spec.noise_sd > 0.0) sample.Y += spec.noise_sd * e;
    sample.spec = spec;
    sample.seed_used = seed;
    return sample;
}

JointMomentsd exact_moments(const DgpSpec& spec) {
    return exact_moments(spec, build_covariance(spec));
}

JointMomentsd exact_moments(const DgpSpec& spec, const CovarianceModeld& cov) {
    validate(spec);
    JointMomentsd m;
    m.Sigma = cov.sigma();
    m.sigma_xy = m.Sigma * spec.theta;
    m.m_yy = spec.theta.dot(m.sigma_xy) + spec.noise_sd * spec.noise_sd;
    if (spec.link == Link::LinearPlusQuadratic) {
        // E[X (w'X)^2] = 0 for Gaussian X, Var((w'X)^2) = 2 (w'Sigma w)^2.
        const double var_w = spec.quad_weights.dot(m.Sigma * spec.quad_weights);
        m.m_yy += spec.quad_coef * spec.quad_coef * 2.0 * var_w * var_w;
    }
    return m;
}

SmallBallProbe probe_small_ball(const DgpSpec& spec, double kappa1, Index directions, Index draws) {
    if (!(kappa1 >= 0.0)) throw ValidationError("probe_small_ball: kappa1 must be nonnegative");
    if (directions < 1 || draws < 1) {
        throw ValidationError("probe_small_ball: need at least one direction and one draw");
    }
    const CovarianceModeld cov = build_covariance(spec);
    const MatrixXd sigma = cov.sigma();
    const Sample sample = simulate(spec, cov, draws, spec.seed);

    std::mt19937_64 gen(stream_seed(spec.seed, kProbeStream));
    const double null_cut = 1e-14 * std::max(cov.Lambda.maxCoeff(), 1e-300);
    std::vector<double> freqs;
    VectorXd delta(spec.p);
    for (Index d = 0; d < directions; ++d) {
        fill_normal(delta.data(), spec.p, gen);
        delta.normalize();
        const double var = delta.dot(sigma * delta);
        if (!(var > null_cut)) continue;
        const double threshold = kappa1 * std::sqrt(var);
        const VectorXd proj = sample.X * delta;
        const Index hits = (proj.array().abs() >= threshold).count();
        freqs.push_back(static_cast<double>(hits) / static_cast<double>(draws));
    }
    if (freqs.empty()) {
        throw ValidationError("probe_small_ball: every sampled direction has zero variance");
    }
    SmallBallProbe out;
    out.frequencies = Eigen::Map<const VectorXd>(freqs.data(), static_cast<Index>(freqs.size()));
    out.min_frequency = out.frequencies.minCoeff();
    out.draws = draws;
    return out;
}

} // namespace pcrlab
