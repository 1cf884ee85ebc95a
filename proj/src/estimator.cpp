#include "pcrlab/estimator.hpp"

#include <random>
#include <sstream>

#include <json.hpp>

namespace pcrlab {

namespace {

constexpr double kRankTolerance = 1e-12;
constexpr double kDegenerateGram = 1e-10;

struct LeadingPairs {
    VectorXd values; ///< all computed eigenvalues, non-increasing
    MatrixXd vectors;
};

void check_k(const Sample& sample, Index k) {
    if (k < 1 || k > std::min(sample.T(), sample.p())) {
        std::ostringstream msg;
        msg << "K = " << k << " must satisfy 1 <= K <= min(T, p) = " << std::min(sample.T(), sample.p());
        throw ValidationError(msg.str());
    }
    if (sample.Y.size() != sample.T()) throw ValidationError("sample: Y and X row counts differ");
}

void check_rank(const VectorXd& values, Index k) {
    const double top = values(0);
    const double lambda_k = values(k - 1);
    if (!(top > 0.0) || lambda_k <= kRankTolerance * top) {
        std::ostringstream msg;
        msg << "rank deficiency: lambda_hat_" << k << " = " << lambda_k
            << " is not above 1e-12 * lambda_hat_1 = " << kRankTolerance * top;
        throw RankDeficiencyError(msg.str(), static_cast<long>(k), lambda_k);
    }
}

MatrixXd orthonormal_columns(const MatrixXd& a) {
    Eigen::HouseholderQR<MatrixXd> qr(a);
    return qr.householderQ() * MatrixXd::Identity(a.rows(), a.cols());
}

// Orthonormal eigenvectors of X'X/T from those of XX'/T. Directions with
// eigenvalue below the rank cutoff, and the null space when p > T, are
// completed by an orthonormal complement.
LeadingPairs gram_eigenpairs(const MatrixXd& x) {
    const Index T = x.rows();
    const Index p = x.cols();
    const auto eig = symmetric_eig(MatrixXd(x * x.transpose() / static_cast<double>(T)));
    const double cutoff = kRankTolerance * std::max(eig.values(0), 0.0);

    Index rank = 0;
    while (rank < std::min(T, p) && eig.values(rank) > cutoff && eig.values(rank) > 0.0) ++rank;

    LeadingPairs out;
    out.values = VectorXd::Zero(p);
    out.vectors.resize(p, p);
    for (Index i = 0; i < rank; ++i) {
        out.values(i) = eig.values(i);
        out.vectors.col(i) =
            x.transpose() * eig.vectors.col(i) / std::sqrt(static_cast<double>(T) * eig.values(i));
    }
    if (rank < p) {
        // Remaining eigenvalues of X'X/T are numerically zero.
        for (Index i = rank; i < std::min(T, p); ++i) out.values(i) = std::max(eig.values(i), 0.0);
        Eigen::HouseholderQR<MatrixXd> qr(out.vectors.leftCols(rank));
        const MatrixXd q = qr.householderQ();
        out.vectors.rightCols(p - rank) = q.rightCols(p - rank);
    }
    normalize_signs(out.vectors);
    return out;
}

LeadingPairs subspace_iteration(const MatrixXd& x, Index k, const FitOptions& options) {
    const Index T = x.rows();
    const Index n = std::min(T, x.cols());
    const Index block = std::min(n, k + std::max<Index>(k, 8));
    const double inv_t = 1.0 / static_cast<double>(T);

    // Fixed starting block keeps the fit a deterministic function of X.
    std::mt19937_64 gen(0x70ca11ULL);
    std::normal_distribution<double> normal;
    MatrixXd start(T, block);
    for (Index i = 0; i < start.size(); ++i) start.data()[i] = normal(gen);
    MatrixXd q = orthonormal_columns(x.transpose() * start);

    for (int iter = 0; iter < options.leading_max_iterations; ++iter) {
        const MatrixXd z = x.transpose() * (x * q) * inv_t;
        const MatrixXd s = q.transpose() * z;
        const auto ritz = symmetric_eig(MatrixXd((s + s.transpose()) / 2.0));
        const MatrixXd qr = q * ritz.vectors;
        const MatrixXd zr = z * ritz.vectors;

        double worst = 0.0;
        for (Index i = 0; i < k; ++i) {
            worst = std::max(worst, (zr.col(i) - ritz.values(i) * qr.col(i)).norm());
        }
        if (worst <= options.leading_tolerance * std::max(ritz.values(0), 1e-300)) {
            LeadingPairs out;
            out.values = ritz.values.head(k);
            out.vectors = qr.leftCols(k);
            normalize_signs(out.vectors);
            return out;
        }
        q = orthonormal_columns(zr);
    }
    throw Error("pcr_fit: leading subspace iteration did not converge");
}

} // namespace

PCRFit pcr_fit(const Sample& sample, Index k, const FitOptions& options) {
    check_k(sample, k);
    const MatrixXd& x = sample.X;
    const Index T = sample.T();
    const Index p = sample.p();

    EigenPath path = options.path;
    if (path == EigenPath::Auto) path = p <= T ? EigenPath::Covariance : EigenPath::Gram;

    PCRFit fit;
    fit.K = k;
    fit.path = path;
    if (path == EigenPath::Covariance) {
        const auto eig = symmetric_eig(MatrixXd(x.transpose() * x / static_cast<double>(T)));
        check_rank(eig.values, k);
        fit.eigvals_hat = eig.values;
        fit.V_hat_K = eig.vectors.leftCols(k);
        fit.V_hat_R = eig.vectors.rightCols(p - k);
    } else if (path == EigenPath::Gram) {
        auto pairs = gram_eigenpairs(x);
        check_rank(pairs.values, k);
        fit.eigvals_hat = std::move(pairs.values);
        fit.V_hat_K = pairs.vectors.leftCols(k);
        fit.V_hat_R = pairs.vectors.rightCols(p - k);
    } else {
        auto pairs = subspace_iteration(x, k, options);
        check_rank(pairs.values, k);
        fit.eigvals_hat = std::move(pairs.values);
        fit.V_hat_K = std::move(pairs.vectors);
        fit.V_hat_R.resize(p, 0);
    }

    const VectorXd lambda_k = fit.eigvals_hat.head(k);
    fit.P_hat = x * fit.V_hat_K * lambda_k.cwiseSqrt().cwiseInverse().asDiagonal();
    fit.vartheta_hat = fit.P_hat.transpose() * sample.Y / static_cast<double>(T);
    fit.theta_hat = fit.V_hat_K * lambda_k.cwiseSqrt().cwiseInverse().asDiagonal() * fit.vartheta_hat;
    fit.B_hat = fit.V_hat_K * lambda_k.cwiseSqrt().asDiagonal();
    if (path != EigenPath::Leading) {
        fit.U_hat = x - fit.P_hat * fit.B_hat.transpose();
    }
    return fit;
}

VectorXd constrained_erm_fit(const Sample& sample, Index k) {
    check_k(sample, k);
    const double inv_t = 1.0 / static_cast<double>(sample.T());
    const auto eig = symmetric_eig(MatrixXd(sample.X.transpose() * sample.X * inv_t));
    check_rank(eig.values, k);
    const MatrixXd basis = eig.vectors.leftCols(k);
    // theta = basis a; minimize (1/T)||Y - X basis a||^2 over a.
    const MatrixXd z = sample.X * basis;
    const MatrixXd normal = z.transpose() * z * inv_t;
    const VectorXd rhs = z.transpose() * sample.Y * inv_t;
    const auto sol = min_norm_solve(normal, rhs, 1e-12);
    return basis * sol.x;
}

RotationPair rotation_and_infeasible(const PCRFit& fit, const PopulationPCAd& pca, const Sample& sample) {
    if (pca.K() != fit.K || pca.p() != fit.V_hat_K.rows() || sample.p() != pca.p()) {
        throw ValidationError("rotation_and_infeasible: dimensions of fit, population PCA and sample differ");
    }
    const Index T = sample.T();
    const double inv_t = 1.0 / static_cast<double>(T);
    const VectorXd lambda_hat = fit.eigvals_hat.head(fit.K);

    RotationPair out;
    out.H = lambda_hat.cwiseSqrt().cwiseInverse().asDiagonal() * (fit.V_hat_K.transpose() * pca.V_K) *
            pca.Lambda_K.cwiseSqrt().asDiagonal();

    const MatrixXd scores = pca.scores(sample.X);
    const MatrixXd gram = scores.transpose() * scores * inv_t;
    const VectorXd rhs = scores.transpose() * sample.Y * inv_t;
    const auto eig = symmetric_eig(gram);
    out.score_gram_min_eig = eig.values(eig.values.size() - 1);
    if (out.score_gram_min_eig < kDegenerateGram) {
        out.degenerate = true;
        out.vartheta_tilde = min_norm_solve(gram, rhs, 1e-12).x;
    } else {
        out.vartheta_tilde = gram.llt().solve(rhs);
    }

    Eigen::JacobiSVD<MatrixXd> svd(out.H);
    const VectorXd& sv = svd.singularValues();
    out.h_invertible = sv(sv.size() - 1) > 1e-12 * sv(0);
    return out;
}

double empirical_risk(const Sample& sample, const VectorXd& theta) {
    return (sample.Y - sample.X * theta).squaredNorm() / static_cast<double>(sample.T());
}

std::string fit_report_json(const PCRFit& fit, const Sample& sample) {
    const Index shown = std::min<Index>(fit.eigvals_hat.size(), 2 * fit.K + 10);
    nlohmann::ordered_json report;
    report["K"] = fit.K;
    report["T"] = sample.T();
    report["p"] = sample.p();
    report["eigvals_hat"] = std::vector<double>(fit.eigvals_hat.data(), fit.eigvals_hat.data() + shown);
    report["vartheta_hat"] =
        std::vector<double>(fit.vartheta_hat.data(), fit.vartheta_hat.data() + fit.vartheta_hat.size());
    report["theta_hat_norm"] = fit.theta_hat.norm();
    report["empirical_risk"] = empirical_risk(sample, fit.theta_hat);
    return report.dump(2) + "\n";
}

} // namespace pcrlab
