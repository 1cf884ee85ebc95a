#pragma once

// Synthetic data: spiked covariance, stationary Gaussian VAR(1) predictors
// and linear or linear-plus-quadratic targets, with closed-form moments.

#include <cstdint>
#include <string>
#include <string_view>

#include "pcrlab/linmodel.hpp"

namespace pcrlab {

enum class Link { Linear, LinearPlusQuadratic };
enum class EigvecStyle { Identity, Haar };

std::string_view to_string(Link link);
std::string_view to_string(EigvecStyle style);
Link parse_link(std::string_view text);
EigvecStyle parse_eigvec_style(std::string_view text);

/// Data-generating process.
///
/// X_t = rho X_{t-1} + eps_t with eps_t ~ N(0, (1 - rho^2) Sigma) and
/// X_0 ~ N(0, Sigma), so every X_t has covariance Sigma. The target is
///   Y_t = theta' X_t + quad_coef ((w' X_t)^2 - w' Sigma w) + noise_sd e_t
/// where the quadratic part is present only for the linear_plus_quadratic
/// link (w = quad_weights).
struct DgpSpec {
    Index p = 0;
    Index K = 0;
    double alpha = 1.0;
    VectorXd spike_constants;
    VectorXd tail_constants;
    double rho = 0.0;
    Link link = Link::Linear;
    VectorXd theta;
    double quad_coef = 0.0;
    VectorXd quad_weights;
    double noise_sd = 1.0;
    EigvecStyle eigvec_style = EigvecStyle::Identity;
    std::uint64_t seed = 0;
};

void validate(const DgpSpec& spec);

struct Sample {
    MatrixXd X; ///< T x p, one observation per row
    VectorXd Y; ///< T
    DgpSpec spec;
    std::uint64_t seed_used = 0;

    Index T() const { return X.rows(); }
    Index p() const { return X.cols(); }
};

/// Derives an independent 64-bit stream seed from a base seed and up to two
/// stream coordinates (e.g. cell and replication index).
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

/// Haar-distributed orthogonal matrix: QR of a standard Gaussian matrix with
/// the signs of R's diagonal absorbed into Q.
MatrixXd haar_orthogonal(Index p, std::uint64_t seed);

CovarianceModeld build_covariance(const DgpSpec& spec);

/// theta = V_K Lambda_K^{-1/2} score_coefs + sum_j tail_coefs(j) v_{K+j}.
/// The best linear predictor then has vartheta* = score_coefs and
/// approximation error sum_j tail_coefs(j)^2 lambda_{K+j}. Missing
/// coefficients are zero.
VectorXd theta_from_eigen_coefficients(const CovarianceModeld& cov, const VectorXd& score_coefs,
                                       const VectorXd& tail_coefs);

/// v_j / sqrt(lambda_j) for 1-based j, so that w'X_t is standard normal.
VectorXd unit_variance_direction(const CovarianceModeld& cov, Index j);

Sample simulate(const DgpSpec& spec, Index T);

/// Simulation against a prebuilt covariance (shared across replications).
Sample simulate(const DgpSpec& spec, const CovarianceModeld& cov, Index T, std::uint64_t seed);

JointMomentsd exact_moments(const DgpSpec& spec);
JointMomentsd exact_moments(const DgpSpec& spec, const CovarianceModeld& cov);

struct SmallBallProbe {
    double min_frequency = 0.0;
    VectorXd frequencies; ///< one per usable direction
    Index draws = 0;
};

/// Empirical small-ball frequencies P(|d'X_t| >= kappa1 ||d'X_t||_{L2}) over
/// random unit directions d, using one simulated path of `draws`
/// observations for all directions.
SmallBallProbe probe_small_ball(const DgpSpec& spec, double kappa1, Index directions, Index draws);

} // namespace pcrlab
