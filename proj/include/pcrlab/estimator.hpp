#pragma once

// Principal component regression: the two-step (scores, then least squares)
// estimator, its constrained least squares form, the rotation matrix H that
// aligns sample and population scores, and least squares on the population
// scores.

#include <string>

#include "pcrlab/dgp.hpp"

namespace pcrlab {

/// How the leading eigenpairs of the sample covariance are obtained.
///  - Covariance: full eigendecomposition of X'X/T (p x p).
///  - Gram: full eigendecomposition of XX'/T (T x T), mapped back with X'.
///  - Leading: block subspace iteration on X'X/T for the leading K pairs
///    only; the residual eigenspace and residual matrix are left empty.
///  - Auto: Covariance when p <= T, Gram otherwise.
enum class EigenPath { Auto, Covariance, Gram, Leading };

struct FitOptions {
    EigenPath path = EigenPath::Auto;
    /// Relative residual at which the Leading path stops iterating.
    double leading_tolerance = 1e-12;
    int leading_max_iterations = 2000;
};

struct PCRFit {
    Index K = 0;
    EigenPath path = EigenPath::Auto;
    /// Sample covariance eigenvalues, non-increasing. All p of them for the
    /// full paths, only the leading K for EigenPath::Leading.
    VectorXd eigvals_hat;
    MatrixXd V_hat_K;      ///< p x K
    MatrixXd V_hat_R;      ///< p x (p - K), empty for EigenPath::Leading
    MatrixXd P_hat;        ///< T x K, (1/T) P'P = I_K
    VectorXd vartheta_hat; ///< P'Y / T
    VectorXd theta_hat;    ///< V_K Lambda_K^{-1/2} vartheta_hat
    MatrixXd B_hat;        ///< V_K Lambda_K^{1/2}
    MatrixXd U_hat;        ///< X - P B', empty for EigenPath::Leading

    bool has_residual_space() const { return path != EigenPath::Leading; }
    VectorXd leading_eigvals() const { return eigvals_hat.head(K); }
};

/// Fits PCR with K components.
///
/// Throws ValidationError unless 1 <= K <= min(T, p) and RankDeficiencyError
/// when lambda_hat_K <= 1e-12 lambda_hat_1.
PCRFit pcr_fit(const Sample& sample, Index K, const FitOptions& options = {});

/// Least squares constrained to the top-K sample eigenspace, solved as a
/// reduced K-dimensional normal-equation problem. Shares nothing with
/// pcr_fit beyond the eigensolver.
VectorXd constrained_erm_fit(const Sample& sample, Index K);

struct RotationPair {
    MatrixXd H;              ///< Lambda_hat_K^{-1/2} V_hat_K' V_K Lambda_K^{1/2}
    VectorXd vartheta_tilde; ///< least squares on the population scores
    /// Smallest eigenvalue of (1/T) P'P for the population scores P.
    double score_gram_min_eig = 0.0;
    /// (1/T) P'P was below 1e-10 and a pseudoinverse was used.
    bool degenerate = false;
    /// Smallest singular value of H exceeds 1e-12 times the largest.
    bool h_invertible = true;
};

RotationPair rotation_and_infeasible(const PCRFit& fit, const PopulationPCAd& pca, const Sample& sample);

/// R_T(theta) = (1/T) sum_t (Y_t - theta'X_t)^2.
double empirical_risk(const Sample& sample, const VectorXd& theta);

/// JSON fit report: K, T, p, leading eigenvalues (first min(p, 2K + 10)
/// available), vartheta_hat, ||theta_hat||_2 and the in-sample risk.
std::string fit_report_json(const PCRFit& fit, const Sample& sample);

} // namespace pcrlab
