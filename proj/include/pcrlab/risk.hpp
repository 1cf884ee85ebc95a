#pragma once

// Population risks under known second moments and the four-term bound on
// the excess risk of PCR.

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>

#include "pcrlab/estimator.hpp"

namespace pcrlab {

/// R(theta) = E[(Y - theta'X)^2] = m_yy - 2 theta'sigma_xy + theta'Sigma theta.
double population_risk(const VectorXd& theta, const JointMomentsd& moments);

/// theta*' V_R Lambda_R V_R' theta*. Also evaluates the gamma* form of the
/// same quantity and throws std::logic_error if the two differ by more than
/// 1e-10 (relative).
double approximation_error(const PopulationPCAd& pca);

struct RiskDecomposition {
    double term_pc_estimation = 0.0; ///< 2 max_s Y_s^2 E(||P_hat_t - H P_t||^2 | D)
    double term_rotation_gap = 0.0;  ///< 4 ||vartheta_tilde - H' vartheta_hat||^2
    double term_ls_gap = 0.0;        ///< 4 ||vartheta* - vartheta_tilde||^2
    double term_approx = 0.0;        ///< 2 ||u_t' gamma*||^2_{L2}
    double excess_risk_exact = 0.0;  ///< R(theta_hat) - R(theta*)
    double bound_slack = 0.0;        ///< term sum minus excess
    /// E(||P_hat_t - H P_t||^2 | D) = tr(M Sigma M'), M = Lambda_hat^{-1/2} V_hat_K' V_R V_R'.
    double conditional_score_error = 0.0;
    double max_y_squared = 0.0;
    bool degenerate = false;

    double term_sum() const { return term_pc_estimation + term_rotation_gap + term_ls_gap + term_approx; }
    /// 1 + |excess| + term sum; the unit for relative tolerances.
    double scale() const;
    /// Bound holds to 1e-8 * scale(). Degenerate decompositions are not checked.
    bool bound_holds() const;
};

RiskDecomposition decompose_excess_risk(const PCRFit& fit, const RotationPair& rot, const PopulationPCAd& pca,
                                        const JointMomentsd& moments, const Sample& sample);

struct RateInputs {
    /// excess - 2 * approximation error (the estimation part of the excess).
    double estimation_residual = 0.0;
    /// 1/p^{2 alpha - 1} + (p / (T p^alpha))^2 p^{2/r} + K/T, without the
    /// constant and the log(T) factor.
    double rate = 0.0;
};

/// r_alpha_proxy may be +infinity, in which case p^{2/r} = 1.
RateInputs residual_rate_inputs(const RiskDecomposition& decomp, Index T, Index p, Index K,
                                         double alpha, double r_alpha_proxy);

/// Header and row for the per-replication CSV:
/// T,p,K,alpha,rho,seed,term_pc_estimation,term_rotation_gap,term_ls_gap,
/// term_approx,excess,slack,degenerate
std::string decomposition_csv_header();
std::string decomposition_csv_row(const RiskDecomposition& d, Index T, Index p, Index K, double alpha, double rho,
                                  std::uint64_t seed);

} // namespace pcrlab
