#include "pcrlab/risk.hpp"

#include <cmath>
#include <stdexcept>

#include "pcrlab/sample_io.hpp"

namespace pcrlab {

double population_risk(const VectorXd& theta, const JointMomentsd& moments) {
    if (theta.size() != moments.sigma_xy.size()) throw ValidationError("population_risk: dimension mismatch");
    return moments.m_yy - 2.0 * theta.dot(moments.sigma_xy) + theta.dot(moments.Sigma * theta);
}

double approximation_error(const PopulationPCAd& pca) {
    const VectorXd theta_coords = pca.V_R.transpose() * pca.theta_star;
    const VectorXd gamma_coords = pca.V_R.transpose() * pca.gamma_star;
    const double via_theta = theta_coords.dot(pca.Lambda_R.asDiagonal() * theta_coords);
    const double via_gamma = gamma_coords.dot(pca.Lambda_R.asDiagonal() * gamma_coords);
    if (std::abs(via_theta - via_gamma) > 1e-10 * (1.0 + std::abs(via_theta))) {
        throw std::logic_error("approximation_error: theta* and gamma* forms disagree");
    }
    return via_theta;
}

double RiskDecomposition::scale() const { return 1.0 + std::abs(excess_risk_exact) + term_sum(); }

bool RiskDecomposition::bound_holds() const { return degenerate || bound_slack >= -1e-8 * scale(); }

RiskDecomposition decompose_excess_risk(const PCRFit& fit, const RotationPair& rot, const PopulationPCAd& pca,
                                        const JointMomentsd& moments, const Sample& sample) {
    const Index p = pca.p();
    if (fit.K != pca.K() || fit.V_hat_K.rows() != p || moments.Sigma.rows() != p || sample.p() != p) {
        throw ValidationError("decompose_excess_risk: inputs have inconsistent dimensions");
    }
    RiskDecomposition d;
    d.degenerate = rot.degenerate;
    d.max_y_squared = sample.Y.cwiseAbs2().maxCoeff();

    // M = Lambda_hat^{-1/2} (V_hat_K' - (V_hat_K' V_K) V_K'), since V_R V_R' = I - V_K V_K'.
    const VectorXd lambda_hat = fit.eigvals_hat.head(fit.K);
    MatrixXd m = fit.V_hat_K.transpose() - (fit.V_hat_K.transpose() * pca.V_K) * pca.V_K.transpose();
    m = lambda_hat.cwiseSqrt().cwiseInverse().asDiagonal() * m;
    d.conditional_score_error = (m * moments.Sigma).cwiseProduct(m).sum();

    d.term_pc_estimation = 2.0 * d.max_y_squared * d.conditional_score_error;
    d.term_rotation_gap = 4.0 * (rot.vartheta_tilde - rot.H.transpose() * fit.vartheta_hat).squaredNorm();
    d.term_ls_gap = 4.0 * (pca.vartheta_star - rot.vartheta_tilde).squaredNorm();
    d.term_approx = 2.0 * approximation_error(pca);
    d.excess_risk_exact = population_risk(fit.theta_hat, moments) - population_risk(pca.theta_star, moments);
    d.bound_slack = d.term_sum() - d.excess_risk_exact;
    return d;
}

RateInputs residual_rate_inputs(const RiskDecomposition& decomp, Index T, Index p, Index K,
                                         double alpha, double r_alpha_proxy) {
    if (T < 1 || p < 1 || K < 1) throw ValidationError("rate inputs: T, p and K must be positive");
    const double t = static_cast<double>(T);
    const double pd = static_cast<double>(p);
    const double dependence = std::isinf(r_alpha_proxy) ? 1.0 : std::pow(pd, 2.0 / r_alpha_proxy);
    const double pc_ratio = pd / (t * std::pow(pd, alpha));
    RateInputs out;
    out.estimation_residual = decomp.excess_risk_exact - decomp.term_approx;
    out.rate = std::pow(pd, -(2.0 * alpha - 1.0)) + pc_ratio * pc_ratio * dependence +
               static_cast<double>(K) / t;
    return out;
}

std::string decomposition_csv_header() {
    return "T,p,K,alpha,rho,seed,term_pc_estimation,term_rotation_gap,term_ls_gap,term_approx,excess,slack,"
           "degenerate";
}

std::string decomposition_csv_row(const RiskDecomposition& d, Index T, Index p, Index K, double alpha, double rho,
                                  std::uint64_t seed) {
    std::string row = std::to_string(T) + ',' + std::to_string(p) + ',' + std::to_string(K) + ',' +
                      format_double(alpha) + ',' + format_double(rho) + ',' + std::to_string(seed);
    for (double v : {d.term_pc_estimation, d.term_rotation_gap, d.term_ls_gap, d.term_approx,
                     d.excess_risk_exact, d.bound_slack}) {
        row += ',';
        row += format_double(v);
    }
    row += d.degenerate ? ",1" : ",0";
    return row;
}

} // namespace pcrlab
