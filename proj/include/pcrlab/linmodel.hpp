#pragma once

// Dense linear-model core: symmetric eigendecomposition with a deterministic
// ordering and sign convention, minimum-norm solves, the spiked covariance
// model, joint second moments of (Y, X) and the population principal
// component decomposition X = B P + u.
//
// Everything here is header-only and templated on the scalar type; the rest
// of the library works with the double instantiations (`...d` aliases).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

#include "pcrlab/error.hpp"

namespace pcrlab {

using Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Eigenvalues in non-increasing order and matching orthonormal eigenvectors
/// stored column-wise.
template <typename Scalar>
struct EigenSystem {
    VectorX<Scalar> values;
    MatrixX<Scalar> vectors;
};

namespace detail {

// Index of the entry of largest magnitude; entries within a relative 1e-10
// of the maximum count as ties and the lowest index wins.
template <typename Derived>
Index leading_entry(const Eigen::MatrixBase<Derived>& v) {
    using Scalar = typename Derived::Scalar;
    const Scalar max_abs = v.cwiseAbs().maxCoeff();
    const Scalar cut = max_abs * (Scalar(1) - Scalar(1e-10));
    for (Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) >= cut) return i;
    }
    return 0;
}

} // namespace detail

/// Flips each column so that its largest-magnitude entry is positive.
template <typename Derived>
void normalize_signs(Eigen::MatrixBase<Derived>& vectors) {
    for (Index j = 0; j < vectors.cols(); ++j) {
        const Index lead = detail::leading_entry(vectors.col(j));
        if (vectors(lead, j) < 0) vectors.col(j) *= -1;
    }
}

/// Eigendecomposition of a symmetric matrix.
///
/// Eigenvalues come back non-increasing. Each eigenvector has its
/// largest-magnitude entry positive. Numerically tied eigenvalues are
/// ordered by the position of their eigenvector's leading entry, which makes
/// the identity map to the identity and diagonal inputs to permutations.
///
/// Throws AsymmetryError when max|M - M'| exceeds 1e-8 max|M|.
template <typename Derived>
EigenSystem<typename Derived::Scalar> symmetric_eig(const Eigen::MatrixBase<Derived>& m) {
    using Scalar = typename Derived::Scalar;
    if (m.rows() != m.cols()) {
        throw ValidationError("symmetric_eig: matrix is not square");
    }
    const Index n = m.rows();
    EigenSystem<Scalar> out;
    if (n == 0) return out;

    MatrixX<Scalar> a = m;
    const Scalar scale = a.cwiseAbs().maxCoeff();
    const Scalar asym = (a - a.transpose()).cwiseAbs().maxCoeff();
    if (asym > Scalar(1e-8) * scale) {
        std::ostringstream msg;
        msg << "symmetric_eig: input is not symmetric (max |M - M'| = " << asym << ")";
        throw AsymmetryError(msg.str(), static_cast<double>(asym));
    }
    a = (a + a.transpose()) / Scalar(2);

    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> solver(a);
    if (solver.info() != Eigen::Success) {
        throw Error("symmetric_eig: eigensolver did not converge");
    }
    MatrixX<Scalar> vecs = solver.eigenvectors();
    normalize_signs(vecs);
    const VectorX<Scalar>& vals = solver.eigenvalues();

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index(0));
    std::stable_sort(order.begin(), order.end(),
                     [&](Index i, Index j) { return vals(i) > vals(j); });

    const Scalar tie_tol = Scalar(64) * std::numeric_limits<Scalar>::epsilon() *
                           std::max(vals.cwiseAbs().maxCoeff(), Scalar(1e-300));
    std::vector<Index> lead(static_cast<std::size_t>(n));
    for (Index j = 0; j < n; ++j) lead[j] = detail::leading_entry(vecs.col(j));
    for (std::size_t begin = 0; begin < order.size();) {
        std::size_t end = begin + 1;
        while (end < order.size() && vals(order[begin]) - vals(order[end]) <= tie_tol) ++end;
        std::stable_sort(order.begin() + begin, order.begin() + end,
                         [&](Index i, Index j) { return lead[i] < lead[j]; });
        begin = end;
    }

    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Index j = 0; j < n; ++j) {
        out.values(j) = vals(order[j]);
        out.vectors.col(j) = vecs.col(order[j]);
    }
    return out;
}

/// Largest absolute eigenvalue of a symmetric matrix.
template <typename Derived>
typename Derived::Scalar symmetric_spectral_norm(const Eigen::MatrixBase<Derived>& m) {
    if (m.size() == 0) return 0;
    const auto eig = symmetric_eig(m);
    return std::max(std::abs(eig.values(0)), std::abs(eig.values(eig.values.size() - 1)));
}

/// Spectral norm of a general matrix, from the smaller of its two Gram
/// matrices.
template <typename Derived>
typename Derived::Scalar spectral_norm(const Eigen::MatrixBase<Derived>& m) {
    using Scalar = typename Derived::Scalar;
    if (m.size() == 0) return 0;
    MatrixX<Scalar> gram;
    if (m.rows() <= m.cols()) {
        gram = m * m.transpose();
    } else {
        gram = m.transpose() * m;
    }
    const auto eig = symmetric_eig(gram);
    return std::sqrt(std::max(eig.values(0), Scalar(0)));
}

template <typename Scalar>
struct MinNormSolution {
    VectorX<Scalar> x;
    Index rank = 0;
    /// ||b - A x||_2 for the returned x.
    Scalar residual = 0;
};

/// Minimum-norm solution of A x = b for symmetric PSD A, dropping
/// eigendirections below rel_cutoff * lambda_max.
template <typename DerivedA, typename DerivedB>
MinNormSolution<typename DerivedA::Scalar> min_norm_solve(const Eigen::MatrixBase<DerivedA>& a,
                                                          const Eigen::MatrixBase<DerivedB>& b,
                                                          typename DerivedA::Scalar rel_cutoff = 1e-12) {
    using Scalar = typename DerivedA::Scalar;
    if (a.rows() != b.size()) throw ValidationError("min_norm_solve: dimension mismatch");
    MinNormSolution<Scalar> out;
    out.x = VectorX<Scalar>::Zero(a.cols());
    if (a.size() == 0) return out;
    const auto eig = symmetric_eig(a);
    const Scalar cutoff = rel_cutoff * std::max(eig.values(0), Scalar(0));
    const VectorX<Scalar> coords = eig.vectors.transpose() * b;
    for (Index i = 0; i < eig.values.size(); ++i) {
        if (eig.values(i) > cutoff && eig.values(i) > 0) {
            out.x += eig.vectors.col(i) * (coords(i) / eig.values(i));
            ++out.rank;
        }
    }
    out.residual = (b - a * out.x).norm();
    return out;
}

/// Population covariance in eigen form, with spiked eigenvalues
/// lambda_i = c_i p^alpha for i <= K and lambda_i = c_i otherwise.
template <typename Scalar>
struct CovarianceModel {
    Index p = 0;
    Index K = 0;
    Scalar alpha = 1;
    VectorX<Scalar> spike_constants;
    VectorX<Scalar> tail_constants;
    MatrixX<Scalar> V;
    VectorX<Scalar> Lambda;

    MatrixX<Scalar> sigma() const {
        if (V.isIdentity(Scalar(0))) return MatrixX<Scalar>(Lambda.asDiagonal());
        return V * Lambda.asDiagonal() * V.transpose();
    }
    EigenSystem<Scalar> eigensystem() const { return {Lambda, V}; }
};

/// Builds and validates a spiked covariance model around the orthogonal
/// eigenvector matrix `v`.
template <typename Scalar>
CovarianceModel<Scalar> make_covariance_model(Index k, Scalar alpha,
                                              const VectorX<Scalar>& spike_constants,
                                              const VectorX<Scalar>& tail_constants,
                                              MatrixX<Scalar> v) {
    const Index p = spike_constants.size() + tail_constants.size();
    if (k < 1 || k > p || spike_constants.size() != k) {
        throw ValidationError("covariance model: need 1 <= K <= p and exactly K spike constants");
    }
    if (!(alpha > Scalar(0.5) && alpha <= Scalar(1))) {
        throw ValidationError("covariance model: alpha must lie in (1/2, 1]");
    }
    if (!(spike_constants(k - 1) > 0)) {
        throw ValidationError("covariance model: c_K must be positive");
    }
    for (Index i = 1; i < k; ++i) {
        if (spike_constants(i) > spike_constants(i - 1)) {
            throw ValidationError("covariance model: spike constants must be non-increasing");
        }
    }
    for (Index i = 0; i < tail_constants.size(); ++i) {
        if (!(tail_constants(i) >= 0) || !std::isfinite(tail_constants(i))) {
            throw ValidationError("covariance model: tail constants must be finite and nonnegative");
        }
        if (i > 0 && tail_constants(i) > tail_constants(i - 1)) {
            throw ValidationError("covariance model: tail constants must be non-increasing");
        }
    }
    if (v.rows() != p || v.cols() != p) {
        throw ValidationError("covariance model: eigenvector matrix must be p x p");
    }
    const Scalar ortho = (v.transpose() * v - MatrixX<Scalar>::Identity(p, p)).cwiseAbs().maxCoeff();
    if (ortho > Scalar(1e-10)) {
        throw ValidationError("covariance model: eigenvector matrix is not orthogonal");
    }

    CovarianceModel<Scalar> cov;
    cov.p = p;
    cov.K = k;
    cov.alpha = alpha;
    cov.spike_constants = spike_constants;
    cov.tail_constants = tail_constants;
    cov.V = std::move(v);
    cov.Lambda.resize(p);
    const Scalar spike_scale = std::pow(static_cast<Scalar>(p), alpha);
    cov.Lambda.head(k) = spike_constants * spike_scale;
    cov.Lambda.tail(p - k) = tail_constants;
    if (k < p && cov.Lambda(k) > cov.Lambda(k - 1)) {
        throw ValidationError("covariance model: c_K p^alpha is below c_{K+1}; eigenvalues not ordered");
    }
    return cov;
}

/// Second moments of (Y, X): Sigma = E[XX'], sigma_xy = E[XY], m_yy = E[Y^2].
template <typename Scalar>
struct JointMoments {
    MatrixX<Scalar> Sigma;
    VectorX<Scalar> sigma_xy;
    Scalar m_yy = 0;
};

template <typename Scalar>
void validate(const JointMoments<Scalar>& m) {
    if (m.Sigma.rows() != m.Sigma.cols() || m.Sigma.rows() != m.sigma_xy.size()) {
        throw ValidationError("joint moments: dimension mismatch");
    }
    if (!(m.m_yy >= 0)) throw ValidationError("joint moments: m_yy must be nonnegative");
    if (m.Sigma.size() == 0) return;
    const auto eig = symmetric_eig(m.Sigma);
    const Scalar top = std::max(std::abs(eig.values(0)), Scalar(1e-300));
    if (eig.values(eig.values.size() - 1) < -Scalar(1e-8) * top) {
        throw ValidationError("joint moments: Sigma is not positive semidefinite");
    }
}

/// Coefficients of the best linear predictor of Y given X, using a known
/// eigendecomposition of Sigma: the minimum-norm solution of
/// Sigma theta = sigma_xy with relative eigenvalue cutoff 1e-12.
template <typename Scalar>
VectorX<Scalar> min_norm_blp(const JointMoments<Scalar>& moments, const EigenSystem<Scalar>& sigma_eig) {
    const Index p = moments.sigma_xy.size();
    if (moments.Sigma.rows() != p || moments.Sigma.cols() != p || sigma_eig.values.size() != p ||
        sigma_eig.vectors.rows() != p || sigma_eig.vectors.cols() != p) {
        throw ValidationError("min_norm_blp: dimension mismatch");
    }
    if (!(moments.m_yy >= 0)) throw ValidationError("joint moments: m_yy must be nonnegative");
    VectorX<Scalar> theta = VectorX<Scalar>::Zero(p);
    if (p == 0) return theta;
    const Scalar top = sigma_eig.values.maxCoeff();
    if (sigma_eig.values.minCoeff() < -Scalar(1e-8) * std::max(std::abs(top), Scalar(1e-300))) {
        throw ValidationError("joint moments: Sigma is not positive semidefinite");
    }
    const Scalar cutoff = Scalar(1e-12) * std::max(top, Scalar(0));
    const VectorX<Scalar> coords = sigma_eig.vectors.transpose() * moments.sigma_xy;
    for (Index i = 0; i < p; ++i) {
        if (sigma_eig.values(i) > cutoff && sigma_eig.values(i) > 0) {
            theta += sigma_eig.vectors.col(i) * (coords(i) / sigma_eig.values(i));
        }
    }
    const VectorX<Scalar> sigma_theta = moments.Sigma * theta;
    const Scalar residual = (moments.sigma_xy - sigma_theta).norm();
    if (residual > Scalar(1e-8) * (Scalar(1) + moments.sigma_xy.norm())) {
        std::ostringstream msg;
        msg << "min_norm_blp: sigma_xy is not in the range of Sigma (residual " << residual << ")";
        throw InconsistentMomentsError(msg.str());
    }
    const Scalar residual_risk = moments.m_yy - theta.dot(sigma_theta);
    if (residual_risk < -Scalar(1e-10) * (Scalar(1) + moments.m_yy)) {
        throw InconsistentMomentsError("min_norm_blp: m_yy is below the explained variance");
    }
    return theta;
}

template <typename Scalar>
VectorX<Scalar> min_norm_blp(const JointMoments<Scalar>& moments) {
    if (moments.Sigma.rows() != moments.Sigma.cols() || moments.Sigma.rows() != moments.sigma_xy.size()) {
        throw ValidationError("min_norm_blp: dimension mismatch");
    }
    return min_norm_blp(moments, symmetric_eig(moments.Sigma));
}

/// Population principal component decomposition for a given K:
/// X = B P + u with P = Lambda_K^{-1/2} V_K' X and u = V_R V_R' X, and the
/// matching split of a predictor theta into vartheta (scores) and gamma
/// (idiosyncratic part).
template <typename Scalar>
struct PopulationPCA {
    MatrixX<Scalar> V_K;
    VectorX<Scalar> Lambda_K;
    MatrixX<Scalar> V_R;
    VectorX<Scalar> Lambda_R;
    MatrixX<Scalar> B;
    VectorX<Scalar> theta_star;
    VectorX<Scalar> vartheta_star;
    VectorX<Scalar> gamma_star;

    Index p() const { return V_K.rows(); }
    Index K() const { return V_K.cols(); }

    /// Population scores of the rows of `x` (T x p in, T x K out).
    template <typename Derived>
    MatrixX<Scalar> scores(const Eigen::MatrixBase<Derived>& x) const {
        return x * V_K * Lambda_K.cwiseSqrt().cwiseInverse().asDiagonal();
    }

    /// Idiosyncratic components u_t = V_R V_R' X_t of the rows of `x`.
    template <typename Derived>
    MatrixX<Scalar> idiosyncratic(const Eigen::MatrixBase<Derived>& x) const {
        return (x * V_R) * V_R.transpose();
    }

    MatrixX<Scalar> sigma() const {
        return V_K * Lambda_K.asDiagonal() * V_K.transpose() +
               V_R * Lambda_R.asDiagonal() * V_R.transpose();
    }
};

template <typename Scalar>
PopulationPCA<Scalar> build_population_pca(const CovarianceModel<Scalar>& cov,
                                           const VectorX<Scalar>& theta_star, Index k) {
    if (k < 1 || k > cov.p) throw ValidationError("population PCA: need 1 <= K <= p");
    if (theta_star.size() != cov.p) throw ValidationError("population PCA: theta_star must have length p");
    if (!theta_star.allFinite()) throw ValidationError("population PCA: theta_star must be finite");
    if (!(cov.Lambda(k - 1) > 0)) {
        throw ValidationError("population PCA: lambda_K = 0, spike constant c_K must be positive");
    }
    PopulationPCA<Scalar> pca;
    pca.V_K = cov.V.leftCols(k);
    pca.Lambda_K = cov.Lambda.head(k);
    pca.V_R = cov.V.rightCols(cov.p - k);
    pca.Lambda_R = cov.Lambda.tail(cov.p - k);
    pca.B = pca.V_K * pca.Lambda_K.cwiseSqrt().asDiagonal();
    pca.theta_star = theta_star;
    pca.vartheta_star = pca.Lambda_K.cwiseSqrt().asDiagonal() * (pca.V_K.transpose() * theta_star);
    pca.gamma_star = pca.V_R * (pca.V_R.transpose() * theta_star);
    return pca;
}

using EigenSystemd = EigenSystem<double>;
using CovarianceModeld = CovarianceModel<double>;
using JointMomentsd = JointMoments<double>;
using PopulationPCAd = PopulationPCA<double>;
using Eigen::MatrixXd;
using Eigen::VectorXd;

} // namespace pcrlab
