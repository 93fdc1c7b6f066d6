#ifndef CHASM_MEWMA_HPP
#define CHASM_MEWMA_HPP

/** @file
 * Complex-valued augmented MEWMA chart on the spectral velocity
 * v_n = lambda_n - lambda_{n-1}.
 *
 * The augmented vector (v, conj v) carries both the Hermitian covariance
 * Sigma = E[(v-mu)(v-mu)^H] and the pseudo-covariance
 * Sigma~ = E[(v-mu)(v-mu)^T], so improper velocities (which conjugate
 * eigenvalue pairs produce generically) are monitored correctly.  The
 * 2r x 2r Mahalanobis distance is evaluated through its Schur-complement
 * form, which only needs two r x r Hermitian inversions:
 *
 *     D^2 = (2 / beta_n) Re[ e^H C^{-1} e + e^H Q conj(e) ],   e = z - mu
 *     C   = Sigma - Sigma~ conj(Sigma)^{-1} conj(Sigma~)
 *     Q   = -C^{-1} Sigma~ conj(Sigma)^{-1}
 *
 * A diagonal load is added to Sigma (and hence to conj(Sigma)) before the
 * Schur complement is formed; C is inverted as is, which keeps the result
 * identical to inverting the loaded augmented matrix directly.
 */

#include <chasm/errors.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>

namespace chasm {

/// Finite-sample EWMA variance factor alpha (1 - (1-alpha)^{2n}) / (2 - alpha).
inline double beta(double alpha, std::uint64_t n) {
    detail::require(n >= 1, "beta: n must be positive");
    detail::require(alpha > 0.0 && alpha < 1.0, "beta: alpha must lie in (0, 1)");
    const double decay = std::exp(2.0 * static_cast<double>(n) * std::log1p(-alpha));
    return alpha * (1.0 - decay) / (2.0 - alpha);
}

struct MewmaState {
    Eigen::Index rank = 0;
    double alpha = 0.1;
    Eigen::VectorXcd z;
    Eigen::VectorXcd mu;
    Eigen::MatrixXcd sigma;       ///< Hermitian covariance estimate
    Eigen::MatrixXcd sigma_tilde; ///< complex-symmetric pseudo-covariance estimate
    std::uint64_t count = 0;
    double ridge = 1e-8;          ///< absolute diagonal load
    double ridge_rel = 1e-6;      ///< load proportional to trace(sigma) / r
    double moment_forgetting = 1.0; ///< 1 = equal-weight moments since reset
    double weight_sum = 0.0;

    /// Condition-number ceiling on the Schur complement before we refuse to invert.
    static constexpr double max_condition = 1e13;
};

inline MewmaState make_mewma(Eigen::Index rank, double alpha, double ridge = 1e-8, double ridge_rel = 1e-6,
                             double moment_forgetting = 1.0) {
    detail::require(rank >= 1, "mewma: rank must be positive");
    detail::require(alpha > 0.0 && alpha < 1.0, "mewma: alpha must lie in (0, 1)");
    detail::require(ridge > 0.0 && std::isfinite(ridge), "mewma: ridge must be positive");
    detail::require(ridge_rel >= 0.0 && std::isfinite(ridge_rel), "mewma: relative ridge must be non-negative");
    detail::require(moment_forgetting > 0.0 && moment_forgetting <= 1.0,
                    "mewma: moment forgetting must lie in (0, 1]");
    MewmaState s;
    s.rank = rank;
    s.alpha = alpha;
    s.ridge = ridge;
    s.ridge_rel = ridge_rel;
    s.moment_forgetting = moment_forgetting;
    s.z = Eigen::VectorXcd::Zero(rank);
    s.mu = Eigen::VectorXcd::Zero(rank);
    s.sigma = Eigen::MatrixXcd::Zero(rank, rank);
    s.sigma_tilde = Eigen::MatrixXcd::Zero(rank, rank);
    return s;
}

inline void reset(MewmaState& s) {
    s.z.setZero();
    s.mu.setZero();
    s.sigma.setZero();
    s.sigma_tilde.setZero();
    s.count = 0;
    s.weight_sum = 0.0;
}

/// EWMA step on z plus one weighted-Welford step on the moments.
inline void ingest_velocity(MewmaState& s, const Eigen::Ref<const Eigen::VectorXcd>& v) {
    detail::require(v.size() == s.rank, "ingest_velocity: length mismatch");
    if (!v.allFinite()) throw InvalidArgument("ingest_velocity: non-finite velocity");

    s.z = (1.0 - s.alpha) * s.z + s.alpha * v;

    // With previous weight a and new weight 1:
    //   mu'    = mu + d / (a + 1)
    //   Sigma' = a / (a + 1) * (Sigma + d d^H / (a + 1))
    const double prior = s.moment_forgetting * s.weight_sum;
    const double total = prior + 1.0;
    const Eigen::VectorXcd d = v - s.mu;
    s.mu += d / total;
    s.sigma = (prior / total) * (s.sigma + d * d.adjoint() / total);
    s.sigma_tilde = (prior / total) * (s.sigma_tilde + d * d.transpose() / total);
    s.sigma = 0.5 * (s.sigma + s.sigma.adjoint()).eval();
    s.sigma_tilde = 0.5 * (s.sigma_tilde + s.sigma_tilde.transpose()).eval();
    s.weight_sum = total;
    ++s.count;
}

/// Diagonal load actually applied for the current moments.
inline double effective_ridge(const MewmaState& s) {
    return s.ridge + s.ridge_rel * s.sigma.trace().real() / static_cast<double>(s.rank);
}

struct SchurBlocks {
    Eigen::MatrixXcd c;     ///< Schur complement C
    Eigen::MatrixXcd q;     ///< cross term Q
    Eigen::MatrixXcd c_inv;
};

/// C and Q for the current (loaded) moments.
inline SchurBlocks schur_blocks(const MewmaState& s) {
    const Eigen::Index r = s.rank;
    const Eigen::MatrixXcd loaded = s.sigma + effective_ridge(s) * Eigen::MatrixXcd::Identity(r, r);
    Eigen::LLT<Eigen::MatrixXcd> conj_fact(loaded.conjugate());
    if (conj_fact.info() != Eigen::Success) throw NumericalError("mewma: covariance not positive definite");
    // conj(Sigma)^{-1} conj(Sigma~)
    const Eigen::MatrixXcd a = conj_fact.solve(s.sigma_tilde.conjugate());
    SchurBlocks b;
    b.c = loaded - s.sigma_tilde * a;
    b.c = 0.5 * (b.c + b.c.adjoint()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(b.c, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > MewmaState::max_condition)
        throw NumericalError("mewma: velocity covariance too ill-conditioned; extend the burn-in");

    Eigen::LLT<Eigen::MatrixXcd> c_fact(b.c);
    b.c_inv = c_fact.solve(Eigen::MatrixXcd::Identity(r, r));
    // Q = -C^{-1} Sigma~ conj(Sigma)^{-1}; conj(Sigma) is Hermitian so
    // Sigma~ conj(Sigma)^{-1} = (conj(Sigma)^{-1} Sigma~^H)^H.
    const Eigen::MatrixXcd right = conj_fact.solve(s.sigma_tilde.adjoint()).adjoint();
    b.q = -(b.c_inv * right);
    return b;
}

/// Augmented Mahalanobis distance D^2_n of z from mu.
///
/// Equal to (2/beta) Re[e^H C^{-1} e + e^H Q conj(e)], but evaluated as the
/// sum of two Hermitian forms
///   conj(e)^H conj(Sigma)^{-1} conj(e) + w^H C^{-1} w,  w = e - Sigma~ conj(Sigma)^{-1} conj(e),
/// which avoids the cancellation between the two terms above and cannot
/// go negative.
inline double statistic(const MewmaState& s) {
    detail::require(s.count >= 1, "statistic: no velocities ingested since reset");
    const Eigen::Index r = s.rank;
    const Eigen::MatrixXcd loaded = s.sigma + effective_ridge(s) * Eigen::MatrixXcd::Identity(r, r);
    Eigen::LLT<Eigen::MatrixXcd> conj_fact(loaded.conjugate());
    if (conj_fact.info() != Eigen::Success) throw NumericalError("mewma: covariance not positive definite");
    const Eigen::MatrixXcd c = [&] {
        Eigen::MatrixXcd m = loaded - s.sigma_tilde * conj_fact.solve(s.sigma_tilde.conjugate());
        return Eigen::MatrixXcd(0.5 * (m + m.adjoint()));
    }();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(c, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > MewmaState::max_condition)
        throw NumericalError("mewma: velocity covariance too ill-conditioned; extend the burn-in");
    Eigen::LLT<Eigen::MatrixXcd> c_fact(c);

    const Eigen::VectorXcd e = s.z - s.mu;
    const Eigen::VectorXcd ec = e.conjugate();
    const Eigen::VectorXcd y = conj_fact.solve(ec);
    const Eigen::VectorXcd w = e - s.sigma_tilde * y;
    const double quad = ec.dot(y).real() + w.dot(c_fact.solve(w)).real();
    const double d2 = quad / beta(s.alpha, s.count);
    if (!std::isfinite(d2)) throw NumericalError("statistic: non-finite value");
    return std::max(d2, 0.0);
}

} // namespace chasm

#endif
