#ifndef CHASM_DYNAMICS_HPP
#define CHASM_DYNAMICS_HPP

/** @file
 * Online estimation of a linear transition operator from a vector stream.
 *
 * The estimator is exponentially-weighted recursive least squares: after n
 * regressor/target pairs (x_{t-1}, x_t) it holds
 *
 *     theta = (eps rho^n Theta_0 + sum_t rho^{n-t} x_t x_{t-1}^T)
 *             (eps rho^n I       + sum_t rho^{n-t} x_{t-1} x_{t-1}^T)^{-1}
 *
 * where Theta_0 is the initial operator (the identity).  The inverse of the
 * weighted regressor Gram matrix is carried in unnormalised form and updated
 * with the Sherman-Morrison identity, so no 1/n factors are needed and the
 * first pair is already well defined.
 */

#include <chasm/errors.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

namespace chasm {

struct DynamicsState {
    Eigen::Index dim = 0;
    Eigen::MatrixXd theta;     ///< current operator estimate
    Eigen::MatrixXd gamma_inv; ///< inverse of the weighted (ridged) regressor Gram matrix
    double rho = 1.0;
    std::uint64_t step = 0;    ///< number of pairs consumed
    std::optional<Eigen::VectorXd> prev_x;
};

/// Ridge used when the caller does not pick one.
inline double default_epsilon(Eigen::Index dim) { return 1e-6 * static_cast<double>(dim); }

inline DynamicsState init_dynamics(Eigen::Index dim, double rho, double epsilon) {
    detail::require(dim >= 1, "dynamics: dimension must be positive");
    detail::require(rho > 0.0 && rho <= 1.0, "dynamics: forgetting factor must lie in (0, 1]");
    detail::require(epsilon > 0.0 && std::isfinite(epsilon), "dynamics: epsilon must be positive");
    DynamicsState s;
    s.dim = dim;
    s.theta = Eigen::MatrixXd::Identity(dim, dim);
    s.gamma_inv = Eigen::MatrixXd::Identity(dim, dim) / epsilon;
    s.rho = rho;
    return s;
}

/// Advances the estimate by one pair (prev_x, x_new).  The first call after
/// initialisation only records the regressor.  Non-finite input throws and
/// leaves the state untouched.
inline void update(DynamicsState& s, const Eigen::Ref<const Eigen::VectorXd>& x_new) {
    if (x_new.size() != s.dim)
        throw InvalidArgument("dynamics: expected a vector of length " + std::to_string(s.dim) +
                              ", got " + std::to_string(x_new.size()));
    if (!x_new.allFinite()) throw InvalidArgument("dynamics: non-finite observation");

    if (!s.prev_x) {
        s.prev_x = x_new;
        return;
    }
    const Eigen::VectorXd& x = *s.prev_x;
    const Eigen::VectorXd px = s.gamma_inv * x;
    const double denom = s.rho + x.dot(px);
    const Eigen::VectorXd gain = px / denom;
    const Eigen::VectorXd residual = x_new - s.theta * x;

    Eigen::MatrixXd theta = s.theta + residual * gain.transpose();
    Eigen::MatrixXd p = (s.gamma_inv - gain * px.transpose()) / s.rho;
    p = 0.5 * (p + p.transpose()).eval();
    if (!theta.allFinite() || !p.allFinite())
        throw NumericalError("dynamics: update produced non-finite estimate");

    s.theta = std::move(theta);
    s.gamma_inv = std::move(p);
    s.prev_x = x_new;
    ++s.step;
}

/// init_dynamics followed by update over every element of the batch.
inline DynamicsState warm_start(std::span<const Eigen::VectorXd> batch, double rho, double epsilon) {
    detail::require(!batch.empty(), "warm_start: empty batch");
    const Eigen::Index dim = batch.front().size();
    detail::require(static_cast<Eigen::Index>(batch.size()) >= dim + 1,
                    "warm_start: need at least dim + 1 observations");
    for (const auto& x : batch)
        detail::require(x.size() == dim, "warm_start: inconsistent vector lengths");
    DynamicsState s = init_dynamics(dim, rho, epsilon);
    for (const auto& x : batch) update(s, x);
    return s;
}

/// n_eff = sum_{t=1}^n rho^{n-t}.
inline double effective_sample_size(const DynamicsState& s) {
    detail::require(s.step >= 1, "effective_sample_size: no pairs consumed yet");
    const double n = static_cast<double>(s.step);
    if (s.rho == 1.0) return n;
    return -std::expm1(n * std::log(s.rho)) / (1.0 - s.rho);
}

} // namespace chasm

#endif
