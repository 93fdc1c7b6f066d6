#ifndef CHASM_BIAS_LAB_HPP
#define CHASM_BIAS_LAB_HPP

/** @file
 * Monte Carlo experiments on the operator estimator: the bias
 * ||E[theta_n] - Theta|| as a function of n and the forgetting factor, and
 * the diagonal-versus-rotation demonstration that equal marginal
 * covariances can hide very different dynamics.
 */

#include <chasm/dynamics.hpp>
#include <chasm/errors.hpp>
#include <chasm/parallel.hpp>
#include <chasm/spectrum.hpp>
#include <chasm/synthetic.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace chasm {

/// Default in-control model: a persistent diagonal VAR(1) in d = 2 with
/// identity noise.  Persistence keeps the O(1/n) bias well above the Monte
/// Carlo noise floor at n = 4000.
inline VarModel default_bias_model() {
    VarModel m;
    m.dim = 2;
    m.theta0 = Eigen::Vector2d(0.95, 0.8).asDiagonal();
    m.theta1 = m.theta0;
    m.noise.kind = NoiseKind::gaussian;
    m.noise.covariance = Eigen::MatrixXd::Identity(2, 2);
    m.length = 4001;
    return m;
}

struct BiasExperiment {
    VarModel model = default_bias_model();
    std::vector<double> rhos{1.0, 0.99, 0.95};
    std::vector<std::int64_t> checkpoints{250, 500, 1000, 2000, 4000};
    std::size_t n_mc = 5000;
    std::uint64_t seed = 1;
    std::optional<double> epsilon; ///< defaults to default_epsilon(d)

    void validate() const {
        detail::require(!rhos.empty(), "bias: need at least one forgetting factor");
        for (double r : rhos) detail::require(r > 0.0 && r <= 1.0, "bias: forgetting factors must lie in (0, 1]");
        detail::require(!checkpoints.empty(), "bias: need at least one checkpoint");
        detail::require(checkpoints.front() >= 1, "bias: checkpoints must be positive");
        detail::require(std::adjacent_find(checkpoints.begin(), checkpoints.end(),
                                           [](auto a, auto b) { return a >= b; }) == checkpoints.end(),
                        "bias: checkpoints must be strictly increasing");
        detail::require(n_mc >= 100, "bias: need at least 100 replications");
        detail::require(!model.tau, "bias: model must be in control (no changepoint)");
    }
};

struct BiasPoint {
    double rho = 1.0;
    std::int64_t n = 0;
    double bias_norm = 0.0; ///< spectral norm of mean(theta_n) - Theta
    double std_error = 0.0;   ///< Monte Carlo standard error bound (Frobenius of the entrywise errors)
};

namespace detail {

struct BiasAccumulator {
    // [rho][checkpoint] -> running sums of theta and theta^2 (entrywise)
    std::vector<std::vector<Eigen::MatrixXd>> sum, sum_sq;

    BiasAccumulator(std::size_t n_rho, std::size_t n_cp, Eigen::Index d)
        : sum(n_rho, std::vector<Eigen::MatrixXd>(n_cp, Eigen::MatrixXd::Zero(d, d))), sum_sq(sum) {}

    void merge(const BiasAccumulator& o) {
        for (std::size_t i = 0; i < sum.size(); ++i)
            for (std::size_t j = 0; j < sum[i].size(); ++j) {
                sum[i][j] += o.sum[i][j];
                sum_sq[i][j] += o.sum_sq[i][j];
            }
    }
};

} // namespace detail

/// One independent in-control stream per replication, shared by all
/// forgetting factors.  Replications are reduced in fixed-size blocks in
/// index order, so the table does not depend on the worker count.
inline std::vector<BiasPoint> run_bias(const BiasExperiment& exp, unsigned jobs = 1) {
    exp.validate();
    VarModel model = exp.model;
    model.length = exp.checkpoints.back() + 1;
    model.validate();
    const Eigen::Index d = model.dim;
    const double eps = exp.epsilon.value_or(default_epsilon(d));
    const std::size_t n_rho = exp.rhos.size(), n_cp = exp.checkpoints.size();

    constexpr std::size_t block = 50;
    const std::size_t n_blocks = (exp.n_mc + block - 1) / block;
    std::vector<detail::BiasAccumulator> partial(n_blocks, detail::BiasAccumulator(n_rho, n_cp, d));

    parallel_for(n_blocks, resolve_jobs(jobs), [&](std::size_t b) {
        auto& acc = partial[b];
        for (std::size_t rep = b * block; rep < std::min(exp.n_mc, (b + 1) * block); ++rep) {
            Rng rng = replication_rng(exp.seed, rep);
            VarStream stream(model, rng);
            std::vector<DynamicsState> est;
            for (double rho : exp.rhos) est.push_back(init_dynamics(d, rho, eps));
            std::size_t cp = 0;
            while (!stream.done() && cp < n_cp) {
                const Eigen::VectorXd x = stream.next();
                for (auto& s : est) update(s, x);
                if (static_cast<std::int64_t>(est.front().step) == exp.checkpoints[cp]) {
                    for (std::size_t k = 0; k < n_rho; ++k) {
                        acc.sum[k][cp] += est[k].theta;
                        acc.sum_sq[k][cp] += est[k].theta.cwiseAbs2();
                    }
                    ++cp;
                }
            }
        }
    });

    detail::BiasAccumulator total(n_rho, n_cp, d);
    for (const auto& p : partial) total.merge(p);

    const double n = static_cast<double>(exp.n_mc);
    std::vector<BiasPoint> out;
    for (std::size_t k = 0; k < n_rho; ++k)
        for (std::size_t c = 0; c < n_cp; ++c) {
            const Eigen::MatrixXd mean = total.sum[k][c] / n;
            const Eigen::MatrixXd var = (total.sum_sq[k][c] / n - mean.cwiseAbs2()).cwiseMax(0.0) * (n / (n - 1.0));
            BiasPoint p;
            p.rho = exp.rhos[k];
            p.n = exp.checkpoints[c];
            p.bias_norm = Eigen::JacobiSVD<Eigen::MatrixXd>(mean - model.theta0).singularValues()[0];
            p.std_error = std::sqrt(var.sum() / n);
            out.push_back(p);
        }
    return out;
}

/// Least-squares slope of log(bias) against log(n) for one forgetting factor.
inline double loglog_slope(const std::vector<BiasPoint>& table, double rho) {
    std::vector<double> lx, ly;
    for (const auto& p : table)
        if (p.rho == rho) {
            lx.push_back(std::log(static_cast<double>(p.n)));
            ly.push_back(std::log(p.bias_norm));
        }
    detail::require(lx.size() >= 2, "loglog_slope: need at least two checkpoints");
    const double k = static_cast<double>(lx.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i] / k;
        my += ly[i] / k;
    }
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    return sxy / sxx;
}

struct MarginalEquivalenceReport {
    double theta = 0.0;
    double expected_variance = 1.0;     ///< 1 / (1 - theta^2)
    Eigen::Matrix2d cov_diagonal;       ///< sample covariance, diag(theta) process
    Eigen::Matrix2d cov_rotation;       ///< sample covariance, rotation(theta) process
    Eigen::VectorXcd spectrum_diagonal; ///< estimated eigenvalues, diag(theta) process
    Eigen::VectorXcd spectrum_rotation; ///< estimated eigenvalues aligned to the diagonal ones
    double separation = 0.0;            ///< min_i |aligned eigenvalue difference|
};

/// diag(theta) and the quarter-turn rotation with modulus theta share the
/// stationary covariance (1 - theta^2)^{-1} I_2 under identity noise, yet
/// their spectra ({theta, theta} versus {+-i theta}) are far apart.
inline MarginalEquivalenceReport marginal_equivalence_demo(double theta, std::int64_t length, std::size_t n_mc,
                                                           Rng& rng) {
    detail::require(std::abs(theta) < 1.0, "marginal_equivalence_demo: |theta| must be < 1");
    detail::require(length >= 10 && n_mc >= 1, "marginal_equivalence_demo: need a non-trivial run");

    MarginalEquivalenceReport rep;
    rep.theta = theta;
    rep.expected_variance = 1.0 / (1.0 - theta * theta);
    rep.cov_diagonal.setZero();
    rep.cov_rotation.setZero();
    rep.spectrum_diagonal = Eigen::VectorXcd::Zero(2);
    rep.spectrum_rotation = Eigen::VectorXcd::Zero(2);

    auto one = [&](const Eigen::Matrix2d& transition, Eigen::Matrix2d& cov, Eigen::VectorXcd& eig) {
        VarModel m;
        m.dim = 2;
        m.theta0 = transition;
        m.theta1 = transition;
        m.noise.covariance = Eigen::MatrixXd::Identity(2, 2);
        m.length = length;
        VarStream stream(m, rng);
        DynamicsState est = init_dynamics(2, 1.0, default_epsilon(2));
        Eigen::Matrix2d second = Eigen::Matrix2d::Zero();
        while (!stream.done()) {
            const Eigen::VectorXd x = stream.next();
            second += x * x.transpose();
            update(est, x);
        }
        cov = second / static_cast<double>(length);
        eig = dominant_eigenvalues(est.theta, 2);
    };

    for (std::size_t k = 0; k < n_mc; ++k) {
        Eigen::Matrix2d cd, cr;
        Eigen::VectorXcd ed, er;
        one(Eigen::Vector2d(theta, theta).asDiagonal().toDenseMatrix(), cd, ed);
        one(rotation_transition(0.0, theta), cr, er);
        er = align(AlignedSpectrum{ed}, er).values;
        rep.cov_diagonal += cd / static_cast<double>(n_mc);
        rep.cov_rotation += cr / static_cast<double>(n_mc);
        rep.spectrum_diagonal += ed / static_cast<double>(n_mc);
        rep.spectrum_rotation += er / static_cast<double>(n_mc);
    }
    rep.separation = (rep.spectrum_diagonal - rep.spectrum_rotation).cwiseAbs().minCoeff();
    return rep;
}

} // namespace chasm

#endif
