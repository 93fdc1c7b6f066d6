#include "oracles.hpp"

#include <chasm/dynamics.hpp>
#include <chasm/synthetic.hpp>

#include <gtest/gtest.h>

#include <random>
#include <vector>

using namespace chasm;

namespace {

std::vector<Eigen::VectorXd> gaussian_stream(Eigen::Index d, int length, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<Eigen::VectorXd> xs;
    for (int t = 0; t < length; ++t) {
        Eigen::VectorXd x(d);
        for (Eigen::Index i = 0; i < d; ++i) x[i] = g(rng);
        xs.push_back(x);
    }
    return xs;
}

double rel_frobenius(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a - b).norm() / b.norm(); }

DynamicsState fold(const std::vector<Eigen::VectorXd>& xs, double rho, double eps) {
    DynamicsState s = init_dynamics(xs.front().size(), rho, eps);
    for (const auto& x : xs) update(s, x);
    return s;
}

} // namespace

TEST(Init, IdentityOperatorAndScaledInverse) {
    const auto s = init_dynamics(2, 1.0, 1e-6);
    EXPECT_TRUE(s.theta.isApprox(Eigen::MatrixXd::Identity(2, 2)));
    EXPECT_EQ(s.step, 0u);
    EXPECT_FALSE(s.prev_x);

    const auto s3 = init_dynamics(3, 0.95, 1e-4);
    EXPECT_TRUE(s3.gamma_inv.isApprox(1e4 * Eigen::MatrixXd::Identity(3, 3)));
}

TEST(Init, RejectsBadArguments) {
    EXPECT_THROW(init_dynamics(0, 1.0, 1e-6), InvalidArgument);
    EXPECT_THROW(init_dynamics(2, 0.0, 1e-6), InvalidArgument);
    EXPECT_THROW(init_dynamics(2, 1.01, 1e-6), InvalidArgument);
    EXPECT_THROW(init_dynamics(2, 1.0, 0.0), InvalidArgument);
    EXPECT_THROW(init_dynamics(2, 1.0, -1.0), InvalidArgument);
}

TEST(Update, FirstCallOnlyStoresRegressor) {
    auto s = init_dynamics(2, 1.0, 1e-6);
    update(s, Eigen::Vector2d(1.0, 2.0));
    EXPECT_EQ(s.step, 0u);
    EXPECT_TRUE(s.theta.isApprox(Eigen::MatrixXd::Identity(2, 2)));
    ASSERT_TRUE(s.prev_x);
    EXPECT_EQ((*s.prev_x)[1], 2.0);
}

TEST(Update, NoiseFreeInterpolation) {
    const Eigen::Matrix2d theta = Eigen::Vector2d(0.5, 0.3).asDiagonal();
    auto s = init_dynamics(2, 1.0, 1e-10);
    Eigen::VectorXd x = Eigen::Vector2d(1.0, 1.0);
    update(s, x);
    for (int k = 0; k < 2; ++k) {
        x = theta * x;
        update(s, x);
    }
    EXPECT_EQ(s.step, 2u);
    EXPECT_LE((s.theta - theta).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Update, RejectsNonFiniteAndLeavesStateUnchanged) {
    auto s = init_dynamics(2, 0.99, 1e-6);
    update(s, Eigen::Vector2d(1.0, 0.5));
    update(s, Eigen::Vector2d(0.3, -0.2));
    const auto before = s;
    EXPECT_THROW(update(s, Eigen::Vector2d(std::nan(""), 0.0)), InvalidArgument);
    EXPECT_THROW(update(s, Eigen::Vector2d(0.0, INFINITY)), InvalidArgument);
    EXPECT_THROW(update(s, Eigen::Vector3d(0.0, 1.0, 2.0)), InvalidArgument);
    EXPECT_EQ(s.step, before.step);
    EXPECT_EQ(s.theta, before.theta);
    EXPECT_EQ(s.gamma_inv, before.gamma_inv);
    EXPECT_EQ(*s.prev_x, *before.prev_x);
}

TEST(Update, UnweightedMatchesPlainLeastSquares) {
    // With a small ridge the recursion reproduces the plain normal equations
    // sum x_t x_{t-1}^T (sum x_{t-1} x_{t-1}^T + eps I)^{-1}.  The prior's
    // contribution eps * I to the cross term is of order eps; much smaller
    // eps makes the initial 1/eps covariance lose digits instead.
    std::mt19937_64 rng(11);
    const auto xs = gaussian_stream(3, 50, rng);
    const double eps = 1e-8;
    const auto s = fold(xs, 1.0, eps);
    Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(3, 3), gram = eps * Eigen::MatrixXd::Identity(3, 3);
    for (std::size_t t = 1; t < xs.size(); ++t) {
        cross += xs[t] * xs[t - 1].transpose();
        gram += xs[t - 1] * xs[t - 1].transpose();
    }
    EXPECT_LE(rel_frobenius(s.theta, cross * gram.inverse()), 1e-8);
}

TEST(Update, ForgettingMatchesWeightedBatch) {
    std::mt19937_64 rng(12);
    const auto xs = gaussian_stream(3, 50, rng);
    const double eps = default_epsilon(3);
    const auto s = fold(xs, 0.95, eps);
    const auto ref = oracle::weighted_batch_operator(xs, 0.95, eps, Eigen::MatrixXd::Identity(3, 3));
    EXPECT_LE(rel_frobenius(s.theta, ref), 1e-8);
}

TEST(Update, BatchEquivalenceSweep) {
    std::mt19937_64 rng(13);
    std::uniform_int_distribution<int> len(2, 64);
    for (double rho : {1.0, 0.99, 0.95, 0.9})
        for (Eigen::Index d : {1, 2, 3, 5})
            for (int rep = 0; rep < 100; ++rep) {
                const auto xs = gaussian_stream(d, len(rng), rng);
                const double eps = default_epsilon(d);
                const auto s = fold(xs, rho, eps);
                const auto ref = oracle::weighted_batch_operator(xs, rho, eps, Eigen::MatrixXd::Identity(d, d));
                ASSERT_LE(rel_frobenius(s.theta, ref), 1e-8) << "rho=" << rho << " d=" << d << " rep=" << rep;
            }
}

TEST(Update, GammaInvStaysSymmetricAndFinite) {
    std::mt19937_64 rng(14);
    const auto xs = gaussian_stream(5, 5000, rng);
    auto s = init_dynamics(5, 0.97, default_epsilon(5));
    for (const auto& x : xs) {
        update(s, x);
        ASSERT_TRUE(s.theta.allFinite());
        ASSERT_TRUE(s.gamma_inv.allFinite());
        ASSERT_LE((s.gamma_inv - s.gamma_inv.transpose()).norm(), 1e-10 * s.gamma_inv.norm());
    }
}

TEST(Update, BatchScaleInvariance) {
    // Scaling both weighted sums by c > 0 leaves the solution alone, which
    // is why the recursion can skip the 1/n normalisation.
    std::mt19937_64 rng(15);
    const auto xs = gaussian_stream(3, 40, rng);
    const double rho = 0.95, eps = 1e-4;
    const auto ref = oracle::weighted_batch_operator(xs, rho, eps, Eigen::MatrixXd::Identity(3, 3));
    Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(3, 3), gram = Eigen::MatrixXd::Zero(3, 3);
    const int n = 39;
    for (int t = 1; t <= n; ++t) {
        cross += std::pow(rho, n - t) * xs[t] * xs[t - 1].transpose();
        gram += std::pow(rho, n - t) * xs[t - 1] * xs[t - 1].transpose();
    }
    cross += eps * std::pow(rho, n) * Eigen::MatrixXd::Identity(3, 3);
    gram += eps * std::pow(rho, n) * Eigen::MatrixXd::Identity(3, 3);
    for (double c : {1e-3, 1.0 / 39.0, 7.0, 1e4}) {
        const Eigen::MatrixXd scaled = (c * cross) * (c * gram).inverse();
        EXPECT_LE(rel_frobenius(scaled, ref), 1e-10);
    }
}

TEST(Update, NoiseFreeRecoveryAsRidgeVanishes) {
    // Three noiseless trajectories started on the coordinate axes; the
    // regressor is re-seeded between them so the pairs span R^3.
    Rng rng(16);
    const Eigen::MatrixXd theta = random_fullrank_transition(3, rng);
    double last = INFINITY;
    for (double eps : {1e-2, 1e-4, 1e-6, 1e-8}) {
        auto s = init_dynamics(3, 1.0, eps);
        for (int k = 0; k < 3; ++k) {
            Eigen::VectorXd y = Eigen::Vector3d::Unit(k);
            s.prev_x.reset();
            update(s, y);
            for (int t = 0; t < 5; ++t) {
                y = theta * y;
                update(s, y);
            }
        }
        const double err = (s.theta - theta).norm();
        EXPECT_LT(err, last);
        last = err;
    }
    EXPECT_LT(last, 1e-5);
}

TEST(WarmStart, EqualsFoldedUpdates) {
    std::mt19937_64 rng(17);
    const auto xs = gaussian_stream(2, 3, rng);
    const auto w = warm_start(xs, 0.99, 1e-6);
    EXPECT_EQ(w.step, 2u);
    const auto f = fold(xs, 0.99, 1e-6);
    EXPECT_EQ(w.theta, f.theta);
    EXPECT_EQ(w.gamma_inv, f.gamma_inv);

    const auto long_xs = gaussian_stream(4, 60, rng);
    EXPECT_EQ(warm_start(long_xs, 0.9, 1e-3).theta, fold(long_xs, 0.9, 1e-3).theta);
}

TEST(WarmStart, RejectsShortOrRaggedBatch) {
    std::mt19937_64 rng(18);
    auto xs = gaussian_stream(2, 2, rng);
    EXPECT_THROW(warm_start(xs, 1.0, 1e-6), InvalidArgument);
    xs = gaussian_stream(2, 4, rng);
    xs[2] = Eigen::Vector3d::Zero();
    EXPECT_THROW(warm_start(xs, 1.0, 1e-6), InvalidArgument);
}

TEST(EffectiveSampleSize, GeometricSeries) {
    auto s = init_dynamics(1, 0.9, 1e-6);
    std::mt19937_64 rng(19);
    for (const auto& x : gaussian_stream(1, 501, rng)) update(s, x);
    EXPECT_NEAR(effective_sample_size(s), 10.0, 1e-6);

    auto u = init_dynamics(1, 1.0, 1e-6);
    for (const auto& x : gaussian_stream(1, 38, rng)) update(u, x);
    EXPECT_EQ(u.step, 37u);
    EXPECT_DOUBLE_EQ(effective_sample_size(u), 37.0);

    auto h = init_dynamics(1, 0.5, 1e-6);
    for (const auto& x : gaussian_stream(1, 4, rng)) update(h, x);
    EXPECT_NEAR(effective_sample_size(h), 1.75, 1e-14);
}

TEST(EffectiveSampleSize, UndefinedBeforeFirstPair) {
    auto s = init_dynamics(2, 0.9, 1e-6);
    EXPECT_THROW(effective_sample_size(s), InvalidArgument);
    update(s, Eigen::Vector2d(1.0, 1.0));
    EXPECT_THROW(effective_sample_size(s), InvalidArgument);
}

TEST(Consistency, ErrorShrinksWithMoreData) {
    const Eigen::Matrix2d theta = rotation_transition(0.5, 0.4);
    int better = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng = replication_rng(99, seed);
        VarModel m;
        m.dim = 2;
        m.theta0 = m.theta1 = theta;
        m.noise.covariance = Eigen::MatrixXd::Identity(2, 2);
        m.length = 4001;
        VarStream stream(m, rng);
        auto s = init_dynamics(2, 1.0, default_epsilon(2));
        double err250 = 0.0;
        while (!stream.done()) {
            update(s, stream.next());
            if (s.step == 250) err250 = (s.theta - theta).norm();
        }
        if ((s.theta - theta).norm() < err250) ++better;
    }
    EXPECT_GE(better, 95);
}
