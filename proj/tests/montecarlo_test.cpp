// Longer seeded Monte Carlo checks of the detector on bivariate streams.

#include <chasm/pipeline.hpp>
#include <chasm/synthetic.hpp>

#include <gtest/gtest.h>

using namespace chasm;

namespace {

VarModel diag_to_rotation() {
    VarModel m;
    m.dim = 2;
    m.theta0 = Eigen::Vector2d(0.7, 0.7).asDiagonal();
    m.theta1 = rotation_transition(0.0, 0.7);
    m.noise.covariance = Eigen::MatrixXd::Identity(2, 2);
    m.tau = 200;
    m.length = 400;
    return m;
}

} // namespace

TEST(MonteCarlo, DiagonalToRotationIsDetectedPromptly) {
    DetectorConfig cfg;
    cfg.rho = 1.0;
    cfg.rank = 2;
    cfg.alpha = 0.18;
    cfg.threshold = 15.0;
    const VarModel model = diag_to_rotation();
    int hits = 0, early = 0, late = 0, silent = 0;
    for (std::uint64_t rep = 0; rep < 100; ++rep) {
        Rng rng = replication_rng(99, rep);
        const auto xs = simulate(model, rng);
        const auto fa = first_alarm(cfg, xs);
        if (!fa) ++silent;
        else if (*fa <= 200) ++early;
        else if (*fa <= 250) ++hits;
        else ++late;
    }
    RecordProperty("hits", hits);
    RecordProperty("early", early);
    RecordProperty("late", late);
    RecordProperty("silent", silent);
    EXPECT_GE(hits, 80) << "early=" << early << " late=" << late << " silent=" << silent;
}
