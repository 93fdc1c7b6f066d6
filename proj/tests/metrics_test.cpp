#include "fixtures.hpp"

#include <chasm/metrics.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace chasm;

TEST(Classify, Outcomes) {
    const EvalConfig cfg;
    EXPECT_EQ(classify_single(200, 230, cfg), Outcome::TP);
    EXPECT_EQ(classify_single(200, 100, cfg), Outcome::FP);
    EXPECT_EQ(classify_single(200, std::nullopt, cfg), Outcome::FN_none);
    EXPECT_EQ(classify_single(200, 251, cfg), Outcome::FN_late);
    EXPECT_EQ(classify_single(200, 250, cfg), Outcome::TP);
    EXPECT_EQ(classify_single(200, 200, cfg), Outcome::TP);
    EXPECT_EQ(classify_single(200, 199, cfg), Outcome::FP);
    EXPECT_EQ(classify_single(200, 195, EvalConfig{5, 50, 10000}), Outcome::TP);
    EXPECT_THROW(classify_single(200, 10, EvalConfig{-1, 50, 10000}), InvalidArgument);
}

TEST(Classify, ExactlyOneOutcomePerSequence) {
    const EvalConfig cfg{3, 7, 1000};
    for (std::int64_t tau_hat = 0; tau_hat < 400; ++tau_hat) {
        const Outcome o = classify_single(200, tau_hat, cfg);
        const int hits = (tau_hat < 197) + (tau_hat > 207) + (tau_hat >= 197 && tau_hat <= 207);
        EXPECT_EQ(hits, 1);
        if (tau_hat < 197) EXPECT_EQ(o, Outcome::FP);
        else if (tau_hat > 207) EXPECT_EQ(o, Outcome::FN_late);
        else EXPECT_EQ(o, Outcome::TP);
    }
}

TEST(PrfSingle, WorkedExample) {
    std::vector<Outcome> o(8, Outcome::TP);
    o.push_back(Outcome::FP);
    o.push_back(Outcome::FN_none);
    const Prf p = prf_single(o, 10);
    EXPECT_DOUBLE_EQ(p.precision, 8.0 / 9.0);
    EXPECT_DOUBLE_EQ(p.recall, 0.8);
    EXPECT_NEAR(p.f1, 0.8421, 1e-4);
    EXPECT_DOUBLE_EQ(p.f1, 2.0 * (8.0 / 9.0) * 0.8 / (8.0 / 9.0 + 0.8));
}

TEST(PrfSingle, Extremes) {
    const std::vector<Outcome> all_tp(5, Outcome::TP), silent(5, Outcome::FN_none);
    const Prf a = prf_single(all_tp, 5);
    EXPECT_EQ(a.precision, 1.0);
    EXPECT_EQ(a.recall, 1.0);
    EXPECT_EQ(a.f1, 1.0);
    const Prf z = prf_single(silent, 5);
    EXPECT_EQ(z.precision, 0.0);
    EXPECT_EQ(z.recall, 0.0);
    EXPECT_EQ(z.f1, 0.0);
    EXPECT_THROW(prf_single(all_tp, 4), InvalidArgument);
}

TEST(PrfSingle, LateDetectionsCountAsDetections) {
    const std::vector<Outcome> o{Outcome::TP, Outcome::FN_late, Outcome::FN_late, Outcome::FN_none};
    const Prf p = prf_single(o, 4);
    EXPECT_DOUBLE_EQ(p.precision, 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(p.recall, 0.25);
}

TEST(PrfSingle, TenSequenceFixture) {
    const auto& fx = fixtures::ten_sequences();
    std::vector<Outcome> outcomes;
    for (std::size_t i = 0; i < fx.size(); ++i) {
        outcomes.push_back(classify_single(fx[i].tau, fx[i].tau_hat, EvalConfig{}));
        EXPECT_EQ(outcomes.back(), fx[i].expected) << "sequence " << i;
    }
    const Prf p = prf_single(outcomes, fx.size());
    EXPECT_EQ(p.precision, fixtures::ten_sequence_precision);
    EXPECT_EQ(p.recall, fixtures::ten_sequence_recall);
    EXPECT_EQ(p.f1, fixtures::ten_sequence_f1);
}

TEST(PrfMulti, Examples) {
    const EvalConfig cfg;
    const std::vector<std::int64_t> truth{100}, det{120, 130}, none;
    const Prf p = prf_multi(truth, det, cfg);
    EXPECT_DOUBLE_EQ(p.precision, 0.5);
    EXPECT_DOUBLE_EQ(p.recall, 1.0);

    const Prf e = prf_multi(truth, none, cfg);
    EXPECT_EQ(e.precision, 0.0);
    EXPECT_EQ(e.recall, 0.0);
    EXPECT_EQ(e.f1, 0.0);

    const std::vector<std::int64_t> cps{50, 300, 900};
    const Prf exact = prf_multi(cps, cps, EvalConfig{0, 0, 10000});
    EXPECT_EQ(exact.precision, 1.0);
    EXPECT_EQ(exact.recall, 1.0);
    EXPECT_EQ(exact.f1, 1.0);
}

TEST(PrfMulti, RequiresSortedInputs) {
    const std::vector<std::int64_t> a{3, 1}, b{1, 2};
    EXPECT_THROW(prf_multi(a, b, EvalConfig{}), InvalidArgument);
    EXPECT_THROW(prf_multi(b, a, EvalConfig{}), InvalidArgument);
}

TEST(PrfMulti, Properties) {
    std::mt19937_64 rng(41);
    std::uniform_int_distribution<std::int64_t> pos(0, 5000);
    const EvalConfig cfg{5, 50, 10000};
    for (int rep = 0; rep < 500; ++rep) {
        std::vector<std::int64_t> truth(1 + rep % 6), det(rep % 9);
        for (auto& t : truth) t = pos(rng);
        for (auto& d : det) d = pos(rng);
        std::sort(truth.begin(), truth.end());
        std::sort(det.begin(), det.end());
        const Prf p = prf_multi(truth, det, cfg);
        for (double v : {p.precision, p.recall, p.f1}) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
        EXPECT_LE(p.f1, std::max(p.precision, p.recall) + 1e-15);

        // A detection far from every change cannot raise P and leaves R.
        auto more = det;
        more.push_back(10'000'000);
        const Prf q = prf_multi(truth, more, cfg);
        EXPECT_LE(q.precision, p.precision);
        EXPECT_EQ(q.recall, p.recall);
    }
}

TEST(Arl, InControlAndDelay) {
    const EvalConfig cfg;
    const std::vector<RunLength> h0{{500, {}}, {700, {}}};
    const auto a = arl(h0, ArlMode::in_control, cfg);
    EXPECT_DOUBLE_EQ(a.value, 600.0);
    EXPECT_FALSE(a.censored());

    const std::vector<RunLength> cens{{std::nullopt, {}}, {4000, {}}};
    const auto c = arl(cens, ArlMode::in_control, cfg);
    EXPECT_DOUBLE_EQ(c.value, 7000.0);
    EXPECT_TRUE(c.censored());
    EXPECT_DOUBLE_EQ(c.censored_fraction, 0.5);

    const std::vector<RunLength> delays{{210, 200}, {230, 200}, {320, 300}, {100, 200}, {std::nullopt, 200}};
    const auto d = arl(delays, ArlMode::delay, cfg);
    EXPECT_DOUBLE_EQ(d.value, 20.0);
    EXPECT_EQ(d.used, 3u);
}

TEST(Arl, DelayWithoutTruePositivesIsUndefined) {
    const std::vector<RunLength> runs{{100, 200}, {std::nullopt, 200}};
    const auto d = arl(runs, ArlMode::delay, EvalConfig{});
    EXPECT_TRUE(std::isnan(d.value));
    EXPECT_EQ(d.used, 0u);
    EXPECT_THROW(arl(std::vector<RunLength>{}, ArlMode::in_control, EvalConfig{}), InvalidArgument);
    const std::vector<RunLength> no_tau{{100, std::nullopt}};
    EXPECT_THROW(arl(no_tau, ArlMode::delay, EvalConfig{}), InvalidArgument);
}
