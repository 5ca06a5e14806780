#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "milnorflow/errors.hpp"
#include "milnorflow/multicentre.hpp"
#include "milnorflow/verify.hpp"

using namespace milnorflow;

TEST(Multicentre, LambdaOf) {
    EXPECT_DOUBLE_EQ(lambda_of(0.0, 2.0), 2.0);
    EXPECT_NEAR(lambda_of(0.5, 1.0), 4.0 / 3.0, 1e-15);
    EXPECT_LT(lambda_of(0.3, 1.0), lambda_of(0.3, 2.0));
    EXPECT_THROW(lambda_of(1.0, 1.0), DomainError);
}

TEST(Multicentre, OriginIsTheOnlyZero) {
    const MulticentreField f;
    EXPECT_EQ(f.eval(Vec8::Zero()).norm(), 0.0);
    for (double r : {0.2, 0.5, 0.8})
        for (const auto& z : stratified_s7({-0.9, 0.0, 0.9}, {0.1, 0.5, 0.9}, 5, 41))
            EXPECT_GT(f.eval(r * z).norm(), 0.0);
}

TEST(Multicentre, TangentToSpheres) {
    const MulticentreField f;
    for (double r : {0.4, 0.6, 0.8})
        for (const auto& z : stratified_s7({-0.5, 0.0, 0.5}, {0.2, 0.8}, 10, 42))
            EXPECT_LE(std::abs(f.eval(r * z).dot(z)), 1e-12 * r);
}

TEST(Multicentre, Linearization) {
    const Mat8 a = MulticentreField::linearization();
    Vec8 e1 = Vec8::Zero(), e2 = Vec8::Zero();
    e1(0) = 1.0;
    e2(1) = 1.0;
    EXPECT_EQ((a * e1 - e2).norm(), 0.0);
    EXPECT_EQ((a + a.transpose()).norm(), 0.0);
    const Mat8 rot = (2.0 * M_PI * a).exp();
    EXPECT_LE((rot - Mat8::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    const Eigen::VectorXcd ev = a.eigenvalues();
    for (int i = 0; i < 8; ++i) {
        EXPECT_NEAR(ev(i).real(), 0.0, 1e-14);
        EXPECT_NEAR(std::abs(ev(i).imag()), 1.0, 1e-14);
    }
}

TEST(Multicentre, FiniteDifferenceJacobian) {
    const MulticentreField f;
    for (double h : {1e-3, 1e-4}) {
        const Mat8 j = f.finite_difference_jacobian_at_zero(h);
        EXPECT_LE((j - MulticentreField::linearization()).cwiseAbs().maxCoeff(), 1e-6);
        EXPECT_LE((j + j.transpose()).cwiseAbs().maxCoeff(), 1e-6);
    }
    EXPECT_THROW(f.finite_difference_jacobian_at_zero(1e-8), DomainError);
}

// Remainder X - A x is flat at 0: it beats every power, here |x|^4.
TEST(Multicentre, RemainderIsFlat) {
    const MulticentreField f;
    const Mat8 a = MulticentreField::linearization();
    const Vec8 z = stratified_s7({0.2}, {0.6}, 1, 43).front();
    std::vector<double> q;
    for (double r : {0.3, 0.2, 0.1, 0.05, 0.03}) q.push_back((f.eval(r * z) - a * (r * z)).norm() / std::pow(r, 4));
    for (std::size_t i = 1; i < q.size(); ++i) EXPECT_LT(q[i], q[i - 1]);
    EXPECT_LE(q.back(), 1e-6);
}

TEST(Multicentre, PolarOrbitHasPeriodTwoPi) {
    const MulticentreField f;
    IntegratorConfig cfg;
    const auto res = period_on_sphere(f, 0.5, {default_s7_start(1.0), default_s7_start(-1.0)}, cfg);
    for (const auto& p : res) {
        ASSERT_TRUE(p.closed);
        EXPECT_NEAR(p.period, 2.0 * M_PI, 1e-4);
        EXPECT_LE(p.drift, 1e-9);
    }
}

TEST(Multicentre, PeriodGrowsTowardThePoles) {
    IntegratorConfig cfg;
    cfg.t_max = 2e4;
    const auto [f0, x0] = multicentre_family(0.5).make(0.0);
    const auto [f1, x1] = multicentre_family(0.5).make(0.5);
    const OrbitResult a = detect_period(f0, x0, cfg), b = detect_period(f1, x1, cfg);
    ASSERT_TRUE(a.closed);
    EXPECT_LE(a.drift, 1e-9);
    EXPECT_GT(b.period, a.period);
}

TEST(Multicentre, HighLatitudeOrbitReportsLowerBound) {
    IntegratorConfig cfg;
    cfg.t_max = 3000.0;
    const auto [f, x0] = multicentre_family(0.5).make(0.9);
    const OrbitResult o = detect_period(f, x0, cfg);
    EXPECT_FALSE(o.closed);
    EXPECT_DOUBLE_EQ(o.period, cfg.t_max);
    EXPECT_LT(o.phase_advance, 2.0 * M_PI);
}
