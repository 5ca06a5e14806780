#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "milnorflow/dynamics.hpp"
#include "milnorflow/errors.hpp"
#include "milnorflow/sullivan_field.hpp"
#include "milnorflow/verify.hpp"

using namespace milnorflow;

namespace {

Eigen::Matrix<double, 9, 1> r9(const FramePoint& p) {
    Eigen::Matrix<double, 9, 1> v;
    v << p.x, p.y, p.w;
    return v;
}

Eigen::Matrix<double, 9, 1> r9(const FrameVelocity& p) {
    Eigen::Matrix<double, 9, 1> v;
    v << p.x, p.y, p.w;
    return v;
}

Mat3 random_rotation(std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    return rotation_from_unit_quaternion(Quaternion(n(rng), n(rng), n(rng), n(rng)).normalized());
}

}  // namespace

TEST(TangentLift, PointsOnUnitTangentBundle) {
    const TangentLift g = tangent_lift(curve_for_lambda(1.0));
    const double T = g.curve().period();
    for (int i = 0; i < 500; ++i) EXPECT_TRUE(g.at(T * i / 500.0).valid(1e-10));
    const TangentPairPoint a = g.at(0.0), b = g.at(T);
    EXPECT_LE((a.x - b.x).norm() + (a.y - b.y).norm(), 1e-8);
}

TEST(FiberLift, StartHalfAndClosure) {
    const FiberLift f = fiber_lift(tangent_lift(curve_for_lambda(1.5)), 0.0);
    const auto& c = f.base().curve();
    const FramePoint p0 = f.at(0.0);
    EXPECT_LE((p0.w - p0.y).norm(), 1e-12);
    const FramePoint ph = f.at(c.t_of_s(0.5 * c.length()));
    EXPECT_LE((ph.w + ph.y).norm(), 1e-8);
    const FramePoint p1 = f.at(c.period());
    EXPECT_LE((r9(p1) - r9(p0)).norm(), 1e-8);
}

TEST(So3Action, IdentityIsometryComposition) {
    std::mt19937_64 rng(11);
    for (const auto& p : random_frames(200, 12)) {
        EXPECT_EQ((r9(so3_translate(Mat3::Identity(), p)) - r9(p)).norm(), 0.0);
        const Mat3 g = random_rotation(rng), h = random_rotation(rng);
        const FramePoint q = so3_translate(g, p);
        EXPECT_NEAR(q.y.dot(q.w), p.y.dot(p.w), 1e-12);
        EXPECT_LE((r9(so3_translate(g * h, p)) - r9(so3_translate(g, so3_translate(h, p)))).norm(), 1e-12);
    }
}

TEST(LeafLookup, ReferenceLeafAndRoundTrip) {
    const SullivanField f(1.0);
    std::mt19937_64 rng(13);
    for (double ph : {0.05, 0.3, 0.71}) {
        const LeafMatch m = f.leaf_through(f.leaf_point(Mat3::Identity(), ph));
        EXPECT_LE((m.g - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-8);
        const Mat3 g0 = random_rotation(rng);
        const LeafMatch m2 = f.leaf_through(f.leaf_point(g0, ph));
        EXPECT_LE((m2.g - g0).cwiseAbs().maxCoeff(), 1e-8);
        const LeafMatch m3 = f.leaf_through(f.leaf_point(g0, ph + 0.13));
        EXPECT_LE((m3.g - m2.g).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(LeafLookup, EveryFrameOnALeaf) {
    for (double lam : {1.0, 2.5}) {
        const SullivanField f(lam);
        for (const auto& p : random_frames(300, 14)) EXPECT_LE(f.leaf_through(p).residual, 1e-6);
    }
}

TEST(LeafLookup, OffManifoldPointFails) {
    const SullivanField f(1.0);
    FramePoint p = random_frames(1, 15)[0];
    p.w *= 1.01;
    EXPECT_THROW(f.leaf_through(p), LookupFailure);
}

TEST(SullivanField, HopfCoefficientIsOne) {
    for (double lam : {1.0, 3.0}) {
        const SullivanField f(lam);
        for (const auto& p : random_frames(100, 16)) {
            const FrameVelocity v = f.eval(p);
            const double sigma = f.sigma(fiber_angle(p));
            EXPECT_LE((v.y + sigma * p.x - p.x.cross(p.y)).norm(), 1e-14);
            EXPECT_LE((v.x - sigma * p.y).norm(), 1e-14);
        }
    }
}

TEST(SullivanField, TangentToM) {
    const SullivanField f(2.0);
    for (const auto& p : random_frames(200, 17)) {
        const FrameVelocity v = f.eval(p);
        EXPECT_LE(std::abs(v.x.dot(p.x)), 1e-14);
        EXPECT_LE(std::abs(v.y.dot(p.y)), 1e-14);
        EXPECT_LE(std::abs(v.w.dot(p.w)), 1e-14);
        EXPECT_LE(std::abs(v.x.dot(p.y) + p.x.dot(v.y)), 1e-14);
        EXPECT_LE(std::abs(v.x.dot(p.w) + p.x.dot(v.w)), 1e-14);
    }
}

TEST(SullivanField, Equivariance) {
    std::mt19937_64 rng(18);
    const SullivanField f(1.5);
    for (const auto& p : random_frames(200, 19)) {
        const Mat3 g = random_rotation(rng);
        const FrameVelocity a = f.eval(so3_translate(g, p));
        const FrameVelocity b = so3_translate(g, f.eval(p));
        EXPECT_LE((r9(a) - r9(b)).norm(), 1e-8);
    }
}

TEST(SullivanField, TangentToLeaves) {
    const SullivanField f(1.0);
    std::mt19937_64 rng(20);
    for (int k = 0; k < 100; ++k) {
        const Mat3 g = random_rotation(rng);
        const double ph = 0.01 + 0.98 * k / 100.0, h = 1e-7;
        const Eigen::Matrix<double, 9, 1> tan = r9(f.leaf_point(g, ph + h)) - r9(f.leaf_point(g, ph - h));
        const Eigen::Matrix<double, 9, 1> x = r9(f.eval(f.leaf_point(g, ph)));
        const double c = tan.dot(x) / (tan.norm() * x.norm());
        EXPECT_LE(std::acos(std::min(1.0, c)), 1e-6);
    }
}

TEST(SullivanField, FlatBeyondCutoff) {
    const SullivanField f(kLambdaFlat + 1.0);
    for (const auto& p : random_frames(20, 21)) EXPECT_EQ(f.flatness_distance(p), 0.0);
    EXPECT_DOUBLE_EQ(f.period(), 2.0 * M_PI);
}

// sup |X_lambda - (H,0)| over a 10^3 sample against lambda: log fit slope -1 +- 0.15.
TEST(SullivanField, FlatnessDecaySlope) {
    const auto frames = random_frames(1000, 22);
    std::vector<double> x = {1.0, 2.0, 3.0}, y;
    for (double lam : x) {
        const SullivanField f(lam);
        double m = 0.0;
        for (const auto& p : frames) m = std::max(m, f.flatness_distance(p));
        y.push_back(std::log(m));
    }
    const double slope = fit_slope(x, y);
    EXPECT_GE(slope, -1.15);
    EXPECT_LE(slope, -0.85);
}

TEST(S3S3Lift, PushDownReproducesTwiceTheField) {
    for (CoverSide side : {CoverSide::Left01, CoverSide::Right10}) {
        for (double lam : {1.0, 2.5, 7.0}) {
            const S3S3Field F(lam, side);
            for (const auto& p : random_frames(40, 23)) {
                QuaternionPair q = lift_frame(p, side);
                const FramePoint back = push_down(q, side);
                EXPECT_LE((r9(back) - r9(p)).norm(), 1e-12);
                const FrameVelocity v = push_down_velocity(q, F.eval(q), side);
                const FrameVelocity ref = eval_X(F.effective_lambda(q.theta), back);
                EXPECT_LE((r9(v) - 2.0 * r9(ref)).norm(), 1e-10);
            }
        }
    }
}

TEST(S3S3Lift, SheetMonodromyAlongALeaf) {
    const SullivanField f(1.0);
    const CoverSide side = CoverSide::Left01;
    QuaternionPair start = lift_frame(f.leaf_point(Mat3::Identity(), 0.0), side), prev = start;
    const int n = 20000;
    for (int i = 1; i <= n; ++i) {
        QuaternionPair q = lift_frame(f.leaf_point(Mat3::Identity(), static_cast<double>(i) / n), side);
        if (q.theta.vec().dot(prev.theta.vec()) < 0.0) q.theta = -1.0 * q.theta;
        if (q.w.vec().dot(prev.w.vec()) < 0.0) q.w = -1.0 * q.w;
        prev = q;
    }
    auto close_up_to_sign = [](const Quaternion& a, const Quaternion& b) {
        return std::min(distance(a, b), distance(a, -1.0 * b));
    };
    EXPECT_LE(close_up_to_sign(prev.theta, start.theta), 1e-8);
    EXPECT_LE(close_up_to_sign(prev.w, start.w), 1e-8);
}

TEST(S3S3Lift, ApproachesHopfOnSecondFactor) {
    const auto frames = random_frames(200, 24);
    std::vector<double> x = {1.0, 2.0, 3.0}, y;
    for (double lam : x) {
        const S3S3Field F(lam, CoverSide::Left01);
        double m = 0.0;
        for (const auto& p : frames) {
            QuaternionPair q = lift_frame(p, CoverSide::Left01);
            if (std::norm(q.theta.z1()) < 0.5) continue;
            const QuaternionPair v = F.eval(q);
            m = std::max({m, v.theta.norm(), distance(v.w, hopf_generator(q.w, CoverSide::Left01))});
        }
        y.push_back(std::log(m));
    }
    EXPECT_LT(y[1], y[0]);
    EXPECT_LT(y[2], y[1]);
    EXPECT_LE(fit_slope(x, y), -0.85);
}

TEST(Periods, QuadratureGrowsAndMatchesIntegration) {
    std::vector<double> t;
    for (double lam : {1.0, 1.5, 2.0, 2.5, 3.0}) t.push_back(period_quadrature(lam));
    for (std::size_t i = 1; i < t.size(); ++i) EXPECT_GT(t[i], t[i - 1]);
    const auto [f, x0] = sullivan_family().make(1.5);
    const OrbitResult o = detect_period(f, x0, IntegratorConfig{});
    ASSERT_TRUE(o.closed);
    EXPECT_LE(std::abs(o.period - t[1]) / t[1], 0.01);
}

TEST(Modulation, SupportAndValues) {
    EXPECT_EQ(lambda_modulation(0.5), 0.0);
    EXPECT_EQ(lambda_modulation(0.9), 0.0);
    EXPECT_NEAR(lambda_modulation(0.25), std::exp(-4.0) / 0.25, 1e-15);
    EXPECT_TRUE(std::isinf(lambda_modulation(0.0)));
}
