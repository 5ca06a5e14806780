#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "milnorflow/errors.hpp"
#include "milnorflow/geom_core.hpp"

using namespace milnorflow;

namespace {

Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    return Vec3(n(rng), n(rng), n(rng)).normalized();
}

Quaternion random_unit_quaternion(std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    return Quaternion(n(rng), n(rng), n(rng), n(rng)).normalized();
}

}  // namespace

TEST(SkewMatrix, BasisProducts) {
    const Vec3 a = skew_matrix(Vec3(0, 0, 1)) * Vec3(1, 0, 0);
    EXPECT_NEAR((a - Vec3(0, 1, 0)).norm(), 0.0, 1e-15);
    const Vec3 b = skew_matrix(Vec3(1, 0, 0)) * Vec3(0, 1, 0);
    EXPECT_NEAR((b - Vec3(0, 0, 1)).norm(), 0.0, 1e-15);
}

TEST(SkewMatrix, KillsItsAxisAndIsSkew) {
    std::mt19937_64 rng(1);
    for (int k = 0; k < 200; ++k) {
        const Vec3 x = random_unit(rng);
        const Mat3 a = skew_matrix(x);
        EXPECT_LE((a * x).norm(), 1e-15);
        EXPECT_EQ((a + a.transpose()).cwiseAbs().maxCoeff(), 0.0);
    }
}

TEST(SkewMatrix, RejectsNonUnitAxis) { EXPECT_THROW(skew_matrix(Vec3(0, 0, 2)), DomainError); }

TEST(HopfTangent, FieldAtBasisPoint) {
    const auto [xd, yd] = hopf_field_tangent({Vec3(0, 0, 1), Vec3(1, 0, 0)});
    EXPECT_EQ(xd.norm(), 0.0);
    EXPECT_NEAR((yd - Vec3(0, 1, 0)).norm(), 0.0, 1e-15);
}

TEST(HopfTangent, FlowIsPeriodicAndOrthogonal) {
    std::mt19937_64 rng(2);
    for (int k = 0; k < 100; ++k) {
        const Vec3 x = random_unit(rng);
        const Vec3 y = random_unit(rng).cross(x).normalized();
        const TangentPairPoint p{x, y};
        EXPECT_LE((hopf_flow_tangent(p, 2.0 * M_PI).y - y).norm(), 1e-12);
        EXPECT_LE(std::abs(hopf_field_tangent(p).second.dot(y)), 1e-15);
    }
}

TEST(HopfC4, DirectSubstitution) {
    const cplx I(0, 1);
    const C4 a = hopf_field_01({1.0, 0.0, 0.0, 0.0});
    EXPECT_EQ(a[0], I);
    const C4 b = hopf_field_10({0.0, 1.0, 0.0, 0.0});
    EXPECT_EQ(b[1], -I);
    EXPECT_THROW(hopf_field_01({2.0, 0.0, 0.0, 0.0}), DomainError);
}

TEST(HopfC4, ConjugacyIntertwinesTheTwoFields) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n;
    for (int k = 0; k < 500; ++k) {
        C4 z{cplx(n(rng), n(rng)), cplx(n(rng), n(rng)), cplx(n(rng), n(rng)), cplx(n(rng), n(rng))};
        const double r = c4_norm(z);
        for (auto& c : z) c /= r;
        const C4 lhs = hopf_conjugacy(hopf_field_10(z));
        const C4 rhs = hopf_field_01(hopf_conjugacy(z));
        for (int i = 0; i < 4; ++i) EXPECT_LE(std::abs(lhs[i] - rhs[i]), 1e-12);
    }
}

TEST(HopfC4, FullTurnIsIdentity) {
    const C4 z{cplx(0.5, 0.1), cplx(-0.3, 0.2), cplx(0.4, -0.6), cplx(0.1, 0.25)};
    const cplx phase = std::exp(cplx(0.0, 2.0 * M_PI));
    for (const auto& c : z) EXPECT_LE(std::abs(phase * c - c), 1e-15);
}

TEST(Quaternion, MultiplicationTable) {
    const Quaternion i = Quaternion::i(), j = Quaternion::j(), k = Quaternion::k();
    EXPECT_LE(distance(i * j, k), 0.0);
    EXPECT_LE(distance(j * i, -1.0 * k), 0.0);
    EXPECT_LE(distance(j * j, Quaternion::real(-1.0)), 0.0);
    EXPECT_LE(distance(qpow(i, -1), -1.0 * i), 1e-15);
}

TEST(Quaternion, ComplexPairMatrixIsMultiplicative) {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 100; ++t) {
        const Quaternion p = random_unit_quaternion(rng), q = random_unit_quaternion(rng);
        EXPECT_LE(((p * q).matrix() - p.matrix() * q.matrix()).cwiseAbs().maxCoeff(), 1e-15);
    }
}

TEST(Quaternion, UnitProductStaysUnit) {
    std::mt19937_64 rng(5);
    std::vector<Quaternion> f;
    for (int t = 0; t < 1000; ++t) f.push_back(random_unit_quaternion(rng));
    EXPECT_LE(std::abs(unit_product(f).norm() - 1.0), 1e-14);
}

TEST(DoubleCover, IdentityAndQuarterTurn) {
    EXPECT_LE((rotation_from_unit_quaternion(Quaternion()) - Mat3::Identity()).cwiseAbs().maxCoeff(), 0.0);
    const double s = std::sqrt(0.5);
    const Mat3 r = rotation_from_unit_quaternion(Quaternion(s, 0, 0, s));
    EXPECT_LE((r * Vec3(1, 0, 0) - Vec3(0, 1, 0)).norm(), 1e-15);
    EXPECT_LE((r * Vec3(0, 0, 1) - Vec3(0, 0, 1)).norm(), 1e-15);
}

TEST(DoubleCover, HomomorphismAndTwoToOne) {
    std::mt19937_64 rng(6);
    for (int t = 0; t < 500; ++t) {
        const Quaternion p = random_unit_quaternion(rng), q = random_unit_quaternion(rng);
        const Mat3 lhs = rotation_from_unit_quaternion(p * q);
        const Mat3 rhs = rotation_from_unit_quaternion(p) * rotation_from_unit_quaternion(q);
        EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_EQ((rotation_from_unit_quaternion(p) - rotation_from_unit_quaternion(-1.0 * p)).cwiseAbs().maxCoeff(),
                  0.0);
        EXPECT_TRUE(is_rotation(lhs));
    }
}

TEST(DoubleCover, AngularVelocityOfOneParameterSubgroup) {
    const Quaternion q(std::cos(0.3), std::sin(0.3), 0, 0);
    const Quaternion qdot(-std::sin(0.3), std::cos(0.3), 0, 0);
    EXPECT_LE((cover_angular_velocity(q, qdot) - Vec3(2, 0, 0)).norm(), 1e-15);
}

TEST(Rotations, AxisAngleAndDistance) {
    const Mat3 a = axis_angle(Vec3(0, 0, 1), 0.4), b = axis_angle(Vec3(0, 0, 1), 1.1);
    EXPECT_NEAR(rotation_angle_between(a, b), 0.7, 1e-14);
    EXPECT_TRUE(is_rotation(frame_matrix(Vec3(1, 0, 0), Vec3(0, 1, 0))));
}

TEST(C4, QuaternionPairRoundTrip) {
    const Quaternion p1(0.1, 0.2, 0.3, 0.4), p2(-0.5, 0.6, -0.7, 0.8);
    const auto [a, b] = c4_to_quaternions(quaternions_to_c4(p1, p2));
    EXPECT_EQ(distance(a, p1), 0.0);
    EXPECT_EQ(distance(b, p2), 0.0);
    const Vec8 x = c4_to_r8(quaternions_to_c4(p1, p2));
    const C4 z = r8_to_c4(x);
    EXPECT_EQ(z[0], p1.z1());
}
