#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <optional>
#include <span>
#include <utility>

namespace milnorflow {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec8 = Eigen::Matrix<double, 8, 1>;
using cplx = std::complex<double>;
using C4 = std::array<cplx, 4>;

/**
 * @brief Real quaternion q = a + b i + c j + d k.
 *
 * The complex-pair view is q = z1 + z2 j with z1 = a + b i, z2 = c + d i.
 */
struct Quaternion {
    double a = 1.0, b = 0.0, c = 0.0, d = 0.0;

    Quaternion() = default;
    Quaternion(double a_, double b_, double c_, double d_) : a(a_), b(b_), c(c_), d(d_) {}

    static Quaternion from_complex(cplx z1, cplx z2) {
        return {z1.real(), z1.imag(), z2.real(), z2.imag()};
    }
    static Quaternion pure(const Vec3& v) { return {0.0, v.x(), v.y(), v.z()}; }
    static Quaternion real(double s) { return {s, 0.0, 0.0, 0.0}; }
    static Quaternion i() { return {0, 1, 0, 0}; }
    static Quaternion j() { return {0, 0, 1, 0}; }
    static Quaternion k() { return {0, 0, 0, 1}; }
    static Quaternion zero() { return {0, 0, 0, 0}; }

    cplx z1() const { return {a, b}; }
    cplx z2() const { return {c, d}; }
    Vec3 imag() const { return {b, c, d}; }
    Eigen::Vector4d vec() const { return {a, b, c, d}; }

    double norm2() const { return a * a + b * b + c * c + d * d; }
    double norm() const;
    Quaternion conj() const { return {a, -b, -c, -d}; }
    Quaternion inverse() const;
    Quaternion normalized() const;
    bool is_unit(double tol = 1e-12) const;

    /** @brief The 2x2 complex matrix M(q) = [[z1, -z2], [conj(z2), conj(z1)]]; M(p q) = M(p) M(q). */
    Eigen::Matrix2cd matrix() const;
};

Quaternion operator*(const Quaternion& p, const Quaternion& q);
Quaternion operator+(const Quaternion& p, const Quaternion& q);
Quaternion operator-(const Quaternion& p, const Quaternion& q);
Quaternion operator*(double s, const Quaternion& q);
Quaternion operator*(const Quaternion& q, double s);
Quaternion operator/(const Quaternion& q, double s);

/** @brief Integer power, negative exponents through the inverse. */
Quaternion qpow(const Quaternion& q, int n);

/** @brief Product of unit quaternions, renormalized every 16 multiplications. */
Quaternion unit_product(std::span<const Quaternion> factors);

double distance(const Quaternion& p, const Quaternion& q);

/** @brief Point (x, y) of the unit tangent bundle S(S^2). */
struct TangentPairPoint {
    Vec3 x, y;
    bool valid(double tol = 1e-12) const;
};

/** @brief Point (x, y, w) of M = S(S^2) x_{S^2} S(S^2). */
struct FramePoint {
    Vec3 x, y, w;
    std::optional<std::pair<Quaternion, Quaternion>> cover;
    bool valid(double tol = 1e-12) const;
};

/** @brief Velocity (xdot, ydot, wdot) of a curve in M, as a vector of R^9. */
struct FrameVelocity {
    Vec3 x = Vec3::Zero(), y = Vec3::Zero(), w = Vec3::Zero();
    double norm() const;
    double max_abs() const;
};

/** @brief A(x) with A(x) y = x cross y. Throws DomainError unless |x| = 1. */
Mat3 skew_matrix(const Vec3& x);

/** @brief Hopf field on S(S^2): (0, A(x) y). */
std::pair<Vec3, Vec3> hopf_field_tangent(const TangentPairPoint& p);

/** @brief Flow of the Hopf field for time t (exact rotation of y about x). */
TangentPairPoint hopf_flow_tangent(const TangentPairPoint& p, double t);

/** @brief H_{0,1}: z_k' = i z_k. Throws DomainError unless |z| = 1. */
C4 hopf_field_01(const C4& z);

/** @brief H_{1,0}: (i z1, -i z2, i z3, -i z4). */
C4 hopf_field_10(const C4& z);

/** @brief Conjugacy (z1, z2, z3, z4) -> (z1, conj z2, z3, conj z4). */
C4 hopf_conjugacy(const C4& z);

double c4_norm(const C4& z);
Vec8 c4_to_r8(const C4& z);
C4 r8_to_c4(const Vec8& x);

/** @brief Quaternion pair (p1, p2) -> C^4 (z1, z2, z3, z4). */
C4 quaternions_to_c4(const Quaternion& p1, const Quaternion& p2);
std::pair<Quaternion, Quaternion> c4_to_quaternions(const C4& z);

/** @brief Rotation p -> q p conj(q). Throws DomainError unless |q| = 1. */
Mat3 rotation_from_unit_quaternion(const Quaternion& q);

/** @brief Spatial angular velocity of R(q(t)): 2 Im(qdot conj q). */
Vec3 cover_angular_velocity(const Quaternion& q, const Quaternion& qdot);

/** @brief Columns (x, y, x cross y). */
Mat3 frame_matrix(const Vec3& x, const Vec3& y);

bool is_rotation(const Mat3& r, double tol = 1e-10);

/** @brief Rotation by angle about a unit axis (Rodrigues). */
Mat3 axis_angle(const Vec3& axis, double angle);

/** @brief Geodesic angle between two rotations. */
double rotation_angle_between(const Mat3& a, const Mat3& b);

}  // namespace milnorflow
