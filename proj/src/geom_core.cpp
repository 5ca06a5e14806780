#include "milnorflow/geom_core.hpp"

#include <algorithm>
#include <cmath>

#include "milnorflow/errors.hpp"

namespace milnorflow {

double Quaternion::norm() const { return std::sqrt(norm2()); }

Quaternion Quaternion::inverse() const {
    const double n2 = norm2();
    if (n2 == 0.0) throw DomainError("inverse of the zero quaternion");
    return conj() / n2;
}

Quaternion Quaternion::normalized() const { return *this / norm(); }

bool Quaternion::is_unit(double tol) const { return std::abs(norm2() - 1.0) <= tol; }

Eigen::Matrix2cd Quaternion::matrix() const {
    Eigen::Matrix2cd m;
    m << z1(), -z2(), std::conj(z2()), std::conj(z1());
    return m;
}

Quaternion operator*(const Quaternion& p, const Quaternion& q) {
    return {p.a * q.a - p.b * q.b - p.c * q.c - p.d * q.d,
            p.a * q.b + p.b * q.a + p.c * q.d - p.d * q.c,
            p.a * q.c - p.b * q.d + p.c * q.a + p.d * q.b,
            p.a * q.d + p.b * q.c - p.c * q.b + p.d * q.a};
}

Quaternion operator+(const Quaternion& p, const Quaternion& q) {
    return {p.a + q.a, p.b + q.b, p.c + q.c, p.d + q.d};
}
Quaternion operator-(const Quaternion& p, const Quaternion& q) {
    return {p.a - q.a, p.b - q.b, p.c - q.c, p.d - q.d};
}
Quaternion operator*(double s, const Quaternion& q) { return {s * q.a, s * q.b, s * q.c, s * q.d}; }
Quaternion operator*(const Quaternion& q, double s) { return s * q; }
Quaternion operator/(const Quaternion& q, double s) { return (1.0 / s) * q; }

Quaternion qpow(const Quaternion& q, int n) {
    Quaternion base = n < 0 ? q.inverse() : q;
    Quaternion r = Quaternion::real(1.0);
    for (int k = 0; k < std::abs(n); ++k) r = r * base;
    return r;
}

Quaternion unit_product(std::span<const Quaternion> factors) {
    Quaternion r = Quaternion::real(1.0);
    int count = 0;
    for (const auto& f : factors) {
        r = r * f;
        if (++count == 16) {
            r = r.normalized();
            count = 0;
        }
    }
    return count > 0 ? r.normalized() : r;
}

double distance(const Quaternion& p, const Quaternion& q) { return (p - q).norm(); }

bool TangentPairPoint::valid(double tol) const {
    return std::abs(x.norm() - 1.0) <= tol && std::abs(y.norm() - 1.0) <= tol &&
           std::abs(x.dot(y)) <= tol;
}

bool FramePoint::valid(double tol) const {
    return std::abs(x.norm() - 1.0) <= tol && std::abs(y.norm() - 1.0) <= tol &&
           std::abs(w.norm() - 1.0) <= tol && std::abs(x.dot(y)) <= tol &&
           std::abs(x.dot(w)) <= tol;
}

double FrameVelocity::norm() const {
    return std::sqrt(x.squaredNorm() + y.squaredNorm() + w.squaredNorm());
}

double FrameVelocity::max_abs() const {
    return std::max({x.cwiseAbs().maxCoeff(), y.cwiseAbs().maxCoeff(), w.cwiseAbs().maxCoeff()});
}

Mat3 skew_matrix(const Vec3& x) {
    if (std::abs(x.norm() - 1.0) > 1e-10) throw DomainError("skew_matrix: x is not a unit vector");
    Mat3 a;
    a << 0.0, -x.z(), x.y(), x.z(), 0.0, -x.x(), -x.y(), x.x(), 0.0;
    return a;
}

std::pair<Vec3, Vec3> hopf_field_tangent(const TangentPairPoint& p) {
    return {Vec3::Zero(), skew_matrix(p.x) * p.y};
}

TangentPairPoint hopf_flow_tangent(const TangentPairPoint& p, double t) {
    return {p.x, axis_angle(p.x, t) * p.y};
}

static void require_unit(const C4& z) {
    if (std::abs(c4_norm(z) - 1.0) > 1e-10) throw DomainError("point is not on S^7");
}

C4 hopf_field_01(const C4& z) {
    require_unit(z);
    const cplx I(0.0, 1.0);
    return {I * z[0], I * z[1], I * z[2], I * z[3]};
}

C4 hopf_field_10(const C4& z) {
    require_unit(z);
    const cplx I(0.0, 1.0);
    return {I * z[0], -I * z[1], I * z[2], -I * z[3]};
}

C4 hopf_conjugacy(const C4& z) { return {z[0], std::conj(z[1]), z[2], std::conj(z[3])}; }

double c4_norm(const C4& z) {
    double s = 0.0;
    for (const auto& c : z) s += std::norm(c);
    return std::sqrt(s);
}

Vec8 c4_to_r8(const C4& z) {
    Vec8 x;
    for (int k = 0; k < 4; ++k) {
        x[2 * k] = z[k].real();
        x[2 * k + 1] = z[k].imag();
    }
    return x;
}

C4 r8_to_c4(const Vec8& x) {
    return {cplx(x[0], x[1]), cplx(x[2], x[3]), cplx(x[4], x[5]), cplx(x[6], x[7])};
}

C4 quaternions_to_c4(const Quaternion& p1, const Quaternion& p2) {
    return {p1.z1(), p1.z2(), p2.z1(), p2.z2()};
}

std::pair<Quaternion, Quaternion> c4_to_quaternions(const C4& z) {
    return {Quaternion::from_complex(z[0], z[1]), Quaternion::from_complex(z[2], z[3])};
}

Mat3 rotation_from_unit_quaternion(const Quaternion& q) {
    if (!q.is_unit(1e-10)) throw DomainError("rotation_from_unit_quaternion: |q| != 1");
    const double a = q.a, b = q.b, c = q.c, d = q.d;
    Mat3 r;
    r << a * a + b * b - c * c - d * d, 2 * (b * c - a * d), 2 * (b * d + a * c),
        2 * (b * c + a * d), a * a - b * b + c * c - d * d, 2 * (c * d - a * b),
        2 * (b * d - a * c), 2 * (c * d + a * b), a * a - b * b - c * c + d * d;
    return r;
}

Vec3 cover_angular_velocity(const Quaternion& q, const Quaternion& qdot) {
    return 2.0 * (qdot * q.conj()).imag();
}

Mat3 frame_matrix(const Vec3& x, const Vec3& y) {
    Mat3 f;
    f.col(0) = x;
    f.col(1) = y;
    f.col(2) = x.cross(y);
    return f;
}

bool is_rotation(const Mat3& r, double tol) {
    return (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
           std::abs(r.determinant() - 1.0) <= tol;
}

Mat3 axis_angle(const Vec3& axis, double angle) {
    return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

double rotation_angle_between(const Mat3& a, const Mat3& b) {
    const double c = std::clamp(((a.transpose() * b).trace() - 1.0) / 2.0, -1.0, 1.0);
    return std::acos(c);
}

}  // namespace milnorflow
