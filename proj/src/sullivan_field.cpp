#include "milnorflow/sullivan_field.hpp"

#include <cmath>
#include <limits>
#include <list>
#include <map>
#include <mutex>

#include "milnorflow/errors.hpp"

namespace milnorflow {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
constexpr std::size_t kCacheSize = 128;
// Curve parameters are resolved on a grid of 2^-30 so that integration drift
// in conserved quantities does not trigger rebuilds.
constexpr double kLambdaGrid = 1073741824.0;

struct CurveCache {
    std::mutex m;
    std::map<double, std::shared_ptr<const SmoothClosedSphereCurve>> entries;
    std::list<double> order;
};

CurveCache& cache() {
    static CurveCache c;
    return c;
}

std::shared_ptr<const SmoothClosedSphereCurve> build_for(double lambda) {
    if (lambda <= kLambdaMax) return build_gamma(std::max(lambda, kLambdaMin));
    const double h = std::exp(-lambda);
    TrochoidParams p = TrochoidParams::make(lambda, h, h);
    p.a = 1.0 / std::round(std::exp(2.0 * lambda));
    p.g = p.a / h;
    return SmoothClosedSphereCurve::build_periodic(p);
}

}  // namespace

std::shared_ptr<const SmoothClosedSphereCurve> curve_for_lambda(double lambda) {
    if (!(lambda >= kLambdaMin)) throw DomainError("curve_for_lambda: lambda below 0.5");
    if (lambda >= kLambdaFlat) return nullptr;
    const double key = std::round(lambda * kLambdaGrid) / kLambdaGrid;
    auto& c = cache();
    std::lock_guard<std::mutex> lock(c.m);
    auto it = c.entries.find(key);
    if (it != c.entries.end()) return it->second;
    auto curve = build_for(key);
    c.entries.emplace(key, curve);
    c.order.push_back(key);
    if (c.order.size() > kCacheSize) {
        c.entries.erase(c.order.front());
        c.order.pop_front();
    }
    return curve;
}

TangentLift::TangentLift(std::shared_ptr<const SmoothClosedSphereCurve> c) : c_(std::move(c)) {}

TangentPairPoint TangentLift::at(double t) const {
    const JVec3<1> g = c_->eval(Jet<1>::variable(t));
    const Vec3 x(g.x.value(), g.y.value(), g.z.value());
    const Vec3 d(g.x.c[1], g.y.c[1], g.z.c[1]);
    if (d.norm() < 1e-12) throw SingularParametrization("tangent_lift: speed below 1e-12");
    return {x, d / d.norm()};
}

TangentLift tangent_lift(std::shared_ptr<const SmoothClosedSphereCurve> c) { return TangentLift(std::move(c)); }

FiberLift::FiberLift(TangentLift base, double t0)
    : base_(std::move(base)), t0_(t0), s0_(base_.curve().s_of_t(t0)) {
    if (!(base_.curve().length() > 0.0)) throw ConstructionError("fiber_lift", "zero total length");
}

double FiberLift::fiber_angle(double t) const {
    const double l = base_.curve().length();
    double s = base_.curve().s_of_t(t) - s0_;
    s -= l * std::floor(s / l);
    return kTwoPi * s / l;
}

FramePoint FiberLift::at(double t) const {
    const TangentPairPoint p = base_.at(t);
    return frame_with_angle(p.x, p.y, fiber_angle(t));
}

FiberLift fiber_lift(const TangentLift& g, double t0) { return FiberLift(g, t0); }

double fiber_angle(const FramePoint& p) {
    const double psi = std::atan2(p.x.cross(p.y).dot(p.w), p.y.dot(p.w));
    return psi < 0.0 ? psi + kTwoPi : psi;
}

FramePoint so3_translate(const Mat3& g, const FramePoint& p) {
    return {g * p.x, g * p.y, g * p.w, std::nullopt};
}

FrameVelocity so3_translate(const Mat3& g, const FrameVelocity& v) { return {g * v.x, g * v.y, g * v.w}; }

FramePoint frame_with_angle(const Vec3& x, const Vec3& y, double psi) {
    return {x, y, std::cos(psi) * y + std::sin(psi) * x.cross(y), std::nullopt};
}

SullivanField::SullivanField(double lambda) : lambda_(lambda), curve_(curve_for_lambda(lambda)) {}

double SullivanField::length() const { return curve_ ? curve_->length() : 0.0; }

double SullivanField::sigma(double psi) const {
    if (!curve_) return 0.0;
    return curve_->sigma_at_phase(psi / kTwoPi);
}

FrameVelocity SullivanField::eval(const FramePoint& p) const {
    const Vec3 n = p.x.cross(p.y);
    FrameVelocity v;
    if (!curve_) {
        v.y = n;
        v.w = p.x.cross(p.w);
        return v;
    }
    const double s = sigma(fiber_angle(p));
    const double psidot = kTwoPi * s / curve_->length();
    v.x = s * p.y;
    v.y = n - s * p.x;
    v.w = (1.0 + psidot) * p.x.cross(p.w) - s * p.y.dot(p.w) * p.x;
    return v;
}

FrameVelocity SullivanField::hopf_reference(const FramePoint& p) {
    return {Vec3::Zero(), p.x.cross(p.y), p.x.cross(p.w)};
}

double SullivanField::flatness_distance(const FramePoint& p) const {
    const FrameVelocity a = eval(p), b = hopf_reference(p);
    return FrameVelocity{a.x - b.x, a.y - b.y, a.w - b.w}.max_abs();
}

LeafMatch SullivanField::leaf_through(const FramePoint& p) const {
    if (!curve_) throw LookupFailure("leaf_through: field is exactly Hopf, leaves are not defined", 0.0);
    const double phase = fiber_angle(p) / kTwoPi;
    const auto f = curve_->frame_at_phase(phase);
    const Mat3 g = frame_matrix(p.x, p.y) * frame_matrix(f.x, f.y).transpose();
    const FramePoint q = leaf_point(g, phase);
    const double res = std::sqrt((q.x - p.x).squaredNorm() + (q.y - p.y).squaredNorm() + (q.w - p.w).squaredNorm());
    if (res > 1e-6) throw LookupFailure("leaf_through: matching residual above 1e-6", res);
    return {g, phase, res};
}

FramePoint SullivanField::leaf_point(const Mat3& g, double phase) const {
    const auto f = curve_->frame_at_phase(phase);
    return so3_translate(g, frame_with_angle(f.x, f.y, kTwoPi * (phase - std::floor(phase))));
}

double SullivanField::period() const {
    if (!curve_) return kTwoPi;
    return curve_->integral_kg_ds();
}

FrameVelocity eval_X(double lambda, const FramePoint& p) { return SullivanField(lambda).eval(p); }

double period_quadrature(double lambda) { return SullivanField(lambda).period(); }

double lambda_modulation(double s) {
    if (s >= 0.5) return 0.0;
    if (s <= 0.0) return std::numeric_limits<double>::infinity();
    return std::exp(-1.0 / (0.5 - s)) / s;
}

S3S3Field::S3S3Field(double lambda, CoverSide side) : lambda_(lambda), side_(side) {}

double S3S3Field::effective_lambda(const Quaternion& theta) const {
    return lambda_ + lambda_modulation(std::norm(theta.z1()));
}

Quaternion hopf_generator(const Quaternion& w, CoverSide side) {
    return side == CoverSide::Left01 ? Quaternion::i() * w : w * Quaternion::i();
}

QuaternionPair S3S3Field::eval(const QuaternionPair& q) const { return eval_with(q, effective_lambda(q.theta)); }

QuaternionPair S3S3Field::eval_with(const QuaternionPair& q, double lam) const {
    QuaternionPair out{Quaternion::zero(), hopf_generator(q.w, side_)};
    if (!(lam < kLambdaFlat)) return out;
    const auto curve = curve_for_lambda(lam);
    const cplx z1 = q.theta.z1();
    const double psi = 2.0 * std::arg(z1);
    const double sigma = curve->sigma_at_phase(psi / kTwoPi);
    const double omega = kTwoPi * sigma / curve->length();
    out.theta = Quaternion::from_complex(cplx(0.0, omega) * z1, cplx(0.0, 0.0));
    const Quaternion gen(0.0, 1.0, 0.0, sigma);
    out.w = side_ == CoverSide::Left01 ? gen * q.w : q.w * gen;
    return out;
}

namespace {
struct FrameVectors {
    Vec3 x, y;
};

FrameVectors frame_vectors(const Quaternion& w, CoverSide side) {
    if (side == CoverSide::Left01) {
        return {-(w.conj() * Quaternion::i() * w).imag(), (w.conj() * Quaternion::j() * w).imag()};
    }
    return {(w * Quaternion::i() * w.conj()).imag(), (w * Quaternion::j() * w.conj()).imag()};
}

FrameVectors frame_vectors_dot(const Quaternion& w, const Quaternion& wd, CoverSide side) {
    const Quaternion I = Quaternion::i(), J = Quaternion::j();
    if (side == CoverSide::Left01) {
        return {-(wd.conj() * I * w + w.conj() * I * wd).imag(), (wd.conj() * J * w + w.conj() * J * wd).imag()};
    }
    return {(wd * I * w.conj() + w * I * wd.conj()).imag(), (wd * J * w.conj() + w * J * wd.conj()).imag()};
}
}  // namespace

FramePoint push_down(const QuaternionPair& q, CoverSide side) {
    const FrameVectors f = frame_vectors(q.w, side);
    FramePoint p = frame_with_angle(f.x, f.y, 2.0 * std::arg(q.theta.z1()));
    p.cover = std::make_pair(q.theta, q.w);
    return p;
}

FrameVelocity push_down_velocity(const QuaternionPair& q, const QuaternionPair& qdot, CoverSide side) {
    const FrameVectors f = frame_vectors(q.w, side);
    const FrameVectors fd = frame_vectors_dot(q.w, qdot.w, side);
    const cplx z1 = q.theta.z1(), z1d = qdot.theta.z1();
    const double psi = 2.0 * std::arg(z1);
    const double psid = 2.0 * std::imag(z1d / z1);
    const Vec3 n = f.x.cross(f.y);
    const Vec3 nd = fd.x.cross(f.y) + f.x.cross(fd.y);
    const double c = std::cos(psi), s = std::sin(psi);
    FrameVelocity v;
    v.x = fd.x;
    v.y = fd.y;
    v.w = -s * psid * f.y + c * fd.y + c * psid * n + s * nd;
    return v;
}

Quaternion quaternion_from_rotation(const Mat3& m) {
    const Eigen::Quaterniond q(m);
    return Quaternion(q.w(), q.x(), q.y(), q.z()).normalized();
}

QuaternionPair lift_frame(const FramePoint& p, CoverSide side) {
    const double psi = fiber_angle(p);
    const Quaternion theta(std::cos(psi / 2.0), std::sin(psi / 2.0), 0.0, 0.0);
    Mat3 m;
    if (side == CoverSide::Right10) {
        m = frame_matrix(p.x, p.y);
        return {theta, quaternion_from_rotation(m)};
    }
    m.col(0) = -p.x;
    m.col(1) = p.y;
    m.col(2) = -p.x.cross(p.y);
    return {theta, quaternion_from_rotation(m).conj()};
}

}  // namespace milnorflow
