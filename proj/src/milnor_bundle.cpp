#include "milnorflow/milnor_bundle.hpp"

#include <cmath>
#include <limits>

#include "milnorflow/errors.hpp"

namespace milnorflow {

namespace {

void require_supported(const BundleSpec& spec) {
    spec.validate();
    if (!spec.supported()) {
        throw UnsupportedBundle("fibration field is only defined for (h,j) = (0,1) and (1,0)");
    }
}

bool is01(const BundleSpec& spec) { return spec.h == 0; }

CoverSide side_of(const BundleSpec& spec) { return is01(spec) ? CoverSide::Left01 : CoverSide::Right10; }

double dot(const Quaternion& p, const Quaternion& q) { return p.a * q.a + p.b * q.b + p.c * q.c + p.d * q.d; }

// scale / (1 - u5^2) with 1 - u5^2 = 4 r^2 / (1 + r^2)^2, free of cancellation near the poles.
double slice_lambda(double r, double scale) {
    const double rr = r > 1.0 ? 1.0 / r : r;
    return scale * (1.0 + rr * rr) * (1.0 + rr * rr) / (4.0 * rr * rr);
}

// Field on (theta, w). Returns (thetadot, wdot). A non-NaN `frozen` fixes the effective parameter.
std::pair<Quaternion, Quaternion> slice_field(const BundleSpec& spec, double r, const Quaternion& theta,
                                              const Quaternion& w, double scale, double frozen) {
    double lam = frozen;
    if (std::isnan(frozen)) {
        lam = slice_lambda(r, scale);
        if (lam < kLambdaFlat) lam += lambda_modulation(std::norm(theta.z1()));
    }
    if (!(lam < kLambdaFlat)) return {Quaternion::zero(), hopf_fiber_rotation(spec, w)};
    const QuaternionPair d = S3S3Field(lam, side_of(spec)).eval_with({theta, w}, lam);
    return {d.theta, d.w};
}

ChartVelocity chart_field(const BundleSpec& spec, const ChartPoint& p, double scale, double frozen) {
    ChartVelocity out;
    out.chart = p.chart;
    const double rb = p.base.norm();
    if (rb == 0.0) {
        out.fiber = hopf_fiber_rotation(spec, p.fiber);
        return out;
    }
    const Quaternion theta = p.base / rb;
    if (p.chart == Chart::North) {
        const auto [td, wd] = slice_field(spec, rb, theta, p.fiber, scale, frozen);
        out.base = rb * td;
        out.fiber = wd;
        return out;
    }
    // South chart: u = theta / r, eta = w theta (0,1) or theta w (1,0).
    const Quaternion w = is01(spec) ? p.fiber * theta.conj() : theta.conj() * p.fiber;
    const auto [td, wd] = slice_field(spec, 1.0 / rb, theta, w, scale, frozen);
    out.base = rb * td;
    out.fiber = is01(spec) ? wd * theta + w * td : td * w + theta * wd;
    return out;
}

}  // namespace

void BundleSpec::validate() const {
    if (h + j != 1) throw DomainError("bundle spec requires h + j = 1");
}

bool ChartPoint::valid(double tol) const {
    const bool finite = std::isfinite(base.a) && std::isfinite(base.b) && std::isfinite(base.c) && std::isfinite(base.d);
    return finite && fiber.is_unit(tol);
}

std::pair<Quaternion, Quaternion> transition(const BundleSpec& spec, const Quaternion& v, const Quaternion& w,
                                             TransitionFault fault) {
    spec.validate();
    const double n2 = v.norm2();
    if (!(n2 > 0.0)) throw DomainError("transition undefined at v = 0");
    int h = spec.h, j = spec.j;
    if (fault == TransitionFault::SwapExponents) std::swap(h, j);
    const Quaternion wp = qpow(v, h) * w * qpow(v, j) / std::sqrt(n2);
    return {v / n2, wp};
}

std::pair<Quaternion, Quaternion> transition_inverse(const BundleSpec& spec, const Quaternion& u,
                                                     const Quaternion& eta) {
    spec.validate();
    const double n2 = u.norm2();
    if (!(n2 > 0.0)) throw DomainError("transition undefined at u = 0");
    const Quaternion v = u / n2;
    const Quaternion w = qpow(v, -spec.h) * eta * qpow(v, -spec.j) * v.norm();
    return {v, w};
}

ChartPoint to_south(const BundleSpec& spec, const ChartPoint& north) {
    const auto [u, eta] = transition(spec, north.base, north.fiber);
    return {Chart::South, u, eta};
}

ChartPoint to_north(const BundleSpec& spec, const ChartPoint& south) {
    const auto [v, w] = transition_inverse(spec, south.base, south.fiber);
    return {Chart::North, v, w};
}

ChartVelocity transport_to_south(const BundleSpec& spec, const ChartPoint& north, const ChartVelocity& vel) {
    require_supported(spec);
    const Quaternion& v = north.base;
    const Quaternion& w = north.fiber;
    const double n2 = v.norm2();
    if (!(n2 > 0.0)) throw DomainError("transport undefined at v = 0");
    const double n = std::sqrt(n2);
    const double vd = dot(v, vel.base);
    ChartVelocity out;
    out.chart = Chart::South;
    out.base = vel.base / n2 - (2.0 * vd / (n2 * n2)) * v;
    const Quaternion prod = is01(spec) ? w * v : v * w;
    const Quaternion dprod =
        is01(spec) ? vel.fiber * v + w * vel.base : vel.base * w + v * vel.fiber;
    out.fiber = dprod / n - (vd / (n2 * n)) * prod;
    return out;
}

Quaternion clutching_map(const BundleSpec& spec, const Quaternion& v, const Quaternion& w) {
    spec.validate();
    if (!v.is_unit(1e-10) || !w.is_unit(1e-10)) throw DomainError("clutching_map expects unit quaternions");
    return qpow(v, spec.h) * w * qpow(v, spec.j);
}

bool is_diffeo_standard(const BundleSpec& spec) {
    spec.validate();
    const long long k = static_cast<long long>(spec.h) - spec.j;
    return (k * k - 1) % 7 == 0;
}

PhaseAction matched_action(const BundleSpec& spec) {
    require_supported(spec);
    return is01(spec) ? PhaseAction::Left : PhaseAction::Right;
}

double commutation_residual(const BundleSpec& spec, const Quaternion& v, const Quaternion& w, double t,
                            PhaseAction action, TransitionFault fault) {
    const Quaternion e(std::cos(t), std::sin(t), 0.0, 0.0);
    const auto act = [&](const Quaternion& q) { return action == PhaseAction::Left ? e * q : q * e; };
    const Quaternion lhs = transition(spec, v, act(w), fault).second;
    const Quaternion rhs = act(transition(spec, v, w, fault).second);
    return (lhs - rhs).norm();
}

double lambda_of_u5(double u5) {
    if (!(std::abs(u5) < 1.0)) throw DomainError("lambda_of_u5 requires |u5| < 1");
    return 1.0 / (1.0 - u5 * u5);
}

double radius_to_u5(double r) {
    if (!(r > 0.0)) throw DomainError("radius_to_u5 requires r > 0");
    if (r > 1.0) {
        const double s = 1.0 / r;
        return (s * s - 1.0) / (s * s + 1.0);
    }
    return (1.0 - r * r) / (1.0 + r * r);
}

Quaternion hopf_fiber_rotation(const BundleSpec& spec, const Quaternion& w) {
    return is01(spec) ? Quaternion::i() * w : w * Quaternion::i();
}

ChartVelocity eval_fibration_field(const BundleSpec& spec, const ChartPoint& p, double scale) {
    require_supported(spec);
    if (!p.valid(1e-10)) throw DomainError("eval_fibration_field: fiber is not a unit quaternion");
    return chart_field(spec, p, scale, std::numeric_limits<double>::quiet_NaN());
}

Vec8 pair_to_r8(const Quaternion& p1, const Quaternion& p2) {
    Vec8 x;
    x << p1.a, p1.b, p1.c, p1.d, p2.a, p2.b, p2.c, p2.d;
    return x;
}

std::pair<Quaternion, Quaternion> r8_to_pair(const Vec8& x) {
    return {Quaternion(x[0], x[1], x[2], x[3]), Quaternion(x[4], x[5], x[6], x[7])};
}

Vec8 chart_to_s7(const BundleSpec& spec, const ChartPoint& p) {
    require_supported(spec);
    const Quaternion& b = p.base;
    const Quaternion& f = p.fiber;
    const double c = 1.0 / std::sqrt(1.0 + b.norm2());
    if (p.chart == Chart::North) return pair_to_r8(c * f, c * (is01(spec) ? f * b : b * f));
    return pair_to_r8(c * (is01(spec) ? f * b.conj() : b.conj() * f), c * f);
}

ChartPoint s7_to_chart(const BundleSpec& spec, const Vec8& x) {
    require_supported(spec);
    const auto [p1, p2] = r8_to_pair(x);
    const double n1 = p1.norm2(), n2 = p2.norm2();
    const Quaternion prod = is01(spec) ? p1.conj() * p2 : p2 * p1.conj();
    if (n2 <= n1) return {Chart::North, prod / n1, p1 / std::sqrt(n1)};
    return {Chart::South, prod / n2, p2 / std::sqrt(n2)};
}

Vec8 chart_velocity_to_s7(const BundleSpec& spec, const ChartPoint& p, const ChartVelocity& v) {
    require_supported(spec);
    const Quaternion& b = p.base;
    const Quaternion& f = p.fiber;
    const double c = 1.0 / std::sqrt(1.0 + b.norm2());
    const double cd = -dot(b, v.base) * c * c * c;
    const auto lin = [&](const Quaternion& q, const Quaternion& qd) { return cd * q + c * qd; };
    if (p.chart == Chart::North) {
        const Quaternion q2 = is01(spec) ? f * b : b * f;
        const Quaternion q2d = is01(spec) ? v.fiber * b + f * v.base : v.base * f + b * v.fiber;
        return pair_to_r8(lin(f, v.fiber), lin(q2, q2d));
    }
    const Quaternion bc = b.conj(), bcd = v.base.conj();
    const Quaternion q1 = is01(spec) ? f * bc : bc * f;
    const Quaternion q1d = is01(spec) ? v.fiber * bc + f * bcd : bcd * f + bc * v.fiber;
    return pair_to_r8(lin(q1, q1d), lin(f, v.fiber));
}

double u5_of(const Vec8& p) { return p.head<4>().squaredNorm() - p.tail<4>().squaredNorm(); }

Vec8 hopf_field_s7(const BundleSpec& spec, const Vec8& p) {
    require_supported(spec);
    const auto [p1, p2] = r8_to_pair(p);
    return pair_to_r8(hopf_fiber_rotation(spec, p1), hopf_fiber_rotation(spec, p2));
}

Vec8 fibration_field_s7(const BundleSpec& spec, const Vec8& p, double scale) {
    if (std::abs(p.norm() - 1.0) > 1e-8) throw DomainError("fibration_field_s7 expects |p| = 1");
    ChartPoint c = s7_to_chart(spec, p);
    c.fiber = c.fiber.normalized();
    return chart_velocity_to_s7(spec, c, eval_fibration_field(spec, c, scale));
}

double effective_lambda_s7(const BundleSpec& spec, const Vec8& p, double scale) {
    const ChartPoint c = s7_to_chart(spec, p);
    const double rb = c.base.norm();
    if (rb == 0.0) return std::numeric_limits<double>::infinity();
    const double r = c.chart == Chart::North ? rb : 1.0 / rb;
    const Quaternion theta = c.base / rb;
    return slice_lambda(r, scale) + lambda_modulation(std::norm(theta.z1()));
}

Vec8 fibration_field_s7_with(const BundleSpec& spec, const Vec8& p, double effective_lambda) {
    if (std::abs(p.norm() - 1.0) > 1e-8) throw DomainError("fibration_field_s7 expects |p| = 1");
    ChartPoint c = s7_to_chart(spec, p);
    c.fiber = c.fiber.normalized();
    return chart_velocity_to_s7(spec, c, chart_field(spec, c, 1.0, effective_lambda));
}

Vec8 hopf_family_field(double mu, const Vec8& p) {
    if (!(mu >= 0.0 && mu <= 1.0)) throw DomainError("hopf_family_field requires mu in [0, 1]");
    if (std::abs(p.norm() - 1.0) > 1e-10) throw DomainError("hopf_family_field expects |p| = 1");
    if (mu == 1.0) return hopf_field_s7(BundleSpec::e01(), p);
    return fibration_field_s7(BundleSpec::e01(), p, 1.0 / (1.0 - mu));
}

}  // namespace milnorflow
