#include "milnorflow/curve_factory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "milnorflow/errors.hpp"
#include "quadrature.hpp"

namespace milnorflow {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
constexpr double kFlowHalfWidth = M_PI / 2.0;
constexpr double kFlowCentre = 2.0 * M_PI;
// Beyond this value of 1/(1 - x^2) the closing flow and its first four derivatives stay below 1e-12.
constexpr double kFlatExponent = 60.0;

using GL = detail::GaussLegendre<LoopTable::kNodes>;

double phi_scalar(double x) { return x * std::exp(1.0 / (1.0 - x * x)); }

double dphi_scalar(double x) {
    const double q = 1.0 - x * x;
    return std::exp(1.0 / q) * (1.0 + 2.0 * x * x / (q * q));
}

template <int N>
Jet<N> phi_jet(const Jet<N>& x) {
    return x * exp(1.0 / (1.0 - x * x));
}

// Solves phi(y) = target on (-1, 1) by safeguarded Newton.
double phi_inverse(double target, double lo, double hi) {
    double y = std::clamp(0.5 * (lo + hi), lo, hi);
    for (int it = 0; it < 200; ++it) {
        const double f = phi_scalar(y) - target;
        if (f > 0.0) hi = y; else lo = y;
        double next = y - f / dphi_scalar(y);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - y) <= 1e-16 * (1.0 + std::abs(y))) return next;
        y = next;
    }
    return y;
}

Vec3 to_vec(const std::array<double, 3>& a) { return {a[0], a[1], a[2]}; }

double speed_at(const SphereCurve& c, double t) {
    const JVec3<1> g = c.eval(Jet<1>::variable(t));
    return std::sqrt(g.x.c[1] * g.x.c[1] + g.y.c[1] * g.y.c[1] + g.z.c[1] * g.z.c[1]);
}

}  // namespace

TrochoidParams TrochoidParams::defaults(double lambda) {
    const double h = std::exp(-lambda);
    return make(lambda, h, h);
}

TrochoidParams TrochoidParams::make(double lambda, double h, double g) {
    TrochoidParams p;
    p.lambda = lambda;
    p.h = h;
    p.g = g;
    p.a = g * h;
    p.validate();
    return p;
}

void TrochoidParams::validate() const {
    if (!(h > 0.0) || !(g > 0.0) || !(g < 1.0) || !(a > 0.0) || !(a < h))
        throw DomainError("trochoid parameters must satisfy 0 < a < h and 0 < g < 1");
    if (std::abs(a - g * h) > 1e-12 * a)
        throw DomainError("trochoid parameters must satisfy a = g h");
}

double wrap_angle(double theta) {
    double r = std::fmod(theta, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    return r;
}

PolarPoint trochoid_point(const TrochoidParams& p, double t) {
    if (t < 0.0 || t > 3.0 * M_PI / p.a)
        throw DomainError("trochoid_point: t outside [0, 3 pi / a]");
    return {1.0 + p.a - p.h * std::cos(t + M_PI / 2.0), p.a * t - p.h * std::sin(t + M_PI / 2.0)};
}

CurvatureValue trochoid_curvature(const TrochoidParams& p, double t) {
    const double c = std::cos(t + M_PI / 2.0);
    const double k = (1.0 / p.h) * (1.0 - p.g * c) / std::pow(1.0 + p.g * p.g - 2.0 * p.g * c, 1.5);
    return {k, 1.0 / k};
}

double polar_curve_curvature(const PolarJet<2>& z) {
    Jet<2> s, c;
    sincos(z.theta, s, c);
    const Jet<2> x = z.rho * c, y = z.rho * s;
    const double xd = x.deriv(1), yd = y.deriv(1), xdd = x.deriv(2), ydd = y.deriv(2);
    const double sp2 = xd * xd + yd * yd;
    if (std::sqrt(sp2) < 1e-12) throw SingularParametrization("plane curve speed below 1e-12");
    return (xd * ydd - yd * xdd) / std::pow(sp2, 1.5);
}

double polar_curve_curvature_split(const PolarJet<2>& z, double k_tr) {
    const double r = z.rho.value(), rd = z.rho.deriv(1), td = z.theta.deriv(1);
    const double d = rd * rd + r * r * td * td;
    if (std::sqrt(d) < 1e-12) throw SingularParametrization("plane curve speed below 1e-12");
    const double xi = r * std::pow((rd * rd + td * td) / d, 1.5);
    const double chi = td * (1.0 / std::sqrt(d) + rd * rd / std::pow(d, 1.5));
    return k_tr * xi + chi;
}

double plane_curvature(const TrochoidParams& p, double t) {
    return polar_curve_curvature(trochoid_jet(p, Jet<2>::variable(t)));
}

double plane_curvature_split(const TrochoidParams& p, double t) {
    return polar_curve_curvature_split(trochoid_jet(p, Jet<2>::variable(t)),
                                       trochoid_curvature(p, t).k);
}

double smooth_step(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    const double f0 = std::exp(-1.0 / u), f1 = std::exp(-1.0 / (1.0 - u));
    return f0 / (f0 + f1);
}

template <int N>
Jet<N> smooth_step(const Jet<N>& u) {
    if (u.value() <= 0.0) return Jet<N>(0.0);
    if (u.value() >= 1.0) return Jet<N>(1.0);
    const Jet<N> f0 = exp(-1.0 / u), f1 = exp(-1.0 / (1.0 - u));
    return f0 / (f0 + f1);
}

template Jet<1> smooth_step(const Jet<1>&);
template Jet<2> smooth_step(const Jet<2>&);
template Jet<4> smooth_step(const Jet<4>&);

double closing_beta(double theta) {
    const double x = (theta - kFlowCentre) / kFlowHalfWidth;
    if (std::abs(x) >= 1.0) return 0.0;
    const double q = 1.0 - x * x;
    if (1.0 / q > kFlatExponent) return 0.0;
    return std::exp(1.0) / dphi_scalar(x);
}

namespace {
template <int N>
Jet<N> alpha_jet(const TrochoidParams& p, const Jet<N>& rho) {
    const Jet<N> d = rho - (1.0 + p.a);
    const double dv = std::abs(d.value());
    if (dv <= 1.5 * p.h) return Jet<N>(1.0);
    if (dv >= 2.0 * p.h) return Jet<N>(0.0);
    const Jet<N> ad = d.value() > 0.0 ? d : -d;
    return 1.0 - smooth_step((ad - 1.5 * p.h) / (0.5 * p.h));
}
}  // namespace

double closing_alpha(const TrochoidParams& p, double rho) { return alpha_jet(p, Jet<1>(rho)).value(); }

PlaneCurve::PlaneCurve(TrochoidParams p, double t_end) : p_(p), t_end_(t_end) {}

template <int N>
Jet<N> PlaneCurve::closing_map(const Jet<N>& theta) const {
    if (!closing_ || closing_->flow_shift == 0.0) return theta;
    const Jet<N> x = (theta - kFlowCentre) / kFlowHalfWidth;
    const double xv = x.value();
    if (std::abs(xv) >= 1.0 || 1.0 / (1.0 - xv * xv) > kFlatExponent) return theta;
    const double target = phi_scalar(xv) - closing_->flow_shift;
    const double y0 = phi_inverse(target, -1.0, xv);
    if (1.0 / (1.0 - y0 * y0) > kFlatExponent) return theta;
    const Jet<N> rhs = phi_jet(x) - closing_->flow_shift;
    const double slope = dphi_scalar(y0);
    Jet<N> y(y0);
    for (int it = 0; it < N; ++it) y += (rhs - phi_jet(y)) / slope;
    return kFlowCentre + kFlowHalfWidth * y;
}

template <int N>
PolarJet<N> PlaneCurve::eval(const Jet<N>& t) const {
    PolarJet<N> z = trochoid_jet(p_, t);
    if (closing_) {
        const Jet<N> al = alpha_jet(p_, z.rho);
        if (al.value() == 1.0 && al.c == Jet<N>(1.0).c) {
            z.theta = closing_map(z.theta);
        } else if (al.value() > 0.0) {
            // Points off the rho plateau flow for time alpha(rho) tau0.
            PlaneCurve scaled = *this;
            scaled.closing_->flow_shift *= al.value();
            z.theta = scaled.closing_map(z.theta);
        }
    }
    return z;
}

template PolarJet<1> PlaneCurve::eval(const Jet<1>&) const;
template PolarJet<2> PlaneCurve::eval(const Jet<2>&) const;
template PolarJet<4> PlaneCurve::eval(const Jet<4>&) const;
template Jet<1> PlaneCurve::closing_map(const Jet<1>&) const;
template Jet<2> PlaneCurve::closing_map(const Jet<2>&) const;
template Jet<4> PlaneCurve::closing_map(const Jet<4>&) const;

PolarPoint PlaneCurve::point(double t) const {
    const PolarJet<1> z = eval(Jet<1>(t));
    return {z.rho.value(), z.theta.value()};
}

std::array<double, 4> PlaneCurve::cartesian(double t) const {
    const PolarJet<1> z = eval(Jet<1>::variable(t));
    Jet<1> s, c;
    sincos(z.theta, s, c);
    const Jet<1> x = z.rho * c, y = z.rho * s;
    return {x.value(), y.value(), x.deriv(1), y.deriv(1)};
}

PlaneCurve close_curve(const PlaneCurve& c, const TrochoidParams& p) {
    p.validate();
    if (c.closed()) throw ConstructionError("close_curve", "curve is already closed");
    const long long k = static_cast<long long>(std::floor(1.0 / p.a)) + 1;
    const double t_lo = kTwoPi * k - M_PI / 2.0, t_hi = kTwoPi * k + M_PI / 2.0;
    if (t_hi > 3.0 * M_PI / p.a || t_hi > c.t_end() + M_PI / 2.0)
        throw ConstructionError("close_curve", "no matching crossing of rho = 1 + a in ]2 pi, 3 pi / a]");

    // rho - (1 + a) = h sin t increases through zero at the matching crossings.
    auto f = [&](double t) { return trochoid_jet(p, Jet<1>(t)).rho.value() - (1.0 + p.a); };
    double lo = t_lo, hi = t_hi;
    if (!(f(lo) < 0.0 && f(hi) > 0.0))
        throw ConstructionError("close_curve", "crossing bracket does not change sign");
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (f(mid) < 0.0 ? lo : hi) = mid;
    }
    const double t_close = 0.5 * (lo + hi);

    const double theta0 = trochoid_jet(p, Jet<1>(0.0)).theta.value();
    const double theta_end = trochoid_jet(p, Jet<1>(t_close)).theta.value();
    const double eps = theta_end - theta0 - kTwoPi;
    const double x_end = (theta_end - kFlowCentre) / kFlowHalfWidth;
    const double x_target = (theta0 + kTwoPi - kFlowCentre) / kFlowHalfWidth;
    if (!(eps >= 0.0) || !(x_end < 1.0) || !(x_target > -1.0) ||
        1.0 / (1.0 - x_end * x_end) > kFlatExponent || 1.0 / (1.0 - x_target * x_target) > kFlatExponent)
        throw ConstructionError("close_curve", "closing time tau0 outside the admissible window");

    ClosingData d;
    d.loops = k;
    d.t_close = t_close;
    d.epsilon = eps;
    d.flow_shift = phi_scalar(x_end) - phi_scalar(x_target);
    d.tau0 = d.flow_shift * kFlowHalfWidth / std::exp(1.0);
    // s(lambda) = 2 pi is the parameter gap between consecutive matching crossings.
    if (!(d.tau0 >= 0.0 && d.tau0 < kTwoPi))
        throw ConstructionError("close_curve", "closing time tau0 outside ]0, s(lambda)[ with s = 2 pi");

    PlaneCurve out(p, t_close);
    out.closing_ = d;

    const auto s = out.cartesian(0.0), e = out.cartesian(t_close);
    const double cr = e[2] * s[3] - e[3] * s[2], dt = e[2] * s[2] + e[3] * s[3];
    out.closing_->delta_theta = std::atan2(cr, dt);
    return out;
}

Vec3 stereo_lift(double X, double Y) {
    const double r2 = X * X + Y * Y;
    return Vec3(2.0 * X, 2.0 * Y, 1.0 - r2) / (1.0 + r2);
}

std::pair<double, double> stereo_chart(const Vec3& p) {
    return {p.x() / (1.0 + p.z()), p.y() / (1.0 + p.z())};
}

Vec3 SphereCurve::point(double t) const {
    const JVec3<1> g = eval(Jet<1>(t));
    return {g.x.value(), g.y.value(), g.z.value()};
}

std::array<Vec3, 5> SphereCurve::derivatives(double t) const {
    const JVec3<4> g = eval(Jet<4>::variable(t));
    std::array<Vec3, 5> d;
    for (int k = 0; k <= 4; ++k) d[k] = to_vec(g.deriv(k));
    return d;
}

LiftedCurve lift_to_sphere(const PlaneCurve& c) {
    if (!c.closed()) throw ConstructionError("lift_to_sphere", "plane curve is not closed");
    return LiftedCurve(c);
}

double seam_tangent_angle(const SphereCurve& c) {
    const JVec3<1> g0 = c.eval(Jet<1>::variable(0.0));
    const JVec3<1> g1 = c.eval(Jet<1>::variable(c.period()));
    const Vec3 p = to_vec(g0.deriv(0)), s = to_vec(g0.deriv(1)), e = to_vec(g1.deriv(1));
    return std::atan2(p.dot(e.cross(s)), e.dot(s));
}

double kuiper_delta(double that) { return smooth_step((that - M_PI) / (M_PI / 2.0)); }

KuiperCurve::KuiperCurve(std::shared_ptr<const SphereCurve> in, double dtheta)
    : in_(std::move(in)), dtheta_(dtheta), axis_(in_->point(0.0).normalized()) {}

std::pair<double, double> KuiperCurve::transition() const {
    return {0.5 * period(), 0.75 * period()};
}

template <int N>
JVec3<N> KuiperCurve::eval_t(const Jet<N>& t) const {
    const JVec3<N> g = in_->eval(t);
    if (dtheta_ == 0.0) return g;
    const Jet<N> that = t * (kTwoPi / period());
    const Jet<N> delta = smooth_step((that - M_PI) / (M_PI / 2.0));
    if (delta.c == Jet<N>(0.0).c) return g;
    Jet<N> s, c;
    sincos(delta * dtheta_, s, c);
    const JVec3<N> ax{Jet<N>(axis_.x()), Jet<N>(axis_.y()), Jet<N>(axis_.z())};
    const JVec3<N> cx = cross(ax, g);
    const Jet<N> cd = dot(ax, g);
    return g * c + cx * s + ax * (cd * (1.0 - c));
}

template JVec3<1> KuiperCurve::eval_t(const Jet<1>&) const;
template JVec3<2> KuiperCurve::eval_t(const Jet<2>&) const;
template JVec3<4> KuiperCurve::eval_t(const Jet<4>&) const;

KuiperCurve kuiper_smooth(std::shared_ptr<const SphereCurve> corner, double dtheta) {
    return KuiperCurve(std::move(corner), dtheta);
}

SeamBlendCurve::SeamBlendCurve(std::shared_ptr<const SphereCurve> in, double half_width)
    : in_(std::move(in)), w_(half_width) {}

template <int N>
JVec3<N> SeamBlendCurve::eval_t(const Jet<N>& t) const {
    const double T = period(), tv = t.value();
    Jet<N> u;
    if (tv < w_) u = t;
    else if (tv > T - w_) u = t - T;
    else return in_->eval(t);
    const JVec3<N> left = in_->eval(u + T), right = in_->eval(u);
    const Jet<N> chi = smooth_step((u / w_ + 1.0) * 0.5);
    return normalized(left * (1.0 - chi) + right * chi);
}

template JVec3<1> SeamBlendCurve::eval_t(const Jet<1>&) const;
template JVec3<2> SeamBlendCurve::eval_t(const Jet<2>&) const;
template JVec3<4> SeamBlendCurve::eval_t(const Jet<4>&) const;

SeamBlendCurve corner_smooth(std::shared_ptr<const SphereCurve> c1, double half_width,
                             const std::vector<std::pair<double, double>>& features) {
    const double T = c1->period();
    if (!(half_width > 0.0) || 2.0 * half_width >= T)
        throw ConstructionError("corner_smooth", "invalid window half-width");
    for (const auto& [a, b] : features) {
        const bool hit_start = a < half_width && b > -half_width;
        const bool hit_end = a < T + half_width && b > T - half_width;
        if (hit_start || hit_end)
            throw ConstructionError("corner_smooth", "smoothing window contains another feature");
    }
    return SeamBlendCurve(std::move(c1), half_width);
}

double geodesic_curvature(const JVec3<2>& g) {
    const Vec3 p = to_vec(g.deriv(0)), d1 = to_vec(g.deriv(1)), d2 = to_vec(g.deriv(2));
    const double sp = d1.norm();
    if (sp < 1e-12) throw SingularParametrization("sphere curve speed below 1e-12");
    return d2.dot(p.cross(d1)) / (sp * sp * sp);
}

double geodesic_curvature(const SphereCurve& c, double t) {
    return geodesic_curvature(c.eval(Jet<2>::variable(t)));
}

double geodesic_curvature_christoffel(const JVec3<2>& g) {
    const Jet<2> den = 1.0 + g.z;
    const Jet<2> u = g.x / den, v = g.y / den;
    const double U = u.value(), V = v.value();
    const double ud = u.deriv(1), vd = v.deriv(1), udd = u.deriv(2), vdd = v.deriv(2);
    if (std::hypot(ud, vd) < 1e-12) throw SingularParametrization("chart curve speed below 1e-12");

    // Conformal metric of the unit sphere in the chart: E = G = L^2, F = 0, L = 2 / (1 + |z|^2).
    const double L = 2.0 / (1.0 + U * U + V * V);
    const double E = L * L, F = 0.0, G = L * L;
    const double Eu = -2.0 * L * L * L * U, Ev = -2.0 * L * L * L * V;
    const double Gu = Eu, Gv = Ev, Fu = 0.0, Fv = 0.0;
    const double D = E * G - F * F;
    const double g111 = (G * Eu - 2.0 * F * Fu + F * Ev) / (2.0 * D);
    const double g211 = (2.0 * E * Fu - E * Ev - F * Eu) / (2.0 * D);
    const double g112 = (G * Ev - F * Gu) / (2.0 * D);
    const double g212 = (E * Gu - F * Ev) / (2.0 * D);
    const double g122 = (2.0 * G * Fv - G * Gu - F * Gv) / (2.0 * D);
    const double g222 = (E * Gv - 2.0 * F * Fv + F * Gu) / (2.0 * D);

    const double num = g211 * ud * ud * ud + (2.0 * g212 - g111) * ud * ud * vd +
                       (g222 - 2.0 * g112) * ud * vd * vd - g122 * vd * vd * vd + ud * vdd - udd * vd;
    const double q = E * ud * ud + 2.0 * F * ud * vd + G * vd * vd;
    return std::sqrt(D) * num / std::pow(q, 1.5);
}

double geodesic_curvature_christoffel(const SphereCurve& c, double t) {
    return geodesic_curvature_christoffel(c.eval(Jet<2>::variable(t)));
}

LoopTable::LoopTable(const SphereCurve& c, double t0, double span) : t0_(t0), span_(span) {
    auto build = [&](int n) {
        std::vector<double> cum(n + 1, 0.0);
        const double hp = span / n;
        for (int p = 0; p < n; ++p) cum[p + 1] = cum[p] + panel_integral(c, t0 + p * hp, t0 + (p + 1) * hp);
        return cum;
    };
    panels_ = kMinPanels;
    std::vector<double> coarse = build(panels_);
    for (;;) {
        std::vector<double> fine = build(2 * panels_);
        panels_ *= 2;
        const bool done = std::abs(fine.back() - coarse.back()) <= kRelTol * fine.back();
        coarse = std::move(fine);
        if (done || panels_ >= kMaxPanels) break;
    }
    cum_ = std::move(coarse);
}

double LoopTable::panel_integral(const SphereCurve& c, double a, double b) const {
    return GL::get().integrate([&](double t) { return speed_at(c, t); }, a, b);
}

double LoopTable::s_of_u(const SphereCurve& c, double u) const {
    const double hp = span_ / panels_;
    const int p = std::clamp(static_cast<int>(std::floor(u / hp)), 0, panels_ - 1);
    return cum_[p] + panel_integral(c, t0_ + p * hp, t0_ + u);
}

double LoopTable::u_of_s(const SphereCurve& c, double s) const {
    const double hp = span_ / panels_;
    int p = static_cast<int>(std::upper_bound(cum_.begin(), cum_.end(), s) - cum_.begin()) - 1;
    p = std::clamp(p, 0, panels_ - 1);
    const double a = t0_ + p * hp;
    const double frac = (s - cum_[p]) / (cum_[p + 1] - cum_[p]);
    double u = (p + std::clamp(frac, 0.0, 1.0)) * hp;
    const double tol = 4e-16 * (std::abs(t0_) + span_);
    for (int it = 0; it < 20; ++it) {
        const double f = cum_[p] + panel_integral(c, a, t0_ + u) - s;
        const double du = -f / speed_at(c, t0_ + u);
        u += du;
        if (std::abs(du) <= tol) break;
    }
    return u;
}

template <int N>
JVec3<N> SmoothClosedSphereCurve::eval_raw(const Jet<N>& t) const {
    if (!surrogate_) return blend_->eval(t);
    const double k = std::floor(t.value() / kTwoPi);
    return eval_reference(t - kTwoPi * k, kTwoPi * k * p_.a);
}

template <int N>
JVec3<N> SmoothClosedSphereCurve::eval_t(const Jet<N>& t) const {
    const double tv = t.value();
    if (tv >= 0.0 && tv <= period_) return eval_raw(t);
    return eval_raw(t - period_ * std::floor(tv / period_));
}

template <int N>
JVec3<N> SmoothClosedSphereCurve::eval_reference(const Jet<N>& u, double shift_angle) const {
    const JVec3<N> g = reference_->eval(u);
    const double c = std::cos(shift_angle), s = std::sin(shift_angle);
    return {g.x * c - g.y * s, g.x * s + g.y * c, g.z};
}

template JVec3<1> SmoothClosedSphereCurve::eval_t(const Jet<1>&) const;
template JVec3<2> SmoothClosedSphereCurve::eval_t(const Jet<2>&) const;
template JVec3<4> SmoothClosedSphereCurve::eval_t(const Jet<4>&) const;
template JVec3<1> SmoothClosedSphereCurve::eval_raw(const Jet<1>&) const;
template JVec3<2> SmoothClosedSphereCurve::eval_raw(const Jet<2>&) const;
template JVec3<4> SmoothClosedSphereCurve::eval_raw(const Jet<4>&) const;

std::shared_ptr<const SmoothClosedSphereCurve> SmoothClosedSphereCurve::build(const TrochoidParams& p) {
    p.validate();
    std::shared_ptr<SmoothClosedSphereCurve> out(new SmoothClosedSphereCurve());
    out->p_ = p;
    const PlaneCurve open(p, 3.0 * M_PI / p.a);
    const PlaneCurve closed = close_curve(open, p);
    out->closing_ = closed.closing();
    out->lifted_ = std::make_shared<LiftedCurve>(lift_to_sphere(closed));
    const double dtheta = seam_tangent_angle(*out->lifted_);
    out->closing_->delta_theta = dtheta;
    out->kuiper_ = std::make_shared<KuiperCurve>(kuiper_smooth(out->lifted_, dtheta));
    out->period_ = closed.t_end();
    out->loops_ = static_cast<double>(closed.closing()->loops);
    out->window_ = p.h * p.h * out->period_ / kTwoPi;

    // The flow support begins where theta = a t - h cos t reaches 3 pi / 2.
    std::vector<std::pair<double, double>> features = {out->kuiper_->transition(),
                                                       {(1.5 * M_PI - p.h) / p.a, (1.5 * M_PI + p.h) / p.a}};
    out->blend_ = std::make_shared<SeamBlendCurve>(corner_smooth(out->kuiper_, out->window_, features));
    out->reference_ = std::make_shared<LiftedCurve>(PlaneCurve(p, kTwoPi));
    out->build_tables();
    out->check_curvature_sign();
    return out;
}

std::shared_ptr<const SmoothClosedSphereCurve> SmoothClosedSphereCurve::build_periodic(const TrochoidParams& p) {
    std::shared_ptr<SmoothClosedSphereCurve> out(new SmoothClosedSphereCurve());
    const double n = std::round(1.0 / p.a);
    if (!(n >= 2.0) || !(p.h > 0.0) || !(p.h < 1.0))
        throw ConstructionError("build_periodic", "invalid periodic trochoid parameters");
    out->p_ = p;
    out->p_.a = 1.0 / n;
    out->p_.g = out->p_.a / p.h;
    out->surrogate_ = true;
    out->loops_ = n;
    out->period_ = kTwoPi * n;
    out->reference_ = std::make_shared<LiftedCurve>(PlaneCurve(out->p_, kTwoPi));
    out->ref_table_ = LoopTable(*out->reference_, 0.0, kTwoPi);
    out->length_ = n * out->ref_table_.length();
    return out;
}

void SmoothClosedSphereCurve::build_tables() {
    ref_table_ = LoopTable(*reference_, 0.0, kTwoPi);
    const long long k_total = closing_->loops;
    const double t_flow = 1.5 * M_PI;
    plain_begin_ = static_cast<long long>(std::ceil(window_ / kTwoPi));
    long long end = plain_begin_;
    while (end < k_total) {
        const double t_hi = kTwoPi * (end + 1);
        if (t_hi > 0.5 * period_ || p_.a * t_hi + p_.h >= t_flow || t_hi > period_ - window_) break;
        ++end;
    }
    plain_end_ = end;
    if (plain_end_ <= plain_begin_) plain_begin_ = plain_end_ = 0;

    double s = 0.0;
    for (long long k = 0; k < plain_begin_; ++k) {
        head_start_.push_back(s);
        head_.emplace_back(*blend_, kTwoPi * k, kTwoPi);
        s += head_.back().length();
    }
    plain_start_s_ = s;
    s += static_cast<double>(plain_end_ - plain_begin_) * ref_table_.length();
    tail_start_s_ = s;
    for (long long k = plain_end_; k < k_total; ++k) {
        const double t0 = kTwoPi * k;
        const double span = (k == k_total - 1) ? period_ - t0 : kTwoPi;
        tail_start_.push_back(s);
        tail_.emplace_back(*blend_, t0, span);
        s += tail_.back().length();
    }
    length_ = s;
}

double SmoothClosedSphereCurve::geodesic_curvature(double t) const {
    return milnorflow::geodesic_curvature(eval(Jet<2>::variable(t)));
}

double SmoothClosedSphereCurve::s_of_t(double t) const {
    t = t - period_ * std::floor(t / period_);
    if (surrogate_) {
        const double k = std::floor(t / kTwoPi);
        return k * ref_table_.length() + ref_table_.s_of_u(*reference_, t - kTwoPi * k);
    }
    const long long k = std::min(static_cast<long long>(std::floor(t / kTwoPi)), closing_->loops - 1);
    if (k < plain_begin_) return head_start_[k] + head_[k].s_of_u(*blend_, t - head_[k].t0());
    if (k < plain_end_)
        return plain_start_s_ + static_cast<double>(k - plain_begin_) * ref_table_.length() +
               ref_table_.s_of_u(*reference_, t - kTwoPi * k);
    const auto i = static_cast<std::size_t>(k - plain_end_);
    return tail_start_[i] + tail_[i].s_of_u(*blend_, t - tail_[i].t0());
}

std::pair<double, double> SmoothClosedSphereCurve::locate(double s) const {
    s = std::clamp(s, 0.0, length_);
    if (s < plain_start_s_) {
        auto i = static_cast<std::size_t>(std::upper_bound(head_start_.begin(), head_start_.end(), s) -
                                          head_start_.begin()) - 1;
        return {head_[i].t0(), head_[i].u_of_s(*blend_, s - head_start_[i])};
    }
    if (s < tail_start_s_) {
        const double L = ref_table_.length();
        double k = std::floor((s - plain_start_s_) / L);
        k = std::min(k, static_cast<double>(plain_end_ - plain_begin_ - 1));
        const double sl = s - plain_start_s_ - k * L;
        return {kTwoPi * (plain_begin_ + k), ref_table_.u_of_s(*reference_, sl)};
    }
    if (tail_.empty()) return {0.0, 0.0};
    auto i = static_cast<std::size_t>(std::upper_bound(tail_start_.begin(), tail_start_.end(), s) -
                                      tail_start_.begin()) - 1;
    return {tail_[i].t0(), tail_[i].u_of_s(*blend_, s - tail_start_[i])};
}

double SmoothClosedSphereCurve::t_of_s(double s) const {
    s = s - length_ * std::floor(s / length_);
    if (surrogate_) {
        const double L = ref_table_.length();
        const double k = std::floor(s / L);
        return kTwoPi * k + ref_table_.u_of_s(*reference_, s - k * L);
    }
    const auto [t0, u] = locate(s);
    return t0 + u;
}

SmoothClosedSphereCurve::Frame SmoothClosedSphereCurve::frame_at_phase(double phase) const {
    phase -= std::floor(phase);
    JVec3<2> g;
    if (surrogate_) {
        const double n = loops_;
        const double loops_done = phase * n;
        const double k = std::floor(loops_done);
        const double frac = loops_done - k;
        const double u = ref_table_.u_of_s(*reference_, frac * ref_table_.length());
        const double shift = kTwoPi * (phase - frac / n);
        g = eval_reference(scaled_variable(u), shift);
    } else {
        g = eval_raw(Jet<2>::variable(t_of_s(phase * length_)));
    }
    const Vec3 x = to_vec(g.deriv(0)), d1 = to_vec(g.deriv(1));
    return {x, d1.normalized(), milnorflow::geodesic_curvature(g)};
}

Jet<2> SmoothClosedSphereCurve::scaled_variable(double u) const {
    Jet<2> v = Jet<2>::variable(u);
    v.c[1] = 1.0 / p_.h;
    return v;
}

double SmoothClosedSphereCurve::sigma_at_phase(double phase) const { return 1.0 / frame_at_phase(phase).kg; }

namespace {
double loop_kg_integral(const SphereCurve& c, double t0, double span, double rate = 1.0) {
    auto integral = [&](int n) {
        const double hp = span / n;
        double s = 0.0;
        for (int p = 0; p < n; ++p) {
            s += GL::get().integrate(
                [&](double t) {
                    Jet<2> v = Jet<2>::variable(t);
                    v.c[1] = rate;
                    const JVec3<2> g = c.eval(v);
                    const Vec3 d1 = to_vec(g.deriv(1));
                    return geodesic_curvature(g) * d1.norm() / rate;
                },
                t0 + p * hp, t0 + (p + 1) * hp);
        }
        return s;
    };
    int n = LoopTable::kMinPanels;
    double coarse = integral(n);
    for (;;) {
        n *= 2;
        const double fine = integral(n);
        const bool done = std::abs(fine - coarse) <= LoopTable::kRelTol * std::abs(fine);
        coarse = fine;
        if (done || n >= LoopTable::kMaxPanels) break;
    }
    return coarse;
}
}  // namespace

double SmoothClosedSphereCurve::integral_kg_ds() const {
    if (surrogate_) return loops_ * loop_kg_integral(*reference_, 0.0, kTwoPi, 1.0 / p_.h);
    const double ref = loop_kg_integral(*reference_, 0.0, kTwoPi);
    double s = static_cast<double>(plain_end_ - plain_begin_) * ref;
    for (const auto& t : head_) s += loop_kg_integral(*blend_, t.t0(), kTwoPi);
    for (std::size_t i = 0; i < tail_.size(); ++i) {
        const double span = (i + 1 == tail_.size()) ? period_ - tail_[i].t0() : kTwoPi;
        s += loop_kg_integral(*blend_, tail_[i].t0(), span);
    }
    return s;
}

void SmoothClosedSphereCurve::check_curvature_sign() const {
    const double sign = milnorflow::geodesic_curvature(*reference_, 0.0) < 0.0 ? -1.0 : 1.0;
    auto fail = [](double t) {
        throw ConstructionError("build", "geodesic curvature vanishes at t = " + std::to_string(t));
    };
    auto scan = [&](const SphereCurve& c, double t0, double span, int n) {
        const double step = span / n;
        auto f = [&](double t) { return sign * milnorflow::geodesic_curvature(c, t); };
        std::vector<double> k(n + 1);
        double d2 = 0.0;
        for (int i = 0; i <= n; ++i) {
            k[i] = f(t0 + step * i);
            if (!(k[i] > 0.0)) fail(t0 + step * i);
            if (i >= 2) d2 = std::max(d2, std::abs(k[i] - 2.0 * k[i - 1] + k[i - 2]));
        }
        // A sampled minimum above twice the interpolation dip bound cannot hide a zero.
        const double margin = 2.0 * d2 / 8.0;
        for (int i = 1; i < n; ++i) {
            if (k[i] > k[i - 1] || k[i] > k[i + 1] || k[i] > margin) continue;
            const double r = 0.5 * (std::sqrt(5.0) - 1.0);
            double a = t0 + step * (i - 1), b = t0 + step * (i + 1);
            double x1 = b - r * (b - a), x2 = a + r * (b - a), f1 = f(x1), f2 = f(x2);
            for (int it = 0; it < 60 && std::min(f1, f2) > 0.0; ++it) {
                if (f1 < f2) {
                    b = x2; x2 = x1; f2 = f1; x1 = b - r * (b - a); f1 = f(x1);
                } else {
                    a = x1; x1 = x2; f1 = f2; x2 = a + r * (b - a); f2 = f(x2);
                }
            }
            if (!(std::min(f1, f2) > 0.0)) fail(f1 < f2 ? x1 : x2);
        }
    };
    scan(*reference_, 0.0, kTwoPi, 1024);
    for (const auto& t : head_) scan(*blend_, t.t0(), kTwoPi, 512);
    const int n_tail = std::clamp(static_cast<int>(65536 / std::max<std::size_t>(tail_.size(), 1)), 32, 512);
    for (std::size_t i = 0; i < tail_.size(); ++i) {
        const double span = (i + 1 == tail_.size()) ? period_ - tail_[i].t0() : kTwoPi;
        scan(*blend_, tail_[i].t0(), span, n_tail);
    }
}

CurvatureDiagnostics SmoothClosedSphereCurve::diagnostics(int samples_per_loop) const {
    struct Cand {
        double inv;
        double t;
        const SphereCurve* c;
        double step;
    };
    std::vector<Cand> cands;
    double min_abs = std::numeric_limits<double>::infinity();
    auto scan = [&](const SphereCurve& c, double t0, double span, int n) {
        Cand best{-1.0, t0, &c, span / n};
        for (int i = 0; i < n; ++i) {
            const double t = t0 + span * i / n;
            const double k = std::abs(milnorflow::geodesic_curvature(c, t));
            min_abs = std::min(min_abs, k);
            if (1.0 / k > best.inv) best = {1.0 / k, t, &c, span / n};
        }
        cands.push_back(best);
    };
    scan(*reference_, 0.0, kTwoPi, 8 * samples_per_loop);
    if (!surrogate_) {
        for (const auto& t : head_) scan(*blend_, t.t0(), kTwoPi, samples_per_loop);
        for (std::size_t i = 0; i < tail_.size(); ++i) {
            const double span = (i + 1 == tail_.size()) ? period_ - tail_[i].t0() : kTwoPi;
            scan(*blend_, tail_[i].t0(), span, samples_per_loop);
        }
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.inv > b.inv; });
    CurvatureDiagnostics d{0.0, min_abs, 0.0};
    const std::size_t top = std::min<std::size_t>(cands.size(), 8);
    for (std::size_t i = 0; i < top; ++i) {
        // Golden-section refinement of 1/|k_g| around the sampled maximum.
        const auto& c = cands[i];
        auto f = [&](double t) { return 1.0 / std::abs(milnorflow::geodesic_curvature(*c.c, t)); };
        double a = c.t - c.step, b = c.t + c.step;
        const double r = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = b - r * (b - a), x2 = a + r * (b - a);
        double f1 = f(x1), f2 = f(x2);
        for (int it = 0; it < 60; ++it) {
            if (f1 > f2) {
                b = x2; x2 = x1; f2 = f1; x1 = b - r * (b - a); f1 = f(x1);
            } else {
                a = x1; x1 = x2; f1 = f2; x2 = a + r * (b - a); f2 = f(x2);
            }
        }
        const double v = std::max({c.inv, f1, f2});
        if (v > d.max_inv_kg) {
            d.max_inv_kg = v;
            d.t_at_max = f1 > f2 ? x1 : x2;
        }
    }
    return d;
}

std::shared_ptr<const SmoothClosedSphereCurve> build_gamma(double lambda,
                                                           const std::optional<TrochoidParams>& overrides) {
    if (!(lambda >= kLambdaMin && lambda <= kLambdaMax))
        throw DomainError("lambda out of supported range [0.5, 6]");
    TrochoidParams p = overrides ? *overrides : TrochoidParams::defaults(lambda);
    p.lambda = lambda;
    return SmoothClosedSphereCurve::build(p);
}

SeamResidual seam_residual(const SphereCurve& c) {
    const auto d0 = c.derivatives(0.0), d1 = c.derivatives(c.period());
    SeamResidual r{};
    r.position = (d1[0] - d0[0]).norm();
    r.tangent = (d1[1].normalized() - d0[1].normalized()).norm();
    const double k0 = geodesic_curvature(c, 0.0), k1 = geodesic_curvature(c, c.period());
    r.curvature = std::abs(k1 - k0) / std::max(std::abs(k0), 1e-300);
    for (int k = 0; k <= 4; ++k) r.derivative[k] = (d1[k] - d0[k]).norm() / std::max(d0[k].norm(), 1e-300);
    return r;
}

SeamResidual seam_crossing_residual(const SphereCurve& c, double delta) {
    const double T = c.period();
    if (!(delta > 0.0 && 2.0 * delta < T)) throw DomainError("seam delta must lie in (0, T/2)");
    const auto left = c.derivatives(T - delta), right = c.derivatives(delta);
    const double step = 2.0 * delta;
    std::array<Vec3, 3> pred;
    for (int k = 0; k < 3; ++k) {
        Vec3 acc = Vec3::Zero();
        double f = 1.0;
        for (int m = k; m <= 4; ++m) {
            acc += left[m] * f;
            f *= step / (m - k + 1);
        }
        pred[k] = acc;
    }
    auto kg = [](const Vec3& p, const Vec3& d1, const Vec3& d2) {
        const double sp = d1.norm();
        return d2.dot(p.cross(d1)) / (sp * sp * sp);
    };
    SeamResidual r{};
    r.position = (pred[0] - right[0]).norm();
    r.tangent = (pred[1].normalized() - right[1].normalized()).norm();
    const double k_right = kg(right[0], right[1], right[2]);
    r.curvature = std::abs(kg(pred[0], pred[1], pred[2]) - k_right) / std::max(std::abs(k_right), 1e-300);
    for (int k = 0; k < 3; ++k) r.derivative[k] = (pred[k] - right[k]).norm() / std::max(right[k].norm(), 1e-300);
    return r;
}

}  // namespace milnorflow
