#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>

#include "milnorflow/curve_factory.hpp"
#include "milnorflow/errors.hpp"

using namespace milnorflow;

namespace {

// Composite Simpson on [a, b] with n (even) panels.
template <class F>
double simpson(F f, double a, double b, int n) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

double speed(const SphereCurve& c, double t) {
    const auto g = c.eval(Jet<1>::variable(t));
    const auto d = g.deriv(1);
    return std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
}

}  // namespace

TEST(Trochoid, PointValues) {
    const auto p = TrochoidParams::make(1.0, 0.1, 0.1);
    EXPECT_NEAR(p.a, 0.01, 1e-17);
    const PolarPoint a = trochoid_point(p, 0.0);
    EXPECT_NEAR(a.rho, 1.01, 1e-15);
    EXPECT_NEAR(a.theta, -0.1, 1e-15);
    const PolarPoint b = trochoid_point(p, M_PI / 2);
    EXPECT_NEAR(b.rho, 1.11, 1e-15);
    EXPECT_NEAR(b.theta, 0.01 * M_PI / 2, 1e-15);
    const PolarPoint c = trochoid_point(p, M_PI);
    EXPECT_NEAR(c.rho, 1.01, 1e-15);
    EXPECT_NEAR(c.theta, 0.01 * M_PI + 0.1, 1e-15);
}

TEST(Trochoid, DomainChecks) {
    const auto p = TrochoidParams::make(1.0, 0.1, 0.1);
    EXPECT_THROW(trochoid_point(p, -1.0), DomainError);
    EXPECT_THROW(trochoid_point(p, 3.0 * M_PI / p.a + 1.0), DomainError);
    EXPECT_THROW(TrochoidParams::make(1.0, 0.1, 1.5), DomainError);
}

TEST(Trochoid, CurvatureClosedForm) {
    const auto p = TrochoidParams::make(1.0, 0.1, 0.1);
    EXPECT_NEAR(trochoid_curvature(p, M_PI / 2).k, 10.0 * 1.1 / 1.331, 1e-12);
    EXPECT_NEAR(trochoid_curvature(p, 0.0).k, 10.0 / std::pow(1.01, 1.5), 1e-12);
}

TEST(Trochoid, CurvatureTendsToInverseHAsGVanishes) {
    const auto p = TrochoidParams::make(1.0, 0.1, 1e-12);
    for (double t : {0.0, 0.7, 2.0, 4.5}) EXPECT_NEAR(trochoid_curvature(p, t).k, 10.0, 1e-9);
}

TEST(PolarCurvature, CircleHasInverseRadius) {
    for (double r0 : {0.5, 1.0, 3.0}) {
        const Jet<2> t = Jet<2>::variable(0.4);
        const PolarJet<2> z{Jet<2>(r0), t};
        EXPECT_NEAR(polar_curve_curvature(z), 1.0 / r0, 1e-14);
    }
}

TEST(PolarCurvature, SplitMatchesCartesian) {
    const auto p = TrochoidParams::make(1.0, 0.1, 0.1);
    for (double t : {0.0, 0.3, M_PI / 2, 2.0, M_PI}) {
        const double a = plane_curvature(p, t), b = plane_curvature_split(p, t);
        EXPECT_LE(std::abs(a - b) / std::abs(a), 1e-8) << "t = " << t;
    }
}

TEST(PolarCurvature, FlatnessConstantIsBoundedAndSettles) {
    std::vector<double> cs;
    for (double lam : {1.0, 2.0, 3.0}) {
        const auto p = TrochoidParams::defaults(lam);
        double m = 0.0;
        for (int i = 0; i < 20000; ++i) m = std::max(m, 1.0 / std::abs(plane_curvature(p, 2.0 * M_PI * i / 20000)));
        cs.push_back(m / p.h);
    }
    for (double c : cs) {
        EXPECT_GE(c, 1.0);
        EXPECT_LE(c, 2.5);
    }
    EXPECT_GT(cs[0], cs[1]);
    EXPECT_GT(cs[1], cs[2]);
}

TEST(Closing, PlaneCurveCloses) {
    for (double lam : {1.0, 2.0, 3.0}) {
        const auto c = build_gamma(lam);
        const PlaneCurve& pc = c->plane_stage();
        const auto a = pc.cartesian(0.0), b = pc.cartesian(pc.t_end());
        EXPECT_LE(std::hypot(a[0] - b[0], a[1] - b[1]), 1e-10) << "lambda " << lam;
        const auto& cd = *pc.closing();
        EXPECT_GE(cd.epsilon, 0.0);
        EXPECT_LT(cd.epsilon, 2.0 * M_PI * c->params().a);
    }
}

TEST(Closing, CornerAngleDecreases) {
    const double d1 = std::abs(build_gamma(1.0)->delta_theta());
    const double d2 = std::abs(build_gamma(2.0)->delta_theta());
    const double d3 = std::abs(build_gamma(3.0)->delta_theta());
    EXPECT_GT(d1, d2);
    EXPECT_GT(d2, d3);
}

TEST(Closing, DisplacementBoundedByCrossingGap) {
    for (double lam : {1.0, 2.0, 3.0}) {
        const auto c = build_gamma(lam);
        const PlaneCurve& closed = c->plane_stage();
        const PlaneCurve open(c->params(), closed.t_end());
        double disp = 0.0;
        for (int i = 0; i <= 100000; ++i) {
            const double t = closed.t_end() * i / 100000;
            const auto a = open.cartesian(t), b = closed.cartesian(t);
            disp = std::max(disp, std::hypot(a[0] - b[0], a[1] - b[1]));
        }
        EXPECT_LE(disp, 10.0 * 2.0 * M_PI * c->params().a) << "lambda " << lam;
    }
}

TEST(Stereographic, EquatorAndRoundTrip) {
    for (double ang : {0.0, 1.0, 2.5, 4.0}) {
        const Vec3 p = stereo_lift(std::cos(ang), std::sin(ang));
        EXPECT_NEAR(p.z(), 0.0, 1e-15);
        EXPECT_NEAR(p.norm(), 1.0, 1e-15);
    }
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int k = 0; k < 1000; ++k) {
        const double x = u(rng), y = u(rng);
        const Vec3 p = stereo_lift(x, y);
        EXPECT_NEAR(p.norm(), 1.0, 1e-12);
        const auto [x2, y2] = stereo_chart(p);
        EXPECT_NEAR(x2, x, 1e-12);
        EXPECT_NEAR(y2, y, 1e-12);
    }
}

TEST(GeodesicCurvature, LatitudeCircles) {
    EXPECT_NEAR(geodesic_curvature(LatitudeCircle(M_PI / 2), 0.3), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(geodesic_curvature(LatitudeCircle(M_PI / 4), 0.3)), 1.0, 1e-14);
    EXPECT_NEAR(std::abs(geodesic_curvature(LatitudeCircle(M_PI / 3), 1.1)), 1.0 / std::sqrt(3.0), 1e-14);
    EXPECT_NEAR(std::abs(geodesic_curvature_christoffel(LatitudeCircle(M_PI / 3), 1.1)), 1.0 / std::sqrt(3.0), 1e-12);
}

TEST(GeodesicCurvature, ChristoffelAgreesOnTheBand) {
    std::mt19937_64 rng(8);
    for (double lam : {1.0, 2.0, 3.0}) {
        const auto c = build_gamma(lam);
        std::uniform_real_distribution<double> u(0.0, c->period());
        for (int k = 0; k < 1000; ++k) {
            const auto g = c->eval(Jet<2>::variable(u(rng)));
            if (std::abs(g.z.value()) > 0.5) continue;
            const double a = geodesic_curvature(g), b = geodesic_curvature_christoffel(g);
            EXPECT_LE(std::abs(a - b) / std::abs(a), 1e-6);
        }
    }
}

TEST(Kuiper, ZeroAngleIsIdentityAndCornerIsFixed) {
    auto circle = std::make_shared<LatitudeCircle>(M_PI / 3);
    const KuiperCurve k0 = kuiper_smooth(circle, 0.0);
    for (double t : {0.1, 2.0, 5.0}) EXPECT_LE((k0.point(t) - circle->point(t)).norm(), 1e-12);
    const auto c = build_gamma(1.0);
    EXPECT_LE((c->kuiper_stage()->point(0.0) - c->lifted_stage()->point(0.0)).norm(), 1e-12);
}

TEST(Kuiper, SeamTangentClosed) {
    for (double lam : {1.0, 2.0, 3.0}) {
        const auto k = build_gamma(lam)->kuiper_stage();
        const SeamResidual r = seam_residual(*k);
        EXPECT_LE(r.position, 1e-10);
        EXPECT_LE(r.tangent, 1e-8);
    }
}

TEST(SeamBlend, SmoothInputUnchanged) {
    auto circle = std::make_shared<LatitudeCircle>(M_PI / 3);
    const SeamBlendCurve b = corner_smooth(circle, 0.2);
    for (double t : {0.0, 0.05, 0.19, 3.0, 2.0 * M_PI - 0.1}) EXPECT_LE((b.point(t) - circle->point(t)).norm(), 1e-10);
}

TEST(SeamBlend, RejectsWindowOverFeature) {
    auto circle = std::make_shared<LatitudeCircle>(M_PI / 3);
    EXPECT_THROW(corner_smooth(circle, 0.2, {{0.1, 0.5}}), ConstructionError);
    EXPECT_THROW(corner_smooth(circle, 4.0), ConstructionError);
}

TEST(SeamBlend, CurvatureJumpRemoved) {
    for (double lam : {1.0, 2.0, 3.0}) {
        const auto c = build_gamma(lam);
        const SeamResidual before = seam_crossing_residual(*c->kuiper_stage(), 1e-4);
        const SeamResidual after = seam_crossing_residual(*c, 1e-4);
        EXPECT_GT(before.curvature, 1e-4);
        EXPECT_LE(after.curvature, 1e-6);
    }
}

TEST(SeamBlend, ReciprocalCurvatureMaxChangesLittle) {
    for (double lam : {1.0, 2.0}) {
        const auto c = build_gamma(lam);
        const auto k = c->kuiper_stage();
        double mf = 0.0, mk = 0.0;
        for (int i = 0; i < 100000; ++i) {
            const double t = c->period() * (i + 0.5) / 100000;
            mf = std::max(mf, 1.0 / std::abs(c->geodesic_curvature(t)));
            mk = std::max(mk, 1.0 / std::abs(geodesic_curvature(*k, t)));
        }
        EXPECT_LE(std::abs(mf - mk) / mk, 0.01);
    }
}

TEST(Gamma, OnTheSphere) {
    std::mt19937_64 rng(9);
    for (double lam : {1.0, 2.0, 3.0}) {
        const auto c = build_gamma(lam);
        std::uniform_real_distribution<double> u(0.0, c->period());
        for (int k = 0; k < 2000; ++k) EXPECT_NEAR(c->point(u(rng)).norm(), 1.0, 1e-10);
    }
}

TEST(Gamma, ClosesAcrossTheSeam) {
    for (double lam : {1.0, 1.5, 2.0, 2.5, 3.0}) {
        const SeamResidual r = seam_crossing_residual(*build_gamma(lam), 1e-5);
        EXPECT_LE(r.position, 1e-8);
        EXPECT_LE(r.tangent, 1e-8);
        EXPECT_LE(r.curvature, 1e-8);
    }
}

TEST(Gamma, LengthIncreasesAndDoubles) {
    const double l1 = build_gamma(1.0)->length(), l2 = build_gamma(2.0)->length(), l3 = build_gamma(3.0)->length();
    EXPECT_LT(l1, l2);
    EXPECT_LT(l2, l3);
    EXPECT_GT(l3, 2.0 * l1);
}

TEST(Gamma, LengthAndCurvatureIntegralMatchSimpson) {
    const auto c = build_gamma(1.0);
    const int n = 400000;
    const double len = simpson([&](double t) { return speed(*c, t); }, 0.0, c->period(), n);
    const double ikg =
        simpson([&](double t) { return c->geodesic_curvature(t) * speed(*c, t); }, 0.0, c->period(), n);
    EXPECT_LE(std::abs(len - c->length()) / len, 1e-10);
    EXPECT_LE(std::abs(ikg - c->integral_kg_ds()) / ikg, 1e-10);
}

TEST(Gamma, ArcLengthRoundTrip) {
    const auto c = build_gamma(2.0);
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(0.0, c->period());
    for (int k = 0; k < 500; ++k) {
        const double t = u(rng);
        EXPECT_NEAR(c->t_of_s(c->s_of_t(t)), t, 1e-9);
    }
}

TEST(Gamma, FrameAtPhaseMatchesDirectEvaluation) {
    const auto c = build_gamma(1.5);
    for (double ph : {0.0, 0.13, 0.5, 0.77}) {
        const auto f = c->frame_at_phase(ph);
        const double t = c->t_of_s(ph * c->length());
        EXPECT_LE((f.x - c->point(t)).norm(), 1e-9);
        EXPECT_NEAR(f.kg, c->geodesic_curvature(t), 1e-7 * std::abs(f.kg));
    }
}

TEST(Gamma, RejectsUnsupportedLambda) {
    EXPECT_THROW(build_gamma(7.0), DomainError);
    EXPECT_THROW(build_gamma(0.2), DomainError);
}

TEST(Gamma, BuildsAcrossTheSupportedRange) {
    for (double lam : {0.75, 0.84, 0.92, 0.975, 1.04, 6.0}) {
        const auto c = build_gamma(lam);
        const SeamResidual r = seam_crossing_residual(*c, 1e-5);
        EXPECT_LE(std::max({r.position, r.tangent, r.curvature}), 1e-8) << "lambda = " << lam;
    }
}

// Endpoint at the edge of the flow support: tau0 leaves the ]0, 2 pi[ window.
TEST(Gamma, IllConditionedClosingIsRejected) {
    EXPECT_THROW(build_gamma(0.55), ConstructionError);
    const auto p = TrochoidParams::defaults(0.55);
    EXPECT_THROW(close_curve(PlaneCurve(p, 3.0 * M_PI / p.a), p), ConstructionError);
}

// Inflections on the sphere: from the loops themselves below about 0.74, from the closing flow just past a loop-count jump.
TEST(Gamma, VanishingCurvatureIsRejected) {
    for (double lam : {0.5, 0.6, 0.7, 0.81, 0.9}) EXPECT_THROW(build_gamma(lam), ConstructionError) << "lambda = " << lam;
}

TEST(Gamma, CurvatureNeverVanishes) {
    for (double lam : {0.75, 0.92, 1.0, 1.5, 2.0, 3.0}) {
        const auto c = build_gamma(lam);
        const double sign = c->geodesic_curvature(0.0) > 0.0 ? 1.0 : -1.0;
        const int n = 200000;
        double m = 1e300;
        for (int i = 0; i < n; ++i) m = std::min(m, sign * c->geodesic_curvature(c->period() * i / n));
        EXPECT_GT(m, 0.0) << "lambda = " << lam;
        EXPECT_GT(c->diagnostics().min_abs_kg, 0.0);
    }
}

TEST(Gamma, LengthStrictlyIncreasesOnAFineGrid) {
    double prev = 0.0;
    for (double lam = 1.0; lam <= 1.2 + 1e-12; lam += 0.01) {
        const double l = build_gamma(lam)->length();
        EXPECT_GT(l, prev) << "lambda = " << lam;
        prev = l;
    }
}

TEST(Gamma, PeriodicSurrogateIsExactlyPeriodic) {
    const double lam = 8.0;
    const auto p = TrochoidParams::defaults(lam);
    const auto c = SmoothClosedSphereCurve::build_periodic(p);
    EXPECT_TRUE(c->periodic_surrogate());
    for (double t : {0.0, 0.3, 0.5 * c->period()}) {
        const JVec3<2> a = c->eval_raw(Jet<2>::variable(t));
        const JVec3<2> b = c->eval_raw(Jet<2>::variable(t + c->period()));
        for (int k = 0; k <= 2; ++k) {
            const auto u = a.deriv(k), v = b.deriv(k);
            const double scale = std::max(1.0, std::hypot(u[0], u[1], u[2]));
            EXPECT_LE(std::hypot(u[0] - v[0], u[1] - v[1], u[2] - v[2]) / scale, 1e-9) << "t = " << t << " k = " << k;
        }
    }
    const auto f = c->frame_at_phase(0.3);
    EXPECT_NEAR(f.x.norm(), 1.0, 1e-12);
    EXPECT_GT(std::abs(f.kg), 1.0 / (4.0 * p.h));
}

// max 1/|k_g| on the sphere against lambda: log fit slope -1 +- 0.15.
TEST(Gamma, ReciprocalCurvatureDecaySlope) {
    std::vector<double> x = {1.0, 2.0, 3.0}, y;
    for (double lam : x) y.push_back(std::log(build_gamma(lam)->diagnostics().max_inv_kg));
    const double slope = (y[2] - y[0]) / 2.0;
    EXPECT_GE(slope, -1.15);
    EXPECT_LE(slope, -0.85);
}
