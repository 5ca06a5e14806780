#include "milnorflow/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

#include "milnorflow/curve_factory.hpp"
#include "milnorflow/errors.hpp"
#include "milnorflow/multicentre.hpp"
#include "milnorflow/sullivan_field.hpp"

namespace milnorflow {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : rng_(seed) {}
    double normal() { return n_(rng_); }
    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
    Vec3 unit3() {
        Vec3 v(normal(), normal(), normal());
        return v.normalized();
    }
    Quaternion unit4() { return Quaternion(normal(), normal(), normal(), normal()).normalized(); }

private:
    std::mt19937_64 rng_;
    std::normal_distribution<double> n_;
};

struct Suite {
    std::string name;
    std::vector<CheckResult>& out;

    void record(const std::string& check, bool passed, double measured, double tol, const std::string& detail = {}) {
        out.push_back({name, check, passed, measured, tol, detail});
    }
    void at_most(const std::string& check, double measured, double tol, const std::string& detail = {}) {
        record(check, measured <= tol, measured, tol, detail);
    }
    void guarded(const std::string& check, const std::function<void()>& body) {
        try {
            body();
        } catch (const std::exception& e) {
            record(check, false, std::numeric_limits<double>::quiet_NaN(), 0.0, std::string("exception: ") + e.what());
        }
    }
};

std::string join(const std::vector<double>& v) {
    std::ostringstream os;
    os.precision(10);
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
    return os.str();
}

bool strictly_increasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] > v[i - 1])) return false;
    return true;
}

const std::vector<double> kSlopeGrid = {1.0, 1.5, 2.0, 2.5, 3.0};
constexpr double kSlopeLo = -1.15, kSlopeHi = -0.85;

void geom_suite(Suite& s, std::uint64_t seed) {
    Sampler rng(seed);
    s.guarded("skew_symmetric_generator", [&] {
        double skew = 0.0, norm_err = 0.0;
        for (int k = 0; k < 1000; ++k) {
            const Vec3 x = rng.unit3(), y = rng.unit3() * rng.uniform(0.1, 3.0);
            const Mat3 a = skew_matrix(x);
            skew = std::max(skew, (a + a.transpose()).cwiseAbs().maxCoeff());
            const double t = rng.uniform(-10.0, 10.0);
            norm_err = std::max(norm_err, std::abs((axis_angle(x, t) * y).norm() - y.norm()) / y.norm());
        }
        s.at_most("skew_symmetric_generator", skew, 0.0);
        s.at_most("rotation_preserves_norm", norm_err, 1e-12);
    });
    s.guarded("hopf_tangent_free_action", [&] {
        double close = 0.0, min_early = std::numeric_limits<double>::infinity();
        for (int k = 0; k < 100; ++k) {
            const Vec3 x = rng.unit3();
            const Vec3 y = (rng.unit3() - x * x.dot(rng.unit3())).normalized();
            const TangentPairPoint p{x, (y - x * x.dot(y)).normalized()};
            close = std::max(close, (hopf_flow_tangent(p, kTwoPi).y - p.y).norm());
            for (int i = 0; i <= 1000; ++i) {
                const double t = 1e-3 + (kTwoPi - 2e-3) * i / 1000.0;
                min_early = std::min(min_early, (hopf_flow_tangent(p, t).y - p.y).norm());
            }
        }
        s.at_most("hopf_tangent_closes_at_2pi", close, 1e-12);
        s.record("hopf_tangent_no_early_return", min_early > 0.0, min_early, 0.0, "min distance for t in [1e-3, 2pi - 1e-3]");
    });
    s.guarded("double_cover_two_to_one", [&] {
        double d = 0.0;
        for (int k = 0; k < 1000; ++k) {
            const Quaternion q = rng.unit4();
            d = std::max(d, (rotation_from_unit_quaternion(q) - rotation_from_unit_quaternion(-1.0 * q))
                                .cwiseAbs()
                                .maxCoeff());
        }
        s.at_most("double_cover_two_to_one", d, 0.0);
    });
    s.guarded("hopf_conjugacy", [&] {
        double d = 0.0;
        for (int k = 0; k < 1000; ++k) {
            const auto [p1, p2] = std::pair{rng.unit4(), rng.unit4()};
            C4 z = quaternions_to_c4(p1, p2);
            const double n = c4_norm(z);
            for (auto& c : z) c /= n;
            // The conjugacy is real linear, so its differential is itself.
            const C4 pushed = hopf_conjugacy(hopf_field_10(z));
            const C4 target = hopf_field_01(hopf_conjugacy(z));
            for (int i = 0; i < 4; ++i) d = std::max(d, std::abs(pushed[i] - target[i]));
        }
        s.at_most("hopf_conjugacy", d, 1e-12);
    });
}

void curve_suite(Suite& s, std::uint64_t seed) {
    Sampler rng(seed);
    s.guarded("unit_norm", [&] {
        double d = 0.0;
        for (double lam : {1.0, 2.0, 3.0}) {
            const auto c = build_gamma(lam);
            for (int k = 0; k < 2000; ++k) d = std::max(d, std::abs(c->point(rng.uniform(0.0, c->period())).norm() - 1.0));
        }
        s.at_most("unit_norm", d, 1e-10);
    });
    s.guarded("christoffel_cross_check", [&] {
        double d = 0.0;
        int used = 0;
        for (double lam : kSlopeGrid) {
            const auto c = build_gamma(lam);
            for (int k = 0; k < 2000; ++k) {
                const double t = rng.uniform(0.0, c->period());
                const auto g = c->eval(Jet<2>::variable(t));
                if (std::abs(g.z.value()) > 0.5) continue;
                const double ki = geodesic_curvature(g), kc = geodesic_curvature_christoffel(g);
                d = std::max(d, std::abs(ki - kc) / std::abs(ki));
                ++used;
            }
        }
        s.at_most("christoffel_cross_check", d, 1e-6, std::to_string(used) + " samples with |z| <= 0.5");
    });
    s.guarded("seam_closure", [&] {
        double worst = 0.0;
        for (double lam : kSlopeGrid) {
            const auto r = seam_crossing_residual(*build_gamma(lam), 1e-5);
            worst = std::max({worst, r.position, r.tangent, r.curvature});
        }
        s.at_most("seam_closure", worst, 1e-8, "position, tangent, relative k_g across the wrap");
    });
    s.guarded("curvature_nonvanishing", [&] {
        double m = std::numeric_limits<double>::infinity();
        for (double lam : kSlopeGrid) m = std::min(m, build_gamma(lam)->diagnostics().min_abs_kg);
        s.record("curvature_nonvanishing", m > 0.0, m, 0.0, "min |k_g| over the grid");
    });
    s.guarded("length_growth", [&] {
        std::vector<double> l;
        for (double lam : kSlopeGrid) l.push_back(build_gamma(lam)->length());
        const bool ok = strictly_increasing(l) && l.back() > 2.0 * l.front();
        s.record("length_growth", ok, l.back() / l.front(), 2.0, "lengths " + join(l));
    });
    s.guarded("smoothing_locality", [&] {
        double d = 0.0;
        for (double lam : {1.0, 2.0}) {
            const auto c = build_gamma(lam);
            const auto kuiper = c->kuiper_stage();
            const auto lifted = c->lifted_stage();
            const double T = c->period(), w = c->window_half_width();
            const PlaneCurve input(c->params(), c->plane_stage().t_end());
            for (int k = 0; k < 2000; ++k) {
                const double t = rng.uniform(0.0, T);
                const PolarPoint open = input.point(t), closed = c->plane_stage().point(t);
                if (open.theta < 1.5 * M_PI)
                    d = std::max({d, std::abs(open.rho - closed.rho), std::abs(open.theta - closed.theta)});
                if (t < 0.5 * T) d = std::max(d, (kuiper->point(t) - lifted->point(t)).cwiseAbs().maxCoeff());
                if (t > w && t < T - w) d = std::max(d, (c->point(t) - kuiper->point(t)).cwiseAbs().maxCoeff());
            }
        }
        s.at_most("smoothing_locality", d, 0.0, "bitwise identity outside the supports");
    });
    s.guarded("flatness_slope", [&] {
        std::vector<double> y;
        for (double lam : kSlopeGrid) y.push_back(std::log(build_gamma(lam)->diagnostics().max_inv_kg));
        const double slope = fit_slope(kSlopeGrid, y);
        s.record("flatness_slope", slope >= kSlopeLo && slope <= kSlopeHi, slope, kSlopeHi,
                 "log max 1/|k_g| against lambda, window [-1.15, -0.85]");
    });
}

void sullivan_suite(Suite& s, std::uint64_t seed, const IntegratorConfig& cfg) {
    s.guarded("leaf_lookup", [&] {
        double worst = 0.0;
        for (double lam : {1.0, 2.0}) {
            const SullivanField f(lam);
            for (const auto& p : random_frames(200, seed + static_cast<std::uint64_t>(lam * 10)))
                worst = std::max(worst, f.leaf_through(p).residual);
        }
        s.at_most("leaf_lookup", worst, 1e-6);
    });
    s.guarded("tangency", [&] {
        double worst = 0.0;
        Sampler rng(seed + 1);
        for (double lam : {1.0, 2.0}) {
            const SullivanField f(lam);
            for (const auto& p : random_frames(100, seed + 2)) {
                const LeafMatch m = f.leaf_through(p);
                const double ph = rng.uniform(0.01, 0.99), h = 1e-7;
                const FramePoint a = f.leaf_point(m.g, ph - h), b = f.leaf_point(m.g, ph + h);
                Eigen::Matrix<double, 9, 1> tan, x;
                tan << (b.x - a.x), (b.y - a.y), (b.w - a.w);
                const FrameVelocity v = f.eval(f.leaf_point(m.g, ph));
                x << v.x, v.y, v.w;
                const double c = std::clamp(tan.dot(x) / (tan.norm() * x.norm()), -1.0, 1.0);
                worst = std::max(worst, std::acos(c));
            }
        }
        s.at_most("tangency", worst, 1e-6, "angle between X and the numerical leaf tangent, radians");
    });
    s.guarded("leaf_disjointness", [&] {
        Sampler rng(seed + 3);
        double min_d = std::numeric_limits<double>::infinity();
        const SullivanField f(1.0);
        constexpr int n = 256;
        std::vector<FramePoint> base;
        for (int i = 0; i < n; ++i) base.push_back(f.leaf_point(Mat3::Identity(), (i + 0.5) / n));
        for (int k = 0; k < 20; ++k) {
            const double ang = rng.uniform(1e-3, M_PI);
            const Mat3 g = axis_angle(rng.unit3(), ang);
            for (int i = 0; i < n; ++i) {
                const FramePoint q = f.leaf_point(g, (i + 0.5) / n);
                for (const auto& p : base) {
                    const double d = std::sqrt((q.x - p.x).squaredNorm() + (q.y - p.y).squaredNorm() +
                                               (q.w - p.w).squaredNorm());
                    min_d = std::min(min_d, d);
                }
            }
        }
        s.record("leaf_disjointness", min_d > 0.0, min_d, 0.0, "min sampled distance between distinct leaves");
    });
    s.guarded("flatness_slope", [&] {
        const auto frames = random_frames(1000, seed + 4);
        std::vector<double> y;
        for (double lam : kSlopeGrid) {
            const SullivanField f(lam);
            double m = 0.0;
            for (const auto& p : frames) m = std::max(m, f.flatness_distance(p));
            y.push_back(std::log(m));
        }
        const double slope = fit_slope(kSlopeGrid, y);
        s.record("flatness_slope", slope >= kSlopeLo && slope <= kSlopeHi, slope, kSlopeHi,
                 "log sup |X - (H,0)| against lambda, window [-1.15, -0.85]");
    });
    s.guarded("orbit_periods", [&] {
        const std::vector<double> grid = {1.0, 1.5, 2.0, 2.5};
        const PeriodScan scan = period_scan(sullivan_family(), grid, cfg);
        std::vector<double> periods;
        double worst_rel = 0.0, worst_res = 0.0;
        bool all_closed = true;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const ScanRow& r = scan.rows[i];
            all_closed = all_closed && r.ok && r.closed;
            periods.push_back(r.period);
            worst_res = std::max(worst_res, r.residual);
            worst_rel = std::max(worst_rel, std::abs(r.period - period_quadrature(grid[i])) / period_quadrature(grid[i]));
        }
        s.record("orbit_closure", all_closed && worst_res <= 1e-6, worst_res, 1e-6, "periods " + join(periods));
        s.record("period_growth", all_closed && strictly_increasing(periods), periods.back() / periods.front(), 1.0);
        s.at_most("period_vs_quadrature", worst_rel, 1e-2);
    });
}

void bundle_suite(Suite& s, std::uint64_t seed, TransitionFault fault, const IntegratorConfig& cfg) {
    Sampler rng(seed);
    for (const BundleSpec spec : {BundleSpec::e01(), BundleSpec::e10()}) {
        const std::string tag = "(" + std::to_string(spec.h) + "," + std::to_string(spec.j) + ")";
        s.guarded("cocycle " + tag, [&] {
            double worst = 0.0;
            for (int k = 0; k < 10000; ++k) {
                const Quaternion v = rng.unit4() * std::exp(rng.uniform(std::log(0.1), std::log(10.0)));
                const Quaternion w = rng.unit4();
                const auto [u, eta] = transition(spec, v, w, fault);
                const auto [v2, w2] = transition_inverse(spec, u, eta);
                worst = std::max({worst, distance(v, v2) / v.norm(), distance(w, w2)});
            }
            s.at_most("cocycle " + tag, worst, 1e-12);
        });
        s.guarded("clutching_unit " + tag, [&] {
            double worst = 0.0;
            for (int k = 0; k < 10000; ++k)
                worst = std::max(worst, std::abs(clutching_map(spec, rng.unit4(), rng.unit4()).norm() - 1.0));
            s.at_most("clutching_unit " + tag, worst, 1e-12);
        });
        s.guarded("commutation " + tag, [&] {
            const PhaseAction good = matched_action(spec);
            const PhaseAction bad = good == PhaseAction::Left ? PhaseAction::Right : PhaseAction::Left;
            double matched = 0.0;
            std::vector<double> mismatched;
            for (int k = 0; k < 10000; ++k) {
                const Quaternion v = rng.unit4(), w = rng.unit4();
                const double t = rng.uniform(0.5, 2.5);
                matched = std::max(matched, commutation_residual(spec, v, w, t, good, fault));
                mismatched.push_back(commutation_residual(spec, v, w, t, bad, fault));
            }
            std::nth_element(mismatched.begin(), mismatched.begin() + mismatched.size() / 2, mismatched.end());
            const double median = mismatched[mismatched.size() / 2];
            s.at_most("commutation_matched " + tag, matched, 1e-12);
            s.record("commutation_mismatched " + tag, median > 0.1, median, 0.1, "median over generic samples");
        });
        s.guarded("chart_overlap " + tag, [&] {
            double worst = 0.0;
            const double radii[] = {0.3, 0.6, 1.0, 1.7, 3.0};
            for (int k = 0; k < 200; ++k) {
                Quaternion th = rng.unit4();
                if (std::norm(th.z1()) < 0.5) th = Quaternion(th.c, th.d, th.a, th.b);
                const ChartPoint n{Chart::North, radii[k % 5] * th, rng.unit4()};
                const ChartVelocity vn = eval_fibration_field(spec, n);
                const ChartPoint so = to_south(spec, n);
                const ChartVelocity vs = eval_fibration_field(spec, so);
                const ChartVelocity tr = transport_to_south(spec, n, vn);
                worst = std::max({worst, distance(tr.base, vs.base), distance(tr.fiber, vs.fiber)});
            }
            s.at_most("chart_overlap " + tag, worst, 1e-8);
        });
    }
    s.guarded("standard_sphere_predicate", [&] {
        int mismatches = 0;
        for (int h = -10; h <= 10; ++h) {
            const long long k = 2LL * h - 1;
            if (is_diffeo_standard({h, 1 - h}) != ((k * k - 1) % 7 == 0)) ++mismatches;
        }
        s.at_most("standard_sphere_predicate", mismatches, 0.0);
    });
    s.guarded("fibration_orbits", [&] {
        const std::vector<double> grid = {0.0, 0.5, 0.8};
        const PeriodScan scan = period_scan(fibration_family(), grid, cfg);
        std::vector<double> periods;
        double worst = 0.0;
        bool closed = true;
        for (const auto& r : scan.rows) {
            closed = closed && r.ok && r.closed;
            worst = std::max(worst, r.residual);
            periods.push_back(r.period);
        }
        s.record("fibration_orbit_closure", closed && worst <= 1e-6, worst, 1e-6, "periods " + join(periods));
        s.record("fibration_period_growth", closed && strictly_increasing(periods), periods.back() / periods.front(),
                 1.0);
    });
    s.guarded("polar_fiber_period", [&] {
        double worst = 0.0;
        for (double u5 : {1.0, -1.0}) {
            const Vec8 x0 = default_s7_start(u5);
            const OrbitResult o = detect_period(fibration_orbit_field(0, 1, 1.0, x0), vec8_to_state(x0), cfg);
            worst = std::max(worst, o.closed ? std::abs(o.period - kTwoPi) : std::numeric_limits<double>::infinity());
        }
        s.at_most("polar_fiber_period", worst, 1e-6);
    });
    s.guarded("hopf_family_convergence", [&] {
        const auto sample = stratified_s7({0.0, 0.4, 0.8, -0.4}, {0.8, 0.3}, 16, seed + 7);
        std::vector<double> dist;
        for (double mu : {0.6, 0.8, 0.95, 1.0}) {
            double d = 0.0;
            for (const Vec8& p : sample)
                d = std::max(d, (hopf_family_field(mu, p) - hopf_field_s7(BundleSpec::e01(), p)).lpNorm<Eigen::Infinity>());
            dist.push_back(d);
        }
        const bool ok = dist[0] > dist[1] && dist[1] > dist[2] && dist[3] == 0.0;
        s.record("hopf_family_convergence", ok, dist[2], dist[1], "sup distances " + join(dist));
    });
}

void multicentre_suite(Suite& s, std::uint64_t seed, const IntegratorConfig& cfg) {
    const MulticentreField field(1.0);
    s.guarded("origin_stationary", [&] { s.at_most("origin_stationary", field.eval(Vec8::Zero()).norm(), 0.0); });
    s.guarded("sphere_tangency", [&] {
        const auto sample = stratified_s7({0.0, 0.3, 0.6, -0.3}, {0.8, 0.3}, 20, seed);
        double worst = 0.0;
        for (double r : {0.4, 0.6, 0.8})
            for (const Vec8& z : sample) worst = std::max(worst, std::abs(field.eval(r * z).dot(r * z)));
        s.at_most("sphere_tangency", worst, 1e-10);
    });
    s.guarded("no_other_zeros", [&] {
        const auto sample = stratified_s7({0.0, 0.5, -0.5, 1.0, -1.0}, {0.8, 0.3}, 20, seed + 1);
        std::vector<double> mins;
        for (double r : {0.2, 0.5, 0.8}) {
            double m = std::numeric_limits<double>::infinity();
            for (const Vec8& z : sample) m = std::min(m, field.eval(r * z).norm());
            mins.push_back(m);
        }
        const double lowest = *std::min_element(mins.begin(), mins.end());
        s.record("no_other_zeros", lowest > 0.0, lowest, 0.0, "min |X| on shells r = 0.2 0.5 0.8: " + join(mins));
    });
    s.guarded("linearization", [&] {
        double worst = 0.0;
        for (double h : {1e-3, 1e-4, 1e-5})
            worst = std::max(worst, (field.finite_difference_jacobian_at_zero(h) - MulticentreField::linearization())
                                        .cwiseAbs()
                                        .maxCoeff());
        s.at_most("linearization", worst, 1e-6);
    });
    s.guarded("period_growth", [&] {
        constexpr double r = 0.5;
        const Vec8 x0 = r * default_s7_start(0.0);
        const OrbitResult base = detect_period(multicentre_orbit_field(x0), vec8_to_state(x0), cfg);
        s.at_most("first_integral", base.drift, 1e-9, "relative drift of |x|^2 over one period");
        if (!base.closed) {
            s.record("period_growth", false, 0.0, 10.0, "u5 = 0 orbit did not close");
            return;
        }
        IntegratorConfig far = cfg;
        far.t_max = std::min(cfg.t_max, 20.0 * base.period);
        const Vec8 x1 = r * default_s7_start(0.9);
        const OrbitResult top = detect_period(multicentre_orbit_field(x1), vec8_to_state(x1), far);
        std::ostringstream os;
        os.precision(10);
        os << "T(0) = " << base.period << ", T(0.9) " << (top.closed ? "= " : ">= ") << top.period;
        s.record("period_growth", top.period / base.period >= 10.0, top.period / base.period, 10.0, os.str());
    });
}

void dynamics_suite(Suite& s, const IntegratorConfig& cfg) {
    s.guarded("integrator_order", [&] {
        const VectorField f = rotation_field();
        const State x0 = {1.0, 0.0};
        auto error_at = [&](double rel) {
            IntegratorConfig c = cfg;
            c.project = false;
            c.rel_tol = rel;
            c.abs_tol = rel * 1e-2;
            const Trajectory tr = integrate(f, x0, kTwoPi, c);
            const State& x = tr.x.back();
            return std::hypot(x[0] - 1.0, x[1]);
        };
        std::vector<double> lt, le;
        for (double rel = 1e-6; rel > 1e-12; rel *= 0.5) {
            lt.push_back(std::log(rel));
            le.push_back(std::log(error_at(rel)));
        }
        const double factor = std::exp2(fit_slope(lt, le));
        s.record("integrator_order", factor >= 2.0, factor, 2.0,
                 "closure error reduction per tolerance halving, fitted over 20 halvings");
    });
    s.guarded("projection_unbiased", [&] {
        const VectorField f = hopf_c4_field();
        const State x0 = vec8_to_state(default_s7_start(0.3));
        IntegratorConfig a = cfg, b = cfg;
        a.project = true;
        b.project = false;
        const OrbitResult pa = detect_period(f, x0, a), pb = detect_period(f, x0, b);
        s.at_most("projection_unbiased", std::abs(pa.period - pb.period), 1e-8);
    });
    s.guarded("translation_invariance", [&] {
        const auto [f, x0] = sullivan_family().make(1.0);
        const OrbitResult o = detect_period(f, x0, cfg);
        if (!o.closed) {
            s.record("translation_invariance", false, 0.0, 1e-6, "reference orbit did not close");
            return;
        }
        const State x1 = integrate(f, x0, o.period / 3.0, cfg).x.back();
        const OrbitResult o1 = detect_period(f, x1, cfg);
        const double rel = o1.closed ? std::abs(o1.period - o.period) / o.period : 1.0;
        s.at_most("translation_invariance", rel, 1e-6);
    });
}

}  // namespace

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = {"geom", "curve", "sullivan", "bundle", "multicentre", "dynamics"};
    return names;
}

std::vector<FramePoint> random_frames(std::size_t n, std::uint64_t seed) {
    Sampler rng(seed);
    std::vector<FramePoint> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 x = rng.unit3();
        const Vec3 y = (rng.unit3().cross(x)).normalized();
        out.push_back(frame_with_angle(x, y, rng.uniform(0.0, kTwoPi)));
    }
    return out;
}

std::vector<Vec8> stratified_s7(const std::vector<double>& u5_levels, const std::vector<double>& z1sq_levels,
                                std::size_t per_level, std::uint64_t seed) {
    Sampler rng(seed);
    std::vector<Vec8> out;
    const BundleSpec spec = BundleSpec::e01();
    for (double u5 : u5_levels) {
        if (!(std::abs(u5) <= 1.0)) throw DomainError("stratified_s7: u5 level outside [-1, 1]");
        for (double s : z1sq_levels) {
            if (!(s >= 0.0 && s <= 1.0)) throw DomainError("stratified_s7: |z1|^2 level outside [0, 1]");
            for (std::size_t k = 0; k < per_level; ++k) {
                const double p1 = rng.uniform(0.0, kTwoPi), p2 = rng.uniform(0.0, kTwoPi);
                const Quaternion theta = Quaternion::from_complex(std::polar(std::sqrt(s), p1),
                                                                  std::polar(std::sqrt(1.0 - s), p2));
                const Quaternion w = rng.unit4();
                if (u5 >= 0.0)
                    out.push_back(chart_to_s7(spec, {Chart::North, std::sqrt((1.0 - u5) / (1.0 + u5)) * theta, w}));
                else
                    out.push_back(chart_to_s7(spec, {Chart::South, std::sqrt((1.0 + u5) / (1.0 - u5)) * theta, w}));
            }
        }
    }
    return out;
}

std::vector<CheckResult> run_verification(const VerifyOptions& opts) {
    opts.integrator.validate();
    for (const auto& name : opts.only)
        if (std::find(suite_names().begin(), suite_names().end(), name) == suite_names().end())
            throw DomainError("unknown verification suite: " + name);
    auto selected = [&](const std::string& name) {
        return opts.only.empty() || std::find(opts.only.begin(), opts.only.end(), name) != opts.only.end();
    };
    std::vector<CheckResult> out;
    if (selected("geom")) {
        Suite s{"geom", out};
        geom_suite(s, opts.seed);
    }
    if (selected("curve")) {
        Suite s{"curve", out};
        curve_suite(s, opts.seed + 100);
    }
    if (selected("sullivan")) {
        Suite s{"sullivan", out};
        sullivan_suite(s, opts.seed + 200, opts.integrator);
    }
    if (selected("bundle")) {
        Suite s{"bundle", out};
        bundle_suite(s, opts.seed + 300, opts.fault, opts.integrator);
    }
    if (selected("multicentre")) {
        Suite s{"multicentre", out};
        multicentre_suite(s, opts.seed + 400, opts.integrator);
    }
    if (selected("dynamics")) {
        Suite s{"dynamics", out};
        dynamics_suite(s, opts.integrator);
    }
    return out;
}

}  // namespace milnorflow
