#include "milnorflow/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <boost/numeric/odeint.hpp>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <exception>
#include <memory>
#include <mutex>
#include <thread>

#include "milnorflow/errors.hpp"
#include "milnorflow/milnor_bundle.hpp"
#include "milnorflow/multicentre.hpp"
#include "milnorflow/sullivan_field.hpp"

namespace milnorflow {

namespace odeint = boost::numeric::odeint;

namespace {

using Rk78 = odeint::runge_kutta_fehlberg78<State>;

double norm(const State& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

double dist(const State& a, const State& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

double dot(const State& a, const State& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void normalize(State& x, std::size_t begin, std::size_t end) {
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += x[i] * x[i];
    s = std::sqrt(s);
    for (std::size_t i = begin; i < end; ++i) x[i] /= s;
}

class Sampler {
public:
    explicit Sampler(std::size_t cap) : cap_(std::max<std::size_t>(cap, 2)) {}
    void offer(double t, const State& x) {
        if (count_++ % stride_ != 0) return;
        out_.t.push_back(t);
        out_.x.push_back(x);
        if (out_.t.size() >= cap_) {
            std::size_t k = 0;
            for (std::size_t i = 0; i < out_.t.size(); i += 2, ++k) {
                out_.t[k] = out_.t[i];
                out_.x[k] = std::move(out_.x[i]);
            }
            out_.t.resize(k);
            out_.x.resize(k);
            stride_ *= 2;
        }
    }
    Trajectory take() { return std::move(out_); }

private:
    std::size_t cap_;
    std::size_t stride_ = 1;
    std::size_t count_ = 0;
    Trajectory out_;
};

// Drives the controlled stepper; on_step(t0, x0, t1, x1) returns true to stop.
template <class OnStep>
void run(const VectorField& f, State x, double t_end, const IntegratorConfig& cfg, Trajectory& traj,
         OnStep&& on_step) {
    auto sys = [&f](const State& s, State& d, double) { f.rhs(s, d); };
    Rk78 rk;
    auto ctrl = cfg.max_step > 0.0 ? odeint::make_controlled(cfg.abs_tol, cfg.rel_tol, cfg.max_step, rk)
                                   : odeint::make_controlled(cfg.abs_tol, cfg.rel_tol, rk);
    double t = 0.0;
    double dt = cfg.initial_step;
    if (cfg.max_step > 0.0) dt = std::min(dt, cfg.max_step);
    State prev = x;
    while (t < t_end) {
        dt = std::min(dt, t_end - t);
        const double t0 = t;
        prev = x;
        if (ctrl.try_step(sys, x, t, dt) == odeint::success) {
            ++traj.steps;
            if (cfg.project && f.project) f.project(x);
            if (on_step(t0, prev, t, x)) return;
        } else {
            ++traj.rejected;
            if (dt < 1e-14 * std::max(1.0, std::abs(t)))
                throw StiffnessError("step size underflow in " + f.name + " at t = " + std::to_string(t), t);
        }
    }
}

// arg z1 of the base direction theta; it advances by 2 pi over one period.
double base_phase(const BundleSpec& spec, const Vec8& p) {
    const ChartPoint c = s7_to_chart(spec, p / p.norm());
    return std::arg(c.base.z1());
}

}  // namespace

void IntegratorConfig::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw DomainError("integrator tolerances must be positive");
    if (!(t_max > 0.0)) throw DomainError("integrator T_max must be positive");
    if (!(closure_eps > 0.0) || !(direction_tol > 0.0) || !(phase_tol > 0.0)) throw DomainError("closure gates must be positive");
    if (!(initial_step > 0.0)) throw DomainError("initial step must be positive");
}

Trajectory integrate(const VectorField& f, const State& x0, double t_end, const IntegratorConfig& cfg) {
    cfg.validate();
    if (x0.size() != f.dim) throw DomainError("integrate: state dimension does not match the field");
    Sampler sampler(cfg.max_samples);
    sampler.offer(0.0, x0);
    Trajectory traj;
    State last = x0;
    double t_last = 0.0;
    run(f, x0, t_end, cfg, traj, [&](double, const State&, double t, const State& x) {
        sampler.offer(t, x);
        last = x;
        t_last = t;
        return false;
    });
    Trajectory out = sampler.take();
    if (out.t.back() != t_last) {
        out.t.push_back(t_last);
        out.x.push_back(last);
    }
    out.steps = traj.steps;
    out.rejected = traj.rejected;
    return out;
}

OrbitResult detect_period(const VectorField& f, const State& x0, const IntegratorConfig& cfg) {
    cfg.validate();
    if (x0.size() != f.dim) throw DomainError("detect_period: state dimension does not match the field");
    const auto wall0 = std::chrono::steady_clock::now();
    State f0(f.dim);
    f.rhs(x0, f0);
    const double speed0 = norm(f0);
    if (speed0 < 1e-14) throw StationaryPoint("detect_period: initial velocity below 1e-14");
    State n = f0;
    for (double& v : n) v /= speed0;

    const double scale = std::max(norm(x0), std::numeric_limits<double>::min());
    const double eps = cfg.closure_eps * scale;
    const double inv0 = f.invariant ? f.invariant(x0) : 0.0;
    const double inv_scale = std::max(std::abs(inv0), std::numeric_limits<double>::min());

    auto sys = [&f](const State& s, State& d, double) { f.rhs(s, d); };
    auto g = [&](const State& x) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += n[i] * (x[i] - x0[i]);
        return s;
    };

    constexpr double kTwoPi = 2.0 * M_PI;
    double phase_prev = f.phase ? f.phase(x0) : 0.0;
    double advance = 0.0;
    auto unwrap = [&](double from, double to) { return std::remainder(to - from, kTwoPi); };

    OrbitResult res;
    res.residual = std::numeric_limits<double>::infinity();
    Sampler sampler(cfg.max_samples);
    sampler.offer(0.0, x0);
    Trajectory traj;
    Rk78 rk;
    State xs(f.dim), fs(f.dim);

    run(f, x0, cfg.t_max, cfg, traj, [&](double t0, const State& xa, double t1, const State& xb) {
        sampler.offer(t1, xb);
        if (f.invariant) res.drift = std::max(res.drift, std::abs(f.invariant(xb) - inv0) / inv_scale);
        const double advance_a = advance;
        const double phase_a = phase_prev;
        if (f.phase) {
            const double ph = f.phase(xb);
            advance += unwrap(phase_prev, ph);
            phase_prev = ph;
        }
        const double ga = g(xa), gb = g(xb);
        if (!(ga < 0.0 && gb >= 0.0)) return false;
        if (dist(xa, x0) > dist(xa, xb) + 1e-3 * scale) return false;

        // Newton on tau in (0, t1 - t0] for g(phi_tau(xa)) = 0, one RKF78 step from xa.
        const double h = t1 - t0;
        double tau = h * ga / (ga - gb);
        for (int it = 0; it < 30; ++it) {
            rk.do_step(sys, xa, t0, xs, tau);
            f.rhs(xs, fs);
            const double gv = g(xs), dg = dot(n, fs);
            if (dg == 0.0) break;
            const double step = gv / dg;
            tau = std::clamp(tau - step, 0.0, h);
            if (std::abs(step) <= 1e-15 * std::max(1.0, t1)) break;
        }
        rk.do_step(sys, xa, t0, xs, tau);
        if (cfg.project && f.project) f.project(xs);
        f.rhs(xs, fs);
        const double r = dist(xs, x0);
        const double c = std::clamp(dot(fs, f0) / (norm(fs) * speed0), -1.0, 1.0);
        const double ang = std::acos(c);
        if (r < res.residual) {
            res.residual = r;
            res.direction_error = ang;
        }
        bool phase_ok = true;
        double adv = 0.0;
        if (f.phase) {
            adv = advance_a + unwrap(phase_a, f.phase(xs));
            const double k = std::round(adv / kTwoPi);
            phase_ok = k >= 1.0 && std::abs(adv - kTwoPi * k) <= cfg.phase_tol;
        }
        if (r <= eps && ang <= cfg.direction_tol && phase_ok) {
            res.closed = true;
            res.period = t0 + tau;
            res.residual = r;
            res.direction_error = ang;
            res.phase_advance = adv;
            return true;
        }
        return false;
    });
    if (!res.closed) {
        res.period = cfg.t_max;
        res.phase_advance = advance;
    }
    res.trajectory = sampler.take();
    res.steps = traj.steps;
    res.trajectory.steps = traj.steps;
    res.trajectory.rejected = traj.rejected;
    res.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    return res;
}

unsigned worker_count() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("MILNORFLOW_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap > 0) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    }
    return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr first;
    std::mutex m;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(m);
                    if (!first) first = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first) std::rethrow_exception(first);
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = std::min(x.size(), y.size());
    if (n < 2) return 0.0;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
}

PeriodScan period_scan(const FieldFamily& family, const std::vector<double>& grid, const IntegratorConfig& cfg) {
    if (grid.empty()) throw DomainError("period_scan: empty grid");
    const bool inc = grid.size() < 2 || grid[1] > grid[0];
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (inc ? !(grid[i] > grid[i - 1]) : !(grid[i] < grid[i - 1]))
            throw DomainError("period_scan: grid must be strictly monotone");
    }
    PeriodScan scan;
    scan.family = family.name;
    scan.grid = grid;
    scan.rows.resize(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        ScanRow& row = scan.rows[i];
        row.param = grid[i];
        try {
            const auto [field, x0] = family.make(grid[i]);
            const OrbitResult o = detect_period(field, x0, cfg);
            row.closed = o.closed;
            row.period = o.period;
            row.residual = o.residual;
            row.steps = o.steps;
            row.wall_time_s = o.wall_time_s;
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
    });
    std::vector<double> xs, ys;
    const ScanRow* last = nullptr;
    for (std::size_t i = 0; i < scan.rows.size(); ++i) {
        const ScanRow& r = scan.rows[i];
        if (!r.ok) continue;
        xs.push_back(r.param);
        ys.push_back(std::log(r.period));
        if (last && !(r.period > last->period)) scan.monotonicity_violations.push_back(i);
        last = &r;
    }
    scan.log_period_slope = fit_slope(xs, ys);
    return scan;
}

VectorField rotation_field() {
    VectorField f;
    f.name = "rotation";
    f.dim = 2;
    f.rhs = [](const State& x, State& d) {
        d[0] = -x[1];
        d[1] = x[0];
    };
    f.invariant = [](const State& x) { return x[0] * x[0] + x[1] * x[1]; };
    return f;
}

VectorField linear_field(const Eigen::Matrix<double, 8, 8>& a) {
    VectorField f;
    f.name = "linear";
    f.dim = 8;
    f.rhs = [a](const State& x, State& d) {
        const Eigen::Map<const Vec8> xv(x.data());
        Eigen::Map<Vec8>(d.data()) = a * xv;
    };
    return f;
}

VectorField hopf_c4_field() {
    VectorField f;
    f.name = "hopf";
    f.dim = 8;
    f.rhs = [](const State& x, State& d) {
        // Linear extension z -> i z, so that off-sphere stage states are accepted.
        for (int k = 0; k < 4; ++k) {
            d[2 * k] = -x[2 * k + 1];
            d[2 * k + 1] = x[2 * k];
        }
    };
    f.project = [](State& x) { normalize(x, 0, 8); };
    f.invariant = [](const State& x) { return dot(x, x); };
    return f;
}

VectorField sullivan_m_field(double lambda) {
    auto field = std::make_shared<SullivanField>(lambda);
    VectorField f;
    f.name = "sullivan";
    f.dim = 9;
    f.rhs = [field](const State& x, State& d) {
        const FrameVelocity v = field->eval(state_to_frame(x));
        for (int i = 0; i < 3; ++i) {
            d[i] = v.x[i];
            d[3 + i] = v.y[i];
            d[6 + i] = v.w[i];
        }
    };
    if (field->curve()) f.phase = [](const State& x) { return fiber_angle(state_to_frame(x)); };
    f.project = [](State& s) {
        normalize(s, 0, 3);
        for (std::size_t off : {3u, 6u}) {
            double c = 0.0;
            for (int i = 0; i < 3; ++i) c += s[i] * s[off + i];
            for (int i = 0; i < 3; ++i) s[off + i] -= c * s[i];
            normalize(s, off, off + 3);
        }
    };
    return f;
}

VectorField fibration_s7_field(int h, int j, double scale) {
    const BundleSpec spec{h, j};
    spec.validate();
    VectorField f;
    f.name = "fibration";
    f.dim = 8;
    f.rhs = [spec, scale](const State& x, State& d) {
        // Degree-one extension off the sphere: RK stage states are not unit vectors.
        const Vec8 p = state_to_vec8(x);
        const double n = p.norm();
        const Vec8 v = n * fibration_field_s7(spec, p / n, scale);
        std::copy(v.data(), v.data() + 8, d.begin());
    };
    f.project = [](State& x) { normalize(x, 0, 8); };
    f.invariant = [](const State& x) { return dot(x, x); };
    return f;
}

VectorField fibration_orbit_field(int h, int j, double scale, const Vec8& x0) {
    const BundleSpec spec{h, j};
    spec.validate();
    const double lam = effective_lambda_s7(spec, x0.normalized(), scale);
    VectorField f;
    f.name = "fibration";
    f.dim = 8;
    if (lam < kLambdaFlat) f.phase = [spec](const State& x) { return base_phase(spec, state_to_vec8(x)); };
    f.rhs = [spec, lam](const State& x, State& d) {
        const Vec8 p = state_to_vec8(x);
        const double n = p.norm();
        const Vec8 v = n * fibration_field_s7_with(spec, p / n, lam);
        std::copy(v.data(), v.data() + 8, d.begin());
    };
    f.project = [](State& x) { normalize(x, 0, 8); };
    f.invariant = [](const State& x) { return dot(x, x); };
    return f;
}

VectorField multicentre_r8_field(double r_max) {
    auto field = std::make_shared<MulticentreField>(r_max);
    VectorField f;
    f.name = "multicentre";
    f.dim = 8;
    f.rhs = [field](const State& x, State& d) {
        const Vec8 v = field->eval(state_to_vec8(x));
        std::copy(v.data(), v.data() + 8, d.begin());
    };
    f.invariant = [](const State& x) { return dot(x, x); };
    return f;
}

VectorField multicentre_orbit_field(const Vec8& x0, double r_max) {
    const double r0 = x0.norm();
    if (!(r0 > 0.0 && r0 < r_max)) throw DomainError("multicentre orbit start must satisfy 0 < |x0| < r_max");
    const double lam = effective_lambda_s7(BundleSpec::e01(), x0 / r0, 1.0 / r0);
    VectorField f;
    f.name = "multicentre";
    f.dim = 8;
    if (lam < kLambdaFlat) f.phase = [](const State& x) { return base_phase(BundleSpec::e01(), state_to_vec8(x)); };
    f.rhs = [lam](const State& x, State& d) {
        const Vec8 p = state_to_vec8(x);
        const double r = p.norm();
        const Vec8 v = r * fibration_field_s7_with(BundleSpec::e01(), p / r, lam);
        std::copy(v.data(), v.data() + 8, d.begin());
    };
    f.invariant = [](const State& x) { return dot(x, x); };
    return f;
}

State frame_to_state(const FramePoint& p) {
    return {p.x[0], p.x[1], p.x[2], p.y[0], p.y[1], p.y[2], p.w[0], p.w[1], p.w[2]};
}

FramePoint state_to_frame(const State& s) {
    return {Vec3(s[0], s[1], s[2]), Vec3(s[3], s[4], s[5]), Vec3(s[6], s[7], s[8]), std::nullopt};
}

State vec8_to_state(const Vec8& v) { return State(v.data(), v.data() + 8); }

Vec8 state_to_vec8(const State& s) { return Eigen::Map<const Vec8>(s.data()); }

FramePoint default_frame_start() {
    return frame_with_angle(Vec3(0.36, -0.48, 0.8), Vec3(0.8, 0.6, 0.0), 1.0);
}

Vec8 default_s7_start(double u5, double z1sq) {
    if (!(u5 >= -1.0 && u5 <= 1.0)) throw DomainError("default_s7_start requires |u5| <= 1");
    if (!(z1sq >= 0.0 && z1sq <= 1.0)) throw DomainError("default_s7_start requires z1sq in [0, 1]");
    const double a = std::sqrt(z1sq), b = std::sqrt(1.0 - z1sq);
    const Quaternion theta(a * std::cos(0.3), a * std::sin(0.3), b * std::cos(1.1), b * std::sin(1.1));
    const Quaternion w = Quaternion(0.5, 0.1, -0.7, 0.3).normalized();
    const BundleSpec spec = BundleSpec::e01();
    if (u5 >= 0.0) {
        const double r = std::sqrt((1.0 - u5) / (1.0 + u5));
        return chart_to_s7(spec, {Chart::North, r * theta, w});
    }
    const double rho = std::sqrt((1.0 + u5) / (1.0 - u5));
    return chart_to_s7(spec, {Chart::South, rho * theta, w});
}

FieldFamily sullivan_family() {
    return {"sullivan", [](double lambda) {
                return std::make_pair(sullivan_m_field(lambda), frame_to_state(default_frame_start()));
            }};
}

FieldFamily fibration_family() {
    return {"fibration", [](double u5) {
                const Vec8 x0 = default_s7_start(u5);
                return std::make_pair(fibration_orbit_field(0, 1, 1.0, x0), vec8_to_state(x0));
            }};
}

FieldFamily multicentre_family(double r) {
    return {"multicentre", [r](double u5) {
                const Vec8 x0 = r * default_s7_start(u5);
                return std::make_pair(multicentre_orbit_field(x0), vec8_to_state(x0));
            }};
}

FieldFamily hopf_family() {
    return {"hopf", [](double u5) { return std::make_pair(hopf_c4_field(), vec8_to_state(default_s7_start(u5))); }};
}

}  // namespace milnorflow
