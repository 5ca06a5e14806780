#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "milnorflow/geom_core.hpp"

namespace milnorflow {

using State = std::vector<double>;

/** @brief Autonomous vector field on R^n with optional constraint projection and first integral. */
struct VectorField {
    std::string name;
    std::size_t dim = 0;
    std::function<void(const State&, State&)> rhs;
    std::function<void(State&)> project;
    std::function<double(const State&)> invariant;
    /**
     * @brief Optional slow angle, strictly monotone along orbits. When set, a
     * return counts as closure only if its unwrapped advance is a positive
     * multiple of 2 pi.
     */
    std::function<double(const State&)> phase;
};

struct IntegratorConfig {
    double rel_tol = 1e-12;
    double abs_tol = 1e-14;
    /** @brief Largest accepted step; 0 means unlimited. */
    double max_step = 0.0;
    double initial_step = 1e-2;
    bool project = true;
    double t_max = 1e6;
    /** @brief Closure ball radius relative to |x0|. */
    double closure_eps = 1e-8;
    /** @brief Velocity direction gate, radians. */
    double direction_tol = 1e-4;
    /** @brief Tolerance on the phase advance at closure, radians. */
    double phase_tol = 1e-6;
    /** @brief Keep at most this many trajectory samples (decimated uniformly in steps). */
    std::size_t max_samples = 4096;

    void validate() const;
};

struct Trajectory {
    std::vector<double> t;
    std::vector<State> x;
    std::size_t steps = 0;
    std::size_t rejected = 0;
};

/** @brief Integrates from x0 over [0, t_end] with RKF7(8) and per-step projection. */
Trajectory integrate(const VectorField& f, const State& x0, double t_end, const IntegratorConfig& cfg);

struct OrbitResult {
    Trajectory trajectory;
    bool closed = false;
    /** @brief Period when closed, otherwise the lower bound T_max. */
    double period = 0.0;
    /** @brief |x(T) - x0| at the best section return. */
    double residual = 0.0;
    double direction_error = 0.0;
    /** @brief Unwrapped advance of the field's phase up to the period (or T_max). */
    double phase_advance = 0.0;
    /** @brief Max relative change of the field's first integral; 0 if it has none. */
    double drift = 0.0;
    std::size_t steps = 0;
    double wall_time_s = 0.0;
};

/**
 * @brief Period of the orbit through x0.
 *
 * Returns the first upward crossing of the hyperplane through x0 normal to
 * f(x0) that lands within closure_eps * |x0| of x0 with velocity direction
 * within direction_tol of f(x0).
 */
OrbitResult detect_period(const VectorField& f, const State& x0, const IntegratorConfig& cfg);

/** @brief A field family indexed by one real parameter, with its start point. */
struct FieldFamily {
    std::string name;
    std::function<std::pair<VectorField, State>(double)> make;
};

struct ScanRow {
    double param = 0.0;
    bool ok = true;
    std::string error;
    bool closed = false;
    double period = 0.0;
    double residual = 0.0;
    std::size_t steps = 0;
    double wall_time_s = 0.0;
};

struct PeriodScan {
    std::string family;
    std::vector<double> grid;
    std::vector<ScanRow> rows;
    /** @brief Least-squares slope of log(period) against the parameter. */
    double log_period_slope = 0.0;
    /** @brief Indices i with period[i] <= period[i-1]. */
    std::vector<std::size_t> monotonicity_violations;
};

/** @brief Worker count: hardware concurrency capped by MILNORFLOW_THREADS. */
unsigned worker_count();

/** @brief Runs fn(i) for i in [0, n) over worker_count() threads. */
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

/** @brief detect_period per grid point; grid must be strictly monotone. */
PeriodScan period_scan(const FieldFamily& family, const std::vector<double>& grid, const IntegratorConfig& cfg);

/** @brief Least-squares slope of y against x. */
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

// Fields used by the scans and the verification suites.
VectorField rotation_field();
VectorField linear_field(const Eigen::Matrix<double, 8, 8>& a);
VectorField hopf_c4_field();
VectorField sullivan_m_field(double lambda);
VectorField fibration_s7_field(int h, int j, double scale);
VectorField multicentre_r8_field(double r_max = 1.0);

/**
 * @brief Orbit fields: the effective Sullivan parameter is fixed at its value
 * on the invariant level set through x0 (u5, |x| and |z1(theta)|^2 are first
 * integrals). They agree with the fields above on that level set and avoid a
 * curve rebuild at every off-level Runge-Kutta stage.
 */
VectorField fibration_orbit_field(int h, int j, double scale, const Vec8& x0);
VectorField multicentre_orbit_field(const Vec8& x0, double r_max = 1.0);

State frame_to_state(const FramePoint& p);
FramePoint state_to_frame(const State& s);
State vec8_to_state(const Vec8& v);
Vec8 state_to_vec8(const State& s);

/** @brief Fixed generic start point on M. */
FramePoint default_frame_start();

/** @brief Point of S^7 (E_{0,1} identification) with given u5; the base direction has |z1|^2 = z1sq. */
Vec8 default_s7_start(double u5, double z1sq = 0.8);

FieldFamily sullivan_family();
FieldFamily fibration_family();
FieldFamily multicentre_family(double r);
/** @brief H_{0,1} from default_s7_start(u5); every period is 2 pi. */
FieldFamily hopf_family();

}  // namespace milnorflow
