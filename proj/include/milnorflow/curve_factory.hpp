#pragma once

#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "milnorflow/geom_core.hpp"
#include "milnorflow/jet.hpp"

namespace milnorflow {

/** @brief Lower and upper end of the supported lambda range for real curves. */
inline constexpr double kLambdaMin = 0.5;
inline constexpr double kLambdaMax = 6.0;

/** @brief Parameters h, g and a = g h of the trochoid family. */
struct TrochoidParams {
    double lambda = 1.0;
    double h = 0.0;
    double g = 0.0;
    double a = 0.0;

    /** @brief h = g = exp(-lambda), a = g h. */
    static TrochoidParams defaults(double lambda);
    static TrochoidParams make(double lambda, double h, double g);

    /** @brief Throws DomainError unless 0 < a < h and 0 < g < 1. */
    void validate() const;
};

struct PolarPoint {
    double rho;
    double theta;  ///< lifted (not reduced mod 2 pi)
};

template <int N>
struct PolarJet {
    Jet<N> rho, theta;
};

/** @brief Reduce an angle to [0, 2 pi). */
double wrap_angle(double theta);

/**
 * @brief rho = 1 + a - h cos(t + pi/2), theta = a t - h sin(t + pi/2).
 *
 * Throws DomainError for t outside [0, 3 pi / a].
 */
PolarPoint trochoid_point(const TrochoidParams& p, double t);

template <int N>
PolarJet<N> trochoid_jet(const TrochoidParams& p, const Jet<N>& t) {
    Jet<N> s, c;
    sincos(t, s, c);
    return {1.0 + p.a + p.h * s, p.a * t - p.h * c};
}

struct CurvatureValue {
    double k;
    double inv_k;
};

/** @brief Closed-form curvature of the trochoid in the (theta, rho) plane. */
CurvatureValue trochoid_curvature(const TrochoidParams& p, double t);

/** @brief Curvature of z = rho e^{i theta} from the Cartesian formula. */
double polar_curve_curvature(const PolarJet<2>& z);

/** @brief Same curvature through k = k_tr xi + chi. */
double polar_curve_curvature_split(const PolarJet<2>& z, double k_tr);

double plane_curvature(const TrochoidParams& p, double t);
double plane_curvature_split(const TrochoidParams& p, double t);

/** @brief Data of the closing deformation. */
struct ClosingData {
    long long loops = 0;       ///< K, number of epicycle periods
    double t_close = 0.0;      ///< 2 pi K
    double epsilon = 0.0;      ///< angular overshoot theta(t_close) - theta(0) - 2 pi
    double flow_shift = 0.0;   ///< e tau0 / (pi/2), shift of the normalized flow coordinate
    double tau0 = 0.0;
    double delta_theta = 0.0;  ///< signed corner angle, end tangent to start tangent
};

/**
 * @brief Curve in polar coordinates, optionally closed by the angular flow.
 */
class PlaneCurve {
public:
    PlaneCurve(TrochoidParams p, double t_end);

    const TrochoidParams& params() const { return p_; }
    double t_end() const { return t_end_; }
    bool closed() const { return closing_.has_value(); }
    const std::optional<ClosingData>& closing() const { return closing_; }

    template <int N>
    PolarJet<N> eval(const Jet<N>& t) const;

    PolarPoint point(double t) const;
    /** @brief Cartesian position and velocity (x, y, xdot, ydot). */
    std::array<double, 4> cartesian(double t) const;

    /** @brief Angle map of the closing flow, identity when open. */
    template <int N>
    Jet<N> closing_map(const Jet<N>& theta) const;

private:
    friend PlaneCurve close_curve(const PlaneCurve& c, const TrochoidParams& p);
    TrochoidParams p_;
    double t_end_;
    std::optional<ClosingData> closing_;
};

/** @brief Smooth bump helpers shared by the smoothing stages. */
double smooth_step(double u);
template <int N>
Jet<N> smooth_step(const Jet<N>& u);

/** @brief beta(theta) of the closing flow; support [3 pi/2, 5 pi/2]. */
double closing_beta(double theta);
/** @brief alpha(rho): 1 on [1+a-1.5h, 1+a+1.5h], support [1+a-2h, 1+a+2h]. */
double closing_alpha(const TrochoidParams& p, double rho);

/**
 * @brief First matching crossing of rho = 1 + a after angle 2 pi, closed by
 * the time-tau0 flow of -alpha(rho) beta(theta) d/dtheta.
 */
PlaneCurve close_curve(const PlaneCurve& c, const TrochoidParams& p);

/** @brief Inverse south-pole stereographic projection and its inverse. */
Vec3 stereo_lift(double X, double Y);
std::pair<double, double> stereo_chart(const Vec3& p);

template <int N>
JVec3<N> stereo_lift(const Jet<N>& X, const Jet<N>& Y) {
    Jet<N> r2 = X * X + Y * Y;
    Jet<N> inv = 1.0 / (1.0 + r2);
    return {2.0 * X * inv, 2.0 * Y * inv, (1.0 - r2) * inv};
}

/** @brief A parametrized curve on S^2 with jet evaluation. */
class SphereCurve {
public:
    virtual ~SphereCurve() = default;
    /** @brief Parameter length of one traversal. */
    virtual double period() const = 0;
    virtual JVec3<1> eval(const Jet<1>& t) const = 0;
    virtual JVec3<2> eval(const Jet<2>& t) const = 0;
    virtual JVec3<4> eval(const Jet<4>& t) const = 0;

    Vec3 point(double t) const;
    /** @brief Derivatives d^k gamma / dt^k for k = 0..4. */
    std::array<Vec3, 5> derivatives(double t) const;
};

/** @brief Forwarding of the virtual jet evaluators to a template eval_t. */
template <class D>
class SphereCurveImpl : public SphereCurve {
public:
    JVec3<1> eval(const Jet<1>& t) const final { return static_cast<const D*>(this)->eval_t(t); }
    JVec3<2> eval(const Jet<2>& t) const final { return static_cast<const D*>(this)->eval_t(t); }
    JVec3<4> eval(const Jet<4>& t) const final { return static_cast<const D*>(this)->eval_t(t); }
};

/** @brief Circle of colatitude c, traversed once per period. */
class LatitudeCircle : public SphereCurveImpl<LatitudeCircle> {
public:
    LatitudeCircle(double colatitude, double period = 2.0 * M_PI)
        : c_(colatitude), period_(period) {}
    double period() const override { return period_; }
    template <int N>
    JVec3<N> eval_t(const Jet<N>& t) const {
        Jet<N> s, c;
        sincos(t * (2.0 * M_PI / period_), s, c);
        return {std::sin(c_) * c, std::sin(c_) * s, Jet<N>(std::cos(c_))};
    }

private:
    double c_, period_;
};

/** @brief Stereographic lift of a closed plane curve (corner at t = 0). */
class LiftedCurve : public SphereCurveImpl<LiftedCurve> {
public:
    explicit LiftedCurve(PlaneCurve c) : c_(std::move(c)) {}
    double period() const override { return c_.t_end(); }
    const PlaneCurve& plane() const { return c_; }
    template <int N>
    JVec3<N> eval_t(const Jet<N>& t) const {
        PolarJet<N> z = c_.eval(t);
        Jet<N> s, c;
        sincos(z.theta, s, c);
        return stereo_lift<N>(z.rho * c, z.rho * s);
    }

private:
    PlaneCurve c_;
};

LiftedCurve lift_to_sphere(const PlaneCurve& c);

/** @brief Signed angle from the end tangent to the start tangent about gamma(0). */
double seam_tangent_angle(const SphereCurve& c);

/** @brief Kuiper rotation R(t) gamma(t), angle delta(2 pi t / T) * dtheta about gamma(0). */
class KuiperCurve : public SphereCurveImpl<KuiperCurve> {
public:
    KuiperCurve(std::shared_ptr<const SphereCurve> in, double dtheta);
    double period() const override { return in_->period(); }
    double delta_theta() const { return dtheta_; }
    const Vec3& axis() const { return axis_; }
    /** @brief Interval of t where the rotation angle varies. */
    std::pair<double, double> transition() const;
    template <int N>
    JVec3<N> eval_t(const Jet<N>& t) const;

private:
    std::shared_ptr<const SphereCurve> in_;
    double dtheta_;
    Vec3 axis_;
};

/** @brief delta: 0 on [0, pi], 1 on [3 pi/2, 2 pi], smooth monotone between. */
double kuiper_delta(double that);

KuiperCurve kuiper_smooth(std::shared_ptr<const SphereCurve> corner, double dtheta);

/** @brief Blend of the two one-sided branches over |t - seam| < w. */
class SeamBlendCurve : public SphereCurveImpl<SeamBlendCurve> {
public:
    SeamBlendCurve(std::shared_ptr<const SphereCurve> in, double half_width);
    double period() const override { return in_->period(); }
    double half_width() const { return w_; }
    template <int N>
    JVec3<N> eval_t(const Jet<N>& t) const;

private:
    std::shared_ptr<const SphereCurve> in_;
    double w_;
};

/**
 * @brief Smooth the seam in a window of half-width w. Throws ConstructionError
 * if the window meets one of the given feature intervals.
 */
SeamBlendCurve corner_smooth(std::shared_ptr<const SphereCurve> c1, double half_width,
                             const std::vector<std::pair<double, double>>& features = {});

/** @brief Intrinsic geodesic curvature gdd . (g x gd) / |gd|^3. */
double geodesic_curvature(const JVec3<2>& g);
double geodesic_curvature(const SphereCurve& c, double t);

/** @brief Geodesic curvature from Christoffel symbols in the stereographic chart. */
double geodesic_curvature_christoffel(const JVec3<2>& g);
double geodesic_curvature_christoffel(const SphereCurve& c, double t);

/** @brief Arc-length table of one loop [t0, t0 + span]. */
class LoopTable {
public:
    LoopTable() = default;
    LoopTable(const SphereCurve& c, double t0, double span);
    double length() const { return cum_.back(); }
    double t0() const { return t0_; }
    /** @brief Arc length from t0 to t0 + u. */
    double s_of_u(const SphereCurve& c, double u) const;
    /** @brief Inverse of s_of_u. */
    double u_of_s(const SphereCurve& c, double s) const;

    int panels() const { return panels_; }

    /** @brief Panels are doubled from kMinPanels until the total changes by at most kRelTol. */
    static constexpr int kMinPanels = 2;
    static constexpr int kMaxPanels = 1024;
    static constexpr double kRelTol = 1e-13;
    static constexpr int kNodes = 16;

private:
    double panel_integral(const SphereCurve& c, double a, double b) const;
    double t0_ = 0.0, span_ = 0.0;
    int panels_ = 0;
    std::vector<double> cum_;
};

struct CurvatureDiagnostics {
    double max_inv_kg;
    double min_abs_kg;
    double t_at_max;
};

/**
 * @brief The closed smooth curve Gamma_lambda with arc-length services.
 *
 * Loops that are isometric copies of the undeformed trochoid loop share
 * one arc-length table.
 */
class SmoothClosedSphereCurve : public SphereCurveImpl<SmoothClosedSphereCurve> {
public:
    /** @brief Full construction (closing, lift, Kuiper rotation, seam blend). */
    static std::shared_ptr<const SmoothClosedSphereCurve> build(const TrochoidParams& p);
    /** @brief Exactly periodic trochoid with a = 1/n (no closing step). */
    static std::shared_ptr<const SmoothClosedSphereCurve> build_periodic(const TrochoidParams& p);

    const TrochoidParams& params() const { return p_; }
    bool periodic_surrogate() const { return surrogate_; }
    double period() const override { return period_; }
    double loops() const { return loops_; }
    double length() const { return length_; }
    double delta_theta() const { return closing_ ? closing_->delta_theta : 0.0; }
    const std::optional<ClosingData>& closing() const { return closing_; }
    double window_half_width() const { return window_; }

    template <int N>
    JVec3<N> eval_t(const Jet<N>& t) const;

    /** @brief Evaluation without reducing t modulo the period. */
    template <int N>
    JVec3<N> eval_raw(const Jet<N>& t) const;

    double geodesic_curvature(double t) const;
    double s_of_t(double t) const;
    double t_of_s(double s) const;

    struct Frame {
        Vec3 x, y;
        double kg;
    };
    /** @brief Point, unit tangent and k_g at arc length phase * l, phase in [0, 1). */
    Frame frame_at_phase(double phase) const;
    double sigma_at_phase(double phase) const;

    /** @brief Integral of k_g ds over one traversal. */
    double integral_kg_ds() const;

    CurvatureDiagnostics diagnostics(int samples_per_loop = 96) const;

    std::shared_ptr<const LiftedCurve> lifted_stage() const { return lifted_; }
    std::shared_ptr<const KuiperCurve> kuiper_stage() const { return kuiper_; }
    std::shared_ptr<const SeamBlendCurve> blend_stage() const { return blend_; }
    const PlaneCurve& plane_stage() const { return lifted_->plane(); }

    /** @brief Loop indices [first, last) sharing the reference table. */
    std::pair<long long, long long> plain_loops() const { return {plain_begin_, plain_end_}; }

private:
    SmoothClosedSphereCurve() = default;
    void build_tables();
    /** @brief Throws ConstructionError if k_g changes sign or vanishes. */
    void check_curvature_sign() const;
    /** @brief Loop index and local parameter for an arc length. */
    std::pair<double, double> locate(double s) const;
    template <int N>
    JVec3<N> eval_reference(const Jet<N>& u, double shift_angle) const;
    // Jet in a parameter with dt/dtau = 1/h, so that the surrogate loop has speed of order 1.
    Jet<2> scaled_variable(double u) const;

    TrochoidParams p_;
    bool surrogate_ = false;
    double period_ = 0.0;
    double loops_ = 0.0;
    double length_ = 0.0;
    double window_ = 0.0;
    std::optional<ClosingData> closing_;
    std::shared_ptr<const LiftedCurve> lifted_;
    std::shared_ptr<const KuiperCurve> kuiper_;
    std::shared_ptr<const SeamBlendCurve> blend_;
    std::shared_ptr<const LiftedCurve> reference_;

    LoopTable ref_table_;
    long long plain_begin_ = 0, plain_end_ = 0;
    std::vector<LoopTable> head_, tail_;
    std::vector<double> head_start_, tail_start_;
    double plain_start_s_ = 0.0, tail_start_s_ = 0.0;
};

/**
 * @brief Gamma_lambda for lambda in [0.5, 6]; overrides replace the default
 * parameter schedule.
 */
std::shared_ptr<const SmoothClosedSphereCurve> build_gamma(
    double lambda, const std::optional<TrochoidParams>& overrides = std::nullopt);

/** @brief Closure residuals at the seam: position, unit tangent, k_g (relative). */
struct SeamResidual {
    double position, tangent, curvature;
    std::array<double, 5> derivative;  ///< relative mismatch of d^k/dt^k, k = 0..4
};
SeamResidual seam_residual(const SphereCurve& c);

/**
 * @brief Seam check across the wrap: the order-4 jet at T - delta, carried to
 * T + delta by its Taylor polynomial, against the jet at +delta. Position,
 * unit tangent and relative k_g; derivative[k] is the relative mismatch of
 * d^k/dt^k for k = 0..2.
 */
SeamResidual seam_crossing_residual(const SphereCurve& c, double delta);

}  // namespace milnorflow
