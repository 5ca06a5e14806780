#pragma once

#include <memory>
#include <utility>

#include "milnorflow/curve_factory.hpp"
#include "milnorflow/geom_core.hpp"

namespace milnorflow {

/** @brief Above this lambda the reciprocal curvature is below 1e-17 and is taken as 0. */
inline constexpr double kLambdaFlat = 40.0;

/**
 * @brief Curve used by the fields at a given lambda: Gamma_lambda for
 * lambda <= 6, the exactly periodic trochoid with a = 1/round(e^{2 lambda})
 * beyond, nullptr from lambda >= 40. Results are cached.
 */
std::shared_ptr<const SmoothClosedSphereCurve> curve_for_lambda(double lambda);

/** @brief Unit tangent lift t -> (gamma(t), gamma'(t) / |gamma'(t)|). */
class TangentLift {
public:
    explicit TangentLift(std::shared_ptr<const SmoothClosedSphereCurve> c);
    TangentPairPoint at(double t) const;
    const SmoothClosedSphereCurve& curve() const { return *c_; }
    std::shared_ptr<const SmoothClosedSphereCurve> curve_ptr() const { return c_; }

private:
    std::shared_ptr<const SmoothClosedSphereCurve> c_;
};

TangentLift tangent_lift(std::shared_ptr<const SmoothClosedSphereCurve> c);

/** @brief Fiber lift: w is v rotated by 2 pi l(p)/l about the base point. */
class FiberLift {
public:
    FiberLift(TangentLift base, double t0);
    FramePoint at(double t) const;
    /** @brief Lifted fiber angle 2 pi (s(t) - s(t0)) / l, in [0, 2 pi). */
    double fiber_angle(double t) const;
    const TangentLift& base() const { return base_; }

private:
    TangentLift base_;
    double t0_, s0_;
};

FiberLift fiber_lift(const TangentLift& g, double t0 = 0.0);

/** @brief Angle psi from y to w about x, in [0, 2 pi). */
double fiber_angle(const FramePoint& p);

/** @brief g * (q, v, w) = (g q, g v, g w). */
FramePoint so3_translate(const Mat3& g, const FramePoint& p);
FrameVelocity so3_translate(const Mat3& g, const FrameVelocity& v);

/** @brief Frame point with fiber angle psi over (x, y). */
FramePoint frame_with_angle(const Vec3& x, const Vec3& y, double psi);

struct LeafMatch {
    Mat3 g;
    double phase;     ///< s / l on the reference leaf
    double residual;  ///< |g * leaf point - p| in R^9
};

/**
 * @brief The Sullivan field X_lambda on M (R^9 embedding).
 *
 * xdot = sigma y, ydot = x cross y - sigma x,
 * wdot = (1 + psidot) x cross w - sigma (y . w) x, psidot = 2 pi sigma / l,
 * with sigma = 1 / k_g at arc length s = l psi / 2 pi.
 */
class SullivanField {
public:
    explicit SullivanField(double lambda);
    double lambda() const { return lambda_; }
    /** @brief Length l(lambda); 0 when the field is exactly Hopf. */
    double length() const;
    std::shared_ptr<const SmoothClosedSphereCurve> curve() const { return curve_; }

    /** @brief 1 / k_g on the reference leaf at fiber angle psi. */
    double sigma(double psi) const;

    FrameVelocity eval(const FramePoint& p) const;
    /** @brief The limit field (0, x cross y, x cross w). */
    static FrameVelocity hopf_reference(const FramePoint& p);
    /** @brief Max-abs distance of X_lambda(p) from the limit field. */
    double flatness_distance(const FramePoint& p) const;

    LeafMatch leaf_through(const FramePoint& p) const;
    FramePoint leaf_point(const Mat3& g, double phase) const;

    /** @brief Integral of k_g ds over Gamma_lambda. */
    double period() const;

private:
    double lambda_;
    std::shared_ptr<const SmoothClosedSphereCurve> curve_;
};

FrameVelocity eval_X(double lambda, const FramePoint& p);
double period_quadrature(double lambda);

/** @brief Which Milnor bundle the S^3 x S^3 lift is adapted to. */
enum class CoverSide {
    Left01,   ///< x = -conj(w) i w, y = conj(w) j w; wdot = (i + sigma k) w
    Right10,  ///< x = w i conj(w), y = w j conj(w); wdot = w (i + sigma k)
};

/** @brief kappa(s) = exp(-1/(1/2 - s)) / s for s < 1/2, else 0. */
double lambda_modulation(double s);

struct QuaternionPair {
    Quaternion theta, w;
};

/**
 * @brief Lift of X_lambda to S^3 x S^3 through the double cover.
 *
 * The first factor theta = z1 + z2 j carries the fiber angle psi = 2 arg z1;
 * the second factor carries the frame (x, y). The effective parameter is
 * lambda + kappa(|z1|^2); the push-down is 2 X at that parameter.
 */
class S3S3Field {
public:
    S3S3Field(double lambda, CoverSide side);
    double lambda() const { return lambda_; }
    CoverSide side() const { return side_; }
    double effective_lambda(const Quaternion& theta) const;
    QuaternionPair eval(const QuaternionPair& q) const;
    /** @brief The field with the effective parameter given explicitly. */
    QuaternionPair eval_with(const QuaternionPair& q, double effective_lambda) const;

private:
    double lambda_;
    CoverSide side_;
};

/** @brief Unit fiber generator of the second factor: i w or w i. */
Quaternion hopf_generator(const Quaternion& w, CoverSide side);

FramePoint push_down(const QuaternionPair& q, CoverSide side);
FrameVelocity push_down_velocity(const QuaternionPair& q, const QuaternionPair& qdot, CoverSide side);
/** @brief A lift (e^{i psi/2}, w) of a frame point. */
QuaternionPair lift_frame(const FramePoint& p, CoverSide side);

/** @brief Unit quaternion q with R(q) = m. */
Quaternion quaternion_from_rotation(const Mat3& m);

}  // namespace milnorflow
