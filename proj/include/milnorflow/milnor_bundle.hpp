#pragma once

#include <utility>

#include "milnorflow/geom_core.hpp"
#include "milnorflow/sullivan_field.hpp"

namespace milnorflow {

/** @brief Milnor bundle xi_{h,j}; h + j = 1. */
struct BundleSpec {
    int h = 0;
    int j = 1;

    static BundleSpec e01() { return {0, 1}; }
    static BundleSpec e10() { return {1, 0}; }
    /** @brief Throws DomainError unless h + j = 1. */
    void validate() const;
    /** @brief True for (0,1) and (1,0), the specs that carry the fibration field. */
    bool supported() const { return (h == 0 && j == 1) || (h == 1 && j == 0); }
    bool operator==(const BundleSpec&) const = default;
};

enum class Chart { North, South };

/** @brief (v, w) in the north chart or (u, eta) in the south chart. */
struct ChartPoint {
    Chart chart = Chart::North;
    Quaternion base = Quaternion::zero();
    Quaternion fiber;
    bool valid(double tol = 1e-12) const;
};

struct ChartVelocity {
    Chart chart = Chart::North;
    Quaternion base = Quaternion::zero();
    Quaternion fiber = Quaternion::zero();
};

/** @brief Test hook: the faulty transition swaps the exponents h and j. */
enum class TransitionFault { None, SwapExponents };

/** @brief (v, w) -> (v / |v|^2, v^h w v^j / |v|). Throws DomainError at v = 0. */
std::pair<Quaternion, Quaternion> transition(const BundleSpec& spec, const Quaternion& v, const Quaternion& w,
                                             TransitionFault fault = TransitionFault::None);

/** @brief Inverse of transition: (u, eta) -> (v, w). */
std::pair<Quaternion, Quaternion> transition_inverse(const BundleSpec& spec, const Quaternion& u,
                                                     const Quaternion& eta);

/** @brief North representation of a point to its south representation. */
ChartPoint to_south(const BundleSpec& spec, const ChartPoint& north);
ChartPoint to_north(const BundleSpec& spec, const ChartPoint& south);

/**
 * @brief Differential of the transition at a north point applied to a north
 * velocity, in closed form. Supported specs only.
 */
ChartVelocity transport_to_south(const BundleSpec& spec, const ChartPoint& north, const ChartVelocity& vel);

/** @brief v^h w v^j for unit v, w. */
Quaternion clutching_map(const BundleSpec& spec, const Quaternion& v, const Quaternion& w);

/** @brief (h - j)^2 - 1 = 0 mod 7. Throws DomainError unless h + j = 1. */
bool is_diffeo_standard(const BundleSpec& spec);

enum class PhaseAction { Left, Right };

/** @brief |phi(v, e^{it} . w) - e^{it} . phi(v, w)| for the given action. */
double commutation_residual(const BundleSpec& spec, const Quaternion& v, const Quaternion& w, double t,
                            PhaseAction action, TransitionFault fault = TransitionFault::None);

/** @brief The phase action matched to a supported spec: left for (0,1), right for (1,0). */
PhaseAction matched_action(const BundleSpec& spec);

/** @brief 1 / (1 - u5^2). */
double lambda_of_u5(double u5);
/** @brief (1 - r^2) / (1 + r^2). */
double radius_to_u5(double r);

/**
 * @brief Circle-fibration field on E_{h,j} in chart coordinates.
 *
 * The field parameter is scale / (1 - u5^2). Off the polar fibers this is the
 * S^3 x S^3 Sullivan field on (theta, w) with v = r theta. On the polar fibers
 * it is the Hopf rotation of the fiber.
 */
ChartVelocity eval_fibration_field(const BundleSpec& spec, const ChartPoint& p, double scale = 1.0);

/** @brief Fiber rotation of the Hopf field: i w for (0,1), w i for (1,0). */
Quaternion hopf_fiber_rotation(const BundleSpec& spec, const Quaternion& w);

/** @brief Quaternion pair (p1, p2) as a point of R^8, layout (a, b, c, d) per factor. */
Vec8 pair_to_r8(const Quaternion& p1, const Quaternion& p2);
std::pair<Quaternion, Quaternion> r8_to_pair(const Vec8& x);

/**
 * @brief Identification of E_{h,j} with S^7 in H^2.
 *
 * North (0,1): (w, w v) / sqrt(1 + |v|^2); north (1,0): (w, v w) / sqrt(1 + |v|^2).
 * South (0,1): (eta conj(u), eta) / sqrt(1 + |u|^2); south (1,0): (conj(u) eta, eta) / ....
 */
Vec8 chart_to_s7(const BundleSpec& spec, const ChartPoint& p);

/** @brief Inverse of chart_to_s7; north iff |p2| <= |p1|. */
ChartPoint s7_to_chart(const BundleSpec& spec, const Vec8& p);

/** @brief Ambient velocity of a chart velocity. */
Vec8 chart_velocity_to_s7(const BundleSpec& spec, const ChartPoint& p, const ChartVelocity& v);

/** @brief |p1|^2 - |p2|^2. */
double u5_of(const Vec8& p);

/** @brief H_{0,1}(p) = i p or H_{1,0}(p) = p i, factorwise. */
Vec8 hopf_field_s7(const BundleSpec& spec, const Vec8& p);

/** @brief Fibration field on S^7 in ambient coordinates. */
Vec8 fibration_field_s7(const BundleSpec& spec, const Vec8& p, double scale = 1.0);

/**
 * @brief Effective Sullivan parameter at p: scale / (1 - u5^2) + kappa(|z1(theta)|^2),
 * infinite on the polar fibers. Both u5 and |z1(theta)|^2 are first integrals.
 */
double effective_lambda_s7(const BundleSpec& spec, const Vec8& p, double scale = 1.0);

/** @brief The field with the effective parameter fixed; equals fibration_field_s7 on its level set. */
Vec8 fibration_field_s7_with(const BundleSpec& spec, const Vec8& p, double effective_lambda);

/**
 * @brief The family X_mu on S^7, mu in [0, 1]: the fibration field with
 * parameter scale 1 / (1 - mu), and H_{0,1} at mu = 1.
 */
Vec8 hopf_family_field(double mu, const Vec8& p);

}  // namespace milnorflow
