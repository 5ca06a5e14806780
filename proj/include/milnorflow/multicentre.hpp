#pragma once

#include <vector>

#include "milnorflow/dynamics.hpp"
#include "milnorflow/geom_core.hpp"

namespace milnorflow {

using Mat8 = Eigen::Matrix<double, 8, 8>;

/** @brief R / (1 - u5^2). */
double lambda_of(double u5, double R);

/**
 * @brief Vector field on the ball |x| < r_max of R^8 with a nondegenerate
 * multicentre at 0.
 *
 * For x = r z, |z| = 1, X(x) = r Y(z), Y the circle-fibration field on S^7
 * with parameter lambda(u5, 1/r). X = A x + a flat remainder.
 */
class MulticentreField {
public:
    explicit MulticentreField(double r_max = 1.0);
    double r_max() const { return r_max_; }
    Vec8 eval(const Vec8& x) const;
    /** @brief Block diagonal A with four blocks [[0, -1], [1, 0]]. */
    static Mat8 linearization();
    /** @brief Central-difference Jacobian at 0, step in [1e-6, 1e-2]. */
    Mat8 finite_difference_jacobian_at_zero(double step) const;

private:
    double r_max_;
};

struct SpherePeriod {
    Vec8 z;
    double u5 = 0.0;
    bool closed = false;
    /** @brief Period, or the lower bound T_max when not closed. */
    double period = 0.0;
    double residual = 0.0;
    double drift = 0.0;
};

/** @brief Period of the orbit through r z for each z in the sample. */
std::vector<SpherePeriod> period_on_sphere(const MulticentreField& field, double r, const std::vector<Vec8>& sample,
                                           const IntegratorConfig& cfg);

}  // namespace milnorflow
