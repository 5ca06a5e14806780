#include "milnorflow/multicentre.hpp"

#include <cmath>

#include "milnorflow/errors.hpp"
#include "milnorflow/milnor_bundle.hpp"

namespace milnorflow {

double lambda_of(double u5, double R) {
    if (!(std::abs(u5) < 1.0)) throw DomainError("lambda_of requires |u5| < 1");
    if (!(R > 0.0)) throw DomainError("lambda_of requires R > 0");
    return R / (1.0 - u5 * u5);
}

MulticentreField::MulticentreField(double r_max) : r_max_(r_max) {
    if (!(r_max > 0.0 && r_max <= 1.0)) throw DomainError("multicentre r_max must lie in (0, 1]");
}

Vec8 MulticentreField::eval(const Vec8& x) const {
    const double r = x.norm();
    if (r == 0.0) return Vec8::Zero();
    if (!(r < r_max_)) throw DomainError("multicentre: point outside the neighbourhood |x| < r_max");
    const Vec8 z = x / r;
    return r * fibration_field_s7(BundleSpec::e01(), z, 1.0 / r);
}

Mat8 MulticentreField::linearization() {
    Mat8 a = Mat8::Zero();
    for (int b = 0; b < 4; ++b) {
        a(2 * b, 2 * b + 1) = -1.0;
        a(2 * b + 1, 2 * b) = 1.0;
    }
    return a;
}

Mat8 MulticentreField::finite_difference_jacobian_at_zero(double step) const {
    if (!(step >= 1e-6 && step <= 1e-2)) throw DomainError("finite-difference step must lie in [1e-6, 1e-2]");
    Mat8 j;
    for (int i = 0; i < 8; ++i) {
        const Vec8 e = Vec8::Unit(i) * step;
        j.col(i) = (eval(e) - eval(-e)) / (2.0 * step);
    }
    return j;
}

std::vector<SpherePeriod> period_on_sphere(const MulticentreField& field, double r, const std::vector<Vec8>& sample,
                                           const IntegratorConfig& cfg) {
    if (!(r > 0.0 && r < field.r_max())) throw DomainError("period_on_sphere requires 0 < r < r_max");
    std::vector<SpherePeriod> out(sample.size());
    parallel_for(sample.size(), [&](std::size_t i) {
        const Vec8 z = sample[i].normalized();
        const OrbitResult o = detect_period(multicentre_orbit_field(r * z, field.r_max()), vec8_to_state(r * z), cfg);
        out[i] = {z, u5_of(z), o.closed, o.period, o.residual, o.drift};
    });
    return out;
}

}  // namespace milnorflow
