#pragma once

#include <array>
#include <cmath>

namespace milnorflow::detail {

/** @brief Gauss-Legendre nodes and weights on [-1, 1]. */
template <int M>
struct GaussLegendre {
    std::array<double, M> x{}, w{};
    GaussLegendre() {
        for (int i = 0; i < M; ++i) {
            double z = std::cos(M_PI * (i + 0.75) / (M + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = 0.0;
                for (int k = 1; k <= M; ++k) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
                }
                dp = M * (z * p0 - p1) / (z * z - 1.0);
                const double dz = p0 / dp;
                z -= dz;
                if (std::abs(dz) < 1e-16) break;
            }
            x[i] = z;
            w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        }
    }
    static const GaussLegendre& get() {
        static const GaussLegendre rule;
        return rule;
    }
    template <class F>
    double integrate(F&& f, double a, double b) const {
        const double c = 0.5 * (a + b), r = 0.5 * (b - a);
        double s = 0.0;
        for (int i = 0; i < M; ++i) s += w[i] * f(c + r * x[i]);
        return s * r;
    }
};

}  // namespace milnorflow::detail
