#pragma once

#include <array>
#include <cmath>

namespace milnorflow {

/**
 * @brief Truncated Taylor expansion f(t0 + e) = sum c[k] e^k, k <= N.
 *
 * Arithmetic propagates exact derivatives of compositions; the k-th
 * derivative is c[k] * k!.
 */
template <int N>
struct Jet {
    std::array<double, N + 1> c{};

    Jet() = default;
    Jet(double v) { c[0] = v; }  // NOLINT(google-explicit-constructor)

    static Jet variable(double t0) {
        Jet j(t0);
        if constexpr (N >= 1) j.c[1] = 1.0;
        return j;
    }

    double value() const { return c[0]; }

    /** @brief k-th derivative with respect to the seed variable. */
    double deriv(int k) const {
        double f = 1.0;
        for (int i = 2; i <= k; ++i) f *= i;
        return c[k] * f;
    }

    Jet operator-() const {
        Jet r;
        for (int k = 0; k <= N; ++k) r.c[k] = -c[k];
        return r;
    }
    Jet& operator+=(const Jet& o) {
        for (int k = 0; k <= N; ++k) c[k] += o.c[k];
        return *this;
    }
    Jet& operator-=(const Jet& o) {
        for (int k = 0; k <= N; ++k) c[k] -= o.c[k];
        return *this;
    }
    Jet& operator*=(double s) {
        for (int k = 0; k <= N; ++k) c[k] *= s;
        return *this;
    }
};

template <int N>
Jet<N> operator+(Jet<N> a, const Jet<N>& b) { return a += b; }
template <int N>
Jet<N> operator-(Jet<N> a, const Jet<N>& b) { return a -= b; }
template <int N>
Jet<N> operator+(Jet<N> a, double s) { a.c[0] += s; return a; }
template <int N>
Jet<N> operator+(double s, Jet<N> a) { a.c[0] += s; return a; }
template <int N>
Jet<N> operator-(Jet<N> a, double s) { a.c[0] -= s; return a; }
template <int N>
Jet<N> operator-(double s, const Jet<N>& a) { Jet<N> r = -a; r.c[0] += s; return r; }
template <int N>
Jet<N> operator*(Jet<N> a, double s) { return a *= s; }
template <int N>
Jet<N> operator*(double s, Jet<N> a) { return a *= s; }
template <int N>
Jet<N> operator/(Jet<N> a, double s) { return a *= (1.0 / s); }

template <int N>
Jet<N> operator*(const Jet<N>& a, const Jet<N>& b) {
    Jet<N> r;
    for (int k = 0; k <= N; ++k) {
        double s = 0.0;
        for (int i = 0; i <= k; ++i) s += a.c[i] * b.c[k - i];
        r.c[k] = s;
    }
    return r;
}

template <int N>
Jet<N> operator/(const Jet<N>& a, const Jet<N>& b) {
    Jet<N> q;
    for (int k = 0; k <= N; ++k) {
        double s = a.c[k];
        for (int i = 1; i <= k; ++i) s -= b.c[i] * q.c[k - i];
        q.c[k] = s / b.c[0];
    }
    return q;
}

template <int N>
Jet<N> operator/(double s, const Jet<N>& b) { return Jet<N>(s) / b; }

template <int N>
Jet<N> exp(const Jet<N>& f) {
    Jet<N> e;
    e.c[0] = std::exp(f.c[0]);
    for (int k = 1; k <= N; ++k) {
        double s = 0.0;
        for (int i = 1; i <= k; ++i) s += i * f.c[i] * e.c[k - i];
        e.c[k] = s / k;
    }
    return e;
}

template <int N>
Jet<N> log(const Jet<N>& f) {
    Jet<N> l;
    l.c[0] = std::log(f.c[0]);
    for (int k = 1; k <= N; ++k) {
        double s = 0.0;
        for (int i = 1; i < k; ++i) s += i * l.c[i] * f.c[k - i];
        l.c[k] = (f.c[k] - s / k) / f.c[0];
    }
    return l;
}

template <int N>
void sincos(const Jet<N>& f, Jet<N>& s, Jet<N>& co) {
    s = Jet<N>();
    co = Jet<N>();
    s.c[0] = std::sin(f.c[0]);
    co.c[0] = std::cos(f.c[0]);
    for (int k = 1; k <= N; ++k) {
        double ss = 0.0, cc = 0.0;
        for (int i = 1; i <= k; ++i) {
            ss += i * f.c[i] * co.c[k - i];
            cc += i * f.c[i] * s.c[k - i];
        }
        s.c[k] = ss / k;
        co.c[k] = -cc / k;
    }
}

template <int N>
Jet<N> sin(const Jet<N>& f) {
    Jet<N> s, c;
    sincos(f, s, c);
    return s;
}

template <int N>
Jet<N> cos(const Jet<N>& f) {
    Jet<N> s, c;
    sincos(f, s, c);
    return c;
}

template <int N>
Jet<N> sqrt(const Jet<N>& f) {
    Jet<N> r;
    r.c[0] = std::sqrt(f.c[0]);
    for (int k = 1; k <= N; ++k) {
        double s = f.c[k];
        for (int i = 1; i < k; ++i) s -= r.c[i] * r.c[k - i];
        r.c[k] = s / (2.0 * r.c[0]);
    }
    return r;
}

/** @brief f^alpha for a real constant exponent, f(t0) > 0. */
template <int N>
Jet<N> pow(const Jet<N>& f, double alpha) {
    Jet<N> p;
    p.c[0] = std::pow(f.c[0], alpha);
    for (int k = 1; k <= N; ++k) {
        double s = 0.0;
        for (int i = 1; i <= k; ++i) s += ((alpha + 1.0) * i - k) * f.c[i] * p.c[k - i];
        p.c[k] = s / (k * f.c[0]);
    }
    return p;
}

/** @brief Re-expand a jet at order M <= N (drop higher coefficients). */
template <int M, int N>
Jet<M> truncate(const Jet<N>& f) {
    static_assert(M <= N);
    Jet<M> r;
    for (int k = 0; k <= M; ++k) r.c[k] = f.c[k];
    return r;
}

/** @brief Three jets, used for curves in R^3. */
template <int N>
struct JVec3 {
    Jet<N> x, y, z;

    JVec3 operator+(const JVec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    JVec3 operator-(const JVec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    JVec3 operator*(const Jet<N>& s) const { return {x * s, y * s, z * s}; }
    JVec3 operator*(double s) const { return {x * s, y * s, z * s}; }

    /** @brief k-th derivative as a plain triple. */
    std::array<double, 3> deriv(int k) const { return {x.deriv(k), y.deriv(k), z.deriv(k)}; }
};

template <int N>
Jet<N> dot(const JVec3<N>& a, const JVec3<N>& b) {
    return a.x * b.x + a.y * b.y + a.z * b.z;
}

template <int N>
JVec3<N> cross(const JVec3<N>& a, const JVec3<N>& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

template <int N>
JVec3<N> normalized(const JVec3<N>& a) {
    Jet<N> inv = 1.0 / sqrt(dot(a, a));
    return a * inv;
}

}  // namespace milnorflow
