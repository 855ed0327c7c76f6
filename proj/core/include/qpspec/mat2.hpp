#pragma once

#include <cmath>
#include <complex>

namespace qpspec::algebra {

using cplx = std::complex<double>;

// Complex 2x2 matrix, row-major [[a, b], [c, d]].
struct Mat2 {
    cplx a{}, b{}, c{}, d{};

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static Mat2 zero() { return {}; }

    cplx trace() const { return a + d; }
    cplx det() const { return a * d - b * c; }

    Mat2 operator+(const Mat2& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d}; }
    Mat2 operator-(const Mat2& o) const { return {a - o.a, b - o.b, c - o.c, d - o.d}; }
    Mat2 operator-() const { return {-a, -b, -c, -d}; }

    Mat2 operator*(const Mat2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d,
                c * o.a + d * o.c, c * o.b + d * o.d};
    }
    Mat2 operator*(cplx s) const { return {a * s, b * s, c * s, d * s}; }
    Mat2 operator*(double s) const { return {a * s, b * s, c * s, d * s}; }

    Mat2& operator+=(const Mat2& o) {
        a += o.a; b += o.b; c += o.c; d += o.d;
        return *this;
    }
    Mat2& operator*=(double s) {
        a *= s; b *= s; c *= s; d *= s;
        return *this;
    }

    // Inverse by adjugate; exact for det == 1.
    Mat2 inv_unimodular() const { return {d, -b, -c, a}; }
    Mat2 inverse() const {
        const cplx dt = det();
        return {d / dt, -b / dt, -c / dt, a / dt};
    }

    double fro_norm() const {
        return std::sqrt(std::norm(a) + std::norm(b) + std::norm(c) + std::norm(d));
    }

    // Largest singular value via the closed form for 2x2:
    // sigma_max^2 = (f + sqrt(f^2 - 4|det|^2)) / 2 with f = |A|_F^2.
    double op_norm() const {
        const double f = std::norm(a) + std::norm(b) + std::norm(c) + std::norm(d);
        const double g = std::abs(det());
        const double disc = std::max(f * f - 4.0 * g * g, 0.0);
        return std::sqrt(0.5 * (f + std::sqrt(disc)));
    }
};

inline Mat2 operator*(cplx s, const Mat2& m) { return m * s; }
inline Mat2 operator*(double s, const Mat2& m) { return m * s; }

inline double max_abs_entry(const Mat2& m) {
    return std::max(std::max(std::abs(m.a), std::abs(m.b)),
                    std::max(std::abs(m.c), std::abs(m.d)));
}

// exp(F) for traceless F via e^F = cosh(mu) I + (sinh(mu)/mu) F, mu^2 = -det F.
// Exact closed form (F^2 = -det(F) I when tr F = 0); series branch near mu = 0.
Mat2 mat_exp_traceless(const Mat2& f);

// Principal logarithm of a unimodular M near the identity; returns traceless L
// with mat_exp_traceless(L) == M. Requires |M - I| < 0.5 entrywise-ish.
Mat2 mat_log_near_identity(const Mat2& m);

}  // namespace qpspec::algebra
