#pragma once

#include <cmath>
#include <functional>
#include <numbers>

#include "cheeger/geometry.hpp"

namespace testing {

// Adaptive Simpson, independent of anything in the library.
inline double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                      double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15 * tol) return left + right + (left + right - whole) / 15;
    return simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
           simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-13) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return simpson(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4 * fm + fb), tol, 50);
}

/// Radial p-torsion profile of the disk of radius R in the plane, written out
/// directly: u(r) = (p-1)/p 2^{-1/(p-1)} (R^q - r^q), q = p/(p-1).
inline double disk_torsion(double p, double R, double r) {
    const double q = p / (p - 1.0);
    return (p - 1.0) / p * std::pow(2.0, -1.0 / (p - 1.0)) * (std::pow(R, q) - std::pow(r, q));
}

inline double disk_torsion_l1(double p, double R) {
    return integrate([&](double r) { return disk_torsion(p, R, r) * 2 * std::numbers::pi * r; }, 0.0, R);
}

inline cheeger::GridPtr disk_grid(int res, double R = 1.0) {
    return cheeger::rasterize(cheeger::DomainSpec::disk(R), res);
}
inline cheeger::GridPtr square_grid(int res) { return cheeger::rasterize(cheeger::DomainSpec::rectangle(1, 1), res); }

inline double radius(cheeger::Point2 x) { return std::hypot(x.x, x.y); }

}  // namespace testing
