#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

namespace bmvd {

// Surface area of the unit sphere S^{k-1} in R^k.
inline double sphere_area(int k) {
    if (k < 1) throw std::invalid_argument("sphere_area: dimension must be >= 1");
    return 2.0 * std::pow(M_PI, 0.5 * k) / std::tgamma(0.5 * k);
}

// Volume of the unit ball in R^k.
inline double ball_volume(int k) {
    if (k < 1) throw std::invalid_argument("ball_volume: dimension must be >= 1");
    return std::pow(M_PI, 0.5 * k) / std::tgamma(0.5 * k + 1.0);
}

// Fraction of S^{k-1} covered by the polar cap {theta <= cap_angle}.
// For k = 1 the sphere is the two-point set {-1, +1}.
inline double spherical_cap_fraction(int k, double cap_angle) {
    if (cap_angle <= 0.0) return 0.0;
    if (cap_angle >= M_PI) return 1.0;
    if (k == 1) return cap_angle < M_PI_2 ? 0.0 : (cap_angle > M_PI_2 ? 0.5 : 0.25);
    const double s = std::sin(cap_angle);
    const double half = 0.5 * boost::math::ibeta(0.5 * (k - 1), 0.5, s * s);
    return cap_angle <= M_PI_2 ? half : 1.0 - half;
}

namespace detail {

inline double simpson_panel(const std::function<double(double)>& f, double a, double fa,
                            double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double fa, double fm, double fb, double whole, double tol,
                                   int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Adaptive Simpson quadrature with a relative tolerance (absolute floor guards
// against a zero first estimate).
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double rel_tol = 1e-8, int max_depth = 40) {
    if (!(b > a)) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double tol = std::max(std::abs(whole) * rel_tol, 1e-300);
    return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// Integrates f over [a, b] splitting at interior breakpoints (kinks).
inline double adaptive_simpson_split(const std::function<double(double)>& f, double a, double b,
                                     std::vector<double> breaks, double rel_tol = 1e-8) {
    breaks.push_back(a);
    breaks.push_back(b);
    std::sort(breaks.begin(), breaks.end());
    double total = 0.0;
    for (size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double lo = std::max(a, breaks[i]);
        const double hi = std::min(b, breaks[i + 1]);
        if (hi > lo) total += adaptive_simpson(f, lo, hi, rel_tol);
    }
    return total;
}

// Solves a tridiagonal system in place (Thomas algorithm). diag/rhs are
// overwritten; lower[i] couples row i to i-1, upper[i] couples row i to i+1.
inline void solve_tridiagonal(std::vector<double>& lower, std::vector<double>& diag,
                              std::vector<double>& upper, std::vector<double>& rhs) {
    const size_t n = diag.size();
    if (n == 0) return;
    for (size_t i = 1; i < n; ++i) {
        if (diag[i - 1] == 0.0) throw std::runtime_error("solve_tridiagonal: zero pivot");
        const double w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    if (diag[n - 1] == 0.0) throw std::runtime_error("solve_tridiagonal: zero pivot");
    rhs[n - 1] /= diag[n - 1];
    for (size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
}

// Piecewise-linear interpolation of (xs, ys) at x, in log-x. Values are
// interpolated in log-y when both endpoints are positive, linearly otherwise.
// xs must be strictly increasing; x outside the range clamps to the ends.
inline double interp_loglog(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    if (xs.empty()) throw std::invalid_argument("interp_loglog: empty table");
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const size_t i = static_cast<size_t>(it - xs.begin());
    const double x0 = xs[i - 1], x1 = xs[i];
    const double w = (std::log(x) - std::log(x0)) / (std::log(x1) - std::log(x0));
    const double y0 = ys[i - 1], y1 = ys[i];
    if (y0 > 0.0 && y1 > 0.0) return std::exp((1.0 - w) * std::log(y0) + w * std::log(y1));
    return (1.0 - w) * y0 + w * y1;
}

// Least-squares slope of y against x.
inline double ls_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("ls_slope: need >= 2 points");
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= xs.size();
    my /= ys.size();
    double sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    return sxy / sxx;
}

inline std::vector<double> logspace(double lo, double hi, size_t n) {
    if (n == 0) return {};
    if (n == 1) return {lo};
    std::vector<double> out(n);
    const double l0 = std::log(lo), l1 = std::log(hi);
    for (size_t i = 0; i < n; ++i) out[i] = std::exp(l0 + (l1 - l0) * i / double(n - 1));
    out.front() = lo;
    out.back() = hi;
    return out;
}

}  // namespace bmvd
