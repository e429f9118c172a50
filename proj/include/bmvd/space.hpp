#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "bmvd/numerics.hpp"

namespace bmvd {

// Two Euclidean exteriors glued at a single point a*. The d-side is the
// exterior of the eps-ball in R^d, the d'-side the exterior of the eps'-ball
// in R^{d'}; a 1-dimensional side is the half-line (0, inf) and its gluing
// radius only enters through the junction weight.
struct SpaceParams {
    int d = 3;
    int d_prime = 1;
    double eps = 1.0;
    double eps_prime = 1.0;
    double p = 1.0;

    double omega_d = 0.0;   // area of the unit (d-1)-sphere
    double omega_dp = 0.0;  // area of the unit (d'-1)-sphere
    double w_plus = 0.0;    // |boundary sphere| on the d-side
    double w_minus = 0.0;   // p * |boundary sphere| on the d'-side (1 if d' = 1)

    SpaceParams() { derive(); }
    SpaceParams(int d_, int dp_, double eps_, double epsp_, double p_)
        : d(d_), d_prime(dp_), eps(eps_), eps_prime(epsp_), p(p_) {
        derive();
    }

    void derive() {
        if (d < d_prime || d_prime < 1)
            throw std::invalid_argument("SpaceParams: need d >= d' >= 1");
        if (!(eps > 0.0) || !(eps_prime > 0.0) || !(p > 0.0))
            throw std::invalid_argument("SpaceParams: eps, eps', p must be > 0");
        omega_d = sphere_area(d);
        omega_dp = sphere_area(d_prime);
        w_plus = d == 1 ? 1.0 : omega_d * std::pow(eps, d - 1);
        w_minus = p * (d_prime == 1 ? 1.0 : omega_dp * std::pow(eps_prime, d_prime - 1));
    }

    // Local-time coefficient of the signed radial process at 0.
    double beta() const { return (w_plus - w_minus) / (w_plus + w_minus); }

    int side_dim(bool primary_side) const { return primary_side ? d : d_prime; }
    // Gluing radius; 0 for a 1-dimensional side (half-line convention).
    double side_eps(bool primary_side) const {
        const int k = side_dim(primary_side);
        return k == 1 ? 0.0 : (primary_side ? eps : eps_prime);
    }
};

enum class Part { SideD, SideDPrime, Junction };

inline const char* part_name(Part p) {
    switch (p) {
        case Part::SideD: return "d";
        case Part::SideDPrime: return "dp";
        default: return "a*";
    }
}

struct GluedPoint {
    Part part = Part::Junction;
    std::vector<double> coords;

    static GluedPoint junction() { return {}; }
    static GluedPoint side_d(std::vector<double> c) { return {Part::SideD, std::move(c)}; }
    static GluedPoint side_dp(std::vector<double> c) { return {Part::SideDPrime, std::move(c)}; }
};

inline double euclid_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double c : v) s += c * c;
    return std::sqrt(s);
}

inline void validate_point(const GluedPoint& x, const SpaceParams& sp) {
    if (x.part == Part::Junction) {
        if (!x.coords.empty()) throw std::domain_error("junction point carries no coordinates");
        return;
    }
    const bool primary = x.part == Part::SideD;
    const int k = sp.side_dim(primary);
    if (static_cast<int>(x.coords.size()) != k)
        throw std::domain_error("point coordinate count does not match side dimension");
    if (k == 1) {
        if (!(x.coords[0] > 0.0)) throw std::domain_error("half-line point must be > 0");
        return;
    }
    if (!(euclid_norm(x.coords) > sp.side_eps(primary)))
        throw std::domain_error("point lies inside the removed ball");
}

// |x|_rho: distance to the junction along the point's own part.
inline double radial_excess(const GluedPoint& x, const SpaceParams& sp) {
    validate_point(x, sp);
    if (x.part == Part::Junction) return 0.0;
    const bool primary = x.part == Part::SideD;
    return euclid_norm(x.coords) - sp.side_eps(primary);
}

// Euclidean distance within one part; infinity across parts or at a*.
inline double same_part_distance(const GluedPoint& x, const GluedPoint& y) {
    if (x.part == Part::Junction || y.part == Part::Junction || x.part != y.part)
        return std::numeric_limits<double>::infinity();
    double s = 0.0;
    for (size_t i = 0; i < x.coords.size(); ++i) {
        const double dc = x.coords[i] - y.coords[i];
        s += dc * dc;
    }
    return std::sqrt(s);
}

// Shortest-path metric: same part allows the direct segment or the route
// through a*; different parts must pass through a*.
inline double rho(const GluedPoint& x, const GluedPoint& y, const SpaceParams& sp) {
    const double sum = radial_excess(x, sp) + radial_excess(y, sp);
    return std::min(sum, same_part_distance(x, y));
}

// Signed radial coordinate u: positive on the d-side, negative on the d'-side.
inline double signed_radial(const GluedPoint& x, const SpaceParams& sp) {
    const double r = radial_excess(x, sp);
    return x.part == Part::SideDPrime ? -r : r;
}

namespace detail {

// Measure (with the side's m_p weight) of the shell {0 < |y|_rho < span}.
inline double shell_measure(bool primary_side, double span, const SpaceParams& sp) {
    if (span <= 0.0) return 0.0;
    const int k = sp.side_dim(primary_side);
    const double wt = primary_side ? 1.0 : sp.p;
    if (k == 1) return wt * span;
    const double e = sp.side_eps(primary_side);
    return wt * ball_volume(k) * (std::pow(e + span, k) - std::pow(e, k));
}

// Measure of the clipped Euclidean ball {|x-y| < r, |y| > lo_radius} on x's
// side, restricted to |y| >= shell_cut. Radial quadrature of shell area times
// the spherical-cap fraction cut out by the ball around x.
inline double clipped_ball_measure(int k, double wt, double x_abs, double r, double lo_radius,
                                   double shell_cut) {
    const double lo = std::max({x_abs - r, lo_radius, shell_cut});
    const double hi = x_abs + r;
    if (hi <= lo) return 0.0;
    if (k == 1) {
        // Half-line: the "shell" at radius s is the single point s > 0.
        return wt * (hi - std::max(lo, 0.0));
    }
    const double omega = sphere_area(k);
    auto integrand = [&](double s) {
        // Polar angle of the cap {|x-y| < r} on the sphere |y| = s.
        const double c = (x_abs * x_abs + s * s - r * r) / (2.0 * x_abs * s);
        double ang;
        if (c <= -1.0)
            ang = M_PI;
        else if (c >= 1.0)
            ang = 0.0;
        else
            ang = std::acos(c);
        return omega * std::pow(s, k - 1) * spherical_cap_fraction(k, ang);
    };
    std::vector<double> breaks = {std::abs(x_abs - r), r - x_abs, r + x_abs};
    return wt * adaptive_simpson_split(integrand, lo, hi, breaks, 1e-8);
}

}  // namespace detail

// m_p measure of the metric ball B(x; r).
inline double ball_measure(const GluedPoint& x, double r, const SpaceParams& sp) {
    if (!(r > 0.0)) throw std::domain_error("ball_measure: radius must be > 0");
    const double xr = radial_excess(x, sp);
    const double span = r - xr;  // reach beyond a*, on either part

    if (x.part == Part::Junction)
        return detail::shell_measure(true, r, sp) + detail::shell_measure(false, r, sp);

    const bool primary = x.part == Part::SideD;
    // Part not containing x: full shell through the junction.
    double total = detail::shell_measure(!primary, span, sp);
    // Own part: junction shell plus the Euclidean ball clipped to the
    // exterior, with the shell region excluded from the cap integral.
    total += detail::shell_measure(primary, span, sp);
    const int k = sp.side_dim(primary);
    const double e = sp.side_eps(primary);
    const double wt = primary ? 1.0 : sp.p;
    total += detail::clipped_ball_measure(k, wt, euclid_norm(x.coords), r, e,
                                          e + std::max(span, 0.0));
    return total;
}

inline double vd_ratio(const GluedPoint& x, double r, const SpaceParams& sp) {
    return ball_measure(x, 2.0 * r, sp) / ball_measure(x, r, sp);
}

}  // namespace bmvd
