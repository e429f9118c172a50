#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bmvd/space.hpp"

namespace bmvd {

// Two-sided estimate constants. Lower bound uses c_lower * sum of terms with
// each Gaussian rate multiplied by e_lower; upper uses c_upper and e_upper.
struct EnvelopeConstants {
    double c_lower = 1.0;
    double e_lower = 1.0;
    double c_upper = 1.0;
    double e_upper = 1.0;
};

enum class GapPolicy { ExtendBoth, Strict };

struct Thresholds {
    double t_small = 1.0;
    double t_large = 64.0;
    GapPolicy policy = GapPolicy::ExtendBoth;
};

// The (2,1) large-time estimates are stated from t >= 8; everything else
// defaults to 64.
inline Thresholds default_thresholds(const SpaceParams& sp) {
    Thresholds th;
    if (sp.d == 2 && sp.d_prime == 1) th.t_large = 8.0;
    return th;
}

// Estimate families, keyed by time scale and the dimension pair.
//   Small          : t <= t_small, any d >= d' >= 1
//   LargeLine      : d >= 3, d' = 1 (transient bulk glued to the half-line)
//   LargePlaneLine : d = 2, d' = 1
//   LargePlanePlane: d = d' = 2
//   LargeBulkPlane : d >= 3, d' = 2
//   LargeBulkBulk  : d >= d' >= 3
enum class Family { Small, LargeLine, LargePlaneLine, LargePlanePlane, LargeBulkPlane, LargeBulkBulk };

enum class RegimeCase {
    SmallSameDNear,   // both on the d-side, max radial excess <= 1
    SmallSameDFar,    // both on the d-side, max radial excess  > 1
    SmallSameDpNear,
    SmallSameDpFar,
    SmallCross,       // opposite parts, or either point is a*

    LineTailPair,     // both on the half-line, min excess > 1
    LineBulkPair,     // both on the d-side, min excess > 1
    LineMixed,        // cross pairs, a*, or same part with a point near a*

    PlaneLinePlanePair,
    PlaneLineMixedNear,  // line point vs plane point with excess <= 1
    PlaneLineMixedFar,
    PlaneLineLinePair,

    PlanePlaneSamePair,
    PlanePlaneCross,

    BulkPlaneBulkPair,
    BulkPlanePlanePair,
    BulkPlaneCross,

    BulkBulkPrimePair,  // both on the d'-side
    BulkBulkNearPair,   // both on the d-side, max excess <= 1
    BulkBulkFarPair,
    BulkBulkCross,
};

struct Regime {
    Family family;
    RegimeCase rc;
    bool operator==(const Regime& o) const { return family == o.family && rc == o.rc; }
};

inline std::string regime_id(const Regime& r) {
    switch (r.rc) {
        case RegimeCase::SmallSameDNear: return "small.same_d_near";
        case RegimeCase::SmallSameDFar: return "small.same_d_far";
        case RegimeCase::SmallSameDpNear: return "small.same_dp_near";
        case RegimeCase::SmallSameDpFar: return "small.same_dp_far";
        case RegimeCase::SmallCross: return "small.cross";
        case RegimeCase::LineTailPair: return "large_line.tail_pair";
        case RegimeCase::LineBulkPair: return "large_line.bulk_pair";
        case RegimeCase::LineMixed: return "large_line.mixed";
        case RegimeCase::PlaneLinePlanePair: return "large_plane_line.plane_pair";
        case RegimeCase::PlaneLineMixedNear: return "large_plane_line.mixed_near";
        case RegimeCase::PlaneLineMixedFar: return "large_plane_line.mixed_far";
        case RegimeCase::PlaneLineLinePair: return "large_plane_line.line_pair";
        case RegimeCase::PlanePlaneSamePair: return "large_plane_plane.same_pair";
        case RegimeCase::PlanePlaneCross: return "large_plane_plane.cross";
        case RegimeCase::BulkPlaneBulkPair: return "large_bulk_plane.bulk_pair";
        case RegimeCase::BulkPlanePlanePair: return "large_bulk_plane.plane_pair";
        case RegimeCase::BulkPlaneCross: return "large_bulk_plane.cross";
        case RegimeCase::BulkBulkPrimePair: return "large_bulk_bulk.prime_pair";
        case RegimeCase::BulkBulkNearPair: return "large_bulk_bulk.near_pair";
        case RegimeCase::BulkBulkFarPair: return "large_bulk_bulk.far_pair";
        case RegimeCase::BulkBulkCross: return "large_bulk_bulk.cross";
    }
    return "?";
}

inline Family large_family(const SpaceParams& sp) {
    if (sp.d_prime == 1) {
        if (sp.d >= 3) return Family::LargeLine;
        if (sp.d == 2) return Family::LargePlaneLine;
        throw std::domain_error("no large-time family for d = d' = 1 (the space is the line)");
    }
    if (sp.d_prime == 2) return sp.d == 2 ? Family::LargePlanePlane : Family::LargeBulkPlane;
    return Family::LargeBulkBulk;
}

// Every regime realizable for the given dimension pair.
inline std::vector<Regime> all_regimes(const SpaceParams& sp) {
    std::vector<Regime> out;
    for (RegimeCase rc : {RegimeCase::SmallSameDNear, RegimeCase::SmallSameDFar,
                          RegimeCase::SmallSameDpNear, RegimeCase::SmallSameDpFar,
                          RegimeCase::SmallCross})
        out.push_back({Family::Small, rc});
    if (sp.d == 1) return out;
    const Family f = large_family(sp);
    switch (f) {
        case Family::LargeLine:
            for (RegimeCase rc : {RegimeCase::LineTailPair, RegimeCase::LineBulkPair,
                                  RegimeCase::LineMixed})
                out.push_back({f, rc});
            break;
        case Family::LargePlaneLine:
            for (RegimeCase rc : {RegimeCase::PlaneLinePlanePair, RegimeCase::PlaneLineMixedNear,
                                  RegimeCase::PlaneLineMixedFar, RegimeCase::PlaneLineLinePair})
                out.push_back({f, rc});
            break;
        case Family::LargePlanePlane:
            for (RegimeCase rc : {RegimeCase::PlanePlaneSamePair, RegimeCase::PlanePlaneCross})
                out.push_back({f, rc});
            break;
        case Family::LargeBulkPlane:
            for (RegimeCase rc : {RegimeCase::BulkPlaneBulkPair, RegimeCase::BulkPlanePlanePair,
                                  RegimeCase::BulkPlaneCross})
                out.push_back({f, rc});
            break;
        case Family::LargeBulkBulk:
            for (RegimeCase rc : {RegimeCase::BulkBulkPrimePair, RegimeCase::BulkBulkNearPair,
                                  RegimeCase::BulkBulkFarPair, RegimeCase::BulkBulkCross})
                out.push_back({f, rc});
            break;
        default: break;
    }
    return out;
}

namespace detail {

// Point data as the shape formulas see it. `abs` is |x| with a* replaced by
// the gluing radius of the side the formula assigns the point to.
struct PointView {
    bool junction;
    double r;    // radial excess
    double abs;  // Euclidean norm, substituted at a*
};

inline PointView view(const GluedPoint& x, bool assigned_primary, const SpaceParams& sp) {
    if (x.part == Part::Junction) {
        return {true, 0.0, assigned_primary ? sp.eps : sp.eps_prime};
    }
    const bool primary = x.part == Part::SideD;
    if (primary != assigned_primary)
        throw std::logic_error("regime does not match the point pair (wrong side)");
    return {false, radial_excess(x, sp), euclid_norm(x.coords)};
}

inline bool on_closure(const GluedPoint& x, Part side) {
    return x.part == Part::Junction || x.part == side;
}

inline double pos(double z) { return z > 0.0 ? z : 0.0; }
inline double clamp1(double z) { return z < 1.0 ? z : 1.0; }

}  // namespace detail

inline Regime classify_small(const GluedPoint& x, const GluedPoint& y, const SpaceParams& sp) {
    if (x.part == Part::SideD && y.part == Part::SideD) {
        const double m = std::max(radial_excess(x, sp), radial_excess(y, sp));
        return {Family::Small, m <= 1.0 ? RegimeCase::SmallSameDNear : RegimeCase::SmallSameDFar};
    }
    if (x.part == Part::SideDPrime && y.part == Part::SideDPrime) {
        const double m = std::max(radial_excess(x, sp), radial_excess(y, sp));
        return {Family::Small, m <= 1.0 ? RegimeCase::SmallSameDpNear : RegimeCase::SmallSameDpFar};
    }
    return {Family::Small, RegimeCase::SmallCross};
}

inline Regime classify_large(const GluedPoint& x, const GluedPoint& y, const SpaceParams& sp) {
    const Family f = large_family(sp);
    const double rx = radial_excess(x, sp), ry = radial_excess(y, sp);
    const bool xd = x.part == Part::SideD, yd = y.part == Part::SideD;
    const bool xp = x.part == Part::SideDPrime, yp = y.part == Part::SideDPrime;
    switch (f) {
        case Family::LargeLine:
            if (xp && yp && std::min(rx, ry) > 1.0) return {f, RegimeCase::LineTailPair};
            if (xd && yd && std::min(rx, ry) > 1.0) return {f, RegimeCase::LineBulkPair};
            return {f, RegimeCase::LineMixed};
        case Family::LargePlaneLine: {
            const int n_line = (xp ? 1 : 0) + (yp ? 1 : 0);
            if (n_line == 0) return {f, RegimeCase::PlaneLinePlanePair};
            if (n_line == 2) return {f, RegimeCase::PlaneLineLinePair};
            const double r_plane = xp ? ry : rx;
            return {f, r_plane <= 1.0 ? RegimeCase::PlaneLineMixedNear
                                      : RegimeCase::PlaneLineMixedFar};
        }
        case Family::LargePlanePlane:
            if ((xd && yd) || (xp && yp)) return {f, RegimeCase::PlanePlaneSamePair};
            return {f, RegimeCase::PlanePlaneCross};
        case Family::LargeBulkPlane:
            if (xd && yd) return {f, RegimeCase::BulkPlaneBulkPair};
            if (xp && yp) return {f, RegimeCase::BulkPlanePlanePair};
            return {f, RegimeCase::BulkPlaneCross};
        case Family::LargeBulkBulk:
            if (xp && yp) return {f, RegimeCase::BulkBulkPrimePair};
            if (xd && yd)
                return {f, std::max(rx, ry) <= 1.0 ? RegimeCase::BulkBulkNearPair
                                                   : RegimeCase::BulkBulkFarPair};
            return {f, RegimeCase::BulkBulkCross};
        default: throw std::logic_error("classify_large: small family");
    }
}

// Returns the applicable regime(s). One entry inside the small or large
// window; in the gap, ExtendBoth returns both candidates and Strict throws.
inline std::vector<Regime> classify(double t, const GluedPoint& x, const GluedPoint& y,
                                    const SpaceParams& sp, const Thresholds& th) {
    if (!(t > 0.0)) throw std::domain_error("classify: t must be > 0");
    validate_point(x, sp);
    validate_point(y, sp);
    if (t <= th.t_small) return {classify_small(x, y, sp)};
    if (t >= th.t_large) return {classify_large(x, y, sp)};
    if (th.policy == GapPolicy::Strict)
        throw std::runtime_error("classify: t lies in the threshold gap (strict policy)");
    return {classify_small(x, y, sp), classify_large(x, y, sp)};
}

inline std::vector<Regime> classify(double t, const GluedPoint& x, const GluedPoint& y,
                                    const SpaceParams& sp) {
    return classify(t, x, y, sp, default_thresholds(sp));
}

// One additive term of an estimate: amp * exp(-g), g = (distance^2)/t.
struct ShapeTerm {
    double amp;
    double g;
};

struct ShapeFlags {
    bool negative_log = false;  // an unclamped log factor went negative
};

namespace detail {

// Radius hypotheses are checked with a whisker of slack so that both shapes
// can be evaluated on a shared sub-case boundary.
constexpr double kRadTol = 1e-9;

inline void check_case(bool ok) {
    if (!ok) throw std::logic_error("regime does not match the point pair");
}

}  // namespace detail

inline std::vector<ShapeTerm> shape_terms(const Regime& reg, double t, const GluedPoint& x,
                                          const GluedPoint& y, const SpaceParams& sp,
                                          ShapeFlags* flags = nullptr) {
    using namespace detail;
    validate_point(x, sp);
    validate_point(y, sp);
    const double rx = radial_excess(x, sp), ry = radial_excess(y, sp);
    const double rr = rho(x, y, sp);
    const double eucl = same_part_distance(x, y);
    const double sum = rx + ry;
    const double sqt = std::sqrt(t);

    auto same_near = [&](bool primary) {
        const int k = sp.side_dim(primary);
        const double a2 = clamp1(rx / sqt) * clamp1(ry / sqt) / std::pow(t, 0.5 * k);
        return std::vector<ShapeTerm>{{1.0 / sqt, rr * rr / t}, {a2, eucl * eucl / t}};
    };
    auto same_far = [&](bool primary) {
        const int k = sp.side_dim(primary);
        return std::vector<ShapeTerm>{{std::pow(t, -0.5 * k), rr * rr / t}};
    };

    switch (reg.rc) {
        case RegimeCase::SmallSameDNear:
            check_case(x.part == Part::SideD && y.part == Part::SideD && std::max(rx, ry) <= 1.0 + kRadTol);
            return same_near(true);
        case RegimeCase::SmallSameDFar:
            check_case(x.part == Part::SideD && y.part == Part::SideD && std::max(rx, ry) > 1.0 - kRadTol);
            return same_far(true);
        case RegimeCase::SmallSameDpNear:
            check_case(x.part == Part::SideDPrime && y.part == Part::SideDPrime &&
                       std::max(rx, ry) <= 1.0 + kRadTol);
            return same_near(false);
        case RegimeCase::SmallSameDpFar:
            check_case(x.part == Part::SideDPrime && y.part == Part::SideDPrime &&
                       std::max(rx, ry) > 1.0 - kRadTol);
            return same_far(false);
        case RegimeCase::SmallCross:
            check_case(x.part == Part::Junction || y.part == Part::Junction ||
                       x.part != y.part);
            return {{1.0 / sqt, rr * rr / t}};

        case RegimeCase::LineTailPair: {
            check_case(x.part == Part::SideDPrime && y.part == Part::SideDPrime &&
                       std::min(rx, ry) > 1.0 - kRadTol);
            const double ax = rx, ay = ry;
            return {{(ax * ay) / (sqt * ((ax + sqt) * (ay + sqt))), rr * rr / t}};
        }
        case RegimeCase::LineBulkPair: {
            check_case(x.part == Part::SideD && y.part == Part::SideD &&
                       std::min(rx, ry) > 1.0 - kRadTol);
            const double ax = euclid_norm(x.coords), ay = euclid_norm(y.coords);
            return {{std::pow(t, -1.5) / (std::pow(ax, sp.d - 2) * std::pow(ay, sp.d - 2)),
                     sum * sum / t},
                    {std::pow(t, -0.5 * sp.d), rr * rr / t}};
        }
        case RegimeCase::LineMixed: {
            // Canonical roles: one "line-like" abs enters linearly, one
            // "bulk-like" abs enters as a Green-function power.
            double line_abs, bulk_abs;
            const bool x_line = on_closure(x, Part::SideDPrime);
            const bool y_line = on_closure(y, Part::SideDPrime);
            const bool x_bulk = on_closure(x, Part::SideD);
            const bool y_bulk = on_closure(y, Part::SideD);
            if (x.part == Part::SideDPrime && y.part == Part::SideDPrime) {
                check_case(std::min(rx, ry) <= 1.0 + kRadTol);
                // Both on the half-line, one near a*: the near point plays the
                // central role.
                line_abs = std::max(rx, ry);
                bulk_abs = std::min(rx, ry);
            } else if (x.part == Part::SideD && y.part == Part::SideD) {
                check_case(std::min(rx, ry) <= 1.0 + kRadTol);
                const PointView nv = view(rx <= ry ? x : y, true, sp);
                const PointView fv = view(rx <= ry ? y : x, true, sp);
                line_abs = nv.abs;
                bulk_abs = fv.abs;
            } else {
                check_case((x_line && y_bulk) || (x_bulk && y_line));
                const GluedPoint& lpt = (x.part == Part::SideDPrime ||
                                         (x.part == Part::Junction && y.part == Part::SideD))
                                            ? x
                                            : y;
                const GluedPoint& bpt = (&lpt == &x) ? y : x;
                line_abs = view(lpt, false, sp).abs;
                bulk_abs = view(bpt, true, sp).abs;
            }
            return {{std::pow(t, -0.5 * sp.d), rr * rr / t},
                    {line_abs / (std::pow(t, 1.5) * std::pow(bulk_abs, sp.d - 2)), rr * rr / t}};
        }

        case RegimeCase::PlaneLinePlanePair:
            check_case(on_closure(x, Part::SideD) && on_closure(y, Part::SideD));
            return {{1.0 / t, rr * rr / t}};
        case RegimeCase::PlaneLineMixedNear:
        case RegimeCase::PlaneLineMixedFar: {
            const bool x_is_line = x.part == Part::SideDPrime;
            check_case(x_is_line || y.part == Part::SideDPrime);
            const GluedPoint& lpt = x_is_line ? x : y;
            const GluedPoint& ppt = x_is_line ? y : x;
            check_case(on_closure(ppt, Part::SideD));
            const double la = view(lpt, false, sp).abs;
            const double pr = radial_excess(ppt, sp);
            if (reg.rc == RegimeCase::PlaneLineMixedNear) {
                check_case(pr <= 1.0 + kRadTol);
                return {{(1.0 + la * std::log(t) / sqt) / t, rr * rr / t}};
            }
            check_case(pr > 1.0 - kRadTol);
            return {{(1.0 + la / sqt * std::log(1.0 + sqt / pr)) / t, rr * rr / t}};
        }
        case RegimeCase::PlaneLineLinePair: {
            check_case(x.part == Part::SideDPrime && y.part == Part::SideDPrime);
            const double ax = rx, ay = ry;
            return {{clamp1(ax / sqt) * clamp1(ay / sqt) / sqt, eucl * eucl / t},
                    {(1.0 + (ax + ay) * std::log(t) / sqt) / t, sum * sum / t}};
        }

        case RegimeCase::PlanePlaneSamePair:
            check_case(x.part != Part::Junction && x.part == y.part);
            return {{1.0 / t, rr * rr / t}};
        case RegimeCase::PlanePlaneCross: {
            const bool x_on_d = on_closure(x, Part::SideD) &&
                                !(x.part == Part::Junction && y.part == Part::SideD);
            const GluedPoint& xd = x_on_d ? x : y;
            const GluedPoint& yp = x_on_d ? y : x;
            check_case(on_closure(xd, Part::SideD) && on_closure(yp, Part::SideDPrime));
            const double ax = view(xd, true, sp).abs, ay = view(yp, false, sp).abs;
            const double lt = std::log(sqt);
            auto U = [&](double a) { return 1.0 / std::log(t + a) + pos(1.0 - std::log(a) / lt); };
            const double lx = std::log(ax), ly = std::log(ay);
            if (flags && (lx < 0.0 || ly < 0.0)) flags->negative_log = true;
            const double amp = (U(ax) * U(ay) + U(ax) * ly / std::log(1.0 + t * ay) +
                                U(ay) * lx / std::log(1.0 + t * ax)) /
                               t;
            return {{amp, rr * rr / t}};
        }

        case RegimeCase::BulkPlaneBulkPair: {
            check_case(x.part == Part::SideD && y.part == Part::SideD);
            const double ax = euclid_norm(x.coords), ay = euclid_norm(y.coords);
            const double lt2 = std::pow(std::log(t), 2);
            return {{1.0 / (t * lt2 * (std::pow(ax, sp.d - 2) * std::pow(ay, sp.d - 2))),
                     sum * sum / t},
                    {std::pow(t, -0.5 * sp.d), rr * rr / t}};
        }
        case RegimeCase::BulkPlanePlanePair: {
            check_case(x.part == Part::SideDPrime && y.part == Part::SideDPrime);
            const double ax = euclid_norm(x.coords), ay = euclid_norm(y.coords);
            const double amp = (std::log1p(ax) * std::log1p(ay)) /
                               (t * (std::log1p(t * ax) * std::log1p(t * ay)));
            return {{amp, rr * rr / t}};
        }
        case RegimeCase::BulkPlaneCross: {
            const bool x_on_d = on_closure(x, Part::SideD) &&
                                !(x.part == Part::Junction && y.part == Part::SideD);
            const GluedPoint& xd = x_on_d ? x : y;
            const GluedPoint& yp = x_on_d ? y : x;
            check_case(on_closure(xd, Part::SideD) && on_closure(yp, Part::SideDPrime));
            const double ax = view(xd, true, sp).abs, ay = view(yp, false, sp).abs;
            const double lt = std::log(t);
            const double H = 1.0 / std::pow(std::log1p(ay), 2) +
                             pos(0.5 / std::log1p(ay) - 1.0 / lt);
            return {{1.0 / (t * lt * lt * std::pow(ax, sp.d - 2)), rr * rr / t},
                    {H * std::pow(t, -0.5 * sp.d), rr * rr / t}};
        }

        case RegimeCase::BulkBulkPrimePair:
            check_case(x.part == Part::SideDPrime && y.part == Part::SideDPrime);
            return {{std::pow(t, -0.5 * sp.d_prime), rr * rr / t}};
        case RegimeCase::BulkBulkNearPair:
            check_case(x.part == Part::SideD && y.part == Part::SideD && std::max(rx, ry) <= 1.0 + kRadTol);
            return {{std::pow(t, -0.5 * sp.d_prime), rr * rr / t}};
        case RegimeCase::BulkBulkFarPair: {
            check_case(x.part == Part::SideD && y.part == Part::SideD &&
                       std::max(rx, ry) > 1.0 - kRadTol);
            const double ax = euclid_norm(x.coords), ay = euclid_norm(y.coords);
            return {{std::pow(t, -0.5 * sp.d_prime) /
                         (std::pow(ax, sp.d - 2) * std::pow(ay, sp.d - 2)),
                     sum * sum / t},
                    {std::pow(t, -0.5 * sp.d), rr * rr / t}};
        }
        case RegimeCase::BulkBulkCross: {
            const bool x_on_d = on_closure(x, Part::SideD) &&
                                !(x.part == Part::Junction && y.part == Part::SideD);
            const GluedPoint& xd = x_on_d ? x : y;
            const GluedPoint& yp = x_on_d ? y : x;
            check_case(on_closure(xd, Part::SideD) && on_closure(yp, Part::SideDPrime));
            const double ax = view(xd, true, sp).abs, ay = view(yp, false, sp).abs;
            return {{std::pow(t, -0.5 * sp.d_prime) / std::pow(ax, sp.d - 2), rr * rr / t},
                    {std::pow(t, -0.5 * sp.d) / std::pow(ay, sp.d_prime - 2), rr * rr / t}};
        }
    }
    throw std::logic_error("shape_terms: unhandled regime");
}

inline double shape(const Regime& reg, double t, const GluedPoint& x, const GluedPoint& y,
                    const SpaceParams& sp, ShapeFlags* flags = nullptr) {
    double s = 0.0;
    for (const ShapeTerm& term : shape_terms(reg, t, x, y, sp, flags))
        s += term.amp * std::exp(-term.g);
    return s;
}

// Lower/upper envelope values; the rate constants scale each term's Gaussian
// argument.
inline std::pair<double, double> envelope(const Regime& reg, double t, const GluedPoint& x,
                                          const GluedPoint& y, const SpaceParams& sp,
                                          const EnvelopeConstants& k,
                                          ShapeFlags* flags = nullptr) {
    double lo = 0.0, hi = 0.0;
    for (const ShapeTerm& term : shape_terms(reg, t, x, y, sp, flags)) {
        lo += term.amp * std::exp(-k.e_lower * term.g);
        hi += term.amp * std::exp(-k.e_upper * term.g);
    }
    return {k.c_lower * lo, k.c_upper * hi};
}

// Kernel of Brownian motion killed on exiting one exterior domain, as a
// shape in (t, |x|_rho, |y|_rho, |x-y|). Stated for side dimension >= 2.
inline double killed_part_shape(double t, int k_dim, double rx, double ry, double dist,
                                double rate = 1.0) {
    if (k_dim < 2) throw std::domain_error("killed part shape requires side dimension >= 2");
    const double clamp_scale = std::min(std::sqrt(t), 1.0);
    const double a = std::min(1.0, rx / clamp_scale) * std::min(1.0, ry / clamp_scale);
    return std::pow(t, -0.5 * k_dim) * a * std::exp(-rate * dist * dist / t);
}

inline std::pair<double, double> killed_part_envelope_r(double t, int k_dim, double rx, double ry,
                                                        double dist, const EnvelopeConstants& k) {
    return {k.c_lower * killed_part_shape(t, k_dim, rx, ry, dist, k.e_lower),
            k.c_upper * killed_part_shape(t, k_dim, rx, ry, dist, k.e_upper)};
}

inline std::pair<double, double> killed_part_envelope(double t, const GluedPoint& x,
                                                      const GluedPoint& y, const SpaceParams& sp,
                                                      const EnvelopeConstants& k) {
    if (x.part == Part::Junction || y.part == Part::Junction || x.part != y.part)
        throw std::domain_error("killed part kernel needs both points on one part");
    const bool primary = x.part == Part::SideD;
    const int kd = sp.side_dim(primary);
    return killed_part_envelope_r(t, kd, radial_excess(x, sp), radial_excess(y, sp),
                                  same_part_distance(x, y), k);
}

enum class D2HittingExponent { Printed, Squared };

// Unit-constant shape of P_x(sigma_{a*} in ds)/ds on a side of dimension >= 2.
// The printed two-dimensional form carries exp(-|x|_rho/s); the squared
// variant is reported alongside it.
inline double hitting_density_shape(double s, const GluedPoint& x, const SpaceParams& sp,
                                    D2HittingExponent d2exp = D2HittingExponent::Printed) {
    if (x.part == Part::Junction) throw std::domain_error("hitting density shape: x must not be a*");
    const bool primary = x.part == Part::SideD;
    const int k = sp.side_dim(primary);
    if (k == 1)
        throw std::domain_error(
            "hitting density shape: 1-dimensional side uses the exact first-passage law");
    const double r = radial_excess(x, sp);
    const double a = euclid_norm(x.coords);
    if (k >= 3) {
        return (r / a) * std::exp(-r * r / s) /
               (std::pow(s, 0.5 * k) + std::pow(s, 1.5) * std::pow(a, 0.5 * (k - 3)));
    }
    const double expo = d2exp == D2HittingExponent::Printed ? r / s : r * r / s;
    return (r / a) * (1.0 + std::log(a)) /
           ((1.0 + std::log1p(s / a)) * (1.0 + std::log(s + a))) *
           (std::sqrt(a + s) / std::pow(s, 1.5)) * std::exp(-expo);
}

// Exact first-passage density to 0 of Brownian motion (variance s) from a > 0.
inline double hitting_density_exact_1d(double s, double a) {
    if (!(a > 0.0) || !(s > 0.0)) throw std::domain_error("first-passage density: need a, s > 0");
    return a / std::sqrt(2.0 * M_PI * s * s * s) * std::exp(-a * a / (2.0 * s));
}

struct HittingCdfValue {
    double value;
    bool extended;  // evaluated outside the stated hypotheses (d = 2, |x|_rho < 1)
};

inline HittingCdfValue hitting_cdf_shape(double t, const GluedPoint& x, const SpaceParams& sp) {
    if (x.part == Part::Junction) throw std::domain_error("hitting cdf shape: x must not be a*");
    const bool primary = x.part == Part::SideD;
    const int k = sp.side_dim(primary);
    const double r = radial_excess(x, sp);
    const double a = euclid_norm(x.coords);
    if (k >= 3) {
        if (!(t > 1.0)) throw std::domain_error("hitting cdf shape: requires t > 1 for dim >= 3");
        return {std::pow(a, 2 - k) * std::exp(-r * r / t), false};
    }
    if (k != 2) throw std::domain_error("hitting cdf shape: side dimension must be >= 2");
    if (r < 1.0) return {1.0 / std::log(std::exp(1.0) + a), true};
    if (t < 2.0 * a * a) return {std::exp(-r * r / t) / std::log(a), false};
    return {1.0 - std::log(a) / std::log(std::sqrt(t)), false};
}

// On-diagonal decay rate p(t, a*, a*), by dimension regime.
inline double ondiag_rate(double t, const SpaceParams& sp) {
    if (!(t > 0.0)) throw std::domain_error("ondiag_rate: t must be > 0");
    const double small = 1.0 / std::sqrt(t);
    if (sp.d_prime >= 3) return std::min(small, std::pow(t, -0.5 * sp.d_prime));
    if (sp.d_prime == 2) {
        if (sp.d == 2) return std::min(small, 1.0 / t);
        return std::min(small, 1.0 / ((t + 1.0) * std::pow(std::log1p(t), 2)));
    }
    // d' = 1: recurrent line against a transient bulk decays like t^{-3/2};
    // with a 2-dimensional bulk the large-time rate is 1/t, and for d = 1 the
    // space is the real line.
    if (sp.d >= 3) return std::min(small, std::pow(t, -1.5));
    if (sp.d == 2) return std::min(small, 1.0 / t);
    return small;
}

// Numerical check of the exponential-comparison relations between
// exp(-rho^2/t), exp(-|x-y|^2/t) and exp(-(|x|_rho+|y|_rho)^2/t), with the
// explicit constants from their proofs.
struct ExpComparisonReport {
    int case_id;      // 1: max > 1 and min >= 1; 2: max <= 1; 3: straddling
    bool ok[3];
    double slack;     // additive exponent slack used by the relation
    bool all_ok() const { return ok[0] && ok[1] && ok[2]; }
};

inline ExpComparisonReport exp_comparison_check(double t, const GluedPoint& x, const GluedPoint& y,
                                                const SpaceParams& sp, double T) {
    if (x.part == Part::Junction || y.part == Part::Junction || x.part != y.part)
        throw std::domain_error("exp comparison: points must lie on one part");
    if (!(t >= T)) throw std::domain_error("exp comparison: requires t >= T");
    const bool primary = x.part == Part::SideD;
    const double e = sp.side_eps(primary);
    const double rx = radial_excess(x, sp), ry = radial_excess(y, sp);
    const double sum = rx + ry;
    const double eucl = same_part_distance(x, y);
    const double rr = std::min(sum, eucl);
    const double tol = 1e-12 * (1.0 + sum + eucl);

    ExpComparisonReport rep{};
    if (std::max(rx, ry) <= 1.0) {
        rep.case_id = 2;
        const double abs_sum = euclid_norm(x.coords) + euclid_norm(y.coords);
        rep.ok[0] = sum * sum / t <= 4.0 / T + tol;
        rep.ok[1] = eucl <= abs_sum + tol;
        rep.ok[2] = abs_sum * abs_sum <= 8.0 * e * e + 2.0 * sum * sum + tol;
        rep.slack = 4.0 / T + 8.0 * e * e / T;
        return rep;
    }
    const bool straddle = std::min(rx, ry) < 1.0;
    rep.case_id = straddle ? 3 : 1;
    rep.ok[0] = rr <= eucl + tol;
    rep.ok[1] = (rr >= eucl - tol) || (eucl <= (2.0 * e + 1.0) * rr + tol);
    if (straddle) {
        const double b = std::min(rx, ry);
        rep.ok[2] = sum * sum / t - 2.0 * eucl * eucl / t <= 8.0 * b * b / T + tol;
        rep.slack = 8.0 * b * b / T;
    } else {
        rep.ok[2] = rr <= sum + tol;
        rep.slack = std::pow(2.0 * e + 1.0, 2);
    }
    return rep;
}

}  // namespace bmvd
