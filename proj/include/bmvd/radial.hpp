#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "bmvd/numerics.hpp"
#include "bmvd/space.hpp"

namespace bmvd {

// Speed-measure weight of the signed radial process: the surface area of the
// sphere through u^{-1}(y), with the d'-side carrying the factor p. The jump
// across 0 encodes the junction skew.
inline double radial_weight(double y, const SpaceParams& sp) {
    if (y >= 0.0) return sp.d == 1 ? 1.0 : sp.omega_d * std::pow(y + sp.eps, sp.d - 1);
    return sp.p * (sp.d_prime == 1
                       ? 1.0
                       : sp.omega_dp * std::pow(-y + sp.eps_prime, sp.d_prime - 1));
}

// Closed-form integral of the weight over [a, b] within one side.
inline double radial_weight_integral_oneside(double a, double b, const SpaceParams& sp) {
    if (b <= a) return 0.0;
    if (a >= 0.0) {
        if (sp.d == 1) return b - a;
        return sp.omega_d / sp.d * (std::pow(b + sp.eps, sp.d) - std::pow(a + sp.eps, sp.d));
    }
    if (sp.d_prime == 1) return sp.p * (b - a);
    return sp.p * sp.omega_dp / sp.d_prime *
           (std::pow(-a + sp.eps_prime, sp.d_prime) - std::pow(-b + sp.eps_prime, sp.d_prime));
}

inline double radial_weight_integral(double a, double b, const SpaceParams& sp) {
    if (b <= a) return 0.0;
    if (a >= 0.0 || b <= 0.0) return radial_weight_integral_oneside(a, b, sp);
    return radial_weight_integral_oneside(a, 0.0, sp) + radial_weight_integral_oneside(0.0, b, sp);
}

struct GridGrading {
    double ratio = 1.05;   // cell growth factor away from the junction
    double h_min = 1e-3;   // smallest cell, next to the junction
};

// Finite-volume grid for the generator (1/2) w^{-1} (w u')'. Nodes carry
// control volumes [midpoint, midpoint]; cond[i] couples nodes i and i+1.
struct RadialGrid {
    SpaceParams params;
    std::vector<double> nodes;
    std::vector<double> mass;
    std::vector<double> cond;
    size_t j0 = 0;  // index of the node at 0

    size_t size() const { return nodes.size(); }

    size_t nearest_node(double y) const {
        const auto it = std::lower_bound(nodes.begin(), nodes.end(), y);
        if (it == nodes.begin()) return 0;
        if (it == nodes.end()) return nodes.size() - 1;
        const size_t i = static_cast<size_t>(it - nodes.begin());
        return (y - nodes[i - 1] <= nodes[i] - y) ? i - 1 : i;
    }
};

namespace detail {

// Cell sizes from the junction outward: h_min growing by `ratio`, capped so
// that exactly n cells cover the span.
inline std::vector<double> graded_sizes(double span, size_t n, const GridGrading& gr) {
    if (n < 1 || !(span > 0.0)) throw std::invalid_argument("graded_sizes: degenerate span");
    const double q = std::max(gr.ratio, 1.0 + 1e-12);
    const double h0 = gr.h_min;
    std::vector<double> sizes(n);
    auto total = [&](double cap) {
        double s = 0.0, h = h0;
        for (size_t k = 0; k < n; ++k) {
            s += std::min(h, cap);
            h *= q;
        }
        return s;
    };
    if (h0 * n >= span) {
        std::fill(sizes.begin(), sizes.end(), span / n);
        return sizes;
    }
    const double geo_total = total(std::numeric_limits<double>::infinity());
    if (geo_total <= span) {
        // Not enough cells even with pure geometric growth; rescale.
        double h = h0 * (span / geo_total);
        for (size_t k = 0; k < n; ++k, h *= q) sizes[k] = h;
        return sizes;
    }
    double lo = span / n, hi = span;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (total(mid) < span ? lo : hi) = mid;
    }
    const double cap = 0.5 * (lo + hi);
    double h = h0, s = 0.0;
    for (size_t k = 0; k < n; ++k) {
        sizes[k] = std::min(h, cap);
        s += sizes[k];
        h *= q;
    }
    // Spread the bisection residual over the capped tail.
    const double corr = span / s;
    for (double& v : sizes) v *= corr;
    return sizes;
}

}  // namespace detail

inline RadialGrid build_grid(const SpaceParams& sp, double R_minus, double R_plus, size_t n_cells,
                             const GridGrading& grading = {}) {
    if (!(R_minus > 0.0) || !(R_plus > 0.0))
        throw std::invalid_argument("build_grid: spans must be positive");
    if (n_cells < 64) throw std::invalid_argument("build_grid: need at least 64 cells");

    const size_t n_plus =
        std::max<size_t>(16, static_cast<size_t>(n_cells * R_plus / (R_plus + R_minus)));
    const size_t n_minus = std::max<size_t>(16, n_cells - std::min(n_cells - 16, n_plus));

    const auto up = detail::graded_sizes(R_plus, n_plus, grading);
    const auto dn = detail::graded_sizes(R_minus, n_minus, grading);

    RadialGrid g;
    g.params = sp;
    g.nodes.reserve(n_minus + n_plus + 1);
    double y = 0.0;
    std::vector<double> neg;
    for (double h : dn) {
        y -= h;
        neg.push_back(y);
    }
    for (auto it = neg.rbegin(); it != neg.rend(); ++it) g.nodes.push_back(*it);
    g.j0 = g.nodes.size();
    g.nodes.push_back(0.0);
    y = 0.0;
    for (double h : up) {
        y += h;
        g.nodes.push_back(y);
    }

    const size_t n = g.nodes.size();
    g.mass.resize(n);
    g.cond.resize(n - 1);
    for (size_t i = 0; i + 1 < n; ++i) {
        const double mid = 0.5 * (g.nodes[i] + g.nodes[i + 1]);
        g.cond[i] = radial_weight(mid, sp) / (g.nodes[i + 1] - g.nodes[i]);
    }
    for (size_t i = 0; i < n; ++i) {
        const double lo = i == 0 ? g.nodes[0] : 0.5 * (g.nodes[i - 1] + g.nodes[i]);
        const double hi = i + 1 == n ? g.nodes[n - 1] : 0.5 * (g.nodes[i] + g.nodes[i + 1]);
        g.mass[i] = radial_weight_integral(lo, hi, sp);
        if (!(g.mass[i] > 0.0)) throw std::runtime_error("build_grid: non-positive cell mass");
    }
    return g;
}

enum class BoundaryType { Absorbing, Reflecting };

struct Field {
    std::vector<double> u;
};

inline Field delta_field(const RadialGrid& g, size_t j) {
    Field f;
    f.u.assign(g.size(), 0.0);
    f.u[j] = 1.0 / g.mass[j];
    return f;
}

inline double field_mass(const RadialGrid& g, const Field& f) {
    double s = 0.0;
    for (size_t i = 0; i < g.size(); ++i) s += g.mass[i] * f.u[i];
    return s;
}

// Evolution with scratch buffers. theta = 1/2 gives Crank-Nicolson, theta = 1
// implicit Euler; both keep the M-weighted operator symmetric.
class Evolver {
  public:
    Evolver(const RadialGrid& g, BoundaryType bc, bool junction_absorbing)
        : g_(g), bc_(bc), jabs_(junction_absorbing) {
        const size_t n = g.size();
        lower_.resize(n);
        diag_.resize(n);
        upper_.resize(n);
        rhs_.resize(n);
    }

    void step(Field& f, double dt, double theta) {
        const size_t n = g_.size();
        auto& u = f.u;
        if (bc_ == BoundaryType::Absorbing) u[0] = u[n - 1] = 0.0;
        if (jabs_) u[g_.j0] = 0.0;

        // rhs = u + (1-theta) dt A u ; matrix = I - theta dt A
        for (size_t i = 0; i < n; ++i) {
            const double kl = i > 0 ? g_.cond[i - 1] : 0.0;
            const double kr = i + 1 < n ? g_.cond[i] : 0.0;
            const double ul = i > 0 ? u[i - 1] : 0.0;
            const double ur = i + 1 < n ? u[i + 1] : 0.0;
            const double au = (kr * (ur - u[i]) - kl * (u[i] - ul)) / (2.0 * g_.mass[i]);
            rhs_[i] = u[i] + (1.0 - theta) * dt * au;
            const double c = theta * dt / (2.0 * g_.mass[i]);
            lower_[i] = -c * kl;
            upper_[i] = -c * kr;
            diag_[i] = 1.0 + c * (kl + kr);
        }
        if (bc_ == BoundaryType::Absorbing) {
            pin(0);
            pin(n - 1);
        }
        if (jabs_) pin(g_.j0);
        solve_tridiagonal(lower_, diag_, upper_, rhs_);
        u.swap(rhs_);
    }

    void cn_step(Field& f, double dt) { step(f, dt, 0.5); }
    void ie_step(Field& f, double dt) { step(f, dt, 1.0); }

  private:
    void pin(size_t i) {
        lower_[i] = upper_[i] = 0.0;
        diag_[i] = 1.0;
        rhs_[i] = 0.0;
    }

    const RadialGrid& g_;
    BoundaryType bc_;
    bool jabs_;
    std::vector<double> lower_, diag_, upper_, rhs_;
};

struct SolveOpts {
    double steps_per_decade = 2048;
    int smoothing_steps = 32;       // implicit-Euler startup (Rannacher)
    double ramp_fraction = 1e-2;    // startup horizon relative to the first output time
    BoundaryType bc = BoundaryType::Absorbing;
    bool junction_absorbing = false;
};

// Evolves `f` from time 0 through every time in `times` (sorted ascending),
// invoking visit(index, t, field) at each one. Steps grow geometrically with
// the elapsed time after an implicit-Euler ramp that smooths delta data.
inline void evolve_snapshots(const RadialGrid& g, Field& f, const std::vector<double>& times,
                             const SolveOpts& opts,
                             const std::function<void(size_t, double, const Field&)>& visit) {
    if (times.empty()) return;
    for (size_t i = 0; i + 1 < times.size(); ++i)
        if (!(times[i] < times[i + 1])) throw std::invalid_argument("snapshot times must increase");
    if (!(times.front() > 0.0)) throw std::invalid_argument("snapshot times must be positive");

    Evolver ev(g, opts.bc, opts.junction_absorbing);
    const double t_floor = times.front() * opts.ramp_fraction;
    double tau = 0.0;
    const int m = std::max(opts.smoothing_steps, 1);
    for (int k = 0; k < m; ++k) ev.ie_step(f, t_floor / m);
    tau = t_floor;

    const double grow = std::pow(10.0, 1.0 / opts.steps_per_decade) - 1.0;
    size_t idx = 0;
    while (idx < times.size()) {
        const double target = times[idx];
        while (tau < target * (1.0 - 1e-14)) {
            const double dt = std::min(tau * grow, target - tau);
            ev.cn_step(f, dt);
            tau += dt;
        }
        tau = target;
        visit(idx, target, f);
        ++idx;
    }
}

// Uniform-step Crank-Nicolson evolution of an initial field to horizon t.
inline Field evolve(const RadialGrid& g, const Field& initial, double t, double dt,
                    BoundaryType bc = BoundaryType::Absorbing, bool junction_absorbing = false) {
    if (!(dt > 0.0)) throw std::invalid_argument("evolve: dt must be > 0");
    Field f = initial;
    Evolver ev(g, bc, junction_absorbing);
    double tau = 0.0;
    while (tau < t * (1.0 - 1e-14)) {
        const double step = std::min(dt, t - tau);
        ev.cn_step(f, step);
        tau += step;
    }
    return f;
}

// Kernel with respect to the speed measure w(y) dy. For radially reducible
// point pairs this is the full heat kernel p(t, x, y).
struct KernelField {
    double t = 0.0;
    size_t source = 0;
    std::vector<double> u;
    double leak = 0.0;  // 1 - sum M_i u_i
};

inline KernelField kernel_field(const RadialGrid& g, double t, size_t j,
                                const SolveOpts& opts = {}) {
    Field f = delta_field(g, j);
    KernelField out;
    evolve_snapshots(g, f, {t}, opts, [&](size_t, double tt, const Field& ff) {
        out.t = tt;
        out.u = ff.u;
    });
    out.source = j;
    out.leak = 1.0 - field_mass(g, {out.u});
    return out;
}

inline double kernel(const RadialGrid& g, double t, size_t i, size_t j,
                     const SolveOpts& opts = {}) {
    return kernel_field(g, t, j, opts).u[i];
}

// dt is a budget hint: the geometric schedule is chosen so its final (largest)
// step does not exceed dt.
inline double kernel(const RadialGrid& g, double t, size_t i, size_t j, double dt) {
    SolveOpts opts;
    opts.steps_per_decade = std::max(64.0, t * M_LN10 / dt);
    return kernel(g, t, i, j, opts);
}

// Instantaneous absorption rate at the junction node (u[j0] held at zero).
inline double junction_flux(const RadialGrid& g, const Field& f) {
    const size_t j0 = g.j0;
    double flux = 0.0;
    if (j0 > 0) flux += g.cond[j0 - 1] * f.u[j0 - 1];
    if (j0 + 1 < g.size()) flux += g.cond[j0] * f.u[j0 + 1];
    return 0.5 * flux;
}

struct HittingDensity {
    std::vector<double> s;
    std::vector<double> density;  // flux absorbed at the junction per unit time
    std::vector<double> cdf;      // P(sigma_0 <= s)
};

// First-passage law of the signed radial process to 0, started from the grid
// node `a`. Outer boundaries reflect so that all mass loss is junction
// absorption.
inline HittingDensity hitting_density_numeric(const RadialGrid& g, size_t a,
                                              const std::vector<double>& s_grid,
                                              SolveOpts opts = {}) {
    if (a == g.j0) throw std::invalid_argument("hitting_density_numeric: source must not be 0");
    opts.junction_absorbing = true;
    opts.bc = BoundaryType::Reflecting;
    Field f = delta_field(g, a);
    HittingDensity out;
    out.s = s_grid;
    out.density.resize(s_grid.size());
    out.cdf.resize(s_grid.size());
    evolve_snapshots(g, f, s_grid, opts, [&](size_t idx, double, const Field& ff) {
        out.density[idx] = junction_flux(g, ff);
        out.cdf[idx] = 1.0 - field_mass(g, ff);
    });
    return out;
}

// Tabulated kernel column p_w(tau, 0, y_target) on a geometric time grid,
// interpolated in log-log. One evolution serves every through-junction
// composition on this grid.
class JunctionKernelTable {
  public:
    JunctionKernelTable(const RadialGrid& g, std::vector<size_t> targets, double tau_min,
                        double tau_max, const SolveOpts& opts = {}, size_t per_decade = 96)
        : targets_(std::move(targets)) {
        const double decades = std::log10(tau_max / tau_min);
        const size_t n = std::max<size_t>(8, static_cast<size_t>(decades * per_decade) + 1);
        taus_ = logspace(tau_min, tau_max, n);
        values_.assign(targets_.size(), std::vector<double>(n));
        Field f = delta_field(g, g.j0);
        evolve_snapshots(g, f, taus_, opts, [&](size_t idx, double, const Field& ff) {
            for (size_t k = 0; k < targets_.size(); ++k) values_[k][idx] = ff.u[targets_[k]];
        });
    }

    // Kernel value at lag tau for the k-th target; tau below the table floor
    // decays to zero through the stored first column.
    double value(double tau, size_t k) const {
        if (tau <= 0.0) return 0.0;
        return interp_loglog(taus_, values_[k], tau);
    }

    const std::vector<size_t>& targets() const { return targets_; }

  private:
    std::vector<size_t> targets_;
    std::vector<double> taus_;
    std::vector<std::vector<double>> values_;
};

// Tabulated junction-hitting law from one source node.
class HittingTable {
  public:
    HittingTable(const RadialGrid& g, size_t source, double s_min, double s_max,
                 const SolveOpts& opts = {}, size_t per_decade = 96)
        : source_(source) {
        const double decades = std::log10(s_max / s_min);
        const size_t n = std::max<size_t>(8, static_cast<size_t>(decades * per_decade) + 1);
        const auto sg = logspace(s_min, s_max, n);
        HittingDensity hd = hitting_density_numeric(g, source, sg, opts);
        s_ = hd.s;
        h_ = hd.density;
        cdf_ = hd.cdf;
    }

    double density(double s) const { return s <= 0.0 ? 0.0 : interp_loglog(s_, h_, s); }
    double cdf(double s) const {
        if (s <= 0.0) return 0.0;
        if (s >= s_.back()) return cdf_.back();
        return interp_loglog(s_, cdf_, s);
    }
    size_t source() const { return source_; }

  private:
    size_t source_;
    std::vector<double> s_, h_, cdf_;
};

// Geometric integration nodes for [0, t], dense at both endpoints.
inline std::vector<double> bar_p_s_nodes(double t, size_t half_points = 320,
                                         double edge_fraction = 1e-8) {
    std::vector<double> s;
    const auto lead = logspace(t * edge_fraction, 0.5 * t, half_points);
    s.push_back(0.0);
    for (double v : lead) s.push_back(v);
    for (auto it = lead.rbegin(); it != lead.rend(); ++it)
        if (t - *it > 0.5 * t) s.push_back(t - *it);
    s.push_back(t);
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

// Through-junction component of the same-part kernel:
//   bar_p(t, x, y) = int_0^t p_w(t-s, 0, u(y)) dP_x(sigma <= s)
// evaluated by trapezoid over tabulated factors.
inline double bar_p_from_tables(double t, const HittingTable& hx, const JunctionKernelTable& k0,
                                size_t target_idx, size_t half_points = 320) {
    const auto s = bar_p_s_nodes(t, half_points);
    double acc = 0.0;
    double prev = 0.0;
    double prev_s = 0.0;
    for (size_t i = 0; i < s.size(); ++i) {
        const double tau = t - s[i];
        const double f = tau <= 0.0 ? 0.0 : hx.density(s[i]) * k0.value(tau, target_idx);
        if (i > 0) acc += 0.5 * (f + prev) * (s[i] - prev_s);
        prev = f;
        prev_s = s[i];
    }
    return acc;
}

// One-shot bar_p for a same-part pair of radii (positive side when
// `primary_side`). Campaign code uses the table classes directly.
inline double same_part_kernel_bar(const RadialGrid& g, double t, double rx, double ry,
                                   bool primary_side, const SolveOpts& opts = {}) {
    const double sgn = primary_side ? 1.0 : -1.0;
    const size_t nx = g.nearest_node(sgn * rx);
    const size_t ny = g.nearest_node(sgn * ry);
    if (nx == g.j0 && ny == g.j0) return kernel(g, t, g.j0, g.j0, opts);
    const double tau_min = t * 1e-8;
    JunctionKernelTable k0(g, {ny}, tau_min, t, opts);
    if (nx == g.j0) return k0.value(t, 0);
    HittingTable hx(g, nx, tau_min, t, opts);
    return bar_p_from_tables(t, hx, k0, 0);
}

inline double same_part_kernel_bar(const RadialGrid& g, double t, const GluedPoint& x,
                                   const GluedPoint& y, const SolveOpts& opts = {}) {
    const SpaceParams& sp = g.params;
    const bool x_junction = x.part == Part::Junction, y_junction = y.part == Part::Junction;
    if (!x_junction && !y_junction && x.part != y.part)
        throw std::domain_error("same_part_kernel_bar: points must share a part");
    const bool primary = x_junction ? y.part != Part::SideDPrime : x.part == Part::SideD;
    return same_part_kernel_bar(g, t, radial_excess(x, sp), radial_excess(y, sp), primary, opts);
}

}  // namespace bmvd
