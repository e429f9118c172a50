#pragma once

#include <cmath>
#include <sstream>

#include "bmvd/harness.hpp"

namespace bmvd {

// ---------------------------------------------------------------------------
// On-diagonal campaign: p(t, a*, a*) = p_w(t, 0, 0)

struct OndiagReport {
    std::vector<double> t;
    std::vector<double> p;
    std::vector<double> rate;   // reference shape ondiag_rate(t)
    double slope = 0.0;         // log-log least squares over the window
    double band_factor = 0.0;   // max/min of p * (t+1) log^2(t+1) (log-corrected case)
    bool log_case = false;
};

inline RadialGrid ondiag_grid(const CampaignConfig& cfg) {
    const double span = cfg.span_margin * std::sqrt(cfg.od_t_max) + 1.0;
    GridGrading gr{cfg.grading_ratio, cfg.h_min_eff(cfg.od_t_min)};
    return build_grid(cfg.params, span, span, cfg.n_cells, gr);
}

inline OndiagReport ondiag_campaign(const CampaignConfig& cfg) {
    const RadialGrid g = ondiag_grid(cfg);
    SolveOpts opts;
    opts.steps_per_decade = cfg.steps_per_decade;
    OndiagReport rep;
    rep.t = logspace(cfg.od_t_min, cfg.od_t_max, cfg.od_n);
    rep.p.resize(rep.t.size());
    Field f = delta_field(g, g.j0);
    evolve_snapshots(g, f, rep.t, opts,
                     [&](size_t i, double, const Field& ff) { rep.p[i] = ff.u[g.j0]; });
    std::vector<double> lt(rep.t.size()), lp(rep.t.size());
    for (size_t i = 0; i < rep.t.size(); ++i) {
        lt[i] = std::log(rep.t[i]);
        lp[i] = std::log(rep.p[i]);
        rep.rate.push_back(ondiag_rate(rep.t[i], cfg.params));
    }
    rep.slope = ls_slope(lt, lp);
    rep.log_case = cfg.params.d >= 3 && cfg.params.d_prime == 2;
    if (rep.log_case) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (size_t i = 0; i < rep.t.size(); ++i) {
            const double q = rep.p[i] * (rep.t[i] + 1.0) * std::pow(std::log1p(rep.t[i]), 2);
            lo = std::min(lo, q);
            hi = std::max(hi, q);
        }
        rep.band_factor = hi / lo;
    }
    return rep;
}

inline std::vector<std::string> ondiag_csv_lines(const OndiagReport& rep) {
    std::vector<std::string> lines;
    for (size_t i = 0; i < rep.t.size(); ++i) {
        std::ostringstream ss;
        ss.precision(12);
        ss << rep.t[i] << ',' << rep.p[i] << ',' << rep.rate[i];
        lines.push_back(ss.str());
    }
    return lines;
}

// ---------------------------------------------------------------------------
// Hitting-law campaign: PDE first-passage law and MC hitting CDFs against the
// closed-form shapes.

struct HittingRow {
    bool primary_side;
    double r;        // radial excess of the start point
    double t;
    double cdf_pde;
    double cdf_mc;
    double se_mc;
    double shape;
    bool extended;
};

struct HittingReport {
    std::vector<HittingRow> rows;
    double ratio_band = 0.0;      // residual band of cdf_pde against the shape
                                  // after fitting (c, rate), the free constants
                                  // of a two-sided bound
    double fitted_rate = 0.0;     // fitted exponential rate (1/2 for variance-t)
    double fitted_c = 0.0;
    double near_start_cdf = 0.0;  // P(sigma <= 1) from a start with excess < 1
    bool pass = true;
};

inline HittingReport hitting_campaign(const CampaignConfig& cfg, bool with_mc = true,
                                      double band_tol = 10.0) {
    const SpaceParams& sp = cfg.params;
    if (sp.d < 2) throw std::runtime_error("hitting campaign needs a side of dimension >= 2");
    const double t_max = *std::max_element(cfg.hit_times.begin(), cfg.hit_times.end());
    const double r_max = *std::max_element(cfg.hit_radii.begin(), cfg.hit_radii.end());
    const double span = r_max + cfg.span_margin * std::sqrt(t_max) + 1.0;
    GridGrading gr{cfg.grading_ratio, cfg.h_min_eff(1.0)};
    const RadialGrid g = build_grid(sp, span, span, cfg.n_cells, gr);
    SolveOpts opts;
    opts.steps_per_decade = cfg.steps_per_decade;

    HittingReport rep;
    std::vector<double> gs, logs;  // Gaussian argument, log(cdf / prefactor)
    for (double r : cfg.hit_radii) {
        const size_t src = g.nearest_node(r);
        const double r_used = g.nodes[src];
        HittingTable tab(g, src, 1e-4, t_max, opts);
        PathEnsemble ens;
        if (with_mc) {
            MCConfig mc = cfg.mc;
            ens = sample_paths(r_used, t_max, mc, sp);
        }
        for (double t : cfg.hit_times) {
            HittingRow row;
            row.primary_side = true;
            row.r = r_used;
            row.t = t;
            row.cdf_pde = tab.cdf(t);
            const GluedPoint x = detail::point_at(true, r_used, 0.0, sp);
            const HittingCdfValue hv = hitting_cdf_shape(t, x, sp);
            row.shape = hv.value;
            row.extended = hv.extended;
            if (with_mc) {
                const auto [q, se] = hitting_cdf_estimate(ens, t);
                row.cdf_mc = q;
                row.se_mc = se;
            } else {
                row.cdf_mc = row.se_mc = std::nan("");
            }
            if (!row.extended && row.shape > 0.0) {
                const double gexp = r_used * r_used / t;
                gs.push_back(-gexp);
                logs.push_back(std::log(row.cdf_pde / (row.shape * std::exp(gexp))));
            }
            rep.rows.push_back(row);
        }
    }
    // The asymptotic notation grants free constants in the exponent, so the
    // band is measured after fitting (c, rate) to cdf = c * pref * e^{-rate g}.
    rep.fitted_rate = ls_slope(gs, logs);
    double mg = 0.0, ml = 0.0;
    for (size_t k = 0; k < gs.size(); ++k) {
        mg += gs[k];
        ml += logs[k];
    }
    const double logc = ml / logs.size() - rep.fitted_rate * mg / gs.size();
    rep.fitted_c = std::exp(logc);
    double res_lo = std::numeric_limits<double>::infinity(), res_hi = 0.0;
    for (size_t k = 0; k < gs.size(); ++k) {
        const double resid = std::exp(logs[k] - (logc + rep.fitted_rate * gs[k]));
        res_lo = std::min(res_lo, resid);
        res_hi = std::max(res_hi, resid);
    }
    rep.ratio_band = res_hi / res_lo;

    // positive hitting mass by time 1 from just off the junction
    const size_t src = g.nearest_node(0.25);
    HittingTable near_tab(g, src, 1e-5, 1.0, opts);
    rep.near_start_cdf = near_tab.cdf(1.0);

    rep.pass = rep.ratio_band <= band_tol && rep.near_start_cdf > 0.05;
    return rep;
}

inline std::vector<std::string> hitting_csv_lines(const HittingReport& rep) {
    std::vector<std::string> lines;
    for (const auto& r : rep.rows) {
        std::ostringstream ss;
        ss.precision(12);
        ss << (r.primary_side ? "d" : "dp") << ',' << r.r << ',' << r.t << ',' << r.cdf_pde << ','
           << r.cdf_mc << ',' << r.se_mc << ',' << r.shape << ',' << (r.extended ? 1 : 0);
        lines.push_back(ss.str());
    }
    return lines;
}

// ---------------------------------------------------------------------------
// Structural consistency campaign

struct ConsistencyCheck {
    std::string name;
    double value;
    double bound;
    bool pass;
};

struct ConsistencyReport {
    std::vector<ConsistencyCheck> checks;
    bool pass = true;
    void add(const std::string& name, double value, double bound, bool ok) {
        checks.push_back({name, value, bound, ok});
        pass = pass && ok;
    }
};

// Symmetry, Chapman-Kolmogorov, mass conservation, the exponential-comparison
// battery, the a*-diagonal upper rate, and the volume-doubling scaling.
inline ConsistencyReport consistency_campaign(const CampaignConfig& cfg) {
    const SpaceParams& sp = cfg.params;
    ConsistencyReport rep;
    GridGrading gr{cfg.grading_ratio, cfg.h_min_eff(0.5)};
    const double span = cfg.span_margin * std::sqrt(100.0) + 9.0;
    const RadialGrid g = build_grid(sp, span, span, std::min<size_t>(cfg.n_cells, 2048), gr);
    SolveOpts opts;
    opts.steps_per_decade = cfg.steps_per_decade;

    // M-weighted symmetry of the kernel
    {
        const size_t i = g.nearest_node(1.0), j = g.nearest_node(-0.5);
        const double pij = kernel(g, 1.0, i, j, opts);
        const double pji = kernel(g, 1.0, j, i, opts);
        const double rel = std::abs(pij - pji) / std::max(std::abs(pij), 1e-300);
        rep.add("kernel_symmetry_rel", rel, 1e-10, rel <= 1e-10);
    }
    // Chapman-Kolmogorov at (s, t-s) = (1, 1) and (10, 90)
    for (auto [s, t] : {std::pair<double, double>{1.0, 2.0}, {10.0, 100.0}}) {
        const size_t i = g.nearest_node(0.8), j = g.nearest_node(-1.2);
        const KernelField ki = kernel_field(g, s, i, opts);
        const KernelField kj = kernel_field(g, t - s, j, opts);
        double conv = 0.0;
        for (size_t k = 0; k < g.size(); ++k) conv += g.mass[k] * ki.u[k] * kj.u[k];
        const double direct = kernel(g, t, i, j, opts);
        const double rel = std::abs(conv - direct) / std::max(direct, 1e-300);
        std::ostringstream name;
        name << "chapman_kolmogorov_rel_s" << s << "_t" << t;
        rep.add(name.str(), rel, 1e-3, rel <= 1e-3);
    }
    // reflecting mass conservation, worst per-step drift
    {
        Field f = delta_field(g, g.nearest_node(0.5));
        f = evolve(g, f, 0.25, 1e-3, BoundaryType::Reflecting);  // spread first
        Evolver ev(g, BoundaryType::Reflecting, false);
        double m_prev = field_mass(g, f);
        double worst = 0.0;
        for (int k = 0; k < 256; ++k) {
            ev.cn_step(f, 1e-3);
            const double m = field_mass(g, f);
            worst = std::max(worst, std::abs(m - m_prev));
            m_prev = m;
        }
        rep.add("reflecting_mass_drift_per_step", worst, 1e-12, worst <= 1e-12);
    }
    // a*-diagonal upper rate: p(t,a*,a*) * (t^{d/2} ^ t^{d'/2}) bounded on [1, 1e4]
    {
        CampaignConfig oc = cfg;
        oc.od_t_min = 1.0;
        oc.od_t_max = 1e4;
        oc.od_n = 25;
        const OndiagReport od = ondiag_campaign(oc);
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (size_t i = 0; i < od.t.size(); ++i) {
            const double bound = std::max(std::pow(od.t[i], -0.5 * sp.d),
                                          std::pow(od.t[i], -0.5 * sp.d_prime));
            const double q = od.p[i] / bound;
            lo = std::min(lo, q);
            hi = std::max(hi, q);
        }
        rep.add("ondiag_upper_rate_band", hi / lo, 10.0, hi / lo <= 10.0);
    }
    // exponential-comparison battery
    {
        const double T = 64.0;
        size_t fails = 0, total = 0;
        PhiloxRng rng(cfg.mc.seed, 7);
        for (int k = 0; k < 200; ++k) {
            const double rx = 0.05 + 3.0 * rng.uniform();
            const double ry = 0.05 + 3.0 * rng.uniform();
            const double ang = M_PI * rng.uniform();
            const GluedPoint x = detail::point_at(true, rx, 0.0, sp);
            const GluedPoint y = detail::point_at(true, ry, ang, sp);
            const double t = T * (1.0 + 10.0 * rng.uniform());
            const auto r = exp_comparison_check(t, x, y, sp, T);
            ++total;
            if (!r.all_ok()) ++fails;
        }
        rep.add("exp_comparison_failures", static_cast<double>(fails),
                0.0, fails == 0);
        (void)total;
    }
    // volume-doubling scaling for d > d'
    if (sp.d > sp.d_prime) {
        std::vector<double> lr, lratio;
        for (double r : cfg.vd_r) {
            const GluedPoint x = detail::point_at(true, r, 0.0, sp);
            lr.push_back(std::log(r));
            lratio.push_back(std::log(vd_ratio(x, r, sp)));
        }
        const double slope = ls_slope(lr, lratio);
        const double target = sp.d_prime - sp.d;
        rep.add("vd_ratio_log_slope_minus_target", std::abs(slope - target), 0.1,
                std::abs(slope - target) <= 0.1);
    }
    return rep;
}

inline std::vector<std::string> consistency_csv_lines(const ConsistencyReport& rep) {
    std::vector<std::string> lines;
    for (const auto& c : rep.checks) {
        std::ostringstream ss;
        ss.precision(12);
        ss << c.name << ',' << c.value << ',' << c.bound << ',' << (c.pass ? 1 : 0);
        lines.push_back(ss.str());
    }
    return lines;
}

// ---------------------------------------------------------------------------
// Volume-doubling failure campaign

struct VdRow {
    double r;
    double ball_r;
    double ball_2r;
    double ratio;
    double product;  // ratio * r^{d-d'}
};

struct VdReport {
    std::vector<VdRow> rows;
    double product_band = 0.0;
    size_t oracle_checked = 0;
    size_t oracle_ok = 0;
    bool pass = true;
};

// Rejection-sampling oracle for the metric ball measure, independent of the
// quadrature path.
inline std::pair<double, double> ball_measure_rejection(const GluedPoint& x, double r,
                                                        const SpaceParams& sp, size_t n_samples,
                                                        uint64_t seed) {
    validate_point(x, sp);
    const double xr = radial_excess(x, sp);
    const double span = r - xr;
    double est = 0.0, var = 0.0;
    PhiloxRng rng(seed, 17);
    for (int side = 0; side < 2; ++side) {
        const bool primary = side == 0;
        const int k = sp.side_dim(primary);
        const double e = sp.side_eps(primary);
        const double wt = primary ? 1.0 : sp.p;
        double L = e + std::max(span, 0.0);
        if (x.part == (primary ? Part::SideD : Part::SideDPrime))
            L = std::max(L, euclid_norm(x.coords) + r);
        if (L <= 0.0) continue;
        double box;
        std::vector<double> c(k);
        size_t hits = 0;
        if (k == 1) {
            box = L;  // half-line sample in (0, L)
        } else {
            box = std::pow(2.0 * L, k);
        }
        for (size_t s = 0; s < n_samples; ++s) {
            if (k == 1) {
                c[0] = L * rng.uniform();
            } else {
                for (int j = 0; j < k; ++j) c[j] = L * (2.0 * rng.uniform() - 1.0);
                if (!(euclid_norm(c) > e)) continue;
            }
            GluedPoint y{primary ? Part::SideD : Part::SideDPrime, c};
            if (rho(x, y, sp) < r) ++hits;
        }
        const double q = static_cast<double>(hits) / n_samples;
        est += wt * box * q;
        var += std::pow(wt * box, 2) * q * (1.0 - q) / n_samples;
    }
    return {est, std::sqrt(var)};
}

inline VdReport vd_check_campaign(const CampaignConfig& cfg, size_t oracle_cases = 50,
                                  size_t oracle_samples = 20000, double band_tol = 4.0) {
    const SpaceParams& sp = cfg.params;
    VdReport rep;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double r : cfg.vd_r) {
        const GluedPoint x = detail::point_at(true, r, 0.0, sp);
        VdRow row;
        row.r = r;
        row.ball_r = ball_measure(x, r, sp);
        row.ball_2r = ball_measure(x, 2.0 * r, sp);
        row.ratio = row.ball_2r / row.ball_r;
        row.product = row.ratio * std::pow(r, sp.d - sp.d_prime);
        lo = std::min(lo, row.product);
        hi = std::max(hi, row.product);
        rep.rows.push_back(row);
    }
    rep.product_band = hi / lo;

    PhiloxRng rng(cfg.mc.seed, 23);
    for (size_t c = 0; c < oracle_cases; ++c) {
        const bool primary = rng.uniform() < 0.5;
        const double rx = 0.2 + 2.8 * rng.uniform();
        const double r = 0.3 + 2.7 * rng.uniform();
        GluedPoint x = detail::point_at(primary, rx, 0.4 * rng.uniform(), sp);
        const double det = ball_measure(x, r, sp);
        const auto [mc, se] = ball_measure_rejection(x, r, sp, oracle_samples,
                                                     cfg.mc.seed + 1000 + c);
        ++rep.oracle_checked;
        if (std::abs(det - mc) <= 3.0 * std::max(se, 1e-12)) ++rep.oracle_ok;
    }
    rep.pass = rep.product_band <= band_tol &&
               rep.oracle_ok + (oracle_cases + 49) / 50 >= rep.oracle_checked;
    return rep;
}

inline std::vector<std::string> vd_csv_lines(const VdReport& rep) {
    std::vector<std::string> lines;
    for (const auto& r : rep.rows) {
        std::ostringstream ss;
        ss.precision(12);
        ss << r.r << ',' << r.ball_r << ',' << r.ball_2r << ',' << r.ratio << ',' << r.product;
        lines.push_back(ss.str());
    }
    return lines;
}

// ---------------------------------------------------------------------------
// Monte Carlo vs PDE cross-check campaign

struct McPdeRow {
    double t;
    double y0;
    double cell_lo, cell_hi;
    double mc, se, pde;
    double z;  // |mc - pde| / se
};

struct McPdeReport {
    std::vector<McPdeRow> rows;
    size_t within_3se = 0;
    double ks_stat = -1.0;      // Gaussian exact-law check (d = d' = 1, p = 1)
    double ks_critical = 0.0;
    bool pass = true;
};

inline McPdeReport mc_vs_pde_campaign(const CampaignConfig& cfg, size_t n_cases = 20,
                                      size_t min_within = 18, bool with_gaussian = true) {
    const SpaceParams& sp = cfg.params;
    McPdeReport rep;
    const double t_hi = 4.0;
    GridGrading gr{cfg.grading_ratio, cfg.h_min_eff(0.25)};
    const double span = cfg.span_margin * std::sqrt(t_hi) + 4.0;
    const RadialGrid g = build_grid(sp, span, span, std::min<size_t>(cfg.n_cells, 2048), gr);
    SolveOpts opts;
    opts.steps_per_decade = cfg.steps_per_decade;

    PhiloxRng rng(cfg.mc.seed, 31);
    for (size_t c = 0; c < n_cases; ++c) {
        const double t = 0.5 + (t_hi - 0.5) * rng.uniform();
        const double y0 = -2.0 + 4.0 * rng.uniform();
        const double center = y0 + 2.0 * std::sqrt(t) * (2.0 * rng.uniform() - 1.0);
        const double w = 0.25 * std::sqrt(t);
        const double a = center - w, b = center + w;

        MCConfig mc = cfg.mc;
        mc.seed = cfg.mc.seed + 100 + c;
        const PathEnsemble ens = sample_paths(y0, t, mc, sp);
        const DensityEstimate de = estimate_density(ens, a, b, sp);

        const KernelField kf = kernel_field(g, t, g.nearest_node(y0), opts);
        double num = 0.0, den = 0.0;
        for (size_t i = 0; i < g.size(); ++i) {
            const double mid = g.nodes[i];
            if (mid >= a && mid < b) {
                num += g.mass[i] * kf.u[i];
                den += g.mass[i];
            }
        }
        const double pde = den > 0.0 ? num / den : 0.0;
        McPdeRow row{t, y0, a, b, de.value, de.std_error, pde,
                     std::abs(de.value - pde) / std::max(de.std_error, 1e-300)};
        if (row.z <= 3.0) ++rep.within_3se;
        rep.rows.push_back(row);
    }
    rep.pass = rep.within_3se >= min_within;

    if (with_gaussian) {
        const SpaceParams line(1, 1, 1.0, 1.0, 1.0);
        MCConfig mc = cfg.mc;
        mc.seed = cfg.mc.seed + 77;
        const double t = 1.0;
        PathEnsemble ens = sample_paths(0.0, t, mc, line);
        std::vector<double> v = ens.terminal;
        std::sort(v.begin(), v.end());
        double dmax = 0.0;
        const double n = static_cast<double>(v.size());
        for (size_t i = 0; i < v.size(); ++i) {
            const double cdf = 0.5 * std::erfc(-v[i] / std::sqrt(2.0 * t));
            dmax = std::max(dmax, std::abs(cdf - (i + 1) / n));
            dmax = std::max(dmax, std::abs(cdf - i / n));
        }
        rep.ks_stat = dmax;
        rep.ks_critical = 1.628 / std::sqrt(n);  // 1% level
        rep.pass = rep.pass && rep.ks_stat <= rep.ks_critical;
    }
    return rep;
}

inline std::vector<std::string> mc_pde_csv_lines(const McPdeReport& rep) {
    std::vector<std::string> lines;
    for (const auto& r : rep.rows) {
        std::ostringstream ss;
        ss.precision(12);
        ss << r.t << ',' << r.y0 << ',' << r.cell_lo << ',' << r.cell_hi << ',' << r.mc << ','
           << r.se << ',' << r.pde << ',' << r.z;
        lines.push_back(ss.str());
    }
    return lines;
}

// ---------------------------------------------------------------------------
// Standard battery: one campaign config per estimate family, dimensioned so
// that together they exercise every regime. The coverage manifest test walks
// exactly this list.

inline std::vector<CampaignConfig> standard_battery() {
    std::vector<CampaignConfig> out;
    auto base = [](int d, int dp, const std::string& family, double t_min, double t_max) {
        CampaignConfig c;
        c.params = SpaceParams(d, dp, 1.0, 1.0, 1.0);
        c.family = family;
        c.t_min = t_min;
        c.t_max = t_max;
        c.experiment_id = family + "_" + std::to_string(d) + std::to_string(dp);
        if (family == "small") {
            c.sqrt_time_stride = 1;
            c.n_times = 24;
        }
        return c;
    };
    out.push_back(base(3, 1, "small", 1e-2, 1.0));
    out.push_back(base(3, 1, "large_line", 64.0, 1e4));
    out.push_back(base(2, 1, "large_plane_line", 8.0, 1e4));
    out.push_back(base(2, 2, "large_plane_plane", 64.0, 1e4));
    out.push_back(base(3, 2, "large_bulk_plane", 64.0, 1e4));
    out.push_back(base(3, 3, "large_bulk_bulk", 64.0, 1e4));
    return out;
}

}  // namespace bmvd
