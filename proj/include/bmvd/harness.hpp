#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bmvd/config.hpp"
#include "bmvd/envelopes.hpp"
#include "bmvd/montecarlo.hpp"
#include "bmvd/radial.hpp"
#include "bmvd/space.hpp"

namespace bmvd {

struct CampaignConfig {
    SpaceParams params;
    std::string experiment_id = "default";
    std::string out_dir = "out";

    // solver budgets
    size_t n_cells = 4096;
    double steps_per_decade = 1024;
    double grading_ratio = 1.05;
    double h_min = 0.0;       // 0 -> min(1e-3, sqrt(t_min)/32)
    double span_margin = 8.0; // R = max radius + margin * sqrt(t_max)

    // sandwich grid
    std::string family = "large_bulk_bulk";
    double t_min = 64.0, t_max = 1e4;
    size_t n_times = 32;
    std::vector<double> radii = {0.1, 0.5, 1.0, 2.0, 4.0, 8.0};
    std::vector<double> sqrt_radii = {0.5, 1.0, 2.0};  // multiples of sqrt(t)
    size_t sqrt_time_stride = 4;
    std::vector<double> angles = {0.0, M_PI / 2, M_PI};
    double killed_slack = 20.0;

    // fit semantics
    double e_lower = 2.0, e_upper = 0.5;
    double fit_margin = 0.10;
    double uniformity_factor = 4.0;
    double robustness_t = 512.0;
    size_t min_samples = 20;
    double g_cap = 36.0;  // points with every Gaussian argument above this are
                          // below solver resolution and are skipped

    // on-diagonal windows
    double od_t_min = 1e2, od_t_max = 1e4;
    size_t od_n = 33;

    // hitting battery
    std::vector<double> hit_radii = {1.0, 2.0, 4.0};
    std::vector<double> hit_times = {2.0, 10.0, 100.0};

    // volume-doubling battery
    std::vector<double> vd_r = {1e-1, 1e-2, 1e-3, 1e-4};

    MCConfig mc;

    std::string config_text;  // raw config echo, hashed into reports

    double h_min_eff(double t_lo) const {
        return h_min > 0.0 ? h_min : std::min(1e-3, std::sqrt(t_lo) / 32.0);
    }
};

inline CampaignConfig campaign_from_ini(const IniConfig& ini) {
    CampaignConfig c;
    c.params = SpaceParams(static_cast<int>(ini.get_int("params", "d", 3)),
                           static_cast<int>(ini.get_int("params", "d_prime", 1)),
                           ini.get_num("params", "eps", 1.0),
                           ini.get_num("params", "eps_prime", 1.0),
                           ini.get_num("params", "p", 1.0));
    c.experiment_id = ini.get_str("experiment", "id", "default");
    c.n_cells = static_cast<size_t>(ini.get_int("solver", "n_cells", 4096));
    c.steps_per_decade = ini.get_num("solver", "steps_per_decade", 1024);
    c.grading_ratio = ini.get_num("solver", "grading_ratio", 1.05);
    c.h_min = ini.get_num("solver", "h_min", 0.0);
    c.span_margin = ini.get_num("solver", "span_margin", 8.0);
    c.family = ini.get_str("sandwich", "family", "large_bulk_bulk");
    c.t_min = ini.get_num("sandwich", "t_min", 64.0);
    c.t_max = ini.get_num("sandwich", "t_max", 1e4);
    c.n_times = static_cast<size_t>(ini.get_int("sandwich", "n_times", 32));
    c.radii = ini.get_list("sandwich", "radii", c.radii);
    c.sqrt_radii = ini.get_list("sandwich", "sqrt_radii", c.sqrt_radii);
    c.sqrt_time_stride = static_cast<size_t>(ini.get_int("sandwich", "sqrt_time_stride", 4));
    c.angles = ini.get_list("sandwich", "angles", c.angles);
    c.killed_slack = ini.get_num("sandwich", "killed_slack", 20.0);
    c.e_lower = ini.get_num("tolerances", "e_lower", 2.0);
    c.e_upper = ini.get_num("tolerances", "e_upper", 0.5);
    c.fit_margin = ini.get_num("tolerances", "fit_margin", 0.10);
    c.uniformity_factor = ini.get_num("tolerances", "uniformity_factor", 4.0);
    c.robustness_t = ini.get_num("tolerances", "robustness_t", 512.0);
    c.min_samples = static_cast<size_t>(ini.get_int("tolerances", "min_samples", 20));
    c.g_cap = ini.get_num("tolerances", "g_cap", 36.0);
    c.od_t_min = ini.get_num("ondiag", "t_min", 1e2);
    c.od_t_max = ini.get_num("ondiag", "t_max", 1e4);
    c.od_n = static_cast<size_t>(ini.get_int("ondiag", "n", 33));
    c.hit_radii = ini.get_list("hitting", "radii", c.hit_radii);
    c.hit_times = ini.get_list("hitting", "times", c.hit_times);
    c.vd_r = ini.get_list("vd", "r", c.vd_r);
    c.mc.n_paths = env_budget_override(static_cast<size_t>(ini.get_int("mc", "n_paths", 100000)));
    c.mc.dt = ini.get_num("mc", "dt", 1e-3);
    c.mc.junction_band = ini.get_num("mc", "band", 0.0);
    c.mc.seed = env_seed_override(static_cast<uint64_t>(ini.get_int("mc", "seed", 20240901)));
    c.mc.n_threads = static_cast<unsigned>(ini.get_int("mc", "n_threads", 1));
    c.config_text = ini.raw();
    return c;
}

// ---------------------------------------------------------------------------
// Constant fitting

// One grid point of a campaign: the estimate's terms plus the numeric value
// (an interval when the numeric source is a bracket).
struct FitSample {
    double t = 0.0;
    std::vector<ShapeTerm> terms;
    double numeric_lo = 0.0;
    double numeric_hi = 0.0;
};

inline double eval_terms(const std::vector<ShapeTerm>& terms, double rate) {
    double s = 0.0;
    for (const auto& tm : terms) s += tm.amp * std::exp(-rate * tm.g);
    return s;
}

struct FitResult {
    EnvelopeConstants k;
    double worst_lo_ratio = 0.0;  // min numeric_lo / lower-shape
    double worst_hi_ratio = 0.0;  // max numeric_hi / upper-shape
    size_t n = 0;
};

// Exponent slack is fixed (x2 each way); multiplicative constants are fit as
// the extreme numeric/shape ratios, relaxed by `margin`.
inline FitResult fit_constants(const std::vector<FitSample>& samples, double e_lower = 2.0,
                               double e_upper = 0.5, double margin = 0.10) {
    if (samples.empty()) throw std::runtime_error("fit_constants: regime has zero samples");
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const auto& s : samples) {
        const double sl = eval_terms(s.terms, e_lower);
        const double sh = eval_terms(s.terms, e_upper);
        if (!(sl > 0.0) || !(sh > 0.0))
            throw std::runtime_error("fit_constants: degenerate shape value");
        lo = std::min(lo, s.numeric_lo / sl);
        hi = std::max(hi, s.numeric_hi / sh);
    }
    FitResult r;
    r.k = {lo * (1.0 - margin), e_lower, hi * (1.0 + margin), e_upper};
    r.worst_lo_ratio = lo;
    r.worst_hi_ratio = hi;
    r.n = samples.size();
    return r;
}

struct RegimeReport {
    std::string regime_id;
    FitResult fit;
    size_t n_samples = 0;
    size_t n_skipped = 0;  // below double noise, untestable
    double pass_rate = 1.0;
    bool uniform_ok = true;
    double uniform_factor = 1.0;
    bool robust_checked = false;
    double robust_factor = 1.0;
    bool pass = true;
};

namespace detail {

inline double factor_between(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) return std::numeric_limits<double>::infinity();
    return a > b ? a / b : b / a;
}

// Refit on two sample subsets and compare the fitted constants.
inline double refit_factor(const std::vector<FitSample>& a, const std::vector<FitSample>& b,
                           double e_lo, double e_up) {
    const FitResult fa = fit_constants(a, e_lo, e_up, 0.0);
    const FitResult fb = fit_constants(b, e_lo, e_up, 0.0);
    return std::max(factor_between(fa.worst_lo_ratio, fb.worst_lo_ratio),
                    factor_between(fa.worst_hi_ratio, fb.worst_hi_ratio));
}

}  // namespace detail

// Full per-regime verdict: fit on everything, pass flags per point, and the
// t-uniformity refit on the early/late halves of the time grid. This is the
// operational meaning of a two-sided bound with t-independent constants.
inline RegimeReport assess_regime(const std::string& id, std::vector<FitSample> samples,
                                  const CampaignConfig& cfg, size_t n_skipped) {
    RegimeReport rep;
    rep.regime_id = id;
    rep.n_samples = samples.size();
    rep.n_skipped = n_skipped;
    if (samples.size() < cfg.min_samples)
        throw std::runtime_error("sandwich: regime " + id + " has only " +
                                 std::to_string(samples.size()) + " samples (need >= " +
                                 std::to_string(cfg.min_samples) + ")");
    rep.fit = fit_constants(samples, cfg.e_lower, cfg.e_upper, cfg.fit_margin);

    size_t ok = 0;
    for (const auto& s : samples) {
        const double lo = rep.fit.k.c_lower * eval_terms(s.terms, rep.fit.k.e_lower);
        const double hi = rep.fit.k.c_upper * eval_terms(s.terms, rep.fit.k.e_upper);
        if (lo <= s.numeric_lo * (1.0 + 1e-12) && s.numeric_hi <= hi * (1.0 + 1e-12)) ++ok;
    }
    rep.pass_rate = static_cast<double>(ok) / samples.size();

    std::sort(samples.begin(), samples.end(),
              [](const FitSample& a, const FitSample& b) { return a.t < b.t; });
    const size_t half = samples.size() / 2;
    // Split at the median time, keeping equal times together.
    size_t cut = half;
    while (cut > 0 && cut < samples.size() && samples[cut].t == samples[cut - 1].t) ++cut;
    if (cut >= 5 && samples.size() - cut >= 5) {
        std::vector<FitSample> early(samples.begin(), samples.begin() + cut);
        std::vector<FitSample> late(samples.begin() + cut, samples.end());
        rep.uniform_factor = detail::refit_factor(early, late, cfg.e_lower, cfg.e_upper);
        rep.uniform_ok = rep.uniform_factor <= cfg.uniformity_factor;
    }
    std::vector<FitSample> tail;
    for (const auto& s : samples)
        if (s.t >= cfg.robustness_t) tail.push_back(s);
    if (tail.size() >= 5 && tail.size() + 5 <= samples.size()) {
        rep.robust_checked = true;
        rep.robust_factor = detail::refit_factor(samples, tail, cfg.e_lower, cfg.e_upper);
    }
    rep.pass = rep.pass_rate == 1.0 && rep.uniform_ok;
    return rep;
}

// ---------------------------------------------------------------------------
// Sandwich campaign

struct SandwichRow {
    double t;
    Part part_x;
    double r_x;
    Part part_y;
    double r_y;
    double dist_xy;  // infinity across parts
    std::string regime_id;
    double shape;
    double lower;
    double upper;
    double numeric_lo;
    double numeric_hi;
    bool pass;
};

struct SandwichReport {
    std::string campaign;
    std::vector<RegimeReport> regimes;
    std::vector<SandwichRow> rows;
    bool pass = true;

    const RegimeReport* regime(const std::string& id) const {
        for (const auto& r : regimes)
            if (r.regime_id == id) return &r;
        return nullptr;
    }
};

namespace detail {

struct PairItem {
    double t;
    GluedPoint x, y;
    size_t node_x, node_y;
    bool same_part;   // same side of dimension >= 2: bracket numerics
    Regime regime;
    double numeric_lo = 0.0, numeric_hi = 0.0;
};

inline Family family_from_name(const std::string& name) {
    if (name == "small") return Family::Small;
    if (name == "large_line") return Family::LargeLine;
    if (name == "large_plane_line") return Family::LargePlaneLine;
    if (name == "large_plane_plane") return Family::LargePlanePlane;
    if (name == "large_bulk_plane") return Family::LargeBulkPlane;
    if (name == "large_bulk_bulk") return Family::LargeBulkBulk;
    throw std::runtime_error("unknown estimate family: " + name);
}

inline GluedPoint point_at(bool primary, double radius_excess, double angle,
                           const SpaceParams& sp) {
    if (radius_excess <= 0.0) return GluedPoint::junction();
    const int k = sp.side_dim(primary);
    const double R = sp.side_eps(primary) + radius_excess;
    std::vector<double> c(k, 0.0);
    if (k == 1) {
        c[0] = R;
    } else {
        c[0] = R * std::cos(angle);
        c[1] = R * std::sin(angle);
    }
    return {primary ? Part::SideD : Part::SideDPrime, std::move(c)};
}

}  // namespace detail

// Builds item grids, runs the PDE oracle over them, fits constants per
// regime, and reports. Same-part pairs on a side of dimension >= 2 use the
// bracket [bar_p + killed_lower, bar_p + killed_upper]; everything else is a
// direct speed-measure kernel read.
class SandwichCampaign {
  public:
    explicit SandwichCampaign(const CampaignConfig& cfg) : cfg_(cfg) {
        const double max_fixed =
            cfg.radii.empty() ? 1.0 : *std::max_element(cfg.radii.begin(), cfg.radii.end());
        const double max_sqrt =
            cfg.sqrt_radii.empty()
                ? 0.0
                : *std::max_element(cfg.sqrt_radii.begin(), cfg.sqrt_radii.end());
        const double span = std::max(max_fixed, max_sqrt * std::sqrt(cfg.t_max)) +
                            cfg.span_margin * std::sqrt(cfg.t_max);
        GridGrading gr{cfg.grading_ratio, cfg.h_min_eff(cfg.t_min)};
        grid_ = build_grid(cfg.params, span, span, cfg.n_cells, gr);
        opts_.steps_per_decade = cfg.steps_per_decade;
    }

    const RadialGrid& grid() const { return grid_; }

    // Radii usable at time t, snapped to grid nodes, deduplicated.
    std::vector<double> radius_list(bool primary, double t, bool with_sqrt) const {
        const double limit = 0.45 * (primary ? grid_.nodes.back() : -grid_.nodes.front());
        std::set<size_t> nodes;
        std::vector<double> out;
        auto add = [&](double r) {
            if (r <= 0.0 || r > limit) return;
            const size_t n = grid_.nearest_node(primary ? r : -r);
            if (n == grid_.j0 || !nodes.insert(n).second) return;
            out.push_back(std::abs(grid_.nodes[n]));
        };
        for (double r : cfg_.radii) add(r);
        if (with_sqrt)
            for (double m : cfg_.sqrt_radii) add(m * std::sqrt(t));
        return out;
    }

    SandwichReport run() {
        const Family fam = detail::family_from_name(cfg_.family);
        build_items(fam);
        compute_numerics();
        return assemble(fam);
    }

    // Regime ids hit by this campaign's grid (no numerics; used by the
    // coverage manifest).
    std::set<std::string> coverage() const {
        const Family fam = detail::family_from_name(cfg_.family);
        const_cast<SandwichCampaign*>(this)->build_items(fam);
        std::set<std::string> ids;
        for (const auto& it : items_) ids.insert(regime_id(it.regime));
        return ids;
    }

  private:
    void build_items(Family fam) {
        items_.clear();
        Thresholds th = default_thresholds(cfg_.params);
        th.policy = GapPolicy::Strict;
        const auto ts = logspace(cfg_.t_min, cfg_.t_max, cfg_.n_times);
        for (size_t ti = 0; ti < ts.size(); ++ti) {
            const double t = ts[ti];
            const bool with_sqrt = cfg_.sqrt_time_stride == 0 ||
                                   ti % std::max<size_t>(cfg_.sqrt_time_stride, 1) == 0;
            for (int side = 0; side < 2; ++side) {
                const bool primary = side == 0;
                auto rl = radius_list(primary, t, with_sqrt);
                rl.push_back(0.0);  // a*
                auto other = radius_list(!primary, t, with_sqrt);
                other.push_back(0.0);
                // cross pairs: primary side enumerated once to avoid duplicates
                if (primary) {
                    for (double rx : rl)
                        for (double ry : other) add_item(t, rx, ry, true, false, th, fam);
                }
                // same-part pairs
                const int k = cfg_.params.side_dim(primary);
                const std::vector<double> angs =
                    k == 1 ? std::vector<double>{0.0} : cfg_.angles;
                for (size_t a = 0; a < rl.size(); ++a)
                    for (size_t b = a; b < rl.size(); ++b)
                        if (rl[a] > 0.0 && rl[b] > 0.0)
                            for (double ang : angs)
                                add_item(t, rl[a], rl[b], false, primary, th, fam, ang);
            }
        }
    }

    void add_item(double t, double rx, double ry, bool cross, bool primary, const Thresholds& th,
                  Family fam, double angle = 0.0) {
        detail::PairItem it;
        it.t = t;
        if (cross) {
            it.x = detail::point_at(true, rx, 0.0, cfg_.params);
            it.y = detail::point_at(false, ry, 0.0, cfg_.params);
        } else {
            it.x = detail::point_at(primary, rx, 0.0, cfg_.params);
            it.y = detail::point_at(primary, ry, angle, cfg_.params);
        }
        it.node_x = grid_.nearest_node(signed_radial(it.x, cfg_.params));
        it.node_y = grid_.nearest_node(signed_radial(it.y, cfg_.params));
        it.same_part = !cross && cfg_.params.side_dim(primary) >= 2 &&
                       it.x.part != Part::Junction && it.y.part != Part::Junction;
        const auto regs = classify(t, it.x, it.y, cfg_.params, th);
        it.regime = regs.front();
        if (it.regime.family != fam) return;
        // drop pairs that duplicate an existing (t, node, node, angle) triple
        items_.push_back(std::move(it));
    }

    void compute_numerics() {
        // fixed-source preference set: nodes of the t-independent radii
        std::set<size_t> fixed;
        for (int side = 0; side < 2; ++side) {
            const bool primary = side == 0;
            for (double r : cfg_.radii) {
                const double u = primary ? r : -r;
                if (std::abs(u) <= 0.45 * grid_.nodes.back())
                    fixed.insert(grid_.nearest_node(u));
            }
        }
        fixed.insert(grid_.j0);

        // plan reducible reads: source -> t -> partners
        std::map<size_t, std::map<double, std::set<size_t>>> plan;
        for (auto& it : items_) {
            if (it.same_part) continue;
            size_t src = it.node_y, dst = it.node_x;
            if (!fixed.count(src) && fixed.count(dst)) std::swap(src, dst);
            plan[src][it.t].insert(dst);
        }
        std::map<std::tuple<size_t, size_t>, std::map<double, double>> kvals;
        for (const auto& [src, byt] : plan) {
            std::vector<double> times;
            for (const auto& [t, _] : byt) times.push_back(t);
            Field f = delta_field(grid_, src);
            evolve_snapshots(grid_, f, times, opts_, [&](size_t idx, double t, const Field& ff) {
                for (size_t dst : byt.at(times[idx])) kvals[{src, dst}][t] = ff.u[dst];
            });
        }
        for (auto& it : items_) {
            if (it.same_part) continue;
            const auto a = kvals.find({it.node_y, it.node_x});
            double v;
            if (a != kvals.end() && a->second.count(it.t))
                v = a->second.at(it.t);
            else
                v = kvals.at({it.node_x, it.node_y}).at(it.t);
            it.numeric_lo = it.numeric_hi = v;
        }

        // same-part pairs: junction kernel table + hitting tables
        std::set<size_t> bar_sources, bar_targets;
        for (const auto& it : items_) {
            if (!it.same_part) continue;
            bar_sources.insert(it.node_x);
            bar_targets.insert(it.node_y);
            bar_targets.insert(it.node_x);
        }
        if (!bar_sources.empty()) {
            const double tau_min = cfg_.t_min * 1e-8;
            std::vector<size_t> targets(bar_targets.begin(), bar_targets.end());
            JunctionKernelTable k0(grid_, targets, tau_min, cfg_.t_max, opts_);
            std::map<size_t, size_t> tindex;
            for (size_t i = 0; i < targets.size(); ++i) tindex[targets[i]] = i;
            std::map<size_t, HittingTable> htabs;
            for (size_t src : bar_sources)
                htabs.emplace(src, HittingTable(grid_, src, tau_min, cfg_.t_max, opts_));
            for (auto& it : items_) {
                if (!it.same_part) continue;
                // hit from the smaller radius; the composition is symmetric
                size_t src = it.node_x, dst = it.node_y;
                if (std::abs(grid_.nodes[dst]) < std::abs(grid_.nodes[src])) std::swap(src, dst);
                const auto h = htabs.find(src);
                const double bar =
                    bar_p_from_tables(it.t, h->second, k0, tindex.at(dst));
                const bool primary = it.x.part == Part::SideD;
                const int k = cfg_.params.side_dim(primary);
                const double c0 = std::pow(2.0 * M_PI, -0.5 * k);
                const EnvelopeConstants kc{c0 / cfg_.killed_slack, cfg_.e_lower,
                                           c0 * cfg_.killed_slack, cfg_.e_upper};
                const auto [klo, khi] = killed_part_envelope(it.t, it.x, it.y, cfg_.params, kc);
                it.numeric_lo = bar + klo;
                it.numeric_hi = bar + khi;
            }
        }
    }

    SandwichReport assemble(Family fam) {
        SandwichReport rep;
        rep.campaign = cfg_.family;
        std::map<std::string, std::vector<FitSample>> groups;
        std::map<std::string, size_t> skipped;
        std::vector<std::tuple<std::string, detail::PairItem, FitSample>> rows;
        for (const auto& it : items_) {
            const std::string id = regime_id(it.regime);
            FitSample s;
            s.t = it.t;
            s.terms = shape_terms(it.regime, it.t, it.x, it.y, cfg_.params);
            s.numeric_lo = it.numeric_lo;
            s.numeric_hi = it.numeric_hi;
            const double sh = eval_terms(s.terms, 1.0);
            double g_min = std::numeric_limits<double>::infinity();
            for (const auto& tm : s.terms) g_min = std::min(g_min, tm.g);
            // value below the solver's resolution: untestable at desk scale
            if (g_min > cfg_.g_cap || s.numeric_hi <= 0.0 || sh < 1e-280 ||
                s.numeric_hi < 1e-280) {
                ++skipped[id];
                continue;
            }
            groups[id].push_back(s);
            rows.emplace_back(id, it, s);
        }
        for (auto& [id, samples] : groups)
            rep.regimes.push_back(assess_regime(id, samples, cfg_, skipped[id]));
        for (auto& r : rep.regimes) rep.pass = rep.pass && r.pass;

        for (const auto& [id, it, s] : rows) {
            const RegimeReport* rr = rep.regime(id);
            SandwichRow row;
            row.t = it.t;
            row.part_x = it.x.part;
            row.r_x = radial_excess(it.x, cfg_.params);
            row.part_y = it.y.part;
            row.r_y = radial_excess(it.y, cfg_.params);
            row.dist_xy = same_part_distance(it.x, it.y);
            row.regime_id = id;
            row.shape = eval_terms(s.terms, 1.0);
            row.lower = rr->fit.k.c_lower * eval_terms(s.terms, rr->fit.k.e_lower);
            row.upper = rr->fit.k.c_upper * eval_terms(s.terms, rr->fit.k.e_upper);
            row.numeric_lo = s.numeric_lo;
            row.numeric_hi = s.numeric_hi;
            row.pass = row.lower <= s.numeric_lo * (1.0 + 1e-12) &&
                       s.numeric_hi <= row.upper * (1.0 + 1e-12);
            rep.rows.push_back(row);
        }
        return rep;
    }

    CampaignConfig cfg_;
    RadialGrid grid_;
    SolveOpts opts_;
    std::vector<detail::PairItem> items_;
};

// ---------------------------------------------------------------------------
// Report output

inline void write_csv(const std::string& path, const std::string& header,
                      const std::vector<std::string>& lines) {
    std::filesystem::create_directories(std::filesystem::path(path).parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << header << "\n";
    for (const auto& l : lines) out << l << "\n";
}

inline std::vector<std::string> sandwich_csv_lines(const SandwichReport& rep) {
    std::vector<std::string> lines;
    for (const auto& r : rep.rows) {
        std::ostringstream ss;
        ss.precision(12);
        ss << r.t << ',' << part_name(r.part_x) << ',' << r.r_x << ',' << part_name(r.part_y)
           << ',' << r.r_y << ',' << (std::isinf(r.dist_xy) ? -1.0 : r.dist_xy) << ','
           << r.regime_id << ',' << r.shape << ',' << r.lower << ',' << r.upper << ','
           << r.numeric_lo << ',' << r.numeric_hi << ',' << (r.pass ? 1 : 0);
        lines.push_back(ss.str());
    }
    return lines;
}

inline const char* sandwich_csv_header() {
    return "t,part_x,r_x,part_y,r_y,dist_xy,regime_id,shape,lower,upper,numeric_lo,numeric_hi,pass";
}

inline nlohmann::json params_json(const SpaceParams& sp) {
    return {{"d", sp.d},           {"d_prime", sp.d_prime}, {"eps", sp.eps},
            {"eps_prime", sp.eps_prime}, {"p", sp.p},       {"beta", sp.beta()}};
}

inline nlohmann::json regimes_json(const SandwichReport& rep) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rep.regimes) {
        arr.push_back({{"regime_id", r.regime_id},
                       {"c_lower", r.fit.k.c_lower},
                       {"e_lower", r.fit.k.e_lower},
                       {"c_upper", r.fit.k.c_upper},
                       {"e_upper", r.fit.k.e_upper},
                       {"n_samples", r.n_samples},
                       {"n_skipped", r.n_skipped},
                       {"pass_rate", r.pass_rate},
                       {"uniform_ok", r.uniform_ok},
                       {"uniform_factor", r.uniform_factor},
                       {"robust_checked", r.robust_checked},
                       {"robust_factor", r.robust_factor},
                       {"pass", r.pass}});
    }
    return arr;
}

inline void write_summary_json(const std::string& path, const std::string& campaign,
                               const CampaignConfig& cfg, bool pass, nlohmann::json detail) {
    std::filesystem::create_directories(std::filesystem::path(path).parent_path());
    nlohmann::json j = {{"campaign", campaign},
                        {"experiment_id", cfg.experiment_id},
                        {"params", params_json(cfg.params)},
                        {"solver",
                         {{"n_cells", cfg.n_cells},
                          {"steps_per_decade", cfg.steps_per_decade},
                          {"grading_ratio", cfg.grading_ratio},
                          {"h_min", cfg.h_min},
                          {"span_margin", cfg.span_margin}}},
                        {"pass", pass},
                        {"seed", cfg.mc.seed},
                        {"config_hash", config_content_hash(cfg.config_text)},
                        {"detail", std::move(detail)}};
    std::ofstream out(path);
    out << j.dump(2) << "\n";
}

// Kernel fields export as (y_i, M_i, u_i) with solver parameters echoed in
// the header comment line.
inline void write_kernel_field_csv(const std::string& path, const RadialGrid& g,
                                   const KernelField& kf) {
    std::filesystem::create_directories(std::filesystem::path(path).parent_path());
    std::ofstream out(path);
    out << "# t=" << kf.t << " source=" << kf.source << " leak=" << kf.leak
        << " n_nodes=" << g.size() << "\n";
    out << "y,mass,u\n";
    out.precision(12);
    for (size_t i = 0; i < g.size(); ++i)
        out << g.nodes[i] << ',' << g.mass[i] << ',' << kf.u[i] << "\n";
}

inline void write_ensemble_csv(const std::string& path, const PathEnsemble& ens) {
    std::filesystem::create_directories(std::filesystem::path(path).parent_path());
    std::ofstream out(path);
    out << "path_id,terminal,hit_time_or_nan,killed_flag\n";
    out.precision(12);
    for (size_t i = 0; i < ens.n(); ++i) {
        out << i << ',' << ens.terminal[i] << ',' << ens.hit_time[i] << ','
            << (ens.killed.empty() ? 0 : ens.killed[i]) << "\n";
    }
}

}  // namespace bmvd
