#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "bmvd/radial.hpp"
#include "bmvd/rng.hpp"
#include "bmvd/space.hpp"

namespace bmvd {

struct MCConfig {
    size_t n_paths = 100000;
    double dt = 1e-3;
    double junction_band = 0.0;  // 0 selects the default 4 sqrt(dt)
    uint64_t seed = 20240901;
    unsigned n_threads = 1;

    double band() const { return junction_band > 0.0 ? junction_band : 4.0 * std::sqrt(dt); }

    void validate() const {
        if (!(dt > 0.0)) throw std::invalid_argument("MCConfig: dt must be > 0");
        if (band() < 4.0 * std::sqrt(dt) * (1.0 - 1e-12))
            throw std::invalid_argument("MCConfig: junction band must be >= 4 sqrt(dt)");
        if (n_paths < 1000)
            throw std::invalid_argument("MCConfig: need >= 1e3 paths for reported statistics");
    }
};

struct PathEnsemble {
    double t = 0.0;
    uint64_t seed = 0;
    std::vector<double> terminal;        // signed radial value; NaN when killed
    std::vector<double> hit_time;        // first passage of 0 / kill time; NaN if none
    std::vector<uint8_t> killed;         // only used by the killed exterior sampler
    std::vector<double> terminal_coords; // flattened coordinates (killed sampler)

    size_t n() const { return terminal.size(); }
    size_t killed_count() const {
        size_t c = 0;
        for (uint8_t k : killed) c += k;
        return c;
    }
};

inline double radial_drift(double y, const SpaceParams& sp) {
    if (y > 0.0) return sp.d == 1 ? 0.0 : (sp.d - 1) / (2.0 * (y + sp.eps));
    if (y < 0.0) return sp.d_prime == 1 ? 0.0 : (sp.d_prime - 1) / (2.0 * (y - sp.eps_prime));
    return 0.0;
}

struct StepResult {
    double y;
    bool hit;          // the path touched 0 during this step
    double hit_frac;   // fraction of dt at which the touch happened
};

// One exact skew step with the drift frozen. The next position's law from
// y >= 0 has density phi(z - y) + beta sgn(z) phi(|z| + y): realized by
// drawing the reflected magnitude a = |y + sqrt(dt) Z| and selecting the side
// with probability (phi(a-y) + beta phi(a+y)) / (phi(a-y) + phi(a+y)), which
// collapses to (1+beta)/2 at y = 0. Touches of the origin are recorded via a
// sign change or the Brownian bridge minimum law.
inline StepResult skew_junction_step(double y, double dt, double beta, PhiloxRng& rng) {
    if (y < 0.0) {
        StepResult r = skew_junction_step(-y, dt, -beta, rng);
        r.y = -r.y;
        return r;
    }
    const double g = y + std::sqrt(dt) * rng.normal();
    const double a = std::abs(g);
    const double w = std::exp(-2.0 * a * y / dt);  // phi(a+y)/phi(a-y)
    const double p_plus = (1.0 + beta * w) / (1.0 + w);
    const bool up = rng.uniform() < p_plus;
    const double z = up ? a : -a;
    if (y == 0.0) return {z, true, 0.0};
    if (z < 0.0) {
        const double frac = y / (y + a + 1e-300);
        return {z, true, frac};
    }
    // same side: P(touched | endpoint) = (1+beta) w / (1 + beta w)
    const double pcross = (1.0 + beta) * w / (1.0 + beta * w);
    if (pcross > 1e-17 && rng.uniform() < pcross) return {z, true, 0.5};
    return {z, false, 0.0};
}

inline StepResult step_radial_ex(double y, double dt, const SpaceParams& sp, PhiloxRng& rng,
                                 double band) {
    if (std::abs(y) <= band) {
        // drift impulse split off, then the exact driftless skew step
        return skew_junction_step(y + radial_drift(y, sp) * dt, dt, sp.beta(), rng);
    }
    const double g = y + radial_drift(y, sp) * dt + std::sqrt(dt) * rng.normal();
    if (g == 0.0 || (g > 0.0) != (y > 0.0)) {
        // Crossed outside the band (rare with band >= 4 sqrt(dt)); treat like
        // a junction crossing.
        const bool up = rng.uniform() < 0.5 * (1.0 + sp.beta());
        const double frac = std::abs(y) / (std::abs(y) + std::abs(g));
        return {up ? std::abs(g) : -std::abs(g), true, frac};
    }
    const double pcross = std::exp(-2.0 * std::abs(y) * std::abs(g) / dt);
    if (pcross > 1e-17 && rng.uniform() < pcross) return {g, true, 0.5};
    return {g, false, 0.0};
}

inline double step_radial(double y, double dt, const SpaceParams& sp, PhiloxRng& rng,
                          double band = -1.0) {
    return step_radial_ex(y, dt, sp, rng, band < 0.0 ? 4.0 * std::sqrt(dt) : band).y;
}

namespace detail {

template <typename Fn>
inline void run_paths(size_t n_paths, unsigned n_threads, const Fn& body) {
    if (n_threads <= 1) {
        for (size_t i = 0; i < n_paths; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    const size_t chunk = (n_paths + n_threads - 1) / n_threads;
    for (unsigned w = 0; w < n_threads; ++w) {
        const size_t lo = w * chunk, hi = std::min(n_paths, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace detail

// Independent trajectories of the signed radial diffusion to horizon t, with
// first passage of 0 recorded. Paths are keyed by (seed, path index) so the
// ensemble is identical for any thread count.
inline PathEnsemble sample_paths(double y0, double t, const MCConfig& cfg, const SpaceParams& sp) {
    cfg.validate();
    if (!(t > 0.0)) throw std::invalid_argument("sample_paths: t must be > 0");
    PathEnsemble out;
    out.t = t;
    out.seed = cfg.seed;
    out.terminal.resize(cfg.n_paths);
    out.hit_time.resize(cfg.n_paths);
    const double band = cfg.band();
    const size_t n_steps = static_cast<size_t>(std::ceil(t / cfg.dt));
    detail::run_paths(cfg.n_paths, cfg.n_threads, [&](size_t i) {
        PhiloxRng rng(cfg.seed, i);
        double y = y0;
        double hit = std::numeric_limits<double>::quiet_NaN();
        double tau = 0.0;
        for (size_t k = 0; k < n_steps; ++k) {
            const double dt = std::min(cfg.dt, t - tau);
            const StepResult st = step_radial_ex(y, dt, sp, rng, band);
            if (st.hit && std::isnan(hit)) hit = tau + st.hit_frac * dt;
            y = st.y;
            tau += dt;
        }
        out.terminal[i] = y;
        out.hit_time[i] = hit;
    });
    return out;
}

struct DensityEstimate {
    double value = 0.0;
    double std_error = 0.0;
    double cell_mass = 0.0;
    size_t count = 0;
};

// Unbiased estimator of the cell-averaged speed-measure kernel p_w(t, y0, .):
// occupation frequency of [a, b) divided by the cell mass.
inline DensityEstimate estimate_density(const PathEnsemble& ens, double a, double b,
                                        const SpaceParams& sp) {
    if (!(b > a)) throw std::domain_error("estimate_density: empty cell");
    const double mass = radial_weight_integral(a, b, sp);
    if (!(mass > 0.0)) throw std::domain_error("estimate_density: cell has no mass");
    size_t c = 0;
    for (double v : ens.terminal)
        if (!std::isnan(v) && v >= a && v < b) ++c;
    const double n = static_cast<double>(ens.n());
    const double q = c / n;
    DensityEstimate de;
    de.value = q / mass;
    de.std_error = std::sqrt(q * (1.0 - q) / n) / mass;
    de.cell_mass = mass;
    de.count = c;
    return de;
}

// Euler paths of Brownian motion on one exterior domain, killed on the gluing
// sphere. Endpoint kills are exact; in-step kills use the half-space bridge
// crossing probability along the radial direction.
inline PathEnsemble sample_killed_exterior(const GluedPoint& x0, double t, const MCConfig& cfg,
                                           const SpaceParams& sp) {
    cfg.validate();
    validate_point(x0, sp);
    if (x0.part == Part::Junction)
        throw std::invalid_argument("sample_killed_exterior: start on a side");
    const bool primary = x0.part == Part::SideD;
    const int k = sp.side_dim(primary);
    if (k < 2)
        throw std::invalid_argument(
            "sample_killed_exterior: 1-dimensional side uses exact laws instead");
    const double eps = sp.side_eps(primary);

    PathEnsemble out;
    out.t = t;
    out.seed = cfg.seed;
    out.terminal.assign(cfg.n_paths, std::numeric_limits<double>::quiet_NaN());
    out.hit_time.assign(cfg.n_paths, std::numeric_limits<double>::quiet_NaN());
    out.killed.assign(cfg.n_paths, 0);
    out.terminal_coords.assign(cfg.n_paths * k, std::numeric_limits<double>::quiet_NaN());

    const size_t n_steps = static_cast<size_t>(std::ceil(t / cfg.dt));
    detail::run_paths(cfg.n_paths, cfg.n_threads, [&](size_t i) {
        PhiloxRng rng(cfg.seed, i);
        std::vector<double> x = x0.coords;
        double tau = 0.0;
        double a = euclid_norm(x) - eps;
        for (size_t step = 0; step < n_steps; ++step) {
            const double dt = std::min(cfg.dt, t - tau);
            const double sq = std::sqrt(dt);
            double norm2 = 0.0;
            for (int c = 0; c < k; ++c) {
                x[c] += sq * rng.normal();
                norm2 += x[c] * x[c];
            }
            const double b = std::sqrt(norm2) - eps;
            if (b <= 0.0) {
                out.killed[i] = 1;
                out.hit_time[i] = tau + dt * a / (a - b + 1e-300);
                return;
            }
            const double pcross = std::exp(-2.0 * a * b / dt);
            if (pcross > 1e-17 && rng.uniform() < pcross) {
                out.killed[i] = 1;
                out.hit_time[i] = tau + 0.5 * dt;
                return;
            }
            a = b;
            tau += dt;
        }
        out.terminal[i] = (primary ? 1.0 : -1.0) * a;
        for (int c = 0; c < k; ++c) out.terminal_coords[i * k + c] = x[c];
    });
    return out;
}

// Fraction of surviving paths inside the Euclidean ball B(center, h), divided
// by its m_p measure: a killed-kernel cell estimate. The ball must avoid the
// gluing sphere.
inline DensityEstimate occupancy_estimate(const PathEnsemble& ens, const std::vector<double>& center,
                                          double h, bool primary_side, const SpaceParams& sp) {
    const int k = sp.side_dim(primary_side);
    if (static_cast<int>(center.size()) != k)
        throw std::invalid_argument("occupancy_estimate: center dimension mismatch");
    if (!(euclid_norm(center) - sp.side_eps(primary_side) > h))
        throw std::domain_error("occupancy_estimate: ball touches the gluing sphere");
    const double wt = primary_side ? 1.0 : sp.p;
    const double mass = wt * ball_volume(k) * std::pow(h, k);
    size_t c = 0;
    const size_t n = ens.killed.size();
    for (size_t i = 0; i < n; ++i) {
        if (ens.killed[i]) continue;
        double d2 = 0.0;
        for (int j = 0; j < k; ++j) {
            const double dj = ens.terminal_coords[i * k + j] - center[j];
            d2 += dj * dj;
        }
        if (d2 < h * h) ++c;
    }
    const double q = static_cast<double>(c) / n;
    return {q / mass, std::sqrt(q * (1.0 - q) / n) / mass, mass, c};
}

// Empirical P(sigma <= t) with binomial standard error.
inline std::pair<double, double> hitting_cdf_estimate(const PathEnsemble& ens, double t) {
    size_t c = 0;
    for (double h : ens.hit_time)
        if (!std::isnan(h) && h <= t) ++c;
    const double n = static_cast<double>(ens.n());
    const double q = c / n;
    return {q, std::sqrt(q * (1.0 - q) / n)};
}

}  // namespace bmvd
