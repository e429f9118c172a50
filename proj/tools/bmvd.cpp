// Command-line driver for the verification campaigns: deterministic PDE
// oracle, Monte Carlo cross-checks, envelope fitting, and report emission.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "bmvd/campaigns.hpp"

namespace fs = std::filesystem;
using namespace bmvd;

namespace {

CampaignConfig load_campaign(const std::string& config_path, const std::string& out_dir) {
    IniConfig ini = IniConfig::load(config_path);
    CampaignConfig cfg = campaign_from_ini(ini);
    cfg.out_dir = out_dir;
    return cfg;
}

std::string join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

int run_ondiag(const CampaignConfig& cfg) {
    const OndiagReport rep = ondiag_campaign(cfg);
    write_csv(join(cfg.out_dir, "ondiag.csv"), "t,p_diag,rate_shape", ondiag_csv_lines(rep));
    nlohmann::json detail = {{"slope", rep.slope}, {"log_case", rep.log_case}};
    if (rep.log_case) detail["band_factor"] = rep.band_factor;
    write_summary_json(join(cfg.out_dir, "ondiag_summary.json"), "ondiag", cfg, true, detail);
    std::printf("ondiag: slope %.4f over [%g, %g]%s\n", rep.slope, cfg.od_t_min, cfg.od_t_max,
                rep.log_case ? " (log-corrected band in summary)" : "");
    return 0;
}

int run_sandwich(const CampaignConfig& cfg) {
    SandwichCampaign camp(cfg);
    const SandwichReport rep = camp.run();
    write_csv(join(cfg.out_dir, "sandwich_" + cfg.family + ".csv"), sandwich_csv_header(),
              sandwich_csv_lines(rep));
    write_summary_json(join(cfg.out_dir, "sandwich_" + cfg.family + "_summary.json"),
                       "sandwich:" + cfg.family, cfg, rep.pass, regimes_json(rep));
    for (const auto& r : rep.regimes)
        std::printf("%-32s n=%5zu pass_rate=%.3f uniform=%.2f %s\n", r.regime_id.c_str(),
                    r.n_samples, r.pass_rate, r.uniform_factor, r.pass ? "PASS" : "FAIL");
    std::printf("sandwich %s: %s\n", cfg.family.c_str(), rep.pass ? "PASS" : "FAIL");
    return rep.pass ? 0 : 1;
}

int run_hitting(const CampaignConfig& cfg) {
    const HittingReport rep = hitting_campaign(cfg);
    write_csv(join(cfg.out_dir, "hitting.csv"), "side,r,t,cdf_pde,cdf_mc,se_mc,shape,extended",
              hitting_csv_lines(rep));
    write_summary_json(join(cfg.out_dir, "hitting_summary.json"), "hitting", cfg, rep.pass,
                       {{"ratio_band", rep.ratio_band}, {"near_start_cdf", rep.near_start_cdf}});
    std::printf("hitting: ratio band %.3f, near-start cdf %.3f -> %s\n", rep.ratio_band,
                rep.near_start_cdf, rep.pass ? "PASS" : "FAIL");
    return rep.pass ? 0 : 1;
}

int run_consistency(const CampaignConfig& cfg) {
    const ConsistencyReport rep = consistency_campaign(cfg);
    write_csv(join(cfg.out_dir, "consistency.csv"), "check,value,bound,pass",
              consistency_csv_lines(rep));
    nlohmann::json detail = nlohmann::json::array();
    for (const auto& c : rep.checks)
        detail.push_back({{"check", c.name}, {"value", c.value}, {"bound", c.bound},
                          {"pass", c.pass}});
    write_summary_json(join(cfg.out_dir, "consistency_summary.json"), "consistency", cfg,
                       rep.pass, detail);
    for (const auto& c : rep.checks)
        std::printf("%-40s %.3e (bound %.3e) %s\n", c.name.c_str(), c.value, c.bound,
                    c.pass ? "PASS" : "FAIL");
    return rep.pass ? 0 : 1;
}

int run_vd(const CampaignConfig& cfg) {
    const VdReport rep = vd_check_campaign(cfg);
    write_csv(join(cfg.out_dir, "vd_check.csv"), "r,ball_r,ball_2r,ratio,product",
              vd_csv_lines(rep));
    write_summary_json(join(cfg.out_dir, "vd_check_summary.json"), "vd-check", cfg, rep.pass,
                       {{"product_band", rep.product_band},
                        {"oracle_ok", rep.oracle_ok},
                        {"oracle_checked", rep.oracle_checked}});
    std::printf("vd-check: product band %.3f, oracle %zu/%zu -> %s\n", rep.product_band,
                rep.oracle_ok, rep.oracle_checked, rep.pass ? "PASS" : "FAIL");
    return rep.pass ? 0 : 1;
}

int run_mc_vs_pde(const CampaignConfig& cfg, bool dump_ensemble) {
    const McPdeReport rep = mc_vs_pde_campaign(cfg);
    write_csv(join(cfg.out_dir, "mc_vs_pde.csv"), "t,y0,cell_lo,cell_hi,mc,se,pde,z",
              mc_pde_csv_lines(rep));
    write_summary_json(join(cfg.out_dir, "mc_vs_pde_summary.json"), "mc-vs-pde", cfg, rep.pass,
                       {{"within_3se", rep.within_3se},
                        {"cases", rep.rows.size()},
                        {"ks_stat", rep.ks_stat},
                        {"ks_critical", rep.ks_critical}});
    if (dump_ensemble) {
        PathEnsemble ens = sample_paths(0.5, 1.0, cfg.mc, cfg.params);
        write_ensemble_csv(join(cfg.out_dir, "ensemble.csv"), ens);
    }
    std::printf("mc-vs-pde: %zu/%zu within 3 SE, KS %.4f (crit %.4f) -> %s\n", rep.within_3se,
                rep.rows.size(), rep.ks_stat, rep.ks_critical, rep.pass ? "PASS" : "FAIL");
    return rep.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Brownian motion with varying dimension: verification campaigns"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", theorem;
    bool dump_ensemble = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "campaign config file (key = value sections)")
            ->required();
        sub->add_option("--out", out_dir, "output directory");
    };

    CLI::App* ondiag = app.add_subcommand("ondiag", "on-diagonal decay of p(t, a*, a*)");
    add_common(ondiag);
    CLI::App* sandwich = app.add_subcommand("sandwich", "two-sided envelope campaign");
    add_common(sandwich);
    sandwich->add_option("--theorem", theorem,
                         "estimate family: small | large_line | large_plane_line | "
                         "large_plane_plane | large_bulk_plane | large_bulk_bulk");
    CLI::App* hitting = app.add_subcommand("hitting", "junction hitting-law campaign");
    add_common(hitting);
    CLI::App* consistency = app.add_subcommand("consistency", "structural identity checks");
    add_common(consistency);
    CLI::App* vd = app.add_subcommand("vd-check", "volume doubling failure check");
    add_common(vd);
    CLI::App* mcpde = app.add_subcommand("mc-vs-pde", "Monte Carlo vs PDE oracle agreement");
    add_common(mcpde);
    mcpde->add_flag("--dump-ensemble", dump_ensemble, "also export a path ensemble CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        CampaignConfig cfg = load_campaign(config_path, out_dir);
        if (app.got_subcommand(ondiag)) return run_ondiag(cfg);
        if (app.got_subcommand(sandwich)) {
            if (!theorem.empty()) cfg.family = theorem;
            return run_sandwich(cfg);
        }
        if (app.got_subcommand(hitting)) return run_hitting(cfg);
        if (app.got_subcommand(consistency)) return run_consistency(cfg);
        if (app.got_subcommand(vd)) return run_vd(cfg);
        if (app.got_subcommand(mcpde)) return run_mc_vs_pde(cfg, dump_ensemble);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
