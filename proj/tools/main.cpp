#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fbmq/csvio.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read config file: " + path);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

struct CommandContext {
    fbmq::RunConfig config;
    fbmq::OutputWriter writer;
    Clock::time_point start = Clock::now();

    fbmq::Sidecar sidecar(long n_accepted = 0, long n_proposed = 0) const {
        fbmq::Sidecar s;
        s.config_hash = fbmq::config_hash(config);
        s.seed = config.experiment.seed.seed;
        s.n_accepted = n_accepted;
        s.n_proposed = n_proposed;
        s.wall_time = seconds_since(start);
        return s;
    }
};

void run_constants(CommandContext& ctx) {
    const auto& cfg = ctx.config.experiment;
    const fbmq::LimitConstants kc = fbmq::limit_constants(cfg.params);

    nlohmann::json doc;
    doc["kappa1"] = kc.kappa1;
    doc["kappa2"] = kc.kappa2;
    doc["kappa3"] = kc.kappa3;
    nlohmann::json per_level = nlohmann::json::array();
    for (double b : cfg.b_grid) {
        nlohmann::json row;
        row["b"] = b;
        row["t_star"] = fbmq::t_star(b, cfg.params);
        if (cfg.params.hurst.value() > 0.5) {
            try {
                const fbmq::WindowGeometry wg = fbmq::window_geometry(b, cfg.r, cfg.params);
                row["window"] = {{"t_L", wg.t_L},
                                 {"t_R", wg.t_R},
                                 {"D", wg.D},
                                 {"t_tilde_L", wg.t_tilde_L}};
            } catch (const std::invalid_argument&) {
                row["window"] = nullptr;  // b too small for this r
            }
        }
        per_level.push_back(row);
    }
    doc["t_star"] = per_level;
    if (cfg.params.hurst.value() > 0.5) {
        const fbmq::FeasibilityResult fr = fbmq::proof_params_feasible(cfg.params.hurst);
        doc["feasible"] = fr.feasible;
        if (fr.feasible)
            doc["proof_params"] = {{"r", fr.params.r},
                                   {"gamma", fr.params.gamma},
                                   {"eta1", fr.params.eta1},
                                   {"eta3", fr.params.eta3},
                                   {"delta", fr.params.delta}};
    } else {
        doc["feasible"] = false;
    }

    const std::string text = doc.dump(2) + "\n";
    std::cout << text;
    ctx.writer.write_json("constants.json", text);
}

void run_sample(CommandContext& ctx) {
    const auto& cfg = ctx.config.experiment;
    const double b = cfg.b_grid.front();
    fbmq::EnsembleOptions opt;
    opt.max_paths_kept = 5;
    const fbmq::ConditionalEnsemble ens =
        cfg.sampler == fbmq::SamplerKind::rejection
            ? fbmq::rejection_conditional_ensemble(b, cfg, opt)
            : fbmq::endpoint_conditioned_ensemble(b, cfg, opt);

    for (std::size_t i = 0; i < ens.workload_paths.size(); ++i) {
        fbmq::Table t;
        t.header = {"t", "W"};
        const auto& p = ens.workload_paths[i];
        for (Eigen::Index k = 0; k < p.grid.n_points; ++k)
            t.rows.push_back({p.grid.time(k), p.values[k]});
        ctx.writer.write_table("workload_path_" + std::to_string(i), t,
                               ctx.sidecar(ens.n_accepted, ens.n_proposed));
    }

    fbmq::Table stats;
    stats.header = {"tau_L", "tau_R", "overshoot", "V_b", "censored_L", "censored_R"};
    for (const auto& ps : ens.stats)
        stats.rows.push_back({ps.cycle.tau_L, ps.cycle.tau_R, ps.cycle.overshoot,
                              ps.cycle.sojourn, ps.cycle.censored_left ? 1.0 : 0.0,
                              ps.cycle.censored_right ? 1.0 : 0.0});
    ctx.writer.write_table("cycle_stats", stats, ctx.sidecar(ens.n_accepted, ens.n_proposed));
}

void run_tail(CommandContext& ctx) {
    const auto& cfg = ctx.config.experiment;
    fbmq::Table t;
    t.header = {"b", "estimate", "stderr", "n_accepted", "n_proposed", "hp_exact",
                "hp_simplified"};
    long acc = 0, prop = 0;

    std::vector<fbmq::EstimatorReport> reports;
    Eigen::VectorXd levels(static_cast<Eigen::Index>(cfg.b_grid.size()));
    Eigen::VectorXd estimates(static_cast<Eigen::Index>(cfg.b_grid.size()));
    for (std::size_t i = 0; i < cfg.b_grid.size(); ++i) {
        fbmq::ExperimentConfig level_cfg = cfg;
        level_cfg.seed.stream_index += static_cast<std::uint64_t>(i) << 32;
        const fbmq::EstimatorReport rep =
            fbmq::tail_probability_estimate(cfg.b_grid[i], level_cfg, cfg.n_target);
        reports.push_back(rep);
        levels[static_cast<Eigen::Index>(i)] = cfg.b_grid[i];
        estimates[static_cast<Eigen::Index>(i)] = rep.estimate;
        acc += rep.n_accepted;
        prop += rep.n_proposed;
    }

    bool have_tail_model = false;
    fbmq::TailModel tm = fbmq::TailModel::user_supplied(1.0);
    try {
        tm = fbmq::calibrate_tail_prefactor(levels, estimates, cfg.params);
        have_tail_model = true;
    } catch (const std::invalid_argument&) {
        // all estimates zero; tail columns stay NaN
    }

    for (std::size_t i = 0; i < cfg.b_grid.size(); ++i) {
        const auto& rep = reports[i];
        double hp_exact = std::nan(""), hp_simpl = std::nan("");
        if (have_tail_model) {
            const fbmq::HpTail hp = fbmq::hp_tail(cfg.b_grid[i], cfg.params, tm);
            hp_exact = hp.exact_form;
            hp_simpl = hp.simplified_form;
        }
        t.rows.push_back({cfg.b_grid[i], rep.estimate, rep.stderr_,
                          static_cast<double>(rep.n_accepted),
                          static_cast<double>(rep.n_proposed), hp_exact, hp_simpl});
    }
    ctx.writer.write_table("tail", t, ctx.sidecar(acc, prop));
}

void run_verify_overshoot(CommandContext& ctx) {
    const auto& cfg = ctx.config.experiment;
    const double kappa2 = fbmq::limit_constants(cfg.params).kappa2;
    fbmq::Table t;
    t.header = {"b", "n", "ks_stat", "p_value", "mean_scaled", "target_mean"};
    long acc = 0, prop = 0;
    for (std::size_t i = 0; i < cfg.b_grid.size(); ++i) {
        fbmq::ExperimentConfig level_cfg = cfg;
        level_cfg.seed.stream_index += static_cast<std::uint64_t>(i) << 32;
        const fbmq::OvershootTest ot = fbmq::overshoot_test(cfg.b_grid[i], level_cfg);
        t.rows.push_back({cfg.b_grid[i], static_cast<double>(ot.n_accepted), ot.ks.statistic,
                          ot.ks.p_value, ot.scaled_mean.mean, 1.0 / kappa2});
        acc += ot.n_accepted;
        prop += ot.n_proposed;
    }
    ctx.writer.write_table("overshoot", t, ctx.sidecar(acc, prop));
}

void run_verify_clump(CommandContext& ctx) {
    const auto& cfg = ctx.config.experiment;
    const fbmq::ClumpRegression reg = fbmq::clump_scaling_regression(cfg);
    fbmq::Table t;
    t.header = {"b", "n_uncensored", "median_Vb", "censored_fraction", "endpoint_sampler"};
    long n = 0;
    for (const auto& lvl : reg.levels) {
        t.rows.push_back({lvl.b, static_cast<double>(lvl.n_cycles), lvl.median_sojourn,
                          lvl.censored_fraction,
                          lvl.sampler_used == fbmq::SamplerKind::endpoint_conditioned ? 1.0
                                                                                      : 0.0});
        n += lvl.n_cycles;
    }
    ctx.writer.write_table("clump", t, ctx.sidecar(n, 0));

    const double h = cfg.params.hurst.value();
    nlohmann::json fit;
    fit["slope"] = reg.slope;
    fit["intercept"] = reg.intercept;
    fit["slope_ci"] = reg.slope_ci;
    fit["target_slope"] = h > 0.5 ? 2.0 - 1.0 / h : 0.0;
    ctx.writer.write_json("clump_fit.json", fit.dump(2) + "\n");
}

void run_verify_hitting(CommandContext& ctx) {
    const auto& cfg = ctx.config.experiment;
    const auto rows = fbmq::hitting_concentration(cfg);
    fbmq::Table t;
    t.header = {"b", "n", "fraction", "stderr", "epsilon", "r"};
    long n = 0;
    for (const auto& row : rows) {
        t.rows.push_back({row.b, static_cast<double>(row.n_accepted), row.fraction,
                          row.stderr_, 1.0, cfg.r});
        n += row.n_accepted;
    }
    ctx.writer.write_table("hitting", t, ctx.sidecar(n, 0));
}

void run_verify_conditioning(CommandContext& ctx) {
    const auto& cfg = ctx.config.experiment;
    cfg.params.hurst.require_long_range();
    const double h = cfg.params.hurst.value();
    const double mu = cfg.params.mu();

    fbmq::Table t;
    t.header = {"s", "closed_form", "oracle", "abs_err", "rel_err"};
    for (double b : cfg.b_grid) {
        const fbmq::WindowGeometry wg = fbmq::window_geometry(b, cfg.r, cfg.params);
        const double x_obs = -b;
        for (double s : {-2.0, -1.0, -0.5, 0.5, 1.0, 2.0}) {
            const double closed = fbmq::cond_mean_one_endpoint(s, b, cfg.params, cfg.r, x_obs);

            const double u = s * std::pow(b, 2.0 - 1.0 / h);
            Eigen::MatrixXd cov(2, 2);
            const double times[2] = {-wg.t_L, u};
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    cov(i, j) = fbmq::fbm_covariance(times[i], times[j], cfg.params.hurst);
            Eigen::VectorXd obs(1);
            obs[0] = (x_obs - mu * wg.t_L) / cfg.params.theta;
            const auto cond = fbmq::gaussian_condition_oracle(cov, {0}, obs, {1});
            const double oracle =
                std::pow(b, 1.0 - 2.0 * h) *
                (cfg.params.theta * cond.mean[0] - mu * u);
            const double abs_err = std::abs(closed - oracle);
            const double rel_err =
                abs_err / std::max({std::abs(closed), std::abs(oracle), 1e-300});
            t.rows.push_back({s, closed, oracle, abs_err, rel_err});
        }
    }
    ctx.writer.write_table("conditioning", t, ctx.sidecar());
}

void run_limit_process(CommandContext& ctx) {
    const auto& cfg = ctx.config.experiment;
    const fbmq::LimitConstants kc = fbmq::limit_constants(cfg.params);
    const fbmq::LimitProcessResult res =
        fbmq::limit_process_ensemble(cfg, 8.0, {-1.0, 1.0});

    fbmq::Table drift;
    drift.header = {"t", "mean_Y_minus_Y0", "stderr", "target"};
    for (const auto& row : res.drift)
        drift.rows.push_back({row.t, row.mean, row.stderr_, row.target});
    ctx.writer.write_table("limit_drift", drift, ctx.sidecar(res.n_samples, res.n_samples));

    fbmq::Table soj;
    soj.header = {"V"};
    for (Eigen::Index i = 0; i < res.sojourn.size(); ++i)
        soj.rows.push_back({res.sojourn[i]});
    ctx.writer.write_table("limit_sojourn", soj, ctx.sidecar(res.n_samples, res.n_samples));

    const fbmq::MeanStderr y0 = fbmq::mean_stderr(res.y0);
    nlohmann::json summary;
    summary["mean_Y0"] = y0.mean;
    summary["stderr_Y0"] = y0.stderr_;
    summary["target_Y0"] = 1.0 / kc.kappa2;
    summary["horizon"] = res.horizon;
    summary["n_samples"] = res.n_samples;
    ctx.writer.write_json("limit_summary.json", summary.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fluid-queue simulation and verification toolkit for fractional "
                 "Brownian motion input"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    std::string config_path;
    std::string out_dir = "out";
    std::string format = "csv";
    std::uint64_t seed_override = 0;
    bool seed_given = false;

    const std::vector<std::string> names = {"constants",        "sample",
                                            "tail",             "verify-overshoot",
                                            "verify-clump",     "verify-hitting",
                                            "verify-conditioning", "limit-process"};
    for (const auto& name : names) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "path to the JSON config")->required();
        sub->add_option("--out-dir", out_dir, "output directory");
        sub->add_option("--format", format, "csv or json")
            ->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--seed", seed_override, "seed override")
            ->each([&](const std::string&) { seed_given = true; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        fbmq::RunConfig config = fbmq::parse_config(read_file(config_path));
        config.output_dir = out_dir;
        config.format = format == "json" ? fbmq::OutputFormat::json : fbmq::OutputFormat::csv;
        if (seed_given)
            config.experiment.seed.seed = seed_override;
        else if (const char* env = std::getenv("TOOL_SEED"))
            config.experiment.seed.seed = std::strtoull(env, nullptr, 10);

        const std::string sub = app.get_subcommands().front()->get_name();
        fbmq::OutputWriter writer(out_dir, config, kVersion);
        CommandContext ctx{std::move(config), std::move(writer)};

        try {
            if (sub == "constants")
                run_constants(ctx);
            else if (sub == "sample")
                run_sample(ctx);
            else if (sub == "tail")
                run_tail(ctx);
            else if (sub == "verify-overshoot")
                run_verify_overshoot(ctx);
            else if (sub == "verify-clump")
                run_verify_clump(ctx);
            else if (sub == "verify-hitting")
                run_verify_hitting(ctx);
            else if (sub == "verify-conditioning")
                run_verify_conditioning(ctx);
            else if (sub == "limit-process")
                run_limit_process(ctx);
            ctx.writer.finalize();
        } catch (...) {
            ctx.writer.abort();
            throw;
        }
        return 0;
    } catch (const fbmq::config_error& e) {
        nlohmann::json err{{"error", "config"}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 2;
    } catch (const std::exception& e) {
        nlohmann::json err{{"error", "runtime"}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 1;
    }
}
