#include "fbmq/experiments.hpp"

#include <algorithm>
#include <cmath>

namespace fbmq {

EmpiricalDistribution::EmpiricalDistribution(Eigen::VectorXd s) : samples(std::move(s)) {
    if (samples.size() < 1)
        throw std::invalid_argument("EmpiricalDistribution: requires nonempty samples");
    std::sort(samples.data(), samples.data() + samples.size());
}

namespace {

struct SimContext {
    double b;
    double dt;
    Eigen::Index n_past;
    Eigen::Index n_fwd;
    TimeGrid grid;       // n_past + n_fwd + 1 points starting at -T_past
    Eigen::Index origin; // index of t = 0
    bool bridge_sup;     // exact Brownian supremum refinement at H = 1/2
};

SimContext make_context(double b, const ExperimentConfig& cfg, bool past_only) {
    cfg.validate();
    const double h = cfg.params.hurst.value();
    const double ts = t_star(b, cfg.params);
    const double dt = cfg.dt_rule * std::pow(b, 2.0 - 1.0 / h);
    const double t_window = std::max(cfg.window_rule * ts, 16.0 * dt);
    const auto n_past = static_cast<Eigen::Index>(std::ceil(t_window / dt));
    const Eigen::Index n_fwd = past_only ? 0 : n_past;

    SimContext ctx{b,
                   dt,
                   n_past,
                   n_fwd,
                   TimeGrid(-static_cast<double>(n_past) * dt, dt, n_past + n_fwd + 1),
                   n_past,
                   h == 0.5 && cfg.exact_brownian_sup};
    return ctx;
}

// Builds the anchored fBM, netput and Lindley workload for one proposal and
// extracts the origin statistics. Increment draws come first in the stream;
// the per-cell uniforms of the Brownian-bridge refinement follow them.
class ProposalEngine {
  public:
    ProposalEngine(const SimContext& ctx, const ExperimentConfig& cfg)
        : ctx_(ctx),
          cfg_(cfg),
          sampler_(ctx.n_past + ctx.n_fwd, ctx.dt, cfg.params.hurst),
          ws_(FgnSampler::new_workspace()),
          z_(ctx.grid.n_points),
          x_(ctx.grid.n_points),
          w_(ctx.grid.n_points) {}

    ~ProposalEngine() { FgnSampler::delete_workspace(ws_); }

    void run(RngSeed seed) {
        RandomStream bridge_rng(seed);  // shares the stream; uniforms drawn after normals
        sampler_.sample_into(seed, *ws_, inc_);

        const double mu = cfg_.params.mu();
        const double theta = cfg_.params.theta;
        const Eigen::Index n = ctx_.grid.n_points;

        z_[0] = 0.0;
        for (Eigen::Index k = 1; k < n; ++k) z_[k] = z_[k - 1] + inc_[k - 1];
        const double anchor = z_[ctx_.origin];
        for (Eigen::Index k = 0; k < n; ++k)
            x_[k] = -mu * ctx_.grid.time(k) + theta * (z_[k] - anchor);

        w_[0] = 0.0;
        for (Eigen::Index k = 1; k < n; ++k)
            w_[k] = std::max(w_[k - 1] + (x_[k] - x_[k - 1]), 0.0);

        w0_ = w_[ctx_.origin];
        if (ctx_.bridge_sup) {
            // Skip the normals consumed by the path; Philox counters make the
            // uniform draws a deterministic continuation of the same stream.
            const Eigen::Index n_inc = n - 1;
            for (Eigen::Index k = 0; k < n_inc; ++k) (void)bridge_rng.next_normal();
            const double x0 = x_[ctx_.origin];
            double min_level = 0.0;  // X(0) - X(0)
            const double two_var = 2.0 * theta * theta * ctx_.dt;
            for (Eigen::Index k = 0; k < ctx_.origin; ++k) {
                const double a = x_[k], c = x_[k + 1];
                const double gap = c - a;
                const double u = bridge_rng.next_uniform();
                const double cell_min =
                    0.5 * (a + c - std::sqrt(gap * gap - two_var * std::log(u)));
                min_level = std::min(min_level, cell_min - x0);
            }
            w0_ = -min_level;
        }
    }

    double conditioned_run(RngSeed seed, const Eigen::VectorXd& beta,
                           Eigen::Index anchor_idx, double z_target) {
        run(seed);
        const double mu = cfg_.params.mu();
        const double theta = cfg_.params.theta;
        const Eigen::Index n = ctx_.grid.n_points;
        const double z_at_anchor = (x_[anchor_idx] + mu * ctx_.grid.time(anchor_idx)) / theta;
        const double shift = z_target - z_at_anchor;
        for (Eigen::Index k = 0; k < n; ++k) x_[k] += theta * shift * beta[k];
        w_[0] = 0.0;
        for (Eigen::Index k = 1; k < n; ++k)
            w_[k] = std::max(w_[k - 1] + (x_[k] - x_[k - 1]), 0.0);
        w0_ = w_[ctx_.origin];
        return w0_;
    }

    double w0() const { return w0_; }
    const Eigen::VectorXd& workload() const { return w_; }
    const Eigen::VectorXd& netput() const { return x_; }

    double hitting_time_past(double b) const {
        for (Eigen::Index j = 0; j <= ctx_.origin; ++j)
            if (x_[ctx_.origin - j] <= -b) return static_cast<double>(j) * ctx_.dt;
        return -1.0;
    }

    CycleStats cycle_stats(double b) const {
        CycleStats cs;
        cs.overshoot = w0_ - b;
        if (ctx_.n_fwd == 0) return cs;
        const SamplePath wp(ctx_.grid, w_);
        BusyCycle cycle = busy_cycle(wp);
        // The Lindley start W(-T) = 0 is artificial; a cycle that only closes
        // there is left-censored.
        if (!cycle.censored_left && cycle.tau_L == ctx_.grid.time(0))
            cycle.censored_left = true;
        cs.tau_L = cycle.tau_L;
        cs.tau_R = cycle.tau_R;
        cs.censored_left = cycle.censored_left;
        cs.censored_right = cycle.censored_right;
        cs.sojourn = sojourn_above(wp, b, cycle);
        return cs;
    }

  private:
    const SimContext& ctx_;
    const ExperimentConfig& cfg_;
    FgnSampler sampler_;
    FgnSampler::Workspace* ws_;
    Eigen::VectorXd inc_, z_, x_, w_;
    double w0_ = 0.0;
};

using PathObserver = std::function<void(const TimeGrid&, Eigen::Index, const Eigen::VectorXd&,
                                        const PathStats&)>;

ConditionalEnsemble run_rejection(double b, const ExperimentConfig& cfg,
                                  const EnsembleOptions& options, const PathObserver& observer) {
    const SimContext ctx = make_context(b, cfg, options.past_only);
    ProposalEngine engine(ctx, cfg);

    ConditionalEnsemble ens;
    ens.grid = ctx.grid;
    ens.origin = ctx.origin;
    ens.stats.reserve(static_cast<std::size_t>(cfg.n_target));

    while (ens.n_accepted < cfg.n_target) {
        if (ens.n_proposed >= cfg.max_proposals)
            throw acceptance_floor_error(
                "rejection_conditional_ensemble: proposal budget exhausted");
        const auto i = static_cast<std::uint64_t>(ens.n_proposed);
        engine.run(cfg.seed.with_stream(cfg.seed.stream_index + options.stream_offset + i));
        ++ens.n_proposed;
        if (ens.n_proposed >= 50'000 &&
            static_cast<double>(ens.n_accepted + 1) / static_cast<double>(ens.n_proposed) <
                cfg.acceptance_floor)
            throw acceptance_floor_error(
                "rejection_conditional_ensemble: acceptance estimate below the floor");
        if (!(engine.w0() > b)) continue;

        PathStats ps;
        ps.w0 = engine.w0();
        ps.t_hit = engine.hitting_time_past(b);
        ps.cycle = engine.cycle_stats(b);
        ++ens.n_accepted;
        if (ens.workload_paths.size() < options.max_paths_kept)
            ens.workload_paths.emplace_back(ctx.grid, engine.workload());
        if (observer) observer(ctx.grid, ctx.origin, engine.workload(), ps);
        ens.stats.push_back(ps);
    }
    return ens;
}

ConditionalEnsemble run_endpoint(double b, const ExperimentConfig& cfg,
                                 const EnsembleOptions& options, const PathObserver& observer) {
    window_geometry(b, cfg.r, cfg.params);  // validates the window and H > 1/2 range
    const SimContext ctx = make_context(b, cfg, options.past_only);
    ProposalEngine engine(ctx, cfg);

    const double ts = t_star(b, cfg.params);
    const auto j_star = static_cast<Eigen::Index>(std::llround(ts / ctx.dt));
    if (j_star < 1 || j_star > ctx.origin)
        throw std::invalid_argument("endpoint_conditioned_ensemble: t* not inside the window");
    const Eigen::Index anchor_idx = ctx.origin - j_star;
    const double ts_grid = -ctx.grid.time(anchor_idx);
    const double z_target = -(b + cfg.params.mu() * ts_grid) / cfg.params.theta;

    Eigen::VectorXd beta(ctx.grid.n_points);
    const double var_anchor = std::pow(ts_grid, 2.0 * cfg.params.hurst.value());
    for (Eigen::Index k = 0; k < ctx.grid.n_points; ++k)
        beta[k] = fbm_covariance(ctx.grid.time(k), -ts_grid, cfg.params.hurst) / var_anchor;

    ConditionalEnsemble ens;
    ens.grid = ctx.grid;
    ens.origin = ctx.origin;
    ens.approximate = true;
    ens.stats.reserve(static_cast<std::size_t>(cfg.n_target));

    while (ens.n_accepted < cfg.n_target) {
        if (ens.n_proposed >= cfg.max_proposals)
            throw acceptance_floor_error("endpoint_conditioned_ensemble: budget exhausted");
        const auto i = static_cast<std::uint64_t>(ens.n_proposed);
        engine.conditioned_run(
            cfg.seed.with_stream(cfg.seed.stream_index + options.stream_offset + i), beta,
            anchor_idx, z_target);
        ++ens.n_proposed;
        if (!(engine.w0() > b)) continue;  // probability-zero boundary cases only

        PathStats ps;
        ps.w0 = engine.w0();
        ps.t_hit = engine.hitting_time_past(b);
        ps.cycle = engine.cycle_stats(b);
        ++ens.n_accepted;
        if (ens.workload_paths.size() < options.max_paths_kept)
            ens.workload_paths.emplace_back(ctx.grid, engine.workload());
        if (observer) observer(ctx.grid, ctx.origin, engine.workload(), ps);
        ens.stats.push_back(ps);
    }
    return ens;
}

ConditionalEnsemble run_sampler(SamplerKind kind, double b, const ExperimentConfig& cfg,
                                const EnsembleOptions& options,
                                const PathObserver& observer = nullptr) {
    return kind == SamplerKind::rejection ? run_rejection(b, cfg, options, observer)
                                          : run_endpoint(b, cfg, options, observer);
}

}  // namespace

ConditionalEnsemble rejection_conditional_ensemble(double b, const ExperimentConfig& cfg,
                                                   const EnsembleOptions& options) {
    return run_rejection(b, cfg, options, nullptr);
}

ConditionalEnsemble endpoint_conditioned_ensemble(double b, const ExperimentConfig& cfg,
                                                  const EnsembleOptions& options) {
    return run_endpoint(b, cfg, options, nullptr);
}

LimitProcessResult limit_process_ensemble(const ExperimentConfig& cfg, double horizon,
                                          const std::vector<double>& drift_check_times) {
    cfg.validate();
    cfg.params.hurst.require_long_range();
    const LimitConstants kc = limit_constants(cfg.params);
    const double h = cfg.params.hurst.value();
    const double dt = cfg.dt_rule;
    const long n = cfg.n_target;

    double t_hor = horizon;
    for (int attempt = 0; attempt < 24; ++attempt) {
        const auto n_side = static_cast<Eigen::Index>(std::ceil(t_hor / dt));
        const Eigen::Index n_inc = 2 * n_side;
        if (n_inc + 1 > (1 << 22))
            throw std::runtime_error("limit_process_ensemble: horizon extension exceeds cap");

        const TimeGrid grid(-static_cast<double>(n_side) * dt, dt, n_inc + 1);
        const FgnSampler sampler(n_inc, dt, cfg.params.hurst);
        auto* ws = FgnSampler::new_workspace();
        Eigen::VectorXd inc, y(grid.n_points);

        LimitProcessResult res;
        res.y0.resize(n);
        res.sojourn.resize(n);
        res.n_samples = n;
        res.horizon = t_hor;

        std::vector<Eigen::Index> check_idx;
        for (double t : drift_check_times) check_idx.push_back(grid.index_of(t));
        Eigen::MatrixXd drift_samples(n, static_cast<Eigen::Index>(check_idx.size()));

        long ends_negative = 0;
        const BusyCycle full{grid.t_start, grid.t_end(), false, false};
        for (long i = 0; i < n; ++i) {
            const RngSeed s =
                cfg.seed.with_stream(cfg.seed.stream_index + static_cast<std::uint64_t>(i));
            sampler.sample_into(s, *ws, inc);
            RandomStream rng(s);
            for (Eigen::Index k = 0; k < n_inc; ++k) (void)rng.next_normal();
            const double y0 = -std::log(rng.next_uniform()) / kc.kappa2;

            double level = 0.0;
            y[0] = 0.0;
            for (Eigen::Index k = 1; k < grid.n_points; ++k) {
                level += inc[k - 1];
                y[k] = level;
            }
            const double anchor = y[n_side];
            for (Eigen::Index k = 0; k < grid.n_points; ++k) {
                const double t = grid.time(k);
                y[k] = y0 - kc.kappa1 * std::pow(std::abs(t), 2.0 * h) +
                       cfg.params.theta * (y[k] - anchor);
            }
            if (y[0] < 0.0 && y[grid.n_points - 1] < 0.0) ++ends_negative;

            res.y0[i] = y0;
            res.sojourn[i] = sojourn_above(SamplePath(grid, y), 0.0, full);
            for (std::size_t c = 0; c < check_idx.size(); ++c)
                drift_samples(i, static_cast<Eigen::Index>(c)) = y[check_idx[c]] - y0;
        }
        FgnSampler::delete_workspace(ws);

        if (static_cast<double>(ends_negative) >= 0.999 * static_cast<double>(n)) {
            for (std::size_t c = 0; c < check_idx.size(); ++c) {
                const double t = drift_check_times[c];
                const MeanStderr ms = mean_stderr(drift_samples.col(static_cast<Eigen::Index>(c)));
                res.drift.push_back(
                    {t, ms.mean, ms.stderr_, -kc.kappa1 * std::pow(std::abs(t), 2.0 * h)});
            }
            return res;
        }
        t_hor *= 2.0;
    }
    throw std::runtime_error("limit_process_ensemble: failed to stabilize the horizon");
}

OvershootTest overshoot_test_from(Eigen::VectorXd scaled, const ExperimentConfig& cfg,
                                  long n_proposed) {
    if (scaled.size() < 100)
        throw std::invalid_argument("overshoot_test: requires at least 100 accepted samples");
    const double kappa2 = limit_constants(cfg.params).kappa2;
    EmpiricalDistribution dist(std::move(scaled));
    OvershootTest out{ks_test_sorted(dist.samples,
                                     [kappa2](double x) {
                                         return x <= 0.0 ? 0.0 : 1.0 - std::exp(-kappa2 * x);
                                     }),
                      std::move(dist),
                      {},
                      0,
                      n_proposed};
    out.scaled_mean = mean_stderr(out.scaled_overshoots.samples);
    out.n_accepted = out.scaled_overshoots.samples.size();
    return out;
}

OvershootTest overshoot_test(double b, const ExperimentConfig& cfg) {
    EnsembleOptions opt;
    opt.past_only = true;
    const ConditionalEnsemble ens = run_sampler(cfg.sampler, b, cfg, opt);
    const double scale = std::pow(b, 1.0 - 2.0 * cfg.params.hurst.value());
    Eigen::VectorXd scaled(ens.stats.size());
    for (std::size_t i = 0; i < ens.stats.size(); ++i)
        scaled[static_cast<Eigen::Index>(i)] = scale * (ens.stats[i].w0 - b);
    return overshoot_test_from(std::move(scaled), cfg, ens.n_proposed);
}

ClumpRegression clump_scaling_regression(const ExperimentConfig& cfg, bool auto_switch) {
    cfg.validate();
    if (cfg.b_grid.size() < 3)
        throw std::invalid_argument("clump_scaling_regression: requires >= 3 levels");

    ClumpRegression out;
    Eigen::VectorXd log_b(static_cast<Eigen::Index>(cfg.b_grid.size()));
    Eigen::VectorXd log_med(static_cast<Eigen::Index>(cfg.b_grid.size()));

    for (std::size_t lvl = 0; lvl < cfg.b_grid.size(); ++lvl) {
        const double b = cfg.b_grid[lvl];
        EnsembleOptions opt;
        opt.stream_offset = static_cast<std::uint64_t>(lvl) << 32;

        SamplerKind kind = cfg.sampler;
        ConditionalEnsemble ens;
        if (kind == SamplerKind::rejection && auto_switch) {
            try {
                ens = run_rejection(b, cfg, opt, nullptr);
            } catch (const acceptance_floor_error&) {
                kind = SamplerKind::endpoint_conditioned;
                ens = run_endpoint(b, cfg, opt, nullptr);
            }
        } else {
            ens = run_sampler(kind, b, cfg, opt);
        }

        std::vector<double> sojourns;
        sojourns.reserve(ens.stats.size());
        for (const PathStats& ps : ens.stats)
            if (!ps.cycle.censored_left && !ps.cycle.censored_right)
                sojourns.push_back(ps.cycle.sojourn);
        const double censored =
            1.0 - static_cast<double>(sojourns.size()) / static_cast<double>(ens.stats.size());
        if (censored > 0.20)
            throw std::runtime_error(
                "clump_scaling_regression: censored-cycle fraction above 20%, window too short");
        if (sojourns.size() < 100)
            throw std::runtime_error(
                "clump_scaling_regression: fewer than 100 uncensored cycles at a level");

        Eigen::VectorXd v = Eigen::Map<Eigen::VectorXd>(sojourns.data(),
                                                        static_cast<Eigen::Index>(sojourns.size()));
        const double med = sample_median(v);
        out.levels.push_back({b, static_cast<long>(sojourns.size()), med, censored, kind});
        log_b[static_cast<Eigen::Index>(lvl)] = std::log(b);
        log_med[static_cast<Eigen::Index>(lvl)] = std::log(med);
    }

    const LinearFit fit = linear_regression(log_b, log_med);
    out.slope = fit.slope;
    out.intercept = fit.intercept;
    out.slope_ci = 1.96 * fit.slope_se;
    return out;
}

std::vector<HittingRow> hitting_concentration(const ExperimentConfig& cfg, double epsilon) {
    cfg.validate();
    const double h = cfg.params.hurst.value();
    std::vector<HittingRow> rows;
    for (std::size_t lvl = 0; lvl < cfg.b_grid.size(); ++lvl) {
        const double b = cfg.b_grid[lvl];
        EnsembleOptions opt;
        opt.past_only = true;
        opt.stream_offset = static_cast<std::uint64_t>(lvl) << 32;
        const ConditionalEnsemble ens = run_sampler(cfg.sampler, b, cfg, opt);

        const double ts = t_star(b, cfg.params);
        const double width = epsilon * std::pow(b, h + cfg.r);
        HittingRow row;
        row.b = b;
        for (const PathStats& ps : ens.stats) {
            if (ps.t_hit < 0.0) continue;
            ++row.n_accepted;
            if (std::abs(ps.t_hit - ts) > width) ++row.n_exceed;
        }
        row.fraction = row.n_accepted > 0
                           ? static_cast<double>(row.n_exceed) / row.n_accepted
                           : 0.0;
        row.stderr_ = row.n_accepted > 0
                          ? std::sqrt(row.fraction * (1.0 - row.fraction) / row.n_accepted)
                          : 0.0;
        rows.push_back(row);
    }
    return rows;
}

EstimatorReport tail_probability_estimate(double b, const ExperimentConfig& cfg,
                                          long n_proposals) {
    cfg.validate();
    if (n_proposals < 1)
        throw std::invalid_argument("tail_probability_estimate: requires n_proposals >= 1");
    const SimContext ctx = make_context(b, cfg, /*past_only=*/true);
    ProposalEngine engine(ctx, cfg);

    long n_acc = 0;
    for (long i = 0; i < n_proposals; ++i) {
        engine.run(cfg.seed.with_stream(cfg.seed.stream_index + static_cast<std::uint64_t>(i)));
        if (engine.w0() > b) ++n_acc;
    }
    EstimatorReport rep;
    rep.n_accepted = n_acc;
    rep.n_proposed = n_proposals;
    rep.estimate = static_cast<double>(n_acc) / static_cast<double>(n_proposals);
    rep.stderr_ = std::sqrt(rep.estimate * (1.0 - rep.estimate) /
                            static_cast<double>(n_proposals));
    rep.seed = cfg.seed;
    return rep;
}

std::vector<MeanPathRow> mean_path_check(double b, const ExperimentConfig& cfg,
                                         const std::vector<double>& scaled_times) {
    cfg.validate();
    const double h = cfg.params.hurst.value();
    const double time_scale = std::pow(b, 2.0 - 1.0 / h);
    const double space_scale = std::pow(b, 1.0 - 2.0 * h);
    const double kappa1 = limit_constants(cfg.params).kappa1;

    const auto m = static_cast<Eigen::Index>(scaled_times.size());
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(m);
    long count = 0;

    EnsembleOptions opt;
    const PathObserver observer = [&](const TimeGrid& grid, Eigen::Index origin,
                                      const Eigen::VectorXd& w, const PathStats&) {
        ++count;
        for (Eigen::Index j = 0; j < m; ++j) {
            const double u = scaled_times[static_cast<std::size_t>(j)] * time_scale;
            const auto k = origin + static_cast<Eigen::Index>(std::llround(u / grid.dt));
            if (k < 0 || k >= grid.n_points)
                throw std::invalid_argument("mean_path_check: scaled time outside the window");
            const double val = space_scale * (w[k] - w[origin]);
            sum[j] += val;
            sum_sq[j] += val * val;
        }
    };
    run_sampler(cfg.sampler, b, cfg, opt, observer);

    std::vector<MeanPathRow> rows;
    for (Eigen::Index j = 0; j < m; ++j) {
        const double t = scaled_times[static_cast<std::size_t>(j)];
        MeanPathRow row;
        row.t = t;
        row.mean = sum[j] / static_cast<double>(count);
        const double var =
            (sum_sq[j] - static_cast<double>(count) * row.mean * row.mean) /
            static_cast<double>(count - 1);
        row.stderr_ = std::sqrt(std::max(var, 0.0) / static_cast<double>(count));
        row.target = -kappa1 * std::pow(std::abs(t), 2.0 * h);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace fbmq
