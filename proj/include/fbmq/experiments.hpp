#pragma once

#include <vector>

#include "fbmq/conditioning.hpp"
#include "fbmq/stats.hpp"

namespace fbmq {

enum class SamplerKind { rejection, endpoint_conditioned };

/// Raised when rejection sampling cannot reach the target within the
/// configured acceptance floor or proposal budget; callers switch samplers.
class acceptance_floor_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Knobs shared by every conditional Monte Carlo experiment. dt is tied to
/// the natural time scale of the scaled process, dt = dt_rule * b^{2-1/H},
/// and the two-sided simulation window is window_rule * t*(b) on each side.
struct ExperimentConfig {
    ModelParams params;
    std::vector<double> b_grid;
    long n_target = 1000;
    double dt_rule = 0.05;
    double window_rule = 4.0;
    SamplerKind sampler = SamplerKind::rejection;
    RngSeed seed;
    double r = 0.05;

    double acceptance_floor = 1e-5;
    long max_proposals = 50'000'000;
    // At H = 1/2 the workload at the origin is refined to the exact
    // continuum supremum via per-cell Brownian bridge maxima.
    bool exact_brownian_sup = true;

    void validate() const {
        if (b_grid.empty()) throw std::invalid_argument("ExperimentConfig: b_grid empty");
        for (std::size_t i = 0; i < b_grid.size(); ++i) {
            if (!(b_grid[i] > 0.0))
                throw std::invalid_argument("ExperimentConfig: requires b_grid > 0");
            if (i > 0 && !(b_grid[i] > b_grid[i - 1]))
                throw std::invalid_argument("ExperimentConfig: b_grid must be ascending");
        }
        if (n_target < 100)
            throw std::invalid_argument("ExperimentConfig: requires n_target >= 100");
        if (!(dt_rule > 0.0 && dt_rule <= 0.1))
            throw std::invalid_argument("ExperimentConfig: requires dt_rule in (0, 0.1]");
        if (!(window_rule > 0.0))
            throw std::invalid_argument("ExperimentConfig: requires window_rule > 0");
    }
};

struct EstimatorReport {
    double estimate = 0.0;
    double stderr_ = 0.0;
    long n_accepted = 0;
    long n_proposed = 0;
    RngSeed seed;
};

struct EmpiricalDistribution {
    Eigen::VectorXd samples;  // sorted ascending, nonempty

    explicit EmpiricalDistribution(Eigen::VectorXd s);
};

/// Per-path rare-event summary attached to each accepted proposal.
struct PathStats {
    CycleStats cycle;
    double w0 = 0.0;    // stationary workload at the origin
    double t_hit = -1.0;  // passage time of the reversed netput to b; < 0 if censored
};

struct ConditionalEnsemble {
    TimeGrid grid;            // two-sided grid of the retained paths
    Eigen::Index origin = 0;  // index of t = 0
    std::vector<SamplePath> workload_paths;  // capped at options.max_paths_kept
    std::vector<PathStats> stats;
    long n_accepted = 0;
    long n_proposed = 0;
    bool approximate = false;
    double acceptance_rate() const {
        return n_proposed > 0 ? static_cast<double>(n_accepted) / n_proposed : 0.0;
    }
};

struct EnsembleOptions {
    bool past_only = false;  // overshoot/hitting statistics need no future
    std::size_t max_paths_kept = 0;
    std::uint64_t stream_offset = 0;  // distinct roles draw from distinct streams
};

/// Exact conditional sampling of {W(0) > b} by rejection. Throws when the
/// acceptance estimate falls below the configured floor.
ConditionalEnsemble rejection_conditional_ensemble(double b, const ExperimentConfig& cfg,
                                                   const EnsembleOptions& options = {});

/// Gaussian paths conditioned on X(-t*) = -b (t* snapped to the grid),
/// pushed through netput/reflect. Approximate: the conditioning event has
/// probability zero and differs from {W(0) > b}.
ConditionalEnsemble endpoint_conditioned_ensemble(double b, const ExperimentConfig& cfg,
                                                  const EnsembleOptions& options = {});

struct LimitProcessRow {
    double t = 0.0;
    double mean = 0.0;
    double stderr_ = 0.0;
    double target = 0.0;  // -kappa1 |t|^{2H}
};

struct LimitProcessResult {
    Eigen::VectorXd y0;       // exponential offsets
    Eigen::VectorXd sojourn;  // V, total time above zero
    std::vector<LimitProcessRow> drift;
    double horizon = 0.0;  // final (possibly auto-extended) T
    long n_samples = 0;
};

/// Reference sampler of the limit process Y(t) = Y(0) - kappa1 |t|^{2H}
/// + theta Z(t) with Y(0) = Exp(1)/kappa2 independent of Z. The horizon is
/// doubled until Y(+-T) < 0 with empirical frequency >= 0.999.
LimitProcessResult limit_process_ensemble(const ExperimentConfig& cfg, double horizon,
                                          const std::vector<double>& drift_check_times);

struct OvershootTest {
    KsResult ks;
    EmpiricalDistribution scaled_overshoots;
    MeanStderr scaled_mean;
    long n_accepted = 0;
    long n_proposed = 0;
};

/// Scaled overshoots b^{1-2H}(W(0)-b) of a conditional ensemble tested
/// against Exp(kappa2) by a one-sample Kolmogorov-Smirnov test.
OvershootTest overshoot_test(double b, const ExperimentConfig& cfg);

/// KS of precomputed scaled overshoots against Exp(kappa2).
OvershootTest overshoot_test_from(Eigen::VectorXd scaled, const ExperimentConfig& cfg,
                                  long n_proposed);

struct ClumpLevel {
    double b = 0.0;
    long n_cycles = 0;
    double median_sojourn = 0.0;
    double censored_fraction = 0.0;
    SamplerKind sampler_used = SamplerKind::rejection;
};

struct ClumpRegression {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_ci = 0.0;  // 1.96 standard errors of the OLS slope
    std::vector<ClumpLevel> levels;
};

/// Least-squares slope of log median sojourn against log b across b_grid.
/// Per level the sampler is the configured one; with auto_switch the
/// rejection sampler is replaced by the endpoint-conditioned one when a
/// pilot run estimates acceptance below the floor.
ClumpRegression clump_scaling_regression(const ExperimentConfig& cfg,
                                         bool auto_switch = true);

struct HittingRow {
    double b = 0.0;
    long n_accepted = 0;
    long n_exceed = 0;
    double fraction = 0.0;
    double stderr_ = 0.0;
};

/// Fraction of accepted paths with |T_b - t*| > epsilon * b^{H+r} per level.
std::vector<HittingRow> hitting_concentration(const ExperimentConfig& cfg,
                                              double epsilon = 1.0);

/// Crude Monte Carlo estimate of P(W(0) > b) over n_proposals proposals.
EstimatorReport tail_probability_estimate(double b, const ExperimentConfig& cfg,
                                          long n_proposals);

struct MeanPathRow {
    double t = 0.0;
    double mean = 0.0;
    double stderr_ = 0.0;
    double target = 0.0;  // -kappa1 |t|^{2H}
};

/// Ensemble average of Y^b(t) - Y^b(0) on a scaled-time grid against the
/// limit drift -kappa1 |t|^{2H}.
std::vector<MeanPathRow> mean_path_check(double b, const ExperimentConfig& cfg,
                                         const std::vector<double>& scaled_times);

}  // namespace fbmq
