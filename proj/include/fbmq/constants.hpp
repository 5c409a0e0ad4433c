#pragma once

#include <optional>

#include "fbmq/storage.hpp"

namespace fbmq {

/// Closed-form constants of the conditional limit laws:
///   kappa1 = (mu(1-H)/H)^{2H} / (2(1-H))       (limit drift coefficient)
///   kappa2 = mu^{2H} (1-H)^{2H-1} / (theta^2 H^{2H})   (overshoot rate)
///   kappa3 = sqrt(kappa2 / (1-H))              (tail exponent scale)
struct LimitConstants {
    double kappa1 = 0.0;
    double kappa2 = 0.0;
    double kappa3 = 0.0;
};

LimitConstants limit_constants(const ModelParams& params);

/// Most likely passage time of the netput to level b: t* = b H / (mu (1-H)).
double t_star(double b, const ModelParams& params);

/// Conditioning window around -t*: t_L = t* - b^{H+r}, t_R = t* + b^{H+r},
/// D = t_R - t_L, t_tilde_L = b^{-2+1/H} t_L.
struct WindowGeometry {
    double t_star = 0.0;
    double t_L = 0.0;
    double t_R = 0.0;
    double D = 0.0;
    double t_tilde_L = 0.0;
};

WindowGeometry window_geometry(double b, double r, const ModelParams& params);

/// Limiting conditional tail of the scaled overshoot: exp(-kappa2 * x).
double overshoot_tail_limit(double x, const ModelParams& params);

/// Prefactor model for the steady-state exceedance tail. The constant K
/// multiplying the tail has no closed form for general H; it is exact in the
/// Brownian case, user supplied, or calibrated against Monte Carlo.
struct TailModel {
    enum class Source { exact_brownian, user_supplied, calibrated };

    double K = 1.0;
    Source source = Source::user_supplied;

    static TailModel exact_brownian(const ModelParams& params);
    static TailModel user_supplied(double k);
    static TailModel calibrated(double k);
};

/// The exceedance tail P(W(0) > b) in its two displayed forms:
///   exact:      K b^{(1-H)^2/H} (1 - Phi(kappa3 b^{1-H}))
///   simplified: (K/kappa3) b^{-(1-H)(2-1/H)} exp(-(kappa3^2/2) b^{2(1-H)})
struct HpTail {
    double exact_form = 0.0;
    double simplified_form = 0.0;
};

HpTail hp_tail(double b, const ModelParams& params, const TailModel& tail);

/// Least-squares calibration of log K against Monte Carlo tail estimates.
TailModel calibrate_tail_prefactor(const Eigen::VectorXd& levels,
                                   const Eigen::VectorXd& tail_estimates,
                                   const ModelParams& params);

/// Gaussian-concentration bound for the supremum of fBM over [0, t]:
/// P(sup Z > lambda) <= 2 exp(-(lambda - t^H C)^2 / (2 t^{2H})), valid for
/// lambda > t^H C; otherwise the trivial bound 1 is returned with a flag.
struct BorellBound {
    double bound = 1.0;
    bool valid = false;
};

BorellBound borell_sup_bound(double lambda, double t, HurstParam h, double c_est);

/// Dyadic-block Borell bound on P(exists t > T : theta Z(t) - mu t > x).
BorellBound drifted_sup_tail_bound(double x, double t_window,
                                   const ModelParams& params, double c_upper);

/// Monte Carlo estimate of C = E sup_{0<=s<=1} Z(s), rescaled to [0, t] by
/// self-similarity. Grid bias is downward (grid max misses the true sup).
struct SupEstimate {
    double c_est = 0.0;
    double ci_halfwidth = 0.0;  // 1.96 standard errors
};

SupEstimate sup_expectation_estimate(HurstParam h, double t, Eigen::Index n,
                                     RngSeed seed, Eigen::Index grid_cells = 4096);

/// Proof parameters (r, gamma, eta1, eta3, delta) for the conditioning
/// window; feasible iff the six linear constraints admit an interior point.
struct ProofParams {
    double r = 0.0;
    double gamma = 0.0;
    double eta1 = 0.0;
    double eta3 = 0.0;
    double delta = 0.0;
};

struct FeasibilityResult {
    bool feasible = false;
    ProofParams params;
};

/// H above which the constraint system is infeasible: (sqrt(17) - 1)/4.
double feasibility_threshold();

/// Searches for a strictly interior point by shrinking r and eta1 toward 0
/// and bisecting the remaining one-dimensional intervals.
FeasibilityResult proof_params_feasible(HurstParam h);

/// Re-checks a candidate point against all six constraints by substitution.
bool proof_params_satisfied(HurstParam h, const ProofParams& p);

}  // namespace fbmq
