#pragma once

#include <optional>

#include "fbmq/fbm.hpp"

namespace fbmq {

/// Queue primitives: input A(t) = lambda*t + theta*Z(t) served at rate c,
/// netput X(t) = -mu*t + theta*Z(t) with mu = c - lambda > 0.
struct ModelParams {
    HurstParam hurst;
    double theta;
    double lambda_rate;
    double service_rate;

    ModelParams(HurstParam h, double theta_, double lambda_, double c)
        : hurst(h), theta(theta_), lambda_rate(lambda_), service_rate(c) {
        if (!(theta > 0.0)) throw std::invalid_argument("ModelParams: requires theta > 0");
        if (!(service_rate > lambda_rate))
            throw std::invalid_argument("ModelParams: requires c > lambda (mu > 0)");
    }

    double mu() const { return service_rate - lambda_rate; }
};

/// Busy-cycle boundaries around the origin. Censored flags are set when the
/// workload never returns to zero inside the observed window.
struct BusyCycle {
    double tau_L = 0.0;
    double tau_R = 0.0;
    bool censored_left = false;
    bool censored_right = false;
};

/// Per-path rare-event statistics for the cycle straddling time 0.
struct CycleStats {
    double tau_L = 0.0;       // <= 0
    double tau_R = 0.0;       // >= 0
    double overshoot = 0.0;   // W(0) - b
    double sojourn = 0.0;     // time above b over the cycle
    bool censored_left = false;
    bool censored_right = false;
};

/// Windowed stationary workload at the origin plus the certified bound on
/// the probability that the omitted tail of the past changes the value.
struct StationaryWorkload {
    double w0 = 0.0;
    double truncation_bound = 1.0;
    bool bound_valid = false;
};

enum class DeviationKind { workload, netput };

/// X(t) = -mu*t + theta*Z(t) on the grid of z.
SamplePath netput_path(const SamplePath& z, const ModelParams& params);

/// X = Z with unit volatility and zero drift; convenience for tests that are
/// allowed mu = 0 (netput only, not a valid ModelParams).
SamplePath netput_path_raw(const SamplePath& z, double mu, double theta);

/// Discrete Lindley recursion W_{k+1} = max(W_k + X_{k+1} - X_k, 0).
SamplePath reflect(const SamplePath& x, double w_init);

/// Stationary workload at the origin from a reversed-past fBM segment z on
/// [0, T]: w0 = max_k (theta*z(t_k) - mu*t_k). The truncation bound is a
/// dyadic Borell sum over the omitted tail (c_upper bounds E sup Z on [0,1]).
/// Throws when the bound exceeds error_budget (budget >= 1 disables).
StationaryWorkload stationary_workload_origin(const SamplePath& z_reversed_past,
                                              const ModelParams& params, double c_upper,
                                              double error_budget = 1e-3);

/// First grid time with x >= b; the grid must start at t = 0.
std::optional<double> hitting_time(const SamplePath& x, double b);

/// Cycle boundaries: first exact zero of W at t >= 0 and last at t <= 0.
BusyCycle busy_cycle(const SamplePath& w);

/// Left-endpoint rectangle rule for the time above b over [tau_L, tau_R).
double sojourn_above(const SamplePath& w, double b, const BusyCycle& cycle);

/// Y^b(t) = b^{1-2H} (W(t b^{2-1/H}) - b) for workload paths, and
/// b^{1-2H} X(t b^{2-1/H}) for netput paths, resampled to out_grid by
/// nearest grid point.
SamplePath scaled_deviation_path(const SamplePath& source, double b,
                                 const ModelParams& params, DeviationKind kind,
                                 const TimeGrid& out_grid);

}  // namespace fbmq
