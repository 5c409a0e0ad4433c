#include "fbmq/constants.hpp"

#include <cmath>

#include "fbmq/stats.hpp"

namespace fbmq {

LimitConstants limit_constants(const ModelParams& params) {
    const double h = params.hurst.value();
    const double mu = params.mu();
    const double th = params.theta;
    LimitConstants k;
    k.kappa1 = std::pow(mu * (1.0 - h) / h, 2.0 * h) / (2.0 * (1.0 - h));
    k.kappa2 = std::pow(mu, 2.0 * h) * std::pow(1.0 - h, 2.0 * h - 1.0) /
               (th * th * std::pow(h, 2.0 * h));
    k.kappa3 = std::sqrt(k.kappa2 / (1.0 - h));
    return k;
}

double t_star(double b, const ModelParams& params) {
    if (!(b > 0.0)) throw std::invalid_argument("t_star: requires b > 0");
    const double h = params.hurst.value();
    return b * h / (params.mu() * (1.0 - h));
}

WindowGeometry window_geometry(double b, double r, const ModelParams& params) {
    params.hurst.require_long_range();
    const double h = params.hurst.value();
    WindowGeometry w;
    w.t_star = t_star(b, params);
    const double half_width = std::pow(b, h + r);
    if (!(half_width < w.t_star))
        throw std::invalid_argument(
            "window_geometry: requires b^{H+r} < t*(b); b too small for this r");
    w.t_L = w.t_star - half_width;
    w.t_R = w.t_star + half_width;
    w.D = 2.0 * half_width;
    w.t_tilde_L = std::pow(b, -2.0 + 1.0 / h) * w.t_L;
    return w;
}

double overshoot_tail_limit(double x, const ModelParams& params) {
    if (!(x >= 0.0)) throw std::invalid_argument("overshoot_tail_limit: requires x >= 0");
    return std::exp(-limit_constants(params).kappa2 * x);
}

TailModel TailModel::exact_brownian(const ModelParams& params) {
    if (params.hurst.value() != 0.5)
        throw std::invalid_argument("TailModel::exact_brownian: requires H = 1/2");
    // K = kappa3 makes the simplified form equal the exact Brownian
    // all-time-maximum law exp(-2 mu b / theta^2).
    return {limit_constants(params).kappa3, Source::exact_brownian};
}

TailModel TailModel::user_supplied(double k) {
    if (!(k > 0.0)) throw std::invalid_argument("TailModel: requires K > 0");
    return {k, Source::user_supplied};
}

TailModel TailModel::calibrated(double k) {
    if (!(k > 0.0)) throw std::invalid_argument("TailModel: requires K > 0");
    return {k, Source::calibrated};
}

HpTail hp_tail(double b, const ModelParams& params, const TailModel& tail) {
    if (!(b > 0.0)) throw std::invalid_argument("hp_tail: requires b > 0");
    const double h = params.hurst.value();
    const LimitConstants k = limit_constants(params);
    HpTail out;
    out.exact_form = tail.K * std::pow(b, (1.0 - h) * (1.0 - h) / h) *
                     normal_sf(k.kappa3 * std::pow(b, 1.0 - h));
    out.simplified_form = (tail.K / k.kappa3) *
                          std::pow(b, -(1.0 - h) * (2.0 - 1.0 / h)) *
                          std::exp(-0.5 * k.kappa3 * k.kappa3 * std::pow(b, 2.0 * (1.0 - h)));
    return out;
}

TailModel calibrate_tail_prefactor(const Eigen::VectorXd& levels,
                                   const Eigen::VectorXd& tail_estimates,
                                   const ModelParams& params) {
    if (levels.size() != tail_estimates.size() || levels.size() < 1)
        throw std::invalid_argument("calibrate_tail_prefactor: requires paired estimates");
    const TailModel unit = TailModel::user_supplied(1.0);
    double acc = 0.0;
    Eigen::Index used = 0;
    for (Eigen::Index i = 0; i < levels.size(); ++i) {
        if (!(tail_estimates[i] > 0.0)) continue;
        const double base = hp_tail(levels[i], params, unit).exact_form;
        acc += std::log(tail_estimates[i]) - std::log(base);
        ++used;
    }
    if (used == 0)
        throw std::invalid_argument("calibrate_tail_prefactor: no positive estimates");
    return TailModel::calibrated(std::exp(acc / static_cast<double>(used)));
}

BorellBound borell_sup_bound(double lambda, double t, HurstParam h, double c_est) {
    if (!(t > 0.0)) throw std::invalid_argument("borell_sup_bound: requires t > 0");
    const double scale = std::pow(t, h.value());
    if (!(lambda > scale * c_est)) return {1.0, false};
    const double z = lambda - scale * c_est;
    return {std::min(1.0, 2.0 * std::exp(-0.5 * z * z / (scale * scale))), true};
}

BorellBound drifted_sup_tail_bound(double x, double t_window, const ModelParams& params,
                                   double c_upper) {
    if (!(t_window > 0.0))
        throw std::invalid_argument("drifted_sup_tail_bound: requires T > 0");
    // Block j covers [T 2^j, T 2^{j+1}]; on it theta Z - mu t > x requires
    // sup Z over [0, T 2^{j+1}] to exceed (x + mu T 2^j)/theta.
    double sum = 0.0;
    double block_start = t_window;
    for (int j = 0; j < 200; ++j) {
        const double t_j = 2.0 * block_start;
        const double lambda_j = (x + params.mu() * block_start) / params.theta;
        const BorellBound term = borell_sup_bound(lambda_j, t_j, params.hurst, c_upper);
        if (!term.valid) return {1.0, false};
        sum += term.bound;
        if (term.bound < 1e-18 * std::max(sum, 1e-300) && j >= 4) break;
        if (!std::isfinite(block_start * 2.0)) break;
        block_start *= 2.0;
    }
    return {std::min(sum, 1.0), true};
}

SupEstimate sup_expectation_estimate(HurstParam h, double t, Eigen::Index n, RngSeed seed,
                                     Eigen::Index grid_cells) {
    if (n < 1000)
        throw std::invalid_argument("sup_expectation_estimate: requires n >= 1000");
    if (!(t > 0.0)) throw std::invalid_argument("sup_expectation_estimate: requires t > 0");

    const double dt = 1.0 / static_cast<double>(grid_cells);
    const FgnSampler sampler(grid_cells, dt, h);
    auto* ws = FgnSampler::new_workspace();
    Eigen::VectorXd inc;

    double sum = 0.0, sum_sq = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        sampler.sample_into(seed.with_stream(seed.stream_index + static_cast<std::uint64_t>(i)),
                            *ws, inc);
        double level = 0.0, sup = 0.0;
        for (Eigen::Index k = 0; k < grid_cells; ++k) {
            level += inc[k];
            sup = std::max(sup, level);
        }
        sum += sup;
        sum_sq += sup * sup;
    }
    FgnSampler::delete_workspace(ws);

    const double mean = sum / static_cast<double>(n);
    const double var = (sum_sq - static_cast<double>(n) * mean * mean) /
                       static_cast<double>(n - 1);
    const double scale = std::pow(t, h.value());
    return {scale * mean, scale * 1.96 * std::sqrt(var / static_cast<double>(n))};
}

double feasibility_threshold() { return (std::sqrt(17.0) - 1.0) / 4.0; }

namespace {

struct Intervals {
    double gamma_lo, gamma_hi;
    double eta3_lo, eta3_hi;
    double delta_lo, delta_hi;
};

Intervals constraint_intervals(double h, double r, double eta1) {
    Intervals iv;
    iv.gamma_lo = std::max(0.0, h + r - (h - 0.5) * (1.0 - h - r));
    iv.gamma_hi = h + r;
    const double q = (1.0 - h) * (1.0 - h) * (1.0 + h) / h;
    iv.eta3_lo = h * h + r * h + (1.0 - h + r) / 2.0;
    iv.eta3_hi = h * h + q + r * (2.0 * h - 1.0);
    iv.delta_lo = (1.0 - h + r) / 2.0;
    iv.delta_hi = q - (1.0 - h) * (r + eta1) + r * eta1;
    return iv;
}

}  // namespace

bool proof_params_satisfied(HurstParam hurst, const ProofParams& p) {
    const double h = hurst.value();
    if (!(p.r > 0.0 && p.gamma > 0.0 && p.eta1 > 0.0 && p.eta3 > 0.0 && p.delta > 0.0))
        return false;
    if (!(p.r < (1.0 - h) * (1.0 - h) / h)) return false;
    const Intervals iv = constraint_intervals(h, p.r, p.eta1);
    return p.gamma > iv.gamma_lo && p.gamma < iv.gamma_hi && p.eta3 > iv.eta3_lo &&
           p.eta3 < iv.eta3_hi && p.delta > iv.delta_lo && p.delta < iv.delta_hi;
}

FeasibilityResult proof_params_feasible(HurstParam hurst) {
    hurst.require_long_range();
    const double h = hurst.value();
    // The constraint system loosens as r, eta1 -> 0+, so shrink them jointly
    // and take interval midpoints for the remaining parameters.
    for (int k = 2; k <= 9; ++k) {
        const double r = std::pow(10.0, -k);
        if (!(r < (1.0 - h) * (1.0 - h) / h)) continue;
        const double eta1 = r;
        const Intervals iv = constraint_intervals(h, r, eta1);
        if (iv.gamma_lo < iv.gamma_hi && iv.eta3_lo < iv.eta3_hi &&
            iv.delta_lo < iv.delta_hi) {
            ProofParams p;
            p.r = r;
            p.eta1 = eta1;
            p.gamma = 0.5 * (iv.gamma_lo + iv.gamma_hi);
            p.eta3 = 0.5 * (iv.eta3_lo + iv.eta3_hi);
            p.delta = 0.5 * (iv.delta_lo + iv.delta_hi);
            if (proof_params_satisfied(hurst, p)) return {true, p};
        }
    }
    return {false, {}};
}

}  // namespace fbmq
