#include "fbmq/storage.hpp"

#include <cmath>

#include "fbmq/constants.hpp"

namespace fbmq {

SamplePath netput_path(const SamplePath& z, const ModelParams& params) {
    return netput_path_raw(z, params.mu(), params.theta);
}

SamplePath netput_path_raw(const SamplePath& z, double mu, double theta) {
    Eigen::VectorXd x(z.grid.n_points);
    for (Eigen::Index k = 0; k < z.grid.n_points; ++k)
        x[k] = -mu * z.grid.time(k) + theta * z.values[k];
    return SamplePath(z.grid, std::move(x));
}

SamplePath reflect(const SamplePath& x, double w_init) {
    if (!(w_init >= 0.0)) throw std::invalid_argument("reflect: requires w_init >= 0");
    Eigen::VectorXd w(x.grid.n_points);
    w[0] = w_init;
    for (Eigen::Index k = 1; k < x.grid.n_points; ++k)
        w[k] = std::max(w[k - 1] + (x.values[k] - x.values[k - 1]), 0.0);
    return SamplePath(x.grid, std::move(w));
}

StationaryWorkload stationary_workload_origin(const SamplePath& z, const ModelParams& params,
                                              double c_upper, double error_budget) {
    if (std::abs(z.grid.t_start) > 1e-12)
        throw std::invalid_argument("stationary_workload_origin: reversed path must start at 0");
    const double mu = params.mu();
    double w0 = 0.0;
    for (Eigen::Index k = 0; k < z.grid.n_points; ++k)
        w0 = std::max(w0, params.theta * z.values[k] - mu * z.grid.time(k));

    StationaryWorkload out;
    out.w0 = w0;
    const BorellBound tail =
        drifted_sup_tail_bound(w0, z.grid.t_end(), params, c_upper);
    out.truncation_bound = tail.bound;
    out.bound_valid = tail.valid;
    if (error_budget < 1.0 && (!tail.valid || tail.bound > error_budget))
        throw std::runtime_error(
            "stationary_workload_origin: window too short for the requested error budget");
    return out;
}

std::optional<double> hitting_time(const SamplePath& x, double b) {
    if (std::abs(x.grid.t_start) > 1e-12)
        throw std::invalid_argument("hitting_time: grid must start at t = 0");
    for (Eigen::Index k = 0; k < x.grid.n_points; ++k)
        if (x.values[k] >= b) return x.grid.time(k);
    return std::nullopt;
}

BusyCycle busy_cycle(const SamplePath& w) {
    const Eigen::Index k0 = w.grid.exact_index_of(0.0);
    BusyCycle cycle;

    Eigen::Index right = -1;
    for (Eigen::Index k = k0; k < w.grid.n_points; ++k)
        if (w.values[k] == 0.0) {
            right = k;
            break;
        }
    if (right < 0) {
        cycle.censored_right = true;
        right = w.grid.n_points - 1;
    }
    cycle.tau_R = w.grid.time(right);

    Eigen::Index left = -1;
    for (Eigen::Index k = k0; k >= 0; --k)
        if (w.values[k] == 0.0) {
            left = k;
            break;
        }
    if (left < 0) {
        cycle.censored_left = true;
        left = 0;
    }
    cycle.tau_L = w.grid.time(left);
    return cycle;
}

double sojourn_above(const SamplePath& w, double b, const BusyCycle& cycle) {
    const Eigen::Index k_l = w.grid.exact_index_of(cycle.tau_L);
    const Eigen::Index k_r = w.grid.exact_index_of(cycle.tau_R);
    if (k_r < k_l) throw std::invalid_argument("sojourn_above: requires tau_L <= tau_R");
    Eigen::Index count = 0;
    for (Eigen::Index k = k_l; k < k_r; ++k)
        if (w.values[k] > b) ++count;
    return static_cast<double>(count) * w.grid.dt;
}

SamplePath scaled_deviation_path(const SamplePath& source, double b,
                                 const ModelParams& params, DeviationKind kind,
                                 const TimeGrid& out_grid) {
    if (!(b > 0.0)) throw std::invalid_argument("scaled_deviation_path: requires b > 0");
    const double h = params.hurst.value();
    const double time_scale = std::pow(b, 2.0 - 1.0 / h);
    const double space_scale = std::pow(b, 1.0 - 2.0 * h);

    Eigen::VectorXd out(out_grid.n_points);
    for (Eigen::Index j = 0; j < out_grid.n_points; ++j) {
        const double u = out_grid.time(j) * time_scale;
        const double raw = (u - source.grid.t_start) / source.grid.dt;
        const auto k = static_cast<Eigen::Index>(std::llround(raw));
        if (k < 0 || k >= source.grid.n_points)
            throw std::invalid_argument(
                "scaled_deviation_path: requested scaled window exceeds source window");
        const double v = source.values[k];
        out[j] = (kind == DeviationKind::workload) ? space_scale * (v - b) : space_scale * v;
    }
    return SamplePath(out_grid, std::move(out));
}

}  // namespace fbmq
