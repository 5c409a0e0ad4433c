#include "fbmq/conditioning.hpp"

#include <algorithm>
#include <cmath>

#include "fbmq/quadrature.hpp"

namespace fbmq {

namespace {

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& rows,
                          const std::vector<Eigen::Index>& cols) {
    Eigen::MatrixXd out(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                m(rows[i], cols[j]);
    return out;
}

}  // namespace

ConditionalGaussian gaussian_condition_oracle(const Eigen::MatrixXd& cov,
                                              const std::vector<Eigen::Index>& observed_idx,
                                              const Eigen::VectorXd& observed_values,
                                              const std::vector<Eigen::Index>& target_idx) {
    const Eigen::Index n = cov.rows();
    if (cov.cols() != n)
        throw std::invalid_argument("gaussian_condition_oracle: covariance must be square");
    if (static_cast<Eigen::Index>(observed_idx.size()) != observed_values.size())
        throw std::invalid_argument("gaussian_condition_oracle: observation length mismatch");
    for (Eigen::Index i : observed_idx)
        if (i < 0 || i >= n)
            throw std::invalid_argument("gaussian_condition_oracle: index out of range");
    for (Eigen::Index i : target_idx) {
        if (i < 0 || i >= n)
            throw std::invalid_argument("gaussian_condition_oracle: index out of range");
        if (std::find(observed_idx.begin(), observed_idx.end(), i) != observed_idx.end())
            throw std::invalid_argument(
                "gaussian_condition_oracle: index sets must be disjoint");
    }

    ConditionalGaussian out;
    out.cov = submatrix(cov, target_idx, target_idx);
    if (observed_idx.empty()) {
        out.mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(target_idx.size()));
        return out;
    }

    const Eigen::MatrixXd s22 = submatrix(cov, observed_idx, observed_idx);
    const Eigen::MatrixXd s12 = submatrix(cov, target_idx, observed_idx);

    const auto n_obs = static_cast<Eigen::Index>(observed_idx.size());
    const auto n_tgt = static_cast<Eigen::Index>(target_idx.size());
    Eigen::MatrixXd rhs(n_obs, n_tgt + 1);
    rhs.col(0) = observed_values;
    rhs.rightCols(n_tgt) = s12.transpose();

    const double rhs_scale = std::max(1.0, rhs.norm());
    Eigen::MatrixXd solved;
    bool ok = false;

    Eigen::LDLT<Eigen::MatrixXd> ldlt(s22);
    if (ldlt.info() == Eigen::Success) {
        solved = ldlt.solve(rhs);
        ok = (s22 * solved - rhs).norm() < 1e-8 * rhs_scale;
    }
    if (!ok) {
        Eigen::MatrixXd jittered = s22;
        jittered.diagonal().array() += 1e-12;
        ldlt.compute(jittered);
        if (ldlt.info() == Eigen::Success) {
            solved = ldlt.solve(rhs);
            ok = (s22 * solved - rhs).norm() < 1e-6 * rhs_scale;
        }
    }
    if (!ok) {
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(s22);
        solved = cod.solve(rhs);
        ok = (s22 * solved - rhs).norm() < 1e-6 * rhs_scale;
    }
    if (!ok)
        throw std::runtime_error(
            "gaussian_condition_oracle: observation covariance singular beyond jitter "
            "tolerance");

    out.mean = s12 * solved.col(0);
    Eigen::MatrixXd cc = out.cov - s12 * solved.rightCols(n_tgt);
    out.cov = 0.5 * (cc + cc.transpose());
    return out;
}

double cond_mean_given_anchor(double s, double b, const ModelParams& params,
                              double anchor_time, double x_obs) {
    if (!(anchor_time > 0.0))
        throw std::invalid_argument("cond_mean_given_anchor: requires anchor_time > 0");
    const double h = params.hurst.value();
    const double mu = params.mu();
    const double u = s * std::pow(b, 2.0 - 1.0 / h);
    const double rho = fbm_covariance(-anchor_time, u, params.hurst) /
                       std::pow(anchor_time, 2.0 * h);
    return std::pow(b, 1.0 - 2.0 * h) * ((x_obs - mu * anchor_time) * rho - mu * u);
}

double cond_mean_one_endpoint(double s, double b, const ModelParams& params, double r,
                              double x_obs) {
    const WindowGeometry wg = window_geometry(b, r, params);
    return cond_mean_given_anchor(s, b, params, wg.t_L, x_obs);
}

double cond_mean_two_endpoints(double s, double b, const ModelParams& params, double r,
                               double x_left, double x_right) {
    const WindowGeometry wg = window_geometry(b, r, params);
    const double h = params.hurst.value();
    const double mu = params.mu();
    const double theta = params.theta;
    const double u = s * std::pow(b, 2.0 - 1.0 / h);

    const double v_l = std::pow(wg.t_L, 2.0 * h);
    const double v_r = std::pow(wg.t_R, 2.0 * h);
    const double c_lr = fbm_covariance(-wg.t_L, -wg.t_R, params.hurst);
    const double c_ul = fbm_covariance(u, -wg.t_L, params.hurst);
    const double c_ur = fbm_covariance(u, -wg.t_R, params.hurst);
    const double det = v_l * v_r - c_lr * c_lr;
    if (!(det > 1e-300 * v_l * v_r))
        throw std::invalid_argument("cond_mean_two_endpoints: degenerate endpoint covariance");

    const double z_l = (x_left - mu * wg.t_L) / theta;
    const double z_r = (x_right - mu * wg.t_R) / theta;
    const double residual = z_r - (c_lr / v_l) * z_l;
    const double weight = (v_l * c_ur - c_ul * c_lr) / det;

    return cond_mean_one_endpoint(s, b, params, r, x_left) +
           theta * std::pow(b, 1.0 - 2.0 * h) * weight * residual;
}

namespace {

// Inner kernel integral int_0^u w^{H-1/2} (w+D)^{H-1/2} / (w+v) dw with the
// left endpoint flattened by substitution.
double kernel_inner_integral(double u, double v, double window, double h,
                             const QuadOptions& opt) {
    return integrate_left_power(
        [&](double w) { return std::pow(w + window, h - 0.5) / (w + v); }, u, h - 0.5, opt);
}

}  // namespace

double gn_kernel(const KernelParams& kp, double u, double v) {
    if (!(u >= 0.0)) throw std::invalid_argument("gn_kernel: requires u >= 0");
    if (!(v > 0.0 && v < kp.window))
        throw std::invalid_argument("gn_kernel: requires 0 < v < D");
    const double h = kp.hurst.value();
    const double ch = kp.c_h();
    if (u == 0.0 || ch == 0.0) return 0.0;
    const QuadOptions opt{1e-10, 1e-300, 4000};
    const double inner = kernel_inner_integral(u, v, kp.window, h, opt);
    return ch * std::pow(kp.window - v, 0.5 - h) * std::pow(v, 0.5 - h) * inner;
}

double gn_kernel_deriv(const KernelParams& kp, double u, double v) {
    if (!(u >= 0.0)) throw std::invalid_argument("gn_kernel_deriv: requires u >= 0");
    if (!(v > 0.0 && v < kp.window))
        throw std::invalid_argument("gn_kernel_deriv: requires 0 < v < D");
    const double h = kp.hurst.value();
    const double ch = kp.c_h();
    if (u == 0.0 || ch == 0.0) return 0.0;
    const QuadOptions opt{1e-10, 1e-300, 4000};
    const double g = gn_kernel(kp, u, v);
    const double inner_sq = integrate_left_power(
        [&](double y) {
            const double yv = y + v;
            return std::pow(y + kp.window, h - 0.5) / (yv * yv);
        },
        u, h - 0.5, opt);
    return -(h - 0.5) * g * (1.0 / v - 1.0 / (kp.window - v)) -
           ch * std::pow(v, 0.5 - h) * std::pow(kp.window - v, 0.5 - h) * inner_sq;
}

HistoryPrediction predict_from_history(const SamplePath& history, double u,
                                       const KernelParams& kp) {
    const Eigen::Index cells = history.grid.n_points - 1;
    if (cells < 64)
        throw std::invalid_argument("predict_from_history: history grid too coarse (< 64 cells)");
    const double d = kp.window;
    if (std::abs(history.grid.t_start + d) > 1e-9 * std::max(1.0, d) ||
        std::abs(history.grid.t_end()) > 1e-9 * std::max(1.0, d))
        throw std::invalid_argument("predict_from_history: grid must cover [-D, 0]");
    const double anchor = history.values[cells];
    if (std::abs(anchor) > 1e-9)
        throw std::invalid_argument("predict_from_history: history must be anchored to 0 at t = 0");

    const double h = kp.hurst.value();
    if (kp.c_h() == 0.0 || u == 0.0) return {0.0, 0.0};

    const double dt = history.grid.dt;
    // Cell average of the singular power v^{1/2-H} relative to its midpoint value.
    const double edge_factor = std::pow(2.0, 0.5 - h) / (1.5 - h);

    HistoryPrediction out;
    for (Eigen::Index k = 0; k < cells; ++k) {
        const double increment = history.values[k + 1] - history.values[k];
        const double mid = -0.5 * (history.grid.time(k) + history.grid.time(k + 1));
        double weight;
        if (k == cells - 1) {  // cell touching v = 0
            weight = gn_kernel(kp, u, 0.5 * dt) * edge_factor;
            out.boundary_contribution += std::abs(weight * increment);
        } else if (k == 0) {  // cell touching v = D
            weight = gn_kernel(kp, u, d - 0.5 * dt) * edge_factor;
            out.boundary_contribution += std::abs(weight * increment);
        } else {
            weight = gn_kernel(kp, u, mid);
        }
        out.value += weight * increment;
    }
    return out;
}

double v_fn(double x, HurstParam h) {
    if (!(std::abs(x) < 1.0)) throw std::invalid_argument("v_fn: requires |x| < 1");
    const double two_h = 2.0 * h.value();
    return 0.5 * (1.0 + std::pow(1.0 + x, two_h) - std::pow(std::abs(x), two_h));
}

double cov_fn_f(double d, double w, double x, HurstParam hurst) {
    if (!(d > 0.0)) throw std::invalid_argument("cov_fn_f: requires d > 0");
    const double h = hurst.value();
    const double base = 1.0 + w;
    if (!(base > 0.0) || !(base + x > 0.0))
        throw std::invalid_argument("cov_fn_f: arguments outside the kernel's validity");
    const double ch = std::sin(M_PI * (h - 0.5)) / M_PI;
    if (ch == 0.0) return 0.0;

    const QuadOptions inner_opt{1e-10, 1e-300, 4000};
    const QuadOptions outer_opt{1e-8, 1e-300, 4000};
    const double two_h1 = 2.0 * h - 1.0;

    // g(d, 1+w, -u) = C_H (d-u)^{1/2-H} u^{1/2-H} * inner(u); the two endpoint
    // powers are flattened by splitting at d/2.
    const auto smooth = [&](double u) {
        const double inner = kernel_inner_integral(base, u, d, h, inner_opt);
        const double bracket = std::pow(base + x + u, two_h1) - std::pow(u, two_h1);
        return ch * inner * bracket;
    };
    const double left = integrate_left_power(
        [&](double u) { return std::pow(d - u, 0.5 - h) * smooth(u); }, 0.5 * d, 0.5 - h,
        outer_opt);
    const double right = integrate_right_power(
        [&](double u) { return std::pow(u, 0.5 - h) * smooth(u); }, 0.5 * d, d, 0.5 - h,
        outer_opt);
    return h * (left + right);
}

double cond_cov_given_history(double s, double t, double b, const ModelParams& params,
                              double r) {
    const WindowGeometry wg = window_geometry(b, r, params);
    const double h = params.hurst.value();
    const double theta = params.theta;
    const double d = wg.D / wg.t_L;
    const double tl = wg.t_tilde_L;
    const double ws = s / tl;
    const double wt = t / tl;
    if (!(std::abs(ws) < 1.0 && std::abs(wt) < 1.0))
        throw std::invalid_argument(
            "cond_cov_given_history: scaled times outside the valid window");

    const double two_h = 2.0 * h;
    const double prior = 0.5 * (std::pow(1.0 + ws, two_h) + std::pow(1.0 + wt, two_h) -
                                std::pow(std::abs(wt - ws), two_h));
    const double f_st = cov_fn_f(d, ws, wt - ws, params.hurst);
    const double f_0s = cov_fn_f(d, 0.0, ws, params.hurst);
    const double f_0t = cov_fn_f(d, 0.0, wt, params.hurst);
    const double f_00 = cov_fn_f(d, 0.0, 0.0, params.hurst);
    const double projection =
        (v_fn(ws, params.hurst) - f_0s) * (v_fn(wt, params.hurst) - f_0t) / (1.0 - f_00);

    return theta * theta * std::pow(tl, two_h) * (prior - f_st - projection);
}

double limit_cov(double s, double t, const ModelParams& params) {
    return params.theta * params.theta * fbm_covariance(s, t, params.hurst);
}

}  // namespace fbmq
