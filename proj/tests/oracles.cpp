#include "oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace fbmq::testing {

namespace {

double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                   double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0) throw std::runtime_error("adaptive_simpson: depth exhausted");
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

Eigen::VectorXd toeplitz_solve(const Eigen::VectorXd& col, const Eigen::VectorXd& rhs) {
    const Eigen::Index n = col.size();
    if (rhs.size() != n || n < 1) throw std::invalid_argument("toeplitz_solve: size mismatch");

    // Levinson recursion with forward vectors; col[|i-j|] are the entries.
    Eigen::VectorXd x(n), forward(n), prev_forward(n);
    x.setZero();
    forward.setZero();
    prev_forward.setZero();

    forward[0] = 1.0 / col[0];
    x[0] = rhs[0] / col[0];

    for (Eigen::Index k = 1; k < n; ++k) {
        prev_forward.head(k) = forward.head(k);

        double err_f = 0.0;
        for (Eigen::Index i = 0; i < k; ++i) err_f += col[k - i] * prev_forward[i];
        const double denom = 1.0 - err_f * err_f;
        if (!(std::abs(denom) > 1e-300))
            throw std::runtime_error("toeplitz_solve: singular system");

        forward.head(k + 1).setZero();
        for (Eigen::Index i = 0; i <= k; ++i) {
            const double fwd = i < k ? prev_forward[i] : 0.0;
            const double bwd = i > 0 ? prev_forward[k - i] : 0.0;
            forward[i] = (fwd - err_f * bwd) / denom;
        }

        double err_x = 0.0;
        for (Eigen::Index i = 0; i < k; ++i) err_x += col[k - i] * x[i];
        const double alpha = rhs[k] - err_x;
        for (Eigen::Index i = 0; i <= k; ++i) x[i] += alpha * forward[k - i];
    }
    return x;
}

Eigen::VectorXd fbm_increment_prediction_weights(double d, Eigen::Index n_cells,
                                                 double target_time, HurstParam h) {
    const double dt = d / static_cast<double>(n_cells);

    Eigen::VectorXd acov(n_cells);
    for (Eigen::Index k = 0; k < n_cells; ++k) acov[k] = fgn_autocovariance(k, dt, h);

    // Increment j spans [-d + j dt, -d + (j+1) dt]; its covariance with
    // Z(target) is cov(Z(t_{j+1}) - Z(t_j), Z(target)).
    Eigen::VectorXd cross(n_cells);
    for (Eigen::Index j = 0; j < n_cells; ++j) {
        const double t0 = -d + static_cast<double>(j) * dt;
        const double t1 = t0 + dt;
        cross[j] = fbm_covariance(t1, target_time, h) - fbm_covariance(t0, target_time, h);
    }
    return toeplitz_solve(acov, cross);
}

double conditional_second_moment(double d, Eigen::Index n_cells, double a, double a2,
                                 HurstParam h) {
    const double dt = d / static_cast<double>(n_cells);
    const Eigen::VectorXd w_a = fbm_increment_prediction_weights(d, n_cells, a, h);
    const Eigen::VectorXd w_b = fbm_increment_prediction_weights(d, n_cells, a2, h);

    // E[(w_a . inc)(w_b . inc)] = w_a^T Gamma w_b with Gamma Toeplitz.
    Eigen::VectorXd acov(n_cells);
    for (Eigen::Index k = 0; k < n_cells; ++k) acov[k] = fgn_autocovariance(k, dt, h);
    double total = 0.0;
    for (Eigen::Index i = 0; i < n_cells; ++i) {
        double row = 0.0;
        for (Eigen::Index j = 0; j < n_cells; ++j) row += acov[std::abs(i - j)] * w_b[j];
        total += w_a[i] * row;
    }
    return total;
}

bool feasibility_brute_scan(double h, double resolution) {
    const double q = (1.0 - h) * (1.0 - h) * (1.0 + h) / h;
    for (double r = resolution; r < (1.0 - h) * (1.0 - h) / h; r += resolution) {
        const double gamma_lo = std::max(0.0, h + r - (h - 0.5) * (1.0 - h - r));
        const double gamma_hi = h + r;
        if (!(gamma_lo < gamma_hi)) continue;
        const double eta3_lo = h * h + r * h + (1.0 - h + r) / 2.0;
        const double eta3_hi = h * h + q + r * (2.0 * h - 1.0);
        if (!(eta3_lo < eta3_hi)) continue;
        for (double eta1 = resolution; eta1 < 1.0; eta1 += resolution) {
            const double delta_lo = (1.0 - h + r) / 2.0;
            const double delta_hi = q - (1.0 - h) * (r + eta1) + r * eta1;
            if (delta_lo < delta_hi) return true;
        }
    }
    return false;
}

}  // namespace fbmq::testing
