#pragma once

#include <vector>

#include "fbmq/constants.hpp"

namespace fbmq {

enum class SigmaFieldTag { one_endpoint, two_endpoints, full_history };

/// Observed values of a path at strictly increasing times, tagged with the
/// sigma-field they generate.
struct ObservationSet {
    Eigen::VectorXd times;
    Eigen::VectorXd values;
    SigmaFieldTag tag = SigmaFieldTag::one_endpoint;

    ObservationSet() = default;
    ObservationSet(Eigen::VectorXd t, Eigen::VectorXd v, SigmaFieldTag tag_)
        : times(std::move(t)), values(std::move(v)), tag(tag_) {
        if (times.size() != values.size())
            throw std::invalid_argument("ObservationSet: length mismatch");
        for (Eigen::Index i = 1; i < times.size(); ++i)
            if (!(times[i] > times[i - 1]))
                throw std::invalid_argument("ObservationSet: times must be strictly increasing");
    }
};

/// Parameters of the history-prediction kernel over a window of length D,
/// with C_H = sin(pi (H - 1/2)) / pi (zero at H = 1/2).
struct KernelParams {
    double window = 1.0;  // D
    HurstParam hurst;

    KernelParams(double d, HurstParam h) : window(d), hurst(h) {
        if (!(window > 0.0)) throw std::invalid_argument("KernelParams: requires D > 0");
    }

    double c_h() const { return std::sin(M_PI * (hurst.value() - 0.5)) / M_PI; }
};

struct ConditionalGaussian {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

/// Conditional law of the target coordinates of a joint zero-mean Gaussian
/// vector given observed coordinates: mean S12 S22^-1 y and covariance
/// S11 - S12 S22^-1 S21, with a jitter-then-pseudoinverse fallback when the
/// observation block is singular.
ConditionalGaussian gaussian_condition_oracle(const Eigen::MatrixXd& cov,
                                              const std::vector<Eigen::Index>& observed_idx,
                                              const Eigen::VectorXd& observed_values,
                                              const std::vector<Eigen::Index>& target_idx);

/// Exact conditional mean of the scaled netput \hat Y^b(s) given the value
/// of X at a single past anchor time -anchor_time:
///   b^{1-2H} { (x_obs - mu*anchor) cov(Z(-anchor), Z(s b^{2-1/H})) / var Z(-anchor)
///              - mu b^{2-1/H} s }.
double cond_mean_given_anchor(double s, double b, const ModelParams& params,
                              double anchor_time, double x_obs);

/// Anchor at the left window endpoint t_L(b, r).
double cond_mean_one_endpoint(double s, double b, const ModelParams& params, double r,
                              double x_obs);

/// Exact conditional mean given X at both window endpoints -t_L and -t_R;
/// equals the one-endpoint mean plus a correction proportional to the
/// residual of X(-t_R) given X(-t_L).
double cond_mean_two_endpoints(double s, double b, const ModelParams& params, double r,
                               double x_left, double x_right);

/// Prediction kernel g(D, u, -v) for 0 < v < D, u >= 0:
///   C_H (D-v)^{1/2-H} v^{1/2-H} * int_0^u w^{H-1/2} (w+D)^{H-1/2} / (w+v) dw.
double gn_kernel(const KernelParams& kp, double u, double v);

/// Partial derivative of gn_kernel in v.
double gn_kernel_deriv(const KernelParams& kp, double u, double v);

struct HistoryPrediction {
    double value = 0.0;
    // Magnitude contributed by the two cell-averaged singular boundary cells.
    double boundary_contribution = 0.0;
};

/// Conditional expectation of Z(u), u >= 0, given the history segment on
/// [-D, 0] (anchored to 0 at the right endpoint), as the Riemann-Stieltjes
/// sum of the kernel against history increments. Midpoint kernel values on
/// interior cells; the singular boundary cells use the cell-averaged leading
/// power instead of a point value.
HistoryPrediction predict_from_history(const SamplePath& history, double u,
                                       const KernelParams& kp);

/// v(x) = (1 + (1+x)^{2H} - |x|^{2H}) / 2 for |x| < 1.
double v_fn(double x, HurstParam h);

/// f(d, w, x) = H int_0^d g(d, 1+w, -u) [ (1+w+x+u)^{2H-1} - u^{2H-1} ] du.
/// Satisfies E[Z^J(L(1+w)) Z^J(L(1+w) + L x)] = L^{2H} f(D/L, w, x) for a
/// history window of length D and base scale L.
double cov_fn_f(double d, double w, double x, HurstParam h);

/// Exact conditional covariance cov(\hat Y^b(s), \hat Y^b(t) | H) given the
/// full netput history over the conditioning window, assembled from v_fn,
/// cov_fn_f and the window geometry.
double cond_cov_given_history(double s, double t, double b, const ModelParams& params,
                              double r);

/// Limit covariance theta^2 (|t|^{2H} + |s|^{2H} - |t-s|^{2H}) / 2.
double limit_cov(double s, double t, const ModelParams& params);

}  // namespace fbmq
