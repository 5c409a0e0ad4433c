#include "fbmq/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fbmq {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_sf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double kolmogorov_sf(double lambda) {
    if (lambda <= 0.0) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += sign * term;
        sign = -sign;
        if (term < 1e-14) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test_sorted(const Eigen::VectorXd& sorted,
                        const std::function<double(double)>& cdf) {
    const auto n = sorted.size();
    if (n < 1) throw std::invalid_argument("ks_test_sorted: requires nonempty sample");
    double d = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double f = cdf(sorted[i]);
        const double lo = static_cast<double>(i) / static_cast<double>(n);
        const double hi = static_cast<double>(i + 1) / static_cast<double>(n);
        d = std::max(d, std::max(hi - f, f - lo));
    }
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    const double lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    return {d, kolmogorov_sf(lambda)};
}

LinearFit linear_regression(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const auto n = x.size();
    if (n != y.size() || n < 2)
        throw std::invalid_argument("linear_regression: requires two or more paired points");
    const double xm = x.mean();
    const double ym = y.mean();
    const double sxx = (x.array() - xm).square().sum();
    if (!(sxx > 0.0)) throw std::invalid_argument("linear_regression: degenerate abscissae");
    const double sxy = ((x.array() - xm) * (y.array() - ym)).sum();

    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = ym - fit.slope * xm;
    if (n > 2) {
        const Eigen::ArrayXd resid =
            y.array() - fit.intercept - fit.slope * x.array();
        const double s2 = resid.square().sum() / static_cast<double>(n - 2);
        fit.slope_se = std::sqrt(s2 / sxx);
    }
    return fit;
}

double sample_median(Eigen::VectorXd values) {
    const auto n = values.size();
    if (n < 1) throw std::invalid_argument("sample_median: requires nonempty sample");
    std::sort(values.data(), values.data() + n);
    return (n % 2 == 1) ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

MeanStderr mean_stderr(const Eigen::VectorXd& values) {
    const auto n = values.size();
    if (n < 2) throw std::invalid_argument("mean_stderr: requires two or more samples");
    MeanStderr out;
    out.mean = values.mean();
    const double var = (values.array() - out.mean).square().sum() / static_cast<double>(n - 1);
    out.stderr_ = std::sqrt(var / static_cast<double>(n));
    return out;
}

}  // namespace fbmq
