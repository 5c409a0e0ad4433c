#pragma once

#include <Eigen/Dense>
#include <functional>

namespace fbmq {

/// Standard normal distribution function, absolute error below 1e-14.
double normal_cdf(double x);

/// Upper tail 1 - Phi(x), accurate for large x.
double normal_sf(double x);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// One-sample Kolmogorov-Smirnov test of sorted samples against a known
/// continuous CDF, with the asymptotic p-value (no parameters estimated).
KsResult ks_test_sorted(const Eigen::VectorXd& sorted,
                        const std::function<double(double)>& cdf);

/// Complement of the Kolmogorov distribution: P(K > lambda).
double kolmogorov_sf(double lambda);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
};

/// Ordinary least squares y = a + b x with the classical slope standard error.
LinearFit linear_regression(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

double sample_median(Eigen::VectorXd values);  // by value: sorts a copy

struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;
};

MeanStderr mean_stderr(const Eigen::VectorXd& values);

}  // namespace fbmq
