#pragma once

// Test-only oracles, kept independent of the library code paths they check.

#include <Eigen/Dense>
#include <functional>

#include "fbmq/fbm.hpp"

namespace fbmq::testing {

/// Adaptive Simpson integration; an independent scheme for cross-checking
/// the Gauss-Kronrod quadrature in the library.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth = 60);

/// Levinson-Durbin solve of a symmetric positive definite Toeplitz system
/// T x = y, with T given by its first column. O(n^2) time, O(n) memory.
Eigen::VectorXd toeplitz_solve(const Eigen::VectorXd& first_column,
                               const Eigen::VectorXd& rhs);

/// Prediction weights of fBM conditioning in the increment basis: the
/// conditional expectation of Z(target_time) given the increments of Z over
/// [-d, 0] on a uniform grid of n cells equals weights . increments.
Eigen::VectorXd fbm_increment_prediction_weights(double d, Eigen::Index n_cells,
                                                 double target_time, HurstParam h);

/// E[ E(Z(a)|history) * E(Z(a2)|history) ] for the history of Z over [-d, 0]
/// discretized to n cells, via the increment-basis Toeplitz solve.
double conditional_second_moment(double d, Eigen::Index n_cells, double a, double a2,
                                 HurstParam h);

/// Brute-force feasibility scan over the proof-parameter constraint system:
/// for each (r, eta1) on a grid of the given resolution, checks whether the
/// gamma/eta3/delta intervals are simultaneously nonempty.
bool feasibility_brute_scan(double h, double resolution);

}  // namespace fbmq::testing
