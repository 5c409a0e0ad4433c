#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>

#include "fbmq/rng.hpp"

namespace fbmq {

/// Self-similarity index of fractional Brownian motion, restricted to (0,1).
class HurstParam {
  public:
    explicit HurstParam(double h) : h_(h) {
        if (!(h > 0.0 && h < 1.0))
            throw std::invalid_argument("HurstParam: requires 0 < H < 1");
    }

    double value() const { return h_; }

    /// Long-range dependent regime required by the limit-theorem machinery.
    void require_long_range() const {
        if (!(h_ > 0.5))
            throw std::invalid_argument("HurstParam: requires 1/2 < H < 1");
    }

  private:
    double h_;
};

/// Uniform grid t_start + k*dt, k = 0..n_points-1.
struct TimeGrid {
    double t_start = 0.0;
    double dt = 1.0;
    Eigen::Index n_points = 1;

    TimeGrid() = default;
    TimeGrid(double start, double step, Eigen::Index n)
        : t_start(start), dt(step), n_points(n) {
        if (!(dt > 0.0)) throw std::invalid_argument("TimeGrid: requires dt > 0");
        if (n_points < 1) throw std::invalid_argument("TimeGrid: requires n_points >= 1");
    }

    double time(Eigen::Index k) const { return t_start + static_cast<double>(k) * dt; }
    double t_end() const { return time(n_points - 1); }

    /// Index of the grid point nearest to t; throws if t is outside the grid
    /// by more than half a cell.
    Eigen::Index index_of(double t) const {
        const double raw = (t - t_start) / dt;
        const auto k = static_cast<Eigen::Index>(std::llround(raw));
        if (k < 0 || k >= n_points || std::abs(raw - static_cast<double>(k)) > 0.5 + 1e-9)
            throw std::out_of_range("TimeGrid: time not on grid");
        return k;
    }

    /// Index of an exact grid time (tolerance 1e-9 cells).
    Eigen::Index exact_index_of(double t) const {
        const double raw = (t - t_start) / dt;
        const auto k = static_cast<Eigen::Index>(std::llround(raw));
        if (k < 0 || k >= n_points || std::abs(raw - static_cast<double>(k)) > 1e-9)
            throw std::invalid_argument("TimeGrid: time is not a grid point");
        return k;
    }
};

/// A real-valued function sampled on a uniform grid.
struct SamplePath {
    TimeGrid grid;
    Eigen::VectorXd values;

    SamplePath() = default;
    SamplePath(TimeGrid g, Eigen::VectorXd v) : grid(g), values(std::move(v)) {
        if (values.size() != grid.n_points)
            throw std::invalid_argument("SamplePath: values length must equal n_points");
        if (!values.allFinite())
            throw std::invalid_argument("SamplePath: values must be finite");
    }
};

/// Raised when the circulant embedding has a materially negative eigenvalue;
/// callers fall back to the dense factorization sampler.
class circulant_embedding_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Covariance of standard two-sided fBM: (|t|^{2H} + |s|^{2H} - |t-s|^{2H})/2.
double fbm_covariance(double t, double s, HurstParam h);

/// Autocovariance of the increment sequence on a grid with step dt:
/// dt^{2H} * ((k+1)^{2H} + |k-1|^{2H} - 2 k^{2H}) / 2, for lag k >= 0.
double fgn_autocovariance(std::int64_t lag, double dt, HurstParam h);

/// Spectral (circulant-embedding) sampler of exact fractional Gaussian
/// noise. Construction precomputes the embedding eigenvalues; sample() is a
/// pure function of the seed.
class FgnSampler {
  public:
    struct Workspace;  // FFT plan and scratch buffers, reusable across calls

    FgnSampler(Eigen::Index n, double dt, HurstParam h);
    ~FgnSampler();
    FgnSampler(FgnSampler&&) noexcept;
    FgnSampler& operator=(FgnSampler&&) noexcept;
    FgnSampler(const FgnSampler&) = delete;
    FgnSampler& operator=(const FgnSampler&) = delete;

    Eigen::VectorXd sample(RngSeed seed) const;
    void sample_into(RngSeed seed, Workspace& ws, Eigen::VectorXd& out) const;

    static Workspace* new_workspace();
    static void delete_workspace(Workspace*);

    Eigen::Index size() const { return n_; }

  private:
    Eigen::Index n_;
    double dt_;
    double hurst_;
    Eigen::VectorXd sqrt_eigenvalues_;  // length 2n
};

/// n exact fGN increments for the given grid step and Hurst parameter.
Eigen::VectorXd sample_fgn(Eigen::Index n, double dt, HurstParam h, RngSeed seed);

/// Exact fBM on an arbitrary (small) uniform grid via dense Cholesky
/// factorization of the covariance matrix; the oracle generator.
SamplePath sample_fbm_exact_small(const TimeGrid& grid, HurstParam h, RngSeed seed,
                                  Eigen::Index cap = 4096);

/// Two-sided fBM on [-T_minus, T_plus] built from one contiguous fGN
/// sequence and re-anchored so the value at t = 0 is exactly zero.
SamplePath sample_two_sided_fbm(double t_minus, double t_plus, double dt,
                                HurstParam h, RngSeed seed);

/// Writes "t,value" CSV content for a path.
std::string path_to_csv(const SamplePath& path);

}  // namespace fbmq
