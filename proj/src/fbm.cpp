#include "fbmq/fbm.hpp"

#include <unsupported/Eigen/FFT>
#include <cmath>
#include <sstream>

namespace fbmq {

double fbm_covariance(double t, double s, HurstParam h) {
    const double two_h = 2.0 * h.value();
    return 0.5 * (std::pow(std::abs(t), two_h) + std::pow(std::abs(s), two_h) -
                  std::pow(std::abs(t - s), two_h));
}

double fgn_autocovariance(std::int64_t lag, double dt, HurstParam h) {
    if (lag < 0) throw std::invalid_argument("fgn_autocovariance: requires lag >= 0");
    if (!(dt > 0.0)) throw std::invalid_argument("fgn_autocovariance: requires dt > 0");
    const double two_h = 2.0 * h.value();
    const double k = static_cast<double>(lag);
    const double core = 0.5 * (std::pow(k + 1.0, two_h) + std::pow(std::abs(k - 1.0), two_h) -
                               2.0 * std::pow(k, two_h));
    return std::pow(dt, two_h) * core;
}

struct FgnSampler::Workspace {
    Eigen::FFT<double> fft;
    Eigen::VectorXcd xi;
    Eigen::VectorXcd freq;
};

FgnSampler::Workspace* FgnSampler::new_workspace() { return new Workspace(); }
void FgnSampler::delete_workspace(Workspace* ws) { delete ws; }

FgnSampler::FgnSampler(Eigen::Index n, double dt, HurstParam h)
    : n_(n), dt_(dt), hurst_(h.value()) {
    if (n < 1) throw std::invalid_argument("FgnSampler: requires n >= 1");
    if (n == 1) return;  // single draw handled without embedding

    // First row of the circulant embedding of the n-term Toeplitz
    // autocovariance: [r_0 .. r_n, r_{n-1} .. r_1], length 2n.
    const Eigen::Index m = 2 * n;
    Eigen::VectorXd row(m);
    for (Eigen::Index k = 0; k <= n; ++k) row[k] = fgn_autocovariance(k, dt, h);
    for (Eigen::Index k = n + 1; k < m; ++k) row[k] = row[m - k];

    Eigen::FFT<double> fft;
    Eigen::VectorXcd spectrum(m);
    fft.fwd(spectrum, row);

    const double max_eig = spectrum.real().maxCoeff();
    const double min_eig = spectrum.real().minCoeff();
    if (min_eig < -1e-10 * max_eig)
        throw circulant_embedding_error(
            "FgnSampler: circulant embedding produced a negative eigenvalue");

    sqrt_eigenvalues_ = spectrum.real().cwiseMax(0.0).cwiseSqrt();
}

FgnSampler::~FgnSampler() = default;
FgnSampler::FgnSampler(FgnSampler&&) noexcept = default;
FgnSampler& FgnSampler::operator=(FgnSampler&&) noexcept = default;

void FgnSampler::sample_into(RngSeed seed, Workspace& ws, Eigen::VectorXd& out) const {
    RandomStream rng(seed);
    out.resize(n_);
    if (n_ == 1) {
        out[0] = std::pow(dt_, hurst_) * rng.next_normal();
        return;
    }

    const Eigen::Index m = 2 * n_;
    ws.xi.resize(m);
    ws.xi[0] = rng.next_normal();
    ws.xi[n_] = rng.next_normal();
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (Eigen::Index j = 1; j < n_; ++j) {
        const double a = rng.next_normal();
        const double b = rng.next_normal();
        ws.xi[j] = std::complex<double>(a * inv_sqrt2, b * inv_sqrt2);
        ws.xi[m - j] = std::conj(ws.xi[j]);
    }
    ws.xi.array() *= sqrt_eigenvalues_.array();

    ws.fft.inv(ws.freq, ws.xi);
    const double scale = std::sqrt(static_cast<double>(m));
    out = scale * ws.freq.head(n_).real();
}

Eigen::VectorXd FgnSampler::sample(RngSeed seed) const {
    Workspace ws;
    Eigen::VectorXd out;
    sample_into(seed, ws, out);
    return out;
}

Eigen::VectorXd sample_fgn(Eigen::Index n, double dt, HurstParam h, RngSeed seed) {
    return FgnSampler(n, dt, h).sample(seed);
}

SamplePath sample_fbm_exact_small(const TimeGrid& grid, HurstParam h, RngSeed seed,
                                  Eigen::Index cap) {
    if (grid.n_points > cap)
        throw std::invalid_argument("sample_fbm_exact_small: grid exceeds the dense cap");

    // t = 0 is deterministic; factor the covariance of the remaining points.
    std::vector<Eigen::Index> free_idx;
    free_idx.reserve(grid.n_points);
    for (Eigen::Index k = 0; k < grid.n_points; ++k)
        if (grid.time(k) != 0.0) free_idx.push_back(k);

    Eigen::VectorXd values = Eigen::VectorXd::Zero(grid.n_points);
    const auto nf = static_cast<Eigen::Index>(free_idx.size());
    if (nf > 0) {
        Eigen::MatrixXd cov(nf, nf);
        for (Eigen::Index i = 0; i < nf; ++i)
            for (Eigen::Index j = 0; j <= i; ++j) {
                const double c =
                    fbm_covariance(grid.time(free_idx[i]), grid.time(free_idx[j]), h);
                cov(i, j) = c;
                cov(j, i) = c;
            }

        Eigen::LLT<Eigen::MatrixXd> llt(cov);
        if (llt.info() != Eigen::Success) {
            cov.diagonal().array() += 1e-12;
            llt.compute(cov);
            if (llt.info() != Eigen::Success)
                throw std::runtime_error(
                    "sample_fbm_exact_small: covariance not positive definite within "
                    "jitter tolerance");
        }

        RandomStream rng(seed);
        Eigen::VectorXd white(nf);
        for (Eigen::Index i = 0; i < nf; ++i) white[i] = rng.next_normal();
        const Eigen::VectorXd z = llt.matrixL() * white;
        for (Eigen::Index i = 0; i < nf; ++i) values[free_idx[i]] = z[i];
    }
    return SamplePath(grid, std::move(values));
}

SamplePath sample_two_sided_fbm(double t_minus, double t_plus, double dt, HurstParam h,
                                RngSeed seed) {
    if (!(t_minus > 0.0 && t_plus > 0.0 && dt > 0.0))
        throw std::invalid_argument("sample_two_sided_fbm: requires T_minus, T_plus, dt > 0");
    const double n_raw = (t_minus + t_plus) / dt;
    const double k0_raw = t_minus / dt;
    const auto n_inc = static_cast<Eigen::Index>(std::llround(n_raw));
    const auto k0 = static_cast<Eigen::Index>(std::llround(k0_raw));
    if (std::abs(n_raw - static_cast<double>(n_inc)) > 1e-9 ||
        std::abs(k0_raw - static_cast<double>(k0)) > 1e-9)
        throw std::invalid_argument(
            "sample_two_sided_fbm: grid misalignment, window must be a multiple of dt "
            "with 0 on the grid");

    const Eigen::VectorXd inc = sample_fgn(n_inc, dt, h, seed);
    Eigen::VectorXd path(n_inc + 1);
    path[0] = 0.0;
    for (Eigen::Index k = 0; k < n_inc; ++k) path[k + 1] = path[k] + inc[k];
    path.array() -= path[k0];
    path[k0] = 0.0;

    return SamplePath(TimeGrid(-t_minus, dt, n_inc + 1), std::move(path));
}

std::string path_to_csv(const SamplePath& path) {
    std::ostringstream os;
    os << "t,value\n";
    char buf[64];
    for (Eigen::Index k = 0; k < path.grid.n_points; ++k) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", path.grid.time(k),
                      path.values[k]);
        os << buf;
    }
    return os.str();
}

}  // namespace fbmq
