#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace fbmq {

class quadrature_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct QuadOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-300;
    int max_intervals = 4000;
};

namespace detail {

// Gauss-Kronrod 7-15 nodes on [0,1] half-interval form: {node, gauss w, kronrod w}.
inline constexpr double kGk15[8][3] = {
    {0.000000000000000, 0.417959183673469, 0.209482141084728},
    {0.405845151377397, 0.381830050505119, 0.190350578064785},
    {0.741531185599394, 0.279705391489277, 0.140653259715525},
    {0.949107912342759, 0.129484966168870, 0.063092092629979},
    {0.207784955007898, 0.0, 0.204432940075298},
    {0.586087235467691, 0.0, 0.169004726639267},
    {0.864864423359769, 0.0, 0.104790010322250},
    {0.991455371120813, 0.0, 0.022935322010529}};

template <class F>
double gk15(const F& f, double a, double b, double& err) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double f0 = f(mid);
    double g7 = kGk15[0][1] * f0;
    double k15 = kGk15[0][2] * f0;
    for (int i = 1; i < 8; ++i) {
        const double dx = half * kGk15[i][0];
        const double fi = f(mid + dx) + f(mid - dx);
        g7 += kGk15[i][1] * fi;
        k15 += kGk15[i][2] * fi;
    }
    g7 *= half;
    k15 *= half;
    err = std::pow(200.0 * std::abs(g7 - k15), 1.5);
    return k15;
}

}  // namespace detail

/// Adaptive Gauss-Kronrod integration of f over [a, b].
template <class F>
double integrate(const F& f, double a, double b, const QuadOptions& opt = {}) {
    if (a == b) return 0.0;
    struct Seg {
        double a, b, value, error;
    };
    std::vector<Seg> segs;
    segs.reserve(64);
    double e0;
    const double v0 = detail::gk15(f, a, b, e0);
    segs.push_back({a, b, v0, e0});

    for (int iter = 0; iter < opt.max_intervals; ++iter) {
        double total = 0.0, total_err = 0.0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < segs.size(); ++i) {
            total += segs[i].value;
            total_err += segs[i].error;
            if (segs[i].error > segs[worst].error) worst = i;
        }
        if (total_err <= opt.rel_tol * std::abs(total) + opt.abs_tol) return total;

        const Seg s = segs[worst];
        const double mid = 0.5 * (s.a + s.b);
        if (mid == s.a || mid == s.b)
            throw quadrature_error("integrate: interval collapsed before converging");
        double e1, e2;
        const double v1 = detail::gk15(f, s.a, mid, e1);
        const double v2 = detail::gk15(f, mid, s.b, e2);
        segs[worst] = {s.a, mid, v1, e1};
        segs.push_back({mid, s.b, v2, e2});
    }
    throw quadrature_error("integrate: failed to reach requested tolerance");
}

/// Integral of u^p * f(u) over [0, b] with p > -1, computed through the
/// flattening substitution u = t^{1/(p+1)} so the endpoint power disappears.
template <class F>
double integrate_left_power(const F& f, double b, double p, const QuadOptions& opt = {}) {
    if (!(p > -1.0)) throw std::invalid_argument("integrate_left_power: requires p > -1");
    if (!(b > 0.0)) return 0.0;
    const double q = p + 1.0;
    const double upper = std::pow(b, q);
    return integrate([&](double t) { return f(std::pow(t, 1.0 / q)) / q; }, 0.0, upper, opt);
}

/// Integral of (b-u)^p * f(u) over [a, b] with p > -1 (right-endpoint power).
template <class F>
double integrate_right_power(const F& f, double a, double b, double p,
                             const QuadOptions& opt = {}) {
    return integrate_left_power([&](double s) { return f(b - s); }, b - a, p, opt);
}

}  // namespace fbmq
