#ifndef TSNELIM_QUADRATURE_HPP
#define TSNELIM_QUADRATURE_HPP

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "common.hpp"

namespace tsnelim {

/// Node counts and tolerances for every quadrature used by the library.
struct QuadratureConfig {
    double gk_tol = 1e-12;        // relative target for adaptive Gauss-Kronrod
    int gk_max_depth = 24;        // adaptive bisection depth
    int gauss_hermite_nodes = 50; // Gaussian-kernel line integrals
    int angular_nodes = 256;      // d=2 angular rule for radial kernels
    int sphere_directions = 4096; // Monte Carlo sphere average (antithetic)
    uint64_t sphere_seed = 20240915ULL;
};

inline const QuadratureConfig& quad_config() {
    static QuadratureConfig cfg;
    return cfg;
}

/// Adaptive Gauss-Kronrod (G7,K15) on a finite interval.
template <class F>
double integrate(F&& f, double a, double b, double tol = quad_config().gk_tol,
                 int max_depth = quad_config().gk_max_depth) {
    return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(std::forward<F>(f), a, b,
                                                                         max_depth, tol);
}

/// Gauss-Hermite rule for integrals of exp(-x^2) f(x) over the real line.
/// Golub-Welsch nodes obtained by Newton iteration on the recurrence.
struct GaussHermite {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussHermite(int n) {
        nodes.resize(n);
        weights.resize(n);
        const double eps = 1e-15;
        const int m = (n + 1) / 2;
        double z = 0.0;
        for (int i = 0; i < m; ++i) {
            if (i == 0)
                z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
            else if (i == 1)
                z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
            else if (i == 2)
                z = 1.86 * z - 0.86 * nodes[0];
            else if (i == 3)
                z = 1.91 * z - 0.91 * nodes[1];
            else
                z = 2.0 * z - nodes[i - 2];
            double pp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p1 = 0.7511255444649425;  // pi^{-1/4}
                double p2 = 0.0;
                for (int j = 0; j < n; ++j) {
                    double p3 = p2;
                    p2 = p1;
                    p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 -
                         std::sqrt(static_cast<double>(j) / (j + 1.0)) * p3;
                }
                pp = std::sqrt(2.0 * n) * p2;
                double z1 = z;
                z = z1 - p1 / pp;
                if (std::abs(z - z1) <= eps) break;
            }
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            weights[i] = 2.0 / (pp * pp);
            weights[n - 1 - i] = weights[i];
        }
    }

    static const GaussHermite& get(int n) {
        static GaussHermite gh50(50);
        if (n == 50) return gh50;
        thread_local GaussHermite custom(0 /*replaced below*/);
        if (static_cast<int>(custom.nodes.size()) != n) custom = GaussHermite(n);
        return custom;
    }
};

/// Integral of f against the standard normal density N(0,1).
template <class F>
double integrate_std_normal(F&& f, int n_nodes = quad_config().gauss_hermite_nodes) {
    const GaussHermite& gh = GaussHermite::get(n_nodes);
    const double sqrt2 = std::sqrt(2.0);
    const double inv_sqrt_pi = 1.0 / std::sqrt(pi);
    double s = 0.0;
    for (size_t i = 0; i < gh.nodes.size(); ++i) s += gh.weights[i] * f(sqrt2 * gh.nodes[i]);
    return inv_sqrt_pi * s;
}

/// Surface area of the unit sphere in R^d.
inline double sphere_area(int d) {
    return 2.0 * std::pow(pi, 0.5 * d) / std::tgamma(0.5 * d);
}

/// Volume of the unit ball in R^m.
inline double ball_volume(int m) { return std::pow(pi, 0.5 * m) / std::tgamma(0.5 * m + 1.0); }

/// Fixed set of unit directions for spherical averages: antithetic pairs of
/// isotropic Gaussian draws, deterministic per (d, n, seed). Cached.
inline const std::vector<double>& sphere_directions(int d, int n = quad_config().sphere_directions,
                                                    uint64_t seed = quad_config().sphere_seed) {
    struct Key {
        int d, n;
        uint64_t seed;
        bool operator==(const Key& o) const { return d == o.d && n == o.n && seed == o.seed; }
    };
    static std::vector<std::pair<Key, std::vector<double>>> cache;
    Key k{d, n, seed};
    for (auto& e : cache)
        if (e.first == k) return e.second;
    if (n % 2 != 0) throw std::invalid_argument("sphere_directions: n must be even");
    std::vector<double> dirs(static_cast<size_t>(n) * d);
    Rng rng(seed + 1000003ULL * static_cast<uint64_t>(d));
    for (int i = 0; i < n / 2; ++i) {
        double norm2 = 0.0;
        std::vector<double> w(d);
        do {
            norm2 = 0.0;
            for (int j = 0; j < d; ++j) {
                w[j] = rng.normal();
                norm2 += w[j] * w[j];
            }
        } while (norm2 < 1e-24);
        double inv = 1.0 / std::sqrt(norm2);
        for (int j = 0; j < d; ++j) {
            dirs[static_cast<size_t>(2 * i) * d + j] = w[j] * inv;
            dirs[static_cast<size_t>(2 * i + 1) * d + j] = -w[j] * inv;
        }
    }
    cache.emplace_back(k, std::move(dirs));
    return cache.back().second;
}

}  // namespace tsnelim

#endif
