#ifndef TSNELIM_EXPERIMENTS_HPP
#define TSNELIM_EXPERIMENTS_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "continuum.hpp"
#include "discrete.hpp"
#include "nonlocal.hpp"
#include "solver1d.hpp"

namespace tsnelim {

// ---------------------------------------------------------------------------
// Consistency sweeps: discrete energies on sampled clouds against their
// continuum limits, across n with a bandwidth rule h(n).
// ---------------------------------------------------------------------------

struct SweepRow {
    int n = 0;
    double h = 0.0;
    double mean_err = 0.0;
    double sd_err = 0.0;
    double median_err = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    double loglog_slope = 0.0;  // of median error against n
    double limit = 0.0;         // the continuum target
};

/// Discrete attraction of a 1D cloud under a scalar map, sorted-window scan:
///   A_n = (1/n) sum_i (1/d_i) sum_j eta_{h_i}(|x_i-x_j|) log(1 + h^{-2}|T_i-T_j|^2).
inline double discrete_attraction_1d(const std::vector<double>& xs_sorted,
                                     const std::function<double(double)>& T,
                                     const KernelSpec& kernel, const BandwidthField& sigma,
                                     double h, bool include_self_in_degree = true) {
    const int n = static_cast<int>(xs_sorted.size());
    const double trunc = kernel.compact_support() ? kernel.support_radius : 6.0;
    const double h2 = h * h;
    std::vector<double> tv(n);
    for (int i = 0; i < n; ++i) tv[i] = T(xs_sorted[i]);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        double hi = sigma.sigma1(xs_sorted[i]) * h;
        double radius = trunc * hi;
        int jlo = static_cast<int>(std::lower_bound(xs_sorted.begin(), xs_sorted.end(),
                                                    xs_sorted[i] - radius) -
                                   xs_sorted.begin());
        int jhi = static_cast<int>(std::upper_bound(xs_sorted.begin(), xs_sorted.end(),
                                                    xs_sorted[i] + radius) -
                                   xs_sorted.begin());
        double deg = include_self_in_degree ? kernel.eta(0.0) / hi : 0.0;
        double acc = 0.0;
        for (int j = jlo; j < jhi; ++j) {
            if (j == i) continue;
            double e = kernel.eta(std::abs(xs_sorted[i] - xs_sorted[j]) / hi) / hi;
            if (e == 0.0) continue;
            deg += e;
            double dt = tv[i] - tv[j];
            acc += e * std::log1p(dt * dt / h2);
        }
        if (deg > 0.0) total += acc / deg;
    }
    return total / n;
}

/// exp(R_n) = (1/(n(n-1))) sum_{i != j} (1 + h^{-2}|T_i - T_j|^2)^{-1}.
inline double discrete_exp_repulsion_1d(const std::vector<double>& xs,
                                        const std::function<double(double)>& T, double h) {
    const int n = static_cast<int>(xs.size());
    const double h2 = h * h;
    std::vector<double> tv(n);
    for (int i = 0; i < n; ++i) tv[i] = T(xs[i]);
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double dt = tv[i] - tv[j];
            s += 2.0 / (1.0 + dt * dt / h2);
        }
    return s / (static_cast<double>(n) * (n - 1));
}

enum class SweepMode { attraction, repulsion };

/// For each n: trials i.i.d. clouds; the error is |A_n - A[T;Phi_1]|
/// (attraction) or |exp(R_n)/(pi h) - ||rho_Y||^2| (repulsion, m = 1).
inline SweepResult run_consistency_sweep(SweepMode mode,
                                         const std::function<double(double)>& T,
                                         const KernelSpec& kernel, const BandwidthField& sigma,
                                         const DensitySpec& rho, const std::vector<int>& nlist,
                                         const std::function<double(int)>& h_rule, int trials,
                                         uint64_t seed) {
    SweepResult out;
    // continuum reference on a fine exact grid
    auto Tmap = PiecewiseLinearMap::from_function(T, rho.domain.lo[0], rho.domain.hi[0], 8192);
    if (mode == SweepMode::attraction) {
        out.limit = continuum_attraction(Tmap, kernel, sigma, rho, 1.0);
    } else {
        out.limit = pi * l2_pushforward_1d(Tmap, rho);
    }

    for (int n : nlist) {
        double h = h_rule(n);
        std::vector<double> errs;
        for (int t = 0; t < trials; ++t) {
            auto cloud = sample(rho, n, seed + 1000003ULL * t + 17ULL * n);
            std::vector<double> xs = cloud.pts;
            std::sort(xs.begin(), xs.end());
            double err;
            if (mode == SweepMode::attraction) {
                err = std::abs(discrete_attraction_1d(xs, T, kernel, sigma, h) - out.limit);
            } else {
                err = std::abs(discrete_exp_repulsion_1d(xs, T, h) / h - out.limit);
            }
            errs.push_back(err);
        }
        SweepRow row;
        row.n = n;
        row.h = h;
        for (double e : errs) row.mean_err += e / trials;
        for (double e : errs) row.sd_err += (e - row.mean_err) * (e - row.mean_err);
        row.sd_err = trials > 1 ? std::sqrt(row.sd_err / (trials - 1)) : 0.0;
        row.median_err = median(errs);
        out.rows.push_back(row);
    }
    std::vector<double> lx, ly;
    for (const auto& r : out.rows) {
        lx.push_back(std::log(static_cast<double>(r.n)));
        ly.push_back(std::log(std::max(r.median_err, 1e-300)));
    }
    if (lx.size() >= 2) out.loglog_slope = ls_slope(lx, ly);
    return out;
}

/// Nonlocal repulsion localization sweep on a lattice map: for each h report
/// the normalized limit exp(R^h)/(pi h) (m = 1) or exp(R^h)/(2 pi h^2 log(1/h))
/// (m = 2), against ||rho_Y||^2.
struct LocalizationRow {
    double h = 0.0;
    double normalized = 0.0;
    double err = 0.0;
};

inline std::vector<LocalizationRow> repulsion_localization_sweep(const GridMap& T,
                                                                 const DensitySpec& rho,
                                                                 const std::vector<double>& hs,
                                                                 double target) {
    std::vector<LocalizationRow> rows;
    if (T.d == 1 && T.m == 1) {
        for (double h : hs) {
            double v = std::exp(nonlocal_repulsion(T, rho, h)) / (pi * h);
            rows.push_back({h, v, std::abs(v - target)});
        }
        return rows;
    }
    auto ev = prepare_repulsion(T, rho, T.n - 1);
    for (double h : hs) {
        double v = ev.exp_repulsion(h) / (2.0 * pi * h * h * std::log(1.0 / h));
        rows.push_back({h, v, std::abs(v - target)});
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Cluster-mixture experiment: discrete descent against the continuum solver.
// ---------------------------------------------------------------------------

enum class InitMode { random, identity, continuum };

inline const char* to_string(InitMode m) {
    switch (m) {
        case InitMode::random: return "random";
        case InitMode::identity: return "identity";
        case InitMode::continuum: return "continuum";
    }
    return "?";
}

struct MixtureRunConfig {
    double c = 0.5;        // cluster separation
    int n = 2500;          // points
    double h = 0.0;        // 0 means 5/n
    long steps = 100000;   // gradient descent steps
    double dt = 0.0;       // 0 means n/5
    InitMode init = InitMode::identity;
    DescentMode mode = DescentMode::tsne;
    uint64_t seed = 1;
    long trace_every = 200;
    int solver_grid = 4096;
};

struct MixtureRunResult {
    EmbeddingState state;
    PiecewiseLinearMap T_n;      // postprocessed discrete map
    PiecewiseLinearMap T_star;   // continuum minimizer
    PointCloud cloud;
    double final_kl = 0.0;
    double final_tsne_loss = 0.0;  // KL minus the p log p constant
    double initial_kl = 0.0;
    double h = 0.0;
};

inline MixtureRunResult run_mixture_experiment(const MixtureRunConfig& cfg) {
    MixtureRunResult out;
    auto rho = DensitySpec::cluster_mixture(cfg.c);
    auto ep = KernelSpec::epanechnikov(1);
    auto sigma = BandwidthField::knn_proxy(rho);
    double h = cfg.h > 0.0 ? cfg.h : 5.0 / cfg.n;
    double dt = cfg.dt > 0.0 ? cfg.dt : cfg.n / 5.0;
    out.h = h;

    out.cloud = sample(rho, cfg.n, cfg.seed);
    auto P = build_affinities(out.cloud, ep, sigma, h);

    auto sol = fixed_point_solve(ScalarPotential::from_kernel(ep),
                                 Profile1D::on_grid(rho, sigma, cfg.solver_grid));
    out.T_star = sol.T_star;

    std::vector<double> y0;
    switch (cfg.init) {
        case InitMode::random: y0 = init_random(cfg.n, 1, cfg.seed + 99); break;
        case InitMode::identity: y0 = init_identity(out.cloud, h); break;
        case InitMode::continuum: y0 = init_from_map(out.cloud, out.T_star, h); break;
    }

    out.state = descend(P, y0, 1, cfg.steps, dt, cfg.mode, cfg.trace_every, h);
    out.state.seed = cfg.seed;
    out.initial_kl = out.state.trace.front().kl;
    out.final_kl = out.state.trace.back().kl;
    out.final_tsne_loss = out.final_kl - out.state.constant;

    auto post = postprocess(out.state.y, cfg.n, 1, h);
    out.T_n = discrete_map_1d(out.cloud, post);
    return out;
}

}  // namespace tsnelim

#endif
