#ifndef TSNELIM_MICROSTRUCTURE_HPP
#define TSNELIM_MICROSTRUCTURE_HPP

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "common.hpp"
#include "continuum.hpp"
#include "kernels.hpp"

namespace tsnelim {

/// Lipschitz map that cuts [0,1]^d into k strips along the direction
/// e = e_{m+1} and translates their projections:
///   T_k(x) = P(x) + (k/mu) [int_0^{e.x} 1_{I_k}] e_1,
/// with transition intervals I_{k,n} = [(n-mu)/k, n/k], n = 1..k-1. The map
/// sends [0,1]^d onto [0,k] x [0,1]^{m-1}; slopes in the cut direction reach
/// k/mu. An optional multiplicative rescale shrinks the whole image.
struct CuttingMap {
    int d = 2, m = 1, k = 1;
    double mu = 0.25;
    double alpha = 0.5;
    double rescale = 1.0;

    /// Ramp profile g(t) = (k/mu) int_0^t 1_{I_k}: one unit per completed cut.
    double ramp(double t) const {
        double g = 0.0;
        for (int n = 1; n <= k - 1; ++n) {
            double lo = (n - mu) / k, hi = static_cast<double>(n) / k;
            if (t >= hi)
                g += 1.0;
            else if (t > lo)
                g += (t - lo) * k / mu;
        }
        return g;
    }

    bool in_transition(double t) const {
        for (int n = 1; n <= k - 1; ++n)
            if (t > (n - mu) / k && t < static_cast<double>(n) / k) return true;
        return false;
    }

    double transition_measure() const { return (k - 1) * mu / k; }

    void apply(const double* x, double* y) const {
        for (int a = 0; a < m; ++a) y[a] = rescale * x[a];
        y[0] += rescale * ramp(x[m]);
    }

    /// The Jacobian takes exactly two values: the projection, and the
    /// projection plus the ramp slope in the cut column.
    Mat jacobian_base() const {
        Mat J(m, d);
        for (int a = 0; a < m; ++a) J(a, a) = rescale;
        return J;
    }
    Mat jacobian_transition() const {
        Mat J = jacobian_base();
        J(0, m) = rescale * k / mu;
        return J;
    }
};

/// mu follows the schedule mu = k^{-alpha/(1-alpha)} that keeps the sublinear
/// attraction bounded; k = 1 has no cuts and reduces to the projection.
inline CuttingMap build_cutting_map(int d, int m, int k, double alpha) {
    if (d <= m || m < 1) throw std::invalid_argument("build_cutting_map: need d > m >= 1");
    if (k < 1) throw std::invalid_argument("build_cutting_map: k >= 1");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("build_cutting_map: alpha must lie in (0,1)");
    CuttingMap map;
    map.d = d;
    map.m = m;
    map.k = k;
    map.alpha = alpha;
    map.mu = std::min(0.49, std::pow(static_cast<double>(k), -alpha / (1.0 - alpha)));
    return map;
}

inline CuttingMap build_cutting_map_mu(int d, int m, int k, double mu) {
    if (d <= m || m < 1) throw std::invalid_argument("build_cutting_map: need d > m >= 1");
    if (!(mu > 0.0 && mu < 0.5)) throw std::invalid_argument("build_cutting_map: mu in (0, 1/2)");
    CuttingMap map;
    map.d = d;
    map.m = m;
    map.k = k;
    map.mu = mu;
    return map;
}

// ---------------------------------------------------------------------------
// Energy scan over a k-list.
// ---------------------------------------------------------------------------

struct CuttingScanRow {
    int k = 1;
    double a_sublinear = 0.0;  // attraction under C(1 + |A|^alpha)
    double a_kernel = 0.0;     // attraction under Phi_1 (or Phi_inf when rescaled)
    double repulsion = 0.0;
    double max_density = 0.0;
    double mass = 0.0;
};

struct CuttingScanResult {
    std::vector<CuttingScanRow> rows;
    bool rescaled = false;
    double slope_repulsion = 0.0;   // d R / d log k, top half of the k-list
    double slope_attraction = 0.0;  // d A_kernel / d log k
};

/// Monte Carlo scan: for each k, sample x uniformly on [0,1]^d (seeded by k),
/// push the samples through the closed-form map, histogram the image with
/// strip-aligned bins (8 per unit along e_1), and evaluate the two-valued
/// attraction together with the repulsion of the histogram density.
inline CuttingScanResult cutting_energy_scan(int d, int m, const std::vector<int>& klist,
                                             const KernelSpec& kernel, double alpha, bool rescaled,
                                             long samples = 1000000, uint64_t seed = 1234,
                                             int bins_per_unit = 8) {
    if (kernel.dim != d) throw std::invalid_argument("cutting_energy_scan: kernel dim mismatch");
    CuttingScanResult out;
    out.rescaled = rescaled;
    const double inf = std::numeric_limits<double>::infinity();
    for (int k : klist) {
        CuttingMap map = build_cutting_map(d, m, k, alpha);
        if (rescaled) map.rescale = std::pow(static_cast<double>(k), -1.0 / (2.0 * m));
        const int bins0 = std::max(8, bins_per_unit * k);
        const int binsO = bins_per_unit;
        std::array<int, 3> bins{bins0, 1, 1};
        for (int a = 1; a < m; ++a) bins[a] = binsO;
        std::array<double, 3> hi{map.rescale * k, map.rescale, map.rescale};

        PushforwardDensity hist;
        hist.repr = DensityRepr::histogram;
        hist.dim = m;
        hist.box.dim = m;
        for (int a = 0; a < m; ++a) {
            hist.box.lo[a] = 0.0;
            hist.box.hi[a] = hi[a];
        }
        hist.bins = bins;
        int cells = 1;
        for (int a = 0; a < m; ++a) cells *= bins[a];
        hist.values.assign(cells, 0.0);
        const double cell_vol = hist.cell_volume(0);

        Rng rng(seed + 7919ULL * static_cast<uint64_t>(k));
        long transition = 0;
        double x[4], y[3];
        for (long t = 0; t < samples; ++t) {
            for (int a = 0; a < d; ++a) x[a] = rng.uniform();
            if (map.in_transition(x[m])) ++transition;
            map.apply(x, y);
            int idx = 0;
            for (int a = 0; a < m; ++a) {
                int b = std::clamp(static_cast<int>(y[a] / hi[a] * bins[a]), 0, bins[a] - 1);
                idx = idx * bins[a] + b;
            }
            hist.values[idx] += 1.0;
        }
        for (auto& v : hist.values) v /= samples * cell_vol;

        double frac = static_cast<double>(transition) / samples;
        Mat base = map.jacobian_base(), trans = map.jacobian_transition();
        auto sublinear = [&](const Mat& A) {
            return 1.0 + std::pow(std::sqrt(A.frobenius_sq()), alpha);
        };
        double s_for_kernel = rescaled ? inf : 1.0;

        CuttingScanRow row;
        row.k = k;
        row.a_sublinear = sublinear(base) * (1.0 - frac) + sublinear(trans) * frac;
        row.a_kernel = phi_s(kernel, s_for_kernel, base) * (1.0 - frac) +
                       phi_s(kernel, s_for_kernel, trans) * frac;
        row.mass = hist.mass();
        row.max_density = hist.max_value();
        row.repulsion = m <= 2 ? std::log(hist.l2_norm_sq()) : std::log(riesz_interaction(hist));
        out.rows.push_back(row);
    }

    // OLS on the top half of the k-list (asymptotic regime)
    if (out.rows.size() < 2) return out;
    size_t nfit = std::max<size_t>(2, out.rows.size() - out.rows.size() / 2);
    std::vector<double> lk, rr, aa;
    for (size_t i = out.rows.size() - nfit; i < out.rows.size(); ++i) {
        lk.push_back(std::log(static_cast<double>(out.rows[i].k)));
        rr.push_back(out.rows[i].repulsion);
        aa.push_back(out.rows[i].a_kernel);
    }
    out.slope_repulsion = ls_slope(lk, rr);
    out.slope_attraction = ls_slope(lk, aa);
    return out;
}

}  // namespace tsnelim

#endif
