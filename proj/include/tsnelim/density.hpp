#ifndef TSNELIM_DENSITY_HPP
#define TSNELIM_DENSITY_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "common.hpp"
#include "grid_map.hpp"

namespace tsnelim {

// ---------------------------------------------------------------------------
// Data density rho_X on an interval or box.
// ---------------------------------------------------------------------------

enum class DensityFamily { uniform, gaussian_mixture_uniform };

/// Data density. The mixture family (d = 1 only) is
///   rho(x) = p (G_s(x - c) + G_s(x + c)) + (1 - 2p) / |domain|
/// restricted to the domain and renormalized numerically; G_s is the normal
/// density with variance `var`.
struct DensitySpec {
    int dim = 1;
    Box domain = Box::interval(0.0, 1.0);
    DensityFamily family = DensityFamily::uniform;
    double p = 0.0, c = 0.0, var = 1.0;
    double scale = 1.0;  // test knob: total mass is `scale`, default 1
    double znorm = 1.0;  // numeric normalizer for the mixture
    double rho_min = 0.0, rho_max = 0.0;

    double pdf1(double x) const {
        if (x < domain.lo[0] || x > domain.hi[0]) return 0.0;
        if (family == DensityFamily::uniform) return scale / domain.volume();
        return scale * unnormalized(x) / znorm;
    }

    double pdf(const double* x) const {
        if (dim == 1) return pdf1(x[0]);
        if (!domain.contains(x)) return 0.0;
        return scale / domain.volume();  // multi-d densities are uniform
    }

    double cdf1(double x) const {
        double a = domain.lo[0], b = domain.hi[0];
        if (x <= a) return 0.0;
        if (x >= b) return scale;
        if (family == DensityFamily::uniform) return scale * (x - a) / (b - a);
        double s = std::sqrt(var);
        auto ncdf = [&](double t) { return 0.5 * std::erfc(-t / std::sqrt(2.0)); };
        double g = p * (ncdf((x - c) / s) - ncdf((a - c) / s)) +
                   p * (ncdf((x + c) / s) - ncdf((a + c) / s)) +
                   (1.0 - 2.0 * p) * (x - a) / (b - a);
        return scale * g / znorm;
    }

    double mass() const { return scale; }

    static DensitySpec uniform(const Box& d) {
        DensitySpec s;
        s.dim = d.dim;
        s.domain = d;
        s.family = DensityFamily::uniform;
        s.rho_min = s.rho_max = 1.0 / d.volume();
        return s;
    }

    static DensitySpec uniform1d(double a, double b) { return uniform(Box::interval(a, b)); }

    static DensitySpec mixture1d(double a, double b, double p, double c, double var) {
        if (!(p >= 0.0 && p <= 0.5)) throw std::invalid_argument("mixture weight p must be in [0, 1/2]");
        if (!(var > 0.0)) throw std::invalid_argument("mixture variance must be positive");
        DensitySpec s;
        s.dim = 1;
        s.domain = Box::interval(a, b);
        s.family = DensityFamily::gaussian_mixture_uniform;
        s.p = p;
        s.c = c;
        s.var = var;
        // normalizer = integral of the unnormalized density over [a, b]
        double sd = std::sqrt(var);
        auto ncdf = [&](double t) { return 0.5 * std::erfc(-t / std::sqrt(2.0)); };
        s.znorm = p * (ncdf((b - c) / sd) - ncdf((a - c) / sd)) +
                  p * (ncdf((b + c) / sd) - ncdf((a + c) / sd)) + (1.0 - 2.0 * p);
        s.compute_bounds();
        return s;
    }

    /// Two-Gaussians-plus-uniform family on [-1,1] with p = 0.4, var = 0.005.
    static DensitySpec cluster_mixture(double c) { return mixture1d(-1.0, 1.0, 0.4, c, 0.005); }

    DensitySpec rescaled_mass(double new_scale) const {
        DensitySpec s = *this;
        s.scale = new_scale;
        s.rho_min = rho_min / scale * new_scale;
        s.rho_max = rho_max / scale * new_scale;
        return s;
    }

  private:
    double unnormalized(double x) const {
        double sd = std::sqrt(var);
        auto g = [&](double t) {
            return std::exp(-0.5 * t * t / var) / (sd * std::sqrt(2.0 * pi));
        };
        return p * (g(x - c) + g(x + c)) + (1.0 - 2.0 * p) / domain.extent(0);
    }

    // bounds evaluated on a 10^4-point grid
    void compute_bounds() {
        const int n = 10000;
        rho_min = std::numeric_limits<double>::infinity();
        rho_max = 0.0;
        for (int i = 0; i <= n; ++i) {
            double x = domain.lo[0] + domain.extent(0) * i / n;
            double v = pdf1(x);
            rho_min = std::min(rho_min, v);
            rho_max = std::max(rho_max, v);
        }
    }
};

// ---------------------------------------------------------------------------
// Bandwidth field sigma(x).
// ---------------------------------------------------------------------------

enum class BandwidthMode { constant, knn_proxy, inverse_density_power };

/// sigma(x): constant, the k-NN proxy rho_max / rho_X(x), or rho_X^{-1/d}.
struct BandwidthField {
    BandwidthMode mode = BandwidthMode::constant;
    double value = 1.0;
    DensitySpec density;
    double sigma_min = 1.0, sigma_max = 1.0;

    double sigma1(double x) const {
        switch (mode) {
            case BandwidthMode::constant: return value;
            case BandwidthMode::knn_proxy: return density.rho_max / density.pdf1(x);
            case BandwidthMode::inverse_density_power:
                return std::pow(density.pdf1(x), -1.0 / density.dim);
        }
        return value;
    }

    double sigma(const double* x) const {
        if (mode == BandwidthMode::constant) return value;
        if (density.dim == 1) return sigma1(x[0]);
        double r = density.pdf(x);
        return mode == BandwidthMode::knn_proxy ? density.rho_max / r
                                                : std::pow(r, -1.0 / density.dim);
    }

    static BandwidthField constant(double v) {
        if (!(v > 0.0)) throw std::invalid_argument("bandwidth must be positive");
        BandwidthField b;
        b.mode = BandwidthMode::constant;
        b.value = v;
        b.sigma_min = b.sigma_max = v;
        return b;
    }

    static BandwidthField knn_proxy(const DensitySpec& rho) {
        BandwidthField b;
        b.mode = BandwidthMode::knn_proxy;
        b.density = rho;
        b.sigma_min = 1.0;  // rho_max / rho_max
        b.sigma_max = rho.rho_max / rho.rho_min;
        return b;
    }

    static BandwidthField inverse_density_power(const DensitySpec& rho) {
        BandwidthField b;
        b.mode = BandwidthMode::inverse_density_power;
        b.density = rho;
        b.sigma_min = std::pow(rho.rho_max, -1.0 / rho.dim);
        b.sigma_max = std::pow(rho.rho_min, -1.0 / rho.dim);
        return b;
    }
};

// ---------------------------------------------------------------------------
// Point clouds.
// ---------------------------------------------------------------------------

struct PointCloud {
    int n = 0;
    int dim = 1;
    std::vector<double> pts;  // row-major n x dim
    uint64_t seed = 0;

    const double* point(int i) const { return &pts[static_cast<size_t>(i) * dim]; }
    double x1(int i) const { return pts[static_cast<size_t>(i) * dim]; }
};

/// n i.i.d. draws from the density; deterministic per seed. The mixture is
/// sampled by component selection with rejection onto the domain.
inline PointCloud sample(const DensitySpec& density, int n, uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
    PointCloud cloud;
    cloud.n = n;
    cloud.dim = density.dim;
    cloud.seed = seed;
    cloud.pts.resize(static_cast<size_t>(n) * density.dim);
    Rng rng(seed);
    if (density.family == DensityFamily::uniform) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < density.dim; ++j)
                cloud.pts[static_cast<size_t>(i) * density.dim + j] =
                    rng.uniform(density.domain.lo[j], density.domain.hi[j]);
        return cloud;
    }
    const double a = density.domain.lo[0], b = density.domain.hi[0];
    const double sd = std::sqrt(density.var);
    for (int i = 0; i < n; ++i) {
        double x;
        do {
            double u = rng.uniform();
            if (u < density.p)
                x = density.c + sd * rng.normal();
            else if (u < 2.0 * density.p)
                x = -density.c + sd * rng.normal();
            else
                x = rng.uniform(a, b);
        } while (x < a || x > b);
        cloud.pts[i] = x;
    }
    return cloud;
}

// ---------------------------------------------------------------------------
// Pushforward density rho_Y.
// ---------------------------------------------------------------------------

enum class DensityRepr { exact_monotone_1d, histogram, kde };

/// Density of the embedded data. Either an exact per-cell representation on
/// the (non-uniform) image grid of a monotone 1D map, or a histogram/KDE on a
/// uniform lattice.
struct PushforwardDensity {
    DensityRepr repr = DensityRepr::histogram;
    int dim = 1;
    // exact_monotone_1d: edges (size cells+1, increasing) and a value per cell
    std::vector<double> edges;
    // histogram/kde: uniform lattice over box with bins[axis] cells per axis
    Box box;
    std::array<int, 3> bins{1, 1, 1};
    std::vector<double> values;  // density per cell, row-major
    bool nonmonotone_fallback = false;

    int cell_count() const {
        if (repr == DensityRepr::exact_monotone_1d) return static_cast<int>(edges.size()) - 1;
        int c = 1;
        for (int i = 0; i < dim; ++i) c *= bins[i];
        return c;
    }

    double cell_volume(int i) const {
        if (repr == DensityRepr::exact_monotone_1d) return edges[i + 1] - edges[i];
        double v = 1.0;
        for (int a = 0; a < dim; ++a) v *= box.extent(a) / bins[a];
        return v;
    }

    double mass() const {
        double s = 0.0;
        for (int i = 0; i < cell_count(); ++i) s += values[i] * cell_volume(i);
        return s;
    }

    double l2_norm_sq() const {
        double s = 0.0;
        for (int i = 0; i < cell_count(); ++i) s += values[i] * values[i] * cell_volume(i);
        return s;
    }

    double max_value() const { return *std::max_element(values.begin(), values.end()); }
};

/// Exact 1D pushforward of a strictly increasing piecewise linear map:
/// rho_Y = rho_X / T' per cell, emitted on the image grid. Cell values are
/// CDF differences divided by image length, so the total mass is exact.
/// A nonmonotone map falls back to a histogram and sets the warning flag.
inline PushforwardDensity pushforward_density_1d(const PiecewiseLinearMap& T,
                                                 const DensitySpec& density,
                                                 int fallback_bins = 512) {
    if (density.dim != 1) throw std::invalid_argument("pushforward_density_1d: d = 1 only");
    PushforwardDensity out;
    out.dim = 1;
    if (T.strictly_increasing()) {
        out.repr = DensityRepr::exact_monotone_1d;
        int nc = T.cells();
        out.edges.resize(nc + 1);
        out.values.resize(nc);
        for (int i = 0; i <= nc; ++i) out.edges[i] = T.y[i];
        for (int i = 0; i < nc; ++i) {
            double mass = density.cdf1(T.x[i + 1]) - density.cdf1(T.x[i]);
            out.values[i] = mass / (T.y[i + 1] - T.y[i]);
        }
        return out;
    }
    // histogram fallback: deposit per-cell mass at image midpoints
    out.repr = DensityRepr::histogram;
    out.nonmonotone_fallback = true;
    double ylo = *std::min_element(T.y.begin(), T.y.end());
    double yhi = *std::max_element(T.y.begin(), T.y.end());
    if (yhi <= ylo) throw std::runtime_error("pushforward_density_1d: map has degenerate image");
    out.box = Box::interval(ylo, yhi);
    out.bins = {fallback_bins, 1, 1};
    out.values.assign(fallback_bins, 0.0);
    double w = (yhi - ylo) / fallback_bins;
    const int refine = 16;  // sub-cells per map cell
    for (int c = 0; c < T.cells(); ++c) {
        for (int r = 0; r < refine; ++r) {
            double xa = T.x[c] + (T.x[c + 1] - T.x[c]) * r / refine;
            double xb = T.x[c] + (T.x[c + 1] - T.x[c]) * (r + 1) / refine;
            double mass = density.cdf1(xb) - density.cdf1(xa);
            double ym = T(0.5 * (xa + xb));
            int b = std::clamp(static_cast<int>((ym - ylo) / w), 0, fallback_bins - 1);
            out.values[b] += mass / w;
        }
    }
    return out;
}

/// Histogram (default) or KDE estimate of rho_Y from embedded points,
/// m in {1,2,3}. Bin count defaults to ceil(n^{1/(m+2)}) per axis.
inline PushforwardDensity pushforward_density_md(const std::vector<double>& points, int n, int m,
                                                 int bins_per_axis = 0, double kde_bandwidth = 0.0) {
    if (n < 2) throw std::invalid_argument("pushforward_density_md: need n >= 2");
    if (m < 1 || m > 3) throw std::invalid_argument("pushforward_density_md: m must be 1..3");
    std::array<double, 3> lo{}, hi{};
    for (int a = 0; a < m; ++a) {
        lo[a] = std::numeric_limits<double>::infinity();
        hi[a] = -std::numeric_limits<double>::infinity();
    }
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < m; ++a) {
            double v = points[static_cast<size_t>(i) * m + a];
            lo[a] = std::min(lo[a], v);
            hi[a] = std::max(hi[a], v);
        }
    double spread = 0.0;
    for (int a = 0; a < m; ++a) spread = std::max(spread, hi[a] - lo[a]);
    if (spread <= 0.0)
        throw std::runtime_error("pushforward_density_md: all points identical (degenerate support)");

    PushforwardDensity out;
    out.dim = m;
    const bool kde = kde_bandwidth > 0.0;
    int nb = bins_per_axis > 0 ? bins_per_axis
                               : static_cast<int>(std::ceil(std::pow(n, 1.0 / (m + 2))));
    double margin = kde ? 4.0 * kde_bandwidth : 1e-9 * std::max(1.0, spread);
    for (int a = 0; a < m; ++a) {
        out.box.lo[a] = lo[a] - margin;
        out.box.hi[a] = hi[a] + margin;
        out.bins[a] = nb;
    }
    out.box.dim = m;
    int cells = 1;
    for (int a = 0; a < m; ++a) cells *= out.bins[a];
    out.values.assign(cells, 0.0);

    if (!kde) {
        out.repr = DensityRepr::histogram;
        double cv = out.cell_volume(0);
        for (int i = 0; i < n; ++i) {
            int idx = 0;
            for (int a = 0; a < m; ++a) {
                double t = (points[static_cast<size_t>(i) * m + a] - out.box.lo[a]) /
                           out.box.extent(a);
                int b = std::clamp(static_cast<int>(t * out.bins[a]), 0, out.bins[a] - 1);
                idx = idx * out.bins[a] + b;
            }
            out.values[idx] += 1.0 / (n * cv);
        }
        return out;
    }

    out.repr = DensityRepr::kde;
    // Gaussian product KDE evaluated at cell centers.
    const double h = kde_bandwidth;
    const double norm = std::pow(2.0 * pi * h * h, -0.5 * m) / n;
    std::array<int, 3> stride{1, 1, 1};
    for (int a = m - 2; a >= 0; --a) stride[a] = stride[a + 1] * out.bins[a + 1];
    for (int cell = 0; cell < cells; ++cell) {
        std::array<double, 3> y{};
        int rem = cell;
        for (int a = 0; a < m; ++a) {
            int b = rem / stride[a];
            rem %= stride[a];
            y[a] = out.box.lo[a] + (b + 0.5) * out.box.extent(a) / out.bins[a];
        }
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            double q = 0.0;
            for (int a = 0; a < m; ++a) {
                double dd = (y[a] - points[static_cast<size_t>(i) * m + a]) / h;
                q += dd * dd;
            }
            s += std::exp(-0.5 * q);
        }
        out.values[cell] = norm * s;
    }
    return out;
}

}  // namespace tsnelim

#endif
