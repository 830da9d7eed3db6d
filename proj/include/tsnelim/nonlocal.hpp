#ifndef TSNELIM_NONLOCAL_HPP
#define TSNELIM_NONLOCAL_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "density.hpp"
#include "grid_map.hpp"
#include "kernels.hpp"
#include "microstructure.hpp"

namespace tsnelim {

namespace detail {

inline void check_kernel_resolution(const GridMap& T, const KernelSpec& kernel, double h) {
    (void)kernel;
    for (int a = 0; a < T.d; ++a)
        if (h < 2.0 * T.spacing(a))
            throw std::invalid_argument(
                "nonlocal: bandwidth below twice the grid spacing (kernel under-resolved)");
}

/// Midpoint cells of a lattice map: positions at cell centers, values by
/// linear interpolation of the nodal values. Keeps positions and map values
/// on the same geometry (second-order consistent).
struct MidpointCells {
    int d = 1, m = 1, n = 1;  // cells per axis
    std::array<double, 2> lo{0.0, 0.0}, w{0.0, 0.0};
    std::vector<double> values;  // cell-major, m components

    double coord(int axis, int idx) const { return lo[axis] + (idx + 0.5) * w[axis]; }
    const double* at(int i, int j = 0) const {
        return &values[static_cast<size_t>(d == 1 ? i : i * n + j) * m];
    }
};

inline MidpointCells midpoint_cells(const GridMap& T) {
    MidpointCells c;
    c.d = T.d;
    c.m = T.m;
    c.n = T.n - 1;
    for (int a = 0; a < T.d; ++a) {
        c.lo[a] = T.box.lo[a];
        c.w[a] = T.spacing(a);
    }
    c.values.resize(static_cast<size_t>(T.d == 1 ? c.n : c.n * c.n) * T.m);
    if (T.d == 1) {
        for (int i = 0; i < c.n; ++i)
            for (int a = 0; a < T.m; ++a)
                c.values[static_cast<size_t>(i) * T.m + a] =
                    0.5 * (T.at(i)[a] + T.at(i + 1)[a]);
        return c;
    }
    for (int i = 0; i < c.n; ++i)
        for (int j = 0; j < c.n; ++j)
            for (int a = 0; a < T.m; ++a)
                c.values[static_cast<size_t>(i * c.n + j) * T.m + a] =
                    0.25 * (T.at(i, j)[a] + T.at(i + 1, j)[a] + T.at(i, j + 1)[a] +
                            T.at(i + 1, j + 1)[a]);
    return c;
}

}  // namespace detail

/// Nonlocal attraction
///   A^h[T] = iint eta_{h sigma(x)}(|x-x'|) log(1 + h^{-2}|T(x)-T(x')|^2) rho(x) dx dx'
/// by midpoint cells with the inner integral truncated at the kernel support
/// (or six bandwidths for the Gaussian family).
inline double nonlocal_attraction(const GridMap& T, const KernelSpec& kernel,
                                  const BandwidthField& sigma, const DensitySpec& rho, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("nonlocal_attraction: h must be positive");
    if (kernel.dim != T.d) throw std::invalid_argument("nonlocal_attraction: kernel dim mismatch");
    detail::check_kernel_resolution(T, kernel, h);
    const double trunc = kernel.compact_support() ? kernel.support_radius : 6.0;
    const double h2 = h * h;
    const auto c = detail::midpoint_cells(T);
    const int n = c.n;

    if (T.d == 1) {
        const double w = c.w[0];
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            double xi = c.coord(0, i);
            double sg = sigma.sigma1(xi) * h;
            double radius = trunc * sg;
            int jlo = std::max(0, static_cast<int>((xi - radius - c.lo[0]) / w) - 1);
            int jhi = std::min(n - 1, static_cast<int>((xi + radius - c.lo[0]) / w) + 1);
            double ti = c.at(i)[0];
            double inner = 0.0;
            for (int j = jlo; j <= jhi; ++j) {
                double e = kernel.eta(std::abs(xi - c.coord(0, j)) / sg) / sg;
                if (e == 0.0) continue;
                double dt = ti - c.at(j)[0];
                inner += e * std::log1p(dt * dt / h2);
            }
            total += inner * rho.pdf1(xi) * w * w;
        }
        return total;
    }

    // d = 2
    const double w0 = c.w[0], w1 = c.w[1];
    double total = 0.0;
    double pt[2];
    for (int i0 = 0; i0 < n; ++i0)
        for (int i1 = 0; i1 < n; ++i1) {
            pt[0] = c.coord(0, i0);
            pt[1] = c.coord(1, i1);
            double sg = sigma.sigma(pt) * h;
            double radius = trunc * sg;
            int j0lo = std::max(0, static_cast<int>((pt[0] - radius - c.lo[0]) / w0) - 1);
            int j0hi = std::min(n - 1, static_cast<int>((pt[0] + radius - c.lo[0]) / w0) + 1);
            int j1lo = std::max(0, static_cast<int>((pt[1] - radius - c.lo[1]) / w1) - 1);
            int j1hi = std::min(n - 1, static_cast<int>((pt[1] + radius - c.lo[1]) / w1) + 1);
            const double* ti = c.at(i0, i1);
            double inner = 0.0;
            for (int j0 = j0lo; j0 <= j0hi; ++j0)
                for (int j1 = j1lo; j1 <= j1hi; ++j1) {
                    double dx0 = pt[0] - c.coord(0, j0);
                    double dx1 = pt[1] - c.coord(1, j1);
                    double r = std::sqrt(dx0 * dx0 + dx1 * dx1);
                    double e = kernel.eta(r / sg) / (sg * sg);
                    if (e == 0.0) continue;
                    const double* tj = c.at(j0, j1);
                    double d2 = 0.0;
                    for (int a = 0; a < T.m; ++a) d2 += (ti[a] - tj[a]) * (ti[a] - tj[a]);
                    inner += e * std::log1p(d2 / h2);
                }
            total += inner * rho.pdf(pt) * w0 * w1 * w0 * w1;
        }
    return total;
}

/// Nonlocal repulsion
///   R^h[T] = log iint (1 + h^{-2}|T(x)-T(x')|^2)^{-1} rho(x) rho(x') dx dx'.
/// d = 1 sums all cell pairs directly; d = 2 goes through the pushforward
/// form: the image masses are deposited on a y-lattice whose autocorrelation
/// is reused across an h sweep.
struct RepulsionEvaluator {
    int m = 1;
    // lattice autocorrelation: mass products accumulated per offset cell
    std::vector<double> corr;  // (2B-1)^m offsets, row-major
    int bins = 0;
    std::array<double, 2> step{0.0, 0.0};

    /// exp(R^h) for the prepared map.
    double exp_repulsion(double h) const {
        const double h2 = h * h;
        const int B = bins;
        double s = 0.0;
        if (m == 1) {
            for (int o = -(B - 1); o <= B - 1; ++o) {
                double z = o * step[0];
                s += corr[o + B - 1] / (1.0 + z * z / h2);
            }
            return s;
        }
        for (int o0 = -(B - 1); o0 <= B - 1; ++o0)
            for (int o1 = -(B - 1); o1 <= B - 1; ++o1) {
                double z0 = o0 * step[0], z1 = o1 * step[1];
                double c = corr[static_cast<size_t>(o0 + B - 1) * (2 * B - 1) + (o1 + B - 1)];
                if (c != 0.0) s += c / (1.0 + (z0 * z0 + z1 * z1) / h2);
            }
        return s;
    }

    double repulsion(double h) const { return std::log(exp_repulsion(h)); }
};

/// Build the reusable evaluator from image masses on a lattice.
inline RepulsionEvaluator prepare_repulsion(const std::vector<double>& image_pts,
                                            const std::vector<double>& mass, int m, int bins) {
    RepulsionEvaluator ev;
    ev.m = m;
    ev.bins = bins;
    std::array<double, 2> lo{1e300, 1e300}, hi{-1e300, -1e300};
    const size_t n = mass.size();
    for (size_t i = 0; i < n; ++i)
        for (int a = 0; a < m; ++a) {
            lo[a] = std::min(lo[a], image_pts[i * m + a]);
            hi[a] = std::max(hi[a], image_pts[i * m + a]);
        }
    std::vector<double> binned(m == 1 ? bins : static_cast<size_t>(bins) * bins, 0.0);
    // bin centers span [lo, hi]: image lattices (bins matching the cell count)
    // then land exactly on bin centers instead of straddling bin edges
    for (int a = 0; a < m; ++a) {
        double ext = std::max(hi[a] - lo[a], 1e-12);
        ev.step[a] = ext / (bins - 1);
        lo[a] -= 0.5 * ev.step[a];
    }
    for (size_t i = 0; i < n; ++i) {
        int idx = 0;
        for (int a = 0; a < m; ++a) {
            int b = std::clamp(static_cast<int>((image_pts[i * m + a] - lo[a]) / ev.step[a]), 0,
                               bins - 1);
            idx = idx * bins + b;
        }
        binned[idx] += mass[i];
    }
    // autocorrelation over offsets
    if (m == 1) {
        ev.corr.assign(2 * bins - 1, 0.0);
        for (int i = 0; i < bins; ++i) {
            if (binned[i] == 0.0) continue;
            for (int j = 0; j < bins; ++j)
                if (binned[j] != 0.0) ev.corr[i - j + bins - 1] += binned[i] * binned[j];
        }
        return ev;
    }
    ev.corr.assign(static_cast<size_t>(2 * bins - 1) * (2 * bins - 1), 0.0);
    for (int i0 = 0; i0 < bins; ++i0)
        for (int i1 = 0; i1 < bins; ++i1) {
            double bi = binned[static_cast<size_t>(i0) * bins + i1];
            if (bi == 0.0) continue;
            for (int j0 = 0; j0 < bins; ++j0)
                for (int j1 = 0; j1 < bins; ++j1) {
                    double bj = binned[static_cast<size_t>(j0) * bins + j1];
                    if (bj != 0.0)
                        ev.corr[static_cast<size_t>(i0 - j0 + bins - 1) * (2 * bins - 1) +
                                (i1 - j1 + bins - 1)] += bi * bj;
                }
        }
    return ev;
}

inline RepulsionEvaluator prepare_repulsion(const GridMap& T, const DensitySpec& rho,
                                            int bins = 256) {
    const auto c = detail::midpoint_cells(T);
    const int n = c.n;
    std::vector<double> pts, mass;
    if (T.d == 1) {
        for (int i = 0; i < n; ++i) {
            for (int a = 0; a < T.m; ++a) pts.push_back(c.at(i)[a]);
            mass.push_back(rho.pdf1(c.coord(0, i)) * c.w[0]);
        }
    } else {
        double pt[2];
        for (int i0 = 0; i0 < n; ++i0)
            for (int i1 = 0; i1 < n; ++i1) {
                pt[0] = c.coord(0, i0);
                pt[1] = c.coord(1, i1);
                const double* t = c.at(i0, i1);
                for (int a = 0; a < T.m; ++a) pts.push_back(t[a]);
                mass.push_back(rho.pdf(pt) * c.w[0] * c.w[1]);
            }
    }
    return prepare_repulsion(pts, mass, T.m, bins);
}

inline double nonlocal_repulsion(const GridMap& T, const DensitySpec& rho, double h,
                                 int bins = 256) {
    if (!(h > 0.0)) throw std::invalid_argument("nonlocal_repulsion: h must be positive");
    if (T.d == 1 && T.m == 1) {
        // direct cell-pair sum
        const auto c = detail::midpoint_cells(T);
        const int n = c.n;
        const double h2 = h * h;
        std::vector<double> mass(n), val(n);
        for (int i = 0; i < n; ++i) {
            mass[i] = rho.pdf1(c.coord(0, i)) * c.w[0];
            val[i] = c.at(i)[0];
        }
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            double row = 0.0;
            for (int j = 0; j < n; ++j) {
                double dt = val[i] - val[j];
                row += mass[j] / (1.0 + dt * dt / h2);
            }
            s += mass[i] * row;
        }
        return std::log(s);
    }
    auto ev = prepare_repulsion(T, rho, bins);
    for (int a = 0; a < T.m; ++a)
        if (h < 2.0 * ev.step[a])
            throw std::invalid_argument(
                "nonlocal_repulsion: bandwidth below twice the image bin width");
    return ev.repulsion(h);
}

/// Nonlocal attraction of a cutting map (d = 2, m = 1, uniform density on
/// the unit square), reduced over the first coordinate: with u = x_1 - x_1'
/// carrying the triangular weight (1 - |u|),
///   A^h[T_k] = int dx2 int dx2' int du (1-|u|) eta_h(|(u, x2-x2')|)
///              log(1 + h^{-2}(u + g(x2) - g(x2'))^2),
/// where g is the ramp profile of the cuts.
inline double cut_sensitivity(const CuttingMap& map, const KernelSpec& kernel, double h,
                              int grid = 4096, int u_nodes = 129) {
    if (map.d != 2 || map.m != 1)
        throw std::invalid_argument("cut_sensitivity: implemented for d = 2, m = 1");
    if (!(map.mu <= 0.01 * map.k * h))
        throw std::invalid_argument("cut_sensitivity: requires mu <= 0.01 k h");
    if (kernel.dim != 2) throw std::invalid_argument("cut_sensitivity: d = 2 kernel required");
    const double trunc = kernel.compact_support() ? kernel.support_radius : 6.0;
    const double radius = trunc * h;
    const double w = 1.0 / grid;
    const double h2 = h * h;

    std::vector<double> ramp(grid);
    for (int i = 0; i < grid; ++i) ramp[i] = map.ramp((i + 0.5) * w);

    double total = 0.0;
    const double du = 2.0 * radius / (u_nodes - 1);
    for (int i = 0; i < grid; ++i) {
        double x2 = (i + 0.5) * w;
        int jlo = std::max(0, static_cast<int>((x2 - radius) / w) - 1);
        int jhi = std::min(grid - 1, static_cast<int>((x2 + radius) / w) + 1);
        double acc = 0.0;
        for (int j = jlo; j <= jhi; ++j) {
            double dz = x2 - (j + 0.5) * w;
            double dg = ramp[i] - ramp[j];
            double inner = 0.0;
            for (int q = 0; q < u_nodes; ++q) {
                double u = -radius + q * du;
                double wt = (q == 0 || q == u_nodes - 1) ? 0.5 : 1.0;  // trapezoid
                double tri = 1.0 - std::abs(u);
                if (tri <= 0.0) continue;
                double e = kernel.eta(std::sqrt(u * u + dz * dz) / h) / h2;
                if (e == 0.0) continue;
                double dt = u + dg;
                inner += wt * tri * e * std::log1p(dt * dt / h2);
            }
            acc += inner * du;
        }
        total += acc * w * w;
    }
    return total;
}

}  // namespace tsnelim

#endif
