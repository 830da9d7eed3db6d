#ifndef TSNELIM_CONTINUUM_HPP
#define TSNELIM_CONTINUUM_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "density.hpp"
#include "grid_map.hpp"
#include "kernels.hpp"
#include "quadrature.hpp"
#include "solver1d.hpp"

namespace tsnelim {

struct ContinuumEnergyReport {
    double attraction = 0.0;
    double repulsion = 0.0;
    double total = 0.0;
    double s = 1.0;
    std::string regime;  // "L2" (m <= 2) or "riesz" (m >= 3)
};

// ---------------------------------------------------------------------------
// Attraction A[T; Phi_s] = int Phi_s(sigma DT) rho dx.
// ---------------------------------------------------------------------------

/// Per-cell evaluation for a scalar 1D map: the Jacobian is the exact cell
/// slope, sigma at the midpoint, the cell density mass from the CDF.
inline double continuum_attraction(const PiecewiseLinearMap& T, const KernelSpec& kernel,
                                   const BandwidthField& sigma, const DensitySpec& rho, double s) {
    if (!(s > 0.0)) throw std::invalid_argument("continuum_attraction: s must be positive");
    const bool inf_s = std::isinf(s);
    double a = 0.0;
    std::vector<int> degenerate;
    for (int c = 0; c < T.cells(); ++c) {
        double xm = 0.5 * (T.x[c] + T.x[c + 1]);
        double u = T.slope(c);
        if (inf_s && u == 0.0) {
            degenerate.push_back(c);
            continue;
        }
        double mass = rho.cdf1(T.x[c + 1]) - rho.cdf1(T.x[c]);
        if (mass == 0.0) continue;
        a += phi_s(kernel, s, sigma.sigma1(xm) * std::abs(u)) * mass;
    }
    if (!degenerate.empty()) {
        std::string cells;
        for (size_t i = 0; i < std::min<size_t>(degenerate.size(), 8); ++i)
            cells += (i ? "," : "") + std::to_string(degenerate[i]);
        throw std::domain_error("continuum_attraction: zero-Jacobian cells at s = infinity: " + cells);
    }
    return a;
}

/// Midpoint-per-cell evaluation for lattice maps (d in {1,2}).
inline double continuum_attraction(const GridMap& T, const KernelSpec& kernel,
                                   const BandwidthField& sigma, const DensitySpec& rho, double s) {
    if (!(s > 0.0)) throw std::invalid_argument("continuum_attraction: s must be positive");
    if (kernel.dim != T.d) throw std::invalid_argument("continuum_attraction: kernel dim mismatch");
    const bool inf_s = std::isinf(s);
    const int nc = T.n - 1;
    double a = 0.0;
    std::vector<int> degenerate;
    double pt[2];
    const double cell_vol = T.spacing(0) * (T.d == 2 ? T.spacing(1) : 1.0);
    for (int i = 0; i < nc; ++i) {
        for (int j = 0; j < (T.d == 2 ? nc : 1); ++j) {
            Mat J = T.jacobian(i, j);
            pt[0] = T.box.lo[0] + (i + 0.5) * T.spacing(0);
            if (T.d == 2) pt[1] = T.box.lo[1] + (j + 0.5) * T.spacing(1);
            if (inf_s && J.is_zero()) {
                degenerate.push_back(i * nc + j);
                continue;
            }
            double sg = sigma.sigma(pt);
            a += phi_s(kernel, s, J.scaled(sg)) * rho.pdf(pt) * cell_vol;
        }
    }
    if (!degenerate.empty())
        throw std::domain_error("continuum_attraction: " + std::to_string(degenerate.size()) +
                                " zero-Jacobian cells at s = infinity");
    return a;
}

/// At s = infinity the bandwidth field enters the attraction only through an
/// additive constant: A[T; Phi_inf] = int avg_w log(|DT w|^2) rho dx + C2 with
/// C2 = C1 + int log(sigma^2) rho dx. Returns C2.
inline double attraction_constant_c2(const KernelSpec& kernel, const BandwidthField& sigma,
                                     const DensitySpec& rho) {
    double c1 = detail::log_radial_moment(kernel);
    if (rho.dim == 1) {
        double a = rho.domain.lo[0], b = rho.domain.hi[0];
        return c1 + integrate(
                        [&](double x) {
                            double sg = sigma.sigma1(x);
                            return 2.0 * std::log(sg) * rho.pdf1(x);
                        },
                        a, b, 1e-10);
    }
    if (sigma.mode == BandwidthMode::constant) return c1 + 2.0 * std::log(sigma.value);
    throw std::invalid_argument("attraction_constant_c2: general sigma needs a 1D density");
}

// ---------------------------------------------------------------------------
// Repulsion R[T]: log ||rho_Y||_{L^2}^2 for m <= 2, the Riesz double integral
// for m >= 3 (midpoint cells, singular diagonal integrated against the
// equivalent-volume ball), and a Fourier route for radial profiles.
// ---------------------------------------------------------------------------

inline void require_probability(const PushforwardDensity& rho_y) {
    if (std::abs(rho_y.mass() - 1.0) > 1e-3)
        throw std::invalid_argument("repulsion: rho_Y mass is off by more than 1e-3");
}

/// Riesz interaction \iint rho(y) rho(y') / |y-y'|^2 dy dy' on the lattice.
inline double riesz_interaction(const PushforwardDensity& rho_y) {
    if (rho_y.dim < 3) throw std::invalid_argument("riesz_interaction: m >= 3 only");
    if (rho_y.repr == DensityRepr::exact_monotone_1d)
        throw std::invalid_argument("riesz_interaction: lattice representation required");
    const int m = rho_y.dim;
    std::array<int, 3> stride{1, 1, 1};
    for (int a = m - 2; a >= 0; --a) stride[a] = stride[a + 1] * rho_y.bins[a + 1];
    std::array<double, 3> w{};
    for (int a = 0; a < m; ++a) w[a] = rho_y.box.extent(a) / rho_y.bins[a];
    const double vol = w[0] * w[1] * w[2];

    // gather occupied cells
    std::vector<std::array<double, 3>> centers;
    std::vector<double> vals;
    for (int cell = 0; cell < rho_y.cell_count(); ++cell) {
        if (rho_y.values[cell] == 0.0) continue;
        std::array<double, 3> y{};
        int rem = cell;
        for (int a = 0; a < m; ++a) {
            int b = rem / stride[a];
            rem %= stride[a];
            y[a] = rho_y.box.lo[a] + (b + 0.5) * w[a];
        }
        centers.push_back(y);
        vals.push_back(rho_y.values[cell]);
    }
    const size_t n = centers.size();
    double total = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const auto& yi = centers[i];
        double row = 0.0;
        for (size_t j = i + 1; j < n; ++j) {
            double d2 = 0.0;
            for (int a = 0; a < m; ++a) {
                double dd = yi[a] - centers[j][a];
                d2 += dd * dd;
            }
            row += vals[j] / d2;
        }
        total += 2.0 * vals[i] * row * vol * vol;
    }
    // diagonal cells against the equivalent-volume ball: int_B 1/|z|^2 = 4 pi r
    double r_eq = std::cbrt(3.0 * vol / (4.0 * pi));
    for (size_t i = 0; i < n; ++i) total += vals[i] * vals[i] * vol * 4.0 * pi * r_eq;
    return total;
}

/// Fourier route for a radial density in R^3: the interaction equals
/// pi \int |xi|^{-1} |rho_hat|^2 dxi with rho_hat(k) = (2/k) int r f(r) sin(2 pi r k) dr.
inline double riesz_interaction_fourier_radial(const std::function<double(double)>& radial,
                                               double rmax, double kmax = 40.0) {
    auto rho_hat = [&](double k) {
        if (k < 1e-9) {
            return 4.0 * pi *
                   integrate([&](double r) { return radial(r) * r * r; }, 0.0, rmax, 1e-11);
        }
        return 2.0 / k *
               integrate([&](double r) { return radial(r) * r * std::sin(2.0 * pi * r * k); }, 0.0,
                         rmax, 1e-11);
    };
    return pi * 4.0 * pi *
           integrate(
               [&](double k) {
                   double h = rho_hat(k);
                   return k * h * h;
               },
               0.0, kmax, 1e-9);
}

/// log repulsion from a pushforward density.
inline double continuum_repulsion(const PushforwardDensity& rho_y, int m) {
    require_probability(rho_y);
    if (m <= 2) return std::log(rho_y.l2_norm_sq());
    return std::log(riesz_interaction(rho_y));
}

// ---------------------------------------------------------------------------
// Exact coarea repulsion for (possibly nonmonotone) scalar 1D maps:
// rho_Y(y) = sum over branches of rho_X / |T'| and R = log int rho_Y^2 dy.
// ---------------------------------------------------------------------------

inline double l2_pushforward_1d(const PiecewiseLinearMap& T, const DensitySpec& rho) {
    const int nc = T.cells();
    for (int c = 0; c < nc; ++c)
        if (T.slope(c) == 0.0) return std::numeric_limits<double>::infinity();
    // breakpoints of the branch structure in y
    std::vector<double> bp(T.y);
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    double total = 0.0;
    for (size_t seg = 0; seg + 1 < bp.size(); ++seg) {
        double ylo = bp[seg], yhi = bp[seg + 1];
        // branches whose image covers this y-interval
        std::vector<int> active;
        for (int c = 0; c < nc; ++c) {
            double a = std::min(T.y[c], T.y[c + 1]), b = std::max(T.y[c], T.y[c + 1]);
            if (a <= ylo + 1e-15 * std::abs(ylo) + 1e-300 && b >= yhi - 1e-15 * std::abs(yhi) - 1e-300)
                active.push_back(c);
        }
        if (active.empty()) continue;
        auto rho_y = [&](double y) {
            double s = 0.0;
            for (int c : active) {
                double inv = (y - T.y[c]) / (T.y[c + 1] - T.y[c]);
                double x = T.x[c] + inv * (T.x[c + 1] - T.x[c]);
                s += rho.pdf1(x) / std::abs(T.slope(c));
            }
            return s;
        };
        total += integrate([&](double y) { double v = rho_y(y); return v * v; }, ylo, yhi, 1e-11, 12);
    }
    return total;
}

/// Monotone rearrangement T*(x) = int_a^x |T'|, pinned to 0 at the left end.
inline PiecewiseLinearMap rearrange_1d(const PiecewiseLinearMap& T) {
    std::vector<double> ys(T.x.size(), 0.0);
    for (int c = 0; c < T.cells(); ++c)
        ys[c + 1] = ys[c] + std::abs(T.y[c + 1] - T.y[c]);
    return PiecewiseLinearMap::from_breakpoints(T.x, std::move(ys));
}

// ---------------------------------------------------------------------------
// Full continuum energy for scalar 1D maps (m = 1 regime).
// ---------------------------------------------------------------------------

inline ContinuumEnergyReport continuum_energy_1d(const PiecewiseLinearMap& T,
                                                 const KernelSpec& kernel,
                                                 const BandwidthField& sigma,
                                                 const DensitySpec& rho, double s) {
    ContinuumEnergyReport rep;
    rep.s = s;
    rep.regime = "L2";
    rep.attraction = continuum_attraction(T, kernel, sigma, rho, s);
    rep.repulsion = std::log(l2_pushforward_1d(T, rho));
    rep.total = rep.attraction + rep.repulsion;
    return rep;
}

// ---------------------------------------------------------------------------
// Lattice pushforward of a d = 2 map and the m = 2 energy.
// ---------------------------------------------------------------------------

/// Deposit the density mass of each map cell at its image point on a uniform
/// y-lattice. Midpoint quadrature of the pushforward.
inline PushforwardDensity pushforward_histogram(const GridMap& T, const DensitySpec& rho,
                                                int bins_per_axis) {
    if (T.d != 2 || T.m != 2) throw std::invalid_argument("pushforward_histogram: d = m = 2 maps");
    const int nc = T.n - 1;
    const double cell_vol = T.spacing(0) * T.spacing(1);
    std::vector<double> ys;
    ys.reserve(static_cast<size_t>(nc) * nc * 2);
    std::vector<double> mass;
    mass.reserve(static_cast<size_t>(nc) * nc);
    double pt[2];
    for (int i = 0; i < nc; ++i)
        for (int j = 0; j < nc; ++j) {
            pt[0] = T.box.lo[0] + (i + 0.5) * T.spacing(0);
            pt[1] = T.box.lo[1] + (j + 0.5) * T.spacing(1);
            // image of the cell midpoint: average of the four corner values
            double y0 = 0.25 * (T.at(i, j)[0] + T.at(i + 1, j)[0] + T.at(i, j + 1)[0] +
                                T.at(i + 1, j + 1)[0]);
            double y1 = 0.25 * (T.at(i, j)[1] + T.at(i + 1, j)[1] + T.at(i, j + 1)[1] +
                                T.at(i + 1, j + 1)[1]);
            ys.push_back(y0);
            ys.push_back(y1);
            mass.push_back(rho.pdf(pt) * cell_vol);
        }
    std::array<double, 2> lo{ys[0], ys[1]}, hi{ys[0], ys[1]};
    for (size_t q = 0; q < mass.size(); ++q) {
        lo[0] = std::min(lo[0], ys[2 * q]);
        hi[0] = std::max(hi[0], ys[2 * q]);
        lo[1] = std::min(lo[1], ys[2 * q + 1]);
        hi[1] = std::max(hi[1], ys[2 * q + 1]);
    }
    PushforwardDensity out;
    out.repr = DensityRepr::histogram;
    out.dim = 2;
    out.box.dim = 2;
    double pad0 = 1e-9 * std::max(1.0, hi[0] - lo[0]), pad1 = 1e-9 * std::max(1.0, hi[1] - lo[1]);
    out.box.lo = {lo[0] - pad0, lo[1] - pad1, 0.0};
    out.box.hi = {hi[0] + pad0, hi[1] + pad1, 0.0};
    out.bins = {bins_per_axis, bins_per_axis, 1};
    out.values.assign(static_cast<size_t>(bins_per_axis) * bins_per_axis, 0.0);
    double bw0 = out.box.extent(0) / bins_per_axis, bw1 = out.box.extent(1) / bins_per_axis;
    for (size_t q = 0; q < mass.size(); ++q) {
        int b0 = std::clamp(static_cast<int>((ys[2 * q] - out.box.lo[0]) / bw0), 0, bins_per_axis - 1);
        int b1 = std::clamp(static_cast<int>((ys[2 * q + 1] - out.box.lo[1]) / bw1), 0,
                            bins_per_axis - 1);
        out.values[static_cast<size_t>(b0) * bins_per_axis + b1] += mass[q] / (bw0 * bw1);
    }
    return out;
}

/// Dilation transform of a density representation: the histogram of lambda*T
/// is the histogram of T with bins rescaled by lambda (exact).
inline PushforwardDensity dilated(const PushforwardDensity& p, double lam) {
    if (!(lam > 0.0)) throw std::invalid_argument("dilated: lambda must be positive");
    PushforwardDensity out = p;
    const int m = p.dim;
    if (p.repr == DensityRepr::exact_monotone_1d) {
        for (auto& e : out.edges) e *= lam;
        for (auto& v : out.values) v /= lam;
        return out;
    }
    for (int a = 0; a < m; ++a) {
        out.box.lo[a] *= lam;
        out.box.hi[a] *= lam;
    }
    double f = std::pow(lam, m);
    for (auto& v : out.values) v /= f;
    return out;
}

// ---------------------------------------------------------------------------
// Scaling identity E[lambda T; Phi_s] = E[T; Phi_{s lambda}] + (2-m)_+ log(lambda).
// ---------------------------------------------------------------------------

struct ScalingCheck {
    double lhs = 0.0;
    double rhs = 0.0;
};

inline ScalingCheck scaling_identity_check(const PiecewiseLinearMap& T, const KernelSpec& kernel,
                                           const BandwidthField& sigma, const DensitySpec& rho,
                                           double s, double lam) {
    if (!(s > 0.0) || std::isinf(s))
        throw std::invalid_argument("scaling_identity_check: s must be finite positive");
    auto lhs_rep = continuum_energy_1d(T.scaled(lam), kernel, sigma, rho, s);
    auto rhs_rep = continuum_energy_1d(T, kernel, sigma, rho, s * lam);
    return {lhs_rep.total, rhs_rep.total + 1.0 * std::log(lam)};  // (2-m)_+ = 1 at m = 1
}

inline ScalingCheck scaling_identity_check(const GridMap& T, const KernelSpec& kernel,
                                           const BandwidthField& sigma, const DensitySpec& rho,
                                           double s, double lam, int bins = 128) {
    if (T.m != 2) throw std::invalid_argument("scaling_identity_check: lattice path is m = 2");
    if (!(s > 0.0) || std::isinf(s))
        throw std::invalid_argument("scaling_identity_check: s must be finite positive");
    auto rho_y = pushforward_histogram(T, rho, bins);
    double lhs = continuum_attraction(T.scaled(lam), kernel, sigma, rho, s) +
                 continuum_repulsion(dilated(rho_y, lam), 2);
    double rhs = continuum_attraction(T, kernel, sigma, rho, s * lam) +
                 continuum_repulsion(rho_y, 2);
    return {lhs, rhs};  // (2-m)_+ = 0 at m = 2
}

// ---------------------------------------------------------------------------
// SNE continuum energy: c_eta int |DT|^2 sigma^2 rho dx + log ||rho_Y||^2.
// ---------------------------------------------------------------------------

inline double sne_continuum_energy(const PiecewiseLinearMap& T, const KernelSpec& kernel,
                                   const BandwidthField& sigma, const DensitySpec& rho) {
    bool constant_map = true;
    for (size_t i = 1; i < T.y.size(); ++i) constant_map &= T.y[i] == T.y[0];
    if (constant_map)
        throw std::runtime_error("sne_continuum_energy: constant map has degenerate rho_Y");
    double c_eta = directional_second_moment(kernel);
    double a = 0.0;
    for (int c = 0; c < T.cells(); ++c) {
        double xm = 0.5 * (T.x[c] + T.x[c + 1]);
        double sg = sigma.sigma1(xm);
        double mass = rho.cdf1(T.x[c + 1]) - rho.cdf1(T.x[c]);
        a += c_eta * T.slope(c) * T.slope(c) * sg * sg * mass;
    }
    return a + std::log(l2_pushforward_1d(T, rho));
}

// ---------------------------------------------------------------------------
// Perona-Malik-regularized energy I_lambda.
// ---------------------------------------------------------------------------

/// I_lambda[u] = int log(1 + u^2) rho dx + lambda log(int u^{-1} rho^2 dx)
/// on the gradient-modulus field u = |grad T|, for lambda in (0,2); outside
/// that range the energy is unbounded below and the call is rejected.
inline double perona_malik_energy(const Profile1D& p, double lambda) {
    if (!(lambda > 0.0 && lambda < 2.0))
        throw std::invalid_argument("perona_malik_energy: lambda must lie in (0,2)");
    std::vector<double> f(p.size()), g(p.size());
    for (int i = 0; i < p.size(); ++i) {
        if (p.u[i] <= 0.0) return std::numeric_limits<double>::infinity();
        f[i] = std::log1p(p.u[i] * p.u[i]) * p.rho[i];
        g[i] = p.rho[i] * p.rho[i] / p.u[i];
    }
    return detail::trapezoid(p.x, f) + lambda * std::log(detail::trapezoid(p.x, g));
}

inline double perona_malik_energy(const PiecewiseLinearMap& T, const DensitySpec& rho,
                                  double lambda) {
    Profile1D p;
    p.x.resize(T.cells());
    p.u.resize(T.cells());
    p.sigma.assign(T.cells(), 1.0);
    p.rho.resize(T.cells());
    for (int c = 0; c < T.cells(); ++c) {
        p.x[c] = 0.5 * (T.x[c] + T.x[c + 1]);
        p.u[c] = std::abs(T.slope(c));
        p.rho[c] = rho.pdf1(p.x[c]);
    }
    return perona_malik_energy(p, lambda);
}

/// Minimize I_lambda over positive u by the fixed-point solver applied to the
/// plain-log potential with the rescaled density rho / lambda.
inline SolverResult perona_malik_minimize(const DensitySpec& rho, double lambda, int n_nodes) {
    if (!(lambda > 0.0 && lambda < 2.0))
        throw std::invalid_argument("perona_malik_minimize: lambda must lie in (0,2)");
    auto scaled = rho.rescaled_mass(rho.mass() / lambda);
    auto prof = Profile1D::on_grid(scaled, BandwidthField::constant(1.0), n_nodes);
    return fixed_point_solve(ScalarPotential::plain_log(), prof);
}

// ---------------------------------------------------------------------------
// Lipschitz ramp family: F(x) = theta x plus a ramp of width 1/n at 1/2.
// ---------------------------------------------------------------------------

inline PiecewiseLinearMap heaviside_ramp_map(double theta_slope, int n) {
    double half = 0.5, w = 1.0 / n;
    std::vector<double> xs{0.0, half, half + w, 1.0};
    std::vector<double> ys{0.0, theta_slope * half, theta_slope * (half + w) + 1.0,
                           theta_slope * 1.0 + 1.0};
    return PiecewiseLinearMap::from_breakpoints(std::move(xs), std::move(ys));
}

}  // namespace tsnelim

#endif
