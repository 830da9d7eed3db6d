#ifndef TSNELIM_SOLVER1D_HPP
#define TSNELIM_SOLVER1D_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "density.hpp"
#include "grid_map.hpp"
#include "kernels.hpp"

namespace tsnelim {

// ---------------------------------------------------------------------------
// Scalar attraction potential for the 1D problem: Phi(v), its derivative via
// Theta(v) = v^2 Phi'(v), either kernel-averaged or the plain logarithm.
// ---------------------------------------------------------------------------

struct ScalarPotential {
    std::function<double(double)> phi;
    std::function<double(double)> theta;

    double phi_prime(double v) const { return v > 0.0 ? theta(v) / (v * v) : 0.0; }

    /// Kernel-averaged potential Phi_s(v) = Phi_1(s v) - 2 log s, whose
    /// nonlinearity is Theta_s(v) = Theta_1(s v) / s.
    static ScalarPotential from_kernel(const KernelSpec& spec, double s = 1.0) {
        if (spec.dim != 1) throw std::invalid_argument("ScalarPotential: d = 1 kernel required");
        if (!(s > 0.0) || std::isinf(s))
            throw std::invalid_argument("ScalarPotential: s must be finite positive");
        ScalarPotential p;
        p.phi = [spec, s](double v) { return phi_s(spec, 1.0, s * v) - 2.0 * std::log(s); };
        p.theta = [spec, s](double v) { return tsnelim::theta(spec, s * v) / s; };
        return p;
    }

    /// Phi(v) = log(1 + v^2), Theta(v) = 2 v^3 / (1 + v^2).
    static ScalarPotential plain_log() {
        ScalarPotential p;
        p.phi = [](double v) { return std::log1p(v * v); };
        p.theta = [](double v) { return 2.0 * v * v * v / (1.0 + v * v); };
        return p;
    }
};

// ---------------------------------------------------------------------------
// Gridded gradient-modulus profile u(x) = T'(x) with sigma and rho samples.
// ---------------------------------------------------------------------------

struct Profile1D {
    std::vector<double> x;      // strictly increasing grid
    std::vector<double> u;      // nonnegative values
    std::vector<double> sigma;  // bandwidth samples
    std::vector<double> rho;    // density samples

    int size() const { return static_cast<int>(x.size()); }

    static Profile1D on_grid(const DensitySpec& density, const BandwidthField& bw, int n_nodes,
                             double u0 = 0.0) {
        if (n_nodes < 2) throw std::invalid_argument("Profile1D: need >= 2 nodes");
        Profile1D p;
        p.x.resize(n_nodes);
        p.u.assign(n_nodes, u0);
        p.sigma.resize(n_nodes);
        p.rho.resize(n_nodes);
        double a = density.domain.lo[0], b = density.domain.hi[0];
        for (int i = 0; i < n_nodes; ++i) {
            p.x[i] = a + (b - a) * i / (n_nodes - 1);
            p.sigma[i] = bw.sigma1(p.x[i]);
            p.rho[i] = density.pdf1(p.x[i]);
        }
        return p;
    }
};

namespace detail {

inline double trapezoid(const std::vector<double>& x, const std::vector<double>& f) {
    double s = 0.0;
    for (size_t i = 1; i < x.size(); ++i) s += 0.5 * (f[i] + f[i - 1]) * (x[i] - x[i - 1]);
    return s;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Operations.
// ---------------------------------------------------------------------------

/// Bisection solve of Theta(v) = target to |dv| <= 1e-12; the bracket is
/// grown geometrically until Theta exceeds the target.
inline double invert_theta(const ScalarPotential& pot, double target, double tol = 1e-12) {
    if (target < 0.0) throw std::invalid_argument("invert_theta: target must be nonnegative");
    if (target == 0.0) return 0.0;
    double hi = 1.0;
    int guard = 0;
    while (pot.theta(hi) < target) {
        hi *= 2.0;
        if (++guard > 1024) throw std::runtime_error("invert_theta: bracket expansion failed");
    }
    double lo = 0.0;
    for (int it = 0; it < 200 && hi - lo > tol; ++it) {
        double mid = 0.5 * (lo + hi);
        (pot.theta(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// v_b(x): the unique solution of Theta(v) = b sigma(x) rho(x) per grid node.
inline std::vector<double> v_of_b(const ScalarPotential& pot, double b, const Profile1D& p,
                                  double tol = 1e-12) {
    if (b < 0.0) throw std::invalid_argument("v_of_b: b must be nonnegative");
    std::vector<double> v(p.size());
    for (int i = 0; i < p.size(); ++i) {
        double sr = p.sigma[i] * p.rho[i];
        if (b > 0.0 && !(sr > 0.0)) throw std::invalid_argument("v_of_b: sigma*rho must be positive");
        v[i] = invert_theta(pot, b * sr, tol);
    }
    return v;
}

/// B[u] = (int u^{-1} rho^2 dx)^{-1} by trapezoid; returns 0 when the
/// reciprocal integral diverges (any u_j = 0), the infinite-energy signal.
inline double b_functional(const Profile1D& p) {
    std::vector<double> f(p.size());
    for (int i = 0; i < p.size(); ++i) {
        if (p.u[i] <= 0.0) return 0.0;
        f[i] = p.rho[i] * p.rho[i] / p.u[i];
    }
    double integral = detail::trapezoid(p.x, f);
    return integral > 0.0 ? 1.0 / integral : 0.0;
}

/// F[u] = int Phi(sigma u) rho dx + log(int u^{-1} rho^2 dx); +infinity when
/// u vanishes.
inline double functional_F(const Profile1D& p, const ScalarPotential& pot) {
    double b = b_functional(p);
    if (b <= 0.0) return std::numeric_limits<double>::infinity();
    std::vector<double> f(p.size());
    for (int i = 0; i < p.size(); ++i) f[i] = pot.phi(p.sigma[i] * p.u[i]) * p.rho[i];
    return detail::trapezoid(p.x, f) - std::log(b);
}

/// First variation of F at u in the direction w:
/// int (Phi'(sigma u) sigma rho - B[u] rho^2 / u^2) w dx.
inline double first_variation_F(const Profile1D& p, const std::vector<double>& w,
                                const ScalarPotential& pot) {
    if (static_cast<int>(w.size()) != p.size())
        throw std::invalid_argument("first_variation_F: direction size mismatch");
    double b = b_functional(p);
    std::vector<double> f(p.size());
    for (int i = 0; i < p.size(); ++i) {
        if (p.u[i] <= 0.0) throw std::invalid_argument("first_variation_F: u must be positive");
        f[i] = (pot.phi_prime(p.sigma[i] * p.u[i]) * p.sigma[i] * p.rho[i] -
                b * p.rho[i] * p.rho[i] / (p.u[i] * p.u[i])) *
               w[i];
    }
    return detail::trapezoid(p.x, f);
}

struct SolverResult {
    Profile1D u_star;
    double b_star = 0.0;
    PiecewiseLinearMap T_star;
    double residual = 0.0;
    int iterations = 0;
    double f_value = 0.0;
};

/// Monotone fixed-point iteration u_{k+1} = u_{B[u_k]} from a small constant
/// profile, converging to the unique global minimizer. The start value is
/// halved until u_0 <= u_{B[u_0]}, which keeps the iteration one-sided; every
/// step asserts pointwise monotonicity.
inline SolverResult fixed_point_solve(
    const ScalarPotential& pot, Profile1D profile, double delta0 = 1e-3, double tol = 1e-10,
    int max_iter = 10000,
    const std::function<void(int, const std::vector<double>&, double)>& observer = nullptr) {
    const int n = profile.size();
    for (int i = 0; i < n; ++i)
        if (!(profile.sigma[i] > 0.0) || !(profile.rho[i] > 0.0))
            throw std::invalid_argument("fixed_point_solve: sigma and rho must be positive");
    {
        double mass = detail::trapezoid(profile.x, profile.rho);
        if (!(mass > 0.5))
            throw std::invalid_argument(
                "fixed_point_solve: density mass must exceed 1/2 for the energy to be bounded");
    }

    // shrink delta0 until the one-sided regime holds
    double delta = delta0;
    for (int att = 0;; ++att) {
        if (att > 200) throw std::runtime_error("fixed_point_solve: could not certify start value");
        profile.u.assign(n, delta);
        double b0 = b_functional(profile);
        std::vector<double> v = v_of_b(pot, b0, profile);
        bool ok = true;
        for (int i = 0; i < n && ok; ++i) ok = delta <= v[i] / profile.sigma[i] + 1e-15;
        if (ok) break;
        delta *= 0.5;
    }

    double b = b_functional(profile);
    int it = 0;
    const double slack = 10.0 * 1e-12;  // bisection tolerance
    for (; it < max_iter; ++it) {
        std::vector<double> v = v_of_b(pot, b, profile);
        double diff = 0.0;
        for (int i = 0; i < n; ++i) {
            double next = v[i] / profile.sigma[i];
            if (next < profile.u[i] - slack)
                throw std::runtime_error(
                    "fixed_point_solve: iterate monotonicity violated (internal inconsistency)");
            diff = std::max(diff, std::abs(next - profile.u[i]));
            profile.u[i] = next;
        }
        double bnext = b_functional(profile);
        if (bnext < b - slack)
            throw std::runtime_error(
                "fixed_point_solve: B[u_k] monotonicity violated (internal inconsistency)");
        b = bnext;
        if (observer) observer(it, profile.u, b);
        if (diff < tol) break;
    }
    if (it >= max_iter) {
        double res = 0.0;
        for (int i = 0; i < n; ++i)
            res = std::max(res, std::abs(pot.theta(profile.sigma[i] * profile.u[i]) -
                                         b * profile.sigma[i] * profile.rho[i]));
        throw std::runtime_error("fixed_point_solve: no convergence in " +
                                 std::to_string(max_iter) +
                                 " iterations, residual " + std::to_string(res));
    }

    SolverResult out;
    out.b_star = b_functional(profile);
    out.iterations = it + 1;
    out.residual = 0.0;
    for (int i = 0; i < n; ++i)
        out.residual = std::max(out.residual, std::abs(pot.theta(profile.sigma[i] * profile.u[i]) -
                                                       out.b_star * profile.sigma[i] * profile.rho[i]));
    out.f_value = functional_F(profile, pot);

    // T*(x) = int_a^x u* by cumulative trapezoid, pinned to 0 at the left end
    std::vector<double> ty(n, 0.0);
    for (int i = 1; i < n; ++i)
        ty[i] = ty[i - 1] + 0.5 * (profile.u[i] + profile.u[i - 1]) * (profile.x[i] - profile.x[i - 1]);
    out.T_star = PiecewiseLinearMap::from_breakpoints(profile.x, std::move(ty));
    out.u_star = std::move(profile);
    return out;
}

}  // namespace tsnelim

#endif
