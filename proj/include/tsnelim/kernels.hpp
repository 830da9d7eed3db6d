#ifndef TSNELIM_KERNELS_HPP
#define TSNELIM_KERNELS_HPP

#include <boost/math/special_functions/digamma.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include "common.hpp"
#include "quadrature.hpp"

namespace tsnelim {

// ---------------------------------------------------------------------------
// Attraction kernel eta: radial, nonnegative, nonincreasing, unit mass on R^d.
// ---------------------------------------------------------------------------

enum class KernelFamily { epanechnikov, gaussian, truncated_gaussian };

inline const char* to_string(KernelFamily f) {
    switch (f) {
        case KernelFamily::epanechnikov: return "epanechnikov";
        case KernelFamily::gaussian: return "gaussian";
        case KernelFamily::truncated_gaussian: return "truncated-gaussian";
    }
    return "?";
}

inline KernelFamily kernel_family_from_string(const std::string& s) {
    if (s == "epanechnikov") return KernelFamily::epanechnikov;
    if (s == "gaussian") return KernelFamily::gaussian;
    if (s == "truncated-gaussian") return KernelFamily::truncated_gaussian;
    throw std::invalid_argument("unknown kernel family: " + s);
}

struct KernelSpec {
    KernelFamily family = KernelFamily::epanechnikov;
    int dim = 1;
    double normalization = 1.0;  // prefactor making \int_{R^d} eta(|z|) dz = 1
    double support_radius = 1.0; // infinity for the (untruncated) Gaussian

    /// Radial profile eta(t), normalization included.
    double eta(double t) const {
        switch (family) {
            case KernelFamily::epanechnikov:
                return t < 1.0 ? normalization * (1.0 - t * t) : 0.0;
            case KernelFamily::gaussian:
                return normalization * std::exp(-0.5 * t * t);
            case KernelFamily::truncated_gaussian:
                return t <= support_radius ? normalization * std::exp(-0.5 * t * t) : 0.0;
        }
        return 0.0;
    }

    bool compact_support() const { return family != KernelFamily::gaussian; }

    /// Radius beyond which eta is zero or numerically negligible (< 1e-18 mass).
    double effective_radius() const {
        return compact_support() ? support_radius : 9.0;
    }

    static KernelSpec epanechnikov(int d) {
        if (d < 1) throw std::invalid_argument("kernel dimension must be positive");
        KernelSpec k;
        k.family = KernelFamily::epanechnikov;
        k.dim = d;
        k.support_radius = 1.0;
        // \int (1-|z|^2)_+ dz = S_{d-1} * 2 / (d (d+2))
        k.normalization = 1.0 / (sphere_area(d) * 2.0 / (d * (d + 2.0)));
        return k;
    }

    static KernelSpec gaussian(int d) {
        if (d < 1) throw std::invalid_argument("kernel dimension must be positive");
        KernelSpec k;
        k.family = KernelFamily::gaussian;
        k.dim = d;
        k.support_radius = std::numeric_limits<double>::infinity();
        k.normalization = std::pow(2.0 * pi, -0.5 * d);
        return k;
    }

    /// Gaussian truncated at |z| = 3 and renormalized to unit mass.
    static KernelSpec truncated_gaussian(int d) {
        if (d < 1) throw std::invalid_argument("kernel dimension must be positive");
        KernelSpec k;
        k.family = KernelFamily::truncated_gaussian;
        k.dim = d;
        k.support_radius = 3.0;
        double g = std::pow(2.0 * pi, -0.5 * d);
        double mass = sphere_area(d) *
                      integrate([&](double r) { return g * std::exp(-0.5 * r * r) * std::pow(r, d - 1); },
                                0.0, 3.0);
        k.normalization = g / mass;
        return k;
    }

    static KernelSpec make(KernelFamily f, int d) {
        switch (f) {
            case KernelFamily::epanechnikov: return epanechnikov(d);
            case KernelFamily::gaussian: return gaussian(d);
            case KernelFamily::truncated_gaussian: return truncated_gaussian(d);
        }
        throw std::invalid_argument("bad kernel family");
    }
};

namespace detail {

/// Radial moment \int_{R^d} eta(|z|) |z|^k dz without the public k <= 4 cap.
inline double radial_moment(const KernelSpec& spec, int k) {
    const int d = spec.dim;
    switch (spec.family) {
        case KernelFamily::epanechnikov:
            return spec.normalization * sphere_area(d) * 2.0 / ((k + d) * (k + d + 2.0));
        case KernelFamily::gaussian:
            return spec.normalization * sphere_area(d) * std::pow(2.0, 0.5 * (k + d) - 1.0) *
                   std::tgamma(0.5 * (k + d));
        case KernelFamily::truncated_gaussian:
            return sphere_area(d) *
                   integrate([&](double r) { return spec.eta(r) * std::pow(r, k + d - 1); }, 0.0,
                             spec.support_radius);
    }
    return 0.0;
}

}  // namespace detail

/// m_k(eta) = \int eta(|z|) |z|^k dz for k = 0..4.
inline double kernel_moment(const KernelSpec& spec, int k) {
    if (k < 0 || k > 4) throw std::invalid_argument("kernel_moment: k must be in 0..4");
    return detail::radial_moment(spec, k);
}

/// Second directional moment c_eta = \int eta(|z|) z_1^2 dz = m_2 / d.
inline double directional_second_moment(const KernelSpec& spec) {
    return detail::radial_moment(spec, 2) / spec.dim;
}

/// Tail mass gamma(r) = 1 - \int_{B_r} eta(|z|) dz, in [0,1] and nonincreasing.
inline double tail_mass(const KernelSpec& spec, double r) {
    if (r < 0.0) throw std::invalid_argument("tail_mass: r must be nonnegative");
    if (r == 0.0) return 1.0;
    if (spec.compact_support() && r >= spec.support_radius) return 0.0;
    const int d = spec.dim;
    double inside = sphere_area(d) * integrate([&](double t) { return spec.eta(t) * std::pow(t, d - 1); },
                                               0.0, std::min(r, spec.effective_radius()));
    return std::clamp(1.0 - inside, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Phi_s(A) = \int eta(|z|) log(s^{-2} + |Az|^2) dz for an m x d matrix A,
// with the spherical-average decomposition at s = infinity.
// ---------------------------------------------------------------------------

struct PotentialEval {
    double s = 1.0;  // infinity encoded as std::numeric_limits<double>::infinity()
    double value = 0.0;
};

namespace detail {

/// Average of log(t + r^2 |Aw|^2) over unit directions w, as a function of r.
/// d=1 is the exact two-point average; d=2 a trapezoid in angle; d>=3 the
/// fixed Monte Carlo direction set.
template <class G>
double direction_average(const KernelSpec& spec, const Mat& A, G&& g) {
    const int d = spec.dim;
    if (A.cols != d) throw std::invalid_argument("phi_s: A must have d columns");
    if (d == 1) {
        return g(A.frobenius_sq());
    }
    if (d == 2) {
        const int K = quad_config().angular_nodes;
        double s = 0.0;
        for (int i = 0; i < K; ++i) {
            double th = 2.0 * pi * (i + 0.5) / K;
            double w[2] = {std::cos(th), std::sin(th)};
            s += g(A.apply_sqnorm(w));
        }
        return s / K;
    }
    const std::vector<double>& dirs = sphere_directions(d);
    const int n = static_cast<int>(dirs.size()) / d;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += g(A.apply_sqnorm(&dirs[static_cast<size_t>(i) * d]));
    return s / n;
}

/// C1 = \int_{R^d} eta(|z|) log(|z|^2) dz. The d = 1 case splits off the
/// logarithmic endpoint so the quadrature stays regular.
inline double log_radial_moment(const KernelSpec& spec) {
    const int d = spec.dim;
    if (spec.family == KernelFamily::gaussian) {
        // E[log |Z|^2] for |Z|^2 ~ chi^2_d
        return boost::math::digamma(0.5 * d) + std::log(2.0);
    }
    const double R = spec.support_radius;
    const double S = sphere_area(d);
    if (d >= 2) {
        return S * integrate([&](double r) { return spec.eta(r) * std::pow(r, d - 1) * 2.0 * std::log(r); },
                             1e-12, R);
    }
    const double eta0 = spec.eta(0.0);
    double regular =
        S * integrate([&](double r) { return (spec.eta(r) - eta0) * 2.0 * std::log(r); }, 1e-300, R);
    double singular = S * eta0 * 2.0 * (R * std::log(R) - R);
    return regular + singular;
}

}  // namespace detail

/// Phi_s(A). Finite s uses radial quadrature against eta (Gauss-Hermite for
/// the Gaussian family in d=1); s = infinity uses the decomposition
/// Phi_inf(A) = avg_{|w|=1} log(|Aw|^2) + C1.
inline double phi_s(const KernelSpec& spec, double s, const Mat& A) {
    if (!(s > 0.0)) throw std::invalid_argument("phi_s: s must be positive");
    if (A.rows < 1 || A.cols != spec.dim) throw std::invalid_argument("phi_s: A must be m x d");
    const bool infinite = std::isinf(s);
    if (infinite) {
        if (A.is_zero())
            throw std::domain_error("phi_s: spherical log average diverges for A = 0 at s = infinity");
        double avg = detail::direction_average(spec, A, [](double q) { return std::log(q); });
        return avg + detail::log_radial_moment(spec);
    }
    // log(t + x) = log t + log1p(x / t): keeps full relative precision when
    // x << t, which otherwise stalls the adaptive refinement on noise
    const double t = 1.0 / (s * s);
    const double logt = std::log(t);
    const int d = spec.dim;
    if (d == 1) {
        const double c = A.frobenius_sq();
        if (spec.family == KernelFamily::gaussian) {
            return logt + integrate_std_normal([&](double z) { return std::log1p(c * z * z / t); });
        }
        return logt + 2.0 * integrate(
                          [&](double z) { return spec.eta(z) * std::log1p(c * z * z / t); }, 0.0,
                          spec.support_radius, quad_config().gk_tol, 15);
    }
    const double R = spec.effective_radius();
    const double S = sphere_area(d);
    return logt + S * integrate(
                      [&](double r) {
                          double avg = detail::direction_average(
                              spec, A, [&](double q) { return std::log1p(r * r * q / t); });
                          return spec.eta(r) * std::pow(r, d - 1) * avg;
                      },
                      0.0, R, 1e-10, 15);
}

inline double phi_s(const KernelSpec& spec, double s, double a) {
    return phi_s(spec, s, Mat::scalar(a));
}

inline PotentialEval phi_s_eval(const KernelSpec& spec, double s, const Mat& A) {
    return PotentialEval{s, phi_s(spec, s, A)};
}

/// Both sides of the shift identity Phi_1(sA) = Phi_s(A) + 2 log s.
inline std::pair<double, double> phi_scaling_check(const KernelSpec& spec, double s, const Mat& A) {
    if (!(s > 0.0) || std::isinf(s)) throw std::invalid_argument("phi_scaling_check: s must be finite positive");
    double lhs = phi_s(spec, 1.0, A.scaled(s));
    double rhs = phi_s(spec, s, A) + 2.0 * std::log(s);
    return {lhs, rhs};
}

// ---------------------------------------------------------------------------
// Theta(v) = v^2 Phi_1'(v), the scalar nonlinearity of the d = 1 problem.
// ---------------------------------------------------------------------------

namespace detail {

inline void require_dim1(const KernelSpec& spec, const char* who) {
    if (spec.dim != 1) throw std::invalid_argument(std::string(who) + ": requires a d = 1 kernel");
}

/// Quadrature of \int eta(z) 2 v^3 z^2 / (1 + v^2 z^2) dz.
inline double theta_quadrature(const KernelSpec& spec, double v) {
    if (spec.family == KernelFamily::gaussian) {
        return integrate_std_normal(
            [&](double z) { return 2.0 * v * v * v * z * z / (1.0 + v * v * z * z); });
    }
    return 2.0 * integrate(
                     [&](double z) {
                         double z2 = z * z;
                         return spec.eta(z) * 2.0 * v * v * v * z2 / (1.0 + v * v * z2);
                     },
                     0.0, spec.support_radius);
}

/// Small-v series 2 (M2 v^3 - M4 v^5 + M6 v^7 - M8 v^9 + M10 v^11) from the
/// geometric expansion of the integrand; |remainder| <= 2 M12 v^13.
inline double theta_series(const KernelSpec& spec, double v) {
    double s = 0.0;
    double sign = 1.0;
    double vp = v * v * v;
    for (int j = 0; j < 5; ++j) {
        s += sign * 2.0 * radial_moment(spec, 2 * j + 2) * vp;
        sign = -sign;
        vp *= v * v;
    }
    return s;
}

// The closed form 3(v + 1/v)(1 - arctan(v)/v) - v loses ~1e-15/v of absolute
// accuracy to cancellation, which swamps Theta ~ 0.4 v^3 for v below ~1e-2.
// The 5-term series has relative truncation error ~0.04 v^10, so handing over
// at 5e-2 keeps both paths at ~1e-14 where they meet.
inline constexpr double theta_series_cutoff = 5e-2;

}  // namespace detail

/// Theta(v). Closed form for the Epanechnikov family,
/// Theta(v) = 3 (v + 1/v)(1 - arctan(v)/v) - v, with a series below v = 1e-4
/// where the closed form cancels catastrophically; quadrature otherwise.
inline double theta(const KernelSpec& spec, double v) {
    detail::require_dim1(spec, "theta");
    if (v < 0.0) throw std::invalid_argument("theta: v must be nonnegative");
    if (v == 0.0) return 0.0;
    if (v < detail::theta_series_cutoff) return detail::theta_series(spec, v);
    if (spec.family == KernelFamily::epanechnikov) {
        return 3.0 * (v + 1.0 / v) * (1.0 - std::atan(v) / v) - v;
    }
    return detail::theta_quadrature(spec, v);
}

/// Quadrature evaluation of Theta, kept separate so the closed form can be
/// cross-validated.
inline double theta_by_quadrature(const KernelSpec& spec, double v) {
    detail::require_dim1(spec, "theta_by_quadrature");
    if (v < 0.0) throw std::invalid_argument("theta: v must be nonnegative");
    if (v == 0.0) return 0.0;
    if (v < detail::theta_series_cutoff) return detail::theta_series(spec, v);
    return detail::theta_quadrature(spec, v);
}

/// Theta'(v) = \int eta(z) (2 v^4 z^4 + 6 v^2 z^2) / (1 + v^2 z^2)^2 dz.
inline double theta_prime(const KernelSpec& spec, double v) {
    detail::require_dim1(spec, "theta_prime");
    if (!(v > 0.0)) throw std::invalid_argument("theta_prime: v must be positive");
    if (v < detail::theta_series_cutoff) {
        // derivative of the small-v series
        double s = 0.0, sign = 1.0, vp = v * v;
        for (int j = 0; j < 5; ++j) {
            s += sign * 2.0 * (2 * j + 3) * detail::radial_moment(spec, 2 * j + 2) * vp;
            sign = -sign;
            vp *= v * v;
        }
        return s;
    }
    auto integrand = [&](double z) {
        double z2 = z * z, v2 = v * v;
        double den = 1.0 + v2 * z2;
        return (2.0 * v2 * v2 * z2 * z2 + 6.0 * v2 * z2) / (den * den);
    };
    if (spec.family == KernelFamily::gaussian) {
        return integrate_std_normal(integrand);
    }
    return 2.0 * integrate([&](double z) { return spec.eta(z) * integrand(z); }, 0.0,
                           spec.support_radius);
}

/// Phi_1'(v) = Theta(v) / v^2, with the series limit at small v.
inline double phi1_prime(const KernelSpec& spec, double v) {
    detail::require_dim1(spec, "phi1_prime");
    if (v < 0.0) throw std::invalid_argument("phi1_prime: v must be nonnegative");
    if (v == 0.0) return 0.0;
    return theta(spec, v) / (v * v);
}

// ---------------------------------------------------------------------------
// Repulsion kernel psi.
// ---------------------------------------------------------------------------

enum class RepulsionFamily { student_t, gaussian };

struct RepulsionKernelSpec {
    RepulsionFamily family = RepulsionFamily::student_t;

    double psi(double t) const {
        return family == RepulsionFamily::student_t ? 1.0 / (1.0 + t * t) : std::exp(-t * t);
    }
    double psi_sq(double t_sq) const {
        return family == RepulsionFamily::student_t ? 1.0 / (1.0 + t_sq) : std::exp(-t_sq);
    }

    static RepulsionKernelSpec student_t() { return RepulsionKernelSpec{RepulsionFamily::student_t}; }
    static RepulsionKernelSpec gaussian() { return RepulsionKernelSpec{RepulsionFamily::gaussian}; }
};

}  // namespace tsnelim

#endif
