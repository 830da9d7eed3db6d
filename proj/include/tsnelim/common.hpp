#ifndef TSNELIM_COMMON_HPP
#define TSNELIM_COMMON_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tsnelim {

inline constexpr double pi = 3.14159265358979323846;

/// Dense row-major matrix for small Jacobians and point blocks.
struct Mat {
    int rows = 0, cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), a(static_cast<size_t>(r) * c, fill) {}
    static Mat scalar(double v) {
        Mat m(1, 1);
        m.a[0] = v;
        return m;
    }

    double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

    Mat scaled(double s) const {
        Mat m = *this;
        for (double& v : m.a) v *= s;
        return m;
    }

    // squared Euclidean norm of A*z for z of length cols
    double apply_sqnorm(const double* z) const {
        double s = 0.0;
        for (int i = 0; i < rows; ++i) {
            double r = 0.0;
            for (int j = 0; j < cols; ++j) r += (*this)(i, j) * z[j];
            s += r * r;
        }
        return s;
    }

    double frobenius_sq() const {
        double s = 0.0;
        for (double v : a) s += v * v;
        return s;
    }

    bool is_zero() const {
        for (double v : a)
            if (v != 0.0) return false;
        return true;
    }
};

/// Deterministic RNG: fixed integer engine plus hand-rolled variate mappings,
/// so streams do not depend on the standard library's distribution internals.
class Rng {
  public:
    explicit Rng(uint64_t seed) : state_(seed ^ 0x9e3779b97f4a7c15ULL) {
        for (int i = 0; i < 4; ++i) next_u64();
    }

    uint64_t next_u64() {
        // splitmix64
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform on [0,1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Standard normal via Box-Muller (pairs cached).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 <= 0.0) u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * pi * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * pi * u2);
    }

  private:
    uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// Axis-aligned box domain, up to three dimensions.
struct Box {
    int dim = 1;
    std::array<double, 3> lo{0.0, 0.0, 0.0};
    std::array<double, 3> hi{1.0, 1.0, 1.0};

    static Box interval(double a, double b) {
        Box d;
        d.dim = 1;
        d.lo[0] = a;
        d.hi[0] = b;
        return d;
    }
    static Box square(double a, double b) {
        Box d;
        d.dim = 2;
        d.lo = {a, a, 0.0};
        d.hi = {b, b, 0.0};
        return d;
    }
    static Box cube(int dim, double a, double b) {
        Box d;
        d.dim = dim;
        for (int i = 0; i < dim; ++i) {
            d.lo[i] = a;
            d.hi[i] = b;
        }
        return d;
    }

    double extent(int axis) const { return hi[axis] - lo[axis]; }
    double volume() const {
        double v = 1.0;
        for (int i = 0; i < dim; ++i) v *= extent(i);
        return v;
    }
    bool contains(const double* x) const {
        for (int i = 0; i < dim; ++i)
            if (x[i] < lo[i] || x[i] > hi[i]) return false;
        return true;
    }
};

/// Ordinary least squares slope of y against x.
inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("ls_slope: need >= 2 points");
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0.0, sxx = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0) throw std::invalid_argument("ls_slope: degenerate abscissae");
    return sxy / sxx;
}

inline double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median: empty");
    std::sort(v.begin(), v.end());
    size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// FNV-1a 64-bit, used to stamp output tables with a config fingerprint.
inline uint64_t fnv1a(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace tsnelim

#endif
