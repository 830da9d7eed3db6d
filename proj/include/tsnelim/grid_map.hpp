#ifndef TSNELIM_GRID_MAP_HPP
#define TSNELIM_GRID_MAP_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "common.hpp"

namespace tsnelim {

/// Scalar piecewise linear map on an interval, with (possibly non-uniform)
/// strictly increasing breakpoints. The Jacobian is the exact per-cell slope.
struct PiecewiseLinearMap {
    std::vector<double> x;  // breakpoints, strictly increasing
    std::vector<double> y;  // nodal values

    int cells() const { return static_cast<int>(x.size()) - 1; }
    double slope(int cell) const { return (y[cell + 1] - y[cell]) / (x[cell + 1] - x[cell]); }

    double operator()(double t) const {
        if (t <= x.front()) return y.front();
        if (t >= x.back()) return y.back();
        auto it = std::upper_bound(x.begin(), x.end(), t);
        int c = static_cast<int>(it - x.begin()) - 1;
        double lam = (t - x[c]) / (x[c + 1] - x[c]);
        return y[c] + lam * (y[c + 1] - y[c]);
    }

    bool strictly_increasing() const {
        for (size_t i = 1; i < y.size(); ++i)
            if (y[i] <= y[i - 1]) return false;
        return true;
    }

    PiecewiseLinearMap scaled(double lam) const {
        PiecewiseLinearMap m = *this;
        for (double& v : m.y) v *= lam;
        return m;
    }

    static PiecewiseLinearMap from_breakpoints(std::vector<double> xs, std::vector<double> ys) {
        if (xs.size() != ys.size() || xs.size() < 2)
            throw std::invalid_argument("PiecewiseLinearMap: need matching breakpoints/values, >= 2");
        for (size_t i = 1; i < xs.size(); ++i)
            if (!(xs[i] > xs[i - 1]))
                throw std::invalid_argument("PiecewiseLinearMap: breakpoints must increase");
        PiecewiseLinearMap m;
        m.x = std::move(xs);
        m.y = std::move(ys);
        return m;
    }

    static PiecewiseLinearMap from_function(const std::function<double(double)>& f, double a,
                                            double b, int n_cells) {
        std::vector<double> xs(n_cells + 1), ys(n_cells + 1);
        for (int i = 0; i <= n_cells; ++i) {
            xs[i] = a + (b - a) * i / n_cells;
            ys[i] = f(xs[i]);
        }
        return from_breakpoints(std::move(xs), std::move(ys));
    }

    static PiecewiseLinearMap identity(double a, double b, int n_cells) {
        return from_function([](double t) { return t; }, a, b, n_cells);
    }
};

/// Map sampled on a uniform lattice over a box, d in {1,2}, values in R^m.
/// The per-cell Jacobian uses first-order forward differences.
struct GridMap {
    int d = 1;
    int m = 1;
    int n = 2;  // nodes per axis
    Box box;
    std::vector<double> values;  // node-major, m components per node

    int nodes() const { return d == 1 ? n : n * n; }
    double spacing(int axis) const { return box.extent(axis) / (n - 1); }

    const double* at(int i, int j = 0) const {
        return &values[static_cast<size_t>(d == 1 ? i : i * n + j) * m];
    }

    /// Jacobian on the cell with lower-left node (i, j).
    Mat jacobian(int i, int j = 0) const {
        Mat J(m, d);
        for (int c = 0; c < m; ++c) {
            J(c, 0) = (at(i + 1, j)[c] - at(i, j)[c]) / spacing(0);
            if (d == 2) J(c, 1) = (at(i, j + 1)[c] - at(i, j)[c]) / spacing(1);
        }
        return J;
    }

    GridMap scaled(double lam) const {
        GridMap g = *this;
        for (double& v : g.values) v *= lam;
        return g;
    }

    static GridMap from_function(int d, int m, int n, const Box& box,
                                 const std::function<void(const double*, double*)>& f) {
        if (d < 1 || d > 2) throw std::invalid_argument("GridMap: d must be 1 or 2");
        if (n < 2) throw std::invalid_argument("GridMap: need at least 2 nodes per axis");
        GridMap g;
        g.d = d;
        g.m = m;
        g.n = n;
        g.box = box;
        g.values.resize(static_cast<size_t>(g.nodes()) * m);
        double pt[2];
        if (d == 1) {
            for (int i = 0; i < n; ++i) {
                pt[0] = box.lo[0] + box.extent(0) * i / (n - 1);
                f(pt, &g.values[static_cast<size_t>(i) * m]);
            }
        } else {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    pt[0] = box.lo[0] + box.extent(0) * i / (n - 1);
                    pt[1] = box.lo[1] + box.extent(1) * j / (n - 1);
                    f(pt, &g.values[static_cast<size_t>(i * n + j) * m]);
                }
        }
        return g;
    }

    static GridMap identity1d(double a, double b, int n) {
        return from_function(1, 1, n, Box::interval(a, b),
                             [](const double* x, double* y) { y[0] = x[0]; });
    }

    static GridMap identity2d(double a, double b, int n) {
        return from_function(2, 2, n, Box::square(a, b), [](const double* x, double* y) {
            y[0] = x[0];
            y[1] = x[1];
        });
    }
};

}  // namespace tsnelim

#endif
