#ifndef TSNELIM_DISCRETE_HPP
#define TSNELIM_DISCRETE_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "graph.hpp"

namespace tsnelim {

// ---------------------------------------------------------------------------
// KL divergence and the rescaled energy.
// ---------------------------------------------------------------------------

/// KL(P||Q) = sum p_ij log(p_ij / q_ij), with 0 log 0 = 0. Returns +infinity
/// if some q_ij vanishes where p_ij > 0.
inline double kl_divergence(const AffinityGraph& P, const EmbeddingAffinity& Q) {
    if (P.n != Q.n) throw std::invalid_argument("kl_divergence: size mismatch");
    double s = 0.0;
    for (int i = 0; i < P.n; ++i)
        for (int k = P.rowptr[i]; k < P.rowptr[i + 1]; ++k) {
            double p = P.sym[k];
            if (p <= 0.0) continue;
            double q = Q.q(i, P.col[k]);
            if (q <= 0.0) return std::numeric_limits<double>::infinity();
            s += p * std::log(p / q);
        }
    return s;
}

/// Decomposition of KL(P||Q) together with the rescaled energy terms.
/// kl = constant + attraction + repulsion holds exactly (the KL rewrite);
/// a_n + r_n is the rescaled energy of the map values Y at scale h, and
/// kl_offset = (a_n + r_n) - (kl - constant) is the bookkeeping constant
/// linking the two (equal to -log(n(n-1)) when degrees exclude the self term).
struct EnergyReport {
    double kl = 0.0;
    double attraction = 0.0;  // (1/n) sum p_{j|i} log(1/psi)
    double repulsion = 0.0;   // log sum psi
    double constant = 0.0;    // sum p_ij log p_ij
    double a_n = 0.0;
    double r_n = 0.0;
    double h = 0.0;
    double kl_offset = 0.0;
};

/// Rescaled attraction/repulsion of map values Y (= T(x_i), n x m) at
/// bandwidth h, plus the KL-rewrite of the h^{-1}-scaled embedding.
inline EnergyReport rescaled_energy(const AffinityGraph& P, const std::vector<double>& Y, int m,
                                    double h) {
    const int n = P.n;
    if (static_cast<int>(Y.size()) != n * m) throw std::invalid_argument("rescaled_energy: bad Y");
    EnergyReport rep;
    rep.h = h;
    auto sqdist = [&](int i, int j) {
        double s = 0.0;
        for (int a = 0; a < m; ++a) {
            double d = Y[static_cast<size_t>(i) * m + a] - Y[static_cast<size_t>(j) * m + a];
            s += d * d;
        }
        return s;
    };

    for (int i = 0; i < P.n; ++i)
        for (int k = P.rowptr[i]; k < P.rowptr[i + 1]; ++k) {
            double p = P.sym[k];
            if (p > 0.0) rep.constant += p * std::log(p);
        }

    double zsum = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) zsum += 2.0 / (1.0 + sqdist(i, j) / (h * h));
    rep.repulsion = std::log(zsum);
    rep.r_n = std::log(zsum / (static_cast<double>(n) * (n - 1)));

    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int k = P.rowptr[i]; k < P.rowptr[i + 1]; ++k) {
            if (P.cond[k] <= 0.0) continue;
            row += P.cond[k] * std::log1p(sqdist(i, P.col[k]) / (h * h));
        }
        rep.attraction += row / n;
        // a_n weights are eta / d_i = p_{j|i} * rowsum_i / d_i
        rep.a_n += row * (P.row_cond_denominator(i) / P.deg[i]) / n;
    }
    rep.kl = rep.constant + rep.attraction + rep.repulsion;
    rep.kl_offset = (rep.a_n + rep.r_n) - (rep.kl - rep.constant);
    return rep;
}

// ---------------------------------------------------------------------------
// Gradients of the KL energy in the embedding variables.
// ---------------------------------------------------------------------------

/// t-SNE gradient 4 Z sum_j q_ij (p_ij - q_ij)(y_i - y_j) for the Student-t Q.
inline std::vector<double> tsne_gradient(const AffinityGraph& P, const std::vector<double>& y,
                                         int m) {
    const int n = P.n;
    std::vector<double> grad(static_cast<size_t>(n) * m, 0.0);
    // normalizer
    double z = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double s = 0.0;
            for (int a = 0; a < m; ++a) {
                double d = y[static_cast<size_t>(i) * m + a] - y[static_cast<size_t>(j) * m + a];
                s += d * d;
            }
            z += 2.0 / (1.0 + s);
        }
    // attraction on the sparse pattern: 4 sum_j p_ij w_ij (y_i - y_j)
    for (int i = 0; i < n; ++i)
        for (int k = P.rowptr[i]; k < P.rowptr[i + 1]; ++k) {
            int j = P.col[k];
            double s = 0.0;
            for (int a = 0; a < m; ++a) {
                double d = y[static_cast<size_t>(i) * m + a] - y[static_cast<size_t>(j) * m + a];
                s += d * d;
            }
            double w = 1.0 / (1.0 + s);
            double f = 4.0 * P.sym[k] * w;
            for (int a = 0; a < m; ++a)
                grad[static_cast<size_t>(i) * m + a] +=
                    f * (y[static_cast<size_t>(i) * m + a] - y[static_cast<size_t>(j) * m + a]);
        }
    // repulsion over all pairs: -(4/Z) w^2 (y_i - y_j), antisymmetric
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double s = 0.0;
            for (int a = 0; a < m; ++a) {
                double d = y[static_cast<size_t>(i) * m + a] - y[static_cast<size_t>(j) * m + a];
                s += d * d;
            }
            double w = 1.0 / (1.0 + s);
            double f = 4.0 * w * w / z;
            for (int a = 0; a < m; ++a) {
                double d = y[static_cast<size_t>(i) * m + a] - y[static_cast<size_t>(j) * m + a];
                grad[static_cast<size_t>(i) * m + a] -= f * d;
                grad[static_cast<size_t>(j) * m + a] += f * d;
            }
        }
    return grad;
}

/// SNE gradient 4 sum_j (p_ij - q_ij)(y_i - y_j) for the Gaussian Q.
inline std::vector<double> sne_gradient(const AffinityGraph& P, const std::vector<double>& y,
                                        int m) {
    const int n = P.n;
    std::vector<double> grad(static_cast<size_t>(n) * m, 0.0);
    double z = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double s = 0.0;
            for (int a = 0; a < m; ++a) {
                double d = y[static_cast<size_t>(i) * m + a] - y[static_cast<size_t>(j) * m + a];
                s += d * d;
            }
            z += 2.0 * std::exp(-s);
        }
    for (int i = 0; i < n; ++i)
        for (int k = P.rowptr[i]; k < P.rowptr[i + 1]; ++k) {
            int j = P.col[k];
            double f = 4.0 * P.sym[k];
            for (int a = 0; a < m; ++a)
                grad[static_cast<size_t>(i) * m + a] +=
                    f * (y[static_cast<size_t>(i) * m + a] - y[static_cast<size_t>(j) * m + a]);
        }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double s = 0.0;
            for (int a = 0; a < m; ++a) {
                double d = y[static_cast<size_t>(i) * m + a] - y[static_cast<size_t>(j) * m + a];
                s += d * d;
            }
            double f = 4.0 * std::exp(-s) / z;
            for (int a = 0; a < m; ++a) {
                double d = y[static_cast<size_t>(i) * m + a] - y[static_cast<size_t>(j) * m + a];
                grad[static_cast<size_t>(i) * m + a] -= f * d;
                grad[static_cast<size_t>(j) * m + a] += f * d;
            }
        }
    return grad;
}

// ---------------------------------------------------------------------------
// Gradient descent.
// ---------------------------------------------------------------------------

enum class DescentMode { tsne, sne };

struct TraceRow {
    long step;
    double kl;
    double a_n;
    double r_n;
};

struct EmbeddingState {
    std::vector<double> y;  // n x m embedding coordinates
    int n = 0, m = 1;
    long step = 0;
    std::vector<TraceRow> trace;
    uint64_t seed = 0;
    double dt = 0.0;
    bool diverged = false;
    double constant = 0.0;  // sum p log p of the graph used
};

/// Plain gradient descent y <- y - dt * grad, no momentum or exaggeration.
/// Divergence (|y| > 1e12 or non-finite) aborts with the last finite state.
inline EmbeddingState descend(const AffinityGraph& P, const std::vector<double>& y0, int m,
                              long steps, double dt, DescentMode mode, long trace_every = 100,
                              double h_for_trace = 1.0) {
    if (!(dt > 0.0)) throw std::invalid_argument("descend: dt must be positive");
    const int n = P.n;
    EmbeddingState st;
    st.y = y0;
    st.n = n;
    st.m = m;
    st.dt = dt;

    for (int i = 0; i < n; ++i)
        for (int k = P.rowptr[i]; k < P.rowptr[i + 1]; ++k)
            if (P.sym[k] > 0.0) st.constant += P.sym[k] * std::log(P.sym[k]);

    auto record = [&](long stepno) {
        // KL-rewrite pieces and the rescaled terms at T = h * y
        auto Q = build_q(st.y, n, m,
                         mode == DescentMode::tsne ? RepulsionKernelSpec::student_t()
                                                   : RepulsionKernelSpec::gaussian());
        double attraction = 0.0, a_n = 0.0;
        for (int i = 0; i < n; ++i) {
            double rowsum_over_deg = P.row_cond_denominator(i) / P.deg[i];
            for (int k = P.rowptr[i]; k < P.rowptr[i + 1]; ++k) {
                if (P.cond[k] <= 0.0) continue;
                double lg = -std::log(Q.weight(i, P.col[k]));
                attraction += P.cond[k] * lg / n;
                a_n += P.cond[k] * lg * rowsum_over_deg / n;
            }
        }
        double repulsion = std::log(Q.z);
        double kl = st.constant + attraction + repulsion;
        double r_n = std::log(Q.z / (static_cast<double>(n) * (n - 1)));
        st.trace.push_back({stepno, kl, a_n, r_n});
        (void)h_for_trace;
    };

    record(0);
    std::vector<double> prev = st.y;
    for (long s = 1; s <= steps; ++s) {
        prev = st.y;
        std::vector<double> g =
            mode == DescentMode::tsne ? tsne_gradient(P, st.y, m) : sne_gradient(P, st.y, m);
        bool bad = false;
        for (size_t i = 0; i < st.y.size(); ++i) {
            st.y[i] -= dt * g[i];
            if (!std::isfinite(st.y[i]) || std::abs(st.y[i]) > 1e12) bad = true;
        }
        if (bad) {
            st.y = prev;
            st.diverged = true;
            st.step = s - 1;
            record(st.step);
            return st;
        }
        st.step = s;
        if (s % trace_every == 0 || s == steps) record(s);
    }
    return st;
}

/// Initializations used by the experiments: random blob, identity map, or a
/// supplied continuum profile divided by h.
inline std::vector<double> init_random(int n, int m, uint64_t seed, double scale = 1e-2) {
    Rng rng(seed);
    std::vector<double> y(static_cast<size_t>(n) * m);
    for (double& v : y) v = scale * rng.normal();
    return y;
}

inline std::vector<double> init_identity(const PointCloud& cloud, double h) {
    std::vector<double> y(cloud.n);
    for (int i = 0; i < cloud.n; ++i) y[i] = cloud.x1(i) / h;
    return y;
}

inline std::vector<double> init_from_map(const PointCloud& cloud, const PiecewiseLinearMap& T,
                                         double h) {
    std::vector<double> y(cloud.n);
    for (int i = 0; i < cloud.n; ++i) y[i] = T(cloud.x1(i)) / h;
    return y;
}

/// Post-processing of experiment runs: shift so the minimum is zero (m = 1;
/// mean-centering for m >= 2) and scale by h.
inline std::vector<double> postprocess(const std::vector<double>& y, int n, int m, double h) {
    std::vector<double> out(y.size());
    if (m == 1) {
        double mn = *std::min_element(y.begin(), y.end());
        for (size_t i = 0; i < y.size(); ++i) out[i] = h * (y[i] - mn);
        return out;
    }
    std::vector<double> mean(m, 0.0);
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < m; ++a) mean[a] += y[static_cast<size_t>(i) * m + a] / n;
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < m; ++a)
            out[static_cast<size_t>(i) * m + a] = h * (y[static_cast<size_t>(i) * m + a] - mean[a]);
    return out;
}

/// Interpolate (sorted x_i, postprocessed values) into the discrete map T_n.
inline PiecewiseLinearMap discrete_map_1d(const PointCloud& cloud, const std::vector<double>& t) {
    std::vector<int> order(cloud.n);
    for (int i = 0; i < cloud.n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return cloud.x1(a) < cloud.x1(b); });
    std::vector<double> xs, ys;
    xs.reserve(cloud.n);
    ys.reserve(cloud.n);
    for (int i : order) {
        if (!xs.empty() && cloud.x1(i) <= xs.back()) continue;  // drop exact ties
        xs.push_back(cloud.x1(i));
        ys.push_back(t[i]);
    }
    return PiecewiseLinearMap::from_breakpoints(std::move(xs), std::move(ys));
}

}  // namespace tsnelim

#endif
