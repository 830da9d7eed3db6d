#ifndef TSNELIM_GRAPH_HPP
#define TSNELIM_GRAPH_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "common.hpp"
#include "density.hpp"
#include "kernels.hpp"

namespace tsnelim {

/// Sparse affinity graph over the data points: conditional weights
/// p_{j|i} = eta_{h_i}(|x_i-x_j|) / sum_{k != i} eta_{h_i}(|x_i-x_k|),
/// symmetrized p_ij = (p_{i|j} + p_{j|i}) / (2n), degrees
/// d_i = sum_j eta_{h_i}(|x_i-x_j|), and tuned bandwidths h_i = sigma(x_i) h.
/// CSR storage with ascending column indices; the diagonal is excluded.
struct AffinityGraph {
    int n = 0;
    double h = 0.0;
    std::vector<int> rowptr;   // size n+1
    std::vector<int> col;      // ascending within each row
    std::vector<double> cond;  // p_{j|i} on the row pattern of i
    std::vector<double> sym;   // p_ij on the same (symmetric) pattern
    std::vector<double> deg;      // d_i
    std::vector<double> rowsum;   // conditional normalizer sum_{j != i} eta_{h_i}
    std::vector<double> hi;       // per-point bandwidths
    bool self_in_degree = true;

    /// Conditional-row kernel mass (the denominator of p_{j|i}).
    double row_cond_denominator(int i) const { return rowsum[i]; }

    double sym_sum() const {
        double s = 0.0;
        for (double v : sym) s += v;
        return s;
    }

    double row_cond_sum(int i) const {
        double s = 0.0;
        for (int k = rowptr[i]; k < rowptr[i + 1]; ++k) s += cond[k];
        return s;
    }

    /// p_ij lookup by binary search; zero off the pattern.
    double sym_at(int i, int j) const {
        auto lo = col.begin() + rowptr[i], hi_ = col.begin() + rowptr[i + 1];
        auto it = std::lower_bound(lo, hi_, j);
        if (it == hi_ || *it != j) return 0.0;
        return sym[it - col.begin()];
    }
};

/// Build the affinity graph. The self term is excluded from the conditional
/// normalization; the degree keeps it by default (configurable), matching the
/// printed degree formula.
inline AffinityGraph build_affinities(const PointCloud& cloud, const KernelSpec& kernel,
                                      const BandwidthField& bandwidths, double h,
                                      bool include_self_in_degree = true) {
    if (cloud.n < 2) throw std::invalid_argument("build_affinities: need n >= 2");
    if (!(h > 0.0)) throw std::invalid_argument("build_affinities: h must be positive");
    if (kernel.dim != cloud.dim)
        throw std::invalid_argument("build_affinities: kernel dimension mismatch");
    const int n = cloud.n;
    const int d = cloud.dim;
    const double drop = 1e-16;  // on the unit-scale kernel value

    AffinityGraph g;
    g.n = n;
    g.h = h;
    g.self_in_degree = include_self_in_degree;
    g.hi.resize(n);
    g.deg.assign(n, 0.0);
    g.rowsum.assign(n, 0.0);
    g.rowptr.assign(n + 1, 0);
    for (int i = 0; i < n; ++i) g.hi[i] = bandwidths.sigma(cloud.point(i)) * h;

    // conditional rows (pattern of i: in-support neighbors under h_i)
    std::vector<std::vector<std::pair<int, double>>> rows(n);
    for (int i = 0; i < n; ++i) {
        const double hi_ = g.hi[i];
        const double scale = std::pow(hi_, -d);
        double rowsum = 0.0;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            double r2 = 0.0;
            for (int a = 0; a < d; ++a) {
                double dd = cloud.point(i)[a] - cloud.point(j)[a];
                r2 += dd * dd;
            }
            double e = kernel.eta(std::sqrt(r2) / hi_);
            if (e <= (kernel.compact_support() ? 0.0 : drop)) continue;
            rows[i].push_back({j, e * scale});
            rowsum += e * scale;
        }
        if (rowsum <= 0.0)
            throw std::runtime_error("build_affinities: isolated vertex at index " +
                                     std::to_string(i));
        for (auto& e : rows[i]) e.second /= rowsum;
        g.rowsum[i] = rowsum;
        g.deg[i] = rowsum;
        if (include_self_in_degree) g.deg[i] += kernel.eta(0.0) * scale;
    }

    // symmetrized pattern = union of both directions
    std::vector<std::vector<std::pair<int, double>>> srows(n);
    for (int i = 0; i < n; ++i)
        for (auto& [j, v] : rows[i]) {
            srows[i].push_back({j, v / (2.0 * n)});
            srows[j].push_back({i, v / (2.0 * n)});
        }
    for (int i = 0; i < n; ++i) {
        auto& r = srows[i];
        std::sort(r.begin(), r.end());
        // merge duplicates (both directions present)
        std::vector<std::pair<int, double>> merged;
        for (auto& e : r) {
            if (!merged.empty() && merged.back().first == e.first)
                merged.back().second += e.second;
            else
                merged.push_back(e);
        }
        r = std::move(merged);
    }

    for (int i = 0; i < n; ++i) g.rowptr[i + 1] = g.rowptr[i] + static_cast<int>(srows[i].size());
    g.col.resize(g.rowptr[n]);
    g.sym.resize(g.rowptr[n]);
    g.cond.assign(g.rowptr[n], 0.0);
    for (int i = 0; i < n; ++i) {
        int k = g.rowptr[i];
        for (auto& [j, v] : srows[i]) {
            g.col[k] = j;
            g.sym[k] = v;
            ++k;
        }
        for (auto& [j, v] : rows[i]) {
            auto lo = g.col.begin() + g.rowptr[i], hi_ = g.col.begin() + g.rowptr[i + 1];
            auto it = std::lower_bound(lo, hi_, j);
            g.cond[it - g.col.begin()] = v;
        }
    }
    return g;
}

/// Embedding affinities q_ij = psi(|y_i-y_j|) / sum_{k != l} psi(|y_k-y_l|).
/// The normalizer Z is kept for gradient evaluation; q is computed on demand.
struct EmbeddingAffinity {
    int n = 0, m = 1;
    RepulsionKernelSpec psi;
    std::vector<double> y;  // n x m copy of the embedding
    double z = 0.0;         // sum over ordered pairs

    double pair_sq_dist(int i, int j) const {
        double s = 0.0;
        for (int a = 0; a < m; ++a) {
            double d = y[static_cast<size_t>(i) * m + a] - y[static_cast<size_t>(j) * m + a];
            s += d * d;
        }
        return s;
    }

    double weight(int i, int j) const { return psi.psi_sq(pair_sq_dist(i, j)); }
    double q(int i, int j) const { return i == j ? 0.0 : weight(i, j) / z; }

    double total() const {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (j != i) s += q(i, j);
        return s;
    }
};

inline EmbeddingAffinity build_q(const std::vector<double>& y, int n, int m,
                                 const RepulsionKernelSpec& psi = RepulsionKernelSpec::student_t()) {
    if (n < 2) throw std::invalid_argument("build_q: need n >= 2");
    EmbeddingAffinity q;
    q.n = n;
    q.m = m;
    q.psi = psi;
    q.y = y;
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) s += q.weight(i, j);
    q.z = 2.0 * s;
    return q;
}

}  // namespace tsnelim

#endif
