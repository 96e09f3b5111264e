#include "despeck/lowrank.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace despeck {

double SurrogateG::value(double t) const { return std::log(t + epsilon); }
double SurrogateG::deriv(double t) const { return 1.0 / (t + epsilon); }

namespace {

// Cyclic Jacobi for a symmetric m x m matrix (row-major, destroyed).
// Eigenvectors accumulate as columns of `vecs`. Rotation order is fixed,
// so results are bit-stable across runs and thread counts.
void jacobi_symmetric(std::vector<double>& a, int m, std::vector<double>& vecs,
                      std::vector<double>& eig) {
    vecs.assign(static_cast<std::size_t>(m) * m, 0.0);
    for (int i = 0; i < m; ++i) vecs[static_cast<std::size_t>(i) * m + i] = 1.0;
    eig.resize(m);

    const auto idx = [m](int i, int j) { return static_cast<std::size_t>(i) * m + j; };

    const int max_sweeps = 50;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < m - 1; ++p)
            for (int q = p + 1; q < m; ++q) off += std::abs(a[idx(p, q)]);
        if (off == 0.0) {
            for (int i = 0; i < m; ++i) eig[i] = a[idx(i, i)];
            return;
        }
        const double thresh = (sweep < 3) ? 0.2 * off / (static_cast<double>(m) * m) : 0.0;

        for (int p = 0; p < m - 1; ++p) {
            for (int q = p + 1; q < m; ++q) {
                const double apq = a[idx(p, q)];
                const double scale = 100.0 * std::abs(apq);
                if (sweep > 3 && std::abs(a[idx(p, p)]) + scale == std::abs(a[idx(p, p)]) &&
                    std::abs(a[idx(q, q)]) + scale == std::abs(a[idx(q, q)])) {
                    a[idx(p, q)] = a[idx(q, p)] = 0.0;
                    continue;
                }
                if (std::abs(apq) <= thresh) continue;

                const double theta = (a[idx(q, q)] - a[idx(p, p)]) / (2.0 * apq);
                double t;
                if (std::abs(theta) > 1e150) {
                    t = 1.0 / (2.0 * theta);
                } else {
                    t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                    if (theta < 0.0) t = -t;
                }
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                const double app = a[idx(p, p)], aqq = a[idx(q, q)];
                a[idx(p, p)] = app - t * apq;
                a[idx(q, q)] = aqq + t * apq;
                a[idx(p, q)] = a[idx(q, p)] = 0.0;
                for (int i = 0; i < m; ++i) {
                    if (i == p || i == q) continue;
                    const double aip = a[idx(i, p)], aiq = a[idx(i, q)];
                    a[idx(i, p)] = a[idx(p, i)] = c * aip - s * aiq;
                    a[idx(i, q)] = a[idx(q, i)] = s * aip + c * aiq;
                }
                for (int i = 0; i < m; ++i) {
                    const double vip = vecs[idx(i, p)], viq = vecs[idx(i, q)];
                    vecs[idx(i, p)] = c * vip - s * viq;
                    vecs[idx(i, q)] = s * vip + c * viq;
                }
            }
        }
    }
    throw NoConvergence("jacobi_symmetric: sweep budget exhausted");
}

} // namespace

SvdFactors svd(const PatchMatrix& y) {
    const int m = y.rows, n = y.cols;
    if (m > n) throw DimensionMismatch("svd: expected rows <= cols");

    // Gram matrix G = Y Y^T; m is small (<= ~100) so the m x m route wins.
    std::vector<double> gram(static_cast<std::size_t>(m) * m, 0.0);
    for (int i = 0; i < m; ++i) {
        for (int j = i; j < m; ++j) {
            double s = 0.0;
            const double* ri = &y.a[static_cast<std::size_t>(i) * n];
            const double* rj = &y.a[static_cast<std::size_t>(j) * n];
            for (int k = 0; k < n; ++k) s += ri[k] * rj[k];
            gram[static_cast<std::size_t>(i) * m + j] = s;
            gram[static_cast<std::size_t>(j) * m + i] = s;
        }
    }

    std::vector<double> vecs, eig;
    jacobi_symmetric(gram, m, vecs, eig);

    // Descending stable order.
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return eig[a] > eig[b]; });

    SvdFactors f;
    f.u = PatchMatrix(m, m);
    f.v = PatchMatrix(n, m);
    f.sigma.resize(m);
    for (int k = 0; k < m; ++k) {
        const int src = order[k];
        f.sigma[k] = std::sqrt(std::max(eig[src], 0.0));
        for (int i = 0; i < m; ++i) f.u.at(i, k) = vecs[static_cast<std::size_t>(i) * m + src];
    }

    const double snap = 1e-12 * f.sigma[0];

    // V columns: v_k = Y^T u_k, then modified Gram-Schmidt against earlier
    // columns (twice) to clean near-degenerate subspaces, then normalize.
    std::vector<double> col(n);
    for (int k = 0; k < m; ++k) {
        bool degenerate = f.sigma[k] <= snap;
        if (!degenerate) {
            for (int j = 0; j < n; ++j) {
                double s = 0.0;
                for (int i = 0; i < m; ++i) s += y.at(i, j) * f.u.at(i, k);
                col[j] = s;
            }
            for (int pass = 0; pass < 2; ++pass) {
                for (int prev = 0; prev < k; ++prev) {
                    double dot = 0.0;
                    for (int j = 0; j < n; ++j) dot += col[j] * f.v.at(j, prev);
                    for (int j = 0; j < n; ++j) col[j] -= dot * f.v.at(j, prev);
                }
            }
            double norm = 0.0;
            for (double cval : col) norm += cval * cval;
            norm = std::sqrt(norm);
            if (norm > 1e-290) {
                for (int j = 0; j < n; ++j) f.v.at(j, k) = col[j] / norm;
            } else {
                degenerate = true;
            }
        }
        if (degenerate) {
            // Deterministic orthonormal completion from the canonical basis.
            f.sigma[k] = 0.0;
            for (int cand = 0; cand < n; ++cand) {
                std::fill(col.begin(), col.end(), 0.0);
                col[cand] = 1.0;
                for (int prev = 0; prev < k; ++prev) {
                    double dot = f.v.at(cand, prev);
                    for (int j = 0; j < n; ++j) col[j] -= dot * f.v.at(j, prev);
                }
                double norm = 0.0;
                for (double cval : col) norm += cval * cval;
                norm = std::sqrt(norm);
                if (norm > 0.5) {
                    for (int j = 0; j < n; ++j) f.v.at(j, k) = col[j] / norm;
                    break;
                }
            }
        }
    }

    // Rayleigh refinement sigma_k = u_k^T Y v_k recovers small singular
    // values to full precision (the Gram route squares the condition).
    for (int k = 0; k < m; ++k) {
        if (f.sigma[k] == 0.0) continue;
        double s = 0.0;
        for (int i = 0; i < m; ++i) {
            double row = 0.0;
            for (int j = 0; j < n; ++j) row += y.at(i, j) * f.v.at(j, k);
            s += f.u.at(i, k) * row;
        }
        f.sigma[k] = std::max(s, 0.0);
    }

    // Refinement can reorder near-equal values; restore nonincreasing order.
    std::vector<int> order2(m);
    std::iota(order2.begin(), order2.end(), 0);
    std::stable_sort(order2.begin(), order2.end(),
                     [&](int a, int b) { return f.sigma[a] > f.sigma[b]; });
    bool permuted = false;
    for (int k = 0; k < m; ++k) permuted |= order2[k] != k;
    if (permuted) {
        SvdFactors g;
        g.u = PatchMatrix(m, m);
        g.v = PatchMatrix(n, m);
        g.sigma.resize(m);
        for (int k = 0; k < m; ++k) {
            const int src = order2[k];
            g.sigma[k] = f.sigma[src];
            for (int i = 0; i < m; ++i) g.u.at(i, k) = f.u.at(i, src);
            for (int j = 0; j < n; ++j) g.v.at(j, k) = f.v.at(j, src);
        }
        f = std::move(g);
    }
    return f;
}

double surrogate_value(const SurrogateG& g, std::span<const double> sigma) {
    double s = 0.0;
    for (double t : sigma) s += g.value(t);
    return s;
}

WeightVector reweight(const SurrogateG& g, std::span<const double> sigma) {
    WeightVector w;
    w.w.resize(sigma.size());
    for (std::size_t i = 0; i < sigma.size(); ++i) w.w[i] = g.deriv(sigma[i]);
    return w;
}

namespace {

void check_weights(const WeightVector& w, int m) {
    if (static_cast<int>(w.w.size()) != m)
        throw DimensionMismatch("wsvt: weight vector length must equal row count");
    for (std::size_t i = 0; i + 1 < w.w.size(); ++i)
        if (w.w[i] > w.w[i + 1])
            throw ConfigError("wsvt: weights must be ascending");
    if (!w.w.empty() && w.w.front() < 0.0)
        throw ConfigError("wsvt: weights must be nonnegative");
}

PatchMatrix reconstruct(const SvdFactors& f, std::span<const double> s) {
    const int m = f.u.rows, n = f.v.rows;
    PatchMatrix out(m, n);
    for (int k = 0; k < m; ++k) {
        if (s[k] == 0.0) continue;
        for (int i = 0; i < m; ++i) {
            const double us = f.u.at(i, k) * s[k];
            if (us == 0.0) continue;
            double* row = &out.a[static_cast<std::size_t>(i) * n];
            for (int j = 0; j < n; ++j) row[j] += us * f.v.at(j, k);
        }
    }
    return out;
}

} // namespace

PatchMatrix wsvt(const PatchMatrix& y, double lambda, const WeightVector& w) {
    check_weights(w, y.rows);
    const SvdFactors f = svd(y);
    std::vector<double> s(f.sigma.size());
    for (std::size_t i = 0; i < s.size(); ++i)
        s[i] = std::max(f.sigma[i] - lambda * w.w[i], 0.0);
    return reconstruct(f, s);
}

LowRankUpdate low_rank_update(const PatchMatrix& target, double thresh,
                              const WeightVector& w, bool center,
                              const SurrogateG& g) {
    const int m = target.rows, n = target.cols;
    LowRankUpdate upd;

    PatchMatrix work = target;
    if (center) {
        upd.col_mean.resize(m);
        for (int i = 0; i < m; ++i) {
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += work.at(i, j);
            const double mean = s / n;
            upd.col_mean[i] = mean;
            for (int j = 0; j < n; ++j) work.at(i, j) -= mean;
        }
    }

    SvdFactors f = svd(work);

    // An empty weight vector asks for tangent initialization: weights taken
    // from the target's own spectrum before thresholding.
    WeightVector weights = w.w.empty() ? reweight(g, f.sigma) : w;
    check_weights(weights, m);

    upd.sigma_in = f.sigma;
    upd.sigma_out.resize(m);
    for (int i = 0; i < m; ++i)
        upd.sigma_out[i] = std::max(f.sigma[i] - thresh * weights.w[i], 0.0);

    upd.y = reconstruct(f, upd.sigma_out);
    if (center)
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) upd.y.at(i, j) += upd.col_mean[i];

    upd.w_next = reweight(g, upd.sigma_out);
    upd.u = std::move(f.u);
    upd.v = std::move(f.v);
    return upd;
}

} // namespace despeck
