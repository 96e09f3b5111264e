#include "despeck/solver.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "despeck/parallel.hpp"

namespace despeck {

namespace {

struct KahanSum {
    double sum = 0.0, comp = 0.0;
    void add(double term) {
        const double t = term - comp;
        const double next = sum + t;
        comp = (next - sum) - t;
        sum = next;
    }
};

double weighted_diff_norm_sq(const WeightMatrix& w, const LogImage& a, const LogImage& b) {
    KahanSum s;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        s.add(w.diagonal[i] * d * d);
    }
    return s.sum;
}

double weighted_norm_sq(const WeightMatrix& w, const LogImage& a) {
    KahanSum s;
    for (std::size_t i = 0; i < a.data.size(); ++i) s.add(w.diagonal[i] * a.data[i] * a.data[i]);
    return s.sum;
}

double diff_frob_sq(const PatchMatrix& a, const PatchMatrix& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.a.size(); ++i) {
        const double d = a.a[i] - b.a[i];
        s += d * d;
    }
    return s;
}

double c2_constant(std::size_t j_count, int patch_pixels, const ModelParams& model,
                   const AlgoParams& algo) {
    const double lipschitz = 1.0 / (model.epsilon * model.epsilon);
    const double mu_sum = static_cast<double>(j_count) * std::sqrt(model.mu);
    return std::max(algo.beta + mu_sum, model.lambda * patch_pixels * lipschitz + algo.alpha);
}

// x_tilde = x + (W^{-1} sum_j mu R_j^T(Y_j) - x) / (beta + 1); the scatter-add
// runs serially in group-major, column-major order so results are bit-stable
// for any thread count.
LogImage aggregate_target(const LogImage& x, const std::vector<PatchMatrix>& y,
                          const std::vector<PatchGroupIndex>& groups, const WeightMatrix& w,
                          double mu, double beta) {
    LogImage acc(x.width, x.height, 0.0);
    for (std::size_t j = 0; j < groups.size(); ++j) extract_adjoint(y[j], groups[j], acc, mu);
    LogImage xt(x.width, x.height);
    for (std::size_t i = 0; i < xt.data.size(); ++i) {
        const double s = acc.data[i] / w.diagonal[i];
        xt.data[i] = x.data[i] + (s - x.data[i]) / (beta + 1.0);
    }
    return xt;
}

// ||A^{k+1}||^2 contribution of one group. `factors` must be an SVD of
// y_next; pass the update's factors only for uncentered updates.
double certificate_group_sq(const PatchGroupIndex& group, const LogImage& x_prev,
                            const LogImage& x_next, const PatchMatrix& y_prev,
                            const PatchMatrix& y_next, const SvdFactors& factors,
                            const WeightVector& w_prev, const WeightVector& w_next,
                            const ModelParams& model, const AlgoParams& algo) {
    const int m = y_next.rows, n = y_next.cols;
    const PatchMatrix r_prev = extract(x_prev, group);
    const PatchMatrix r_next = extract(x_next, group);

    // d_i = (u_i^T [ -alpha (Y+ - Y) - mu (Y+ - R(x)) ] v_i) / lambda
    PatchMatrix mres(m, n);
    for (std::size_t i = 0; i < mres.a.size(); ++i)
        mres.a[i] = -algo.alpha * (y_next.a[i] - y_prev.a[i]) -
                    model.mu * (y_next.a[i] - r_prev.a[i]);

    std::vector<double> delta(m); // (d~ - d)_i
    std::vector<double> mv(n);
    for (int k = 0; k < m; ++k) {
        double d = 0.0;
        for (int i = 0; i < m; ++i) {
            double row = 0.0;
            const double* mr = &mres.a[static_cast<std::size_t>(i) * n];
            for (int j = 0; j < n; ++j) row += mr[j] * factors.v.at(j, k);
            d += factors.u.at(i, k) * row;
        }
        d /= model.lambda;
        if (w_prev.w[k] == 0.0)
            throw ZeroWeight("certificate: zero threshold weight");
        delta[k] = d / w_prev.w[k] * w_next.w[k] - d;
    }

    double sq = 0.0;
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            double spectral = 0.0;
            for (int k = 0; k < m; ++k)
                spectral += factors.u.at(i, k) * delta[k] * factors.v.at(j, k);
            const double aij = model.mu * (r_prev.at(i, j) - r_next.at(i, j)) +
                               model.lambda * spectral -
                               algo.alpha * (y_next.at(i, j) - y_prev.at(i, j));
            sq += aij * aij;
        }
    }
    return sq;
}

} // namespace

double objective(const SolverState& state, const std::vector<PatchGroupIndex>& groups,
                 const IntensityImage& v, const WeightMatrix& w, const ModelParams& model) {
    if (state.y.size() != groups.size())
        throw DimensionMismatch("objective: one patch matrix per group required");
    const SurrogateG g{model.epsilon};
    const FidelityParams fp{model.rho, model.gamma, model.tau};
    KahanSum phi;
    phi.add(model.tau * fidelity_value(state.x, v, w, fp));
    for (std::size_t j = 0; j < groups.size(); ++j) {
        const PatchMatrix rx = extract(state.x, groups[j]);
        phi.add(0.5 * model.mu * diff_frob_sq(state.y[j], rx));
        phi.add(model.lambda * surrogate_value(g, svd(state.y[j]).sigma));
    }
    return phi.sum;
}

std::pair<double, double> certificate(const SolverState& prev, const SolverState& next,
                                      const std::vector<PatchGroupIndex>& groups,
                                      const WeightMatrix& w, const ModelParams& model,
                                      const AlgoParams& algo) {
    if (prev.y.size() != groups.size() || next.y.size() != groups.size())
        throw DimensionMismatch("certificate: states do not match groups");
    KahanSum total;
    total.add(algo.beta * algo.beta * weighted_diff_norm_sq(w, next.x, prev.x));
    for (std::size_t j = 0; j < groups.size(); ++j) {
        const SvdFactors factors = svd(next.y[j]);
        total.add(certificate_group_sq(groups[j], prev.x, next.x, prev.y[j], next.y[j],
                                       factors, prev.w[j], next.w[j], model, algo));
    }
    const int patch_pixels = groups.empty() ? 0 : groups.front().patch_pixels();
    return {std::sqrt(total.sum), c2_constant(groups.size(), patch_pixels, model, algo)};
}

SolveResult parm_fixed(const IntensityImage& v, const IntensityImage& init,
                       const std::vector<PatchGroupIndex>& groups, const ModelParams& model,
                       const AlgoParams& algo, const SolverOptions& opts) {
    if (init.width != v.width || init.height != v.height)
        throw DimensionMismatch("parm_fixed: init does not match noisy image");
    if (!(algo.alpha > 0.0) || !(algo.beta > 0.0))
        throw ConfigError("parm_fixed: alpha and beta must be positive");

    const SurrogateG g{model.epsilon};
    const FidelityParams fp{model.rho, model.gamma, model.tau};
    const std::size_t j_count = groups.size();
    const double c1 = 0.5 * std::min(algo.alpha, algo.beta);
    const double c2 = c2_constant(j_count, groups.empty() ? 0 : groups.front().patch_pixels(),
                                  model, algo);

    LogImage x = to_log(init);
    const WeightMatrix w = build_weight_matrix(groups, model.mu, v.width, v.height);

    std::vector<PatchMatrix> y(j_count);
    std::vector<WeightVector> wv(j_count);
    std::vector<double> g_term(j_count, 0.0);
    parallel_for(j_count, opts.threads, [&](std::size_t j) {
        y[j] = extract(x, groups[j]);
        // Tangent initialization: thresholds from the spectrum of Y^0 itself.
        LowRankUpdate init_upd = low_rank_update(y[j], 0.0, WeightVector{}, opts.center, g);
        wv[j] = std::move(init_upd.w_next);
        if (opts.diagnostics)
            g_term[j] = opts.center ? surrogate_value(g, svd(y[j]).sigma)
                                    : surrogate_value(g, init_upd.sigma_in);
    });

    std::vector<IterationDiagnostics> diag;
    double phi_prev = 0.0;
    if (opts.diagnostics) {
        KahanSum phi;
        phi.add(model.tau * fidelity_value(x, v, w, fp));
        for (std::size_t j = 0; j < j_count; ++j) phi.add(model.lambda * g_term[j]);
        phi_prev = phi.sum; // coupling term is exactly zero at Y^0 = R(x^0)
    }

    std::vector<LowRankUpdate> upds(j_count);
    const double denom = model.mu + algo.alpha;
    double rel1 = -1.0;
    int iters = 0;

    for (int k = 0; k < algo.max_iters; ++k) {
        parallel_for(j_count, opts.threads, [&](std::size_t j) {
            PatchMatrix target = extract(x, groups[j]);
            for (std::size_t i = 0; i < target.a.size(); ++i)
                target.a[i] = (model.mu * target.a[i] + algo.alpha * y[j].a[i]) / denom;
            upds[j] = low_rank_update(target, model.lambda / denom, wv[j], opts.center, g);
        });

        std::vector<PatchMatrix> y_next(j_count);
        for (std::size_t j = 0; j < j_count; ++j) y_next[j] = std::move(upds[j].y);

        const LogImage xt = aggregate_target(x, y_next, groups, w, model.mu, algo.beta);
        LogImage x_next = prox_fidelity(xt, v, w, fp, algo.beta, opts.prox, opts.threads);

        const double dx_sq = weighted_diff_norm_sq(w, x_next, x);
        const double x_sq = weighted_norm_sq(w, x);
        const double rel = x_sq > 0.0 ? std::sqrt(dx_sq / x_sq)
                                      : (dx_sq > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);

        if (opts.diagnostics) {
            KahanSum dy_sq;
            for (std::size_t j = 0; j < j_count; ++j) dy_sq.add(diff_frob_sq(y_next[j], y[j]));
            const double delta_sq = dx_sq + dy_sq.sum;
            const double delta = std::sqrt(delta_sq);

            KahanSum phi;
            phi.add(model.tau * fidelity_value(x_next, v, w, fp));
            for (std::size_t j = 0; j < j_count; ++j) {
                const PatchMatrix rx = extract(x_next, groups[j]);
                phi.add(0.5 * model.mu * diff_frob_sq(y_next[j], rx));
                phi.add(model.lambda *
                        (opts.center ? surrogate_value(g, svd(y_next[j]).sigma)
                                     : surrogate_value(g, upds[j].sigma_out)));
            }
            const double phi_next = phi.sum;

            KahanSum a_sq;
            a_sq.add(algo.beta * algo.beta * dx_sq);
            for (std::size_t j = 0; j < j_count; ++j) {
                const SvdFactors factors = opts.center
                                               ? svd(y_next[j])
                                               : SvdFactors{upds[j].u,
                                                            upds[j].sigma_out,
                                                            upds[j].v};
                a_sq.add(certificate_group_sq(groups[j], x, x_next, y[j], y_next[j], factors,
                                              wv[j], upds[j].w_next, model, algo));
            }
            const double a_norm = std::sqrt(a_sq.sum);

            IterationDiagnostics row;
            row.k = k;
            row.phi = phi_prev;
            row.delta_z = delta;
            row.a_norm = a_norm;
            row.descent_ok = phi_next < phi_prev && phi_prev - phi_next >= c1 * delta_sq;
            row.relerr_ok = a_norm <= c2 * delta;
            diag.push_back(row);
            phi_prev = phi_next;
        }

        x = std::move(x_next);
        for (std::size_t j = 0; j < j_count; ++j) {
            y[j] = std::move(y_next[j]);
            wv[j] = std::move(upds[j].w_next);
        }
        iters = k + 1;

        if (algo.rel_tol > 0.0) {
            if (k == 0) rel1 = rel;
            if (rel < std::max(algo.rel_tol, 0.5 * rel1)) break;
        }
    }

    if (opts.diagnostics) {
        IterationDiagnostics tail;
        tail.k = iters;
        tail.phi = phi_prev;
        diag.push_back(tail);
    }
    return {std::move(x), std::move(diag), iters};
}

SolveResult parm_practical(const IntensityImage& v, const ModelParams& model,
                           const AlgoParams& algo, const BlockMatchConfig& match_cfg,
                           const SolverOptions& opts) {
    if (!(algo.beta > 0.0)) throw ConfigError("parm_practical: beta must be positive");

    const SurrogateG g{model.epsilon};
    const FidelityParams fp{model.rho, model.gamma, model.tau};
    LogImage x = to_log(clip_positive(v, 1e-6));

    std::vector<PatchGroupIndex> groups;
    WeightMatrix w;
    std::vector<WeightVector> wv;
    std::vector<LowRankUpdate> upds;
    std::vector<IterationDiagnostics> diag;
    double phi_prev = std::numeric_limits<double>::quiet_NaN();

    for (int k = 0; k < algo.max_iters; ++k) {
        if (k == 0 || opts.rematch) {
            const IntensityImage estimate = from_log(x);
            groups = block_match(estimate, match_cfg, opts.threads);
            if (k == 0) {
                w = build_weight_matrix(groups, model.mu, v.width, v.height);
                wv.assign(groups.size(), WeightVector{});
                upds.resize(groups.size());
            } else if (opts.rematch) {
                w = build_weight_matrix(groups, model.mu, v.width, v.height);
            }
        }
        const std::size_t j_count = groups.size();

        parallel_for(j_count, opts.threads, [&](std::size_t j) {
            const PatchMatrix target = extract(x, groups[j]);
            // Empty weights at the first sweep request tangent initialization.
            upds[j] = low_rank_update(target, model.lambda / model.mu, wv[j], opts.center, g);
        });

        std::vector<PatchMatrix> y_next(j_count);
        for (std::size_t j = 0; j < j_count; ++j) y_next[j] = std::move(upds[j].y);

        const LogImage xt = aggregate_target(x, y_next, groups, w, model.mu, algo.beta);
        LogImage x_next = prox_fidelity(xt, v, w, fp, algo.beta, opts.prox, opts.threads);

        if (opts.diagnostics) {
            const double dx_sq = weighted_diff_norm_sq(w, x_next, x);
            KahanSum phi;
            phi.add(model.tau * fidelity_value(x_next, v, w, fp));
            for (std::size_t j = 0; j < j_count; ++j) {
                const PatchMatrix rx = extract(x_next, groups[j]);
                phi.add(0.5 * model.mu * diff_frob_sq(y_next[j], rx));
                phi.add(model.lambda *
                        (opts.center ? surrogate_value(g, svd(y_next[j]).sigma)
                                     : surrogate_value(g, upds[j].sigma_out)));
            }
            IterationDiagnostics row;
            row.k = k + 1;
            row.phi = phi.sum;
            row.delta_z = std::sqrt(dx_sq);
            row.a_norm = std::numeric_limits<double>::quiet_NaN();
            row.descent_ok = std::isnan(phi_prev) || phi.sum < phi_prev;
            row.relerr_ok = true;
            diag.push_back(row);
            phi_prev = phi.sum;
        }

        x = std::move(x_next);
        for (std::size_t j = 0; j < j_count; ++j) wv[j] = std::move(upds[j].w_next);
    }

    return {std::move(x), std::move(diag), algo.max_iters};
}

void write_diagnostics_csv(std::ostream& out, const std::vector<IterationDiagnostics>& rows) {
    out << "k,phi,delta_z,a_norm,descent_ok,relerr_ok\n";
    out << std::setprecision(17);
    for (const auto& r : rows)
        out << r.k << ',' << r.phi << ',' << r.delta_z << ',' << r.a_norm << ','
            << (r.descent_ok ? 1 : 0) << ',' << (r.relerr_ok ? 1 : 0) << '\n';
}

} // namespace despeck
