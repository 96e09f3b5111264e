#include "despeck/fidelity.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "despeck/parallel.hpp"

namespace despeck {

namespace {

void check_dims(int aw, int ah, int bw, int bh, const char* who) {
    if (aw != bw || ah != bh) throw DimensionMismatch(std::string(who) + ": image dims differ");
}

double pixel_term(double x, double v, const FidelityParams& p) {
    const double ex = std::exp(x);
    const double root = std::sqrt(ex / v) - p.gamma;
    return x + v / ex + p.rho * root * root;
}

} // namespace

double fidelity_value(const LogImage& x, const IntensityImage& v, const WeightMatrix& w,
                      const FidelityParams& p) {
    check_dims(x.width, x.height, v.width, v.height, "fidelity_value");
    check_dims(x.width, x.height, w.width, w.height, "fidelity_value");
    double sum = 0.0, comp = 0.0; // Kahan
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        if (!(v.data[i] > 0.0)) throw NonPositivePixel("fidelity_value: v must be positive");
        const double term = w.diagonal[i] * pixel_term(x.data[i], v.data[i], p) - comp;
        const double next = sum + term;
        comp = (next - sum) - term;
        sum = next;
    }
    return sum;
}

LogImage fidelity_grad(const LogImage& x, const IntensityImage& v, const FidelityParams& p) {
    check_dims(x.width, x.height, v.width, v.height, "fidelity_grad");
    LogImage g(x.width, x.height);
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        const double ex = std::exp(x.data[i]);
        const double ratio = ex / v.data[i];
        g.data[i] = 1.0 - v.data[i] / ex + p.rho * (ratio - p.gamma * std::sqrt(ratio));
    }
    return g;
}

namespace {

// Scalar first-order condition and its derivative at one pixel.
struct PixelProblem {
    double v, rho, gamma, stiffness, xt;

    double residual(double x) const {
        const double ex = std::exp(x);
        const double ratio = ex / v;
        return 1.0 - v / ex + rho * (ratio - gamma * std::sqrt(ratio)) + stiffness * (x - xt);
    }
    double derivative(double x) const {
        const double ex = std::exp(x);
        const double ratio = ex / v;
        return v / ex + rho * (ratio - 0.5 * gamma * std::sqrt(ratio)) + stiffness;
    }
};

double solve_pixel(const PixelProblem& pb, const ProxConfig& cfg) {
    // Bracket the root; the residual is increasing under the convexity
    // condition, and the proximal stiffness keeps the root near xt.
    double lo = pb.xt - 20.0, hi = pb.xt + 20.0;
    double flo = pb.residual(lo), fhi = pb.residual(hi);
    int expand = 0;
    while (flo > 0.0 && expand < 6) {
        lo -= 40.0;
        flo = pb.residual(lo);
        ++expand;
    }
    while (fhi < 0.0 && expand < 12) {
        hi += 40.0;
        fhi = pb.residual(hi);
        ++expand;
    }
    if (flo > 0.0 || fhi < 0.0)
        throw ProxDivergence("prox_fidelity: could not bracket the scalar root");

    double x = std::clamp(pb.xt, lo, hi);
    double fx = pb.residual(x);
    double prev_abs = std::abs(fx);
    for (int it = 0; it < cfg.max_newton_iters && std::abs(fx) > cfg.newton_tol; ++it) {
        const double dfx = pb.derivative(x);
        double next = x - fx / dfx;
        if (!(dfx > 0.0) || next <= lo || next >= hi || !std::isfinite(next))
            next = 0.5 * (lo + hi);
        const double fnext = pb.residual(next);
        if (fnext < 0.0) {
            lo = next;
        } else {
            hi = next;
        }
        // Stop when the bracket or the step collapses to machine precision;
        // for very large stiffness the residual floor sits above newton_tol.
        if (next == x || hi - lo <= 4e-16 * std::max(1.0, std::abs(next))) {
            x = next;
            fx = fnext;
            break;
        }
        x = next;
        fx = fnext;
        if (std::abs(fx) >= prev_abs && cfg.bisection_fallback) {
            const double mid = 0.5 * (lo + hi);
            const double fmid = pb.residual(mid);
            if (fmid < 0.0) lo = mid; else hi = mid;
            if (std::abs(fmid) < std::abs(fx)) {
                x = mid;
                fx = fmid;
            }
        }
        prev_abs = std::abs(fx);
    }
    if (std::abs(fx) > cfg.newton_tol) {
        // Finish with plain bisection; terminates once the bracket is tight.
        for (int it = 0; it < 200 && std::abs(fx) > cfg.newton_tol; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid == lo || mid == hi) break;
            const double fmid = pb.residual(mid);
            if (fmid < 0.0) lo = mid; else hi = mid;
            x = mid;
            fx = fmid;
        }
    }
    return x;
}

} // namespace

LogImage prox_fidelity(const LogImage& x_tilde, const IntensityImage& v, const WeightMatrix& w,
                       const FidelityParams& p, double beta_k, const ProxConfig& cfg,
                       int threads) {
    check_dims(x_tilde.width, x_tilde.height, v.width, v.height, "prox_fidelity");
    check_dims(x_tilde.width, x_tilde.height, w.width, w.height, "prox_fidelity");
    if (!(p.tau > 0.0)) throw ConfigError("prox_fidelity: tau must be positive");

    const double stiffness = (beta_k + 1.0) / p.tau;
    LogImage out(x_tilde.width, x_tilde.height);
    parallel_for(x_tilde.data.size(), threads, [&](std::size_t i) {
        if (!(v.data[i] > 0.0)) throw NonPositivePixel("prox_fidelity: v must be positive");
        PixelProblem pb{v.data[i], p.rho, p.gamma, stiffness, x_tilde.data[i]};
        out.data[i] = solve_pixel(pb, cfg);
    });
    return out;
}

} // namespace despeck
