#pragma once

#include "despeck/image.hpp"
#include "despeck/patch.hpp"

namespace despeck {

struct FidelityParams {
    double rho = 0.0;
    double gamma = 1.0;
    double tau = 1.0;

    // f is strictly convex iff rho * gamma^4 <= 4096/27; violation only
    // costs uniqueness of the prox, so it is a warning, not an error.
    bool strictly_convex() const {
        return rho * gamma * gamma * gamma * gamma <= 4096.0 / 27.0;
    }
};

struct ProxConfig {
    double newton_tol = 1e-10;
    int max_newton_iters = 50;
    bool bisection_fallback = true;
};

// f(x) = <x + v/e^x, 1>_W + rho * ||sqrt(e^x/v) - gamma*1||_W^2, summed with
// compensation so descent margins survive at scale.
double fidelity_value(const LogImage& x, const IntensityImage& v, const WeightMatrix& w,
                      const FidelityParams& p);

// W-weighted gradient, componentwise 1 - v*e^-x + rho*(e^x/v - gamma*sqrt(e^x/v));
// independent of W itself.
LogImage fidelity_grad(const LogImage& x, const IntensityImage& v, const FidelityParams& p);

// W-weighted proximity operator of (tau/(beta_k+1)) f at x_tilde: solves the
// per-pixel scalar equation
//   1 - v*e^-x + rho*(e^x/v - gamma*sqrt(e^x/v)) + ((beta_k+1)/tau)(x - x_tilde) = 0
// by Newton's method safeguarded with bisection on [x_tilde - 20, x_tilde + 20].
// W is diagonal and cancels, so the pixels are independent.
LogImage prox_fidelity(const LogImage& x_tilde, const IntensityImage& v, const WeightMatrix& w,
                       const FidelityParams& p, double beta_k, const ProxConfig& cfg,
                       int threads = 1);

} // namespace despeck
