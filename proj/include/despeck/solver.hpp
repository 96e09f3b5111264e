#pragma once

#include <utility>
#include <vector>

#include "despeck/fidelity.hpp"
#include "despeck/image.hpp"
#include "despeck/lowrank.hpp"
#include "despeck/patch.hpp"

namespace despeck {

// Model weights: tau scales the fidelity, mu the coupling, lambda the rank
// surrogate, (rho, gamma) the fidelity shape, epsilon the surrogate offset.
struct ModelParams {
    double tau = 1.0;
    double lambda = 1.0;
    double mu = 1.0;
    double rho = 1.5;
    double gamma = 1.9;
    double epsilon = 1e-10;
};

// Proximal coefficients. alpha and beta are constant sequences; both must be
// positive so the descent margin c1 = min(alpha, beta)/2 stays positive.
struct AlgoParams {
    double alpha = 1e-3;  // Y-step proximal weight (fixed-extraction mode only)
    double beta = 1.001;  // x-step proximal weight
    int max_iters = 24;
    double rel_tol = 1e-3; // 0 disables the relative-error stop
};

struct SolverOptions {
    bool center = false;      // remove/restore the mean patch inside the low-rank step
    bool diagnostics = false; // objective + certificate tracking (adds work per iteration)
    bool rematch = true;      // practical mode: re-run block matching every iteration
    int threads = 1;
    ProxConfig prox{};
};

// Z = (x, Y_1..Y_J) with the per-group thresholds carried between sweeps.
struct SolverState {
    LogImage x;
    std::vector<PatchMatrix> y;
    std::vector<WeightVector> w;
    int k = 0;
};

// Row k describes the objective at iterate k and the k -> k+1 transition;
// a trailing row carries the final objective with zero transition fields.
struct IterationDiagnostics {
    int k = 0;
    double phi = 0.0;     // objective at iterate k
    double delta_z = 0.0; // ||Z^{k+1} - Z^k|| (W-norm on x, Frobenius on Y)
    double a_norm = 0.0;  // subgradient certificate norm ||A^{k+1}||
    bool descent_ok = true;
    bool relerr_ok = true;
};

struct SolveResult {
    LogImage x;
    std::vector<IterationDiagnostics> diagnostics;
    int iterations = 0;
};

// Full objective: tau*f(x) + sum_j [ mu/2 ||Y_j - R_j(x)||_F^2
//                                    + lambda * sum_i g(sigma_i(Y_j)) ].
double objective(const SolverState& state, const std::vector<PatchGroupIndex>& groups,
                 const IntensityImage& v, const WeightMatrix& w, const ModelParams& model);

// Fixed-extraction solver: alternates the blended weighted-threshold update
// per group with the W-weighted fidelity prox, keeping the matching and W
// frozen. Stops after max_iters or when the W-relative step drops below
// max(rel_tol, 0.5 * first-step relative error).
SolveResult parm_fixed(const IntensityImage& v, const IntensityImage& init,
                       const std::vector<PatchGroupIndex>& groups, const ModelParams& model,
                       const AlgoParams& algo, const SolverOptions& opts);

// Practical solver: starts from the clipped noisy image, re-runs block
// matching on the current intensity estimate each sweep, thresholds fresh
// extractions (no Y blending), and runs exactly max_iters sweeps.
SolveResult parm_practical(const IntensityImage& v, const ModelParams& model,
                           const AlgoParams& algo, const BlockMatchConfig& match_cfg,
                           const SolverOptions& opts);

// Subgradient certificate for one fixed-extraction transition: returns
// (||A^{k+1}||, c2) where c2 = max(beta + sum_j sqrt(mu),
// max_j(lambda * m_j / epsilon^2 + alpha)) is the relative-error constant.
std::pair<double, double> certificate(const SolverState& prev, const SolverState& next,
                                      const std::vector<PatchGroupIndex>& groups,
                                      const WeightMatrix& w, const ModelParams& model,
                                      const AlgoParams& algo);

void write_diagnostics_csv(std::ostream& out, const std::vector<IterationDiagnostics>& rows);

} // namespace despeck
