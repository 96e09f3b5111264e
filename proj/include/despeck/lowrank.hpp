#pragma once

#include <span>
#include <vector>

#include "despeck/errors.hpp"
#include "despeck/matrix.hpp"

namespace despeck {

// Thin SVD of an m x n matrix with m <= n: Y = U diag(sigma) V^T with
// U m x m, V n x m, both with orthonormal columns, sigma nonincreasing.
struct SvdFactors {
    PatchMatrix u;
    std::vector<double> sigma;
    PatchMatrix v;
};

// Per-index thresholds for the weighted nuclear norm; must be ascending for
// the proximity operator to be single-valued.
struct WeightVector {
    std::vector<double> w;
};

// Logarithmic rank surrogate g(t) = log(t + epsilon); concave, increasing,
// with g' Lipschitz on [0, inf) with constant 1/epsilon^2.
struct SurrogateG {
    double epsilon = 1e-10;

    double value(double t) const;
    double deriv(double t) const;
    double lipschitz() const { return 1.0 / (epsilon * epsilon); }
};

// Dense SVD for small patch matrices: symmetric Jacobi eigensolver on Y*Y^T
// followed by back-substitution for V and re-orthogonalization. Singular
// values below 1e-12 * sigma_1 are snapped to zero.
SvdFactors svd(const PatchMatrix& y);

// sum_i g(sigma_i).
double surrogate_value(const SurrogateG& g, std::span<const double> sigma);

// w_i = g'(sigma_i) = 1/(sigma_i + epsilon); ascending for nonincreasing sigma.
WeightVector reweight(const SurrogateG& g, std::span<const double> sigma);

// Weighted singular value thresholding: U diag((sigma_i - lambda*w_i)_+) V^T,
// the proximity operator of lambda*||.||_{*,w} at Y for ascending weights.
PatchMatrix wsvt(const PatchMatrix& y, double lambda, const WeightVector& w);

// One low-rank patch-matrix update. Applies wsvt with threshold scale
// `thresh` to `target` (optionally after removing the column-mean patch,
// which is restored afterwards) and reweights from the post-threshold
// spectrum. The factors and spectra are kept for diagnostics.
struct LowRankUpdate {
    PatchMatrix y;               // updated patch matrix
    WeightVector w_next;         // reweighted from sigma_out
    std::vector<double> sigma_in;  // spectrum of the (centered) target
    std::vector<double> sigma_out; // post-threshold spectrum
    PatchMatrix u;               // left factor of the (centered) target
    PatchMatrix v;               // right factor of the (centered) target
    std::vector<double> col_mean;  // removed mean patch (empty when centering off)
};

LowRankUpdate low_rank_update(const PatchMatrix& target, double thresh,
                              const WeightVector& w, bool center,
                              const SurrogateG& g);

} // namespace despeck
