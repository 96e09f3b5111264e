#pragma once

#include <cstddef>
#include <vector>

namespace despeck {

// Dense row-major matrix holding one patch group: rows = patch pixels (m),
// cols = group members (n), with m <= n for every group the matcher emits.
struct PatchMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    PatchMatrix() = default;
    PatchMatrix(int m, int n, double fill = 0.0)
        : rows(m), cols(n), a(static_cast<std::size_t>(m) * n, fill) {}

    double& at(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
    double at(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }
};

double frobenius_norm(const PatchMatrix& m);
double frobenius_dot(const PatchMatrix& x, const PatchMatrix& y);

} // namespace despeck
