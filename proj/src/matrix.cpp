#include "despeck/matrix.hpp"

#include <cmath>

#include "despeck/errors.hpp"

namespace despeck {

double frobenius_norm(const PatchMatrix& m) {
    double s = 0.0;
    for (double v : m.a) s += v * v;
    return std::sqrt(s);
}

double frobenius_dot(const PatchMatrix& x, const PatchMatrix& y) {
    if (x.rows != y.rows || x.cols != y.cols)
        throw DimensionMismatch("frobenius_dot: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < x.a.size(); ++i) s += x.a[i] * y.a[i];
    return s;
}

} // namespace despeck
