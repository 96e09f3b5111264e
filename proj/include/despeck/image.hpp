#pragma once

#include <cstdint>
#include <vector>

#include "despeck/errors.hpp"

namespace despeck {

// Intensity-domain image: strictly positive row-major 64-bit samples.
struct IntensityImage {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    IntensityImage() = default;
    IntensityImage(int w, int h, double fill = 0.0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

    std::size_t size() const { return data.size(); }
    double& at(int row, int col) { return data[static_cast<std::size_t>(row) * width + col]; }
    double at(int row, int col) const { return data[static_cast<std::size_t>(row) * width + col]; }
};

// Log-domain image: unrestricted real samples, same layout.
struct LogImage {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    LogImage() = default;
    LogImage(int w, int h, double fill = 0.0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

    std::size_t size() const { return data.size(); }
    double& at(int row, int col) { return data[static_cast<std::size_t>(row) * width + col]; }
    double at(int row, int col) const { return data[static_cast<std::size_t>(row) * width + col]; }
};

struct NoiseSpec {
    int looks = 1;
    std::uint64_t seed = 0;
};

// Componentwise natural log. Throws NonPositivePixel on any entry <= 0.
LogImage to_log(const IntensityImage& img);

// Componentwise exp; inverse of to_log up to roundoff.
IntensityImage from_log(const LogImage& x);

// Multiplies every pixel by an independent Gamma(L, 1/L) draw from a stream
// seeded by spec.seed. Identical (image, spec) pairs give bit-identical output.
IntensityImage apply_gamma_noise(const IntensityImage& u, const NoiseSpec& spec);

// Raises every pixel to at least floor_ratio * max(img) so that subsequent
// log transforms and divisions are safe. Throws AllZeroImage if max == 0.
IntensityImage clip_positive(const IntensityImage& img, double floor_ratio);

} // namespace despeck
