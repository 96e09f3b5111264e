#pragma once

#include "despeck/image.hpp"

namespace despeck {

struct Region {
    int top = 0;
    int left = 0;
    int height = 0;
    int width = 0;
};

// 10*log10(255^2 * N / ||u - u_hat||^2); +infinity for identical images.
double psnr(const IntensityImage& u, const IntensityImage& u_hat);

// Mean local structural similarity over an 11x11 Gaussian window
// (sigma = 1.5), C1 = (0.01*255)^2, C2 = (0.03*255)^2, windows fully inside
// the image (no padding, no downsampling).
double ssim(const IntensityImage& u, const IntensityImage& u_hat);

// Equivalent number of looks of a homogeneous region: mean^2 / population
// variance; +infinity for constant regions.
double enl(const IntensityImage& img, const Region& r);

// Pointwise quotient u / u_hat: the speckle a perfect restoration removes.
IntensityImage ratio_image(const IntensityImage& u, const IntensityImage& u_hat);

} // namespace despeck
