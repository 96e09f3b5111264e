#include <doctest.h>

#include <cmath>

#include "despeck/image.hpp"
#include "despeck/metrics.hpp"
#include "despeck/rng.hpp"

using namespace despeck;

namespace {

IntensityImage random_image(int w, int h, std::uint64_t seed) {
    Rng rng(seed);
    IntensityImage img(w, h);
    for (auto& v : img.data) v = 255.0 * rng.next_double();
    return img;
}

// Direct, non-separable sliding-window recomputation of the mean local
// structural similarity with the canonical constants.
double ssim_oracle(const IntensityImage& u, const IntensityImage& y) {
    const int win = 11, half = 5;
    const double sigma = 1.5;
    const double c1 = (0.01 * 255.0) * (0.01 * 255.0);
    const double c2 = (0.03 * 255.0) * (0.03 * 255.0);

    double kernel[11][11];
    double ksum = 0.0;
    for (int i = 0; i < win; ++i)
        for (int j = 0; j < win; ++j) {
            const double d2 = (i - half) * (i - half) + (j - half) * (j - half);
            kernel[i][j] = std::exp(-d2 / (2.0 * sigma * sigma));
            ksum += kernel[i][j];
        }
    for (int i = 0; i < win; ++i)
        for (int j = 0; j < win; ++j) kernel[i][j] /= ksum;

    double total = 0.0;
    int count = 0;
    for (int r = 0; r + win <= u.height; ++r) {
        for (int c = 0; c + win <= u.width; ++c) {
            double mx = 0, my = 0, mxx = 0, myy = 0, mxy = 0;
            for (int i = 0; i < win; ++i)
                for (int j = 0; j < win; ++j) {
                    const double a = u.at(r + i, c + j);
                    const double b = y.at(r + i, c + j);
                    mx += kernel[i][j] * a;
                    my += kernel[i][j] * b;
                    mxx += kernel[i][j] * a * a;
                    myy += kernel[i][j] * b * b;
                    mxy += kernel[i][j] * a * b;
                }
            const double sx = mxx - mx * mx, sy = myy - my * my, sxy = mxy - mx * my;
            total += ((2 * mx * my + c1) * (2 * sxy + c2)) /
                     ((mx * mx + my * my + c1) * (sx + sy + c2));
            ++count;
        }
    }
    return total / count;
}

} // namespace

TEST_CASE("psnr closed forms") {
    const IntensityImage u = random_image(16, 16, 1);
    IntensityImage shifted = u;
    for (auto& v : shifted.data) v += 1.0;
    CHECK(psnr(u, shifted) == doctest::Approx(10.0 * std::log10(255.0 * 255.0)).epsilon(1e-12));
    CHECK(psnr(u, u) == std::numeric_limits<double>::infinity());

    IntensityImage far = u;
    for (auto& v : far.data) v += 255.0;
    CHECK(psnr(u, far) == doctest::Approx(0.0).epsilon(1e-12));

    CHECK(psnr(u, shifted) == psnr(shifted, u));
    CHECK_THROWS_AS(psnr(u, IntensityImage(4, 4, 1.0)), DimensionMismatch);
}

TEST_CASE("ssim identity, inversion and symmetry") {
    const IntensityImage u = random_image(32, 24, 2);
    CHECK(ssim(u, u) == doctest::Approx(1.0).epsilon(1e-12));

    IntensityImage inverted = u;
    for (auto& v : inverted.data) v = 255.0 - v;
    CHECK(ssim(u, inverted) < 1.0);

    IntensityImage noisy = u;
    Rng rng(3);
    for (auto& v : noisy.data) v = std::max(0.0, v + 10.0 * (rng.next_double() - 0.5));
    CHECK(ssim(u, noisy) == doctest::Approx(ssim(noisy, u)).epsilon(1e-12));

    CHECK_THROWS_AS(ssim(u, IntensityImage(8, 8, 1.0)), DimensionMismatch);
    CHECK_THROWS_AS(ssim(IntensityImage(8, 8, 1.0), IntensityImage(8, 8, 1.0)),
                    DimensionMismatch); // smaller than the window
}

TEST_CASE("ssim matches the sliding-window oracle") {
    const IntensityImage u = random_image(26, 19, 4);
    IntensityImage y = random_image(26, 19, 5);
    // Correlate the pair so the structural term is informative.
    for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] = 0.7 * u.data[i] + 0.3 * y.data[i];
    CHECK(ssim(u, y) == doctest::Approx(ssim_oracle(u, y)).epsilon(1e-9));
}

TEST_CASE("enl closed forms") {
    IntensityImage img(4, 1);
    img.data = {1.0, 3.0, 1.0, 3.0};
    // Region of (1, 3): mean 2, population variance 1 -> ENL 4.
    CHECK(enl(img, Region{0, 0, 1, 2}) == doctest::Approx(4.0));
    CHECK(enl(IntensityImage(8, 8, 6.5), Region{0, 0, 8, 8}) ==
          std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(enl(img, Region{0, 2, 1, 4}), DimensionMismatch);
}

TEST_CASE("enl of pure speckle estimates the look count") {
    const int looks = 5;
    const IntensityImage u(120, 120, 77.0);
    const IntensityImage v = apply_gamma_noise(u, NoiseSpec{looks, 99});
    const double estimate = enl(v, Region{0, 0, 120, 120});
    CHECK(estimate == doctest::Approx(static_cast<double>(looks)).epsilon(0.10));
}

TEST_CASE("ratio image") {
    const IntensityImage u = random_image(9, 9, 6);
    IntensityImage u_pos = u;
    for (auto& v : u_pos.data) v += 1.0;

    const IntensityImage ones = ratio_image(u_pos, u_pos);
    for (double v : ones.data) CHECK(v == 1.0);

    IntensityImage halved = u_pos;
    for (auto& v : halved.data) v /= 2.0;
    const IntensityImage twos = ratio_image(u_pos, halved);
    for (double v : twos.data) CHECK(v == doctest::Approx(2.0).epsilon(1e-15));

    IntensityImage with_zero = u_pos;
    with_zero.data[0] = 0.0;
    CHECK_THROWS_AS(ratio_image(u_pos, with_zero), NonPositivePixel);
}

TEST_CASE("ratio of noisy to clean recovers the noise field exactly") {
    Rng rng(7);
    IntensityImage u(40, 30);
    for (auto& v : u.data) v = 1.0 + 200.0 * rng.next_double();
    const NoiseSpec spec{3, 1234};
    const IntensityImage v = apply_gamma_noise(u, spec);

    // Reconstruct eta directly from the same stream.
    Rng noise(spec.seed);
    const IntensityImage ratio = ratio_image(v, u);
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double eta = noise.next_gamma_looks(spec.looks);
        CHECK(ratio.data[i] == u.data[i] * eta / u.data[i]);
    }
}
