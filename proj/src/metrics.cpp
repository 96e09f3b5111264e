#include "despeck/metrics.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace despeck {

namespace {

void check_same_dims(const IntensityImage& a, const IntensityImage& b, const char* who) {
    if (a.width != b.width || a.height != b.height)
        throw DimensionMismatch(std::string(who) + ": image dims differ");
}

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;

std::array<double, kSsimWindow> gaussian_kernel() {
    std::array<double, kSsimWindow> k{};
    const int half = kSsimWindow / 2;
    double sum = 0.0;
    for (int i = 0; i < kSsimWindow; ++i) {
        const double d = i - half;
        k[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
        sum += k[i];
    }
    for (double& v : k) v /= sum;
    return k;
}

// Valid-mode separable Gaussian filter; output is (h-10) x (w-10).
std::vector<double> gauss_valid(const std::vector<double>& img, int w, int h, int& ow, int& oh) {
    const auto k = gaussian_kernel();
    const int half = kSsimWindow / 2;
    ow = w - 2 * half;
    oh = h - 2 * half;
    std::vector<double> rows(static_cast<std::size_t>(ow) * h);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < ow; ++c) {
            double s = 0.0;
            for (int i = 0; i < kSsimWindow; ++i) s += k[i] * img[static_cast<std::size_t>(r) * w + c + i];
            rows[static_cast<std::size_t>(r) * ow + c] = s;
        }
    std::vector<double> out(static_cast<std::size_t>(ow) * oh);
    for (int r = 0; r < oh; ++r)
        for (int c = 0; c < ow; ++c) {
            double s = 0.0;
            for (int i = 0; i < kSsimWindow; ++i) s += k[i] * rows[static_cast<std::size_t>(r + i) * ow + c];
            out[static_cast<std::size_t>(r) * ow + c] = s;
        }
    return out;
}

} // namespace

double psnr(const IntensityImage& u, const IntensityImage& u_hat) {
    check_same_dims(u, u_hat, "psnr");
    double err = 0.0;
    for (std::size_t i = 0; i < u.data.size(); ++i) {
        const double d = u.data[i] - u_hat.data[i];
        err += d * d;
    }
    if (err == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 * static_cast<double>(u.size()) / err);
}

double ssim(const IntensityImage& u, const IntensityImage& u_hat) {
    check_same_dims(u, u_hat, "ssim");
    if (u.width < kSsimWindow || u.height < kSsimWindow)
        throw DimensionMismatch("ssim: image smaller than the 11x11 window");

    const double c1 = (0.01 * 255.0) * (0.01 * 255.0);
    const double c2 = (0.03 * 255.0) * (0.03 * 255.0);
    const int w = u.width, h = u.height;

    std::vector<double> xx(u.size()), yy(u.size()), xy(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        xx[i] = u.data[i] * u.data[i];
        yy[i] = u_hat.data[i] * u_hat.data[i];
        xy[i] = u.data[i] * u_hat.data[i];
    }

    int ow = 0, oh = 0;
    const auto mx = gauss_valid(u.data, w, h, ow, oh);
    const auto my = gauss_valid(u_hat.data, w, h, ow, oh);
    const auto mxx = gauss_valid(xx, w, h, ow, oh);
    const auto myy = gauss_valid(yy, w, h, ow, oh);
    const auto mxy = gauss_valid(xy, w, h, ow, oh);

    double total = 0.0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
        const double sx = mxx[i] - mx[i] * mx[i];
        const double sy = myy[i] - my[i] * my[i];
        const double sxy = mxy[i] - mx[i] * my[i];
        const double num = (2.0 * mx[i] * my[i] + c1) * (2.0 * sxy + c2);
        const double den = (mx[i] * mx[i] + my[i] * my[i] + c1) * (sx + sy + c2);
        total += num / den;
    }
    return total / static_cast<double>(mx.size());
}

double enl(const IntensityImage& img, const Region& r) {
    if (r.height <= 0 || r.width <= 0 || r.top < 0 || r.left < 0 ||
        r.top + r.height > img.height || r.left + r.width > img.width)
        throw DimensionMismatch("enl: region does not fit inside the image");
    const double n = static_cast<double>(r.height) * r.width;
    double mean = 0.0;
    for (int i = 0; i < r.height; ++i)
        for (int j = 0; j < r.width; ++j) mean += img.at(r.top + i, r.left + j);
    mean /= n;
    double var = 0.0;
    for (int i = 0; i < r.height; ++i)
        for (int j = 0; j < r.width; ++j) {
            const double d = img.at(r.top + i, r.left + j) - mean;
            var += d * d;
        }
    var /= n; // population variance
    if (var == 0.0) return std::numeric_limits<double>::infinity();
    return mean * mean / var;
}

IntensityImage ratio_image(const IntensityImage& u, const IntensityImage& u_hat) {
    check_same_dims(u, u_hat, "ratio_image");
    IntensityImage out(u.width, u.height);
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (!(u_hat.data[i] > 0.0))
            throw NonPositivePixel("ratio_image: denominator must be positive");
        out.data[i] = u.data[i] / u_hat.data[i];
    }
    return out;
}

} // namespace despeck
