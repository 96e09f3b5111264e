#include "despeck/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "despeck/rng.hpp"

namespace despeck {

LogImage to_log(const IntensityImage& img) {
    LogImage out(img.width, img.height);
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        if (!(img.data[i] > 0.0))
            throw NonPositivePixel("to_log: sample " + std::to_string(i) + " is not strictly positive");
        out.data[i] = std::log(img.data[i]);
    }
    return out;
}

IntensityImage from_log(const LogImage& x) {
    IntensityImage out(x.width, x.height);
    for (std::size_t i = 0; i < x.data.size(); ++i)
        out.data[i] = std::exp(x.data[i]);
    return out;
}

IntensityImage apply_gamma_noise(const IntensityImage& u, const NoiseSpec& spec) {
    Rng rng(spec.seed);
    IntensityImage v(u.width, u.height);
    for (std::size_t i = 0; i < u.data.size(); ++i)
        v.data[i] = u.data[i] * rng.next_gamma_looks(spec.looks);
    return v;
}

IntensityImage clip_positive(const IntensityImage& img, double floor_ratio) {
    const double maxval = img.data.empty() ? 0.0 : *std::max_element(img.data.begin(), img.data.end());
    if (maxval <= 0.0)
        throw AllZeroImage("clip_positive: image maximum is zero");
    const double floor = floor_ratio * maxval;
    IntensityImage out(img.width, img.height);
    for (std::size_t i = 0; i < img.data.size(); ++i)
        out.data[i] = std::max(img.data[i], floor);
    return out;
}

} // namespace despeck
