#include "despeck/image_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace despeck {

namespace {

// Skips whitespace and '#' comment lines between PNM header tokens.
int next_pnm_int(std::istream& in, const std::string& path) {
    for (;;) {
        int c = in.peek();
        if (c == EOF) throw IoError(path + ": truncated header");
        if (std::isspace(c)) {
            in.get();
        } else if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else {
            break;
        }
    }
    int value = 0;
    if (!(in >> value)) throw IoError(path + ": malformed header integer");
    return value;
}

std::uint64_t to_le_bits(double x) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
    if constexpr (std::endian::native == std::endian::big) {
        bits = __builtin_bswap64(bits);
    }
    return bits;
}

double from_le_bits(std::uint64_t bits) {
    if constexpr (std::endian::native == std::endian::big) {
        bits = __builtin_bswap64(bits);
    }
    return std::bit_cast<double>(bits);
}

IntensityImage read_pgm(std::istream& in, const std::string& path, bool binary) {
    const int width = next_pnm_int(in, path);
    const int height = next_pnm_int(in, path);
    const int maxval = next_pnm_int(in, path);
    if (width <= 0 || height <= 0) throw IoError(path + ": invalid dimensions");
    if (maxval <= 0 || maxval > 255) throw IoError(path + ": unsupported maxval (must be 1..255)");

    IntensityImage img(width, height);
    if (binary) {
        in.get(); // single whitespace byte after maxval
        std::vector<unsigned char> raw(img.size());
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
        if (static_cast<std::size_t>(in.gcount()) != raw.size())
            throw IoError(path + ": truncated pixel data");
        for (std::size_t i = 0; i < raw.size(); ++i) img.data[i] = raw[i];
    } else {
        for (std::size_t i = 0; i < img.size(); ++i) {
            int value = 0;
            if (!(in >> value)) throw IoError(path + ": truncated pixel data");
            if (value < 0 || value > maxval) throw IoError(path + ": sample out of range");
            img.data[i] = value;
        }
    }
    return img;
}

IntensityImage read_nlr1(std::istream& in, const std::string& path) {
    std::string header;
    std::getline(in, header);
    std::istringstream hs(header);
    std::string magic;
    int width = 0, height = 0;
    if (!(hs >> magic >> width >> height) || magic != "NLR1" || width <= 0 || height <= 0)
        throw IoError(path + ": malformed NLR1 header");
    IntensityImage img(width, height);
    std::vector<std::uint64_t> raw(img.size());
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size() * 8));
    if (static_cast<std::size_t>(in.gcount()) != raw.size() * 8)
        throw IoError(path + ": truncated NLR1 pixel data");
    for (std::size_t i = 0; i < raw.size(); ++i) img.data[i] = from_le_bits(raw[i]);
    return img;
}

} // namespace

IntensityImage read_image(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path + ": cannot open for reading");
    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (m0 == 'P' && m1 == '5') return read_pgm(in, path, true);
    if (m0 == 'P' && m1 == '2') return read_pgm(in, path, false);
    if (m0 == 'N' && m1 == 'L') {
        in.seekg(0);
        return read_nlr1(in, path);
    }
    throw IoError(path + ": unrecognized image format (expected P5, P2 or NLR1)");
}

void write_pgm(const std::string& path, const IntensityImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path + ": cannot open for writing");
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    std::vector<unsigned char> raw(img.size());
    for (std::size_t i = 0; i < img.size(); ++i) {
        const double v = std::round(img.data[i]);
        raw[i] = static_cast<unsigned char>(std::clamp(v, 0.0, 255.0));
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw IoError(path + ": write failed");
}

void write_nlr1(const std::string& path, const IntensityImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path + ": cannot open for writing");
    out << "NLR1 " << img.width << " " << img.height << "\n";
    std::vector<std::uint64_t> raw(img.size());
    for (std::size_t i = 0; i < img.size(); ++i) raw[i] = to_le_bits(img.data[i]);
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size() * 8));
    if (!out) throw IoError(path + ": write failed");
}

} // namespace despeck
