#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace docpipe {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

// Row-major pixel grid. All three image stages share this layout.
template <typename Pixel>
struct Image {
    int width = 0;
    int height = 0;
    std::vector<Pixel> pixels;

    Image() = default;
    Image(int w, int h, Pixel fill = Pixel{})
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

    Pixel& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    const Pixel& at(int x, int y) const {
        return pixels[static_cast<std::size_t>(y) * width + x];
    }
    bool empty() const { return pixels.empty(); }

    friend bool operator==(const Image&, const Image&) = default;
};

using RasterImage = Image<Rgb>;
using GrayImage = Image<std::uint8_t>;
// 1 = ink (foreground), 0 = background.
using BinaryImage = Image<std::uint8_t>;

struct Binarized {
    BinaryImage image;
    std::uint8_t threshold = 0;
};

// Decodes a PNG or JPEG file (format sniffed from the file signature).
RasterImage load_image(const std::filesystem::path& path);

// BT.601 luminance, round-half-up.
GrayImage to_grayscale(const RasterImage& img);

// Otsu threshold over t in [0,255]; ink iff gray <= t; ties go to the
// smallest t. A single-level image yields t = 0 and no ink.
Binarized binarize_otsu(const GrayImage& img);

BinaryImage invert(const BinaryImage& img);

// Coverage-weighted mean downscale/upscale, computed in exact integer
// arithmetic and rounded half up.
GrayImage resize_area_average(const GrayImage& img, int out_w, int out_h);

// Crop helper used by feature extraction; the rectangle must lie inside img.
template <typename Pixel>
Image<Pixel> crop(const Image<Pixel>& img, int x, int y, int w, int h) {
    Image<Pixel> out(w, h);
    for (int row = 0; row < h; ++row)
        for (int col = 0; col < w; ++col)
            out.at(col, row) = img.at(x + col, y + row);
    return out;
}

}  // namespace docpipe
