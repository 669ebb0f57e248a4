#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "docpipe/imaging.hpp"
#include "docpipe/segmentation.hpp"

// Synthetic printed pages drawn with an embedded 5x7 bitmap font. Used for
// fixtures and the end-to-end printed-text runs.
namespace docpipe::synth {

inline constexpr int kGlyphWidth = 5;
inline constexpr int kGlyphHeight = 7;

// Rows of the glyph for an upper-case letter, '#' = ink; nullptr if absent.
const char* const* glyph_rows(char letter);

struct RenderOptions {
    int scale = 3;
    // Salt-and-pepper probability per pixel (half black, half white).
    double noise = 0.0;
    // Each glyph is shifted by a uniform offset in [-jitter, jitter] on both axes.
    int jitter = 0;
    std::uint64_t seed = 1;
};

// One letter per grid band, n_samples copies each, laid out per cfg.orientation.
GrayImage render_training_sheet(const GridConfig& cfg, const RenderOptions& opts = {});

// Renders upper-case text; '\n' starts a new line, ' ' advances one cell.
GrayImage render_text_page(std::string_view text, const RenderOptions& opts = {});

// Greedy word wrap to at most width characters per line.
std::string wrap_text(std::string_view text, std::size_t width);

// 61-word upper-case paragraph wrapped to 40 columns.
std::string sample_text();

void add_salt_and_pepper(GrayImage& img, double p, std::uint64_t seed);

RasterImage to_raster(const GrayImage& img);
void save_png(const GrayImage& img, const std::filesystem::path& path);

}  // namespace docpipe::synth
