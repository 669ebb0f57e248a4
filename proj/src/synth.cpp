#include "docpipe/synth.hpp"

#include <algorithm>
#include <array>
#include <random>
#include <sstream>
#include <vector>

#include <png.h>

#include "docpipe/error.hpp"

namespace docpipe::synth {

namespace {

// Every glyph touches both the left and right column and the top and bottom
// row, and is 8-connected.
constexpr std::array<std::array<const char*, kGlyphHeight>, 26> kFont = {{
    {".###.", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"},  // A
    {"####.", "#...#", "#...#", "####.", "#...#", "#...#", "####."},  // B
    {".###.", "#...#", "#....", "#....", "#....", "#...#", ".###."},  // C
    {"####.", "#...#", "#...#", "#...#", "#...#", "#...#", "####."},  // D
    {"#####", "#....", "#....", "####.", "#....", "#....", "#####"},  // E
    {"#####", "#....", "#....", "####.", "#....", "#....", "#...."},  // F
    {".###.", "#...#", "#....", "#.###", "#...#", "#...#", ".###."},  // G
    {"#...#", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"},  // H
    {"#####", "..#..", "..#..", "..#..", "..#..", "..#..", "#####"},  // I
    {"..###", "...#.", "...#.", "...#.", "#..#.", "#..#.", ".##.."},  // J
    {"#...#", "#..#.", "#.#..", "##...", "#.#..", "#..#.", "#...#"},  // K
    {"#....", "#....", "#....", "#....", "#....", "#....", "#####"},  // L
    {"#...#", "##.##", "#.#.#", "#.#.#", "#...#", "#...#", "#...#"},  // M
    {"#...#", "#...#", "##..#", "#.#.#", "#..##", "#...#", "#...#"},  // N
    {".###.", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."},  // O
    {"####.", "#...#", "#...#", "####.", "#....", "#....", "#...."},  // P
    {".###.", "#...#", "#...#", "#...#", "#.#.#", "#..#.", ".##.#"},  // Q
    {"####.", "#...#", "#...#", "####.", "#.#..", "#..#.", "#...#"},  // R
    {".####", "#....", "#....", ".###.", "....#", "....#", "####."},  // S
    {"#####", "..#..", "..#..", "..#..", "..#..", "..#..", "..#.."},  // T
    {"#...#", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."},  // U
    {"#...#", "#...#", "#...#", "#...#", "#...#", ".#.#.", "..#.."},  // V
    {"#...#", "#...#", "#...#", "#.#.#", "#.#.#", "#.#.#", ".#.#."},  // W
    {"#...#", "#...#", ".#.#.", "..#..", ".#.#.", "#...#", "#...#"},  // X
    {"#...#", "#...#", ".#.#.", "..#..", "..#..", "..#..", "..#.."},  // Y
    {"#####", "....#", "...#.", "..#..", ".#...", "#....", "#####"},  // Z
}};

// Uniform integer in [lo, hi] by rejection sampling.
int uniform(std::mt19937_64& rng, int lo, int hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t r;
    do r = rng(); while (r >= limit);
    return lo + static_cast<int>(r % span);
}

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void draw_glyph(GrayImage& img, char letter, int x0, int y0, int scale) {
    const char* const* rows = glyph_rows(letter);
    if (!rows) throw Error(ErrorKind::InvalidArgument, std::string("no glyph for '") + letter + "'");
    for (int gy = 0; gy < kGlyphHeight; ++gy)
        for (int gx = 0; gx < kGlyphWidth; ++gx) {
            if (rows[gy][gx] != '#') continue;
            for (int sy = 0; sy < scale; ++sy)
                for (int sx = 0; sx < scale; ++sx) {
                    const int x = x0 + gx * scale + sx;
                    const int y = y0 + gy * scale + sy;
                    if (x >= 0 && y >= 0 && x < img.width && y < img.height) img.at(x, y) = 0;
                }
        }
}

void check(const RenderOptions& opts) {
    if (opts.scale < 1) throw Error(ErrorKind::InvalidArgument, "scale must be >= 1");
    if (opts.jitter < 0) throw Error(ErrorKind::InvalidArgument, "jitter must be >= 0");
    if (opts.noise < 0.0 || opts.noise > 1.0) throw Error(ErrorKind::InvalidArgument, "noise must be in [0,1]");
}

}  // namespace

const char* const* glyph_rows(char letter) {
    if (letter < 'A' || letter > 'Z') return nullptr;
    return kFont[static_cast<std::size_t>(letter - 'A')].data();
}

GrayImage render_training_sheet(const GridConfig& cfg, const RenderOptions& opts) {
    check(opts);
    const int s = opts.scale;
    const int cell_w = 10 * s;
    const int cell_h = 12 * s;
    const int margin = 4 * s;
    const bool along_columns = cfg.orientation == GridOrientation::LettersAlongColumns;
    const int cols = along_columns ? cfg.n_letters : cfg.n_samples;
    const int rows = along_columns ? cfg.n_samples : cfg.n_letters;

    GrayImage img(2 * margin + cols * cell_w, 2 * margin + rows * cell_h, 255);
    std::mt19937_64 rng(opts.seed);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const int letter = along_columns ? c : r;
            const int dx = opts.jitter ? uniform(rng, -opts.jitter, opts.jitter) : 0;
            const int dy = opts.jitter ? uniform(rng, -opts.jitter, opts.jitter) : 0;
            draw_glyph(img, cfg.alphabet.at(static_cast<std::size_t>(letter)),
                       margin + c * cell_w + (cell_w - kGlyphWidth * s) / 2 + dx,
                       margin + r * cell_h + (cell_h - kGlyphHeight * s) / 2 + dy, s);
        }
    if (opts.noise > 0.0) add_salt_and_pepper(img, opts.noise, opts.seed ^ 0x9e3779b97f4a7c15ULL);
    return img;
}

GrayImage render_text_page(std::string_view text, const RenderOptions& opts) {
    check(opts);
    const int s = opts.scale;
    const int advance = (kGlyphWidth + 1) * s;
    const int line_h = (kGlyphHeight + 5) * s;
    const int margin = 4 * s;

    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (true) {
        const auto nl = text.find('\n', start);
        lines.push_back(text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start));
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    std::size_t longest = 0;
    for (auto l : lines) longest = std::max(longest, l.size());

    GrayImage img(2 * margin + static_cast<int>(longest) * advance,
                  2 * margin + static_cast<int>(lines.size()) * line_h, 255);
    std::mt19937_64 rng(opts.seed);
    for (std::size_t li = 0; li < lines.size(); ++li)
        for (std::size_t ci = 0; ci < lines[li].size(); ++ci) {
            const char ch = lines[li][ci];
            if (ch == ' ') continue;
            const int dx = opts.jitter ? uniform(rng, -opts.jitter, opts.jitter) : 0;
            const int dy = opts.jitter ? uniform(rng, -opts.jitter, opts.jitter) : 0;
            draw_glyph(img, ch, margin + static_cast<int>(ci) * advance + dx,
                       margin + static_cast<int>(li) * line_h + dy, s);
        }
    if (opts.noise > 0.0) add_salt_and_pepper(img, opts.noise, opts.seed ^ 0x9e3779b97f4a7c15ULL);
    return img;
}

std::string wrap_text(std::string_view text, std::size_t width) {
    std::istringstream words{std::string(text)};
    std::string out;
    std::string line;
    for (std::string w; words >> w;) {
        if (!line.empty() && line.size() + 1 + w.size() > width) {
            out += line + '\n';
            line.clear();
        }
        if (!line.empty()) line += ' ';
        line += w;
    }
    out += line;
    return out;
}

std::string sample_text() {
    return wrap_text(
        "MODERN TECHNOLOGY CHANGES THE WAY PEOPLE WORK AND LEARN EVERY DAY "
        "SMALL COMPUTERS NOW READ PRINTED PAGES AND TURN THEM INTO TEXT THAT "
        "MACHINES CAN SEARCH SORT AND CLASSIFY WITH VERY LITTLE HUMAN HELP "
        "SCANNERS AND CAMERAS CAPTURE OLD DOCUMENTS WHILE NEW SOFTWARE LEARNS "
        "FROM EXAMPLES TO RECOGNIZE EACH LETTER THIS MAKES LARGE ARCHIVES EASY "
        "TO USE FOR STUDENTS AND RESEARCHERS",
        40);
}

void add_salt_and_pepper(GrayImage& img, double p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (auto& v : img.pixels) {
        if (unit(rng) < p) v = (rng() & 1U) ? 255 : 0;
    }
}

RasterImage to_raster(const GrayImage& img) {
    RasterImage out(img.width, img.height);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) out.pixels[i] = {img.pixels[i], img.pixels[i], img.pixels[i]};
    return out;
}

void save_png(const GrayImage& img, const std::filesystem::path& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width);
    image.height = static_cast<png_uint_32>(img.height);
    image.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&image, path.string().c_str(), 0, img.pixels.data(), 0, nullptr))
        throw Error(ErrorKind::IoError, "cannot write " + path.string() + ": " + image.message);
}

}  // namespace docpipe::synth
