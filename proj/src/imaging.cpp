#include "docpipe/imaging.hpp"

#include <array>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>
#include <jpeglib.h>
#include <jerror.h>
#include <png.h>

#include "docpipe/error.hpp"

namespace docpipe {

namespace {

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec))
        throw Error(ErrorKind::FileNotFound, "no such file: " + path.string());
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

RasterImage decode_png(const std::vector<unsigned char>& bytes, const std::string& name) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
        throw Error(ErrorKind::CorruptImage, name + ": " + image.message);
    image.format = PNG_FORMAT_RGB;
    std::vector<unsigned char> buffer(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        throw Error(ErrorKind::CorruptImage, name + ": " + msg);
    }
    RasterImage out(static_cast<int>(image.width), static_cast<int>(image.height));
    for (std::size_t i = 0; i < out.pixels.size(); ++i)
        out.pixels[i] = {buffer[3 * i], buffer[3 * i + 1], buffer[3 * i + 2]};
    return out;
}

struct JpegErrorManager {
    jpeg_error_mgr base;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* mgr = reinterpret_cast<JpegErrorManager*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, mgr->message);
    std::longjmp(mgr->jump, 1);
}

// Premature end of data is an error, not a warning.
void jpeg_emit_message(j_common_ptr cinfo, int level) {
    if (level < 0 && cinfo->err->msg_code == JWRN_JPEG_EOF) jpeg_error_exit(cinfo);
}

RasterImage decode_jpeg(const std::vector<unsigned char>& bytes, const std::string& name) {
    jpeg_decompress_struct cinfo{};
    JpegErrorManager err{};
    std::vector<unsigned char> buffer;
    int width = 0;
    int height = 0;

    cinfo.err = jpeg_std_error(&err.base);
    err.base.error_exit = jpeg_error_exit;
    err.base.emit_message = jpeg_emit_message;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw Error(ErrorKind::CorruptImage, name + ": " + err.message);
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    width = static_cast<int>(cinfo.output_width);
    height = static_cast<int>(cinfo.output_height);
    buffer.resize(static_cast<std::size_t>(width) * height * 3);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = buffer.data() + static_cast<std::size_t>(cinfo.output_scanline) * width * 3;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);

    RasterImage out(width, height);
    for (std::size_t i = 0; i < out.pixels.size(); ++i)
        out.pixels[i] = {buffer[3 * i], buffer[3 * i + 1], buffer[3 * i + 2]};
    return out;
}

}  // namespace

RasterImage load_image(const std::filesystem::path& path) {
    const auto bytes = read_bytes(path);
    static constexpr std::array<unsigned char, 8> png_sig{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (bytes.size() >= png_sig.size() && std::equal(png_sig.begin(), png_sig.end(), bytes.begin()))
        return decode_png(bytes, path.string());
    if (bytes.size() >= 3 && bytes[0] == 0xff && bytes[1] == 0xd8 && bytes[2] == 0xff)
        return decode_jpeg(bytes, path.string());
    throw Error(ErrorKind::UnsupportedFormat, path.string() + ": not a PNG or JPEG file");
}

GrayImage to_grayscale(const RasterImage& img) {
    GrayImage out(img.width, img.height);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        const Rgb& p = img.pixels[i];
        const int weighted = 299 * p.r + 587 * p.g + 114 * p.b;
        out.pixels[i] = static_cast<std::uint8_t>((weighted + 500) / 1000);
    }
    return out;
}

Binarized binarize_otsu(const GrayImage& img) {
    using boost::multiprecision::int256_t;

    std::array<std::int64_t, 256> hist{};
    for (auto v : img.pixels) ++hist[v];

    Binarized result{BinaryImage(img.width, img.height, 0), 0};
    const auto levels = std::count_if(hist.begin(), hist.end(), [](auto c) { return c > 0; });
    if (levels <= 1) return result;

    std::int64_t total = 0;
    std::int64_t total_sum = 0;
    for (int g = 0; g < 256; ++g) {
        total += hist[g];
        total_sum += hist[g] * g;
    }

    // Between-class variance at t is (N*S0 - n0*S)^2 / (N^2 * n0 * n1); the
    // N^2 factor is common, so candidates compare as exact fractions.
    int256_t best_num = -1;
    int256_t best_den = 1;
    std::int64_t n0 = 0;
    std::int64_t s0 = 0;
    for (int t = 0; t < 256; ++t) {
        n0 += hist[t];
        s0 += hist[t] * t;
        const std::int64_t n1 = total - n0;
        int256_t num = 0;
        int256_t den = 1;
        if (n0 > 0 && n1 > 0) {
            const int256_t diff = int256_t(total) * s0 - int256_t(n0) * total_sum;
            num = diff * diff;
            den = int256_t(n0) * n1;
        }
        if (num * best_den > best_num * den) {
            best_num = num;
            best_den = den;
            result.threshold = static_cast<std::uint8_t>(t);
        }
    }
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
        result.image.pixels[i] = img.pixels[i] <= result.threshold ? 1 : 0;
    return result;
}

BinaryImage invert(const BinaryImage& img) {
    BinaryImage out = img;
    for (auto& v : out.pixels) v = v ? 0 : 1;
    return out;
}

GrayImage resize_area_average(const GrayImage& img, int out_w, int out_h) {
    if (out_w < 1 || out_h < 1)
        throw Error(ErrorKind::InvalidArgument, "resize target must be at least 1x1");
    if (img.empty()) throw Error(ErrorKind::InvalidArgument, "cannot resize an empty image");

    // In units where the source is out_w*in_w wide, output column i spans
    // [i*in_w, (i+1)*in_w) and source column j spans [j*out_w, (j+1)*out_w).
    struct Span {
        int first = 0;
        std::vector<std::int64_t> weights;
    };
    auto spans = [](int in, int out) {
        std::vector<Span> result(out);
        for (int i = 0; i < out; ++i) {
            const std::int64_t lo = static_cast<std::int64_t>(i) * in;
            const std::int64_t hi = lo + in;
            const int j0 = static_cast<int>(lo / out);
            const int j1 = static_cast<int>((hi - 1) / out);
            result[i].first = j0;
            for (int j = j0; j <= j1; ++j) {
                const std::int64_t a = std::max<std::int64_t>(lo, static_cast<std::int64_t>(j) * out);
                const std::int64_t b = std::min<std::int64_t>(hi, static_cast<std::int64_t>(j + 1) * out);
                result[i].weights.push_back(b - a);
            }
        }
        return result;
    };
    const auto xs = spans(img.width, out_w);
    const auto ys = spans(img.height, out_h);
    const std::int64_t area = static_cast<std::int64_t>(img.width) * img.height;

    GrayImage out(out_w, out_h);
    for (int oy = 0; oy < out_h; ++oy) {
        for (int ox = 0; ox < out_w; ++ox) {
            std::int64_t sum = 0;
            const Span& sy = ys[oy];
            const Span& sx = xs[ox];
            for (std::size_t dy = 0; dy < sy.weights.size(); ++dy) {
                std::int64_t row = 0;
                for (std::size_t dx = 0; dx < sx.weights.size(); ++dx)
                    row += sx.weights[dx] * img.at(sx.first + static_cast<int>(dx), sy.first + static_cast<int>(dy));
                sum += row * sy.weights[dy];
            }
            out.at(ox, oy) = static_cast<std::uint8_t>((2 * sum + area) / (2 * area));
        }
    }
    return out;
}

}  // namespace docpipe
