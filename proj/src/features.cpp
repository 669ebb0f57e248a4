#include "docpipe/features.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "docpipe/error.hpp"

namespace docpipe {

namespace {

GrayImage render_binary(const BinaryImage& bin) {
    GrayImage out(bin.width, bin.height);
    for (std::size_t i = 0; i < bin.pixels.size(); ++i) out.pixels[i] = bin.pixels[i] ? 0 : 255;
    return out;
}

void append_plane(FeatureVector& fv, const GrayImage& crop) {
    const GrayImage small = resize_area_average(crop, kPlaneSide, kPlaneSide);
    for (auto v : small.pixels) fv.push_back(v / 255.0);
}

}  // namespace

FeatureVector extract_features(const GrayImage& page, const BinaryImage& page_bin, const Blob& blob) {
    if (page.width != page_bin.width || page.height != page_bin.height)
        throw Error(ErrorKind::DimensionMismatch, "grayscale and binary pages differ in size");
    if (blob.w < 1 || blob.h < 1 || blob.x < 0 || blob.y < 0 || blob.x + blob.w > page.width ||
        blob.y + blob.h > page.height)
        throw Error(ErrorKind::OutOfBounds, "blob " + std::to_string(blob.id) + " lies outside the page");

    const BinaryImage bin = crop(page_bin, blob.x, blob.y, blob.w, blob.h);
    FeatureVector fv;
    fv.reserve(kFeatureLength);
    append_plane(fv, crop(page, blob.x, blob.y, blob.w, blob.h));
    append_plane(fv, render_binary(bin));
    append_plane(fv, render_binary(invert(bin)));
    return fv;
}

void write_training_file(const TrainingSet& ts, const std::filesystem::path& path) {
    if (ts.X.size() != ts.y.size())
        throw Error(ErrorKind::DimensionMismatch, "training set has mismatched X and y");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());

    std::string line;
    char buf[32];
    for (std::size_t s = 0; s < ts.size(); ++s) {
        const FeatureVector& fv = ts.X[s];
        if (fv.size() != static_cast<std::size_t>(kFeatureLength))
            throw Error(ErrorKind::DimensionMismatch, "sample " + std::to_string(s) + " is not 1200 values");
        for (int plane = 0; plane < 3; ++plane) {
            line.clear();
            for (int i = 0; i < kPlaneSize; ++i) {
                std::snprintf(buf, sizeof buf, "%.6f ", fv[plane * kPlaneSize + i]);
                line += buf;
            }
            line += std::to_string(ts.y[s]);
            line += '\n';
            out << line;
        }
    }
    if (!out) throw Error(ErrorKind::IoError, "write failed: " + path.string());
}

TrainingSet read_training_file(const std::filesystem::path& path, const std::string& alphabet) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::error_code ec;
        if (!std::filesystem::exists(path, ec))
            throw Error(ErrorKind::FileNotFound, "no such file: " + path.string());
        throw Error(ErrorKind::IoError, "cannot open " + path.string());
    }

    TrainingSet ts;
    ts.alphabet = alphabet;
    std::string line;
    std::size_t line_no = 0;
    FeatureVector current;
    int current_label = -1;
    auto fail = [&](const std::string& what) {
        throw Error(ErrorKind::FormatError, path.string() + ":" + std::to_string(line_no) + ": " + what);
    };

    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream tokens(line);
        std::vector<std::string> parts;
        for (std::string tok; tokens >> tok;) parts.push_back(std::move(tok));
        if (parts.size() != static_cast<std::size_t>(kPlaneSize) + 1)
            fail("expected 401 tokens, found " + std::to_string(parts.size()));

        int label = 0;
        const auto& lt = parts.back();
        auto [lp, lec] = std::from_chars(lt.data(), lt.data() + lt.size(), label);
        if (lec != std::errc{} || lp != lt.data() + lt.size()) fail("label '" + lt + "' is not an integer");
        if (label < 0 || label >= static_cast<int>(alphabet.size()))
            fail("label " + lt + " outside the alphabet");

        const std::size_t plane = (line_no - 1) % 3;
        if (plane == 0) {
            current.clear();
            current.reserve(kFeatureLength);
            current_label = label;
        } else if (label != current_label) {
            fail("label " + lt + " disagrees with the sample's first line (" + std::to_string(current_label) + ")");
        }
        for (std::size_t i = 0; i < static_cast<std::size_t>(kPlaneSize); ++i) {
            const auto& tok = parts[i];
            double v = 0.0;
            auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (ec != std::errc{} || p != tok.data() + tok.size()) fail("'" + tok + "' is not a number");
            current.push_back(v);
        }
        if (plane == 2) {
            ts.X.push_back(std::move(current));
            ts.y.push_back(current_label);
            current = {};
        }
    }
    if (line_no % 3 != 0) fail("line count is not a multiple of 3");
    return ts;
}

}  // namespace docpipe
