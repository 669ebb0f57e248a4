#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "docpipe/imaging.hpp"
#include "docpipe/segmentation.hpp"

namespace docpipe {

inline constexpr int kPlaneSide = 20;
inline constexpr int kPlaneSize = kPlaneSide * kPlaneSide;
inline constexpr int kFeatureLength = 3 * kPlaneSize;

// Three row-major 20x20 planes in [0,1]: grayscale, binarized, inverted.
using FeatureVector = std::vector<double>;

struct TrainingSet {
    std::vector<FeatureVector> X;
    std::vector<int> y;  // index into alphabet
    std::string alphabet;

    std::size_t size() const { return y.size(); }
    bool empty() const { return y.empty(); }
};

FeatureVector extract_features(const GrayImage& page, const BinaryImage& page_bin, const Blob& blob);

// Three lines per sample, one per plane: 400 values with 6 fractional
// digits, then the integer label.
void write_training_file(const TrainingSet& ts, const std::filesystem::path& path);
TrainingSet read_training_file(const std::filesystem::path& path,
                               const std::string& alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZ");

}  // namespace docpipe
