#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "docpipe/imaging.hpp"

namespace docpipe {

struct Blob {
    int id = 0;
    int x = 0;
    int y = 0;
    int w = 1;
    int h = 1;
    std::optional<char> label;

    friend bool operator==(const Blob&, const Blob&) = default;
};

struct BlobManifest {
    std::string image_path;
    int image_w = 0;
    int image_h = 0;
    std::vector<Blob> blobs;

    friend bool operator==(const BlobManifest&, const BlobManifest&) = default;
};

enum class GridOrientation { LettersAlongColumns, LettersAlongRows };

struct GridConfig {
    int n_letters = 26;
    int n_samples = 12;
    GridOrientation orientation = GridOrientation::LettersAlongColumns;
    std::string alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZ";
};

inline constexpr int kDefaultMinArea = 15;

// 8-connected components with at least min_area ink pixels, as tight boxes
// sorted by top-left (y, x). Ids are 0..n-1 in that order.
std::vector<Blob> find_blobs(const BinaryImage& img, int min_area = kDefaultMinArea);

// Labels every blob by clustering box centres along the letter axis into
// cfg.n_letters bands (1-D k-means, evenly spaced init, 50 iterations).
// Throws GridMismatch if a band ends up empty.
std::vector<Blob> assign_grid_labels(const std::vector<Blob>& blobs, const GridConfig& cfg);

// Manifest JSON (schema shared with the review service).
nlohmann::json manifest_to_json(const BlobManifest& m);
// Throws SchemaError with a field-level message on any violation, including
// blobs outside the page and duplicate ids.
BlobManifest manifest_from_json(const nlohmann::json& j);

void save_manifest(const BlobManifest& m, const std::filesystem::path& path);
BlobManifest load_manifest(const std::filesystem::path& path);

// Manual corrections.
struct MoveBlob {
    int id = 0;
    int x = 0;
    int y = 0;
    int w = 1;
    int h = 1;
    // Present: replace the label (a nullopt inside clears it). Absent: keep it.
    std::optional<std::optional<char>> label;
};
struct DeleteBlob {
    int id = 0;
};
struct CreateBlob {
    int x = 0;
    int y = 0;
    int w = 1;
    int h = 1;
    std::optional<char> label;
};
using BlobEdit = std::variant<MoveBlob, DeleteBlob, CreateBlob>;

BlobManifest apply_blob_edit(const BlobManifest& m, const BlobEdit& edit);

}  // namespace docpipe
