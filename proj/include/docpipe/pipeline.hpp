#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "docpipe/features.hpp"
#include "docpipe/imaging.hpp"
#include "docpipe/ocr_model.hpp"
#include "docpipe/segmentation.hpp"
#include "docpipe/synth.hpp"
#include "docpipe/text_diff.hpp"
#include "docpipe/textclass.hpp"

namespace docpipe {

struct PipelineConfig {
    std::filesystem::path workspace_dir = ".";
    GridConfig grid;
    int min_area = kDefaultMinArea;
    Hyperparams hyperparams;
    ModelKind model_kind = ModelKind::LogReg;
    double space_factor = 0.5;
    FeatureMode feature_mode = FeatureMode::significant(5);
    bool stopwords_enabled = false;
    int serve_port = 7878;
    std::string serve_host = "127.0.0.1";
    std::optional<std::filesystem::path> ui_dir;
};

// Overlays the keys present in j onto base; unknown keys are rejected.
PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig base = {});
PipelineConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const PipelineConfig& cfg);
// Throws InvalidArgument when a field is out of range.
void validate_config(const PipelineConfig& cfg);

struct PageImages {
    GrayImage gray;
    Binarized binary;
};

PageImages preprocess(const RasterImage& img);

// "<dir>/<stem>.manifest.json" next to the image.
std::filesystem::path manifest_path_for(const std::filesystem::path& image);

// Binarize, find blobs and (with label_grid) assign grid labels.
BlobManifest segment_page(const PageImages& page, const std::string& image_name, const PipelineConfig& cfg,
                          bool label_grid);

// Throws UnlabeledBlob naming every unlabeled blob id.
TrainingSet export_features(const BlobManifest& manifest, const PageImages& page, const std::string& alphabet);

OcrModel train_ocr(const TrainingSet& ts, const PipelineConfig& cfg);

struct Recognition {
    BlobManifest manifest;
    RecognizedText text;
};

Recognition recognize_page(const PageImages& page, const OcrModel& model, const PipelineConfig& cfg,
                           const std::string& image_name = "");

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);
// Writes to a sibling temporary file and renames it over path.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

// segment -> export -> train -> recognize -> compare, with every
// intermediate artifact written into workdir.
struct PipelineResult {
    std::size_t training_blobs = 0;
    std::size_t page_blobs = 0;
    double training_accuracy = 0.0;
    std::string recognized;
    DiffReport report;
};

PipelineResult run_pipeline(const std::filesystem::path& train_image, const std::filesystem::path& test_image,
                            const std::filesystem::path& truth_file, const std::filesystem::path& workdir,
                            const PipelineConfig& cfg);

struct SyntheticFixture {
    std::filesystem::path train_image;
    std::filesystem::path test_image;
    std::filesystem::path truth_file;
};

// Writes a training sheet, a test page of synth::sample_text() and its
// ground truth. Jitter applies to both images, noise only to the test page.
SyntheticFixture write_synthetic_fixture(const std::filesystem::path& dir, const GridConfig& grid, double noise,
                                         int jitter, std::uint64_t seed);

struct NbRunReport {
    double accuracy = 0.0;
    std::vector<std::vector<std::int64_t>> confusion;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    FeatureMode feature_mode;
};

nlohmann::json nb_report_to_json(const NbRunReport& r, const std::vector<std::string>& classes);

}  // namespace docpipe
