#include "docpipe/pipeline.hpp"

#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include "docpipe/error.hpp"

namespace docpipe {

namespace {

const char* orientation_name(GridOrientation o) {
    return o == GridOrientation::LettersAlongColumns ? "letters-along-columns" : "letters-along-rows";
}

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> known, const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw Error(ErrorKind::InvalidArgument, "unknown config key " + where + key);
    }
}

}  // namespace

PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig cfg) {
    if (!j.is_object()) throw Error(ErrorKind::InvalidArgument, "config must be a JSON object");
    try {
        reject_unknown(j,
                       {"workspace_dir", "grid", "min_area", "hyperparams", "model_kind", "space_factor",
                        "feature_mode", "stopwords_enabled", "serve_port", "serve_host", "ui_dir"},
                       "");
        if (j.contains("workspace_dir")) cfg.workspace_dir = j.at("workspace_dir").get<std::string>();
        if (j.contains("grid")) {
            const auto& g = j.at("grid");
            reject_unknown(g, {"n_letters", "n_samples", "orientation", "alphabet"}, "grid.");
            read_field(g, "n_letters", cfg.grid.n_letters);
            read_field(g, "n_samples", cfg.grid.n_samples);
            read_field(g, "alphabet", cfg.grid.alphabet);
            if (g.contains("orientation")) {
                const auto o = g.at("orientation").get<std::string>();
                if (o == "letters-along-columns")
                    cfg.grid.orientation = GridOrientation::LettersAlongColumns;
                else if (o == "letters-along-rows")
                    cfg.grid.orientation = GridOrientation::LettersAlongRows;
                else
                    throw Error(ErrorKind::InvalidArgument, "unknown grid orientation " + o);
            }
        }
        read_field(j, "min_area", cfg.min_area);
        if (j.contains("hyperparams")) {
            const auto& h = j.at("hyperparams");
            reject_unknown(h, {"learning_rate", "iterations", "l2_lambda"}, "hyperparams.");
            read_field(h, "learning_rate", cfg.hyperparams.learning_rate);
            read_field(h, "iterations", cfg.hyperparams.iterations);
            read_field(h, "l2_lambda", cfg.hyperparams.l2_lambda);
        }
        if (j.contains("model_kind")) {
            const auto k = j.at("model_kind").get<std::string>();
            if (k == "logreg")
                cfg.model_kind = ModelKind::LogReg;
            else if (k == "centroid")
                cfg.model_kind = ModelKind::Centroid;
            else
                throw Error(ErrorKind::InvalidArgument, "unknown model_kind " + k);
        }
        read_field(j, "space_factor", cfg.space_factor);
        if (j.contains("feature_mode")) cfg.feature_mode = parse_feature_mode(j.at("feature_mode").get<std::string>());
        read_field(j, "stopwords_enabled", cfg.stopwords_enabled);
        read_field(j, "serve_port", cfg.serve_port);
        read_field(j, "serve_host", cfg.serve_host);
        if (j.contains("ui_dir")) cfg.ui_dir = std::filesystem::path(j.at("ui_dir").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidArgument, std::string("config: ") + e.what());
    }
    validate_config(cfg);
    return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    try {
        return config_from_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::FormatError, path.string() + ": " + e.what());
    }
}

nlohmann::json config_to_json(const PipelineConfig& cfg) {
    nlohmann::json j = {
        {"workspace_dir", cfg.workspace_dir.string()},
        {"grid",
         {{"n_letters", cfg.grid.n_letters},
          {"n_samples", cfg.grid.n_samples},
          {"orientation", orientation_name(cfg.grid.orientation)},
          {"alphabet", cfg.grid.alphabet}}},
        {"min_area", cfg.min_area},
        {"hyperparams",
         {{"learning_rate", cfg.hyperparams.learning_rate},
          {"iterations", cfg.hyperparams.iterations},
          {"l2_lambda", cfg.hyperparams.l2_lambda}}},
        {"model_kind", cfg.model_kind == ModelKind::LogReg ? "logreg" : "centroid"},
        {"space_factor", cfg.space_factor},
        {"feature_mode", to_string(cfg.feature_mode)},
        {"stopwords_enabled", cfg.stopwords_enabled},
        {"serve_port", cfg.serve_port},
        {"serve_host", cfg.serve_host}};
    if (cfg.ui_dir) j["ui_dir"] = cfg.ui_dir->string();
    return j;
}

void validate_config(const PipelineConfig& cfg) {
    auto bad = [](const std::string& what) { throw Error(ErrorKind::InvalidArgument, "config: " + what); };
    if (cfg.grid.n_letters < 1) bad("grid.n_letters must be >= 1");
    if (cfg.grid.n_samples < 1) bad("grid.n_samples must be >= 1");
    if (static_cast<int>(cfg.grid.alphabet.size()) != cfg.grid.n_letters) bad("grid.alphabet length must equal n_letters");
    if (cfg.min_area < 1) bad("min_area must be >= 1");
    if (!(cfg.hyperparams.learning_rate > 0)) bad("hyperparams.learning_rate must be positive");
    if (cfg.hyperparams.iterations < 1) bad("hyperparams.iterations must be positive");
    if (cfg.hyperparams.l2_lambda < 0) bad("hyperparams.l2_lambda must be non-negative");
    if (cfg.space_factor < 0) bad("space_factor must be non-negative");
    if (cfg.serve_port < 1024 || cfg.serve_port > 65535) bad("serve_port must be in [1024, 65535]");
}

PageImages preprocess(const RasterImage& img) {
    PageImages page;
    page.gray = to_grayscale(img);
    page.binary = binarize_otsu(page.gray);
    return page;
}

std::filesystem::path manifest_path_for(const std::filesystem::path& image) {
    return image.parent_path() / (image.stem().string() + ".manifest.json");
}

BlobManifest segment_page(const PageImages& page, const std::string& image_name, const PipelineConfig& cfg,
                          bool label_grid) {
    BlobManifest m;
    m.image_path = image_name;
    m.image_w = page.gray.width;
    m.image_h = page.gray.height;
    m.blobs = find_blobs(page.binary.image, cfg.min_area);
    if (label_grid && !m.blobs.empty()) m.blobs = assign_grid_labels(m.blobs, cfg.grid);
    return m;
}

TrainingSet export_features(const BlobManifest& manifest, const PageImages& page, const std::string& alphabet) {
    if (manifest.image_w != page.gray.width || manifest.image_h != page.gray.height)
        throw Error(ErrorKind::DimensionMismatch, "manifest was made for a " + std::to_string(manifest.image_w) + "x" +
                                                      std::to_string(manifest.image_h) + " image");
    std::string unlabeled;
    for (const Blob& b : manifest.blobs)
        if (!b.label) unlabeled += (unlabeled.empty() ? "" : ", ") + std::to_string(b.id);
    if (!unlabeled.empty()) throw Error(ErrorKind::UnlabeledBlob, "unlabeled blob ids: " + unlabeled);

    TrainingSet ts;
    ts.alphabet = alphabet;
    for (const Blob& b : manifest.blobs) {
        const auto pos = alphabet.find(*b.label);
        if (pos == std::string::npos)
            throw Error(ErrorKind::InvalidArgument,
                        "blob " + std::to_string(b.id) + " has label '" + *b.label + "' outside the alphabet");
        ts.X.push_back(extract_features(page.gray, page.binary.image, b));
        ts.y.push_back(static_cast<int>(pos));
    }
    return ts;
}

OcrModel train_ocr(const TrainingSet& ts, const PipelineConfig& cfg) {
    return cfg.model_kind == ModelKind::LogReg ? train_logreg(ts, cfg.hyperparams) : train_centroid(ts);
}

Recognition recognize_page(const PageImages& page, const OcrModel& model, const PipelineConfig& cfg,
                           const std::string& image_name) {
    Recognition r;
    r.manifest = segment_page(page, image_name, cfg, false);
    std::map<int, char> labels;
    for (Blob& b : r.manifest.blobs) {
        const auto p = predict(model, extract_features(page.gray, page.binary.image, b));
        labels[b.id] = p.label;
        b.label = p.label;
    }
    r.text = render_text(order_blobs_into_lines(r.manifest.blobs), labels, cfg.space_factor);
    return r;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorKind::IoError, "write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::error_code ec;
        if (!std::filesystem::exists(path, ec)) throw Error(ErrorKind::FileNotFound, "no such file: " + path.string());
        throw Error(ErrorKind::IoError, "cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    auto tmp = path;
    tmp += ".tmp";
    write_text_file(tmp, contents);
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(ErrorKind::IoError, "cannot replace " + path.string());
    }
}

PipelineResult run_pipeline(const std::filesystem::path& train_image, const std::filesystem::path& test_image,
                            const std::filesystem::path& truth_file, const std::filesystem::path& workdir,
                            const PipelineConfig& cfg) {
    std::filesystem::create_directories(workdir);
    PipelineResult result;

    const PageImages sheet = preprocess(load_image(train_image));
    const BlobManifest manifest = segment_page(sheet, train_image.filename().string(), cfg, true);
    save_manifest(manifest, workdir / (train_image.stem().string() + ".manifest.json"));
    result.training_blobs = manifest.blobs.size();

    const auto features_path = workdir / "features.txt";
    write_training_file(export_features(manifest, sheet, cfg.grid.alphabet), features_path);
    const TrainingSet ts = read_training_file(features_path, cfg.grid.alphabet);
    const OcrModel model = train_ocr(ts, cfg);
    save_model(model, workdir / "model.json");
    result.training_accuracy = evaluate_ocr(model, ts).accuracy;

    const PageImages page = preprocess(load_image(test_image));
    const Recognition rec = recognize_page(page, model, cfg, test_image.filename().string());
    save_manifest(rec.manifest, workdir / (test_image.stem().string() + ".manifest.json"));
    result.page_blobs = rec.manifest.blobs.size();
    result.recognized = rec.text.joined();
    write_text_file(workdir / "recognized.txt", result.recognized);

    result.report = compare_texts(read_text_file(truth_file), result.recognized);
    write_text_file(workdir / "report.json", report_to_json(result.report).dump(2) + "\n");
    return result;
}

SyntheticFixture write_synthetic_fixture(const std::filesystem::path& dir, const GridConfig& grid, double noise,
                                         int jitter, std::uint64_t seed) {
    std::filesystem::create_directories(dir);
    SyntheticFixture f{dir / "sheet.png", dir / "page.png", dir / "truth.txt"};
    synth::RenderOptions sheet_opts;
    sheet_opts.jitter = jitter;
    sheet_opts.seed = seed;
    synth::save_png(synth::render_training_sheet(grid, sheet_opts), f.train_image);

    synth::RenderOptions page_opts = sheet_opts;
    page_opts.noise = noise;
    page_opts.seed = seed + 1;
    const std::string text = synth::sample_text();
    synth::save_png(synth::render_text_page(text, page_opts), f.test_image);
    write_text_file(f.truth_file, text);
    return f;
}

nlohmann::json nb_report_to_json(const NbRunReport& r, const std::vector<std::string>& classes) {
    return {{"accuracy", r.accuracy},
            {"confusion", r.confusion},
            {"classes", classes},
            {"n_train", r.n_train},
            {"n_test", r.n_test},
            {"feature_mode", to_string(r.feature_mode)}};
}

}  // namespace docpipe
