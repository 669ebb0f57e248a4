// docpipe: command-line driver for the scan -> OCR -> classify pipeline.

#include <csignal>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "docpipe/error.hpp"
#include "docpipe/pipeline.hpp"
#include "docpipe/service.hpp"

using namespace docpipe;
namespace fs = std::filesystem;

namespace {

struct Overrides {
    std::optional<std::string> config;
    std::optional<int> min_area;
    std::optional<double> learning_rate;
    std::optional<int> iterations;
    std::optional<double> lambda;
    std::optional<std::string> model_kind;
    std::optional<double> space_factor;
    std::optional<std::string> feature_mode;
    bool stopwords = false;
    std::optional<std::string> orientation;
    std::optional<std::string> alphabet;
    std::optional<int> samples;
    std::optional<std::string> workspace;
    std::optional<int> port;
    std::optional<std::string> host;
    std::optional<std::string> ui_dir;
};

PipelineConfig resolve_config(const Overrides& o) {
    PipelineConfig cfg = o.config ? load_config(*o.config) : PipelineConfig{};
    nlohmann::json j = nlohmann::json::object();
    if (o.min_area) j["min_area"] = *o.min_area;
    if (o.learning_rate) j["hyperparams"]["learning_rate"] = *o.learning_rate;
    if (o.iterations) j["hyperparams"]["iterations"] = *o.iterations;
    if (o.lambda) j["hyperparams"]["l2_lambda"] = *o.lambda;
    if (o.model_kind) j["model_kind"] = *o.model_kind;
    if (o.space_factor) j["space_factor"] = *o.space_factor;
    if (o.feature_mode) j["feature_mode"] = *o.feature_mode;
    if (o.stopwords) j["stopwords_enabled"] = true;
    if (o.orientation) j["grid"]["orientation"] = *o.orientation;
    if (o.alphabet) {
        j["grid"]["alphabet"] = *o.alphabet;
        j["grid"]["n_letters"] = static_cast<int>(o.alphabet->size());
    }
    if (o.samples) j["grid"]["n_samples"] = *o.samples;
    if (o.workspace) j["workspace_dir"] = *o.workspace;
    if (o.port) j["serve_port"] = *o.port;
    if (o.host) j["serve_host"] = *o.host;
    if (o.ui_dir) j["ui_dir"] = *o.ui_dir;
    return config_from_json(j, cfg);
}

std::vector<Document> load_corpus(const fs::path& path) {
    try {
        return corpus_from_json(nlohmann::json::parse(read_text_file(path)));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::FormatError, path.string() + ": " + e.what());
    }
}

NBModel load_nb_model(const fs::path& path) {
    try {
        return nb_model_from_json(nlohmann::json::parse(read_text_file(path)));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::FormatError, path.string() + ": " + e.what());
    }
}

std::string summary(const DiffReport& r) {
    return "chars " + std::to_string(r.matched_chars) + "/" + std::to_string(r.chars_original) + " (" +
           r.char_match_display() + "%), words " + std::to_string(r.matched_words) + "/" +
           std::to_string(r.words_original) + " (" + r.word_match_display() + "%)";
}

ReviewService* g_service = nullptr;

extern "C" void on_signal(int) {
    if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"docpipe - scanned page OCR and Naive Bayes text classification"};
    app.require_subcommand(1);
    Overrides o;
    app.add_option("--config", o.config, "JSON config file; flags override its values");

    auto add_grid = [&](CLI::App* cmd) {
        cmd->add_option("--orientation", o.orientation, "letters-along-columns | letters-along-rows");
        cmd->add_option("--alphabet", o.alphabet, "grid alphabet, one letter per band");
        cmd->add_option("--samples", o.samples, "samples per letter");
    };
    auto add_training = [&](CLI::App* cmd) {
        cmd->add_option("--kind", o.model_kind, "logreg | centroid");
        cmd->add_option("--learning-rate", o.learning_rate);
        cmd->add_option("--iterations", o.iterations);
        cmd->add_option("--lambda", o.lambda, "L2 penalty");
    };

    // segment
    auto* segment = app.add_subcommand("segment", "find character blobs and write <stem>.manifest.json");
    std::string seg_image;
    bool seg_grid = false;
    segment->add_option("image", seg_image)->required();
    segment->add_flag("--grid", seg_grid, "label blobs from the training-sheet grid");
    segment->add_option("--min-area", o.min_area);
    add_grid(segment);

    // export-features
    auto* exportf = app.add_subcommand("export-features", "write the three-line-per-blob training file");
    std::string ex_manifest, ex_image, ex_out;
    exportf->add_option("--manifest", ex_manifest)->required();
    exportf->add_option("--image", ex_image, "defaults to the image next to the manifest");
    exportf->add_option("--out", ex_out)->required();
    add_grid(exportf);

    // train-ocr
    auto* train_ocr_cmd = app.add_subcommand("train-ocr", "train the character model");
    std::string tr_features, tr_out;
    train_ocr_cmd->add_option("--features", tr_features)->required();
    train_ocr_cmd->add_option("--out", tr_out)->required();
    add_training(train_ocr_cmd);
    add_grid(train_ocr_cmd);

    // recognize
    auto* recognize = app.add_subcommand("recognize", "recognize the text on a page image");
    std::string rec_image, rec_model, rec_out;
    recognize->add_option("image", rec_image)->required();
    recognize->add_option("--model", rec_model)->required();
    recognize->add_option("--out", rec_out)->required();
    recognize->add_option("--space-factor", o.space_factor);
    recognize->add_option("--min-area", o.min_area);

    // compare
    auto* compare = app.add_subcommand("compare", "score OCR output against the original text");
    std::string cmp_original, cmp_ocr, cmp_out;
    compare->add_option("original", cmp_original)->required();
    compare->add_option("ocr", cmp_ocr)->required();
    compare->add_option("--out", cmp_out, "report JSON path (stdout when omitted)");

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "render a synthetic training sheet, test page and truth text");
    std::string syn_dir;
    double syn_noise = 0.0;
    int syn_jitter = 0;
    std::uint64_t syn_seed = 1;
    synth_cmd->add_option("--out-dir", syn_dir)->required();
    synth_cmd->add_option("--noise", syn_noise, "salt-and-pepper probability on the test page");
    synth_cmd->add_option("--jitter", syn_jitter, "per-glyph offset in pixels");
    synth_cmd->add_option("--seed", syn_seed);
    add_grid(synth_cmd);

    // ingest-corpus
    auto* ingest = app.add_subcommand("ingest-corpus", "read labeled SMART files or text directories into corpus JSON");
    std::vector<std::string> in_classes;
    std::string in_out, in_train, in_test;
    std::size_t in_n_train = 2200, in_n_test = 295;
    std::uint64_t in_seed = 2021;
    ingest->add_option("--class", in_classes, "name=path (SMART file or directory), repeatable")->required();
    ingest->add_option("--out", in_out, "whole corpus");
    ingest->add_option("--train-out", in_train, "seeded split: training part");
    ingest->add_option("--test-out", in_test, "seeded split: test part");
    ingest->add_option("--n-train", in_n_train);
    ingest->add_option("--n-test", in_n_test);
    ingest->add_option("--seed", in_seed);

    // train-nb
    auto* train_nb_cmd = app.add_subcommand("train-nb", "train the Naive Bayes text classifier");
    std::string nb_corpus, nb_out;
    train_nb_cmd->add_option("--corpus", nb_corpus)->required();
    train_nb_cmd->add_option("--out", nb_out)->required();
    train_nb_cmd->add_option("--feature-mode", o.feature_mode, "full_bag | significant_k(<k>)");
    train_nb_cmd->add_flag("--stopwords", o.stopwords, "drop English stopwords");

    // classify
    auto* classify_cmd = app.add_subcommand("classify", "classify a text file");
    std::string cl_model, cl_text, cl_out;
    classify_cmd->add_option("--model", cl_model)->required();
    classify_cmd->add_option("text", cl_text)->required();
    classify_cmd->add_option("--out", cl_out);

    // eval-nb
    auto* eval_nb = app.add_subcommand("eval-nb", "evaluate the Naive Bayes model on a labeled corpus");
    std::string ev_model, ev_corpus, ev_out;
    eval_nb->add_option("--model", ev_model)->required();
    eval_nb->add_option("--corpus", ev_corpus)->required();
    eval_nb->add_option("--out", ev_out)->required();
    eval_nb->add_option("--feature-mode", o.feature_mode, "defaults to the model's mode");

    // pipeline
    auto* pipeline = app.add_subcommand("pipeline", "segment, export, train, recognize and compare in one go");
    std::string pl_train, pl_test, pl_truth, pl_workdir, pl_synthetic;
    double pl_noise = 0.0;
    int pl_jitter = 0;
    std::uint64_t pl_seed = 1;
    pipeline->add_option("--train-image", pl_train);
    pipeline->add_option("--test-image", pl_test);
    pipeline->add_option("--truth", pl_truth);
    pipeline->add_option("--workdir", pl_workdir)->required();
    pipeline->add_flag("--synthetic", "render synthetic fixtures into the workdir first");
    pipeline->add_option("--noise", pl_noise);
    pipeline->add_option("--jitter", pl_jitter);
    pipeline->add_option("--seed", pl_seed);
    add_training(pipeline);
    add_grid(pipeline);

    // serve
    auto* serve = app.add_subcommand("serve", "serve pages and manifests to the review UI");
    serve->add_option("--workspace", o.workspace);
    serve->add_option("--port", o.port);
    serve->add_option("--host", o.host);
    serve->add_option("--ui-dir", o.ui_dir, "static files served at /");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        const PipelineConfig cfg = resolve_config(o);

        if (*segment) {
            const PageImages page = preprocess(load_image(seg_image));
            const BlobManifest m = segment_page(page, fs::path(seg_image).filename().string(), cfg, seg_grid);
            const auto out = manifest_path_for(seg_image);
            save_manifest(m, out);
            if (m.blobs.empty()) std::cerr << "warning: no blobs found in " << seg_image << "\n";
            std::cout << m.blobs.size() << " blobs -> " << out.string() << "\n";
        } else if (*exportf) {
            const BlobManifest m = load_manifest(ex_manifest);
            const fs::path image = ex_image.empty() ? fs::path(ex_manifest).parent_path() / m.image_path : fs::path(ex_image);
            const TrainingSet ts = export_features(m, preprocess(load_image(image)), cfg.grid.alphabet);
            write_training_file(ts, ex_out);
            if (ts.empty()) std::cerr << "warning: manifest has no blobs; wrote an empty file\n";
            std::cout << ts.size() << " samples -> " << ex_out << "\n";
        } else if (*train_ocr_cmd) {
            const TrainingSet ts = read_training_file(tr_features, cfg.grid.alphabet);
            const OcrModel model = train_ocr(ts, cfg);
            save_model(model, tr_out);
            const auto ev = evaluate_ocr(model, ts);
            std::cout << "trained on " << ts.size() << " samples, training accuracy " << ev.accuracy << " -> "
                      << tr_out << "\n";
        } else if (*recognize) {
            const OcrModel model = load_model(rec_model);
            const Recognition r = recognize_page(preprocess(load_image(rec_image)), model, cfg,
                                                 fs::path(rec_image).filename().string());
            write_text_file(rec_out, r.text.joined());
            std::cout << r.manifest.blobs.size() << " characters in " << r.text.lines.size() << " lines -> "
                      << rec_out << "\n";
        } else if (*compare) {
            const DiffReport r = compare_texts(read_text_file(cmp_original), read_text_file(cmp_ocr));
            const std::string json = report_to_json(r).dump(2) + "\n";
            if (cmp_out.empty()) {
                std::cout << json;
            } else {
                write_text_file(cmp_out, json);
                std::cout << summary(r) << "\n";
            }
        } else if (*synth_cmd) {
            const auto f = write_synthetic_fixture(syn_dir, cfg.grid, syn_noise, syn_jitter, syn_seed);
            std::cout << "wrote " << f.train_image.string() << ", " << f.test_image.string() << ", "
                      << f.truth_file.string() << "\n";
        } else if (*ingest) {
            std::vector<Document> docs;
            for (const auto& class_arg : in_classes) {
                const auto eq = class_arg.find('=');
                if (eq == std::string::npos || eq == 0)
                    throw Error(ErrorKind::InvalidArgument, "--class expects name=path, got " + class_arg);
                const std::string name = class_arg.substr(0, eq);
                const fs::path path = class_arg.substr(eq + 1);
                auto part = fs::is_directory(path) ? load_text_directory(path, name) : parse_smart(path, name);
                for (auto& d : part) {
                    d.doc_id = name + ":" + d.doc_id;
                    docs.push_back(std::move(d));
                }
            }
            if (!in_out.empty()) write_text_file(in_out, corpus_to_json(docs).dump() + "\n");
            std::string split_note;
            if (!in_train.empty() || !in_test.empty()) {
                const auto split = split_corpus(docs, in_n_train, in_n_test, in_seed);
                if (!in_train.empty()) write_text_file(in_train, corpus_to_json(split.train).dump() + "\n");
                if (!in_test.empty()) write_text_file(in_test, corpus_to_json(split.test).dump() + "\n");
                split_note = ", split " + std::to_string(split.train.size()) + "/" + std::to_string(split.test.size());
            }
            std::cout << docs.size() << " documents" << split_note << "\n";
        } else if (*train_nb_cmd) {
            const auto docs = load_corpus(nb_corpus);
            const NBModel model = train_nb(docs, cfg.feature_mode, cfg.stopwords_enabled);
            write_text_file(nb_out, nb_model_to_json(model).dump() + "\n");
            std::cout << "trained on " << docs.size() << " documents, " << model.vocab.size() << " words, mode "
                      << to_string(model.feature_mode) << " -> " << nb_out << "\n";
        } else if (*classify_cmd) {
            const NBModel model = load_nb_model(cl_model);
            const auto r = classify_text(model, read_text_file(cl_text));
            nlohmann::json j = {{"label", r.label}, {"classes", model.classes}, {"posteriors", r.posteriors},
                                {"log_posteriors", r.log_posteriors}};
            if (!cl_out.empty()) write_text_file(cl_out, j.dump(2) + "\n");
            std::cout << r.label << " (posterior " << r.posteriors[r.index] << ")\n";
        } else if (*eval_nb) {
            const NBModel model = load_nb_model(ev_model);
            const auto docs = load_corpus(ev_corpus);
            const FeatureMode mode = o.feature_mode ? parse_feature_mode(*o.feature_mode) : model.feature_mode;
            const auto ev = evaluate_nb(model, docs, mode);
            NbRunReport report{ev.accuracy, ev.confusion, 0, ev.n_test, mode};
            for (auto c : model.doc_counts) report.n_train += static_cast<std::size_t>(c);
            write_text_file(ev_out, nb_report_to_json(report, model.classes).dump(2) + "\n");
            std::cout << "accuracy " << ev.accuracy << " on " << ev.n_test << " documents -> " << ev_out << "\n";
        } else if (*pipeline) {
            fs::path train = pl_train, test = pl_test, truth = pl_truth;
            if (pipeline->count("--synthetic")) {
                const auto f = write_synthetic_fixture(fs::path(pl_workdir) / "fixture", cfg.grid, pl_noise, pl_jitter,
                                                       pl_seed);
                train = f.train_image;
                test = f.test_image;
                truth = f.truth_file;
            } else if (train.empty() || test.empty() || truth.empty()) {
                throw Error(ErrorKind::InvalidArgument,
                            "pipeline needs --train-image, --test-image and --truth (or --synthetic)");
            }
            const auto r = run_pipeline(train, test, truth, pl_workdir, cfg);
            std::cout << r.training_blobs << " training blobs, " << r.page_blobs << " page blobs, " << summary(r.report)
                      << "\n";
        } else if (*serve) {
            ReviewService service(cfg);
            service.bind();
            g_service = &service;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cerr << "serving " << cfg.workspace_dir.string() << " on http://" << cfg.serve_host << ":"
                      << service.port() << "\n";
            service.listen();
            g_service = nullptr;
        }
    } catch (const Error& e) {
        std::cerr << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
