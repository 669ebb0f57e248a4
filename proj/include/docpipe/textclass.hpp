#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace docpipe {

struct Document {
    std::string doc_id;
    std::string text;
    std::optional<std::string> label;
};

// SMART dot-format: ".I <id>" starts a document, the body is the ".W"
// section; .T/.A/.B/.X and other sections are skipped.
std::vector<Document> parse_smart(const std::filesystem::path& path,
                                  const std::optional<std::string>& label = std::nullopt);

// One document per regular file (sorted by file name); doc_id is the file name.
std::vector<Document> load_text_directory(const std::filesystem::path& dir,
                                          const std::optional<std::string>& label = std::nullopt);

const std::vector<std::string>& english_stopwords();

// Lowercased maximal runs of ASCII letters, at least two letters long.
std::vector<std::string> tokenize(std::string_view text, bool remove_stopwords = false);

// The k most frequent distinct tokens, ties broken by first occurrence.
std::vector<std::string> significant_words(const std::vector<std::string>& tokens, int k = 5);

struct FeatureMode {
    enum class Kind { FullBag, SignificantK };
    Kind kind = Kind::FullBag;
    int k = 5;

    static FeatureMode full_bag() { return {Kind::FullBag, 0}; }
    static FeatureMode significant(int k) { return {Kind::SignificantK, k}; }

    friend bool operator==(const FeatureMode&, const FeatureMode&) = default;
};

// "full_bag" or "significant_k(<k>)".
std::string to_string(const FeatureMode& mode);
FeatureMode parse_feature_mode(std::string_view text);

std::vector<std::string> select_features(const std::vector<std::string>& tokens, const FeatureMode& mode);

struct NBModel {
    std::vector<std::string> classes;
    std::vector<double> log_priors;
    std::vector<std::string> vocab;                     // sorted, unique
    std::vector<std::vector<std::int64_t>> word_counts;  // [class][vocab index]
    std::vector<std::int64_t> class_totals;
    std::vector<std::int64_t> doc_counts;
    FeatureMode feature_mode;
    bool stopwords = false;

    // Index of word in vocab, or -1.
    long vocab_index(const std::string& word) const;

    friend bool operator==(const NBModel&, const NBModel&) = default;
};

struct ClassificationResult {
    std::string label;
    std::size_t index = 0;
    std::vector<double> log_posteriors;
    std::vector<double> posteriors;
};

// Multinomial event model with add-one smoothing. Classes are ordered by name.
NBModel train_nb(const std::vector<Document>& docs, const FeatureMode& mode = FeatureMode::full_bag(),
                 bool remove_stopwords = false);

// Tokens outside the vocabulary are skipped.
ClassificationResult classify(const NBModel& model, const std::vector<std::string>& tokens);

// Tokenizes and selects features the way the model was trained.
ClassificationResult classify_text(const NBModel& model, std::string_view text);

struct NbEvaluation {
    double accuracy = 0.0;
    std::vector<std::vector<std::int64_t>> confusion;  // [true][predicted]
    std::size_t n_test = 0;
};

NbEvaluation evaluate_nb(const NBModel& model, const std::vector<Document>& test,
                         const FeatureMode& mode);

// Deterministic shuffle (Fisher-Yates over mt19937_64) then the first
// n_train documents train and the next n_test (or what is left) test.
struct CorpusSplit {
    std::vector<Document> train;
    std::vector<Document> test;
};
CorpusSplit split_corpus(std::vector<Document> docs, std::size_t n_train, std::size_t n_test,
                         std::uint64_t seed);

nlohmann::json nb_model_to_json(const NBModel& model);
NBModel nb_model_from_json(const nlohmann::json& j);

nlohmann::json corpus_to_json(const std::vector<Document>& docs);
std::vector<Document> corpus_from_json(const nlohmann::json& j);

}  // namespace docpipe
