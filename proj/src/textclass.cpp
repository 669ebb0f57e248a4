#include "docpipe/textclass.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "docpipe/error.hpp"

namespace docpipe {

namespace {

bool is_section_marker(const std::string& line) {
    return line.size() >= 2 && line[0] == '.' && std::isupper(static_cast<unsigned char>(line[1])) &&
           (line.size() == 2 || std::isspace(static_cast<unsigned char>(line[2])));
}

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

double log_sum_exp(const std::vector<double>& v) {
    const double mx = *std::max_element(v.begin(), v.end());
    double s = 0.0;
    for (double x : v) s += std::exp(x - mx);
    return mx + std::log(s);
}

}  // namespace

std::vector<Document> parse_smart(const std::filesystem::path& path, const std::optional<std::string>& label) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::FileNotFound, "no such file: " + path.string());

    std::vector<Document> docs;
    std::set<std::string> ids;
    bool in_body = false;
    std::string body;
    std::size_t line_no = 0;
    auto flush = [&] {
        if (!docs.empty()) {
            docs.back().text = trim(body);
            body.clear();
        }
    };

    for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (is_section_marker(line)) {
            const char section = line[1];
            in_body = false;
            if (section == 'I') {
                flush();
                const std::string id = trim(line.substr(2));
                if (id.empty())
                    throw Error(ErrorKind::FormatError, path.string() + ":" + std::to_string(line_no) + ": .I without id");
                if (!ids.insert(id).second)
                    throw Error(ErrorKind::FormatError,
                                path.string() + ":" + std::to_string(line_no) + ": duplicate id " + id);
                docs.push_back({id, "", label});
            } else if (docs.empty()) {
                throw Error(ErrorKind::FormatError,
                            path.string() + ":" + std::to_string(line_no) + ": section before any .I");
            } else if (section == 'W') {
                in_body = true;
            }
            continue;
        }
        if (docs.empty()) {
            if (trim(line).empty()) continue;
            throw Error(ErrorKind::FormatError, path.string() + ":" + std::to_string(line_no) + ": text before any .I");
        }
        if (in_body) {
            if (!body.empty()) body += '\n';
            body += line;
        }
    }
    flush();
    return docs;
}

std::vector<Document> load_text_directory(const std::filesystem::path& dir, const std::optional<std::string>& label) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) throw Error(ErrorKind::FileNotFound, "no such directory: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    std::vector<Document> docs;
    for (const auto& f : files) {
        std::ifstream in(f, std::ios::binary);
        if (!in) throw Error(ErrorKind::IoError, "cannot open " + f.string());
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        docs.push_back({f.filename().string(), std::move(text), label});
    }
    return docs;
}

const std::vector<std::string>& english_stopwords() {
    static const std::vector<std::string> words = {
        "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are", "as", "at",
        "be", "because", "been", "before", "being", "below", "between", "both", "but", "by", "can", "could",
        "did", "do", "does", "doing", "down", "during", "each", "few", "for", "from", "further", "had",
        "has", "have", "having", "he", "her", "here", "hers", "herself", "him", "himself", "his", "how",
        "if", "in", "into", "is", "it", "its", "itself", "just", "me", "more", "most", "my", "myself",
        "no", "nor", "not", "now", "of", "off", "on", "once", "only", "or", "other", "our", "ours",
        "ourselves", "out", "over", "own", "same", "she", "should", "so", "some", "such", "than", "that",
        "the", "their", "theirs", "them", "themselves", "then", "there", "these", "they", "this", "those",
        "through", "to", "too", "under", "until", "up", "very", "was", "we", "were", "what", "when",
        "where", "which", "while", "who", "whom", "why", "will", "with", "would", "you", "your", "yours",
        "yourself", "yourselves"};
    return words;
}

std::vector<std::string> tokenize(std::string_view text, bool remove_stopwords) {
    static const std::unordered_set<std::string> stop(english_stopwords().begin(), english_stopwords().end());
    std::vector<std::string> tokens;
    std::string current;
    auto emit = [&] {
        if (current.size() >= 2 && !(remove_stopwords && stop.count(current))) tokens.push_back(current);
        current.clear();
    };
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (c < 0x80 && std::isalpha(c))
            current += static_cast<char>(std::tolower(c));
        else
            emit();
    }
    emit();
    return tokens;
}

std::vector<std::string> significant_words(const std::vector<std::string>& tokens, int k) {
    if (k < 1) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
    std::unordered_map<std::string, std::size_t> slot;
    std::vector<std::pair<std::string, long>> counts;  // first-occurrence order
    for (const auto& t : tokens) {
        auto [it, inserted] = slot.emplace(t, counts.size());
        if (inserted) counts.emplace_back(t, 0);
        ++counts[it->second].second;
    }
    std::stable_sort(counts.begin(), counts.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < counts.size() && i < static_cast<std::size_t>(k); ++i) out.push_back(counts[i].first);
    return out;
}

std::string to_string(const FeatureMode& mode) {
    if (mode.kind == FeatureMode::Kind::FullBag) return "full_bag";
    return "significant_k(" + std::to_string(mode.k) + ")";
}

FeatureMode parse_feature_mode(std::string_view text) {
    if (text == "full_bag") return FeatureMode::full_bag();
    const std::string_view prefix = "significant_k(";
    if (text.substr(0, prefix.size()) == prefix && text.size() > prefix.size() + 1 && text.back() == ')') {
        const auto digits = text.substr(prefix.size(), text.size() - prefix.size() - 1);
        int k = 0;
        auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
        if (ec == std::errc{} && p == digits.data() + digits.size() && k >= 1) return FeatureMode::significant(k);
    }
    throw Error(ErrorKind::InvalidArgument,
                "feature mode must be full_bag or significant_k(<k>), got '" + std::string(text) + "'");
}

std::vector<std::string> select_features(const std::vector<std::string>& tokens, const FeatureMode& mode) {
    if (mode.kind == FeatureMode::Kind::FullBag) return tokens;
    return significant_words(tokens, mode.k);
}

long NBModel::vocab_index(const std::string& word) const {
    const auto it = std::lower_bound(vocab.begin(), vocab.end(), word);
    if (it == vocab.end() || *it != word) return -1;
    return static_cast<long>(it - vocab.begin());
}

NBModel train_nb(const std::vector<Document>& docs, const FeatureMode& mode, bool remove_stopwords) {
    if (docs.empty()) throw Error(ErrorKind::EmptyCorpus, "no training documents");

    std::vector<std::vector<std::string>> features;
    std::set<std::string> class_set;
    std::set<std::string> vocab_set;
    for (const auto& d : docs) {
        if (!d.label) throw Error(ErrorKind::InvalidArgument, "training document " + d.doc_id + " has no label");
        class_set.insert(*d.label);
        features.push_back(select_features(tokenize(d.text, remove_stopwords), mode));
        vocab_set.insert(features.back().begin(), features.back().end());
    }
    if (class_set.size() < 2)
        throw Error(ErrorKind::SingleClass, "need at least two classes, found " + std::to_string(class_set.size()));

    NBModel model;
    model.classes.assign(class_set.begin(), class_set.end());
    model.vocab.assign(vocab_set.begin(), vocab_set.end());
    model.feature_mode = mode;
    model.stopwords = remove_stopwords;
    const std::size_t n_classes = model.classes.size();
    model.word_counts.assign(n_classes, std::vector<std::int64_t>(model.vocab.size(), 0));
    model.class_totals.assign(n_classes, 0);
    model.doc_counts.assign(n_classes, 0);

    for (std::size_t i = 0; i < docs.size(); ++i) {
        const auto c = static_cast<std::size_t>(
            std::lower_bound(model.classes.begin(), model.classes.end(), *docs[i].label) - model.classes.begin());
        ++model.doc_counts[c];
        for (const auto& t : features[i]) {
            ++model.word_counts[c][static_cast<std::size_t>(model.vocab_index(t))];
            ++model.class_totals[c];
        }
    }
    for (std::size_t c = 0; c < n_classes; ++c)
        model.log_priors.push_back(std::log(static_cast<double>(model.doc_counts[c]) / static_cast<double>(docs.size())));
    return model;
}

ClassificationResult classify(const NBModel& model, const std::vector<std::string>& tokens) {
    const std::size_t n_classes = model.classes.size();
    const double vocab_size = static_cast<double>(model.vocab.size());
    std::vector<double> scores = model.log_priors;
    for (const auto& t : tokens) {
        const long idx = model.vocab_index(t);
        if (idx < 0) continue;
        for (std::size_t c = 0; c < n_classes; ++c) {
            const double count = static_cast<double>(model.word_counts[c][static_cast<std::size_t>(idx)]);
            scores[c] += std::log((count + 1.0) / (static_cast<double>(model.class_totals[c]) + vocab_size));
        }
    }
    ClassificationResult r;
    const double norm = log_sum_exp(scores);
    for (double s : scores) {
        r.log_posteriors.push_back(s - norm);
        r.posteriors.push_back(std::exp(s - norm));
    }
    r.index = static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
    r.label = model.classes[r.index];
    return r;
}

ClassificationResult classify_text(const NBModel& model, std::string_view text) {
    return classify(model, select_features(tokenize(text, model.stopwords), model.feature_mode));
}

NbEvaluation evaluate_nb(const NBModel& model, const std::vector<Document>& test, const FeatureMode& mode) {
    if (test.empty()) throw Error(ErrorKind::EmptyTestSet, "no test documents");
    const std::size_t n_classes = model.classes.size();
    NbEvaluation ev;
    ev.confusion.assign(n_classes, std::vector<std::int64_t>(n_classes, 0));
    std::size_t correct = 0;
    for (const auto& d : test) {
        if (!d.label) throw Error(ErrorKind::InvalidArgument, "test document " + d.doc_id + " has no label");
        const auto it = std::find(model.classes.begin(), model.classes.end(), *d.label);
        if (it == model.classes.end())
            throw Error(ErrorKind::InvalidArgument, "test document " + d.doc_id + " has unknown class " + *d.label);
        const auto truth = static_cast<std::size_t>(it - model.classes.begin());
        const auto r = classify(model, select_features(tokenize(d.text, model.stopwords), mode));
        ++ev.confusion[truth][r.index];
        if (r.index == truth) ++correct;
    }
    ev.n_test = test.size();
    ev.accuracy = static_cast<double>(correct) / static_cast<double>(test.size());
    return ev;
}

CorpusSplit split_corpus(std::vector<Document> docs, std::size_t n_train, std::size_t n_test, std::uint64_t seed) {
    // Fisher-Yates with rejection-sampled indices.
    std::mt19937_64 rng(seed);
    auto bounded = [&](std::uint64_t bound) {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t r;
        do r = rng(); while (r >= limit);
        return r % bound;
    };
    for (std::size_t i = docs.size(); i > 1; --i) std::swap(docs[i - 1], docs[bounded(i)]);

    CorpusSplit split;
    const std::size_t train_end = std::min(n_train, docs.size());
    const std::size_t test_end = std::min(train_end + n_test, docs.size());
    split.train.assign(std::make_move_iterator(docs.begin()),
                       std::make_move_iterator(docs.begin() + static_cast<std::ptrdiff_t>(train_end)));
    split.test.assign(std::make_move_iterator(docs.begin() + static_cast<std::ptrdiff_t>(train_end)),
                      std::make_move_iterator(docs.begin() + static_cast<std::ptrdiff_t>(test_end)));
    return split;
}

nlohmann::json nb_model_to_json(const NBModel& model) {
    return {{"classes", model.classes},
            {"priors", model.log_priors},
            {"vocab", model.vocab},
            {"counts", model.word_counts},
            {"class_totals", model.class_totals},
            {"doc_counts", model.doc_counts},
            {"feature_mode", to_string(model.feature_mode)},
            {"stopwords", model.stopwords}};
}

NBModel nb_model_from_json(const nlohmann::json& j) {
    NBModel m;
    try {
        m.classes = j.at("classes").get<std::vector<std::string>>();
        m.log_priors = j.at("priors").get<std::vector<double>>();
        m.vocab = j.at("vocab").get<std::vector<std::string>>();
        m.word_counts = j.at("counts").get<std::vector<std::vector<std::int64_t>>>();
        m.class_totals = j.at("class_totals").get<std::vector<std::int64_t>>();
        m.doc_counts = j.at("doc_counts").get<std::vector<std::int64_t>>();
        m.feature_mode = parse_feature_mode(j.at("feature_mode").get<std::string>());
        m.stopwords = j.at("stopwords").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::FormatError, std::string("naive bayes model: ") + e.what());
    }
    const std::size_t n = m.classes.size();
    bool ok = n >= 2 && m.log_priors.size() == n && m.word_counts.size() == n && m.class_totals.size() == n &&
              m.doc_counts.size() == n && std::is_sorted(m.vocab.begin(), m.vocab.end()) &&
              std::adjacent_find(m.vocab.begin(), m.vocab.end()) == m.vocab.end();
    for (const auto& row : m.word_counts) ok = ok && row.size() == m.vocab.size();
    if (!ok) throw Error(ErrorKind::FormatError, "naive bayes model: inconsistent dimensions");
    return m;
}

nlohmann::json corpus_to_json(const std::vector<Document>& docs) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& d : docs)
        arr.push_back({{"doc_id", d.doc_id},
                       {"label", d.label ? nlohmann::json(*d.label) : nlohmann::json(nullptr)},
                       {"text", d.text}});
    return {{"documents", std::move(arr)}};
}

std::vector<Document> corpus_from_json(const nlohmann::json& j) {
    std::vector<Document> docs;
    try {
        for (const auto& d : j.at("documents")) {
            Document doc{d.at("doc_id").get<std::string>(), d.at("text").get<std::string>(), std::nullopt};
            if (!d.at("label").is_null()) doc.label = d.at("label").get<std::string>();
            docs.push_back(std::move(doc));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::FormatError, std::string("corpus: ") + e.what());
    }
    return docs;
}

}  // namespace docpipe
