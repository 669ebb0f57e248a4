#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include <boost/multiprecision/cpp_int.hpp>

#include "docpipe/error.hpp"
#include "docpipe/textclass.hpp"

using namespace docpipe;
namespace fs = std::filesystem;
using boost::multiprecision::cpp_rational;

namespace {

Document doc(std::string id, std::string text, std::string label) { return {std::move(id), std::move(text), std::move(label)}; }

std::vector<Document> cat_dog() { return {doc("1", "cat cat fish", "A"), doc("2", "dog dog fish", "B")}; }

fs::path write_temp(const std::string& name, const std::string& contents) {
    const auto path = fs::temp_directory_path() / ("docpipe_tc_" + name);
    std::ofstream(path, std::ios::binary) << contents;
    return path;
}

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::InvalidArgument;
}

// Exact posteriors from counts taken straight from the documents.
std::map<std::string, cpp_rational> rational_posteriors(const std::vector<Document>& train,
                                                        const std::vector<std::string>& query) {
    std::map<std::string, std::map<std::string, long>> counts;
    std::map<std::string, long> totals, docs_per_class;
    std::set<std::string> vocab;
    for (const auto& d : train) {
        ++docs_per_class[*d.label];
        for (const auto& t : tokenize(d.text)) {
            ++counts[*d.label][t];
            ++totals[*d.label];
            vocab.insert(t);
        }
    }
    const long v = static_cast<long>(vocab.size());
    std::map<std::string, cpp_rational> joint;
    cpp_rational sum = 0;
    for (const auto& [label, n] : docs_per_class) {
        cpp_rational p(n, static_cast<long>(train.size()));
        for (const auto& t : query)
            if (vocab.count(t)) p *= cpp_rational(counts[label][t] + 1, totals[label] + v);
        joint[label] = p;
        sum += p;
    }
    for (auto& [label, p] : joint) p /= sum;
    return joint;
}

std::vector<Document> random_corpus(std::mt19937& rng) {
    const std::vector<std::string> words{"alpha", "beta", "gamma", "delta", "eps", "zeta", "eta", "theta"};
    std::vector<Document> docs;
    const int n = 2 + static_cast<int>(rng() % 4);
    for (int i = 0; i < n; ++i) {
        std::string text;
        for (int w = 0; w < 1 + static_cast<int>(rng() % 6); ++w) text += words[rng() % words.size()] + " ";
        docs.push_back(doc(std::to_string(i), text, i < 2 ? std::string(1, "PQ"[i]) : std::string(1, "PQR"[rng() % 3])));
    }
    return docs;
}

double sum(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s;
}

}  // namespace

TEST_CASE("parse_smart") {
    const auto path = write_temp("two.txt", ".I 1\n.T\nTitle here\n.W\nhello world\n.X\n1 2 3\n.I 2\n.W\nfoo\n");
    const auto docs = parse_smart(path, "cisi");
    REQUIRE(docs.size() == 2);
    CHECK(docs[0].doc_id == "1");
    CHECK(docs[0].text == "hello world");
    CHECK(docs[1].text == "foo");
    CHECK(docs[1].label == "cisi");

    CHECK(parse_smart(write_temp("empty.txt", "")).empty());
    CHECK(kind_of([] { parse_smart(write_temp("dup.txt", ".I 1\n.I 1\n")); }) == ErrorKind::FormatError);
    CHECK(kind_of([] { parse_smart(write_temp("early.txt", "stray text\n.I 1\n")); }) == ErrorKind::FormatError);
    CHECK(kind_of([] { parse_smart("/nonexistent/smart.txt"); }) == ErrorKind::FileNotFound);
}

TEST_CASE("load_text_directory") {
    const auto dir = fs::temp_directory_path() / "docpipe_tc_dir";
    fs::create_directories(dir);
    std::ofstream(dir / "b.txt") << "second";
    std::ofstream(dir / "a.txt") << "first";
    const auto docs = load_text_directory(dir, "x");
    REQUIRE(docs.size() == 2);
    CHECK(docs[0].doc_id == "a.txt");
    CHECK(docs[0].text == "first");
    CHECK(docs[1].label == "x");
    fs::remove_all(dir);
}

TEST_CASE("tokenize") {
    CHECK(tokenize("Cat, cat; DOG!") == std::vector<std::string>{"cat", "cat", "dog"});
    CHECK(tokenize("a I x").empty());
    CHECK(tokenize("e-mail 2021") == std::vector<std::string>{"mail"});
    CHECK(tokenize("the cat and the dog", true) == std::vector<std::string>{"cat", "dog"});
    CHECK(tokenize("caf\xc3\xa9s") == std::vector<std::string>{"caf"});
}

TEST_CASE("significant_words") {
    CHECK(significant_words(tokenize("the cat sat on the mat the end"), 2) == std::vector<std::string>{"the", "cat"});
    CHECK(significant_words({"bb", "aa", "bb", "cc", "aa"}, 10) == std::vector<std::string>{"bb", "aa", "cc"});
    CHECK(significant_words({"xx", "yy", "zz"}, 5) == std::vector<std::string>{"xx", "yy", "zz"});
    CHECK(significant_words({}, 5).empty());
    CHECK_THROWS_AS(significant_words({"xx"}, 0), Error);
}

TEST_CASE("feature mode strings") {
    CHECK(to_string(FeatureMode::full_bag()) == "full_bag");
    CHECK(to_string(FeatureMode::significant(5)) == "significant_k(5)");
    CHECK(parse_feature_mode("significant_k(12)") == FeatureMode::significant(12));
    CHECK(parse_feature_mode("full_bag") == FeatureMode::full_bag());
    for (const char* bad : {"significant_k()", "significant_k(0)", "significant_k(3", "bag", ""})
        CHECK_THROWS_AS(parse_feature_mode(bad), Error);
}

TEST_CASE("train_nb counts") {
    const auto priors = train_nb({doc("1", "xx", "A"), doc("2", "yy", "A"), doc("3", "zz", "A"), doc("4", "ww", "B")});
    CHECK(std::exp(priors.log_priors[0]) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(std::exp(priors.log_priors[1]) == doctest::Approx(0.25).epsilon(1e-15));

    const auto m = train_nb(cat_dog());
    CHECK(m.classes == std::vector<std::string>{"A", "B"});
    CHECK(m.vocab == std::vector<std::string>{"cat", "dog", "fish"});
    CHECK(m.word_counts[0] == std::vector<std::int64_t>{2, 0, 1});
    CHECK(m.word_counts[1] == std::vector<std::int64_t>{0, 2, 1});
    CHECK(m.class_totals == std::vector<std::int64_t>{3, 3});

    const auto mirrored = train_nb({doc("1", "red red blue", "X"), doc("2", "blue blue red", "Y")});
    const auto r = classify(mirrored, {});
    CHECK(r.posteriors[0] == r.posteriors[1]);
    CHECK(classify(mirrored, {"red"}).posteriors[0] == classify(mirrored, {"blue"}).posteriors[1]);
}

TEST_CASE("classes are ordered by name") {
    const auto m = train_nb({doc("1", "xx", "zeta"), doc("2", "yy", "alpha")});
    CHECK(m.classes == std::vector<std::string>{"alpha", "zeta"});
}

TEST_CASE("train_nb errors") {
    CHECK(kind_of([] { train_nb({}); }) == ErrorKind::EmptyCorpus);
    CHECK(kind_of([] { train_nb({doc("1", "xx", "A"), doc("2", "yy", "A")}); }) == ErrorKind::SingleClass);
}

TEST_CASE("classify the cat/dog example") {
    const auto m = train_nb(cat_dog());
    const auto r = classify(m, {"cat", "fish"});
    CHECK(r.label == "A");
    CHECK(std::abs(r.posteriors[0] - 0.75) <= 1e-12);
    CHECK(std::abs(sum(r.posteriors) - 1.0) <= 1e-9);

    const auto empty = classify(m, {});
    CHECK(empty.posteriors[0] == doctest::Approx(0.5));
    CHECK(empty.label == "A");
    const auto oov = classify(m, {"zebra", "yak"});
    CHECK(oov.posteriors == empty.posteriors);
    CHECK(classify_text(m, "Cat! fish.").posteriors == r.posteriors);
}

TEST_CASE("classify agrees with exact rational arithmetic") {
    std::mt19937 rng(99);
    const std::vector<std::string> words{"alpha", "beta", "gamma", "delta", "eps", "zeta", "eta", "theta", "omega"};
    for (int t = 0; t < 100; ++t) {
        const auto train = random_corpus(rng);
        const auto model = train_nb(train);
        std::vector<std::string> query;
        for (int i = 0; i < static_cast<int>(rng() % 6); ++i) query.push_back(words[rng() % words.size()]);
        const auto exact = rational_posteriors(train, query);
        const auto r = classify(model, query);
        REQUIRE(r.posteriors.size() == exact.size());
        std::size_t c = 0;
        for (const auto& [label, p] : exact) {
            CHECK(model.classes[c] == label);
            CHECK(std::abs(r.posteriors[c] - static_cast<double>(p)) <= 1e-12);
            ++c;
        }
        CHECK(std::abs(sum(r.posteriors) - 1.0) <= 1e-9);
    }
}

TEST_CASE("model properties") {
    std::mt19937 rng(5);
    for (int t = 0; t < 30; ++t) {
        auto train = random_corpus(rng);
        const auto model = train_nb(train);
        std::shuffle(train.begin(), train.end(), rng);
        CHECK(train_nb(train) == model);

        const std::vector<std::string> query{"alpha", "gamma"};
        auto padded = query;
        padded.push_back("unseenword");
        CHECK(classify(model, padded).posteriors == classify(model, query).posteriors);
    }

    // Duplicating a document in its own class raises that class's share.
    const std::vector<Document> base{doc("1", "apple pear", "F"), doc("2", "carrot leek", "V"), doc("3", "apple leek", "V")};
    auto dup = base;
    dup.push_back(doc("4", "apple pear", "F"));
    const std::vector<std::string> q{"apple", "pear"};
    CHECK(classify(train_nb(dup), q).log_posteriors[0] >= classify(train_nb(base), q).log_posteriors[0]);
}

TEST_CASE("significant_k mode counts each selected word once") {
    const auto m = train_nb({doc("1", "cat cat cat fish", "A"), doc("2", "dog fish", "B")}, FeatureMode::significant(1));
    CHECK(m.vocab == std::vector<std::string>{"cat", "dog"});
    CHECK(m.class_totals == std::vector<std::int64_t>{1, 1});
}

TEST_CASE("evaluate_nb") {
    const auto m = train_nb(cat_dog());
    const std::vector<Document> test{doc("t1", "cat", "A"), doc("t2", "dog dog", "B"), doc("t3", "cat fish", "B"),
                                     doc("t4", "fish dog", "B")};
    const auto ev = evaluate_nb(m, test, FeatureMode::full_bag());
    CHECK(ev.n_test == 4);
    CHECK(ev.accuracy == 0.75);
    CHECK(ev.confusion == std::vector<std::vector<std::int64_t>>{{1, 0}, {1, 2}});

    const auto one_wrong = evaluate_nb(m, {doc("t", "dog", "A")}, FeatureMode::full_bag());
    CHECK(one_wrong.accuracy == 0.0);

    CHECK(kind_of([&] { evaluate_nb(m, {}, FeatureMode::full_bag()); }) == ErrorKind::EmptyTestSet);
    CHECK(kind_of([&] { evaluate_nb(m, {doc("t", "cat", "Z")}, FeatureMode::full_bag()); }) ==
          ErrorKind::InvalidArgument);
}

TEST_CASE("split_corpus is a seeded permutation") {
    std::vector<Document> docs;
    for (int i = 0; i < 50; ++i) docs.push_back(doc(std::to_string(i), "tt", i % 2 ? "A" : "B"));
    const auto a = split_corpus(docs, 30, 15, 2021);
    const auto b = split_corpus(docs, 30, 15, 2021);
    CHECK(a.train.size() == 30);
    CHECK(a.test.size() == 15);
    std::set<std::string> ids;
    for (const auto& d : a.train) ids.insert(d.doc_id);
    for (const auto& d : a.test) ids.insert(d.doc_id);
    CHECK(ids.size() == 45);
    for (std::size_t i = 0; i < a.train.size(); ++i) CHECK(a.train[i].doc_id == b.train[i].doc_id);

    const auto short_split = split_corpus(docs, 40, 20, 1);
    CHECK(short_split.test.size() == 10);
    const auto all_train = split_corpus(docs, 60, 1, 1);
    CHECK(all_train.train.size() == 50);
    CHECK(all_train.test.empty());
}

TEST_CASE("JSON round trips") {
    const auto m = train_nb(cat_dog(), FeatureMode::significant(3), true);
    CHECK(nb_model_from_json(nb_model_to_json(m)) == m);
    const auto docs = cat_dog();
    const auto back = corpus_from_json(corpus_to_json(docs));
    REQUIRE(back.size() == 2);
    CHECK(back[1].doc_id == "2");
    CHECK(back[1].text == "dog dog fish");
    CHECK(back[1].label == "B");
    CHECK_THROWS_AS(nb_model_from_json(nlohmann::json::object()), Error);
}
