#include "docpipe/text_diff.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <tuple>

#include "docpipe/error.hpp"

namespace docpipe {

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Lenient UTF-8 decoder: malformed bytes become one code point each.
std::u32string decode_utf8(std::string_view s) {
    std::u32string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        const auto c = static_cast<unsigned char>(s[i]);
        int extra = c >= 0xf0 && c < 0xf8 ? 3 : c >= 0xe0 ? 2 : c >= 0xc0 ? 1 : 0;
        if (c >= 0xf8) extra = 0;
        char32_t cp = extra == 0 ? c : c & (0x3f >> extra);
        bool ok = i + extra < s.size() || extra == 0;
        for (int k = 1; ok && k <= extra; ++k) {
            const auto cc = static_cast<unsigned char>(s[i + k]);
            if ((cc & 0xc0) != 0x80) ok = false;
            cp = (cp << 6) | (cc & 0x3f);
        }
        if (!ok) {
            out.push_back(c);
            ++i;
            continue;
        }
        out.push_back(cp);
        i += extra + 1;
    }
    return out;
}

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

}  // namespace

std::vector<TextDiffRun> myers_diff(std::string_view a, std::string_view b) {
    const auto runs = myers_diff_seq<char>(std::span<const char>(a.data(), a.size()),
                                           std::span<const char>(b.data(), b.size()));
    std::vector<TextDiffRun> out;
    out.reserve(runs.size());
    for (const auto& run : runs) out.push_back({run.op, std::string(run.items.begin(), run.items.end())});
    return out;
}

std::string apply_script(std::string_view a, const std::vector<TextDiffRun>& script) {
    std::vector<DiffRun<char>> runs;
    for (const auto& run : script) runs.push_back({run.op, {run.text.begin(), run.text.end()}});
    const auto out = apply_script<char>(std::span<const char>(a.data(), a.size()), runs);
    return {out.begin(), out.end()};
}

std::string RecognizedText::joined() const {
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i) out += '\n';
        out += lines[i];
    }
    return out;
}

std::vector<std::vector<Blob>> order_blobs_into_lines(const std::vector<Blob>& blobs) {
    UnionFind uf(blobs.size());
    for (std::size_t i = 0; i < blobs.size(); ++i) {
        for (std::size_t j = i + 1; j < blobs.size(); ++j) {
            const Blob& a = blobs[i];
            const Blob& b = blobs[j];
            const int overlap = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
            // overlap >= min(h)/2, kept in integers
            if (overlap > 0 && 2 * overlap >= std::min(a.h, b.h)) uf.unite(i, j);
        }
    }

    std::map<std::size_t, std::vector<Blob>> groups;
    for (std::size_t i = 0; i < blobs.size(); ++i) groups[uf.find(i)].push_back(blobs[i]);

    std::vector<std::vector<Blob>> lines;
    for (auto& [root, line] : groups) {
        std::sort(line.begin(), line.end(),
                  [](const Blob& a, const Blob& b) { return std::tie(a.x, a.y, a.id) < std::tie(b.x, b.y, b.id); });
        lines.push_back(std::move(line));
    }
    auto mean_top = [](const std::vector<Blob>& line) {
        double s = 0.0;
        for (const Blob& b : line) s += b.y;
        return s / static_cast<double>(line.size());
    };
    std::stable_sort(lines.begin(), lines.end(), [&](const auto& a, const auto& b) {
        const double ta = mean_top(a);
        const double tb = mean_top(b);
        if (ta != tb) return ta < tb;
        return a.front().x < b.front().x;
    });
    return lines;
}

RecognizedText render_text(const std::vector<std::vector<Blob>>& lines, const std::map<int, char>& labels,
                           double space_factor) {
    std::vector<int> widths;
    for (const auto& line : lines)
        for (const Blob& b : line) widths.push_back(b.w);
    double median = 0.0;
    if (!widths.empty()) {
        std::sort(widths.begin(), widths.end());
        const std::size_t mid = widths.size() / 2;
        median = widths.size() % 2 ? widths[mid] : (widths[mid - 1] + widths[mid]) / 2.0;
    }
    const double min_gap = space_factor * median;

    RecognizedText text;
    for (const auto& line : lines) {
        std::string s;
        for (std::size_t i = 0; i < line.size(); ++i) {
            const auto it = labels.find(line[i].id);
            if (it == labels.end())
                throw Error(ErrorKind::InvalidArgument, "no prediction for blob " + std::to_string(line[i].id));
            if (i > 0) {
                const Blob& prev = line[i - 1];
                const int gap = line[i].x - (prev.x + prev.w);
                if (gap > min_gap) s += ' ';
            }
            s += it->second;
        }
        text.lines.push_back(std::move(s));
    }
    return text;
}

std::string truncated_percent(std::size_t matched, std::size_t total) {
    if (total == 0) return "0.00";
    const unsigned long long hundredths = static_cast<unsigned long long>(matched) * 10000ULL / total;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%llu.%02llu", hundredths / 100, hundredths % 100);
    return buf;
}

std::string DiffReport::char_match_display() const { return truncated_percent(matched_chars, chars_original); }

std::string DiffReport::word_match_display() const {
    if (words_original == 0) return words_ocr == 0 ? "100.00" : "0.00";
    return truncated_percent(matched_words, words_original);
}

std::vector<std::string> split_words(std::string_view text) {
    std::vector<std::string> words;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space(text[i])) ++i;
        const std::size_t start = i;
        while (i < text.size() && !is_space(text[i])) ++i;
        if (i > start) words.emplace_back(text.substr(start, i - start));
    }
    return words;
}

DiffReport compare_texts(std::string_view original, std::string_view ocr) {
    const std::u32string a = decode_utf8(original);
    const std::u32string b = decode_utf8(ocr);
    if (a.empty()) throw Error(ErrorKind::EmptyOriginal, "original text is empty");

    DiffReport r;
    r.chars_original = a.size();
    r.chars_ocr = b.size();
    r.matched_chars = matched_length(myers_diff_seq<char32_t>(a, b));

    const auto wa = split_words(original);
    const auto wb = split_words(ocr);
    r.words_original = wa.size();
    r.words_ocr = wb.size();
    r.matched_words = matched_length(myers_diff_seq<std::string>(wa, wb));

    r.char_match_pct = 100.0 * static_cast<double>(r.matched_chars) / static_cast<double>(r.chars_original);
    if (r.words_original == 0)
        r.word_match_pct = r.words_ocr == 0 ? 100.0 : 0.0;
    else
        r.word_match_pct = 100.0 * static_cast<double>(r.matched_words) / static_cast<double>(r.words_original);
    return r;
}

nlohmann::json report_to_json(const DiffReport& r) {
    return {{"chars_original", r.chars_original},
            {"chars_ocr", r.chars_ocr},
            {"words_original", r.words_original},
            {"words_ocr", r.words_ocr},
            {"matched_chars", r.matched_chars},
            {"matched_words", r.matched_words},
            {"char_match_pct", r.char_match_pct},
            {"word_match_pct", r.word_match_pct},
            {"char_match_display", r.char_match_display()},
            {"word_match_display", r.word_match_display()}};
}

}  // namespace docpipe
