#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "docpipe/segmentation.hpp"

namespace docpipe {

enum class DiffOp { Equal, Delete, Insert };

template <typename T>
struct DiffRun {
    DiffOp op = DiffOp::Equal;
    std::vector<T> items;
};

// Myers' O(ND) greedy shortest edit script. Adjacent operations of the same
// kind are merged into one run; deletions precede insertions between equal runs.
template <typename T>
std::vector<DiffRun<T>> myers_diff_seq(std::span<const T> a, std::span<const T> b);

template <typename T>
std::size_t matched_length(const std::vector<DiffRun<T>>& script) {
    std::size_t n = 0;
    for (const auto& run : script)
        if (run.op == DiffOp::Equal) n += run.items.size();
    return n;
}

// Rebuilds the target sequence from the source and a script.
template <typename T>
std::vector<T> apply_script(std::span<const T> a, const std::vector<DiffRun<T>>& script);

struct TextDiffRun {
    DiffOp op = DiffOp::Equal;
    std::string text;
};

// Byte-level diff of two strings.
std::vector<TextDiffRun> myers_diff(std::string_view a, std::string_view b);
std::string apply_script(std::string_view a, const std::vector<TextDiffRun>& script);

struct RecognizedText {
    std::vector<std::string> lines;

    std::string joined() const;
};

// Groups blobs into text lines: two blobs share a line when their vertical
// extents overlap by at least half the smaller height (transitively). Lines
// come out top to bottom, blobs left to right.
std::vector<std::vector<Blob>> order_blobs_into_lines(const std::vector<Blob>& blobs);

// labels maps blob id to recognized character. A space goes between
// neighbours whose gap exceeds space_factor times the median blob width.
RecognizedText render_text(const std::vector<std::vector<Blob>>& lines, const std::map<int, char>& labels,
                           double space_factor = 0.5);

struct DiffReport {
    std::size_t chars_original = 0;
    std::size_t chars_ocr = 0;
    std::size_t words_original = 0;
    std::size_t words_ocr = 0;
    std::size_t matched_chars = 0;
    std::size_t matched_words = 0;
    double char_match_pct = 0.0;
    double word_match_pct = 0.0;

    std::string char_match_display() const;
    std::string word_match_display() const;
};

// Percentage matched/total*100 truncated (not rounded) to two decimals.
std::string truncated_percent(std::size_t matched, std::size_t total);

std::vector<std::string> split_words(std::string_view text);

// Character statistics over Unicode code points, word statistics over
// whitespace-separated tokens; both relative to the original text.
DiffReport compare_texts(std::string_view original, std::string_view ocr);

nlohmann::json report_to_json(const DiffReport& r);

// --- template implementation ---

template <typename T>
std::vector<DiffRun<T>> myers_diff_seq(std::span<const T> a, std::span<const T> b) {
    const long n = static_cast<long>(a.size());
    const long m = static_cast<long>(b.size());
    const long max_d = n + m;
    const long offset = max_d + 1;
    std::vector<long> v(static_cast<std::size_t>(2 * max_d + 3), 0);
    std::vector<std::vector<long>> trace;

    long final_d = 0;
    bool done = false;
    for (long d = 0; d <= max_d && !done; ++d) {
        trace.push_back(v);
        for (long k = -d; k <= d; k += 2) {
            long x;
            if (k == -d || (k != d && v[offset + k - 1] < v[offset + k + 1]))
                x = v[offset + k + 1];
            else
                x = v[offset + k - 1] + 1;
            long y = x - k;
            while (x < n && y < m && a[x] == b[y]) {
                ++x;
                ++y;
            }
            v[offset + k] = x;
            if (x >= n && y >= m) {
                final_d = d;
                done = true;
                break;
            }
        }
    }

    // Walk the trace backwards, emitting single-element operations.
    std::vector<std::pair<DiffOp, long>> steps;  // (op, index into a or b)
    long x = n;
    long y = m;
    for (long d = final_d; d >= 0; --d) {
        const auto& vd = trace[static_cast<std::size_t>(d)];
        const long k = x - y;
        long prev_k;
        if (d == 0)
            prev_k = 0;
        else if (k == -d || (k != d && vd[offset + k - 1] < vd[offset + k + 1]))
            prev_k = k + 1;
        else
            prev_k = k - 1;
        const long prev_x = d == 0 ? 0 : vd[offset + prev_k];
        const long prev_y = prev_x - prev_k;
        while (x > prev_x && y > prev_y) {
            --x;
            --y;
            steps.emplace_back(DiffOp::Equal, x);
        }
        if (d > 0) {
            if (x == prev_x)
                steps.emplace_back(DiffOp::Insert, prev_y);
            else
                steps.emplace_back(DiffOp::Delete, prev_x);
        }
        x = prev_x;
        y = prev_y;
    }

    std::vector<DiffRun<T>> script;
    for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
        const auto [op, idx] = *it;
        const T& item = op == DiffOp::Insert ? b[static_cast<std::size_t>(idx)] : a[static_cast<std::size_t>(idx)];
        if (script.empty() || script.back().op != op) script.push_back({op, {}});
        script.back().items.push_back(item);
    }
    return script;
}

template <typename T>
std::vector<T> apply_script(std::span<const T> a, const std::vector<DiffRun<T>>& script) {
    std::vector<T> out;
    std::size_t pos = 0;
    for (const auto& run : script) {
        switch (run.op) {
            case DiffOp::Equal:
                out.insert(out.end(), a.begin() + static_cast<std::ptrdiff_t>(pos),
                           a.begin() + static_cast<std::ptrdiff_t>(pos + run.items.size()));
                pos += run.items.size();
                break;
            case DiffOp::Delete:
                pos += run.items.size();
                break;
            case DiffOp::Insert:
                out.insert(out.end(), run.items.begin(), run.items.end());
                break;
        }
    }
    return out;
}

}  // namespace docpipe
