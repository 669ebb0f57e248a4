#include "docpipe/segmentation.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <tuple>

#include "docpipe/error.hpp"

namespace docpipe {

namespace {

struct Component {
    Blob box;
    std::size_t first_pixel = 0;
};

bool box_inside(int x, int y, int w, int h, int page_w, int page_h) {
    return w >= 1 && h >= 1 && x >= 0 && y >= 0 &&
           static_cast<long long>(x) + w <= page_w && static_cast<long long>(y) + h <= page_h;
}

}  // namespace

std::vector<Blob> find_blobs(const BinaryImage& img, int min_area) {
    if (min_area < 1) throw Error(ErrorKind::InvalidArgument, "min_area must be >= 1");

    std::vector<std::uint8_t> seen(img.pixels.size(), 0);
    std::vector<Component> components;
    std::vector<std::size_t> stack;

    for (std::size_t start = 0; start < img.pixels.size(); ++start) {
        if (!img.pixels[start] || seen[start]) continue;
        seen[start] = 1;
        stack.assign(1, start);
        int min_x = std::numeric_limits<int>::max(), min_y = min_x;
        int max_x = -1, max_y = -1;
        long long area = 0;
        while (!stack.empty()) {
            const std::size_t idx = stack.back();
            stack.pop_back();
            const int px = static_cast<int>(idx % img.width);
            const int py = static_cast<int>(idx / img.width);
            ++area;
            min_x = std::min(min_x, px);
            max_x = std::max(max_x, px);
            min_y = std::min(min_y, py);
            max_y = std::max(max_y, py);
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int nx = px + dx;
                    const int ny = py + dy;
                    if (nx < 0 || ny < 0 || nx >= img.width || ny >= img.height) continue;
                    const std::size_t n = static_cast<std::size_t>(ny) * img.width + nx;
                    if (img.pixels[n] && !seen[n]) {
                        seen[n] = 1;
                        stack.push_back(n);
                    }
                }
            }
        }
        if (area < min_area) continue;
        Component c;
        c.box = {0, min_x, min_y, max_x - min_x + 1, max_y - min_y + 1, std::nullopt};
        c.first_pixel = start;
        components.push_back(c);
    }

    // Boxes can share a top-left corner (nested shapes); the first raster
    // pixel of each component makes the order total.
    std::sort(components.begin(), components.end(), [](const Component& a, const Component& b) {
        return std::tie(a.box.y, a.box.x, a.first_pixel) < std::tie(b.box.y, b.box.x, b.first_pixel);
    });
    std::vector<Blob> blobs;
    blobs.reserve(components.size());
    for (std::size_t i = 0; i < components.size(); ++i) {
        blobs.push_back(components[i].box);
        blobs.back().id = static_cast<int>(i);
    }
    return blobs;
}

std::vector<Blob> assign_grid_labels(const std::vector<Blob>& blobs, const GridConfig& cfg) {
    if (cfg.n_letters < 1 || static_cast<int>(cfg.alphabet.size()) != cfg.n_letters)
        throw Error(ErrorKind::InvalidArgument, "alphabet length must equal n_letters");
    const std::size_t capacity = static_cast<std::size_t>(cfg.n_letters) * cfg.n_samples;
    if (blobs.empty() || blobs.size() > capacity)
        throw Error(ErrorKind::GridMismatch, "found " + std::to_string(blobs.size()) +
                                                 " blobs for a grid of " + std::to_string(capacity));

    const bool along_columns = cfg.orientation == GridOrientation::LettersAlongColumns;
    std::vector<double> centers;
    centers.reserve(blobs.size());
    for (const Blob& b : blobs)
        centers.push_back(along_columns ? b.x + b.w / 2.0 : b.y + b.h / 2.0);

    const auto [lo_it, hi_it] = std::minmax_element(centers.begin(), centers.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    const int k = cfg.n_letters;
    std::vector<double> means(k);
    for (int i = 0; i < k; ++i)
        means[i] = k == 1 ? (lo + hi) / 2.0 : lo + (hi - lo) * i / (k - 1);

    std::vector<int> assignment(blobs.size(), 0);
    for (int iter = 0; iter < 50; ++iter) {
        for (std::size_t b = 0; b < centers.size(); ++b) {
            int best = 0;
            for (int i = 1; i < k; ++i)
                if (std::abs(centers[b] - means[i]) < std::abs(centers[b] - means[best])) best = i;
            assignment[b] = best;
        }
        std::vector<double> sums(k, 0.0);
        std::vector<int> counts(k, 0);
        for (std::size_t b = 0; b < centers.size(); ++b) {
            sums[assignment[b]] += centers[b];
            ++counts[assignment[b]];
        }
        for (int i = 0; i < k; ++i)
            if (counts[i] > 0) means[i] = sums[i] / counts[i];
    }

    std::vector<int> counts(k, 0);
    for (int a : assignment) ++counts[a];
    const auto bands = std::count_if(counts.begin(), counts.end(), [](int c) { return c > 0; });
    if (bands != k)
        throw Error(ErrorKind::GridMismatch, "found " + std::to_string(bands) + " bands, expected " +
                                                 std::to_string(k));

    std::vector<int> order(k);
    for (int i = 0; i < k; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return means[a] < means[b]; });
    std::vector<int> rank(k);
    for (int r = 0; r < k; ++r) rank[order[r]] = r;

    std::vector<Blob> out = blobs;
    for (std::size_t b = 0; b < out.size(); ++b) out[b].label = cfg.alphabet[rank[assignment[b]]];
    return out;
}

nlohmann::json manifest_to_json(const BlobManifest& m) {
    nlohmann::json blobs = nlohmann::json::array();
    for (const Blob& b : m.blobs) {
        nlohmann::json jb = {{"id", b.id}, {"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}};
        jb["label"] = b.label ? nlohmann::json(std::string(1, *b.label)) : nlohmann::json(nullptr);
        blobs.push_back(std::move(jb));
    }
    return {{"image_path", m.image_path},
            {"image_w", m.image_w},
            {"image_h", m.image_h},
            {"blobs", std::move(blobs)}};
}

BlobManifest manifest_from_json(const nlohmann::json& j) {
    auto fail = [](const std::string& field, const std::string& what) {
        throw Error(ErrorKind::SchemaError, field + ": " + what);
    };
    auto require_int = [&](const nlohmann::json& obj, const char* key, const std::string& where) {
        if (!obj.contains(key)) fail(where + key, "missing required field");
        const auto& v = obj.at(key);
        if (!v.is_number_integer()) fail(where + key, "must be an integer");
        const auto value = v.get<long long>();
        if (value < std::numeric_limits<int>::min() || value > std::numeric_limits<int>::max())
            fail(where + key, "out of range");
        return static_cast<int>(value);
    };

    if (!j.is_object()) fail("manifest", "must be a JSON object");
    BlobManifest m;
    if (!j.contains("image_path")) fail("image_path", "missing required field");
    if (!j.at("image_path").is_string()) fail("image_path", "must be a string");
    m.image_path = j.at("image_path").get<std::string>();
    m.image_w = require_int(j, "image_w", "");
    m.image_h = require_int(j, "image_h", "");
    if (m.image_w < 1) fail("image_w", "must be >= 1");
    if (m.image_h < 1) fail("image_h", "must be >= 1");
    if (!j.contains("blobs")) fail("blobs", "missing required field");
    if (!j.at("blobs").is_array()) fail("blobs", "must be an array");

    std::set<int> ids;
    const auto& arr = j.at("blobs");
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string where = "blobs[" + std::to_string(i) + "].";
        const auto& jb = arr[i];
        if (!jb.is_object()) fail("blobs[" + std::to_string(i) + "]", "must be an object");
        Blob b;
        b.id = require_int(jb, "id", where);
        b.x = require_int(jb, "x", where);
        b.y = require_int(jb, "y", where);
        b.w = require_int(jb, "w", where);
        b.h = require_int(jb, "h", where);
        if (!jb.contains("label")) fail(where + "label", "missing required field");
        const auto& label = jb.at("label");
        if (label.is_string()) {
            const auto s = label.get<std::string>();
            if (s.size() != 1) fail(where + "label", "must be a single character or null");
            b.label = s[0];
        } else if (!label.is_null()) {
            fail(where + "label", "must be a string or null");
        }
        if (b.w < 1 || b.h < 1) fail(where + "w/h", "must be >= 1");
        if (!box_inside(b.x, b.y, b.w, b.h, m.image_w, m.image_h))
            fail(where + "x/y/w/h", "box lies outside the image bounds");
        if (!ids.insert(b.id).second) fail(where + "id", "duplicate id " + std::to_string(b.id));
        m.blobs.push_back(b);
    }
    return m;
}

void save_manifest(const BlobManifest& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
    out << manifest_to_json(m).dump(2) << '\n';
    if (!out) throw Error(ErrorKind::IoError, "write failed: " + path.string());
}

BlobManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::error_code ec;
        if (!std::filesystem::exists(path, ec))
            throw Error(ErrorKind::FileNotFound, "no such file: " + path.string());
        throw Error(ErrorKind::IoError, "cannot open " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::SchemaError, path.string() + ": " + e.what());
    }
    return manifest_from_json(j);
}

BlobManifest apply_blob_edit(const BlobManifest& m, const BlobEdit& edit) {
    BlobManifest out = m;
    auto check_bounds = [&](int x, int y, int w, int h) {
        if (!box_inside(x, y, w, h, m.image_w, m.image_h))
            throw Error(ErrorKind::OutOfBounds, "box (" + std::to_string(x) + "," + std::to_string(y) +
                                                    "," + std::to_string(w) + "," + std::to_string(h) +
                                                    ") lies outside the page");
    };
    auto find = [&](int id) {
        auto it = std::find_if(out.blobs.begin(), out.blobs.end(), [id](const Blob& b) { return b.id == id; });
        if (it == out.blobs.end()) throw Error(ErrorKind::UnknownBlobId, "no blob with id " + std::to_string(id));
        return it;
    };

    std::visit(
        [&](const auto& e) {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, MoveBlob>) {
                auto it = find(e.id);
                check_bounds(e.x, e.y, e.w, e.h);
                it->x = e.x;
                it->y = e.y;
                it->w = e.w;
                it->h = e.h;
                if (e.label) it->label = *e.label;
            } else if constexpr (std::is_same_v<T, DeleteBlob>) {
                out.blobs.erase(find(e.id));
            } else {
                check_bounds(e.x, e.y, e.w, e.h);
                std::set<int> used;
                for (const Blob& b : out.blobs) used.insert(b.id);
                int id = 0;
                while (used.count(id)) ++id;
                out.blobs.push_back({id, e.x, e.y, e.w, e.h, e.label});
            }
        },
        edit);
    return out;
}

}  // namespace docpipe
