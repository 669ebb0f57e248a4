#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "docpipe/error.hpp"
#include "docpipe/segmentation.hpp"

using namespace docpipe;
namespace fs = std::filesystem;

namespace {

// Independent labeling: union-find over 8-neighbour pairs.
struct OracleComponent {
    int x0, y0, x1, y1;
    long area;
    bool operator<(const OracleComponent& o) const {
        return std::tie(x0, y0, x1, y1, area) < std::tie(o.x0, o.y0, o.x1, o.y1, o.area);
    }
};

std::set<OracleComponent> oracle_components(const BinaryImage& img, int min_area) {
    const std::size_t n = img.pixels.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t i) {
        while (parent[i] != i) i = parent[i];
        return i;
    };
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            if (!img.at(x, y)) continue;
            for (auto [dx, dy] : {std::pair{1, 0}, {-1, 1}, {0, 1}, {1, 1}}) {
                const int nx = x + dx, ny = y + dy;
                if (nx < 0 || ny < 0 || nx >= img.width || ny >= img.height || !img.at(nx, ny)) continue;
                const auto a = find(static_cast<std::size_t>(y) * img.width + x);
                const auto b = find(static_cast<std::size_t>(ny) * img.width + nx);
                parent[a] = b;
            }
        }
    std::map<std::size_t, OracleComponent> comps;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            if (!img.at(x, y)) continue;
            const auto root = find(static_cast<std::size_t>(y) * img.width + x);
            auto [it, fresh] = comps.try_emplace(root, OracleComponent{x, y, x, y, 0});
            auto& c = it->second;
            c.x0 = std::min(c.x0, x);
            c.y0 = std::min(c.y0, y);
            c.x1 = std::max(c.x1, x);
            c.y1 = std::max(c.y1, y);
            ++c.area;
        }
    std::set<OracleComponent> out;
    for (auto& [root, c] : comps)
        if (c.area >= min_area) out.insert(c);
    return out;
}

long ink_in_box(const BinaryImage& img, const Blob& b) {
    long n = 0;
    for (int y = b.y; y < b.y + b.h; ++y)
        for (int x = b.x; x < b.x + b.w; ++x) n += img.at(x, y);
    return n;
}

std::vector<Blob> dot_grid(int cols, int rows, int pitch_x, int pitch_y, std::mt19937* jitter = nullptr) {
    std::vector<Blob> blobs;
    int id = 0;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            int dx = 0, dy = 0;
            if (jitter) {
                dx = static_cast<int>((*jitter)() % 5) - 2;
                dy = static_cast<int>((*jitter)() % 5) - 2;
            }
            blobs.push_back({id++, 10 + c * pitch_x + dx, 10 + r * pitch_y + dy, 6, 8, std::nullopt});
        }
    return blobs;
}

BlobManifest sample_manifest() {
    BlobManifest m{"page.png", 100, 80, {}};
    m.blobs.push_back({0, 1, 2, 3, 4, 'A'});
    m.blobs.push_back({2, 10, 10, 20, 20, std::nullopt});
    m.blobs.push_back({5, 10, 10, 20, 20, 'Z'});
    return m;
}

}  // namespace

TEST_CASE("find_blobs on a blank page") {
    CHECK(find_blobs(BinaryImage(30, 20, 0), 1).empty());
}

TEST_CASE("find_blobs finds two squares") {
    BinaryImage img(100, 100, 0);
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 10; ++x) {
            img.at(10 + x, 10 + y) = 1;
            img.at(60 + x, 60 + y) = 1;
        }
    const auto blobs = find_blobs(img, 4);
    REQUIRE(blobs.size() == 2);
    CHECK(blobs[0] == Blob{0, 10, 10, 10, 10, std::nullopt});
    CHECK(blobs[1] == Blob{1, 60, 60, 10, 10, std::nullopt});
    CHECK(oracle_components(img, 4).size() == 2);
}

TEST_CASE("diagonal neighbours are connected") {
    BinaryImage img(4, 4, 0);
    img.at(1, 1) = 1;
    img.at(2, 2) = 1;
    const auto blobs = find_blobs(img, 1);
    REQUIRE(blobs.size() == 1);
    CHECK(blobs[0].x == 1);
    CHECK(blobs[0].w == 2);
    CHECK(blobs[0].h == 2);
}

TEST_CASE("min_area drops small components") {
    BinaryImage img(10, 10, 0);
    img.at(0, 0) = 1;
    for (int x = 3; x < 8; ++x) img.at(x, 5) = 1;
    CHECK(find_blobs(img, 1).size() == 2);
    CHECK(find_blobs(img, 5).size() == 1);
    CHECK(find_blobs(img, 6).empty());
    CHECK_THROWS_AS(find_blobs(img, 0), Error);
}

TEST_CASE("find_blobs agrees with a union-find oracle on random images") {
    std::mt19937 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        const int w = 1 + static_cast<int>(rng() % 16);
        const int h = 1 + static_cast<int>(rng() % 16);
        const int density = 20 + static_cast<int>(rng() % 50);
        const int min_area = 1 + static_cast<int>(rng() % 4);
        BinaryImage img(w, h);
        for (auto& p : img.pixels) p = static_cast<int>(rng() % 100) < density ? 1 : 0;

        const auto blobs = find_blobs(img, min_area);
        const auto expected = oracle_components(img, min_area);
        REQUIRE(blobs.size() == expected.size());

        // Same boxes; ids follow the (y, x) order.
        std::set<std::tuple<int, int, int, int>> got_boxes, want_boxes;
        for (const auto& b : blobs) got_boxes.insert({b.x, b.y, b.w, b.h});
        for (const auto& c : expected) want_boxes.insert({c.x0, c.y0, c.x1 - c.x0 + 1, c.y1 - c.y0 + 1});
        CHECK(got_boxes == want_boxes);
        for (std::size_t i = 0; i < blobs.size(); ++i) {
            CHECK(blobs[i].id == static_cast<int>(i));
            if (i > 0) CHECK(std::tie(blobs[i - 1].y, blobs[i - 1].x) <= std::tie(blobs[i].y, blobs[i].x));
        }

        // Components are disjoint: total ink across boxes >= kept ink.
        long kept = 0;
        for (const auto& c : expected) kept += c.area;
        long boxed = 0;
        for (const auto& b : blobs) boxed += ink_in_box(img, b);
        CHECK(boxed >= kept);
        CHECK(find_blobs(img, min_area) == blobs);
    }
}

TEST_CASE("assign_grid_labels on a perfect 26x12 grid") {
    const auto blobs = dot_grid(26, 12, 30, 36);
    const auto labeled = assign_grid_labels(blobs, GridConfig{});
    REQUIRE(labeled.size() == 312);
    std::map<char, int> counts;
    for (const auto& b : labeled) {
        REQUIRE(b.label.has_value());
        ++counts[*b.label];
        const int column = (b.x - 10) / 30;
        CHECK(*b.label == static_cast<char>('A' + column));
    }
    CHECK(counts.size() == 26);
    for (auto [label, n] : counts) CHECK(n == 12);
}

TEST_CASE("assign_grid_labels with letters along rows") {
    std::mt19937 rng(2);
    const auto blobs = dot_grid(12, 26, 36, 30, &rng);
    GridConfig cfg;
    cfg.orientation = GridOrientation::LettersAlongRows;
    const auto labeled = assign_grid_labels(blobs, cfg);
    for (std::size_t i = 0; i < labeled.size(); ++i) {
        const int row = static_cast<int>(i) / 12;
        CHECK(*labeled[i].label == static_cast<char>('A' + row));
    }
}

TEST_CASE("assign_grid_labels tolerates jitter") {
    std::mt19937 rng(9);
    const auto labeled = assign_grid_labels(dot_grid(26, 12, 30, 36, &rng), GridConfig{});
    for (std::size_t i = 0; i < labeled.size(); ++i)
        CHECK(*labeled[i].label == static_cast<char>('A' + static_cast<int>(i) % 26));
}

TEST_CASE("assign_grid_labels with a single letter") {
    GridConfig cfg{1, 12, GridOrientation::LettersAlongColumns, "Q"};
    for (const auto& b : assign_grid_labels(dot_grid(1, 12, 30, 36), cfg)) CHECK(*b.label == 'Q');
}

TEST_CASE("assign_grid_labels reports missing bands") {
    const auto blobs = dot_grid(25, 12, 30, 36);
    try {
        assign_grid_labels(blobs, GridConfig{});
        FAIL("expected GridMismatch");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::GridMismatch);
    }
    CHECK_THROWS_AS(assign_grid_labels({}, GridConfig{}), Error);
    GridConfig bad;
    bad.alphabet = "ABC";
    CHECK_THROWS_AS(assign_grid_labels(dot_grid(26, 12, 30, 36), bad), Error);
}

TEST_CASE("manifest save/load round trip") {
    const fs::path dir = fs::temp_directory_path() / "docpipe_seg_test";
    fs::create_directories(dir);

    const BlobManifest empty{"blank.png", 10, 10, {}};
    save_manifest(empty, dir / "empty.json");
    CHECK(load_manifest(dir / "empty.json") == empty);

    BlobManifest grid{"sheet.png", 800, 500, assign_grid_labels(dot_grid(26, 12, 30, 36), GridConfig{})};
    save_manifest(grid, dir / "grid.json");
    CHECK(load_manifest(dir / "grid.json") == grid);

    const auto m = sample_manifest();
    CHECK(manifest_from_json(manifest_to_json(m)) == m);
    fs::remove_all(dir);
}

TEST_CASE("manifest schema errors") {
    auto kind_of = [](const nlohmann::json& j) {
        try {
            manifest_from_json(j);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::InvalidArgument;
    };
    auto j = manifest_to_json(sample_manifest());

    auto missing = j;
    missing.erase("blobs");
    CHECK(kind_of(missing) == ErrorKind::SchemaError);

    auto outside = j;
    outside["blobs"][0]["x"] = 99;
    CHECK(kind_of(outside) == ErrorKind::SchemaError);

    auto dup = j;
    dup["blobs"][1]["id"] = 0;
    CHECK(kind_of(dup) == ErrorKind::SchemaError);

    auto bad_label = j;
    bad_label["blobs"][0]["label"] = "AB";
    CHECK(kind_of(bad_label) == ErrorKind::SchemaError);

    auto wrong_type = j;
    wrong_type["image_w"] = "wide";
    CHECK(kind_of(wrong_type) == ErrorKind::SchemaError);

    try {
        manifest_from_json(outside);
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("blobs[0]") != std::string::npos);
    }

    const fs::path path = fs::temp_directory_path() / "docpipe_bad_manifest.json";
    std::ofstream(path) << "{ not json";
    CHECK_THROWS_AS(load_manifest(path), Error);
    fs::remove(path);
}

TEST_CASE("apply_blob_edit") {
    BlobManifest m{"page.png", 100, 100, {}};
    m.blobs.push_back({5, 10, 10, 20, 20, 'A'});
    m.blobs.push_back({7, 50, 50, 5, 5, 'B'});

    const auto moved = apply_blob_edit(m, MoveBlob{5, 12, 10, 20, 20, std::nullopt});
    CHECK(moved.blobs[0] == Blob{5, 12, 10, 20, 20, 'A'});
    CHECK(moved.blobs[1] == m.blobs[1]);

    const auto relabeled = apply_blob_edit(m, MoveBlob{7, 50, 50, 5, 5, std::optional<char>{'C'}});
    CHECK(relabeled.blobs[1].label == 'C');
    const auto cleared = apply_blob_edit(m, MoveBlob{7, 50, 50, 5, 5, std::optional<char>{}});
    CHECK_FALSE(cleared.blobs[1].label.has_value());

    BlobManifest single{"page.png", 100, 100, {{0, 1, 1, 2, 2, std::nullopt}}};
    CHECK(apply_blob_edit(single, DeleteBlob{0}).blobs.empty());

    BlobManifest gap{"page.png", 100, 100, {{0, 1, 1, 2, 2, std::nullopt}, {2, 5, 5, 2, 2, std::nullopt}}};
    const auto created = apply_blob_edit(gap, CreateBlob{20, 20, 4, 4, 'X'});
    REQUIRE(created.blobs.size() == 3);
    CHECK(created.blobs.back() == Blob{1, 20, 20, 4, 4, 'X'});

    auto kind_of = [&](const BlobEdit& e) {
        try {
            apply_blob_edit(m, e);
        } catch (const Error& err) {
            return err.kind();
        }
        return ErrorKind::InvalidArgument;
    };
    CHECK(kind_of(DeleteBlob{99}) == ErrorKind::UnknownBlobId);
    CHECK(kind_of(MoveBlob{99, 0, 0, 1, 1, std::nullopt}) == ErrorKind::UnknownBlobId);
    CHECK(kind_of(MoveBlob{5, 90, 90, 20, 20, std::nullopt}) == ErrorKind::OutOfBounds);
    CHECK(kind_of(CreateBlob{-1, 0, 5, 5, std::nullopt}) == ErrorKind::OutOfBounds);
    CHECK(kind_of(CreateBlob{0, 0, 0, 5, std::nullopt}) == ErrorKind::OutOfBounds);
}
