#include "docpipe/service.hpp"

#include <algorithm>

#include <httplib.h>

#include "docpipe/error.hpp"

namespace docpipe {

namespace {

bool is_page_image(const std::filesystem::path& p) {
    auto ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

void send_error(httplib::Response& res, int status, const std::string& message) {
    res.status = status;
    res.set_content(nlohmann::json{{"error", message}}.dump(), "application/json");
}

}  // namespace

ReviewService::ReviewService(PipelineConfig cfg) : cfg_(std::move(cfg)), server_(std::make_unique<httplib::Server>()) {
    // SO_REUSEADDR only, no SO_REUSEPORT.
    server_->set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof yes);
    });
    install_routes();
}

ReviewService::~ReviewService() { stop(); }

int ReviewService::bind(bool any_port) {
    if (any_port) {
        port_ = server_->bind_to_any_port(cfg_.serve_host);
        if (port_ < 0) throw Error(ErrorKind::PortInUse, "cannot bind " + cfg_.serve_host);
    } else {
        if (!server_->bind_to_port(cfg_.serve_host, cfg_.serve_port))
            throw Error(ErrorKind::PortInUse,
                        "cannot bind " + cfg_.serve_host + ":" + std::to_string(cfg_.serve_port) + " (port in use?)");
        port_ = cfg_.serve_port;
    }
    return port_;
}

void ReviewService::listen() { server_->listen_after_bind(); }

void ReviewService::stop() {
    if (server_) server_->stop();
}

std::vector<ReviewService::Page> ReviewService::pages() const {
    std::vector<Page> out;
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(cfg_.workspace_dir, ec))
        if (entry.is_regular_file() && is_page_image(entry.path()))
            out.push_back({entry.path().stem().string(), entry.path()});
    std::sort(out.begin(), out.end(), [](const Page& a, const Page& b) { return a.id < b.id; });
    return out;
}

std::optional<ReviewService::Page> ReviewService::find_page(const std::string& id) const {
    for (auto& p : pages())
        if (p.id == id) return p;
    return std::nullopt;
}

std::mutex& ReviewService::page_mutex(const std::string& id) {
    std::lock_guard lock(locks_guard_);
    auto& slot = page_locks_[id];
    if (!slot) slot = std::make_unique<std::mutex>();
    return *slot;
}

void ReviewService::install_routes() {
    auto& srv = *server_;

    srv.Get("/api/pages", [this](const httplib::Request&, httplib::Response& res) {
        nlohmann::json list = nlohmann::json::array();
        for (const auto& p : pages()) {
            try {
                const auto img = load_image(p.image);
                list.push_back({{"id", p.id}, {"image_w", img.width}, {"image_h", img.height}});
            } catch (const Error&) {
                // undecodable files are not pages
            }
        }
        res.set_content(list.dump(), "application/json");
    });

    srv.Get(R"(/api/pages/([^/]+)/image)", [this](const httplib::Request& req, httplib::Response& res) {
        const auto page = find_page(req.matches[1]);
        if (!page) return send_error(res, 404, "unknown page " + std::string(req.matches[1]));
        const std::string bytes = read_text_file(page->image);
        auto ext = page->image.extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        res.set_content(bytes, ext == ".png" ? "image/png" : "image/jpeg");
    });

    srv.Get(R"(/api/pages/([^/]+)/manifest)", [this](const httplib::Request& req, httplib::Response& res) {
        const auto page = find_page(req.matches[1]);
        if (!page) return send_error(res, 404, "unknown page " + std::string(req.matches[1]));
        std::lock_guard lock(page_mutex(page->id));
        const auto path = manifest_path_for(page->image);
        try {
            BlobManifest m;
            if (std::filesystem::exists(path)) {
                m = load_manifest(path);
            } else {
                const auto img = load_image(page->image);
                m = {page->image.filename().string(), img.width, img.height, {}};
            }
            res.set_content(manifest_to_json(m).dump(2) + "\n", "application/json");
        } catch (const Error& e) {
            send_error(res, 500, e.what());
        }
    });

    srv.Put(R"(/api/pages/([^/]+)/manifest)", [this](const httplib::Request& req, httplib::Response& res) {
        const auto page = find_page(req.matches[1]);
        if (!page) return send_error(res, 404, "unknown page " + std::string(req.matches[1]));
        BlobManifest m;
        try {
            m = manifest_from_json(nlohmann::json::parse(req.body));
        } catch (const nlohmann::json::parse_error& e) {
            return send_error(res, 400, std::string("body: ") + e.what());
        } catch (const Error& e) {
            return send_error(res, 400, e.what());
        }
        try {
            const auto img = load_image(page->image);
            if (m.image_w != img.width) return send_error(res, 400, "image_w: does not match the page image");
            if (m.image_h != img.height) return send_error(res, 400, "image_h: does not match the page image");
            std::lock_guard lock(page_mutex(page->id));
            write_file_atomic(manifest_path_for(page->image), manifest_to_json(m).dump(2) + "\n");
        } catch (const Error& e) {
            return send_error(res, 500, e.what());
        }
        res.status = 204;
    });

    if (cfg_.ui_dir) srv.set_mount_point("/", cfg_.ui_dir->string());
}

}  // namespace docpipe
