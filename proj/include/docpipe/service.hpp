#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "docpipe/pipeline.hpp"

namespace httplib {
class Server;
}

namespace docpipe {

// Local HTTP backend for the blob review UI.
//
//   GET  /api/pages                -> [{"id", "image_w", "image_h"}]
//   GET  /api/pages/{id}/image     -> image bytes
//   GET  /api/pages/{id}/manifest  -> manifest JSON
//   PUT  /api/pages/{id}/manifest  -> 204 | 400 | 404
//
// A page is an image (png/jpg/jpeg) in the workspace; its id is the file
// stem and its manifest lives next to it as "<id>.manifest.json".
class ReviewService {
public:
    explicit ReviewService(PipelineConfig cfg);
    ~ReviewService();

    ReviewService(const ReviewService&) = delete;
    ReviewService& operator=(const ReviewService&) = delete;

    // Binds cfg.serve_host:cfg.serve_port, or an ephemeral port when
    // any_port is set. Throws PortInUse.
    int bind(bool any_port = false);
    // Blocks until stop().
    void listen();
    void stop();
    int port() const { return port_; }

    struct Page {
        std::string id;
        std::filesystem::path image;
    };
    std::vector<Page> pages() const;

private:
    std::optional<Page> find_page(const std::string& id) const;
    std::mutex& page_mutex(const std::string& id);
    void install_routes();

    PipelineConfig cfg_;
    std::unique_ptr<httplib::Server> server_;
    int port_ = 0;
    std::mutex locks_guard_;
    std::map<std::string, std::unique_ptr<std::mutex>> page_locks_;
};

}  // namespace docpipe
