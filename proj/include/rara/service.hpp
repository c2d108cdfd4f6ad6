#pragma once

#include "rara/scene.hpp"

#include "json.hpp"

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>

namespace rara::service {

struct ServiceOptions {
    std::string address = "127.0.0.1";
    unsigned short port = 8080; // 0 picks a free port
    std::filesystem::path scene_dir = ".";
    std::optional<std::filesystem::path> static_dir; // viewer build, served at /
    int render_threads = 0;
    int max_resolution = 1024;
};

/// Scenes in a directory (`*.ply` and `*.json` synthetic descriptors), loaded
/// once and shared read-only between sessions. A file that changed on disk
/// is reloaded on the next lookup.
class SceneCache {
public:
    explicit SceneCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

    /// Throws std::filesystem::filesystem_error when the directory cannot be read.
    std::vector<std::filesystem::path> scene_files() const;
    /// nullptr when no scene of that name exists. Load errors propagate.
    SceneHandle get(const std::string& name);
    SceneHandle load(const std::filesystem::path& file);
    /// [{name, file, gaussians, bounds: {min, max}}] sorted by name; files
    /// that fail to load are skipped with a warning.
    nlohmann::json describe();

    const std::filesystem::path& dir() const { return dir_; }

private:
    struct Entry {
        std::filesystem::file_time_type mtime;
        SceneHandle scene;
    };
    std::filesystem::path dir_;
    std::shared_mutex mutex_;
    std::unordered_map<std::string, Entry> entries_;
};

/// HTTP (GET /healthz, GET /scenes, static files) and WebSocket (/ws) on one
/// port. Each WebSocket session renders on its own worker thread.
class RenderService {
public:
    explicit RenderService(ServiceOptions options);
    ~RenderService();
    RenderService(const RenderService&) = delete;
    RenderService& operator=(const RenderService&) = delete;

    /// Binds and starts the network thread; returns the bound port.
    unsigned short start();
    /// Closes the listener and every session, waits for in-flight renders.
    void stop();
    unsigned short port() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace rara::service
