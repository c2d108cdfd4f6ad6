#include "rara/cli.hpp"

#include "rara/errors.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace rara::cli {
namespace {

std::vector<double> parse_numbers(const std::string& text, std::size_t expected, const char* what) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos || !std::isfinite(v)) {
            throw ConfigError(std::string(what) + ": '" + item + "' is not a finite number");
        }
        values.push_back(v);
    }
    if (values.size() != expected) {
        throw ConfigError(std::string(what) + ": expected " + std::to_string(expected) +
                          " comma-separated numbers, got '" + text + "'");
    }
    return values;
}

// JSON arrays are accepted wherever a flag takes a comma list.
std::string as_flag_text(const nlohmann::json& v, const char* key) {
    if (v.is_string()) {
        return v.get<std::string>();
    }
    if (v.is_array()) {
        std::string out;
        for (const auto& e : v) {
            if (!e.is_number()) {
                throw ConfigError(std::string("config '") + key + "': array entries must be numbers");
            }
            out += (out.empty() ? "" : ",") + nlohmann::json(e.get<double>()).dump();
        }
        return out;
    }
    throw ConfigError(std::string("config '") + key + "': expected a string or an array");
}

template <class T>
T get_as(const nlohmann::json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string("config '") + key + "' has the wrong type");
    }
}

} // namespace

void RunConfig::validate() const {
    if (scene && synth) {
        throw ConfigError("--scene and --synth are mutually exclusive");
    }
    if (width < 16 || height < 16) {
        throw ConfigError("resolution must be at least 16x16");
    }
    if (tile < 1) {
        throw ConfigError("tile size must be >= 1");
    }
    if (threads < 0) {
        throw ConfigError("thread count must be >= 0");
    }
    if (frames < 1) {
        throw ConfigError("frame count must be >= 1");
    }
    if (mode != ClipMode::None && !plane) {
        throw ConfigError("--mode " + std::string(to_string(mode)) + " requires --plane nx,ny,nz,d");
    }
}

Eigen::Vector4d parse_plane(const std::string& text) {
    const auto v = parse_numbers(text, 4, "--plane");
    return {v[0], v[1], v[2], v[3]};
}

CameraPose parse_camera(const std::string& text) {
    const auto v = parse_numbers(text, 10, "--camera");
    CameraPose pose;
    pose.eye = {v[0], v[1], v[2]};
    pose.target = {v[3], v[4], v[5]};
    pose.up = {v[6], v[7], v[8]};
    pose.fov_deg = v[9];
    return pose;
}

std::array<int, 2> parse_resolution(const std::string& text) {
    const auto x = text.find_first_of("xX");
    int w = 0, h = 0;
    std::size_t used_w = 0, used_h = 0;
    try {
        if (x != std::string::npos) {
            w = std::stoi(text.substr(0, x), &used_w);
            h = std::stoi(text.substr(x + 1), &used_h);
        }
    } catch (const std::exception&) {
        used_w = used_h = 0;
    }
    if (x == std::string::npos || used_w != x || used_h != text.size() - x - 1 || used_w == 0) {
        throw ConfigError("--res: expected WxH, got '" + text + "'");
    }
    if (w < 16 || h < 16) {
        throw ConfigError("--res: resolution must be at least 16x16, got '" + text + "'");
    }
    return {w, h};
}

nlohmann::json read_json_arg(const std::string& text) {
    const auto first = text.find_first_not_of(" \t\n");
    try {
        if (first != std::string::npos && text[first] == '{') {
            return nlohmann::json::parse(text);
        }
        std::ifstream in(text);
        if (!in) {
            throw ConfigError("cannot open JSON file '" + text + "'");
        }
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("invalid JSON in '" + text + "': " + e.what());
    }
}

void apply_config_json(RunConfig& cfg, const nlohmann::json& j) {
    if (!j.is_object()) {
        throw ConfigError("config file must hold a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
        if (key == "scene") {
            cfg.scene = get_as<std::string>(j, "scene");
        } else if (key == "synth") {
            cfg.synth = value.is_string() ? read_json_arg(value.get<std::string>()) : value;
        } else if (key == "mode") {
            cfg.mode = clip_mode_from_string(get_as<std::string>(j, "mode"));
        } else if (key == "plane") {
            cfg.plane = parse_plane(as_flag_text(value, "plane"));
        } else if (key == "camera") {
            cfg.camera = parse_camera(as_flag_text(value, "camera"));
        } else if (key == "res") {
            if (value.is_array() && value.size() == 2) {
                cfg.width = get_as<std::array<int, 2>>(j, "res")[0];
                cfg.height = get_as<std::array<int, 2>>(j, "res")[1];
            } else {
                const auto r = parse_resolution(get_as<std::string>(j, "res"));
                cfg.width = r[0];
                cfg.height = r[1];
            }
        } else if (key == "tile") {
            cfg.tile = get_as<int>(j, "tile");
        } else if (key == "threads") {
            cfg.threads = get_as<int>(j, "threads");
        } else if (key == "seed") {
            cfg.seed = get_as<std::uint64_t>(j, "seed");
        } else if (key == "output") {
            cfg.output = get_as<std::string>(j, "output");
        } else if (key == "frames") {
            cfg.frames = get_as<int>(j, "frames");
        } else {
            throw ConfigError("config: unknown key '" + key + "'");
        }
    }
}

Scene load_input(const RunConfig& cfg) {
    const auto with_seed = [&](nlohmann::json spec) {
        if (cfg.seed && spec.is_object() && spec.value("kind", "") != "grid") {
            spec["seed"] = *cfg.seed;
        }
        return spec;
    };
    if (cfg.synth) {
        const Scene generated = generate_synthetic(synthetic_spec_from_json(with_seed(*cfg.synth)));
        return generated;
    }
    if (!cfg.scene) {
        throw ConfigError("one of --scene or --synth is required");
    }
    if (cfg.seed && cfg.scene->extension() == ".json") {
        const Scene generated =
            generate_synthetic(synthetic_spec_from_json(with_seed(read_json_arg(cfg.scene->string()))));
        return Scene(cfg.scene->stem().string(), {generated.gaussians().begin(), generated.gaussians().end()});
    }
    return load_scene(*cfg.scene);
}

Camera make_camera(const RunConfig& cfg, const Scene& scene) {
    if (!cfg.camera) {
        return Camera::fit_bounds(scene.bounds(), cfg.width, cfg.height);
    }
    const CameraPose& p = *cfg.camera;
    return Camera::look_at(p.eye, p.target, p.up, p.fov_deg, cfg.width, cfg.height);
}

std::optional<ClipPlane> make_plane(const RunConfig& cfg) {
    if (!cfg.plane) {
        return std::nullopt;
    }
    const Eigen::Vector3d n = cfg.plane->head<3>();
    if (std::abs(n.norm() - 1.0) > 1e-6) {
        spdlog::warn("plane normal ({}, {}, {}) has length {}; normalizing", n.x(), n.y(), n.z(), n.norm());
    }
    try {
        return ClipPlane::from_unnormalized(n, (*cfg.plane)[3]);
    } catch (const GeometryError& e) {
        throw ConfigError(std::string("--plane: ") + e.what());
    }
}

ClipConfig make_clip(const RunConfig& cfg, ClipMode mode) {
    if (mode == ClipMode::None) {
        return ClipConfig::none();
    }
    const auto plane = make_plane(cfg);
    if (!plane) {
        throw ConfigError("--mode " + std::string(to_string(mode)) + " requires --plane nx,ny,nz,d");
    }
    return mode == ClipMode::Hard ? ClipConfig::hard(*plane) : ClipConfig::rara(*plane);
}

RenderOptions make_render_options(const RunConfig& cfg) {
    RenderOptions o;
    o.tile_size = cfg.tile;
    o.threads = cfg.threads;
    return o;
}

void init_logging() {
    spdlog::set_level(spdlog::level::warn);
    if (const char* level = std::getenv("RARA_LOG")) {
        const auto parsed = spdlog::level::from_str(level);
        // from_str maps unknown names to off; only accept real names.
        if (parsed != spdlog::level::off || std::string(level) == "off") {
            spdlog::set_level(parsed);
        } else {
            spdlog::warn("RARA_LOG: unknown level '{}'", level);
        }
    }
}

} // namespace rara::cli
