#pragma once

#include "rara/camera.hpp"
#include "rara/rasterizer.hpp"
#include "rara/scene.hpp"

#include "json.hpp"

#include <Eigen/Core>

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rara::cli {

/// Look-from / look-at / up plus vertical fov in degrees.
struct CameraPose {
    Eigen::Vector3d eye = Eigen::Vector3d::Zero();
    Eigen::Vector3d target = Eigen::Vector3d::UnitZ();
    Eigen::Vector3d up = Eigen::Vector3d::UnitY();
    double fov_deg = 45.0;
};

/// Everything one subcommand needs. Unset optionals fall back to defaults
/// that depend on the scene (camera framing, plane normal for sweeps).
struct RunConfig {
    std::optional<std::filesystem::path> scene;
    std::optional<nlohmann::json> synth;
    ClipMode mode = ClipMode::None;
    std::optional<Eigen::Vector4d> plane; // nx, ny, nz, d as given
    std::optional<CameraPose> camera;
    int width = 512, height = 512;
    int tile = 16;
    int threads = 0;
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> output;
    int frames = 30;

    /// Throws ConfigError on an inconsistent combination.
    void validate() const;
};

// Flag value parsers; all throw ConfigError with the offending text.
Eigen::Vector4d parse_plane(const std::string& text);
CameraPose parse_camera(const std::string& text);
std::array<int, 2> parse_resolution(const std::string& text);

/// Applies keys of a JSON config object onto `cfg`. Keys mirror the long
/// flag names: scene, synth, mode, plane, camera, res, tile, threads, seed,
/// output, frames. Unknown keys are errors.
void apply_config_json(RunConfig& cfg, const nlohmann::json& j);

/// Inline JSON (starts with '{') or a path to a JSON file.
nlohmann::json read_json_arg(const std::string& text);

/// The scene named by `scene` or generated from `synth`; `seed` overrides the
/// generator seed where the generator has one.
Scene load_input(const RunConfig& cfg);
Camera make_camera(const RunConfig& cfg, const Scene& scene);
/// Normalizes the plane normal, warning when it was off by more than 1e-6.
ClipConfig make_clip(const RunConfig& cfg, ClipMode mode);
std::optional<ClipPlane> make_plane(const RunConfig& cfg);
RenderOptions make_render_options(const RunConfig& cfg);

/// Full command line without the program name. Returns the exit status:
/// 0 success, 1 runtime failure, 2 usage or configuration error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Sets the spdlog level from RARA_LOG (trace..off); default warn.
void init_logging();

} // namespace rara::cli
