#pragma once

#include "rara/camera.hpp"
#include "rara/image.hpp"
#include "rara/rasterizer.hpp"
#include "rara/scene.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace rara {

/// Mean absolute difference over pixels and channels, in 8-bit units.
/// Throws ParameterError on a size mismatch.
double l1_error(const Image& a, const Image& b);

/// Luma of a pixel in 8-bit units (Rec.601 weights).
double luma601(const Eigen::Vector3f& rgb);

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimK1 = 0.01;
inline constexpr double kSsimK2 = 0.03;
inline constexpr double kSsimRange = 255.0;

/// Mean SSIM over all valid 11x11 windows of the luma channel.
/// Throws ParameterError on a size mismatch or a side shorter than 11.
double ssim(const Image& a, const Image& b);

struct AblationReport {
    std::string mode_compared;
    double l1 = 0.0;
    double ssim = 1.0;
};

/// Places the plane 1e9 beyond the bounds on its visible side.
ClipPlane plane_beyond_bounds(const Bounds& bounds, const Eigen::Vector3d& normal);

/// Rows "wo RaRa" (every Gaussian ray traced) then "w RaRa" (class-based),
/// each against an unclipped reference, with the plane at infinity.
std::vector<AblationReport> run_ablation(const Scene& scene, const Camera& cam,
                                         const RenderOptions& options = {},
                                         const Eigen::Vector3d& normal = Eigen::Vector3d::UnitX());

struct SweepBenchReport {
    std::string mode;
    int frames = 0;
    double mean_fps = 0.0;
    double min_fps = 0.0;
    double max_fps = 0.0;
    double plane_start = 0.0;
    double plane_end = 0.0;
    std::vector<double> frame_ms;
};

/// Offsets for a linear sweep of a plane with `normal` from just outside the
/// face of `bounds` where everything is visible to just outside the opposite
/// face. A single frame gets the start offset.
std::vector<double> sweep_offsets(const Bounds& bounds, const Eigen::Vector3d& normal, int frames);

/// Fixed camera, plane swept across the bounds; one untimed warm-up frame.
/// Timing covers projection, binning, sorting and compositing only.
SweepBenchReport run_sweep_bench(const Scene& scene, const Camera& cam, ClipMode mode, int frames,
                                 const RenderOptions& options = {},
                                 const Eigen::Vector3d& normal = Eigen::Vector3d::UnitX());

nlohmann::json to_json(const AblationReport& r);
nlohmann::json to_json(const SweepBenchReport& r);
std::string format_ablation_table(const std::vector<AblationReport>& rows, const std::string& scene_name);
std::string format_bench_table(const std::vector<SweepBenchReport>& rows, const std::string& scene_name);

} // namespace rara
