#pragma once

#include "rara/camera.hpp"
#include "rara/clip_geometry.hpp"
#include "rara/image.hpp"
#include "rara/scene.hpp"

#include <Eigen/Core>

#include <optional>
#include <string_view>
#include <vector>

namespace rara {

enum class ClipMode { None, Hard, RaRa };

std::string_view to_string(ClipMode mode);
/// Accepts "none", "hard", "rara". Throws ConfigError otherwise.
ClipMode clip_mode_from_string(std::string_view s);

struct ClipConfig {
    ClipMode mode = ClipMode::None;
    std::optional<ClipPlane> plane;
    /// Ablation only: every non-invisible Gaussian takes the ray-traced path
    /// and a pixel whose ray misses the 3-sigma ellipsoid gets zero opacity.
    bool force_ray_trace = false;

    /// Throws ConfigError unless plane is present exactly when mode != None.
    void validate() const;

    static ClipConfig none() { return {}; }
    static ClipConfig hard(const ClipPlane& p) { return {ClipMode::Hard, p, false}; }
    static ClipConfig rara(const ClipPlane& p) { return {ClipMode::RaRa, p, false}; }
};

/// Anti-aliasing floor added to both diagonal entries of the 2D covariance.
inline constexpr double kLowPassFloor = 0.3;
inline constexpr double kMaxAlpha = 0.99;
/// Compositing stops once transmittance drops below this.
inline constexpr double kTransmittanceCutoff = 1.0 / 255.0;
/// Splats contribute only within this Mahalanobis distance.
inline constexpr double kInfluenceSigma = 3.0;

struct Splat2D {
    Eigen::Vector2d center;
    Eigen::Matrix2d cov;
    Eigen::Matrix2d conic; // cov^-1
    double depth = 0.0;
    double radius = 0.0; // 3 * sqrt(largest eigenvalue of cov), pixels
    Eigen::Vector3d color;
    double delta = 0.0;
    VisibilityClass vis = VisibilityClass::Visible;
    std::uint32_t source = 0;
};

/// EWA projection. Empty when the center is at or behind the near plane or
/// the 3-sigma footprint lies entirely outside the image.
std::optional<Splat2D> project_gaussian(const Gaussian& g, const Camera& cam);

/// delta * exp(-1/2 m^2) clamped to kMaxAlpha; zero beyond Mahalanobis 3.
double evaluate_alpha(const Splat2D& s, const Eigen::Vector2d& pixel);

/// Alpha after the per-pixel clip weight, following the splat's class and
/// the clip mode. `clipper` is required for traced splats.
double clipped_alpha(const Splat2D& s, const Eigen::Vector2d& pixel, const Camera& cam,
                     const ClipConfig& clip, const ChordClipper* clipper);

/// As above, reusing the pixel's ray across splats. `ray` is computed on
/// first need and must belong to `pixel`.
double clipped_alpha(const Splat2D& s, const Eigen::Vector2d& pixel, const Camera& cam,
                     const ClipConfig& clip, const ChordClipper* clipper, std::optional<Ray>& ray);

struct RenderOptions {
    int tile_size = 16;
    int threads = 0; // 0: OpenMP default
    bool early_stop = true;
    Eigen::Vector3d background = Eigen::Vector3d::Zero();
};

/// Splats that survive projection and clip-mode culling, plus the ellipsoid
/// cache for splats that need per-pixel ray tracing.
struct PreparedFrame {
    std::vector<Splat2D> splats;
    std::vector<std::optional<ChordClipper>> clippers; // parallel to splats
};

PreparedFrame prepare_frame(const Scene& scene, const Camera& cam, const ClipConfig& clip,
                            int threads = 0);

/// Tile-parallel renderer (OpenMP over tiles).
Image render(const Scene& scene, const Camera& cam, const ClipConfig& clip,
             const RenderOptions& options = {});

namespace reference {

/// Serial per-pixel evaluator: every splat is tested against every pixel,
/// contributors are fully sorted by (depth, source) and composited without
/// early termination. Kept as the oracle for `render`.
Image render(const Scene& scene, const Camera& cam, const ClipConfig& clip,
             const Eigen::Vector3d& background = Eigen::Vector3d::Zero());

} // namespace reference

} // namespace rara
