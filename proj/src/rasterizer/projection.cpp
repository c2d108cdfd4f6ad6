#include "rara/errors.hpp"
#include "rara/rasterizer.hpp"

#include "alpha.hpp"

#include <omp.h>

#include <cmath>

namespace rara {

std::string_view to_string(ClipMode mode) {
    switch (mode) {
    case ClipMode::None: return "none";
    case ClipMode::Hard: return "hard";
    case ClipMode::RaRa: return "rara";
    }
    return "?";
}

ClipMode clip_mode_from_string(std::string_view s) {
    if (s == "none") return ClipMode::None;
    if (s == "hard") return ClipMode::Hard;
    if (s == "rara") return ClipMode::RaRa;
    throw ConfigError("unknown clip mode '" + std::string(s) + "' (expected none, hard or rara)");
}

void ClipConfig::validate() const {
    if (mode == ClipMode::None && plane) {
        throw ConfigError("clip mode 'none' does not take a plane");
    }
    if (mode != ClipMode::None && !plane) {
        throw ConfigError("clip mode '" + std::string(to_string(mode)) + "' requires a plane");
    }
    if (force_ray_trace && mode != ClipMode::RaRa) {
        throw ConfigError("forced ray tracing is only defined for rara mode");
    }
}

std::optional<Splat2D> project_gaussian(const Gaussian& g, const Camera& cam) {
    const Eigen::Vector3d p = cam.to_camera(g.mu);
    if (!(p.z() > cam.near)) {
        return std::nullopt;
    }
    const double inv_z = 1.0 / p.z();
    Splat2D s;
    s.center = {cam.fx * p.x() * inv_z + cam.cx, cam.fy * p.y() * inv_z + cam.cy};

    Eigen::Matrix<double, 2, 3> jacobian;
    jacobian << cam.fx * inv_z, 0.0, -cam.fx * p.x() * inv_z * inv_z, //
        0.0, cam.fy * inv_z, -cam.fy * p.y() * inv_z * inv_z;
    const Eigen::Matrix3d rot = g.rotation.toRotationMatrix();
    const Eigen::Matrix3d m = rot * g.scale.asDiagonal();
    const Eigen::Matrix<double, 2, 3> t = jacobian * cam.rotation * m;
    s.cov = t * t.transpose();
    s.cov(0, 0) += kLowPassFloor;
    s.cov(1, 1) += kLowPassFloor;

    const double det = s.cov.determinant();
    if (!(det > 0.0)) {
        return std::nullopt;
    }
    s.conic << s.cov(1, 1) / det, -s.cov(0, 1) / det, -s.cov(1, 0) / det, s.cov(0, 0) / det;
    const double mid = 0.5 * (s.cov(0, 0) + s.cov(1, 1));
    const double lambda_max = mid + std::sqrt(std::max(0.0, mid * mid - det));
    s.radius = kInfluenceSigma * std::sqrt(lambda_max);

    if (s.center.x() + s.radius < 0.0 || s.center.x() - s.radius > cam.width - 1 ||
        s.center.y() + s.radius < 0.0 || s.center.y() - s.radius > cam.height - 1) {
        return std::nullopt;
    }
    s.depth = p.z();
    s.color = g.color;
    s.delta = g.delta;
    return s;
}

double evaluate_alpha(const Splat2D& s, const Eigen::Vector2d& pixel) {
    return std::min(kMaxAlpha, detail::raw_alpha(s, pixel));
}

double clipped_alpha(const Splat2D& s, const Eigen::Vector2d& pixel, const Camera& cam, const ClipConfig& clip,
                     const ChordClipper* clipper) {
    std::optional<Ray> ray;
    return detail::clipped_alpha(s, pixel, cam, clip, clipper, ray);
}

double clipped_alpha(const Splat2D& s, const Eigen::Vector2d& pixel, const Camera& cam, const ClipConfig& clip,
                     const ChordClipper* clipper, std::optional<Ray>& ray) {
    return detail::clipped_alpha(s, pixel, cam, clip, clipper, ray);
}

PreparedFrame prepare_frame(const Scene& scene, const Camera& cam, const ClipConfig& clip, int threads) {
    clip.validate();
    cam.validate();
    const auto gaussians = scene.gaussians();
    const std::size_t n = gaussians.size();
    const int nthreads = threads > 0 ? threads : omp_get_max_threads();
    // Each thread handles one contiguous slice; concatenating the slices in
    // thread order keeps splats in source order for any thread count.
    const Eigen::Vector3d origin = cam.position();
    std::vector<PreparedFrame> parts(static_cast<std::size_t>(nthreads));

#pragma omp parallel num_threads(nthreads)
    {
        const auto team = static_cast<std::size_t>(omp_get_num_threads());
        const auto id = static_cast<std::size_t>(omp_get_thread_num());
        PreparedFrame& part = parts[id];
        for (std::size_t i = n * id / team; i < n * (id + 1) / team; ++i) {
            const Gaussian& g = gaussians[i];
            VisibilityClass vis = VisibilityClass::Visible;
            if (clip.mode == ClipMode::Hard) {
                if (signed_distance(*clip.plane, g.mu) < 0.0) {
                    continue;
                }
            } else if (clip.mode == ClipMode::RaRa) {
                vis = classify(g, *clip.plane);
                if (vis == VisibilityClass::Invisible) {
                    continue;
                }
            }
            auto s = project_gaussian(g, cam);
            if (!s) {
                continue;
            }
            s->vis = vis;
            s->source = static_cast<std::uint32_t>(i);
            part.splats.push_back(*s);
            if (clip.mode == ClipMode::RaRa && (clip.force_ray_trace || vis == VisibilityClass::Cutoff)) {
                part.clippers.emplace_back(std::in_place, origin, Ellipsoid::from_gaussian(g), *clip.plane);
            } else {
                part.clippers.emplace_back();
            }
        }
    }

    if (parts.size() == 1) {
        return std::move(parts.front());
    }
    PreparedFrame frame;
    std::size_t total = 0;
    for (const auto& p : parts) {
        total += p.splats.size();
    }
    frame.splats.reserve(total);
    frame.clippers.reserve(total);
    for (auto& p : parts) {
        frame.splats.insert(frame.splats.end(), p.splats.begin(), p.splats.end());
        frame.clippers.insert(frame.clippers.end(), p.clippers.begin(), p.clippers.end());
    }
    return frame;
}

} // namespace rara
