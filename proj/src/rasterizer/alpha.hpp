#pragma once

// Per-pixel alpha, shared by the public wrappers and the tile loop so the
// hot path can be inlined.

#include "rara/errors.hpp"
#include "rara/rasterizer.hpp"

#include <algorithm>
#include <cmath>

namespace rara::detail {

// Unclamped delta * exp(-m^2 / 2), zero outside the influence region.
inline double raw_alpha(const Splat2D& s, const Eigen::Vector2d& pixel) {
    const Eigen::Vector2d d = pixel - s.center;
    const double m2 = d.dot(s.conic * d);
    if (!(m2 <= kInfluenceSigma * kInfluenceSigma)) {
        return 0.0;
    }
    return s.delta * std::exp(-0.5 * m2);
}

// Alpha of a splat that needs a per-pixel ray, kept out of line so the
// common path below stays small enough to inline.
[[gnu::noinline]] inline double traced_alpha(double alpha, const Eigen::Vector2d& pixel, const Camera& cam,
                                             const ClipConfig& clip, const ChordClipper* clipper,
                                             std::optional<Ray>& ray) {
    if (clipper == nullptr) {
        throw GeometryError("clipped_alpha: traced splat without a clipper");
    }
    if (!ray) {
        ray = pixel_ray(cam, pixel.x(), pixel.y());
    }
    double weight = 0.0;
    if (clip.force_ray_trace) {
        const ChordClip chord = (*clipper)(ray->dir);
        weight = chord.hit ? chord.weight : 0.0;
    } else {
        weight = clipper->weight(ray->dir);
    }
    return std::min(kMaxAlpha, alpha * weight);
}

inline double clipped_alpha(const Splat2D& s, const Eigen::Vector2d& pixel, const Camera& cam,
                            const ClipConfig& clip, const ChordClipper* clipper, std::optional<Ray>& ray) {
    const double alpha = raw_alpha(s, pixel);
    if (alpha == 0.0) {
        return 0.0;
    }
    const bool traced = clip.mode == ClipMode::RaRa && s.vis != VisibilityClass::Invisible &&
                        (clip.force_ray_trace || s.vis == VisibilityClass::Cutoff);
    // A one-sided clipper on the visible side has weight 1 for every ray.
    if (!traced || (!clip.force_ray_trace && clipper != nullptr && clipper->side() > 0)) {
        return std::min(kMaxAlpha, alpha);
    }
    return traced_alpha(alpha, pixel, cam, clip, clipper, ray);
}

} // namespace rara::detail
