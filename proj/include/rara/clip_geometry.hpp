#pragma once

#include "rara/scene.hpp"

#include <Eigen/Core>

#include <optional>
#include <string_view>

// Plane, ray and ellipsoid math for partial-visibility clipping. All
// functions are pure and safe to call from any thread.
namespace rara {

/// Implicit plane n.x + d = 0. The visible half-space is n.x + d > 0; points
/// exactly on the plane are invisible.
class ClipPlane {
public:
    /// Throws GeometryError if |normal| is not 1 within 1e-9.
    ClipPlane(const Eigen::Vector3d& normal, double offset);

    /// Divides normal and offset by |normal|, so the same point set is
    /// described. Throws GeometryError on a zero vector.
    static ClipPlane from_unnormalized(const Eigen::Vector3d& normal, double offset);

    const Eigen::Vector3d& normal() const { return normal_; }
    double offset() const { return offset_; }

    ClipPlane flipped() const { return ClipPlane(-normal_, -offset_); }
    ClipPlane with_offset(double offset) const { return ClipPlane(normal_, offset); }

private:
    Eigen::Vector3d normal_;
    double offset_;
};

struct Ray {
    Eigen::Vector3d origin;
    Eigen::Vector3d dir; // unit length

    Eigen::Vector3d at(double t) const { return origin + t * dir; }
};

enum class VisibilityClass { Invisible, Visible, Cutoff };

std::string_view to_string(VisibilityClass c);

/// Ray/ellipsoid chord clipped by a plane. `weight` is the visible fraction
/// of the chord; without a plane crossing inside the chord it is 0 or 1.
struct ChordClip {
    bool hit = false;
    double t_enter = 0.0;
    double t_exit = 0.0;
    std::optional<double> t_plane;
    double weight = 1.0;
};

struct RayInterval {
    double t1;
    double t2;
};

/// Discriminants at or below this are tangent rays and count as misses.
inline constexpr double kTangentEpsilon = 1e-12;
/// |n.dir| at or below this means the ray is parallel to the plane.
inline constexpr double kParallelEpsilon = 1e-12;

inline double signed_distance(const ClipPlane& plane, const Eigen::Vector3d& point) {
    return plane.normal().dot(point) + plane.offset();
}
inline bool is_visible(const ClipPlane& plane, const Eigen::Vector3d& point) {
    return signed_distance(plane, point) > 0.0;
}

/// Radius of the isotropic bound used for classification: 3 * max sigma.
inline double classification_radius(const Gaussian& g) { return 3.0 * g.max_scale(); }

inline VisibilityClass classify(const Gaussian& g, const ClipPlane& plane) {
    const double dist = signed_distance(plane, g.mu);
    const double r = classification_radius(g);
    if (dist < -r) {
        return VisibilityClass::Invisible;
    }
    if (dist > r) {
        return VisibilityClass::Visible;
    }
    return VisibilityClass::Cutoff;
}

/// The 3-sigma ellipsoid of a Gaussian, with the inverse of M = R * 3S
/// cached so the per-pixel path does no decomposition.
struct Ellipsoid {
    Eigen::Vector3d center;
    Eigen::Matrix3d to_unit;   // M^-1
    Eigen::Matrix3d from_unit; // M

    /// Throws GeometryError if any scale component is not strictly positive.
    static Ellipsoid from_gaussian(const Gaussian& g);
};

/// Both roots of |M^-1 (e + t d - mu)|^2 = 1 sorted ascending, or nothing on
/// a miss or tangent. Roots may be negative.
std::optional<RayInterval> ray_ellipsoid_intersect(const Ray& ray, const Ellipsoid& e);
std::optional<RayInterval> ray_ellipsoid_intersect(const Ray& ray, const Gaussian& g);

std::optional<double> ray_plane_intersect(const Ray& ray, const ClipPlane& plane);

ChordClip decay_weight(const Ray& ray, const Ellipsoid& e, const ClipPlane& plane);
ChordClip decay_weight(const Ray& ray, const Gaussian& g, const ClipPlane& plane);

/// decay_weight for many rays from one origin against a fixed ellipsoid and
/// plane. Per-origin terms are computed once; decay_weight goes through this
/// class too, so both give identical results.
class ChordClipper {
public:
    ChordClipper(const Eigen::Vector3d& origin, const Ellipsoid& e, const ClipPlane& plane);

    /// `dir` must be a unit vector.
    ChordClip operator()(const Eigen::Vector3d& dir) const;

    /// operator()(dir).weight, skipping the plane terms when the whole
    /// ellipsoid lies on one side of the plane.
    double weight(const Eigen::Vector3d& dir) const;

    /// +1 if the ellipsoid lies entirely on the visible side, -1 if entirely
    /// on the invisible side, 0 if the plane may cut it.
    int side() const { return side_; }

private:
    std::optional<RayInterval> chord(const Eigen::Vector3d& dir) const;

    Eigen::Matrix3d to_unit_;
    Eigen::Vector3d origin_unit_; // M^-1 (e - mu)
    double c_;                    // |M^-1 (e - mu)|^2 - 1
    Eigen::Vector3d normal_;
    double origin_distance_;      // n.e + d
    int side_ = 0;
};

} // namespace rara
