#include "rara/clip_geometry.hpp"

#include "rara/errors.hpp"

#include <cmath>

namespace rara {

ClipPlane::ClipPlane(const Eigen::Vector3d& normal, double offset) : normal_(normal), offset_(offset) {
    if (!normal.allFinite() || !std::isfinite(offset) || std::abs(normal.norm() - 1.0) > 1e-9) {
        throw GeometryError("clip plane normal must be a finite unit vector");
    }
}

ClipPlane ClipPlane::from_unnormalized(const Eigen::Vector3d& normal, double offset) {
    const double n = normal.norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw GeometryError("clip plane normal must be non-zero");
    }
    return ClipPlane(normal / n, offset / n);
}

std::string_view to_string(VisibilityClass c) {
    switch (c) {
    case VisibilityClass::Invisible: return "invisible";
    case VisibilityClass::Visible: return "visible";
    case VisibilityClass::Cutoff: return "cutoff";
    }
    return "?";
}

Ellipsoid Ellipsoid::from_gaussian(const Gaussian& g) {
    if (!((g.scale.array() > 0.0).all()) || !g.scale.allFinite()) {
        throw GeometryError("ellipsoid transform is singular (non-positive scale)");
    }
    // M = R * 3S, so M^-1 = (3S)^-1 * R^T: row i of R^T divided by 3 sigma_i.
    const Eigen::Matrix3d rt = g.rotation.normalized().toRotationMatrix().transpose();
    Ellipsoid e;
    e.center = g.mu;
    for (int i = 0; i < 3; ++i) {
        e.to_unit.row(i) = rt.row(i) / (3.0 * g.scale[i]);
    }
    e.from_unit = rt.transpose() * (3.0 * g.scale).asDiagonal();
    return e;
}

std::optional<RayInterval> ray_ellipsoid_intersect(const Ray& ray, const Ellipsoid& e) {
    const Eigen::Vector3d o = e.to_unit * (ray.origin - e.center);
    const Eigen::Vector3d v = e.to_unit * ray.dir;
    const double a = v.squaredNorm();
    const double b = 2.0 * o.dot(v);
    const double c = o.squaredNorm() - 1.0;
    const double disc = b * b - 4.0 * a * c;
    if (!(disc > kTangentEpsilon)) {
        return std::nullopt;
    }
    // Cancellation-free form of (-b +- sqrt(disc)) / 2a.
    const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
    double t1 = q / a;
    double t2 = c / q;
    if (t1 > t2) {
        std::swap(t1, t2);
    }
    return RayInterval{t1, t2};
}

std::optional<RayInterval> ray_ellipsoid_intersect(const Ray& ray, const Gaussian& g) {
    return ray_ellipsoid_intersect(ray, Ellipsoid::from_gaussian(g));
}

std::optional<double> ray_plane_intersect(const Ray& ray, const ClipPlane& plane) {
    const double denom = plane.normal().dot(ray.dir);
    if (std::abs(denom) <= kParallelEpsilon) {
        return std::nullopt;
    }
    return -(plane.normal().dot(ray.origin) + plane.offset()) / denom;
}

ChordClipper::ChordClipper(const Eigen::Vector3d& origin, const Ellipsoid& e, const ClipPlane& plane)
    : to_unit_(e.to_unit),
      origin_unit_(e.to_unit * (origin - e.center)),
      c_(origin_unit_.squaredNorm() - 1.0),
      normal_(plane.normal()),
      origin_distance_(signed_distance(plane, origin)) {
    // n.x over the ellipsoid spans sd(mu) +- |M^T n|. The margin keeps
    // round-off in the per-ray path from disagreeing with the shortcut.
    const double center = signed_distance(plane, e.center);
    const double support = (e.from_unit.transpose() * plane.normal()).norm();
    const double margin = 1e-9 * (1.0 + std::abs(center) + support + std::abs(origin_distance_));
    if (center - support > margin) {
        side_ = 1;
    } else if (center + support < -margin) {
        side_ = -1;
    }
}

std::optional<RayInterval> ChordClipper::chord(const Eigen::Vector3d& dir) const {
    const Eigen::Vector3d v = to_unit_ * dir;
    const double a = v.squaredNorm();
    const double b = 2.0 * origin_unit_.dot(v);
    const double disc = b * b - 4.0 * a * c_;
    if (!(disc > kTangentEpsilon)) {
        return std::nullopt;
    }
    const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
    return RayInterval{std::min(q / a, c_ / q), std::max(q / a, c_ / q)};
}

double ChordClipper::weight(const Eigen::Vector3d& dir) const {
    if (side_ > 0) {
        return 1.0;
    }
    if (side_ < 0) {
        return chord(dir) ? 0.0 : 1.0;
    }
    return (*this)(dir).weight;
}

ChordClip ChordClipper::operator()(const Eigen::Vector3d& dir) const {
    ChordClip out;
    const auto hit = chord(dir);
    if (!hit) {
        return out; // miss: keep the rasterized opacity
    }
    const double t1 = hit->t1;
    const double t2 = hit->t2;
    out.hit = true;
    out.t_enter = t1;
    out.t_exit = t2;

    // Signed distance along the ray is linear: sd(t) = sd(0) + t n.dir.
    const double slope = normal_.dot(dir);
    const auto visible_at = [&](double t) { return origin_distance_ + t * slope > 0.0; };
    if (std::abs(slope) > kParallelEpsilon) {
        out.t_plane = -origin_distance_ / slope;
    }
    const bool crosses = out.t_plane && *out.t_plane > t1 && *out.t_plane < t2;
    if (!crosses) {
        out.weight = visible_at(0.5 * (t1 + t2)) ? 1.0 : 0.0;
        return out;
    }
    if (visible_at(t1) && visible_at(t2)) {
        out.weight = 1.0; // only reachable through round-off near tangency
        return out;
    }
    // The ray enters the visible half-space when n.dir > 0. Deciding the side
    // by direction stays correct when tp sits within round-off of an endpoint.
    const double tp = *out.t_plane;
    const double length = t2 - t1;
    out.weight = slope > 0.0 ? (t2 - tp) / length : (tp - t1) / length;
    return out;
}

ChordClip decay_weight(const Ray& ray, const Ellipsoid& e, const ClipPlane& plane) {
    return ChordClipper(ray.origin, e, plane)(ray.dir);
}

ChordClip decay_weight(const Ray& ray, const Gaussian& g, const ClipPlane& plane) {
    return decay_weight(ray, Ellipsoid::from_gaussian(g), plane);
}

} // namespace rara
