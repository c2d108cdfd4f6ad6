#pragma once

#include "rara/clip_geometry.hpp"

#include <Eigen/Core>

namespace rara {

/// Pinhole camera. Camera space is right-handed with +x right, +y down and
/// +z forward (the viewing direction). Pixel (i, j) is sampled at its own
/// integer coordinates, so the principal point pixel looks straight ahead.
struct Camera {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity(); // world -> camera
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();
    double fx = 1.0, fy = 1.0;
    double cx = 0.0, cy = 0.0;
    int width = 1, height = 1;
    double near = 0.01;

    Eigen::Vector3d to_camera(const Eigen::Vector3d& world) const {
        return rotation * world + translation;
    }
    Eigen::Vector3d position() const { return -(rotation.transpose() * translation); }
    Eigen::Vector3d forward() const { return rotation.row(2).transpose(); }

    /// Throws ConfigError when an invariant does not hold.
    void validate() const;

    /// Vertical field of view in degrees; square pixels, centered principal point.
    static Camera look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target,
                          const Eigen::Vector3d& up, double fov_y_deg, int width, int height,
                          double near = 0.01);

    /// Frames `bounds` from a fixed oblique direction.
    static Camera fit_bounds(const Bounds& bounds, int width, int height, double fov_y_deg = 45.0);
};

/// Ray through the pixel at (px, py). Throws ParameterError outside the image.
Ray pixel_ray(const Camera& cam, double px, double py);

} // namespace rara
