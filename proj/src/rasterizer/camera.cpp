#include "rara/camera.hpp"

#include "rara/errors.hpp"

#include <cmath>
#include <numbers>

namespace rara {

void Camera::validate() const {
    const Eigen::Matrix3d gram = rotation * rotation.transpose();
    if (!rotation.allFinite() || !gram.isApprox(Eigen::Matrix3d::Identity(), 1e-6) ||
        std::abs(rotation.determinant() - 1.0) > 1e-6) {
        throw ConfigError("camera rotation is not orthonormal");
    }
    if (!translation.allFinite()) {
        throw ConfigError("camera translation is not finite");
    }
    if (!(fx > 0.0) || !(fy > 0.0)) {
        throw ConfigError("camera focal lengths must be > 0");
    }
    if (!(near > 0.0)) {
        throw ConfigError("camera near plane must be > 0");
    }
    if (width <= 0 || height <= 0) {
        throw ConfigError("camera resolution must be positive");
    }
}

Camera Camera::look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target, const Eigen::Vector3d& up,
                       double fov_y_deg, int width, int height, double near) {
    const Eigen::Vector3d forward = (target - eye).normalized();
    const Eigen::Vector3d right_raw = forward.cross(up);
    if (!(right_raw.norm() > 1e-12) || !forward.allFinite()) {
        throw ConfigError("look_at: degenerate eye/target/up");
    }
    if (!(fov_y_deg > 0.0 && fov_y_deg < 180.0)) {
        throw ConfigError("look_at: field of view must lie in (0, 180) degrees");
    }
    const Eigen::Vector3d right = right_raw.normalized();
    const Eigen::Vector3d down = forward.cross(right);

    Camera cam;
    cam.rotation.row(0) = right.transpose();
    cam.rotation.row(1) = down.transpose();
    cam.rotation.row(2) = forward.transpose();
    cam.translation = -(cam.rotation * eye);
    const double focal = 0.5 * height / std::tan(0.5 * fov_y_deg * std::numbers::pi / 180.0);
    cam.fx = focal;
    cam.fy = focal;
    cam.cx = 0.5 * (width - 1);
    cam.cy = 0.5 * (height - 1);
    cam.width = width;
    cam.height = height;
    cam.near = near;
    cam.validate();
    return cam;
}

Camera Camera::fit_bounds(const Bounds& bounds, int width, int height, double fov_y_deg) {
    const Eigen::Vector3d center = bounds.center();
    const double radius = std::max(0.5 * bounds.diagonal(), 1e-6);
    const double half_fov = 0.5 * fov_y_deg * std::numbers::pi / 180.0;
    const double distance = radius / std::sin(half_fov);
    const Eigen::Vector3d view_dir = Eigen::Vector3d(0.45, 0.3, -1.0).normalized();
    return look_at(center + distance * view_dir, center, Eigen::Vector3d::UnitY(), fov_y_deg, width, height,
                   0.01 * distance);
}

Ray pixel_ray(const Camera& cam, double px, double py) {
    if (!(px >= -0.5 && px < cam.width - 0.5 && py >= -0.5 && py < cam.height - 0.5)) {
        throw ParameterError("pixel_ray: pixel outside the image");
    }
    const Eigen::Vector3d local((px - cam.cx) / cam.fx, (py - cam.cy) / cam.fy, 1.0);
    return Ray{cam.position(), (cam.rotation.transpose() * local).normalized()};
}

} // namespace rara
