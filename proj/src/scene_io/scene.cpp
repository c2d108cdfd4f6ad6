#include "rara/scene.hpp"

#include "rara/errors.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace rara {

void validate_gaussian(const Gaussian& g, const std::string& where) {
    const std::string prefix = where.empty() ? std::string("gaussian: ") : where + ": ";
    if (!g.mu.allFinite()) {
        throw ParameterError(prefix + "non-finite center");
    }
    for (int i = 0; i < 3; ++i) {
        if (!std::isfinite(g.scale[i]) || g.scale[i] <= 0.0) {
            throw ParameterError(prefix + "scale must be finite and > 0");
        }
    }
    if (!g.rotation.coeffs().allFinite() || std::abs(g.rotation.norm() - 1.0) > 1e-6) {
        throw ParameterError(prefix + "rotation is not a unit quaternion");
    }
    if (!std::isfinite(g.delta) || g.delta <= 0.0 || g.delta > 1.0) {
        throw ParameterError(prefix + "opacity must lie in (0, 1]");
    }
    for (int i = 0; i < 3; ++i) {
        if (!std::isfinite(g.color[i]) || g.color[i] < 0.0 || g.color[i] > 1.0) {
            throw ParameterError(prefix + "color channel outside [0, 1]");
        }
    }
}

Bounds compute_bounds(std::span<const Gaussian> gaussians) {
    if (gaussians.empty()) {
        throw EmptySceneError("cannot compute bounds of an empty scene");
    }
    constexpr double inf = std::numeric_limits<double>::infinity();
    Bounds b{Eigen::Vector3d::Constant(inf), Eigen::Vector3d::Constant(-inf)};
    for (const auto& g : gaussians) {
        const double r = 3.0 * g.max_scale();
        b.min = b.min.cwiseMin((g.mu.array() - r).matrix());
        b.max = b.max.cwiseMax((g.mu.array() + r).matrix());
    }
    return b;
}

Scene::Scene(std::string name, std::vector<Gaussian> gaussians)
    : name_(std::move(name)), gaussians_(std::move(gaussians)) {
    if (gaussians_.empty()) {
        throw EmptySceneError("scene '" + name_ + "' has no gaussians");
    }
    for (std::size_t i = 0; i < gaussians_.size(); ++i) {
        auto& g = gaussians_[i];
        const double n = g.rotation.norm();
        if (std::isfinite(n) && n > 0.0) {
            g.rotation.coeffs() /= n;
        }
        validate_gaussian(g, "gaussian " + std::to_string(i));
    }
    bounds_ = compute_bounds(gaussians_);
}

Scene load_scene(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".ply") {
        return load_ply(path);
    }
    if (ext == ".json") {
        std::ifstream in(path);
        if (!in) {
            throw FormatError("cannot open " + path.string());
        }
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(path.string() + ": " + e.what());
        }
        Scene generated = generate_synthetic(synthetic_spec_from_json(j));
        return Scene(path.stem().string(), {generated.gaussians().begin(), generated.gaussians().end()});
    }
    throw FormatError("unsupported scene file extension '" + ext + "' (expected .ply or .json)");
}

} // namespace rara
