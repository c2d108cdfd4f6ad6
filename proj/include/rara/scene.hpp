#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace rara {

/// One anisotropic 3D Gaussian primitive. The covariance R S^2 R^T is never
/// stored; `scale` holds per-axis standard deviations.
struct Gaussian {
    Eigen::Vector3d mu = Eigen::Vector3d::Zero();
    Eigen::Vector3d scale = Eigen::Vector3d::Ones();
    Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
    double delta = 1.0;
    Eigen::Vector3d color = Eigen::Vector3d::Constant(0.5);

    double max_scale() const { return scale.maxCoeff(); }
};

struct Bounds {
    Eigen::Vector3d min = Eigen::Vector3d::Zero();
    Eigen::Vector3d max = Eigen::Vector3d::Zero();

    Eigen::Vector3d center() const { return 0.5 * (min + max); }
    Eigen::Vector3d extent() const { return max - min; }
    double diagonal() const { return extent().norm(); }
    bool contains(const Eigen::Vector3d& p) const {
        return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
    }
};

/// Throws ParameterError naming the violated invariant; `where` prefixes the message.
void validate_gaussian(const Gaussian& g, const std::string& where = {});

/// Box containing mu +- 3 * max(scale) of every Gaussian. Throws EmptySceneError.
Bounds compute_bounds(std::span<const Gaussian> gaussians);

/// Immutable after construction; share through `SceneHandle` across threads.
class Scene {
public:
    /// Validates every primitive, normalizes quaternions, computes bounds.
    Scene(std::string name, std::vector<Gaussian> gaussians);

    const std::string& name() const { return name_; }
    std::span<const Gaussian> gaussians() const { return gaussians_; }
    std::size_t size() const { return gaussians_.size(); }
    const Bounds& bounds() const { return bounds_; }

private:
    std::string name_;
    std::vector<Gaussian> gaussians_;
    Bounds bounds_;
};

using SceneHandle = std::shared_ptr<const Scene>;

// 3DGS-convention binary little-endian PLY.
Scene load_ply(const std::filesystem::path& path);
void write_ply(const Scene& scene, const std::filesystem::path& path);

inline constexpr double kShC0 = 0.28209479177387814;

// Synthetic scene generators. The JSON form carries a `kind` discriminator:
// "grid", "cluster" or "strands".
struct GridSpec {
    int nx = 2, ny = 2, nz = 2;
    double spacing = 1.0;
    double sigma = 0.1;
    double opacity = 0.8;
};

struct ClusterSpec {
    int count = 100;
    std::uint64_t seed = 1;
    double sigma_min = 0.02;
    double sigma_max = 0.2;
    double radius = 1.0;
    double opacity = 0.8;
};

struct StrandSpec {
    int strands = 100;
    int segments = 20;
    double elongation = 20.0; // along-strand sigma / cross-section sigma
    double thickness = 0.004; // cross-section sigma
    double length = 2.0;
    double spread = 0.5;
    std::uint64_t seed = 1;
    double opacity = 0.9;
};

using SyntheticSpec = std::variant<GridSpec, ClusterSpec, StrandSpec>;

Scene generate_synthetic(const SyntheticSpec& spec);

/// Throws ParameterError on unknown kind or bad field types.
SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);
nlohmann::json synthetic_spec_to_json(const SyntheticSpec& spec);
std::string synthetic_kind(const SyntheticSpec& spec);

/// Loads a `.ply` file or a `.json` synthetic descriptor.
Scene load_scene(const std::filesystem::path& path);

} // namespace rara
