#include "rara/errors.hpp"
#include "rara/scene.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>

namespace rara {
namespace {

// Uniform double in [0, 1) from the top 53 bits; independent of the
// standard library's distribution implementation.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    Eigen::Quaterniond rotation() {
        // Shoemake's uniform random quaternion.
        const double u1 = uniform(), u2 = uniform(), u3 = uniform();
        const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
        constexpr double tau = 2.0 * std::numbers::pi;
        return Eigen::Quaterniond(b * std::cos(tau * u3), a * std::sin(tau * u2), a * std::cos(tau * u2),
                                  b * std::sin(tau * u3));
    }

private:
    std::mt19937_64 engine_;
};

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw ParameterError(std::string("synthetic scene: '") + name + "' must be > 0");
    }
}

void require_opacity(double v) {
    require_positive(v, "opacity");
    if (v > 1.0) {
        throw ParameterError("synthetic scene: 'opacity' must be <= 1");
    }
}

Scene make_grid(const GridSpec& s) {
    require_positive(s.nx, "nx");
    require_positive(s.ny, "ny");
    require_positive(s.nz, "nz");
    require_positive(s.spacing, "spacing");
    require_positive(s.sigma, "sigma");
    require_opacity(s.opacity);
    const Eigen::Vector3d origin = -0.5 * s.spacing * Eigen::Vector3d(s.nx - 1, s.ny - 1, s.nz - 1);
    const auto ramp = [](int i, int n) { return n > 1 ? static_cast<double>(i) / (n - 1) : 0.5; };

    std::vector<Gaussian> out;
    out.reserve(static_cast<std::size_t>(s.nx) * s.ny * s.nz);
    for (int k = 0; k < s.nz; ++k) {
        for (int j = 0; j < s.ny; ++j) {
            for (int i = 0; i < s.nx; ++i) {
                Gaussian g;
                g.mu = origin + s.spacing * Eigen::Vector3d(i, j, k);
                g.scale = Eigen::Vector3d::Constant(s.sigma);
                g.delta = s.opacity;
                g.color = {0.2 + 0.8 * ramp(i, s.nx), 0.2 + 0.8 * ramp(j, s.ny), 0.2 + 0.8 * ramp(k, s.nz)};
                out.push_back(g);
            }
        }
    }
    return Scene("grid", std::move(out));
}

Scene make_cluster(const ClusterSpec& s) {
    require_positive(s.count, "count");
    require_positive(s.sigma_min, "sigma_min");
    require_positive(s.sigma_max, "sigma_max");
    require_positive(s.radius, "radius");
    require_opacity(s.opacity);
    if (s.sigma_max < s.sigma_min) {
        throw ParameterError("synthetic scene: sigma_max < sigma_min");
    }
    Rng rng(s.seed);
    std::vector<Gaussian> out(static_cast<std::size_t>(s.count));
    for (auto& g : out) {
        // Rejection-sample a point in the unit ball.
        Eigen::Vector3d p;
        do {
            p = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        } while (p.squaredNorm() > 1.0);
        g.mu = s.radius * p;
        g.scale = {rng.uniform(s.sigma_min, s.sigma_max), rng.uniform(s.sigma_min, s.sigma_max),
                   rng.uniform(s.sigma_min, s.sigma_max)};
        g.rotation = rng.rotation();
        g.delta = s.opacity;
        g.color = {rng.uniform(), rng.uniform(), rng.uniform()};
    }
    return Scene("cluster", std::move(out));
}

Scene make_strands(const StrandSpec& s) {
    require_positive(s.strands, "strands");
    require_positive(s.segments, "segments");
    require_positive(s.elongation, "elongation");
    require_positive(s.length, "length");
    require_positive(s.spread, "spread");
    require_opacity(s.opacity);
    Rng rng(s.seed);
    const double seg_len = s.length / s.segments;
    // Neighbouring segments overlap at one long-axis sigma.
    const double sigma_long = 0.5 * seg_len;
    double sigma_thin = sigma_long / s.elongation;
    while (sigma_long / sigma_thin < s.elongation) {
        sigma_thin = std::nextafter(sigma_thin, 0.0);
    }

    std::vector<Gaussian> out;
    out.reserve(static_cast<std::size_t>(s.strands) * s.segments);
    for (int k = 0; k < s.strands; ++k) {
        const double r = s.spread * std::sqrt(rng.uniform());
        const double phi = 2.0 * std::numbers::pi * rng.uniform();
        Eigen::Vector3d p(r * std::cos(phi), 0.5 * s.length, r * std::sin(phi));
        Eigen::Vector3d dir = Eigen::Vector3d(rng.uniform(-0.2, 0.2), -1.0, rng.uniform(-0.2, 0.2)).normalized();
        const double curl = rng.uniform(0.5, 3.0);
        const double phase = 2.0 * std::numbers::pi * rng.uniform();
        const Eigen::Vector3d base_color(rng.uniform(0.35, 0.6), rng.uniform(0.2, 0.35), rng.uniform(0.05, 0.2));

        for (int i = 0; i < s.segments; ++i) {
            const double u = static_cast<double>(i) / s.segments;
            const double angle = phase + curl * 2.0 * std::numbers::pi * u;
            Eigen::Vector3d wobble(0.15 * std::cos(angle), 0.0, 0.15 * std::sin(angle));
            const Eigen::Vector3d tangent = (dir + wobble).normalized();

            Gaussian g;
            g.mu = p + 0.5 * seg_len * tangent;
            g.scale = {sigma_long, sigma_thin, sigma_thin};
            g.rotation = Eigen::Quaterniond::FromTwoVectors(Eigen::Vector3d::UnitX(), tangent);
            g.delta = s.opacity;
            g.color = (base_color * (0.8 + 0.4 * u)).cwiseMin(1.0);
            out.push_back(g);
            p += seg_len * tangent;
        }
    }
    return Scene("strands", std::move(out));
}

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& value) {
    if (!j.contains(key)) {
        return;
    }
    try {
        value = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ParameterError(std::string("synthetic scene: field '") + key + "' has the wrong type");
    }
}

} // namespace

Scene generate_synthetic(const SyntheticSpec& spec) {
    return std::visit(
        [](const auto& s) -> Scene {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, GridSpec>) {
                return make_grid(s);
            } else if constexpr (std::is_same_v<T, ClusterSpec>) {
                return make_cluster(s);
            } else {
                return make_strands(s);
            }
        },
        spec);
}

std::string synthetic_kind(const SyntheticSpec& spec) {
    static constexpr const char* names[] = {"grid", "cluster", "strands"};
    return names[spec.index()];
}

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
        throw ParameterError("synthetic scene: expected an object with a string 'kind'");
    }
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "grid") {
        GridSpec s;
        std::array<int, 3> count{s.nx, s.ny, s.nz};
        read_field(j, "count", count);
        s.nx = count[0];
        s.ny = count[1];
        s.nz = count[2];
        read_field(j, "spacing", s.spacing);
        read_field(j, "sigma", s.sigma);
        read_field(j, "opacity", s.opacity);
        return s;
    }
    if (kind == "cluster") {
        ClusterSpec s;
        read_field(j, "count", s.count);
        read_field(j, "seed", s.seed);
        read_field(j, "sigma_min", s.sigma_min);
        read_field(j, "sigma_max", s.sigma_max);
        read_field(j, "radius", s.radius);
        read_field(j, "opacity", s.opacity);
        return s;
    }
    if (kind == "strands") {
        StrandSpec s;
        read_field(j, "strands", s.strands);
        read_field(j, "segments", s.segments);
        read_field(j, "elongation", s.elongation);
        read_field(j, "length", s.length);
        read_field(j, "spread", s.spread);
        read_field(j, "seed", s.seed);
        read_field(j, "opacity", s.opacity);
        return s;
    }
    throw ParameterError("synthetic scene: unknown kind '" + kind + "'");
}

nlohmann::json synthetic_spec_to_json(const SyntheticSpec& spec) {
    return std::visit(
        [](const auto& s) -> nlohmann::json {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, GridSpec>) {
                return {{"kind", "grid"},
                        {"count", {s.nx, s.ny, s.nz}},
                        {"spacing", s.spacing},
                        {"sigma", s.sigma},
                        {"opacity", s.opacity}};
            } else if constexpr (std::is_same_v<T, ClusterSpec>) {
                return {{"kind", "cluster"},     {"count", s.count},         {"seed", s.seed},
                        {"sigma_min", s.sigma_min}, {"sigma_max", s.sigma_max}, {"radius", s.radius},
                        {"opacity", s.opacity}};
            } else {
                return {{"kind", "strands"},       {"strands", s.strands}, {"segments", s.segments},
                        {"elongation", s.elongation}, {"length", s.length},   {"spread", s.spread},
                        {"seed", s.seed},          {"opacity", s.opacity}};
            }
        },
        spec);
}

} // namespace rara
