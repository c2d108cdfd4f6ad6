#pragma once

// Test-only reference computations. Nothing here calls into the library's
// geometry or compositing code paths it is used to check.

#include "rara/rasterizer.hpp"
#include "rara/scene.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <vector>

namespace rara::oracle {

// Rotation matrix from a unit quaternion, written out by hand.
inline Eigen::Matrix3d rotation_matrix(const Eigen::Quaterniond& q) {
    const double w = q.w(), x = q.x(), y = q.y(), z = q.z();
    Eigen::Matrix3d r;
    r << 1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w), //
        2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w),  //
        2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y);
    return r;
}

// Squared Mahalanobis distance of `p` in units of the 3-sigma surface,
// through the full covariance inverse rather than the per-axis transform.
class EllipsoidField {
public:
    explicit EllipsoidField(const Gaussian& g) : mu_(g.mu) {
        const Eigen::Matrix3d r = rotation_matrix(g.rotation);
        const Eigen::Matrix3d cov = r * g.scale.array().square().matrix().asDiagonal() * r.transpose();
        inv_ = (9.0 * cov).inverse();
    }
    double level(const Eigen::Vector3d& p) const {
        const Eigen::Vector3d d = p - mu_;
        return d.dot(inv_ * d);
    }

private:
    Eigen::Vector3d mu_;
    Eigen::Matrix3d inv_;
};

// f(t) = level(e + t d) - 1 along a ray.
struct RayLevel {
    EllipsoidField field;
    Eigen::Vector3d origin, dir;
    double operator()(double t) const { return field.level(origin + t * dir) - 1.0; }
};

// Golden-section minimization of a convex function on [lo, hi].
template <typename F>
double argmin_golden(F f, double lo, double hi, int iterations = 200) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iterations; ++i) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

// Root of f in [a, b] with f(a), f(b) of opposite sign.
template <typename F>
double bisect(F f, double a, double b, int iterations = 200) {
    double fa = f(a);
    for (int i = 0; i < iterations; ++i) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if (fm == 0.0) {
            return m;
        }
        if ((fm < 0.0) == (fa < 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

struct BisectionResult {
    double min_value;
    std::optional<std::pair<double, double>> roots;
};

// Minimum of f by golden section, then both roots by bisection outward
// from the minimizer when the minimum is negative.
inline BisectionResult bisection_intersect(const Gaussian& g, const Eigen::Vector3d& origin,
                                           const Eigen::Vector3d& dir) {
    RayLevel f{EllipsoidField(g), origin, dir};
    const double span = 10.0 * ((origin - g.mu).norm() + 3.0 * g.scale.maxCoeff() + 1.0);
    const double tmin = argmin_golden(f, -span, span);
    BisectionResult out{f(tmin), std::nullopt};
    if (out.min_value < 0.0) {
        double lo = tmin - 1.0, hi = tmin + 1.0;
        while (f(lo) < 0.0) lo = tmin - 2.0 * (tmin - lo);
        while (f(hi) < 0.0) hi = tmin + 2.0 * (hi - tmin);
        out.roots = std::make_pair(bisect(f, lo, tmin), bisect(f, tmin, hi));
    }
    return out;
}

// Fraction of `samples` evenly spaced points inside the 3-sigma ellipsoid
// along the ray that are also on the visible side of n.x + d > 0. Returns
// nothing when no sample lands inside.
inline std::optional<double> sampled_visible_fraction(const Gaussian& g, const Eigen::Vector3d& origin,
                                                      const Eigen::Vector3d& dir, const Eigen::Vector3d& n, double d,
                                                      double t_lo, double t_hi, int samples) {
    const EllipsoidField field(g);
    long inside = 0, visible = 0;
    for (int i = 0; i < samples; ++i) {
        const double t = t_lo + (t_hi - t_lo) * (i + 0.5) / samples;
        const Eigen::Vector3d p = origin + t * dir;
        if (field.level(p) <= 1.0) {
            ++inside;
            if (n.dot(p) + d > 0.0) {
                ++visible;
            }
        }
    }
    if (inside == 0) {
        return std::nullopt;
    }
    return static_cast<double>(visible) / static_cast<double>(inside);
}

// C = sum_k c_k a_k prod_{j<k} (1 - a_j) with every product recomputed from
// scratch. `contributions` must already be in front-to-back order.
struct Contribution {
    Eigen::Vector3d color;
    double alpha;
};

inline Eigen::Vector3d composite_eq2(const std::vector<Contribution>& contributions,
                                     const Eigen::Vector3d& background = Eigen::Vector3d::Zero()) {
    Eigen::Vector3d c = Eigen::Vector3d::Zero();
    for (std::size_t k = 0; k < contributions.size(); ++k) {
        double t = 1.0;
        for (std::size_t j = 0; j < k; ++j) {
            t *= 1.0 - contributions[j].alpha;
        }
        c += contributions[k].color * contributions[k].alpha * t;
    }
    double t_all = 1.0;
    for (const auto& k : contributions) {
        t_all *= 1.0 - k.alpha;
    }
    return c + t_all * background;
}

// Whole-image brute force: every splat against every pixel, full sort.
inline Image brute_force_render(const Scene& scene, const Camera& cam, const ClipConfig& clip) {
    const PreparedFrame frame = prepare_frame(scene, cam, clip, 1);
    Image out(cam.width, cam.height);
    for (int y = 0; y < cam.height; ++y) {
        for (int x = 0; x < cam.width; ++x) {
            std::vector<std::size_t> order;
            std::vector<double> alphas(frame.splats.size(), 0.0);
            for (std::size_t i = 0; i < frame.splats.size(); ++i) {
                const auto& clipper = frame.clippers[i];
                alphas[i] = clipped_alpha(frame.splats[i], Eigen::Vector2d(x, y), cam, clip, clipper ? &*clipper : nullptr);
                if (alphas[i] > 0.0) {
                    order.push_back(i);
                }
            }
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                const auto& sa = frame.splats[a];
                const auto& sb = frame.splats[b];
                return sa.depth != sb.depth ? sa.depth < sb.depth : sa.source < sb.source;
            });
            std::vector<Contribution> list;
            for (std::size_t i : order) {
                list.push_back({frame.splats[i].color, alphas[i]});
            }
            out.at(x, y) = composite_eq2(list).cast<float>();
        }
    }
    return out;
}

// Random generators shared by property tests.
class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

    Eigen::Vector3d unit_vector() {
        Eigen::Vector3d v;
        do {
            v = {uniform(-1, 1), uniform(-1, 1), uniform(-1, 1)};
        } while (v.squaredNorm() < 1e-4 || v.squaredNorm() > 1.0);
        return v.normalized();
    }
    Eigen::Vector3d point(double extent) { return {uniform(-extent, extent), uniform(-extent, extent), uniform(-extent, extent)}; }

    Gaussian gaussian(double sigma_lo = 0.05, double sigma_hi = 1.0) {
        Gaussian g;
        g.mu = point(2.0);
        g.scale = {uniform(sigma_lo, sigma_hi), uniform(sigma_lo, sigma_hi), uniform(sigma_lo, sigma_hi)};
        Eigen::Vector4d q(uniform(-1, 1), uniform(-1, 1), uniform(-1, 1), uniform(-1, 1));
        while (q.norm() < 1e-3) q = {uniform(-1, 1), uniform(-1, 1), uniform(-1, 1), uniform(-1, 1)};
        q.normalize();
        g.rotation = Eigen::Quaterniond(q[0], q[1], q[2], q[3]);
        g.delta = uniform(0.05, 1.0);
        g.color = {uniform(0, 1), uniform(0, 1), uniform(0, 1)};
        return g;
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

} // namespace rara::oracle
