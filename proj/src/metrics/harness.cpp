#include "rara/errors.hpp"
#include "rara/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <limits>

namespace rara {
namespace {

// Range of n.x over the eight corners of the box.
std::pair<double, double> projected_range(const Bounds& b, const Eigen::Vector3d& n) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int corner = 0; corner < 8; ++corner) {
        const Eigen::Vector3d p((corner & 1) ? b.max.x() : b.min.x(), (corner & 2) ? b.max.y() : b.min.y(),
                                (corner & 4) ? b.max.z() : b.min.z());
        const double s = n.dot(p);
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    return {lo, hi};
}

} // namespace

ClipPlane plane_beyond_bounds(const Bounds& bounds, const Eigen::Vector3d& normal) {
    const Eigen::Vector3d n = normal.normalized();
    const auto [lo, hi] = projected_range(bounds, n);
    return ClipPlane(n, -lo + 1e9);
}

std::vector<AblationReport> run_ablation(const Scene& scene, const Camera& cam, const RenderOptions& options,
                                         const Eigen::Vector3d& normal) {
    const ClipPlane plane = plane_beyond_bounds(scene.bounds(), normal);
    const Image reference = render(scene, cam, ClipConfig::none(), options);

    ClipConfig naive = ClipConfig::rara(plane);
    naive.force_ray_trace = true;
    const Image without = render(scene, cam, naive, options);
    const Image with = render(scene, cam, ClipConfig::rara(plane), options);

    return {
        AblationReport{"wo RaRa", l1_error(without, reference), ssim(without, reference)},
        AblationReport{"w RaRa", l1_error(with, reference), ssim(with, reference)},
    };
}

std::vector<double> sweep_offsets(const Bounds& bounds, const Eigen::Vector3d& normal, int frames) {
    if (frames < 1) {
        throw ParameterError("sweep: frames must be >= 1");
    }
    const Eigen::Vector3d n = normal.normalized();
    const auto [lo, hi] = projected_range(bounds, n);
    const double margin = 1e-3 * std::max(bounds.diagonal(), 1e-9);
    // Visible side is n.x > -d: start with the plane below `lo`, end above `hi`.
    const double start = -(lo - margin);
    const double end = -(hi + margin);
    std::vector<double> offsets(static_cast<std::size_t>(frames));
    for (int i = 0; i < frames; ++i) {
        const double t = frames == 1 ? 0.0 : static_cast<double>(i) / (frames - 1);
        offsets[static_cast<std::size_t>(i)] = start + t * (end - start);
    }
    return offsets;
}

SweepBenchReport run_sweep_bench(const Scene& scene, const Camera& cam, ClipMode mode, int frames,
                                 const RenderOptions& options, const Eigen::Vector3d& normal) {
    const auto offsets = sweep_offsets(scene.bounds(), normal, frames);
    const Eigen::Vector3d n = normal.normalized();
    const auto config_for = [&](double offset) {
        ClipConfig c;
        c.mode = mode;
        if (mode != ClipMode::None) {
            c.plane = ClipPlane(n, offset);
        }
        return c;
    };

    render(scene, cam, config_for(offsets.front()), options); // warm-up

    SweepBenchReport report;
    report.mode = std::string(to_string(mode));
    report.frames = frames;
    report.plane_start = offsets.front();
    report.plane_end = offsets.back();
    std::vector<double> fps;
    for (double offset : offsets) {
        const ClipConfig config = config_for(offset);
        const auto t0 = std::chrono::steady_clock::now();
        const Image frame = render(scene, cam, config, options);
        const auto t1 = std::chrono::steady_clock::now();
        const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        report.frame_ms.push_back(ms);
        fps.push_back(1000.0 / std::max(ms, 1e-6));
    }
    report.min_fps = *std::min_element(fps.begin(), fps.end());
    report.max_fps = *std::max_element(fps.begin(), fps.end());
    double sum = 0.0;
    for (double f : fps) {
        sum += f;
    }
    report.mean_fps = std::clamp(sum / static_cast<double>(fps.size()), report.min_fps, report.max_fps);
    return report;
}

} // namespace rara
