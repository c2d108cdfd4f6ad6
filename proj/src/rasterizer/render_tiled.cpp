#include "rara/errors.hpp"
#include "rara/rasterizer.hpp"

#include "alpha.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

namespace rara {
namespace {

struct PixelRange {
    int x0, x1, y0, y1; // inclusive
};

// Pixels within the splat's influence radius, clipped to the image.
std::optional<PixelRange> footprint(const Splat2D& s, int width, int height) {
    PixelRange r{
        std::max(0, static_cast<int>(std::ceil(s.center.x() - s.radius))),
        std::min(width - 1, static_cast<int>(std::floor(s.center.x() + s.radius))),
        std::max(0, static_cast<int>(std::ceil(s.center.y() - s.radius))),
        std::min(height - 1, static_cast<int>(std::floor(s.center.y() + s.radius))),
    };
    if (r.x0 > r.x1 || r.y0 > r.y1) {
        return std::nullopt;
    }
    return r;
}

// Per-tile splat lists in CSR form.
struct TileBins {
    int tiles_x = 0, tiles_y = 0;
    std::vector<std::size_t> offsets;
    std::vector<std::uint32_t> entries;
};

TileBins bin_splats(const std::vector<Splat2D>& splats, int width, int height, int tile) {
    TileBins bins;
    bins.tiles_x = (width + tile - 1) / tile;
    bins.tiles_y = (height + tile - 1) / tile;
    const std::size_t tile_count = static_cast<std::size_t>(bins.tiles_x) * bins.tiles_y;
    bins.offsets.assign(tile_count + 1, 0);

    const auto for_each_tile = [&](const Splat2D& s, auto&& fn) {
        const auto r = footprint(s, width, height);
        if (!r) {
            return;
        }
        for (int ty = r->y0 / tile; ty <= r->y1 / tile; ++ty) {
            for (int tx = r->x0 / tile; tx <= r->x1 / tile; ++tx) {
                fn(static_cast<std::size_t>(ty) * bins.tiles_x + tx);
            }
        }
    };

    for (const auto& s : splats) {
        for_each_tile(s, [&](std::size_t t) { ++bins.offsets[t + 1]; });
    }
    for (std::size_t t = 0; t < tile_count; ++t) {
        bins.offsets[t + 1] += bins.offsets[t];
    }
    bins.entries.resize(bins.offsets.back());
    std::vector<std::size_t> cursor(bins.offsets.begin(), bins.offsets.end() - 1);
    for (std::size_t i = 0; i < splats.size(); ++i) {
        for_each_tile(splats[i], [&](std::size_t t) { bins.entries[cursor[t]++] = static_cast<std::uint32_t>(i); });
    }
    return bins;
}

} // namespace

Image render(const Scene& scene, const Camera& cam, const ClipConfig& clip, const RenderOptions& options) {
    if (scene.size() == 0) {
        throw EmptySceneError("render: empty scene");
    }
    if (options.tile_size < 1) {
        throw ConfigError("render: tile size must be >= 1");
    }
    const int nthreads = options.threads > 0 ? options.threads : omp_get_max_threads();
    const PreparedFrame frame = prepare_frame(scene, cam, clip, nthreads);
    const auto& splats = frame.splats;

    const int tile = options.tile_size;
    TileBins bins = bin_splats(splats, cam.width, cam.height, tile);
    const auto tile_count = static_cast<std::int64_t>(bins.offsets.size() - 1);

    // Pixel box of each splat, one pixel wider than its footprint on every side.
    std::vector<PixelRange> boxes(splats.size());
    for (std::size_t i = 0; i < splats.size(); ++i) {
        const Splat2D& s = splats[i];
        boxes[i] = {static_cast<int>(std::floor(s.center.x() - s.radius)) - 1,
                    static_cast<int>(std::ceil(s.center.x() + s.radius)) + 1,
                    static_cast<int>(std::floor(s.center.y() - s.radius)) - 1,
                    static_cast<int>(std::ceil(s.center.y() + s.radius)) + 1};
    }

    struct PixelState {
        Eigen::Vector3d color;
        double transmittance;
        bool done;
        std::optional<Ray> ray;
    };

    Image image(cam.width, cam.height);
#pragma omp parallel num_threads(nthreads)
    {
        std::vector<PixelState> state(static_cast<std::size_t>(tile) * tile);
#pragma omp for schedule(dynamic, 1)
        for (std::int64_t t = 0; t < tile_count; ++t) {
            auto first = bins.entries.begin() + static_cast<std::ptrdiff_t>(bins.offsets[t]);
            auto last = bins.entries.begin() + static_cast<std::ptrdiff_t>(bins.offsets[t + 1]);
            std::sort(first, last, [&](std::uint32_t a, std::uint32_t b) {
                if (splats[a].depth != splats[b].depth) {
                    return splats[a].depth < splats[b].depth;
                }
                return splats[a].source < splats[b].source;
            });

            const int x0 = static_cast<int>(t % bins.tiles_x) * tile;
            const int y0 = static_cast<int>(t / bins.tiles_x) * tile;
            const int x_end = std::min(cam.width, x0 + tile);
            const int y_end = std::min(cam.height, y0 + tile);
            const int tile_w = x_end - x0;
            const int pixels = tile_w * (y_end - y0);
            for (int i = 0; i < pixels; ++i) {
                state[static_cast<std::size_t>(i)] = {Eigen::Vector3d::Zero(), 1.0, false, std::nullopt};
            }

            // Splats in depth order, each over its own pixels; every pixel
            // still sees its splats front to back.
            int finished = 0;
            for (auto it = first; it != last && finished < pixels; ++it) {
                const Splat2D& s = splats[*it];
                const auto& clipper = frame.clippers[*it];
                const PixelRange& box = boxes[*it];
                for (int y = std::max(y0, box.y0); y < std::min(y_end, box.y1 + 1); ++y) {
                    for (int x = std::max(x0, box.x0); x < std::min(x_end, box.x1 + 1); ++x) {
                        PixelState& px = state[static_cast<std::size_t>((y - y0) * tile_w + (x - x0))];
                        if (px.done) {
                            continue;
                        }
                        const double alpha =
                            detail::clipped_alpha(s, Eigen::Vector2d(x, y), cam, clip,
                                                  clipper ? &*clipper : nullptr, px.ray);
                        if (alpha <= 0.0) {
                            continue;
                        }
                        px.color += s.color * (alpha * px.transmittance);
                        px.transmittance *= 1.0 - alpha;
                        if (options.early_stop && px.transmittance < kTransmittanceCutoff) {
                            px.done = true;
                            ++finished;
                        }
                    }
                }
            }

            for (int y = y0; y < y_end; ++y) {
                for (int x = x0; x < x_end; ++x) {
                    const PixelState& px = state[static_cast<std::size_t>((y - y0) * tile_w + (x - x0))];
                    image.at(x, y) = (px.color + px.transmittance * options.background).cast<float>();
                }
            }
        }
    }
    return image;
}

} // namespace rara
