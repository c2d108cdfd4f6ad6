#include "rara/errors.hpp"
#include "rara/rasterizer.hpp"

#include <algorithm>
#include <tuple>

namespace rara::reference {

Image render(const Scene& scene, const Camera& cam, const ClipConfig& clip, const Eigen::Vector3d& background) {
    if (scene.size() == 0) {
        throw EmptySceneError("render: empty scene");
    }
    const PreparedFrame frame = prepare_frame(scene, cam, clip, 1);

    struct Contribution {
        double depth;
        std::uint32_t source;
        double alpha;
        std::size_t splat;
    };
    std::vector<Contribution> hits;
    Image image(cam.width, cam.height);
    for (int y = 0; y < cam.height; ++y) {
        for (int x = 0; x < cam.width; ++x) {
            const Eigen::Vector2d pixel(x, y);
            hits.clear();
            for (std::size_t i = 0; i < frame.splats.size(); ++i) {
                const auto& clipper = frame.clippers[i];
                const double alpha = clipped_alpha(frame.splats[i], pixel, cam, clip, clipper ? &*clipper : nullptr);
                if (alpha > 0.0) {
                    hits.push_back({frame.splats[i].depth, frame.splats[i].source, alpha, i});
                }
            }
            std::sort(hits.begin(), hits.end(), [](const Contribution& a, const Contribution& b) {
                return std::tie(a.depth, a.source) < std::tie(b.depth, b.source);
            });
            Eigen::Vector3d color = Eigen::Vector3d::Zero();
            double transmittance = 1.0;
            for (const auto& h : hits) {
                color += frame.splats[h.splat].color * (h.alpha * transmittance);
                transmittance *= 1.0 - h.alpha;
            }
            color += transmittance * background;
            image.at(x, y) = color.cast<float>();
        }
    }
    return image;
}

} // namespace rara::reference
