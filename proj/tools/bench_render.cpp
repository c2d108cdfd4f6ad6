// Serial reference evaluator vs the tiled OpenMP renderer on one frame.
#include "rara/metrics.hpp"
#include "rara/rasterizer.hpp"

#include "CLI11.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>

using namespace rara;

namespace {

template <class F>
double best_ms(int repeats, F&& fn) {
    double best = 1e300;
    for (int i = 0; i < repeats; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        best = std::min(best, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

float max_abs_diff(const Image& a, const Image& b) {
    float m = 0.0f;
    for (std::size_t i = 0; i < a.pixels().size(); ++i) {
        m = std::max(m, (a.pixels()[i] - b.pixels()[i]).cwiseAbs().maxCoeff());
    }
    return m;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reference vs tiled renderer timing"};
    std::string synth = R"({"kind":"cluster","count":2000,"seed":7})";
    std::string mode = "rara";
    int res = 256, repeats = 3;
    std::vector<int> threads{1, omp_get_num_procs()};
    app.add_option("--synth", synth, "Synthetic scene JSON");
    app.add_option("--mode", mode, "none, hard or rara (plane through the scene center, normal +x)");
    app.add_option("--res", res, "Square resolution");
    app.add_option("--repeats", repeats, "Timed repetitions, best kept");
    app.add_option("--threads", threads, "Thread counts for the tiled renderer");
    CLI11_PARSE(app, argc, argv);
    std::sort(threads.begin(), threads.end());
    threads.erase(std::unique(threads.begin(), threads.end()), threads.end());

    const Scene scene = generate_synthetic(synthetic_spec_from_json(nlohmann::json::parse(synth)));
    const Camera cam = Camera::fit_bounds(scene.bounds(), res, res);
    const ClipPlane plane(Eigen::Vector3d::UnitX(), -scene.bounds().center().x());
    const ClipMode m = clip_mode_from_string(mode);
    const ClipConfig clip = m == ClipMode::None ? ClipConfig::none()
                            : m == ClipMode::Hard ? ClipConfig::hard(plane)
                                                  : ClipConfig::rara(plane);

    Image ref;
    const double ref_ms = best_ms(1, [&] { ref = reference::render(scene, cam, clip); });
    std::printf("scene %s, %zu gaussians, %dx%d, mode %s\n", scene.name().c_str(), scene.size(), res, res,
                mode.c_str());
    std::printf("%-22s %10s %9s %12s\n", "renderer", "ms", "speedup", "max |diff|");
    std::printf("%-22s %10.2f %9s %12s\n", "reference (serial)", ref_ms, "1.00", "-");
    // The reference never stops early; the first row shows the exact match,
    // the others the cost and error of stopping at transmittance 1/255.
    const auto row = [&](const char* label, RenderOptions o) {
        Image img;
        const double ms = best_ms(repeats, [&] { img = render(scene, cam, clip, o); });
        std::printf("%-22s %10.2f %9.2f %12.2e\n", label, ms, ref_ms / ms, max_abs_diff(ref, img));
    };
    RenderOptions exact;
    exact.threads = threads.back();
    exact.early_stop = false;
    row("tiled, no early stop", exact);
    for (const int t : threads) {
        RenderOptions o;
        o.threads = t;
        char label[32];
        std::snprintf(label, sizeof label, "tiled, %d thread%s", t, t == 1 ? "" : "s");
        row(label, o);
    }
    return 0;
}
