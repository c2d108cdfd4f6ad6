#include "rara/metrics.hpp"

#include <iomanip>
#include <sstream>

namespace rara {

nlohmann::json to_json(const AblationReport& r) {
    return {{"mode_compared", r.mode_compared}, {"l1", r.l1}, {"ssim", r.ssim}};
}

nlohmann::json to_json(const SweepBenchReport& r) {
    return {{"mode", r.mode},
            {"frames", r.frames},
            {"mean_fps", r.mean_fps},
            {"min_fps", r.min_fps},
            {"max_fps", r.max_fps},
            {"plane_start", r.plane_start},
            {"plane_end", r.plane_end},
            {"frame_ms", r.frame_ms}};
}

std::string format_ablation_table(const std::vector<AblationReport>& rows, const std::string& scene_name) {
    std::ostringstream out;
    out << std::left << std::setw(10) << "" << std::right << std::setw(24) << scene_name << "\n";
    out << std::left << std::setw(10) << "" << std::right << std::setw(12) << "L1" << std::setw(12) << "SSIM"
        << "\n";
    for (const auto& r : rows) {
        out << std::left << std::setw(10) << r.mode_compared << std::right << std::fixed << std::setprecision(4)
            << std::setw(12) << r.l1 << std::setw(12) << r.ssim << "\n";
    }
    return out.str();
}

std::string format_bench_table(const std::vector<SweepBenchReport>& rows, const std::string& scene_name) {
    std::ostringstream out;
    out << "FPS, " << scene_name << "\n";
    out << std::left << std::setw(8) << "mode" << std::right << std::setw(8) << "frames" << std::setw(12) << "mean"
        << std::setw(12) << "min" << std::setw(12) << "max" << "\n";
    for (const auto& r : rows) {
        out << std::left << std::setw(8) << r.mode << std::right << std::setw(8) << r.frames << std::fixed
            << std::setprecision(2) << std::setw(12) << r.mean_fps << std::setw(12) << r.min_fps << std::setw(12)
            << r.max_fps << "\n";
    }
    return out.str();
}

} // namespace rara
