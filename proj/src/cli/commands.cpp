#include "rara/cli.hpp"

#include "rara/errors.hpp"
#include "rara/metrics.hpp"
#include "rara/service.hpp"

#include "CLI11.hpp"

#include <boost/asio/io_context.hpp>
#include <boost/asio/signal_set.hpp>
#include <spdlog/spdlog.h>

#include <csignal>
#include <fstream>
#include <ostream>

namespace rara::cli {
namespace {

// Raw flag text; merged onto the config file afterwards so flags win.
struct Flags {
    std::optional<std::string> config, scene, synth, mode, plane, camera, res, output, json_out;
    std::optional<int> tile, threads, frames;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App& cmd, Flags& f) {
    cmd.add_option("--config", f.config, "JSON config file (flags take precedence)");
    cmd.add_option("--scene", f.scene, "Scene file (.ply or .json synthetic descriptor)");
    cmd.add_option("--synth", f.synth, "Synthetic scene descriptor, inline JSON or a path");
    cmd.add_option("--mode", f.mode, "Clip mode: none, hard or rara");
    cmd.add_option("--plane", f.plane, "Clip plane nx,ny,nz,d (visible where n.x + d > 0)");
    cmd.add_option("--camera", f.camera, "ex,ey,ez,tx,ty,tz,ux,uy,uz,fov_deg (default: frame the scene)");
    cmd.add_option("--res", f.res, "Resolution WxH, at least 16x16 (default 512x512)");
    cmd.add_option("--tile", f.tile, "Tile size in pixels (default 16)");
    cmd.add_option("--threads", f.threads, "Render threads, 0 for the OpenMP default");
    cmd.add_option("--seed", f.seed, "Seed for synthetic generators");
}

RunConfig merge(const Flags& f) {
    RunConfig cfg;
    if (f.config) {
        apply_config_json(cfg, read_json_arg(*f.config));
    }
    if (f.scene) {
        cfg.scene = *f.scene;
        cfg.synth.reset();
    }
    if (f.synth) {
        cfg.synth = read_json_arg(*f.synth);
        if (!f.scene) {
            cfg.scene.reset();
        }
    }
    if (f.mode) {
        cfg.mode = clip_mode_from_string(*f.mode);
    }
    if (f.plane) {
        cfg.plane = parse_plane(*f.plane);
    }
    if (f.camera) {
        cfg.camera = parse_camera(*f.camera);
    }
    if (f.res) {
        const auto r = parse_resolution(*f.res);
        cfg.width = r[0];
        cfg.height = r[1];
    }
    if (f.tile) {
        cfg.tile = *f.tile;
    }
    if (f.threads) {
        cfg.threads = *f.threads;
    }
    if (f.frames) {
        cfg.frames = *f.frames;
    }
    if (f.seed) {
        cfg.seed = *f.seed;
    }
    if (f.output) {
        cfg.output = *f.output;
    }
    return cfg;
}

std::filesystem::path require_output(const RunConfig& cfg) {
    if (!cfg.output) {
        throw ConfigError("-o/--output is required");
    }
    return *cfg.output;
}

void write_json_file(const nlohmann::json& j, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << j.dump(2) << '\n';
}

Eigen::Vector3d sweep_normal(const RunConfig& cfg) {
    const auto plane = make_plane(cfg);
    return plane ? plane->normal() : Eigen::Vector3d::UnitX();
}

int cmd_render(const RunConfig& cfg, std::ostream& out) {
    cfg.validate();
    const auto path = require_output(cfg);
    const Scene scene = load_input(cfg);
    const Camera cam = make_camera(cfg, scene);
    const Image image = render(scene, cam, make_clip(cfg, cfg.mode), make_render_options(cfg));
    write_png(image, path);
    out << "wrote " << path.string() << " (" << image.width() << "x" << image.height() << ", "
        << scene.size() << " gaussians, mode " << to_string(cfg.mode) << ")\n";
    return 0;
}

int cmd_compare(const RunConfig& cfg, const std::optional<std::string>& json_out, std::ostream& out) {
    cfg.validate();
    if (!cfg.plane) {
        throw ConfigError("compare requires --plane nx,ny,nz,d");
    }
    const auto path = require_output(cfg);
    const Scene scene = load_input(cfg);
    const Camera cam = make_camera(cfg, scene);
    const RenderOptions options = make_render_options(cfg);
    const std::array<Image, 3> images{
        render(scene, cam, make_clip(cfg, ClipMode::None), options),
        render(scene, cam, make_clip(cfg, ClipMode::Hard), options),
        render(scene, cam, make_clip(cfg, ClipMode::RaRa), options),
    };
    write_png(hconcat(images), path);

    const auto pair = [&](int a, int b) {
        return nlohmann::json{{"l1", l1_error(images[a], images[b])}, {"ssim", ssim(images[a], images[b])}};
    };
    const nlohmann::json report{
        {"scene", scene.name()},
        {"resolution", {cam.width, cam.height}},
        {"triptych", path.string()},
        {"order", {"none", "hard", "rara"}},
        {"none_vs_hard", pair(0, 1)},
        {"none_vs_rara", pair(0, 2)},
        {"hard_vs_rara", pair(1, 2)},
    };
    if (json_out) {
        write_json_file(report, *json_out);
    }
    out << report.dump(2) << '\n';
    return 0;
}

int cmd_ablate(const RunConfig& cfg, const std::optional<std::string>& json_out, std::ostream& out) {
    cfg.validate();
    const Scene scene = load_input(cfg);
    const Camera cam = make_camera(cfg, scene);
    const auto rows = run_ablation(scene, cam, make_render_options(cfg), sweep_normal(cfg));
    out << format_ablation_table(rows, scene.name());
    if (json_out) {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& r : rows) {
            j.push_back(to_json(r));
        }
        write_json_file({{"scene", scene.name()}, {"rows", j}}, *json_out);
    }
    return 0;
}

int cmd_bench(RunConfig cfg, bool mode_given, const std::optional<std::string>& json_out, std::ostream& out) {
    const ClipMode only = cfg.mode;
    cfg.mode = ClipMode::None; // the sweep supplies its own planes
    cfg.validate();
    const Scene scene = load_input(cfg);
    const Camera cam = make_camera(cfg, scene);
    std::vector<ClipMode> modes{ClipMode::None, ClipMode::Hard, ClipMode::RaRa};
    if (mode_given) {
        modes = {only};
    }
    std::vector<SweepBenchReport> rows;
    for (const ClipMode m : modes) {
        rows.push_back(run_sweep_bench(scene, cam, m, cfg.frames, make_render_options(cfg), sweep_normal(cfg)));
    }
    out << format_bench_table(rows, scene.name());
    if (json_out) {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& r : rows) {
            j.push_back(to_json(r));
        }
        write_json_file({{"scene", scene.name()}, {"rows", j}}, *json_out);
    }
    return 0;
}

int cmd_synth(const std::string& kind, const RunConfig& cfg, std::ostream& out) {
    const auto path = require_output(cfg);
    nlohmann::json spec = synthetic_spec_to_json(synthetic_spec_from_json({{"kind", kind}}));
    if (cfg.synth) {
        if (!cfg.synth->is_object()) {
            throw ConfigError("--synth must be a JSON object");
        }
        spec.update(*cfg.synth);
        spec["kind"] = kind;
    }
    if (cfg.seed && kind != "grid") {
        spec["seed"] = *cfg.seed;
    }
    // Round trip to fill defaults and reject bad fields before writing.
    const SyntheticSpec parsed = synthetic_spec_from_json(spec);
    const Scene scene = generate_synthetic(parsed);
    if (path.extension() == ".json") {
        write_json_file(synthetic_spec_to_json(parsed), path);
    } else if (path.extension() == ".ply") {
        write_ply(Scene(path.stem().string(), {scene.gaussians().begin(), scene.gaussians().end()}), path);
    } else {
        throw ConfigError("synth: output must end in .json or .ply");
    }
    out << "wrote " << path.string() << " (" << kind << ", " << scene.size() << " gaussians)\n";
    return 0;
}

int cmd_serve(const service::ServiceOptions& options, std::ostream& out) {
    service::RenderService svc(options);
    const unsigned short port = svc.start();
    out << "serving " << options.scene_dir.string() << " on http://" << options.address << ":" << port
        << " (ws at /ws)" << std::endl;
    boost::asio::io_context signals_ctx;
    boost::asio::signal_set signals(signals_ctx, SIGINT, SIGTERM);
    signals.async_wait([&](const boost::system::error_code&, int) { svc.stop(); });
    signals_ctx.run();
    out << "stopped\n";
    return 0;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Gaussian splatting renderer with plane clipping"};
    app.name("rara");
    app.require_subcommand(1);

    Flags f;
    std::string synth_kind;
    service::ServiceOptions serve_opts;

    auto* render_cmd = app.add_subcommand("render", "Render one view to PNG");
    add_common(*render_cmd, f);
    render_cmd->add_option("-o,--output", f.output, "Output PNG");

    auto* compare_cmd = app.add_subcommand("compare", "none | hard | rara triptych PNG plus pairwise L1/SSIM");
    add_common(*compare_cmd, f);
    compare_cmd->add_option("-o,--output", f.output, "Output triptych PNG");
    compare_cmd->add_option("--json", f.json_out, "Also write the metrics JSON here");

    auto* ablate_cmd = app.add_subcommand("ablate", "Ablation with the plane at infinity (wo / w RaRa)");
    add_common(*ablate_cmd, f);
    ablate_cmd->add_option("--json", f.json_out, "Also write the report JSON here");

    auto* bench_cmd = app.add_subcommand("bench", "Plane sweep timing (normal from --plane, default +x)");
    add_common(*bench_cmd, f);
    bench_cmd->add_option("--frames", f.frames, "Sweep frames (default 30)");
    bench_cmd->add_option("--json", f.json_out, "Also write the report JSON here");

    auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic scene (.json descriptor or .ply)");
    synth_cmd->add_option("kind", synth_kind, "grid, cluster or strands")
        ->required()
        ->check(CLI::IsMember({"grid", "cluster", "strands"}));
    synth_cmd->add_option("--synth", f.synth, "Field overrides, inline JSON or a path");
    synth_cmd->add_option("--seed", f.seed, "Generator seed");
    synth_cmd->add_option("-o,--output", f.output, "Output .json or .ply")->required();

    auto* serve_cmd = app.add_subcommand("serve", "HTTP + WebSocket render service");
    serve_cmd->add_option("--scene-dir", serve_opts.scene_dir, "Directory of .ply / .json scenes")->required();
    serve_cmd->add_option("--port", serve_opts.port, "TCP port, 0 for any free port (default 8080)");
    serve_cmd->add_option("--address", serve_opts.address, "Bind address (default 127.0.0.1)");
    serve_cmd->add_option("--static", serve_opts.static_dir, "Viewer build directory served at /");
    serve_cmd->add_option("--threads", serve_opts.render_threads, "Render threads per frame");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (render_cmd->parsed()) {
            return cmd_render(merge(f), out);
        }
        if (compare_cmd->parsed()) {
            return cmd_compare(merge(f), f.json_out, out);
        }
        if (ablate_cmd->parsed()) {
            return cmd_ablate(merge(f), f.json_out, out);
        }
        if (bench_cmd->parsed()) {
            const RunConfig cfg = merge(f);
            const bool mode_given = f.mode.has_value() || (f.config && read_json_arg(*f.config).contains("mode"));
            return cmd_bench(cfg, mode_given, f.json_out, out);
        }
        if (synth_cmd->parsed()) {
            return cmd_synth(synth_kind, merge(f), out);
        }
        if (serve_cmd->parsed()) {
            return cmd_serve(serve_opts, out);
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\nRun with --help for usage.\n";
        return 2;
    } catch (const ParameterError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

} // namespace rara::cli
