#include "rara/cli.hpp"
#include "rara/errors.hpp"
#include "rara/metrics.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <iterator>
#include <sstream>

using namespace rara;
using nlohmann::json;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        static int n = 0;
        path = std::filesystem::temp_directory_path() /
               ("rara_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(n++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

struct Result {
    int code;
    std::string out, err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

const char* kCluster = R"({"kind":"cluster","count":150,"seed":5,"sigma_min":0.03,"sigma_max":0.15})";

} // namespace

TEST(CliRender, WritesThePngOfTheScene) {
    TempDir d;
    ASSERT_EQ(run({"synth", "grid", "-o", d / "grid.json"}).code, 0);
    const Result r = run({"render", "--scene", d / "grid.json", "--mode", "none", "--res", "64x48", "-o", d / "out.png"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto bytes = read_bytes(d / "out.png");
    const Scene s = generate_synthetic(GridSpec{});
    EXPECT_EQ(bytes, encode_png(render(s, Camera::fit_bounds(s.bounds(), 64, 48), ClipConfig::none())));
}

TEST(CliRender, ClipModeWithoutPlaneIsAUsageError) {
    TempDir d;
    const Result r = run({"render", "--synth", kCluster, "--mode", "rara", "-o", d / "o.png"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("--plane"), std::string::npos);
    EXPECT_FALSE(std::filesystem::exists(d / "o.png"));
}

TEST(CliRender, RepeatedRunsAreByteIdentical) {
    TempDir d;
    for (const char* name : {"a.png", "b.png"}) {
        ASSERT_EQ(run({"render", "--synth", kCluster, "--mode", "rara", "--plane", "0.3,1,0,0.1", "--res", "80x60",
                       "-o", d / name})
                      .code,
                  0);
    }
    EXPECT_EQ(read_bytes(d / "a.png"), read_bytes(d / "b.png"));
    // Thread count does not change the picture either.
    ASSERT_EQ(run({"render", "--synth", kCluster, "--mode", "rara", "--plane", "0.3,1,0,0.1", "--res", "80x60",
                   "--threads", "3", "--tile", "7", "-o", d / "c.png"})
                  .code,
              0);
    EXPECT_EQ(read_bytes(d / "a.png"), read_bytes(d / "c.png"));
}

TEST(CliRender, ExplicitCameraMatchesLookAt) {
    TempDir d;
    ASSERT_EQ(run({"render", "--synth", kCluster, "--camera", "0,0,-4,0,0,0,0,1,0,40", "--res", "32x32", "-o",
                   d / "cam.png"})
                  .code,
              0);
    const Scene s = generate_synthetic(synthetic_spec_from_json(json::parse(kCluster)));
    const Camera cam = Camera::look_at({0, 0, -4}, {0, 0, 0}, {0, 1, 0}, 40, 32, 32);
    EXPECT_EQ(read_bytes(d / "cam.png"), encode_png(render(s, cam, ClipConfig::none())));
}

TEST(CliRender, PlaneNormalIsNormalizedKeepingThePlane) {
    TempDir d;
    ASSERT_EQ(run({"render", "--synth", kCluster, "--mode", "hard", "--plane", "0,0,2,0.4", "--res", "40x40", "-o",
                   d / "a.png"})
                  .code,
              0);
    ASSERT_EQ(run({"render", "--synth", kCluster, "--mode", "hard", "--plane", "0,0,1,0.2", "--res", "40x40", "-o",
                   d / "b.png"})
                  .code,
              0);
    EXPECT_EQ(read_bytes(d / "a.png"), read_bytes(d / "b.png"));
}

TEST(CliRender, SeedSelectsTheGeneratedScene) {
    TempDir d;
    const auto render_seed = [&](const std::string& seed, const std::string& out) {
        return run({"render", "--synth", kCluster, "--seed", seed, "--res", "32x32", "-o", d / out}).code;
    };
    ASSERT_EQ(render_seed("11", "a.png"), 0);
    ASSERT_EQ(render_seed("11", "b.png"), 0);
    ASSERT_EQ(render_seed("12", "c.png"), 0);
    EXPECT_EQ(read_bytes(d / "a.png"), read_bytes(d / "b.png"));
    EXPECT_NE(read_bytes(d / "a.png"), read_bytes(d / "c.png"));
}

TEST(CliRender, RuntimeFailureExitsWithOne) {
    TempDir d;
    const Result r = run({"render", "--scene", d / "missing.ply", "-o", d / "o.png"});
    EXPECT_EQ(r.code, 1);
    EXPECT_FALSE(r.err.empty());
}

TEST(CliUsage, BadFlagsAreErrors) {
    TempDir d;
    const std::string out = d / "o.png";
    EXPECT_EQ(run({"render", "--synth", kCluster, "--frobnicate", "1", "-o", out}).code, 2);
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"paint"}).code, 2);
    EXPECT_EQ(run({"render", "--synth", kCluster, "--res", "8x8", "-o", out}).code, 2);
    EXPECT_EQ(run({"render", "--synth", kCluster, "--res", "64by64", "-o", out}).code, 2);
    EXPECT_EQ(run({"render", "--synth", kCluster, "--mode", "soft", "-o", out}).code, 2);
    EXPECT_EQ(run({"render", "--synth", kCluster, "--mode", "hard", "--plane", "1,0,0", "-o", out}).code, 2);
    EXPECT_EQ(run({"render", "--synth", kCluster, "--mode", "hard", "--plane", "0,0,0,1", "-o", out}).code, 2);
    EXPECT_EQ(run({"render", "--synth", kCluster, "--camera", "1,2,3", "-o", out}).code, 2);
    EXPECT_EQ(run({"render", "--synth", kCluster, "--scene", "x.ply", "-o", out}).code, 2);
    EXPECT_EQ(run({"render", "--synth", R"({"kind":"grid","sigma":-1})", "-o", out}).code, 2);
    EXPECT_EQ(run({"render", "--synth", kCluster}).code, 2);
    EXPECT_FALSE(std::filesystem::exists(out));
}

TEST(CliUsage, HelpListsEveryFlag) {
    const Result r = run({"render", "--help"});
    EXPECT_EQ(r.code, 0);
    for (const char* flag : {"--scene", "--synth", "--mode", "--plane", "--camera", "--res", "--threads", "--seed",
                             "-o", "--config", "--tile"}) {
        EXPECT_NE(r.out.find(flag), std::string::npos) << flag;
    }
    const Result top = run({"--help"});
    EXPECT_EQ(top.code, 0);
    for (const char* cmd : {"render", "compare", "ablate", "bench", "synth", "serve"}) {
        EXPECT_NE(top.out.find(cmd), std::string::npos) << cmd;
    }
}

TEST(CliConfig, FlagsOverrideConfigOverrideDefaults) {
    TempDir d;
    std::ofstream(d / "cfg.json") << json{{"synth", json::parse(kCluster)},
                                          {"mode", "hard"},
                                          {"plane", {1, 0, 0, 0.0}},
                                          {"res", "32x24"},
                                          {"output", d / "from_config.png"}}
                                         .dump();
    ASSERT_EQ(run({"render", "--config", d / "cfg.json"}).code, 0);
    const Scene s = generate_synthetic(synthetic_spec_from_json(json::parse(kCluster)));
    EXPECT_EQ(read_bytes(d / "from_config.png"),
              encode_png(render(s, Camera::fit_bounds(s.bounds(), 32, 24), ClipConfig::hard(ClipPlane({1, 0, 0}, 0)))));

    ASSERT_EQ(run({"render", "--config", d / "cfg.json", "--res", "40x40", "--mode", "rara", "-o", d / "flags.png"})
                  .code,
              0);
    EXPECT_TRUE(std::filesystem::exists(d / "flags.png"));
    EXPECT_EQ(read_bytes(d / "flags.png"),
              encode_png(render(s, Camera::fit_bounds(s.bounds(), 40, 40), ClipConfig::rara(ClipPlane({1, 0, 0}, 0)))));
}

TEST(CliConfig, UnknownConfigKeyIsAnError) {
    TempDir d;
    std::ofstream(d / "cfg.json") << R"({"synth": {"kind": "grid"}, "colour": "red"})";
    EXPECT_EQ(run({"render", "--config", d / "cfg.json", "-o", d / "o.png"}).code, 2);
}

TEST(CliParse, Values) {
    EXPECT_EQ(cli::parse_resolution("64x48"), (std::array<int, 2>{64, 48}));
    EXPECT_THROW(cli::parse_resolution("15x64"), ConfigError);
    EXPECT_THROW(cli::parse_resolution("64x"), ConfigError);
    EXPECT_EQ(cli::parse_plane("1, 0,0,-2.5"), Eigen::Vector4d(1, 0, 0, -2.5));
    EXPECT_THROW(cli::parse_plane("1,0,0,x"), ConfigError);
    EXPECT_THROW(cli::parse_plane("1,0,0,nan"), ConfigError);
    const auto pose = cli::parse_camera("1,2,3,4,5,6,0,1,0,60");
    EXPECT_EQ(pose.target, Eigen::Vector3d(4, 5, 6));
    EXPECT_EQ(pose.fov_deg, 60.0);
}

TEST(CliCompare, TriptychAndPairwiseMetrics) {
    TempDir d;
    // Plane beyond the scene: every Gaussian is Visible, hard == rara.
    const Result far = run({"compare", "--synth", kCluster, "--plane", "1,0,0,100", "--res", "48x32", "-o",
                            d / "far.png", "--json", d / "far.json"});
    ASSERT_EQ(far.code, 0) << far.err;
    const json jf = json::parse(far.out);
    EXPECT_EQ(jf.at("hard_vs_rara").at("l1"), 0.0);
    EXPECT_EQ(jf.at("hard_vs_rara").at("ssim"), 1.0);
    EXPECT_EQ(json::parse(std::ifstream(d / "far.json")), jf);
    const Image tri = decode_png(read_bytes(d / "far.png"));
    EXPECT_EQ(tri.width(), 3 * 48);
    EXPECT_EQ(tri.height(), 32);

    // A plane through a single large Gaussian: the methods differ.
    std::ofstream(d / "one.json") << R"({"kind":"grid","count":[1,1,1],"sigma":0.5,"opacity":0.9})";
    const Result cut = run({"compare", "--scene", d / "one.json", "--plane", "1,0,0,0", "--res", "48x32", "-o",
                            d / "cut.png"});
    ASSERT_EQ(cut.code, 0) << cut.err;
    const json jc = json::parse(cut.out);
    EXPECT_GT(jc.at("hard_vs_rara").at("l1").get<double>(), 0.0);
    EXPECT_GT(jc.at("none_vs_rara").at("l1").get<double>(), 0.0);
}

TEST(CliCompare, NeedsAPlane) {
    TempDir d;
    EXPECT_EQ(run({"compare", "--synth", kCluster, "-o", d / "t.png"}).code, 2);
}

TEST(CliAblate, PrintsTheTwoRowTable) {
    TempDir d;
    const Result r = run({"ablate", "--synth", kCluster, "--res", "48x48", "--json", d / "ab.json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto wo = r.out.find("wo RaRa");
    const auto w = r.out.find("w RaRa", wo + 1);
    EXPECT_NE(wo, std::string::npos);
    EXPECT_NE(w, std::string::npos);
    const json j = json::parse(std::ifstream(d / "ab.json"));
    ASSERT_EQ(j.at("rows").size(), 2u);
    EXPECT_GT(j["rows"][0]["l1"].get<double>(), 0.0);
    EXPECT_EQ(j["rows"][1]["l1"].get<double>(), 0.0);
}

TEST(CliBench, SweepReportPerMode) {
    TempDir d;
    const Result r = run({"bench", "--synth", kCluster, "--res", "32x32", "--frames", "4", "--json", d / "b.json"});
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* m : {"none", "hard", "rara"}) {
        EXPECT_NE(r.out.find(m), std::string::npos);
    }
    const json j = json::parse(std::ifstream(d / "b.json"));
    ASSERT_EQ(j.at("rows").size(), 3u);
    for (const auto& row : j["rows"]) {
        EXPECT_EQ(row.at("frames"), 4);
        EXPECT_EQ(row.at("frame_ms").size(), 4u);
    }
    const Result one = run({"bench", "--synth", kCluster, "--res", "32x32", "--frames", "2", "--mode", "rara"});
    ASSERT_EQ(one.code, 0) << one.err;
    EXPECT_EQ(one.out.find("hard"), std::string::npos);
    EXPECT_EQ(run({"bench", "--synth", kCluster, "--frames", "0"}).code, 2);
}

TEST(CliSynth, ThenRenderEndToEnd) {
    TempDir d;
    const Result s = run({"synth", "strands", "--synth", R"({"strands":20,"segments":8})", "--seed", "4", "-o",
                          d / "hair.ply"});
    ASSERT_EQ(s.code, 0) << s.err;
    EXPECT_EQ(load_ply(d / "hair.ply").size(), 160u);
    const Result r = run({"render", "--scene", d / "hair.ply", "--res", "32x32", "-o", d / "hair.png"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(decode_png(read_bytes(d / "hair.png")).width(), 32);

    ASSERT_EQ(run({"synth", "cluster", "--seed", "9", "-o", d / "c.json"}).code, 0);
    const json spec = json::parse(std::ifstream(d / "c.json"));
    EXPECT_EQ(spec.at("kind"), "cluster");
    EXPECT_EQ(spec.at("seed"), 9);

    EXPECT_EQ(run({"synth", "cube", "-o", d / "x.json"}).code, 2);
    EXPECT_EQ(run({"synth", "grid", "-o", d / "x.txt"}).code, 2);
}
