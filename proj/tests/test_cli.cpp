#include <gtest/gtest.h>

#include <cstdlib>
#include <sys/wait.h>

#include <opencv2/imgcodecs.hpp>

#include "siso/commands.hpp"
#include "siso/error.hpp"
#include "siso/io.hpp"
#include "siso/synth.hpp"
#include "test_util.hpp"

using namespace siso;
using siso::testing::TempDir;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(SISO_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

SynthConfig two_objects() {
    SynthConfig c;
    c.width = 48;
    c.height = 36;
    c.frames = 6;
    SynthObject a;
    a.x = 4;
    a.y = 4;
    a.width = 10;
    a.height = 8;
    a.vx = 1;
    a.color = {230, 25, 75};
    SynthObject b;
    b.shape = SynthShape::disk;
    b.x = 32;
    b.y = 22;
    b.radius = 6;
    b.vy = -1;
    b.color = {0, 130, 200};
    b.category = 18;
    c.objects = {a, b};
    return c;
}

}  // namespace

TEST(RunConfig, JsonRoundTripAndUnknownKeys) {
    RunConfig c;
    c.fusion.theta_seg = 0.2;
    c.enable_reid = false;
    c.tracking.assignment = AssignmentMethod::hungarian;
    c.seed = 42;
    const auto back = run_config_from_json(to_json(c));
    EXPECT_EQ(to_json(back), to_json(c));
    EXPECT_THROW(run_config_from_json(nlohmann::json::parse(R"({"theta_sge":0.2})")), ConfigError);
    EXPECT_THROW(run_config_from_json(nlohmann::json::parse(R"({"theta_seg":1.5})")), ConfigError);
}

TEST(RunConfig, DefaultsAreFullConfiguration) {
    const RunConfig c;
    EXPECT_TRUE(c.enable_sequential_fusion && c.enable_recurrent_propagation && c.enable_identity_propagation &&
                c.enable_reid);
    EXPECT_DOUBLE_EQ(c.fusion.theta_seg, 0.1);
    EXPECT_DOUBLE_EQ(c.fusion.beta_sq, 0.3);
    EXPECT_DOUBLE_EQ(c.fusion.min_cls, 0.7);
    EXPECT_DOUBLE_EQ(c.tracking.theta_id, 0.7);
    EXPECT_EQ(c.propagation.max_iters, 5);
}

TEST(Fuse, EmptyDirectoryFails) {
    TempDir dir("cli");
    std::filesystem::create_directories(dir.path() / "in");
    EXPECT_THROW(cmd_fuse(dir.path() / "in", {}, dir.path() / "out"), ValidationError);
    EXPECT_NE(run_cli("fuse " + (dir.path() / "in").string() + " --out " + (dir.path() / "out").string()), 0);
}

TEST(Fuse, NoiselessVideoMatchesGroundTruth) {
    TempDir dir("cli");
    generate(two_objects(), dir.path() / "vid");
    RunConfig rc;
    rc.jobs = 2;
    EXPECT_EQ(cmd_fuse(dir.path() / "vid", rc, dir.path() / "res"), 1);
    const auto r = cmd_eval(dir.path() / "res", dir.path() / "vid", dir.path() / "eval");
    EXPECT_GE(r.js, 0.99);
    EXPECT_GE(r.fs, 0.99);
    EXPECT_TRUE(std::filesystem::exists(dir.path() / "eval" / "eval.json"));
    EXPECT_TRUE(std::filesystem::exists(dir.path() / "eval" / "eval.csv"));
}

TEST(Fuse, DatasetRoot) {
    TempDir dir("cli");
    generate(two_objects(), dir.path() / "data" / "a");
    generate(random_scene(2, {}), dir.path() / "data" / "b");
    EXPECT_EQ(cmd_fuse(dir.path() / "data", {}, dir.path() / "res"), 2);
    const auto r = cmd_eval(dir.path() / "res", dir.path() / "data", std::nullopt);
    EXPECT_EQ(r.videos.size(), 2u);
}

TEST(Fuse, AllAblationsOff) {
    TempDir dir("cli");
    generate(two_objects(), dir.path() / "vid");
    const auto out = dir.path() / "res";
    ASSERT_EQ(run_cli("fuse " + (dir.path() / "vid").string() + " --out " + out.string() +
                      " --no-sequential-fusion --no-recurrent-propagation --no-identity-propagation --no-reid "
                      "--seed 9 --jobs 1"),
              0);
    const auto report = read_json(out / "report.json");
    EXPECT_FALSE(report["config"]["enable_sequential_fusion"].get<bool>());
    EXPECT_FALSE(report["config"]["enable_reid"].get<bool>());
    EXPECT_EQ(report["config"]["seed"].get<std::uint64_t>(), 9u);
    EXPECT_EQ(report["propagation"]["iterations"].get<int>(), 0);
    // Without tracking every frame's instances get fresh identities.
    EXPECT_EQ(report["identities"].get<int>(), 2 * 6);
    const auto labels = read_ground_truth(out);
    for (std::size_t t = 1; t < labels.frames.size(); ++t) {
        for (const auto& [id, m] : labels.frames[t].masks()) EXPECT_EQ(labels.frames[t - 1].masks().count(id), 0u);
    }
}

TEST(Fuse, FlagOverridesConfigFile) {
    TempDir dir("cli");
    generate(two_objects(), dir.path() / "vid");
    write_json(dir.path() / "run.json", {{"theta_seg", 0.3}, {"max_iters", 2}});
    ASSERT_EQ(run_cli("fuse " + (dir.path() / "vid").string() + " --out " + (dir.path() / "res").string() +
                      " --config " + (dir.path() / "run.json").string() + " --max-iters 3 --theta-id 0.8"),
              0);
    const auto cfg = read_json(dir.path() / "res" / "report.json")["config"];
    EXPECT_DOUBLE_EQ(cfg["theta_seg"].get<double>(), 0.3);
    EXPECT_EQ(cfg["max_iters"].get<int>(), 3);
    EXPECT_DOUBLE_EQ(cfg["theta_id"].get<double>(), 0.8);
    EXPECT_NE(run_cli("fuse " + (dir.path() / "vid").string() + " --out " + (dir.path() / "res").string() +
                      " --theta-seg 2"),
              0);
}

TEST(Eval, IdenticalAndRecategorised) {
    TempDir dir("cli");
    const auto v = generate(two_objects(), dir.path() / "vid");
    auto r = cmd_eval(dir.path() / "vid" / "gt", dir.path() / "vid" / "gt", std::nullopt);
    EXPECT_DOUBLE_EQ(r.js, 1.0);
    EXPECT_DOUBLE_EQ(r.fs, 1.0);
    auto relabelled = v.gt;
    for (auto& [id, cat] : relabelled.categories) cat = 85;
    write_labels(dir.path() / "pred", relabelled);
    r = cmd_eval(dir.path() / "pred", dir.path() / "vid" / "gt", std::nullopt);
    EXPECT_DOUBLE_EQ(r.js, 0.0);
    EXPECT_DOUBLE_EQ(r.fs, 0.0);
}

TEST(Eval, FrameCountMismatch) {
    TempDir dir("cli");
    auto v = generate(two_objects(), dir.path() / "vid");
    v.gt.frames.pop_back();
    write_labels(dir.path() / "pred", v.gt);
    try {
        cmd_eval(dir.path() / "pred", dir.path() / "vid", std::nullopt);
        FAIL();
    } catch (const Error& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("5 frames"), std::string::npos) << msg;
        EXPECT_NE(msg.find("has 6"), std::string::npos) << msg;
    }
    EXPECT_NE(run_cli("eval " + (dir.path() / "pred").string() + " " + (dir.path() / "vid").string()), 0);
}

TEST(Eval, TwoVideoDataset) {
    TempDir dir("cli");
    // Video a: one instance with J = 1 then 0.5; video b: one perfect and one
    // mislabelled instance. Dataset mean over three instances.
    LabeledVideo a;
    a.width = 8;
    a.height = 2;
    a.frames = {LabelMap(8, 2), LabelMap(8, 2)};
    for (auto& f : a.frames) f.paint(Mask::full(8, 2), 1);
    a.categories = {{1, 1}};
    LabeledVideo a_pred = a;
    a_pred.frames[1] = LabelMap(8, 2);
    a_pred.frames[1].paint(Mask::from_box(8, 2, {0, 0, 4, 2}), 1);
    LabeledVideo b;
    b.width = 8;
    b.height = 8;
    b.frames = {LabelMap(8, 8)};
    b.frames[0].paint(Mask::from_box(8, 8, {0, 0, 3, 3}), 1);
    b.frames[0].paint(Mask::from_box(8, 8, {4, 4, 3, 3}), 2);
    b.categories = {{1, 1}, {2, 18}};
    LabeledVideo b_pred = b;
    b_pred.categories[2] = 17;
    write_labels(dir.path() / "gt" / "a", a);
    write_labels(dir.path() / "gt" / "b", b);
    write_labels(dir.path() / "pred" / "a", a_pred);
    write_labels(dir.path() / "pred" / "b", b_pred);
    const auto r = cmd_eval(dir.path() / "pred", dir.path() / "gt", dir.path() / "out");
    EXPECT_NEAR(r.js, 1.75 / 3.0, 1e-15);
    EXPECT_NEAR(read_json(dir.path() / "out" / "eval.json")["JS"].get<double>(), 1.75 / 3.0, 1e-15);
}

TEST(Stats, SingleVideoHistogram) {
    TempDir dir("cli");
    LabeledVideo v;
    v.width = 8;
    v.height = 8;
    v.frames = {LabelMap(8, 8)};
    v.frames[0].paint(Mask::from_box(8, 8, {0, 0, 3, 3}), 1);
    v.frames[0].paint(Mask::from_box(8, 8, {4, 4, 3, 3}), 2);
    v.categories = {{1, 1}, {2, 1}};
    write_labels(dir.path() / "v" / "gt", v);
    const auto s = cmd_stats(dir.path() / "v");
    EXPECT_EQ(s.instance_histogram, (std::map<int, int>{{2, 1}}));
    EXPECT_EQ(s.category_histogram, (std::map<int, int>{{1, 1}}));
    EXPECT_EQ(run_cli("stats " + (dir.path() / "v").string()), 0);
}

TEST(Stats, SynthRoundTripCounts) {
    TempDir dir("cli");
    for (int k = 1; k <= 3; ++k) {
        SceneOptions opt;
        opt.objects = k;
        const auto path = dir.path() / "data" / ("v" + std::to_string(k));
        write_json(dir.path() / "cfg.json", to_json(random_scene(static_cast<std::uint64_t>(k), opt)));
        ASSERT_EQ(run_cli("synth --config " + (dir.path() / "cfg.json").string() + " --out " + path.string()), 0);
    }
    const auto s = cmd_stats(dir.path() / "data");
    ASSERT_EQ(s.videos.size(), 3u);
    for (int k = 1; k <= 3; ++k) EXPECT_EQ(s.videos[static_cast<std::size_t>(k - 1)].instances, k);
}

TEST(Render, EmptyResultsGiveBackgroundOnly) {
    TempDir dir("cli");
    generate(two_objects(), dir.path() / "vid");
    std::filesystem::create_directories(dir.path() / "res");
    EXPECT_EQ(cmd_render(dir.path() / "res", dir.path() / "vid" / "images", dir.path() / "ov"), 6);
    for (int t = 0; t < 6; ++t) {
        const cv::Mat a = cv::imread((dir.path() / "ov" / frame_file(t, ".png")).string());
        const cv::Mat b = cv::imread((dir.path() / "vid" / "images" / frame_file(t, ".png")).string());
        EXPECT_EQ(cv::norm(a, b, cv::NORM_INF), 0.0);
    }
}

TEST(Render, OverlayDiffersWhereLabelled) {
    TempDir dir("cli");
    generate(two_objects(), dir.path() / "vid");
    EXPECT_EQ(run_cli("render " + (dir.path() / "vid" / "gt").string() + " " +
                      (dir.path() / "vid" / "images").string() + " --out " + (dir.path() / "ov").string()),
              0);
    const cv::Mat a = cv::imread((dir.path() / "ov" / frame_file(0, ".png")).string());
    const cv::Mat b = cv::imread((dir.path() / "vid" / "images" / frame_file(0, ".png")).string());
    EXPECT_GT(cv::norm(a, b, cv::NORM_L1), 0.0);
}

TEST(Cli, MissingSubcommandFails) { EXPECT_NE(run_cli(""), 0); }
