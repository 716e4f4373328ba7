#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"

#include "siso/commands.hpp"
#include "siso/error.hpp"
#include "siso/io.hpp"

namespace {

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("siso");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(spdlog::level::info);
    if (const char* level = std::getenv("SISO_LOG_LEVEL")) {
        const auto parsed = spdlog::level::from_str(level);
        if (parsed == spdlog::level::off && std::string(level) != "off") {
            spdlog::warn("unknown SISO_LOG_LEVEL \"{}\", keeping info", level);
        } else {
            spdlog::set_level(parsed);
        }
    }
}

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::optional<double> theta_seg;
    std::optional<double> theta_id;
    std::optional<double> beta_sq;
    std::optional<int> max_iters;
    bool no_sequential_fusion = false;
    bool no_recurrent_propagation = false;
    bool no_identity_propagation = false;
    bool no_reid = false;
};

siso::RunConfig resolve(const Overrides& o) {
    siso::RunConfig c;
    if (!o.config.empty()) c = siso::run_config_from_json(siso::read_json(o.config));
    if (o.seed) c.seed = *o.seed;
    if (o.jobs) c.jobs = *o.jobs;
    if (o.theta_seg) c.fusion.theta_seg = *o.theta_seg;
    if (o.theta_id) c.tracking.theta_id = *o.theta_id;
    if (o.beta_sq) c.fusion.beta_sq = *o.beta_sq;
    if (o.max_iters) c.propagation.max_iters = *o.max_iters;
    if (o.no_sequential_fusion) c.enable_sequential_fusion = false;
    if (o.no_recurrent_propagation) c.enable_recurrent_propagation = false;
    if (o.no_identity_propagation) c.enable_identity_propagation = false;
    if (o.no_reid) c.enable_reid = false;
    c.validate();
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"Video salient instance segmentation from detections, saliency and flow"};
    app.require_subcommand(1);

    Overrides o;
    std::string input;
    std::string out;

    auto* fuse = app.add_subcommand("fuse", "Run the pipeline on a video folder or a dataset root");
    fuse->add_option("input", input, "Video folder or dataset root")->required();
    fuse->add_option("--out", out, "Results directory")->required();
    fuse->add_option("--config", o.config, "Run config JSON");
    fuse->add_option("--seed", o.seed, "Seed for the random-order merge");
    fuse->add_option("--jobs", o.jobs, "Worker threads (0 = one per CPU)");
    fuse->add_option("--theta-seg", o.theta_seg, "Fusion stop threshold");
    fuse->add_option("--theta-id", o.theta_id, "Identity IOU threshold");
    fuse->add_option("--beta-sq", o.beta_sq, "Confidence score weight");
    fuse->add_option("--max-iters", o.max_iters, "Propagation pass limit");
    fuse->add_flag("--no-sequential-fusion", o.no_sequential_fusion, "Merge proposals in random order");
    fuse->add_flag("--no-recurrent-propagation", o.no_recurrent_propagation, "Skip instance propagation");
    fuse->add_flag("--no-identity-propagation", o.no_identity_propagation, "Do not carry identities across frames");
    fuse->add_flag("--no-reid", o.no_reid, "Disable re-identification");

    std::string gt;
    std::optional<int> radius;
    auto* eval = app.add_subcommand("eval", "Score predictions against ground truth");
    eval->add_option("pred", input, "Prediction labels or results root")->required();
    eval->add_option("gt", gt, "Ground-truth labels or dataset root")->required();
    eval->add_option("--out", out, "Directory for eval.json and eval.csv");
    eval->add_option("--contour-radius", radius, "Boundary match radius in pixels");

    auto* synth = app.add_subcommand("synth", "Generate a synthetic video with ground truth");
    synth->add_option("--config", o.config, "Synthetic scene JSON")->required();
    synth->add_option("--out", out, "Output video folder")->required();

    std::string images;
    auto* render = app.add_subcommand("render", "Draw result overlays");
    render->add_option("results", input, "Result label directory")->required();
    render->add_option("images", images, "Image directory")->required();
    render->add_option("--out", out, "Overlay directory")->required();

    auto* stats = app.add_subcommand("stats", "Instance and category histograms of ground truth");
    stats->add_option("gt", gt, "Ground-truth labels or dataset root")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*fuse) {
            const int n = siso::cmd_fuse(input, resolve(o), out);
            spdlog::info("wrote {} video(s) to {}", n, out);
        } else if (*eval) {
            siso::EvalParams params;
            params.contour_radius = radius;
            const auto r = siso::cmd_eval(input, gt, out.empty() ? std::nullopt : std::optional<std::filesystem::path>(out), params);
            std::cout << "JS " << r.js << "\nFS " << r.fs << "\ninstances " << r.instances << '\n';
        } else if (*synth) {
            siso::cmd_synth(o.config, out);
        } else if (*render) {
            const int n = siso::cmd_render(input, images, out);
            spdlog::info("rendered {} frame(s)", n);
        } else if (*stats) {
            std::cout << siso::to_text(siso::cmd_stats(gt));
        }
    } catch (const siso::ValidationError& e) {
        for (const auto& p : e.problems()) spdlog::error("{}", p);
        spdlog::error("{}", e.what());
        return 1;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 0;
}
