#include "siso/pipeline.hpp"

#include <set>
#include <string>

#include <spdlog/spdlog.h>

#include "siso/error.hpp"

namespace siso {

void RunConfig::validate() const {
    fusion.validate();
    propagation.validate();
    tracking.validate();
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

template <typename T>
void take(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

RunConfig run_config_from_json(const nlohmann::json& j, RunConfig c) {
    static const std::set<std::string> known{"theta_seg", "beta_sq", "min_cls", "max_iters", "eps",
                                             "theta_id", "reid_min_sim", "descriptor_bins", "assignment",
                                             "enable_sequential_fusion", "enable_recurrent_propagation",
                                             "enable_identity_propagation", "enable_reid", "seed", "jobs"};
    if (!j.is_object()) throw ConfigError("run config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) throw ConfigError("run config: unknown key \"" + key + "\"");
    }
    try {
        take(j, "theta_seg", c.fusion.theta_seg);
        take(j, "beta_sq", c.fusion.beta_sq);
        take(j, "min_cls", c.fusion.min_cls);
        take(j, "max_iters", c.propagation.max_iters);
        take(j, "eps", c.propagation.eps);
        take(j, "theta_id", c.tracking.theta_id);
        take(j, "reid_min_sim", c.tracking.reid_min_sim);
        take(j, "descriptor_bins", c.tracking.descriptor_bins);
        if (j.contains("assignment")) {
            const auto a = j.at("assignment").get<std::string>();
            if (a == "greedy") {
                c.tracking.assignment = AssignmentMethod::greedy;
            } else if (a == "hungarian") {
                c.tracking.assignment = AssignmentMethod::hungarian;
            } else {
                throw ConfigError("run config: assignment must be \"greedy\" or \"hungarian\"");
            }
        }
        take(j, "enable_sequential_fusion", c.enable_sequential_fusion);
        take(j, "enable_recurrent_propagation", c.enable_recurrent_propagation);
        take(j, "enable_identity_propagation", c.enable_identity_propagation);
        take(j, "enable_reid", c.enable_reid);
        take(j, "seed", c.seed);
        take(j, "jobs", c.jobs);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("run config: ") + e.what());
    }
    c.validate();
    return c;
}

nlohmann::json to_json(const RunConfig& c) {
    return {{"theta_seg", c.fusion.theta_seg},
            {"beta_sq", c.fusion.beta_sq},
            {"min_cls", c.fusion.min_cls},
            {"max_iters", c.propagation.max_iters},
            {"eps", c.propagation.eps},
            {"theta_id", c.tracking.theta_id},
            {"reid_min_sim", c.tracking.reid_min_sim},
            {"descriptor_bins", c.tracking.descriptor_bins},
            {"assignment", c.tracking.assignment == AssignmentMethod::greedy ? "greedy" : "hungarian"},
            {"enable_sequential_fusion", c.enable_sequential_fusion},
            {"enable_recurrent_propagation", c.enable_recurrent_propagation},
            {"enable_identity_propagation", c.enable_identity_propagation},
            {"enable_reid", c.enable_reid},
            {"seed", c.seed}};
}

Fuser make_fuser(const RunConfig& c) {
    if (c.enable_sequential_fusion) return sequential_fuser(c.fusion);
    return [p = c.fusion, seed = c.seed](std::span<const InstanceProposal> cand, const Mask& salient, int frame) {
        return random_order_fuse(cand, salient, p, splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(frame))));
    };
}

PipelineResult run_pipeline(std::span<const FrameBundle> video, const RunConfig& c) {
    c.validate();
    if (video.empty()) throw ValidationError({"video has no frames"});
    PipelineResult r;
    const Fuser fuser = make_fuser(c);

    r.fusion = fuse_video(video, c.fusion, fuser, c.jobs);
    r.report.initial_fc.reserve(r.fusion.size());
    for (const auto& f : r.fusion) r.report.initial_fc.push_back(f.fused.fc);
    if (c.enable_recurrent_propagation) {
        r.propagation = recurrent_propagate(r.fusion, video, fuser, c.propagation);
    } else {
        r.propagation.mean_fc.push_back(mean_fc(r.fusion));
    }
    spdlog::debug("propagation: {} passes, {} commits", r.propagation.iterations, r.propagation.commits);

    std::vector<FusedFrame> fused;
    fused.reserve(r.fusion.size());
    for (const auto& f : r.fusion) fused.push_back(f.fused);
    r.tracking = track_video(fused, video, c.tracking,
                             TrackingSwitches{c.enable_identity_propagation, c.enable_reid});

    r.labels.width = video.front().image.width;
    r.labels.height = video.front().image.height;
    r.labels.frames = label_frames(fused, r.tracking.assignments);
    r.labels.categories = r.tracking.categories;

    for (const auto& f : r.fusion) r.report.final_fc.push_back(f.fused.fc);
    r.report.propagation_iterations = r.propagation.iterations;
    r.report.propagation_commits = r.propagation.commits;
    r.report.mean_fc_history = r.propagation.mean_fc;
    r.report.events = r.tracking.events;
    r.report.identities = r.tracking.ledger.size();
    r.report.config = to_json(c);
    return r;
}

}  // namespace siso
