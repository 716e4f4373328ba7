#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "siso/evaluation.hpp"
#include "siso/pipeline.hpp"

namespace siso {

/// True when `dir` looks like one video folder (has images/).
bool is_video_dir(const std::filesystem::path& dir);

/// Runs the pipeline on one video folder, or on every video folder below a
/// dataset root (results go to out/<video name>). Returns the number of
/// videos processed.
int cmd_fuse(const std::filesystem::path& input, const RunConfig& config, const std::filesystem::path& out);

/// Evaluates predictions against ground truth. Both sides are either one
/// label directory or a root with one sub-directory per video. Writes
/// eval.json and eval.csv into `out` when given.
EvalReport cmd_eval(const std::filesystem::path& pred, const std::filesystem::path& gt,
                    const std::optional<std::filesystem::path>& out, const EvalParams& params = {});

void cmd_synth(const std::filesystem::path& config, const std::filesystem::path& out);

/// Writes one overlay PNG per image: identities tinted, category name at the
/// top-left of each region. Frames without a label file render background only.
int cmd_render(const std::filesystem::path& results, const std::filesystem::path& images,
               const std::filesystem::path& out);

struct VideoStats {
    std::string video;
    int instances = 0;
    int categories = 0;
};

struct StatsReport {
    std::vector<VideoStats> videos;
    std::map<int, int> instance_histogram;  ///< instance count -> number of videos
    std::map<int, int> category_histogram;  ///< distinct categories -> number of videos
};

StatsReport cmd_stats(const std::filesystem::path& gt);
std::string to_text(const StatsReport& s);

}  // namespace siso
