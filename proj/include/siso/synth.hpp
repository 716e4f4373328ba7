#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "json.hpp"

#include "siso/evaluation.hpp"
#include "siso/types.hpp"

namespace siso {

enum class SynthShape { rectangle, disk };

struct SynthObject {
    SynthShape shape = SynthShape::rectangle;
    int x = 0;  ///< frame-0 top-left (rectangle) or centre (disk)
    int y = 0;
    int width = 10;   ///< rectangle only
    int height = 10;  ///< rectangle only
    int radius = 5;   ///< disk only
    std::array<std::uint8_t, 3> color{255, 0, 0};
    CategoryId category = 1;
    int vx = 0;  ///< pixels per frame
    int vy = 0;
    int z = 0;   ///< higher z is drawn on top
    std::vector<std::pair<int, int>> hidden;  ///< inclusive frame ranges where the object is not rendered
    bool salient = true;
    double score = 0.95;  ///< detector score before jitter

    bool visible_at(int frame) const;
    bool covers(int frame, int px, int py) const;
};

struct SynthNoise {
    int morph_radius = 0;       ///< each detection is randomly eroded or dilated by this many pixels
    double score_jitter = 0.0;  ///< standard deviation of Gaussian score noise
    double drop_prob = 0.0;     ///< probability that a detection is missing
};

struct SynthConfig {
    int width = 64;
    int height = 48;
    int frames = 3;
    std::array<std::uint8_t, 3> background{128, 128, 128};
    std::vector<SynthObject> objects;
    SynthNoise noise;
    std::uint64_t seed = 0;

    /// Throws ConfigError for invalid sizes or objects larger than the frame.
    void validate() const;
};

SynthConfig synth_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SynthConfig& c);

/// Generated inputs and exact ground truth. Salient object k carries
/// identity k+1 in the ground truth.
struct SynthVideo {
    std::vector<FrameBundle> bundles;
    LabeledVideo gt;
    double max_salient_fraction = 0.0;
};

/// Renders flat-coloured shapes on a flat background, together with the
/// detections (perturbed per the noise settings), binary saliency, and exact
/// forward/backward flows. Pixels whose correspondence changes owner
/// (occlusion, disocclusion, appearance) get unknown flow.
SynthVideo render_synthetic(const SynthConfig& c);

/// Renders and writes the video folder, with ground truth under gt/.
SynthVideo generate(const SynthConfig& c, const std::filesystem::path& out_dir);

struct SceneOptions {
    int width = 96;
    int height = 72;
    int frames = 12;
    int objects = 3;
    int min_size = 12;
    int max_size = 22;
    int max_speed = 2;
    SynthNoise noise;
};

/// Random scene with distinct colours and categories; every object is fully
/// inside the frame at frame 0.
SynthConfig random_scene(std::uint64_t seed, const SceneOptions& opt);

}  // namespace siso
