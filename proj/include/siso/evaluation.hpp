#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "siso/mask.hpp"
#include "siso/types.hpp"

namespace siso {

/// A whole video of identity label maps plus the category of each identity;
/// both ground truth and pipeline output use this form.
struct LabeledVideo {
    int width = 0;
    int height = 0;
    std::vector<LabelMap> frames;
    std::map<Identity, CategoryId> categories;

    friend bool operator==(const LabeledVideo&, const LabeledVideo&) = default;
};

/// A mask with the identity and semantic label it claims.
struct LabeledInstance {
    Identity id = kBackground;
    CategoryId label = 0;
    Mask mask;
};

/// Region similarity gated on identity and label equality.
double js(const LabeledInstance& m, const LabeledInstance& g);
/// Contour accuracy gated on identity and label equality.
double fs(const LabeledInstance& m, const LabeledInstance& g, int radius);

struct IdentityMatch {
    Identity gt = kBackground;
    Identity pred = kBackground;
    double iou = 0.0;
};

/// Maximum-total-IOU one-to-one matching of first-frame instances. Pairs
/// with IOU 0 are left unmatched.
std::vector<IdentityMatch> match_first_frame(const std::map<Identity, Mask>& pred,
                                             const std::map<Identity, Mask>& gt);

struct EvalParams {
    std::optional<int> contour_radius;  ///< default: ceil(0.008 * diagonal)
};

struct InstanceScore {
    std::string video;
    Identity gt_id = kBackground;
    std::optional<Identity> pred_id;
    CategoryId category = 0;
    double js = 0.0;
    double fs = 0.0;
    int evaluated_frames = 0;
    int skipped_frames = 0;  ///< absent in both prediction and ground truth
    bool never_present = false;
};

struct VideoScore {
    std::string video;
    std::vector<InstanceScore> instances;
    std::vector<IdentityMatch> matches;
    std::vector<Identity> unmatched_pred;
    double js = 0.0;
    double fs = 0.0;
};

struct EvalReport {
    std::vector<VideoScore> videos;
    double js = 0.0;  ///< mean over all annotated instances of the dataset
    double fs = 0.0;
    int instances = 0;
    int skipped_frames = 0;
    int never_present_instances = 0;
};

/// Scores one video: first-frame matching, then per-instance means of JS/FS
/// over frames where the instance is present in the prediction or the ground
/// truth. Throws Error if frame counts or sizes differ.
VideoScore evaluate_video(const std::string& name, const LabeledVideo& pred, const LabeledVideo& gt,
                          const EvalParams& params = {});

/// Dataset means over all instances of all videos.
EvalReport aggregate(std::vector<VideoScore> videos);

nlohmann::json to_json(const EvalReport& report);
std::string to_csv(const EvalReport& report);

}  // namespace siso
