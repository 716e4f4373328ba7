#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "siso/ledger.hpp"
#include "siso/types.hpp"

namespace siso {

enum class AssignmentMethod { greedy, hungarian };

struct TrackingParams {
    double theta_id = 0.7;      ///< minimum IOU for carrying or restoring an identity
    double reid_min_sim = 0.5;  ///< minimum cosine similarity for a re-ID candidate
    int descriptor_bins = 8;    ///< histogram bins per colour channel
    AssignmentMethod assignment = AssignmentMethod::greedy;

    void validate() const;
};

/// Which tracking stages run. All on is the full tracker.
struct TrackingSwitches {
    bool identity_propagation = true;
    bool reidentification = true;
};

/// Identity per confident instance of one fused frame (parallel to
/// FusedFrame::confident); kBackground marks an untracked instance.
using FrameAssignment = std::vector<Identity>;

/// Unit-L2 joint RGB histogram.
struct AppearanceDescriptor {
    std::vector<double> values;
};

double cosine_similarity(const AppearanceDescriptor& a, const AppearanceDescriptor& b);

/// Gives every confident instance of the first frame a fresh identity, in
/// selection order.
FrameAssignment init_identities(const FusedFrame& first, TrackLedger& ledger, std::vector<IdentityEvent>& events,
                                int frame = 0);

/// Warps each identity of the previous frame into the current one and
/// matches it to current instances by IOU (one-to-one, IOU >= theta_id).
/// Matched identities are recorded; unmatched previous identities become
/// lost. Unmatched current instances are left untracked (kBackground).
FrameAssignment propagate_identities(const FusedFrame& prev, const FrameAssignment& prev_ids, const FusedFrame& cur,
                                     const FlowField& flow_to_prev, int frame, const TrackingParams& tp,
                                     TrackLedger& ledger, std::vector<IdentityEvent>& events);

/// Frame maximising average connected-region area over the identity's
/// recorded frames <= upto_frame; ties go to the earliest frame.
int select_keyframe(const TrackLedger& ledger, Identity id, int upto_frame);

/// Joint RGB histogram with bins^3 cells over the box (clipped to the frame).
/// Throws Error if the box is degenerate or misses the frame.
AppearanceDescriptor describe(const FrameImage& img, const Box& box, int bins);

/// Tries to restore a lost identity on one of the untracked instances of the
/// target frame. Candidates are the boxes of untracked instances plus
/// `external_boxes`; the most similar candidate (>= reid_min_sim) is
/// rasterised and must overlap an untracked instance with IOU > theta_id.
/// On success the instance adopts `id`, the ledger is updated and the
/// instance index is returned.
std::optional<std::size_t> reidentify(Identity id, const FusedFrame& target, FrameAssignment& ids,
                                      std::span<const FrameBundle> video, int frame, const TrackingParams& tp,
                                      TrackLedger& ledger, std::vector<IdentityEvent>& events);

/// Per identity, the category with the largest video-wide sum of scores
/// (ties: smaller id). Rewrites every recorded category to that label.
std::map<Identity, CategoryId> unify_semantics(TrackLedger& ledger);

struct TrackingResult {
    TrackLedger ledger;
    std::vector<FrameAssignment> assignments;
    std::vector<IdentityEvent> events;
    std::map<Identity, CategoryId> categories;  ///< unified labels
};

/// Full tracking pass over a fused video, followed by semantic unification.
TrackingResult track_video(std::span<const FusedFrame> frames, std::span<const FrameBundle> video,
                           const TrackingParams& tp, const TrackingSwitches& sw = {});

/// Paints each frame's confident regions with their identities.
std::vector<LabelMap> label_frames(std::span<const FusedFrame> frames, std::span<const FrameAssignment> ids);

}  // namespace siso
