#pragma once

#include <functional>
#include <span>
#include <vector>

#include "siso/fusion.hpp"
#include "siso/types.hpp"

namespace siso {

struct PropagationParams {
    int max_iters = 5;
    double eps = 1e-4;  ///< convergence tolerance on the mean frame confidence

    void validate() const;
};

/// Inverse nearest-neighbour warp: target pixel p is set iff
/// m(round(p + flow_to_source(p))) is inside the frame and set. Unknown-flow
/// pixels never set.
Mask warp_mask(const Mask& m, const FlowField& flow_to_source);

/// Fusion state of one frame: its salient mask, the candidate list that was
/// last fused (original proposals plus committed propagated copies), and the
/// fused result.
struct FrameFusion {
    Mask salient;
    std::vector<InstanceProposal> candidates;
    FusedFrame fused;
};

/// Fuses a candidate list for a given frame index.
using Fuser = std::function<FusedFrame(std::span<const InstanceProposal>, const Mask&, int frame)>;

Fuser sequential_fuser(const FusionParams& p);

/// Tags each proposal of frame `frame` with a video-unique provenance tag.
void assign_tags(std::vector<InstanceProposal>& proposals, int frame);

/// Fuses every frame independently (in parallel when jobs != 1).
std::vector<FrameFusion> fuse_video(std::span<const FrameBundle> bundles, const FusionParams& p,
                                    const Fuser& fuser, int jobs = 1);

struct PassResult {
    bool changed = false;
    int commits = 0;
};

/// One propagation pass. Frames are visited in descending confidence order
/// (fixed at the start of the pass); a frame whose FC exceeds a neighbour's
/// warps its confident instances into that neighbour, the neighbour is
/// re-fused with them as extra candidates, and the result is kept only if
/// its FC strictly increases.
PassResult propagate_pass(std::vector<FrameFusion>& frames, std::span<const FrameBundle> bundles,
                          const Fuser& fuser);

double mean_fc(std::span<const FrameFusion> frames);

struct PropagationReport {
    int iterations = 0;
    std::vector<double> mean_fc;  ///< initial value, then one entry per pass
    int commits = 0;
};

/// Repeats propagate_pass until the mean FC moves by less than eps or
/// max_iters passes have run.
PropagationReport recurrent_propagate(std::vector<FrameFusion>& frames, std::span<const FrameBundle> bundles,
                                      const Fuser& fuser, const PropagationParams& pp);

}  // namespace siso
