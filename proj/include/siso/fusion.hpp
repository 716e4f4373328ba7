#pragma once

#include <cstdint>
#include <span>

#include "siso/mask.hpp"
#include "siso/types.hpp"

namespace siso {

struct FusionParams {
    double theta_seg = 0.1;  ///< instances at or below this IOU are treated as absent
    double beta_sq = 0.3;    ///< weight of the segmentation term in CS
    double min_cls = 0.7;    ///< proposals need a score strictly above this

    /// Throws ConfigError when out of range.
    void validate() const;
};

/// Salient iff value > mean + population standard deviation of the map.
Mask binarize_saliency(const SaliencyMap& s);

/// (1+β²)·seg·cls / (β²·seg + cls); 0 when both scores are 0.
double confidence_score(double s_seg, double s_cls, double beta_sq);

/// Greedy carve-out of the salient mask: repeatedly pick the live proposal
/// with the highest IOU against what is left of the mask, keep its overlap,
/// and remove that overlap from the mask. Proposals whose IOU drops to 0 are
/// discarded for good; the loop stops once the best IOU is <= theta_seg.
/// Argmax ties go to the higher cls_score, then the earlier proposal.
FusedFrame sequential_fuse(std::span<const InstanceProposal> proposals, const Mask& salient,
                           const FusionParams& p);

/// Baseline merge without confidence ordering: proposals are visited in a
/// seeded random order and each keeps whatever part of the remaining salient
/// mask it covers. CS/FC are still reported with the IOU at merge time.
FusedFrame random_order_fuse(std::span<const InstanceProposal> proposals, const Mask& salient,
                             const FusionParams& p, std::uint64_t seed);

}  // namespace siso
