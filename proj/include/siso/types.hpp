#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "siso/mask.hpp"

namespace siso {

using CategoryId = int;
/// Per-video instance identity. 0 is reserved for background.
using Identity = std::uint32_t;
inline constexpr Identity kBackground = 0;

/// Ordered (id, name) table of semantic categories.
class CategoryRegistry {
public:
    struct Entry {
        CategoryId id;
        std::string name;
    };

    CategoryRegistry() = default;

    /// The 29 MS-COCO categories used for salient instance annotation, keyed
    /// by their MS-COCO category ids.
    static const CategoryRegistry& coco29();

    /// Throws ConfigError on a duplicate id.
    void add(CategoryId id, std::string name);

    bool contains(CategoryId id) const;
    std::optional<std::string_view> name(CategoryId id) const;
    std::optional<CategoryId> find(std::string_view name) const;
    const std::vector<Entry>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }

private:
    std::vector<Entry> entries_;
};

struct InstanceProposal {
    Mask region;
    CategoryId category = 0;
    double cls_score = 0.0;
    /// Provenance tag. Propagated copies carry the tag of the instance they
    /// were warped from, so a frame can tell it already holds that instance.
    std::uint64_t tag = 0;
};

struct SaliencyMap {
    int width = 0;
    int height = 0;
    std::vector<double> values;  ///< row-major, each in [0,1]

    SaliencyMap() = default;
    SaliencyMap(int w, int h, double fill = 0.0)
        : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}
    double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

/// Dense displacement field; (u,v) at a pixel points to where that pixel
/// goes in the other frame.
struct FlowField {
    int width = 0;
    int height = 0;
    std::vector<float> u;
    std::vector<float> v;

    FlowField() = default;
    FlowField(int w, int h, float fu = 0.0F, float fv = 0.0F)
        : width(w),
          height(h),
          u(static_cast<std::size_t>(w) * h, fu),
          v(static_cast<std::size_t>(w) * h, fv) {}
    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }

    friend bool operator==(const FlowField&, const FlowField&) = default;
};

/// Flow magnitudes above this are "unknown" (Middlebury convention); such
/// pixels have no correspondence.
inline constexpr float kUnknownFlow = 1e10F;
inline constexpr float kUnknownFlowThreshold = 1e9F;

struct FrameImage {
    int width = 0;
    int height = 0;
    std::vector<std::array<std::uint8_t, 3>> rgb;

    FrameImage() = default;
    FrameImage(int w, int h, std::array<std::uint8_t, 3> fill = {0, 0, 0})
        : width(w), height(h), rgb(static_cast<std::size_t>(w) * h, fill) {}
    std::array<std::uint8_t, 3>& at(int x, int y) { return rgb[static_cast<std::size_t>(y) * width + x]; }
    const std::array<std::uint8_t, 3>& at(int x, int y) const {
        return rgb[static_cast<std::size_t>(y) * width + x];
    }

    friend bool operator==(const FrameImage&, const FrameImage&) = default;
};

/// Every per-frame input of the pipeline.
struct FrameBundle {
    int index = 0;
    FrameImage image;
    std::vector<InstanceProposal> proposals;
    SaliencyMap saliency;
    std::optional<FlowField> flow_fwd;  ///< this frame -> next
    std::optional<FlowField> flow_bwd;  ///< this frame -> previous
    std::vector<Box> external_boxes;    ///< optional re-identification proposals
};

/// Per-pixel identity labels plus the category of each identity.
struct LabelMap {
    int width = 0;
    int height = 0;
    std::vector<Identity> ids;

    LabelMap() = default;
    LabelMap(int w, int h) : width(w), height(h), ids(static_cast<std::size_t>(w) * h, kBackground) {}

    /// One mask per nonzero identity present, ordered by identity.
    std::map<Identity, Mask> masks() const;
    void paint(const Mask& region, Identity id);

    friend bool operator==(const LabelMap&, const LabelMap&) = default;
};

struct ConfidentInstance {
    std::size_t source = 0;  ///< index into the fused candidate list
    std::uint64_t tag = 0;
    Mask region;             ///< candidate region restricted to the salient mask
    CategoryId category = 0;
    double cls_score = 0.0;
    double seg_score = 0.0;  ///< IOU with the remaining salient mask when selected
    double cs = 0.0;
};

/// Result of fusing one frame: disjoint confident instances in selection
/// order, and their mean confidence.
struct FusedFrame {
    int width = 0;
    int height = 0;
    std::vector<ConfidentInstance> confident;
    double fc = 0.0;

    /// Label map with instance k (0-based selection order) painted as k+1.
    LabelMap fusion_map() const;
    bool has_tag(std::uint64_t tag) const;
};

/// Collected violations; empty means the bundle is consistent.
struct Diagnostics {
    std::vector<std::string> messages;
    bool ok() const noexcept { return messages.empty(); }
};

Diagnostics validate_bundle(const FrameBundle& b);

/// Keeps proposals whose score is strictly above `min_cls`.
std::vector<InstanceProposal> filter_proposals(std::span<const InstanceProposal> proposals, double min_cls = 0.7);

}  // namespace siso
