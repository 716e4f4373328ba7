#pragma once

#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "siso/mask.hpp"
#include "siso/types.hpp"

namespace siso {

enum class TrackStatus { active, lost, closed };

std::string_view to_string(TrackStatus s);

/// What an identity looked like in one frame.
struct TrackEntry {
    Mask region;
    CategoryId category = 0;
    double cls_score = 0.0;
    std::size_t area = 0;
    int components = 0;

    /// Average connected-region area, area / components.
    double average_region_area() const {
        return components == 0 ? 0.0 : static_cast<double>(area) / components;
    }
};

struct Track {
    TrackStatus status = TrackStatus::active;
    std::map<int, TrackEntry> frames;
    std::optional<int> keyframe;
    std::vector<double> query;  ///< appearance descriptor taken at `keyframe`
};

enum class IdentityEventKind { created, lost, reidentified };

std::string_view to_string(IdentityEventKind k);

struct IdentityEvent {
    int frame = 0;
    Identity identity = kBackground;
    IdentityEventKind kind = IdentityEventKind::created;

    friend bool operator==(const IdentityEvent&, const IdentityEvent&) = default;
};

/// Per-video identity bookkeeping. Identities are dense, start at 1 and are
/// never reused or merged; each identity holds at most one region per frame.
class TrackLedger {
public:
    Identity create(int frame, const Mask& region, CategoryId category, double cls_score);
    /// Throws Error if `id` already has a region at `frame` or is unknown.
    void record(Identity id, int frame, const Mask& region, CategoryId category, double cls_score);
    void set_status(Identity id, TrackStatus status);

    bool contains(Identity id) const { return tracks_.count(id) != 0; }
    const Track& at(Identity id) const;
    Track& at(Identity id);
    const std::map<Identity, Track>& tracks() const noexcept { return tracks_; }
    std::size_t size() const noexcept { return tracks_.size(); }

    std::vector<Identity> with_status(TrackStatus status) const;

private:
    std::map<Identity, Track> tracks_;
    Identity next_ = 1;
};

}  // namespace siso
