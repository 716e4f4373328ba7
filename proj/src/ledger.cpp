#include "siso/ledger.hpp"

#include <string>

#include "siso/error.hpp"

namespace siso {

std::string_view to_string(TrackStatus s) {
    switch (s) {
        case TrackStatus::active: return "active";
        case TrackStatus::lost: return "lost";
        case TrackStatus::closed: return "closed";
    }
    return "unknown";
}

std::string_view to_string(IdentityEventKind k) {
    switch (k) {
        case IdentityEventKind::created: return "created";
        case IdentityEventKind::lost: return "lost";
        case IdentityEventKind::reidentified: return "reidentified";
    }
    return "unknown";
}

Identity TrackLedger::create(int frame, const Mask& region, CategoryId category, double cls_score) {
    const Identity id = next_++;
    tracks_.emplace(id, Track{});
    record(id, frame, region, category, cls_score);
    return id;
}

void TrackLedger::record(Identity id, int frame, const Mask& region, CategoryId category, double cls_score) {
    auto& track = at(id);
    if (track.frames.count(frame) != 0) {
        throw Error("identity " + std::to_string(id) + " already has a region at frame " + std::to_string(frame));
    }
    TrackEntry e{region, category, cls_score, region.count(), connected_components(region)};
    track.frames.emplace(frame, std::move(e));
    track.status = TrackStatus::active;
}

void TrackLedger::set_status(Identity id, TrackStatus status) { at(id).status = status; }

const Track& TrackLedger::at(Identity id) const {
    auto it = tracks_.find(id);
    if (it == tracks_.end()) throw Error("unknown identity " + std::to_string(id));
    return it->second;
}

Track& TrackLedger::at(Identity id) {
    auto it = tracks_.find(id);
    if (it == tracks_.end()) throw Error("unknown identity " + std::to_string(id));
    return it->second;
}

std::vector<Identity> TrackLedger::with_status(TrackStatus status) const {
    std::vector<Identity> out;
    for (const auto& [id, t] : tracks_) {
        if (t.status == status) out.push_back(id);
    }
    return out;
}

}  // namespace siso
