#include "siso/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "siso/error.hpp"
#include "siso/hungarian.hpp"
#include "siso/propagation.hpp"

namespace siso {

void TrackingParams::validate() const {
    if (!(theta_id > 0.0 && theta_id <= 1.0)) throw ConfigError("theta_id must lie in (0,1]");
    if (!(reid_min_sim >= 0.0 && reid_min_sim <= 1.0)) throw ConfigError("reid_min_sim must lie in [0,1]");
    if (descriptor_bins < 1 || descriptor_bins > 256) throw ConfigError("descriptor_bins must lie in [1,256]");
}

double cosine_similarity(const AppearanceDescriptor& a, const AppearanceDescriptor& b) {
    if (a.values.size() != b.values.size()) throw Error("descriptor sizes differ");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        dot += a.values[i] * b.values[i];
        na += a.values[i] * a.values[i];
        nb += b.values[i] * b.values[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

FrameAssignment init_identities(const FusedFrame& first, TrackLedger& ledger, std::vector<IdentityEvent>& events,
                                int frame) {
    FrameAssignment ids;
    ids.reserve(first.confident.size());
    for (const auto& inst : first.confident) {
        const Identity id = ledger.create(frame, inst.region, inst.category, inst.cls_score);
        events.push_back({frame, id, IdentityEventKind::created});
        ids.push_back(id);
    }
    return ids;
}

FrameAssignment propagate_identities(const FusedFrame& prev, const FrameAssignment& prev_ids, const FusedFrame& cur,
                                     const FlowField& flow_to_prev, int frame, const TrackingParams& tp,
                                     TrackLedger& ledger, std::vector<IdentityEvent>& events) {
    if (prev_ids.size() != prev.confident.size()) throw Error("assignment does not match previous frame");
    const int rows = static_cast<int>(prev.confident.size());
    const int cols = static_cast<int>(cur.confident.size());
    ScoreMatrix scores(rows, cols);
    for (int r = 0; r < rows; ++r) {
        if (prev_ids[static_cast<std::size_t>(r)] == kBackground) continue;
        const Mask warped = warp_mask(prev.confident[static_cast<std::size_t>(r)].region, flow_to_prev);
        for (int c = 0; c < cols; ++c) scores(r, c) = iou(warped, cur.confident[static_cast<std::size_t>(c)].region);
    }

    std::vector<int> match;
    if (tp.assignment == AssignmentMethod::hungarian) {
        ScoreMatrix gated = scores;
        for (auto& v : gated.values) {
            if (v < tp.theta_id) v = 0.0;
        }
        match = max_weight_assignment(gated);
        for (int r = 0; r < rows; ++r) {
            auto& c = match[static_cast<std::size_t>(r)];
            if (c >= 0 && gated(r, c) == 0.0) c = -1;
        }
    } else {
        match = greedy_assignment(scores, tp.theta_id);
    }

    FrameAssignment ids(cur.confident.size(), kBackground);
    for (int r = 0; r < rows; ++r) {
        const Identity id = prev_ids[static_cast<std::size_t>(r)];
        if (id == kBackground) continue;
        const int c = match[static_cast<std::size_t>(r)];
        if (c < 0) {
            ledger.set_status(id, TrackStatus::lost);
            events.push_back({frame, id, IdentityEventKind::lost});
            continue;
        }
        const auto& inst = cur.confident[static_cast<std::size_t>(c)];
        ledger.record(id, frame, inst.region, inst.category, inst.cls_score);
        ids[static_cast<std::size_t>(c)] = id;
    }
    return ids;
}

int select_keyframe(const TrackLedger& ledger, Identity id, int upto_frame) {
    const auto& track = ledger.at(id);
    std::optional<int> best;
    double best_score = -1.0;
    for (const auto& [frame, entry] : track.frames) {
        if (frame > upto_frame) break;
        const double s = entry.average_region_area();
        if (s > best_score) {
            best_score = s;
            best = frame;
        }
    }
    if (!best) {
        throw Error("identity " + std::to_string(id) + " has no region at or before frame " +
                    std::to_string(upto_frame));
    }
    return *best;
}

AppearanceDescriptor describe(const FrameImage& img, const Box& box, int bins) {
    if (bins < 1 || bins > 256) throw Error("descriptor bins must lie in [1,256]");
    const int x0 = std::max(box.x, 0);
    const int y0 = std::max(box.y, 0);
    const int x1 = std::min(box.x + box.w, img.width);
    const int y1 = std::min(box.y + box.h, img.height);
    if (box.empty() || x0 >= x1 || y0 >= y1) throw Error("degenerate descriptor box");

    const auto b = static_cast<std::size_t>(bins);
    AppearanceDescriptor d{std::vector<double>(b * b * b, 0.0)};
    auto bin = [bins](std::uint8_t v) { return static_cast<std::size_t>(v) * static_cast<std::size_t>(bins) / 256; };
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
            const auto& px = img.at(x, y);
            d.values[(bin(px[0]) * b + bin(px[1])) * b + bin(px[2])] += 1.0;
        }
    }
    double norm = 0.0;
    for (double v : d.values) norm += v * v;
    norm = std::sqrt(norm);
    for (double& v : d.values) v /= norm;
    return d;
}

namespace {

const AppearanceDescriptor& query_descriptor(TrackLedger& ledger, Identity id, std::span<const FrameBundle> video,
                                             int frame, int bins, AppearanceDescriptor& storage) {
    auto& track = ledger.at(id);
    const int key = select_keyframe(ledger, id, frame - 1);
    if (track.keyframe != key || track.query.empty()) {
        const auto box = track.frames.at(key).region.bounding_box();
        track.keyframe = key;
        track.query = box ? describe(video[static_cast<std::size_t>(key)].image, *box, bins).values
                          : std::vector<double>{};
    }
    storage.values = track.query;
    return storage;
}

}  // namespace

std::optional<std::size_t> reidentify(Identity id, const FusedFrame& target, FrameAssignment& ids,
                                      std::span<const FrameBundle> video, int frame, const TrackingParams& tp,
                                      TrackLedger& ledger, std::vector<IdentityEvent>& events) {
    if (ledger.at(id).status != TrackStatus::lost) return std::nullopt;
    if (ids.size() != target.confident.size()) throw Error("assignment does not match target frame");

    std::vector<std::size_t> untracked;
    for (std::size_t k = 0; k < ids.size(); ++k) {
        if (ids[k] == kBackground) untracked.push_back(k);
    }
    if (untracked.empty()) return std::nullopt;

    AppearanceDescriptor storage;
    const auto& query = query_descriptor(ledger, id, video, frame, tp.descriptor_bins, storage);
    if (query.values.empty()) return std::nullopt;

    const auto& bundle = video[static_cast<std::size_t>(frame)];
    std::vector<Box> candidates;
    for (auto k : untracked) {
        if (auto box = target.confident[k].region.bounding_box()) candidates.push_back(*box);
    }
    for (const auto& box : bundle.external_boxes) candidates.push_back(box);

    std::optional<Box> chosen;
    double best_sim = -1.0;
    for (const auto& box : candidates) {
        const int x1 = std::min(box.x + box.w, bundle.image.width);
        const int y1 = std::min(box.y + box.h, bundle.image.height);
        if (box.empty() || std::max(box.x, 0) >= x1 || std::max(box.y, 0) >= y1) continue;
        const double sim = cosine_similarity(query, describe(bundle.image, box, tp.descriptor_bins));
        if (sim > best_sim) {
            best_sim = sim;
            chosen = box;
        }
    }
    if (!chosen || best_sim < tp.reid_min_sim) return std::nullopt;

    const Mask box_mask = Mask::from_box(target.width, target.height, *chosen);
    std::optional<std::size_t> best;
    double best_iou = 0.0;
    for (auto k : untracked) {
        const double s = iou(box_mask, target.confident[k].region);
        if (s > best_iou) {
            best_iou = s;
            best = k;
        }
    }
    if (!best || !(best_iou > tp.theta_id)) return std::nullopt;

    const auto& inst = target.confident[*best];
    ledger.record(id, frame, inst.region, inst.category, inst.cls_score);
    ids[*best] = id;
    events.push_back({frame, id, IdentityEventKind::reidentified});
    return best;
}

std::map<Identity, CategoryId> unify_semantics(TrackLedger& ledger) {
    std::map<Identity, CategoryId> labels;
    for (const auto& [id, track] : ledger.tracks()) {
        std::map<CategoryId, double> votes;
        for (const auto& [frame, entry] : track.frames) votes[entry.category] += entry.cls_score;
        std::optional<CategoryId> best;
        double best_sum = 0.0;
        for (const auto& [category, sum] : votes) {
            if (!best || sum > best_sum) {
                best = category;
                best_sum = sum;
            }
        }
        if (best) labels[id] = *best;
    }
    for (const auto& [id, category] : labels) {
        for (auto& [frame, entry] : ledger.at(id).frames) entry.category = category;
    }
    return labels;
}

TrackingResult track_video(std::span<const FusedFrame> frames, std::span<const FrameBundle> video,
                           const TrackingParams& tp, const TrackingSwitches& sw) {
    tp.validate();
    if (frames.size() != video.size()) throw Error("track_video: frame and bundle counts differ");
    TrackingResult result;
    if (frames.empty()) return result;

    auto& ledger = result.ledger;
    auto& events = result.events;
    result.assignments.push_back(init_identities(frames[0], ledger, events, 0));

    for (std::size_t t = 1; t < frames.size(); ++t) {
        const int frame = static_cast<int>(t);
        const auto& prev = frames[t - 1];
        const auto& cur = frames[t];
        FrameAssignment ids(cur.confident.size(), kBackground);

        if (sw.identity_propagation && video[t].flow_bwd) {
            ids = propagate_identities(prev, result.assignments[t - 1], cur, *video[t].flow_bwd, frame, tp, ledger,
                                       events);
        } else {
            for (Identity id : result.assignments[t - 1]) {
                if (id == kBackground) continue;
                ledger.set_status(id, TrackStatus::lost);
                events.push_back({frame, id, IdentityEventKind::lost});
            }
        }

        if (sw.reidentification) {
            for (Identity id : ledger.with_status(TrackStatus::lost)) {
                if (std::none_of(ids.begin(), ids.end(), [](Identity i) { return i == kBackground; })) break;
                reidentify(id, cur, ids, video, frame, tp, ledger, events);
            }
        }

        for (std::size_t k = 0; k < ids.size(); ++k) {
            if (ids[k] != kBackground) continue;
            const auto& inst = cur.confident[k];
            ids[k] = ledger.create(frame, inst.region, inst.category, inst.cls_score);
            events.push_back({frame, ids[k], IdentityEventKind::created});
        }
        result.assignments.push_back(std::move(ids));
    }

    for (Identity id : ledger.with_status(TrackStatus::lost)) ledger.set_status(id, TrackStatus::closed);
    result.categories = unify_semantics(ledger);
    return result;
}

std::vector<LabelMap> label_frames(std::span<const FusedFrame> frames, std::span<const FrameAssignment> ids) {
    if (frames.size() != ids.size()) throw Error("label_frames: frame and assignment counts differ");
    std::vector<LabelMap> out;
    out.reserve(frames.size());
    for (std::size_t t = 0; t < frames.size(); ++t) {
        LabelMap map(frames[t].width, frames[t].height);
        for (std::size_t k = 0; k < frames[t].confident.size(); ++k) map.paint(frames[t].confident[k].region, ids[t][k]);
        out.push_back(std::move(map));
    }
    return out;
}

}  // namespace siso
