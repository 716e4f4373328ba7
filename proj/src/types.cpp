#include "siso/types.hpp"

#include <algorithm>
#include <cmath>

#include "siso/error.hpp"

namespace siso {

const CategoryRegistry& CategoryRegistry::coco29() {
    static const CategoryRegistry registry = [] {
        CategoryRegistry r;
        r.add(1, "person");
        r.add(2, "bicycle");
        r.add(3, "car");
        r.add(4, "motorcycle");
        r.add(5, "airplane");
        r.add(6, "bus");
        r.add(7, "train");
        r.add(8, "truck");
        r.add(9, "boat");
        r.add(16, "bird");
        r.add(17, "cat");
        r.add(18, "dog");
        r.add(19, "horse");
        r.add(20, "sheep");
        r.add(21, "cow");
        r.add(22, "elephant");
        r.add(23, "bear");
        r.add(27, "backpack");
        r.add(36, "snowboard");
        r.add(37, "sports ball");
        r.add(38, "kite");
        r.add(41, "skateboard");
        r.add(42, "surfboard");
        r.add(43, "tennis racket");
        r.add(62, "chair");
        r.add(72, "tv");
        r.add(75, "remote");
        r.add(77, "cell phone");
        r.add(85, "clock");
        return r;
    }();
    return registry;
}

void CategoryRegistry::add(CategoryId id, std::string name) {
    if (contains(id)) throw ConfigError("duplicate category id " + std::to_string(id));
    entries_.push_back({id, std::move(name)});
}

bool CategoryRegistry::contains(CategoryId id) const {
    return std::any_of(entries_.begin(), entries_.end(), [id](const Entry& e) { return e.id == id; });
}

std::optional<std::string_view> CategoryRegistry::name(CategoryId id) const {
    for (const auto& e : entries_) {
        if (e.id == id) return e.name;
    }
    return std::nullopt;
}

std::optional<CategoryId> CategoryRegistry::find(std::string_view name) const {
    for (const auto& e : entries_) {
        if (e.name == name) return e.id;
    }
    return std::nullopt;
}

std::map<Identity, Mask> LabelMap::masks() const {
    std::map<Identity, Mask> out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const Identity id = ids[i];
        if (id == kBackground) continue;
        auto it = out.find(id);
        if (it == out.end()) it = out.emplace(id, Mask(width, height)).first;
        it->second.set_at(i);
    }
    return out;
}

void LabelMap::paint(const Mask& region, Identity id) {
    if (region.width() != width || region.height() != height) {
        throw DimensionMismatch(region.width(), region.height(), width, height);
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (region.at(i)) ids[i] = id;
    }
}

LabelMap FusedFrame::fusion_map() const {
    LabelMap map(width, height);
    for (std::size_t k = 0; k < confident.size(); ++k) {
        map.paint(confident[k].region, static_cast<Identity>(k + 1));
    }
    return map;
}

bool FusedFrame::has_tag(std::uint64_t t) const {
    return std::any_of(confident.begin(), confident.end(),
                       [t](const ConfidentInstance& c) { return c.tag == t; });
}

namespace {

std::string dims(int w, int h) { return std::to_string(w) + "x" + std::to_string(h); }

void check_flow(const FlowField& f, const char* name, int w, int h, Diagnostics& d) {
    if (f.width != w || f.height != h) {
        d.messages.push_back(std::string("dimension mismatch: ") + name + " is " + dims(f.width, f.height) +
                             ", frame is " + dims(w, h));
        return;
    }
    const auto bad = [](float x) { return !std::isfinite(x); };
    if (std::any_of(f.u.begin(), f.u.end(), bad) || std::any_of(f.v.begin(), f.v.end(), bad)) {
        d.messages.push_back(std::string("non-finite value in ") + name);
    }
}

}  // namespace

Diagnostics validate_bundle(const FrameBundle& b) {
    Diagnostics d;
    const int w = b.image.width;
    const int h = b.image.height;
    const std::string frame = "frame " + std::to_string(b.index) + ": ";
    if (w <= 0 || h <= 0) d.messages.push_back(frame + "empty image");
    if (b.saliency.width != w || b.saliency.height != h) {
        d.messages.push_back(frame + "dimension mismatch: saliency is " + dims(b.saliency.width, b.saliency.height) +
                             ", frame is " + dims(w, h));
    }
    if (std::any_of(b.saliency.values.begin(), b.saliency.values.end(),
                    [](double v) { return !(v >= 0.0 && v <= 1.0); })) {
        d.messages.push_back(frame + "saliency value outside [0,1]");
    }
    for (std::size_t i = 0; i < b.proposals.size(); ++i) {
        const auto& p = b.proposals[i];
        const std::string where = frame + "proposal " + std::to_string(i) + ": ";
        if (p.region.width() != w || p.region.height() != h) {
            d.messages.push_back(where + "dimension mismatch: region is " +
                                 dims(p.region.width(), p.region.height()) + ", frame is " + dims(w, h));
        } else if (p.region.empty()) {
            d.messages.push_back(where + "empty region");
        }
        if (!(p.cls_score >= 0.0 && p.cls_score <= 1.0)) {
            d.messages.push_back(where + "score " + std::to_string(p.cls_score) + " outside [0,1]");
        }
    }
    if (b.flow_fwd) {
        Diagnostics fd;
        check_flow(*b.flow_fwd, "forward flow", w, h, fd);
        for (auto& m : fd.messages) d.messages.push_back(frame + m);
    }
    if (b.flow_bwd) {
        Diagnostics fd;
        check_flow(*b.flow_bwd, "backward flow", w, h, fd);
        for (auto& m : fd.messages) d.messages.push_back(frame + m);
    }
    return d;
}

std::vector<InstanceProposal> filter_proposals(std::span<const InstanceProposal> proposals, double min_cls) {
    std::vector<InstanceProposal> kept;
    for (const auto& p : proposals) {
        if (p.cls_score > min_cls) kept.push_back(p);
    }
    return kept;
}

}  // namespace siso
