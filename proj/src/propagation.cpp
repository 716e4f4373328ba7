#include "siso/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "siso/error.hpp"
#include "siso/parallel.hpp"

namespace siso {

void PropagationParams::validate() const {
    if (max_iters < 1) throw ConfigError("max_iters must be at least 1");
    if (!(eps > 0.0)) throw ConfigError("eps must be positive");
}

Mask warp_mask(const Mask& m, const FlowField& flow_to_source) {
    if (flow_to_source.width != m.width() || flow_to_source.height != m.height()) {
        throw DimensionMismatch(m.width(), m.height(), flow_to_source.width, flow_to_source.height);
    }
    const int w = m.width();
    const int h = m.height();
    Mask out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const auto i = flow_to_source.index(x, y);
            const double u = flow_to_source.u[i];
            const double v = flow_to_source.v[i];
            if (!(std::abs(u) < kUnknownFlowThreshold && std::abs(v) < kUnknownFlowThreshold)) continue;
            const double sx = std::round(x + u);
            const double sy = std::round(y + v);
            if (sx < 0.0 || sy < 0.0 || sx >= w || sy >= h) continue;
            if (m.get(static_cast<int>(sx), static_cast<int>(sy))) out.set(x, y);
        }
    }
    return out;
}

Fuser sequential_fuser(const FusionParams& p) {
    return [p](std::span<const InstanceProposal> c, const Mask& salient, int) {
        return sequential_fuse(c, salient, p);
    };
}

void assign_tags(std::vector<InstanceProposal>& proposals, int frame) {
    for (std::size_t i = 0; i < proposals.size(); ++i) {
        proposals[i].tag = (static_cast<std::uint64_t>(frame) + 1) << 32 | (static_cast<std::uint64_t>(i) + 1);
    }
}

std::vector<FrameFusion> fuse_video(std::span<const FrameBundle> bundles, const FusionParams& p,
                                    const Fuser& fuser, int jobs) {
    std::vector<FrameFusion> frames(bundles.size());
    parallel_for(bundles.size(), jobs, [&](std::size_t t) {
        auto& f = frames[t];
        f.salient = binarize_saliency(bundles[t].saliency);
        f.candidates = filter_proposals(bundles[t].proposals, p.min_cls);
        assign_tags(f.candidates, static_cast<int>(t));
        f.fused = fuser(f.candidates, f.salient, static_cast<int>(t));
    });
    return frames;
}

double mean_fc(std::span<const FrameFusion> frames) {
    if (frames.empty()) return 0.0;
    double total = 0.0;
    for (const auto& f : frames) total += f.fused.fc;
    return total / static_cast<double>(frames.size());
}

namespace {

const FlowField* flow_into(std::span<const FrameBundle> bundles, std::size_t from, std::size_t to) {
    // Pull-warping into `to` needs the flow from `to` back towards `from`.
    if (to == from + 1) return bundles[to].flow_bwd ? &*bundles[to].flow_bwd : nullptr;
    return bundles[to].flow_fwd ? &*bundles[to].flow_fwd : nullptr;
}

bool holds_tag(const FrameFusion& f, std::uint64_t tag) {
    return f.fused.has_tag(tag) ||
           std::any_of(f.candidates.begin(), f.candidates.end(),
                       [tag](const InstanceProposal& c) { return c.tag == tag; });
}

}  // namespace

PassResult propagate_pass(std::vector<FrameFusion>& frames, std::span<const FrameBundle> bundles,
                          const Fuser& fuser) {
    if (frames.size() != bundles.size()) throw Error("propagate_pass: frame and bundle counts differ");
    PassResult result;
    std::vector<std::size_t> order(frames.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return frames[a].fused.fc > frames[b].fused.fc; });

    for (auto t : order) {
        for (const std::ptrdiff_t step : {1, -1}) {
            const auto n = static_cast<std::ptrdiff_t>(t) + step;
            if (n < 0 || n >= static_cast<std::ptrdiff_t>(frames.size())) continue;
            auto& source = frames[t];
            auto& target = frames[static_cast<std::size_t>(n)];
            if (!(source.fused.fc > target.fused.fc)) continue;
            const FlowField* flow = flow_into(bundles, t, static_cast<std::size_t>(n));
            if (flow == nullptr) continue;

            auto candidates = target.candidates;
            bool added = false;
            for (const auto& inst : source.fused.confident) {
                if (holds_tag(target, inst.tag)) continue;
                Mask warped = warp_mask(inst.region, *flow);
                if (warped.empty()) continue;
                candidates.push_back({std::move(warped), inst.category, inst.cls_score, inst.tag});
                added = true;
            }
            if (!added) continue;

            FusedFrame refused = fuser(candidates, target.salient, static_cast<int>(n));
            if (refused.fc > target.fused.fc) {
                target.candidates = std::move(candidates);
                target.fused = std::move(refused);
                result.changed = true;
                ++result.commits;
            }
        }
    }
    return result;
}

PropagationReport recurrent_propagate(std::vector<FrameFusion>& frames, std::span<const FrameBundle> bundles,
                                      const Fuser& fuser, const PropagationParams& pp) {
    pp.validate();
    PropagationReport report;
    report.mean_fc.push_back(mean_fc(frames));
    while (report.iterations < pp.max_iters) {
        const auto pass = propagate_pass(frames, bundles, fuser);
        ++report.iterations;
        report.commits += pass.commits;
        const double now = mean_fc(frames);
        const double delta = now - report.mean_fc.back();
        report.mean_fc.push_back(now);
        if (std::abs(delta) < pp.eps) break;
    }
    return report;
}

}  // namespace siso
