#include "siso/fusion.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <random>

#include "siso/error.hpp"

namespace siso {

void FusionParams::validate() const {
    if (!(theta_seg > 0.0 && theta_seg < 1.0)) throw ConfigError("theta_seg must lie in (0,1)");
    if (!(beta_sq > 0.0)) throw ConfigError("beta_sq must be positive");
    if (!(min_cls >= 0.0 && min_cls <= 1.0)) throw ConfigError("min_cls must lie in [0,1]");
}

Mask binarize_saliency(const SaliencyMap& s) {
    Mask out(s.width, s.height);
    const auto n = static_cast<double>(s.values.size());
    double sum = 0.0;
    for (double v : s.values) sum += v;
    const double mean = sum / n;
    double sq = 0.0;
    for (double v : s.values) sq += (v - mean) * (v - mean);
    const double threshold = mean + std::sqrt(sq / n);
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        if (s.values[i] > threshold) out.set_at(i);
    }
    return out;
}

double confidence_score(double s_seg, double s_cls, double beta_sq) {
    const double denom = beta_sq * s_seg + s_cls;
    if (denom == 0.0) return 0.0;
    return (1.0 + beta_sq) * s_seg * s_cls / denom;
}

namespace {

void check_inputs(std::span<const InstanceProposal> proposals, const Mask& salient) {
    for (const auto& p : proposals) require_same_shape(p.region, salient);
}

void finish(FusedFrame& out) {
    double total = 0.0;
    for (const auto& c : out.confident) total += c.cs;
    out.fc = out.confident.empty() ? 0.0 : total / static_cast<double>(out.confident.size());
#ifndef NDEBUG
    for (std::size_t a = 0; a < out.confident.size(); ++a) {
        for (std::size_t b = a + 1; b < out.confident.size(); ++b) {
            assert(intersection_count(out.confident[a].region, out.confident[b].region) == 0);
        }
    }
#endif
}

}  // namespace

FusedFrame sequential_fuse(std::span<const InstanceProposal> proposals, const Mask& salient,
                           const FusionParams& p) {
    check_inputs(proposals, salient);
    FusedFrame out;
    out.width = salient.width();
    out.height = salient.height();

    Mask remaining = salient;
    std::vector<char> live(proposals.size(), 1);
    std::vector<double> seg(proposals.size(), 0.0);

    for (;;) {
        std::optional<std::size_t> best;
        for (std::size_t i = 0; i < proposals.size(); ++i) {
            if (!live[i]) continue;
            seg[i] = iou(proposals[i].region, remaining);
            if (seg[i] == 0.0) {
                live[i] = 0;
                continue;
            }
            if (!best || seg[i] > seg[*best] ||
                (seg[i] == seg[*best] && proposals[i].cls_score > proposals[*best].cls_score)) {
                best = i;
            }
        }
        if (!best || seg[*best] <= p.theta_seg) break;

        const std::size_t j = *best;
        const auto& chosen = proposals[j];
        ConfidentInstance inst;
        inst.source = j;
        inst.tag = chosen.tag;
        inst.region = chosen.region & remaining;
        inst.category = chosen.category;
        inst.cls_score = chosen.cls_score;
        inst.seg_score = seg[j];
        inst.cs = confidence_score(seg[j], chosen.cls_score, p.beta_sq);
        remaining -= inst.region;
        live[j] = 0;
        out.confident.push_back(std::move(inst));
    }
    finish(out);
    return out;
}

FusedFrame random_order_fuse(std::span<const InstanceProposal> proposals, const Mask& salient,
                             const FusionParams& p, std::uint64_t seed) {
    check_inputs(proposals, salient);
    FusedFrame out;
    out.width = salient.width();
    out.height = salient.height();

    std::vector<std::size_t> order(proposals.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    Mask remaining = salient;
    for (auto j : order) {
        const auto& chosen = proposals[j];
        Mask region = chosen.region & remaining;
        if (region.empty()) continue;
        ConfidentInstance inst;
        inst.source = j;
        inst.tag = chosen.tag;
        inst.seg_score = iou(chosen.region, remaining);
        inst.region = std::move(region);
        inst.category = chosen.category;
        inst.cls_score = chosen.cls_score;
        inst.cs = confidence_score(inst.seg_score, chosen.cls_score, p.beta_sq);
        remaining -= inst.region;
        out.confident.push_back(std::move(inst));
    }
    finish(out);
    return out;
}

}  // namespace siso
