// Acceptance suite: one PASS/FAIL line per criterion, exit code 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "siso/commands.hpp"
#include "siso/evaluation.hpp"
#include "siso/fusion.hpp"
#include "siso/io.hpp"
#include "siso/pipeline.hpp"
#include "siso/propagation.hpp"
#include "siso/synth.hpp"
#include "test_util.hpp"

using namespace siso;
using siso::testing::random_blobs;
using siso::testing::random_mask;
using siso::testing::read_bytes;
using siso::testing::TempDir;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

// ---------------------------------------------------------------------------
// Naive oracles. Plain grids and full enumeration; nothing shared with the
// library beyond the Mask container used to hand data over.

using Grid = std::vector<std::vector<bool>>;

Grid grid_of(const Mask& m) {
    Grid g(static_cast<std::size_t>(m.height()), std::vector<bool>(static_cast<std::size_t>(m.width())));
    for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) g[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)] = m.get(x, y);
    }
    return g;
}

double naive_iou(const Grid& a, const Grid& b, bool both_empty_is_one) {
    std::size_t inter = 0, uni = 0;
    for (std::size_t y = 0; y < a.size(); ++y) {
        for (std::size_t x = 0; x < a[y].size(); ++x) {
            inter += (a[y][x] && b[y][x]) ? 1 : 0;
            uni += (a[y][x] || b[y][x]) ? 1 : 0;
        }
    }
    if (uni == 0) return both_empty_is_one ? 1.0 : 0.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<std::pair<int, int>> naive_boundary(const Grid& g) {
    std::vector<std::pair<int, int>> out;
    const int h = static_cast<int>(g.size());
    const int w = static_cast<int>(g[0].size());
    auto on = [&](int x, int y) {
        return x >= 0 && y >= 0 && x < w && y < h && g[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)];
    };
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (on(x, y) && (!on(x - 1, y) || !on(x + 1, y) || !on(x, y - 1) || !on(x, y + 1))) out.emplace_back(x, y);
        }
    }
    return out;
}

double naive_f(const Grid& p, const Grid& g, int radius) {
    const auto bp = naive_boundary(p);
    const auto bg = naive_boundary(g);
    if (bp.empty() && bg.empty()) return 1.0;
    if (bp.empty() || bg.empty()) return 0.0;
    auto matched = [radius](const auto& from, const auto& to) {
        std::size_t hits = 0;
        for (const auto& [x, y] : from) {
            for (const auto& [u, v] : to) {
                const double d = std::sqrt(static_cast<double>((x - u) * (x - u) + (y - v) * (y - v)));
                if (d <= radius) {
                    ++hits;
                    break;
                }
            }
        }
        return hits;
    };
    const double prec = static_cast<double>(matched(bp, bg)) / static_cast<double>(bp.size());
    const double rec = static_cast<double>(matched(bg, bp)) / static_cast<double>(bg.size());
    return prec + rec == 0.0 ? 0.0 : 2.0 * prec * rec / (prec + rec);
}

// ---------------------------------------------------------------------------
// Step-by-step sequential fusion on pixel sets.

struct TraceStep {
    std::size_t index;
    std::set<int> region;
    double seg;
    double cs;
};

struct Trace {
    std::vector<TraceStep> steps;
    double fc = 0.0;
};

std::set<int> pixels(const Mask& m) {
    std::set<int> s;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m.at(i)) s.insert(static_cast<int>(i));
    }
    return s;
}

Trace reference_fusion(const std::vector<InstanceProposal>& in, const Mask& salient, double theta, double beta_sq) {
    struct Inst {
        std::set<int> region;
        double cls;
        bool alive = true;
    };
    std::vector<Inst> inst;
    for (const auto& p : in) inst.push_back({pixels(p.region), p.cls_score});
    std::set<int> m = pixels(salient);
    Trace trace;
    double cs_sum = 0.0;
    for (;;) {
        std::vector<double> seg(inst.size(), 0.0);
        for (std::size_t i = 0; i < inst.size(); ++i) {
            if (!inst[i].alive) continue;
            std::set<int> inter, uni;
            std::set_intersection(inst[i].region.begin(), inst[i].region.end(), m.begin(), m.end(),
                                  std::inserter(inter, inter.end()));
            std::set_union(inst[i].region.begin(), inst[i].region.end(), m.begin(), m.end(),
                           std::inserter(uni, uni.end()));
            seg[i] = uni.empty() ? 0.0 : static_cast<double>(inter.size()) / static_cast<double>(uni.size());
            if (seg[i] == 0.0) inst[i].alive = false;  // R_i <- empty, never revived
        }
        std::ptrdiff_t j = -1;
        for (std::size_t i = 0; i < inst.size(); ++i) {
            if (!inst[i].alive) continue;
            const auto J = static_cast<std::size_t>(j);
            if (j < 0 || seg[i] > seg[J] || (seg[i] == seg[J] && inst[i].cls > inst[J].cls)) j = static_cast<std::ptrdiff_t>(i);
        }
        if (j < 0) break;
        const auto J = static_cast<std::size_t>(j);
        if (seg[J] <= theta) break;
        std::set<int> carved;
        std::set_intersection(inst[J].region.begin(), inst[J].region.end(), m.begin(), m.end(),
                              std::inserter(carved, carved.end()));
        for (int p : carved) m.erase(p);
        const double denom = beta_sq * seg[J] + inst[J].cls;
        const double cs = denom == 0.0 ? 0.0 : (1.0 + beta_sq) * seg[J] * inst[J].cls / denom;
        cs_sum += cs;
        trace.steps.push_back({J, carved, seg[J], cs});
        inst[J].alive = false;
    }
    trace.fc = trace.steps.empty() ? 0.0 : cs_sum / static_cast<double>(trace.steps.size());
    return trace;
}

// ---------------------------------------------------------------------------

Outcome metric_oracles() {
    std::mt19937_64 rng(1001);
    std::uniform_real_distribution<double> density(0.05, 0.9);
    std::uniform_int_distribution<int> small(1, 2);
    int mismatches = 0;
    const int radius = default_contour_radius(32, 32);
    for (int i = 0; i < 200; ++i) {
        const Mask a = i % 2 == 0 ? random_mask(rng, 32, 32, density(rng)) : random_blobs(rng, 32, 32, 3);
        const Mask b = i % 3 == 0 ? random_mask(rng, 32, 32, density(rng)) : random_blobs(rng, 32, 32, 3);
        const Grid ga = grid_of(a), gb = grid_of(b);
        if (iou(a, b) != naive_iou(ga, gb, false)) ++mismatches;
        if (region_similarity_j(a, b) != naive_iou(ga, gb, true)) ++mismatches;
        for (int r : {0, 1, 2, radius}) {
            if (contour_accuracy_f(a, b, r) != naive_f(ga, gb, r)) ++mismatches;
        }
        const auto id_a = static_cast<Identity>(small(rng)), id_b = static_cast<Identity>(small(rng));
        const CategoryId l_a = small(rng), l_b = small(rng);
        const double delta = (id_a == id_b && l_a == l_b) ? 1.0 : 0.0;
        if (js({id_a, l_a, a}, {id_b, l_b, b}) != delta * naive_iou(ga, gb, true)) ++mismatches;
        if (fs({id_a, l_a, a}, {id_b, l_b, b}, radius) != delta * naive_f(ga, gb, radius)) ++mismatches;
    }
    return {mismatches == 0, "200 pairs, " + std::to_string(mismatches) + " mismatches"};
}

Outcome fusion_trace() {
    std::mt19937_64 rng(2002);
    std::uniform_int_distribution<int> count(0, 4);
    std::uniform_real_distribution<double> score(0.7, 1.0);
    const FusionParams p;
    int mismatches = 0;
    for (int it = 0; it < 100; ++it) {
        const Mask salient = random_mask(rng, 8, 8, 0.5);
        std::vector<InstanceProposal> ps;
        const int n = count(rng);
        for (int i = 0; i < n; ++i) {
            // Coarse scores force some argmax ties onto the cls/order rules.
            const double s = std::round(score(rng) * 10.0) / 10.0;
            ps.push_back({it % 2 == 0 ? random_mask(rng, 8, 8, 0.4) : random_blobs(rng, 8, 8, 1), i % 3 + 1, s, 0});
        }
        const auto got = sequential_fuse(ps, salient, p);
        const auto want = reference_fusion(ps, salient, p.theta_seg, p.beta_sq);
        bool same = got.confident.size() == want.steps.size() && got.fc == want.fc;
        for (std::size_t k = 0; same && k < want.steps.size(); ++k) {
            const auto& g = got.confident[k];
            const auto& w = want.steps[k];
            same = g.source == w.index && pixels(g.region) == w.region && g.seg_score == w.seg && g.cs == w.cs;
        }
        if (!same) ++mismatches;
    }

    // Worked strip: FC = (CS(3/4, 0.9) + CS(1/3, 0.8)) / 2 = 3.146 / 5.4.
    Mask salient(6, 1), a(6, 1), b(6, 1);
    for (int x : {0, 1, 2, 3}) salient.set(x, 0);
    for (int x : {0, 1, 2}) a.set(x, 0);
    for (int x : {2, 3, 4}) b.set(x, 0);
    const std::vector<InstanceProposal> strip{{a, 1, 0.9, 0}, {b, 18, 0.8, 0}};
    const auto f = sequential_fuse(strip, salient, p);
    const double expected = 3.146 / 5.4;
    const bool strip_ok = f.confident.size() == 2 && std::abs(f.fc - expected) <= 1e-9;
    std::ostringstream os;
    os << "100 random cases, " << mismatches << " trace mismatches; strip FC " << f.fc;
    return {mismatches == 0 && strip_ok, os.str()};
}

Outcome cs_fixed_point() {
    double worst = 0.0;
    for (double beta : {0.1, 0.3, 1.0}) {
        for (int k = 1; k <= 100; ++k) {
            const double s = k / 100.0;
            worst = std::max(worst, std::abs(confidence_score(s, s, beta) - s));
        }
    }
    std::ostringstream os;
    os << "max |CS(s,s)-s| = " << worst;
    return {worst < 1e-12, os.str()};
}

Outcome fusion_invariants() {
    std::mt19937_64 rng(4004);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> count(0, 6);
    int violations = 0;
    for (int it = 0; it < 100; ++it) {
        SaliencyMap s(24, 18);
        const Mask hot = random_blobs(rng, 24, 18, 2);
        for (std::size_t i = 0; i < s.values.size(); ++i) s.values[i] = hot.at(i) ? 0.6 + 0.4 * u(rng) : 0.5 * u(rng);
        const Mask salient = binarize_saliency(s);
        std::vector<InstanceProposal> ps;
        const int n = count(rng);
        for (int i = 0; i < n; ++i) ps.push_back({random_blobs(rng, 24, 18, 2), 1, 0.7 + 0.3 * u(rng), 0});
        const auto f = sequential_fuse(ps, salient, {});
        Mask seen(24, 18);
        for (const auto& c : f.confident) {
            if (intersection_count(c.region, seen) != 0) ++violations;
            if ((c.region - salient).count() != 0) ++violations;
            seen |= c.region;
        }
    }
    return {violations == 0, "100 frames, " + std::to_string(violations) + " violations"};
}

Outcome propagation_monotone() {
    int decreases = 0, overruns = 0, commits = 0, invariant_violations = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        SceneOptions opt;
        opt.frames = 10;
        opt.objects = 3 + static_cast<int>(seed % 3);
        opt.noise.morph_radius = 1;
        opt.noise.drop_prob = 0.25;
        opt.noise.score_jitter = 0.05;
        const auto v = render_synthetic(random_scene(5000 + seed, opt));
        const auto fuser = sequential_fuser({});
        auto frames = fuse_video(v.bundles, {}, fuser, 1);
        const auto r = recurrent_propagate(frames, v.bundles, fuser, {});
        if (r.iterations > 5) ++overruns;
        for (std::size_t i = 1; i < r.mean_fc.size(); ++i) {
            if (r.mean_fc[i] < r.mean_fc[i - 1]) ++decreases;
        }
        commits += r.commits;
        for (const auto& f : frames) {
            Mask seen(f.salient.width(), f.salient.height());
            for (const auto& c : f.fused.confident) {
                if (intersection_count(c.region, seen) != 0 || (c.region - f.salient).count() != 0) ++invariant_violations;
                seen |= c.region;
            }
        }
    }
    std::ostringstream os;
    os << "50 videos, " << commits << " commits, " << decreases << " decreases, " << overruns << " overruns, "
       << invariant_violations << " invariant violations";
    return {decreases == 0 && overruns == 0 && invariant_violations == 0, os.str()};
}

// Five objects, 40 frames: a static occluder, a rectangle that passes fully
// behind it and comes out the other side, a disk that leaves the frame, and
// two free movers.
SynthConfig end_to_end_scene() {
    SynthConfig c;
    c.width = 160;
    c.height = 120;
    c.frames = 40;
    auto rect = [](int x, int y, int w, int h, std::array<std::uint8_t, 3> col, CategoryId cat, int vx, int vy, int z) {
        SynthObject o;
        o.x = x;
        o.y = y;
        o.width = w;
        o.height = h;
        o.color = col;
        o.category = cat;
        o.vx = vx;
        o.vy = vy;
        o.z = z;
        return o;
    };
    auto disk = [](int x, int y, int r, std::array<std::uint8_t, 3> col, CategoryId cat, int vx, int vy, int z) {
        SynthObject o;
        o.shape = SynthShape::disk;
        o.x = x;
        o.y = y;
        o.radius = r;
        o.color = col;
        o.category = cat;
        o.vx = vx;
        o.vy = vy;
        o.z = z;
        return o;
    };
    c.objects = {rect(60, 40, 40, 34, {230, 25, 75}, 6, 0, 0, 5),     // occluder (bus)
                 rect(20, 50, 14, 12, {0, 130, 200}, 3, 2, 0, 1),     // passes behind it (car)
                 disk(130, 22, 10, {60, 180, 75}, 18, 2, 0, 2),       // exits right (dog)
                 rect(20, 95, 16, 16, {255, 225, 25}, 1, 1, 0, 3),    // person
                 disk(130, 95, 8, {145, 30, 180}, 37, -1, 0, 4)};     // sports ball
    return c;
}

int identity_switches(const LabeledVideo& pred, const LabeledVideo& gt) {
    int switches = 0;
    std::map<Identity, Identity> last;
    for (std::size_t t = 0; t < gt.frames.size(); ++t) {
        for (const auto& [gid, g] : gt.frames[t].masks()) {
            std::map<Identity, std::size_t> overlap;
            for (std::size_t i = 0; i < g.size(); ++i) {
                if (g.at(i) && pred.frames[t].ids[i] != kBackground) ++overlap[pred.frames[t].ids[i]];
            }
            if (overlap.empty()) continue;
            const auto best = std::max_element(overlap.begin(), overlap.end(),
                                               [](const auto& a, const auto& b) { return a.second < b.second; })
                                  ->first;
            if (auto it = last.find(gid); it != last.end() && it->second != best) ++switches;
            last[gid] = best;
        }
    }
    return switches;
}

Outcome end_to_end() {
    const auto c = end_to_end_scene();
    const auto v = render_synthetic(c);
    RunConfig rc;
    rc.jobs = 0;
    const auto r = run_pipeline(v.bundles, rc);
    const auto score = aggregate({evaluate_video("scene", r.labels, v.gt)});
    const int switches = identity_switches(r.labels, v.gt);

    // The rectangle behind the occluder is ground-truth identity 2.
    int hidden_from = -1, back_at = -1;
    for (int t = 0; t < c.frames; ++t) {
        const bool present = v.gt.frames[static_cast<std::size_t>(t)].masks().count(2) != 0;
        if (!present && hidden_from < 0) hidden_from = t;
        if (present && hidden_from >= 0 && back_at < 0) back_at = t;
    }
    bool recovered = false;
    Identity original = kBackground;
    for (const auto& m : score.videos[0].matches) {
        if (m.gt == 2) original = m.pred;
    }
    if (back_at > 0 && original != kBackground) {
        const auto reid = std::find(r.tracking.events.begin(), r.tracking.events.end(),
                                    IdentityEvent{back_at, original, IdentityEventKind::reidentified});
        const auto masks = r.labels.frames[static_cast<std::size_t>(back_at)].masks();
        recovered = reid != r.tracking.events.end() && masks.count(original) != 0 &&
                    masks.at(original) == v.gt.frames[static_cast<std::size_t>(back_at)].masks().at(2);
    }
    bool exited = false;
    for (const auto& e : r.tracking.events) exited = exited || e.kind == IdentityEventKind::lost;

    std::ostringstream os;
    os << "JS " << score.js << ", FS " << score.fs << ", switches " << switches << ", hidden frames " << hidden_from
       << ".." << back_at - 1 << ", re-ID on reappearance " << (recovered ? "yes" : "no");
    return {score.js >= 0.99 && score.fs >= 0.99 && switches == 0 && recovered && hidden_from > 0 && exited, os.str()};
}

Outcome ablation_ordering() {
    struct Setting {
        const char* name;
        bool seq, prop, idp, reid;
    };
    const std::vector<Setting> settings{{"a", false, false, true, true},  {"b", true, false, true, true},
                                        {"c", true, true, true, true},    {"alpha", true, true, false, false},
                                        {"beta", true, true, true, false}, {"gamma", true, true, true, true}};
    std::map<std::string, double> total;
    const int seeds = 10;
    for (int s = 0; s < seeds; ++s) {
        SceneOptions opt;
        opt.frames = 24;
        opt.objects = 4;
        opt.noise.morph_radius = 1;
        opt.noise.drop_prob = 0.1;
        auto cfg = random_scene(7000 + static_cast<std::uint64_t>(s), opt);
        // Give one object a short disappearance so re-identification has work.
        cfg.objects[0].hidden = {{8, 10}};
        const auto v = render_synthetic(cfg);
        for (const auto& st : settings) {
            RunConfig rc;
            rc.enable_sequential_fusion = st.seq;
            rc.enable_recurrent_propagation = st.prop;
            rc.enable_identity_propagation = st.idp;
            rc.enable_reid = st.reid;
            rc.seed = static_cast<std::uint64_t>(s);
            const auto r = run_pipeline(v.bundles, rc);
            total[st.name] += aggregate({evaluate_video("v", r.labels, v.gt)}).js / seeds;
        }
    }
    const bool ok = total["c"] >= total["b"] && total["b"] >= total["a"] && total["gamma"] >= total["beta"] &&
                    total["beta"] > total["alpha"];
    std::ostringstream os;
    os.precision(4);
    os << "mean JS a " << total["a"] << " <= b " << total["b"] << " <= c " << total["c"] << "; alpha "
       << total["alpha"] << " < beta " << total["beta"] << " <= gamma " << total["gamma"];
    return {ok, os.str()};
}

Outcome warp_identity() {
    std::mt19937_64 rng(8008);
    int failures = 0;
    for (int i = 0; i < 100; ++i) {
        const Mask m = random_mask(rng, 20, 15, 0.4);
        if (warp_mask(m, FlowField(20, 15)) != m) ++failures;
    }
    int checked = 0;
    auto check_video = [&](const SynthConfig& c) {
        const auto v = render_synthetic(c);
        for (int t = 0; t + 1 < c.frames; ++t) {
            const auto prev = v.gt.frames[static_cast<std::size_t>(t)].masks();
            const auto next = v.gt.frames[static_cast<std::size_t>(t + 1)].masks();
            for (std::size_t k = 0; k < c.objects.size(); ++k) {
                const auto& o = c.objects[k];
                const auto id = static_cast<Identity>(k + 1);
                auto unoccluded = [&](int f, const std::map<Identity, Mask>& masks) {
                    std::size_t area = 0;
                    bool inside = true;
                    for (int y = -1; y <= c.height; ++y) {
                        for (int x = -1; x <= c.width; ++x) {
                            if (!o.covers(f, x, y)) continue;
                            if (x < 0 || y < 0 || x >= c.width || y >= c.height) inside = false;
                            else ++area;
                        }
                    }
                    // Objects touching the outer ring are excluded too.
                    for (int x = -c.width; x < 2 * c.width && inside; ++x) {
                        for (int y : {-c.height, 2 * c.height - 1}) inside = inside && !o.covers(f, x, y);
                    }
                    return inside && o.visible_at(f) && masks.count(id) && masks.at(id).count() == area;
                };
                if (!unoccluded(t, prev) || !unoccluded(t + 1, next)) continue;
                ++checked;
                if (warp_mask(prev.at(id), *v.bundles[static_cast<std::size_t>(t + 1)].flow_bwd) != next.at(id)) ++failures;
            }
        }
    };
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        SceneOptions opt;
        opt.objects = 4;
        check_video(random_scene(8000 + seed, opt));
    }
    check_video(end_to_end_scene());
    return {failures == 0 && checked > 0,
            "100 zero-flow masks; " + std::to_string(checked) + " object transitions; " + std::to_string(failures) +
                " failures"};
}

Outcome io_round_trips() {
    TempDir dir("accept_io");
    std::mt19937_64 rng(9009);
    std::uniform_real_distribution<float> flow(-100.0F, 100.0F);
    std::uniform_real_distribution<double> score(0.0, 1.0);
    std::uniform_int_distribution<int> side(1, 40);
    const auto& reg = CategoryRegistry::coco29();
    int failures = 0;
    for (int i = 0; i < 50; ++i) {
        // .flo, including unknown-flow markers.
        FlowField f(side(rng), side(rng));
        for (std::size_t k = 0; k < f.u.size(); ++k) {
            f.u[k] = k % 11 == 0 ? kUnknownFlow : flow(rng);
            f.v[k] = flow(rng);
        }
        const auto fp = dir.path() / "f.flo";
        write_flo(fp, f);
        const auto f2 = read_flo(fp);
        write_flo(dir.path() / "f2.flo", f2);
        if (!(f2 == f) || read_bytes(fp) != read_bytes(dir.path() / "f2.flo")) ++failures;

        // Detections.
        const int w = side(rng), h = side(rng);
        DetectionSet det(static_cast<std::size_t>(1 + i % 5));
        for (auto& frame : det) {
            for (int k = static_cast<int>(rng() % 4); k > 0; --k) {
                frame.push_back({random_mask(rng, w, h, score(rng)), reg.entries()[rng() % reg.size()].id, score(rng), 0});
            }
        }
        const auto dp = dir.path() / "d.json";
        write_detections(dp, det);
        const auto det2 = read_detections(dp, reg);
        bool same = det2.size() == det.size();
        for (std::size_t t = 0; same && t < det.size(); ++t) {
            same = det2[t].size() == det[t].size();
            for (std::size_t k = 0; same && k < det[t].size(); ++k) {
                same = det2[t][k].region == det[t][k].region && det2[t][k].category == det[t][k].category &&
                       det2[t][k].cls_score == det[t][k].cls_score;
            }
        }
        write_detections(dir.path() / "d2.json", det2);
        if (!same || read_bytes(dp) != read_bytes(dir.path() / "d2.json")) ++failures;

        // Identity PNG + sidecar.
        LabeledVideo lv;
        lv.width = w;
        lv.height = h;
        for (int t = 0; t < 1 + i % 3; ++t) {
            LabelMap l(w, h);
            for (auto& id : l.ids) {
                id = static_cast<Identity>(rng() % 4 == 0 ? 0 : rng() % 65536);
                if (id != 0) lv.categories[id] = reg.entries()[id % reg.size()].id;
            }
            lv.frames.push_back(l);
        }
        const auto lp = dir.path() / ("labels" + std::to_string(i));
        write_labels(lp, lv);
        if (!(read_ground_truth(lp) == lv)) ++failures;
    }
    return {failures == 0, "50 rounds of .flo, detections, labels; " + std::to_string(failures) + " failures"};
}

bool same_tree(const std::filesystem::path& a, const std::filesystem::path& b, std::size_t& files) {
    std::set<std::filesystem::path> ra, rb;
    for (const auto& e : std::filesystem::recursive_directory_iterator(a)) ra.insert(std::filesystem::relative(e.path(), a));
    for (const auto& e : std::filesystem::recursive_directory_iterator(b)) rb.insert(std::filesystem::relative(e.path(), b));
    if (ra != rb) return false;
    for (const auto& rel : ra) {
        if (!std::filesystem::is_regular_file(a / rel)) continue;
        ++files;
        if (read_bytes(a / rel) != read_bytes(b / rel)) return false;
    }
    return true;
}

Outcome determinism() {
    TempDir dir("accept_det");
    SceneOptions opt;
    opt.frames = 16;
    opt.objects = 4;
    opt.noise.morph_radius = 1;
    opt.noise.drop_prob = 0.1;
    opt.noise.score_jitter = 0.05;
    generate(random_scene(10010, opt), dir.path() / "data" / "v1");
    generate(end_to_end_scene(), dir.path() / "data" / "v2");
    bool ok = true;
    std::size_t files = 0;
    for (bool sequential : {true, false}) {
        RunConfig rc;
        rc.enable_sequential_fusion = sequential;
        rc.seed = 77;
        rc.jobs = 2;
        const auto tag = std::string(sequential ? "seq" : "rand");
        cmd_fuse(dir.path() / "data", rc, dir.path() / (tag + "1"));
        cmd_fuse(dir.path() / "data", rc, dir.path() / (tag + "2"));
        ok = ok && same_tree(dir.path() / (tag + "1"), dir.path() / (tag + "2"), files);
    }
    return {ok, std::to_string(files) + " files compared across two configs"};
}

}  // namespace

int main() {
    spdlog::set_level(spdlog::level::err);
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
        double budget_s;
    };
    const std::vector<Criterion> criteria{
        {1, "metric oracle equivalence", metric_oracles, 10.0},
        {2, "sequential fusion trace equivalence", fusion_trace, 0.0},
        {3, "confidence score fixed point", cs_fixed_point, 0.0},
        {4, "fusion invariants", fusion_invariants, 0.0},
        {5, "propagation monotonicity", propagation_monotone, 0.0},
        {6, "end-to-end synthetic oracle", end_to_end, 30.0},
        {7, "ablation ordering", ablation_ordering, 0.0},
        {8, "warp identity and synthetic flows", warp_identity, 0.0},
        {9, "I/O round-trips", io_round_trips, 0.0},
        {10, "cmd_fuse determinism", determinism, 0.0},
    };
    int failed = 0;
    const auto suite_start = std::chrono::steady_clock::now();
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.budget_s > 0.0 && secs >= c.budget_s) {
            o.pass = false;
            o.detail += " (over the " + std::to_string(static_cast<int>(c.budget_s)) + " s budget)";
        }
        if (!o.pass) ++failed;
        std::printf("[%s] %2d %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - suite_start).count();
    std::printf("%d/%zu criteria passed in %.1f s\n", static_cast<int>(criteria.size()) - failed, criteria.size(), total);
    return failed == 0 ? 0 : 1;
}
