#include "siso/evaluation.hpp"

#include <set>
#include <sstream>

#include "siso/error.hpp"
#include "siso/hungarian.hpp"

namespace siso {

double js(const LabeledInstance& m, const LabeledInstance& g) {
    require_same_shape(m.mask, g.mask);
    if (m.id != g.id || m.label != g.label) return 0.0;
    return region_similarity_j(m.mask, g.mask);
}

double fs(const LabeledInstance& m, const LabeledInstance& g, int radius) {
    require_same_shape(m.mask, g.mask);
    if (m.id != g.id || m.label != g.label) return 0.0;
    return contour_accuracy_f(m.mask, g.mask, radius);
}

std::vector<IdentityMatch> match_first_frame(const std::map<Identity, Mask>& pred,
                                             const std::map<Identity, Mask>& gt) {
    std::vector<Identity> gt_ids, pred_ids;
    for (const auto& [id, m] : gt) gt_ids.push_back(id);
    for (const auto& [id, m] : pred) pred_ids.push_back(id);
    ScoreMatrix scores(static_cast<int>(gt_ids.size()), static_cast<int>(pred_ids.size()));
    for (std::size_t r = 0; r < gt_ids.size(); ++r) {
        for (std::size_t c = 0; c < pred_ids.size(); ++c) {
            scores(static_cast<int>(r), static_cast<int>(c)) = iou(gt.at(gt_ids[r]), pred.at(pred_ids[c]));
        }
    }
    const auto assignment = max_weight_assignment(scores);
    std::vector<IdentityMatch> out;
    for (std::size_t r = 0; r < gt_ids.size(); ++r) {
        const int c = assignment[r];
        if (c < 0) continue;
        const double s = scores(static_cast<int>(r), c);
        if (s <= 0.0) continue;
        out.push_back({gt_ids[r], pred_ids[static_cast<std::size_t>(c)], s});
    }
    return out;
}

VideoScore evaluate_video(const std::string& name, const LabeledVideo& pred, const LabeledVideo& gt,
                          const EvalParams& params) {
    if (pred.frames.size() != gt.frames.size()) {
        throw Error(name + ": prediction has " + std::to_string(pred.frames.size()) +
                    " frames, ground truth has " + std::to_string(gt.frames.size()));
    }
    VideoScore score;
    score.video = name;
    if (gt.frames.empty()) return score;
    const int w = gt.frames.front().width;
    const int h = gt.frames.front().height;
    const int radius = params.contour_radius.value_or(default_contour_radius(w, h));

    std::vector<std::map<Identity, Mask>> pred_masks, gt_masks;
    for (std::size_t f = 0; f < gt.frames.size(); ++f) {
        if (pred.frames[f].width != w || pred.frames[f].height != h || gt.frames[f].width != w ||
            gt.frames[f].height != h) {
            throw DimensionMismatch(pred.frames[f].width, pred.frames[f].height, w, h);
        }
        pred_masks.push_back(pred.frames[f].masks());
        gt_masks.push_back(gt.frames[f].masks());
    }

    score.matches = match_first_frame(pred_masks.front(), gt_masks.front());
    std::map<Identity, Identity> gt_to_pred;
    std::set<Identity> matched_pred;
    for (const auto& m : score.matches) {
        gt_to_pred[m.gt] = m.pred;
        matched_pred.insert(m.pred);
    }

    std::set<Identity> gt_ids, pred_ids;
    for (const auto& [id, c] : gt.categories) gt_ids.insert(id);
    for (const auto& frame : gt_masks) {
        for (const auto& [id, m] : frame) gt_ids.insert(id);
    }
    for (const auto& frame : pred_masks) {
        for (const auto& [id, m] : frame) pred_ids.insert(id);
    }
    for (Identity id : pred_ids) {
        if (!matched_pred.count(id)) score.unmatched_pred.push_back(id);
    }

    const Mask empty(w, h);
    double js_total = 0.0, fs_total = 0.0;
    for (Identity gid : gt_ids) {
        InstanceScore inst;
        inst.video = name;
        inst.gt_id = gid;
        const auto gcat = gt.categories.find(gid);
        if (gcat == gt.categories.end()) throw Error(name + ": ground-truth identity " + std::to_string(gid) + " has no category");
        inst.category = gcat->second;
        std::optional<CategoryId> pred_label;
        if (auto it = gt_to_pred.find(gid); it != gt_to_pred.end()) {
            inst.pred_id = it->second;
            if (auto pc = pred.categories.find(it->second); pc != pred.categories.end()) pred_label = pc->second;
        }

        double js_sum = 0.0, fs_sum = 0.0;
        for (std::size_t f = 0; f < gt.frames.size(); ++f) {
            const auto gi = gt_masks[f].find(gid);
            const Mask& g = gi == gt_masks[f].end() ? empty : gi->second;
            const Mask* m = &empty;
            if (inst.pred_id) {
                if (auto pi = pred_masks[f].find(*inst.pred_id); pi != pred_masks[f].end()) m = &pi->second;
            }
            if (g.empty() && m->empty()) {
                ++inst.skipped_frames;
                continue;
            }
            ++inst.evaluated_frames;
            // Matching maps the predicted identity onto the ground-truth one.
            const LabeledInstance gl{gid, inst.category, g};
            const LabeledInstance ml{inst.pred_id ? gid : kBackground, pred_label.value_or(-1), *m};
            js_sum += js(ml, gl);
            fs_sum += fs(ml, gl, radius);
        }
        if (inst.evaluated_frames == 0) {
            inst.never_present = true;
            inst.js = 1.0;
            inst.fs = 1.0;
        } else {
            inst.js = js_sum / inst.evaluated_frames;
            inst.fs = fs_sum / inst.evaluated_frames;
        }
        js_total += inst.js;
        fs_total += inst.fs;
        score.instances.push_back(inst);
    }
    if (!score.instances.empty()) {
        score.js = js_total / static_cast<double>(score.instances.size());
        score.fs = fs_total / static_cast<double>(score.instances.size());
    }
    return score;
}

EvalReport aggregate(std::vector<VideoScore> videos) {
    EvalReport report;
    double js_total = 0.0, fs_total = 0.0;
    for (const auto& v : videos) {
        for (const auto& inst : v.instances) {
            js_total += inst.js;
            fs_total += inst.fs;
            ++report.instances;
            report.skipped_frames += inst.skipped_frames;
            if (inst.never_present) ++report.never_present_instances;
        }
    }
    if (report.instances > 0) {
        report.js = js_total / report.instances;
        report.fs = fs_total / report.instances;
    }
    report.videos = std::move(videos);
    return report;
}

nlohmann::json to_json(const EvalReport& report) {
    nlohmann::json j;
    j["JS"] = report.js;
    j["FS"] = report.fs;
    j["instances"] = report.instances;
    j["skipped_frames"] = report.skipped_frames;
    j["never_present_instances"] = report.never_present_instances;
    j["videos"] = nlohmann::json::array();
    for (const auto& v : report.videos) {
        nlohmann::json jv;
        jv["name"] = v.video;
        jv["JS"] = v.js;
        jv["FS"] = v.fs;
        jv["matches"] = nlohmann::json::array();
        for (const auto& m : v.matches) jv["matches"].push_back({{"gt", m.gt}, {"pred", m.pred}, {"iou", m.iou}});
        jv["unmatched_pred"] = v.unmatched_pred;
        jv["instances"] = nlohmann::json::array();
        for (const auto& i : v.instances) {
            nlohmann::json ji{{"gt", i.gt_id},
                              {"category", i.category},
                              {"JS", i.js},
                              {"FS", i.fs},
                              {"evaluated_frames", i.evaluated_frames},
                              {"skipped_frames", i.skipped_frames}};
            ji["pred"] = i.pred_id ? nlohmann::json(*i.pred_id) : nlohmann::json(nullptr);
            jv["instances"].push_back(std::move(ji));
        }
        j["videos"].push_back(std::move(jv));
    }
    return j;
}

std::string to_csv(const EvalReport& report) {
    std::ostringstream out;
    out.precision(17);
    out << "video,gt_id,pred_id,category,JS,FS,evaluated_frames,skipped_frames\n";
    for (const auto& v : report.videos) {
        for (const auto& i : v.instances) {
            out << v.video << ',' << i.gt_id << ',';
            if (i.pred_id) out << *i.pred_id;
            out << ',' << i.category << ',' << i.js << ',' << i.fs << ',' << i.evaluated_frames << ','
                << i.skipped_frames << '\n';
        }
    }
    return out.str();
}

}  // namespace siso
