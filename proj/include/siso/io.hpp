#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "siso/evaluation.hpp"
#include "siso/ledger.hpp"
#include "siso/types.hpp"

namespace siso {

/// "00042" + ext.
std::string frame_file(int index, const std::string& ext);

// Middlebury .flo: "PIEH" tag (float 202021.25), int32 width, int32 height,
// then interleaved float32 (u,v) in row-major order; all little-endian.
FlowField read_flo(const std::filesystem::path& path);
void write_flo(const std::filesystem::path& path, const FlowField& flow);

/// 8-bit single-channel PNG, value = intensity / 255.
SaliencyMap read_saliency(const std::filesystem::path& path);
/// Writes round(value * 255).
void write_saliency(const std::filesystem::path& path, const SaliencyMap& s);

FrameImage read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const FrameImage& img);

/// 16-bit single-channel PNG, pixel = identity (0 = background).
LabelMap read_label_map(const std::filesystem::path& path);
void write_label_map(const std::filesystem::path& path, const LabelMap& labels);

/// Per-frame proposal lists indexed by frame number. Frames missing from the
/// file come back as empty lists.
using DetectionSet = std::vector<std::vector<InstanceProposal>>;

DetectionSet parse_detections(const nlohmann::json& doc, const CategoryRegistry& registry,
                              const std::string& where = "detections");
DetectionSet read_detections(const std::filesystem::path& path, const CategoryRegistry& registry);
nlohmann::json detections_to_json(const DetectionSet& frames);
void write_detections(const std::filesystem::path& path, const DetectionSet& frames);

/// External re-identification proposals, per frame, as [x,y,w,h] boxes.
std::vector<std::vector<Box>> read_proposal_boxes(const std::filesystem::path& path);
void write_proposal_boxes(const std::filesystem::path& path, const std::vector<std::vector<Box>>& frames);

/// Label directory: 00000.png, 00001.png, ... plus semantics.json mapping
/// identity -> category id.
LabeledVideo read_ground_truth(const std::filesystem::path& dir);
void write_labels(const std::filesystem::path& dir, const LabeledVideo& video);

/// Machine-readable summary of one pipeline run.
struct RunReport {
    std::vector<double> initial_fc;
    std::vector<double> final_fc;
    int propagation_iterations = 0;
    int propagation_commits = 0;
    std::vector<double> mean_fc_history;
    std::vector<IdentityEvent> events;
    std::size_t identities = 0;
    nlohmann::json config;
};

nlohmann::json to_json(const RunReport& report);

/// Writes the labels in ground-truth format plus report.json.
void write_results(const std::filesystem::path& dir, const LabeledVideo& labels, const RunReport& report);

/// File locations of one video folder.
struct VideoLayout {
    std::filesystem::path root;

    std::filesystem::path image(int t) const { return root / "images" / frame_file(t, ".png"); }
    std::filesystem::path saliency(int t) const { return root / "saliency" / frame_file(t, ".png"); }
    std::filesystem::path flow_fwd(int t) const { return root / "flow_fwd" / frame_file(t, ".flo"); }
    std::filesystem::path flow_bwd(int t) const { return root / "flow_bwd" / frame_file(t, ".flo"); }
    std::filesystem::path detections() const { return root / "detections.json"; }
    std::filesystem::path proposals() const { return root / "proposals.json"; }
    std::filesystem::path gt() const { return root / "gt"; }

    /// Number of contiguous images starting at 00000.png.
    int frame_count() const;
};

/// Checks that every file of the layout exists and then reads and validates
/// all frames. Throws ValidationError listing every problem before any frame
/// is processed.
std::vector<FrameBundle> load_video(const std::filesystem::path& dir, const CategoryRegistry& registry);

/// Writes images, saliency, flows, detections and (if any) proposal boxes.
void write_video(const std::filesystem::path& dir, const std::vector<FrameBundle>& frames);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace siso
