#include "siso/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "siso/error.hpp"

namespace siso {

namespace fsys = std::filesystem;

std::string frame_file(int index, const std::string& ext) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%05d", index);
    return buf + ext;
}

namespace {

constexpr char kFloTag[4] = {'P', 'I', 'E', 'H'};

std::vector<unsigned char> read_bytes(const fsys::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "cannot open for reading");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const fsys::path& path, const std::vector<unsigned char>& bytes) {
    if (path.has_parent_path()) fsys::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path, "cannot open for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError(path, "write failed");
}

std::uint32_t load_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

void store_u32(std::vector<unsigned char>& out, std::uint32_t v) {
    for (int k = 0; k < 4; ++k) out.push_back(static_cast<unsigned char>(v >> (8 * k)));
}

std::string at_offset(const fsys::path& path, std::size_t offset) {
    return path.string() + " @ byte " + std::to_string(offset);
}

cv::Mat read_png(const fsys::path& path) {
    if (!fsys::exists(path)) throw IoError(path, "file not found");
    cv::Mat m;
    try {
        m = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
    } catch (const cv::Exception& e) {
        throw FormatError(path.string(), e.what());
    }
    if (m.empty()) throw FormatError(path.string(), "not a readable image");
    return m;
}

void write_png(const fsys::path& path, const cv::Mat& m) {
    if (path.has_parent_path()) fsys::create_directories(path.parent_path());
    bool ok = false;
    try {
        ok = cv::imwrite(path.string(), m);
    } catch (const cv::Exception& e) {
        throw IoError(path, e.what());
    }
    if (!ok) throw IoError(path, "image write failed");
}

}  // namespace

FlowField read_flo(const fsys::path& path) {
    const auto bytes = read_bytes(path);
    if (bytes.size() < 12) throw FormatError(at_offset(path, bytes.size()), "truncated header");
    if (std::memcmp(bytes.data(), kFloTag, 4) != 0) throw FormatError(at_offset(path, 0), "bad magic tag");
    const auto w = static_cast<std::int32_t>(load_u32(bytes.data() + 4));
    const auto h = static_cast<std::int32_t>(load_u32(bytes.data() + 8));
    if (w <= 0 || h <= 0 || w > (1 << 15) || h > (1 << 15)) {
        throw FormatError(at_offset(path, 4), "invalid dimensions " + std::to_string(w) + "x" + std::to_string(h));
    }
    FlowField f(w, h);
    const std::size_t n = f.u.size();
    const std::size_t need = 12 + n * 8;
    if (bytes.size() < need) throw FormatError(at_offset(path, bytes.size()), "truncated data, expected " + std::to_string(need) + " bytes");
    if (bytes.size() > need) throw FormatError(at_offset(path, need), "trailing data");
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t off = 12 + i * 8;
        const float u = std::bit_cast<float>(load_u32(bytes.data() + off));
        const float v = std::bit_cast<float>(load_u32(bytes.data() + off + 4));
        if (!std::isfinite(u)) throw FormatError(at_offset(path, off), "non-finite flow value");
        if (!std::isfinite(v)) throw FormatError(at_offset(path, off + 4), "non-finite flow value");
        f.u[i] = u;
        f.v[i] = v;
    }
    return f;
}

void write_flo(const fsys::path& path, const FlowField& flow) {
    std::vector<unsigned char> out(kFloTag, kFloTag + 4);
    out.reserve(12 + flow.u.size() * 8);
    store_u32(out, static_cast<std::uint32_t>(flow.width));
    store_u32(out, static_cast<std::uint32_t>(flow.height));
    for (std::size_t i = 0; i < flow.u.size(); ++i) {
        store_u32(out, std::bit_cast<std::uint32_t>(flow.u[i]));
        store_u32(out, std::bit_cast<std::uint32_t>(flow.v[i]));
    }
    write_bytes(path, out);
}

SaliencyMap read_saliency(const fsys::path& path) {
    const cv::Mat m = read_png(path);
    if (m.type() != CV_8UC1) throw FormatError(path.string(), "saliency must be 8-bit single-channel");
    SaliencyMap s(m.cols, m.rows);
    for (int y = 0; y < m.rows; ++y) {
        const auto* row = m.ptr<std::uint8_t>(y);
        for (int x = 0; x < m.cols; ++x) s.at(x, y) = row[x] / 255.0;
    }
    return s;
}

void write_saliency(const fsys::path& path, const SaliencyMap& s) {
    cv::Mat m(s.height, s.width, CV_8UC1);
    for (int y = 0; y < s.height; ++y) {
        auto* row = m.ptr<std::uint8_t>(y);
        for (int x = 0; x < s.width; ++x) {
            row[x] = static_cast<std::uint8_t>(std::lround(std::clamp(s.at(x, y), 0.0, 1.0) * 255.0));
        }
    }
    write_png(path, m);
}

FrameImage read_image(const fsys::path& path) {
    const cv::Mat m = read_png(path);
    if (m.type() != CV_8UC3) throw FormatError(path.string(), "image must be 8-bit 3-channel");
    FrameImage img(m.cols, m.rows);
    for (int y = 0; y < m.rows; ++y) {
        const auto* row = m.ptr<cv::Vec3b>(y);
        for (int x = 0; x < m.cols; ++x) img.at(x, y) = {row[x][2], row[x][1], row[x][0]};
    }
    return img;
}

void write_image(const fsys::path& path, const FrameImage& img) {
    cv::Mat m(img.height, img.width, CV_8UC3);
    for (int y = 0; y < img.height; ++y) {
        auto* row = m.ptr<cv::Vec3b>(y);
        for (int x = 0; x < img.width; ++x) {
            const auto& p = img.at(x, y);
            row[x] = cv::Vec3b(p[2], p[1], p[0]);
        }
    }
    write_png(path, m);
}

LabelMap read_label_map(const fsys::path& path) {
    const cv::Mat m = read_png(path);
    if (m.type() != CV_16UC1) throw FormatError(path.string(), "label map must be 16-bit single-channel");
    LabelMap labels(m.cols, m.rows);
    for (int y = 0; y < m.rows; ++y) {
        const auto* row = m.ptr<std::uint16_t>(y);
        for (int x = 0; x < m.cols; ++x) labels.ids[static_cast<std::size_t>(y) * m.cols + x] = row[x];
    }
    return labels;
}

void write_label_map(const fsys::path& path, const LabelMap& labels) {
    cv::Mat m(labels.height, labels.width, CV_16UC1);
    for (int y = 0; y < labels.height; ++y) {
        auto* row = m.ptr<std::uint16_t>(y);
        for (int x = 0; x < labels.width; ++x) {
            const Identity id = labels.ids[static_cast<std::size_t>(y) * labels.width + x];
            if (id > 0xFFFF) throw IoError(path, "identity " + std::to_string(id) + " does not fit in 16 bits");
            row[x] = static_cast<std::uint16_t>(id);
        }
    }
    write_png(path, m);
}

nlohmann::json read_json(const fsys::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path, "cannot open for reading");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string(), e.what());
    }
}

void write_text(const fsys::path& path, const std::string& text) {
    std::vector<unsigned char> bytes(text.begin(), text.end());
    write_bytes(path, bytes);
}

void write_json(const fsys::path& path, const nlohmann::json& doc) { write_text(path, doc.dump(2) + "\n"); }

DetectionSet parse_detections(const nlohmann::json& doc, const CategoryRegistry& registry, const std::string& where) {
    DetectionSet out;
    if (!doc.is_object() || !doc.contains("frames") || !doc["frames"].is_array()) {
        throw FormatError(where, "expected an object with a \"frames\" array");
    }
    std::set<int> seen;
    for (const auto& jf : doc["frames"]) {
        std::string loc = where;
        try {
            const int index = jf.at("index").get<int>();
            loc = where + " frame " + std::to_string(index);
            if (index < 0) throw FormatError(loc, "negative frame index");
            if (!seen.insert(index).second) throw FormatError(loc, "duplicate frame index");
            if (out.size() <= static_cast<std::size_t>(index)) out.resize(static_cast<std::size_t>(index) + 1);
            auto& list = out[static_cast<std::size_t>(index)];
            for (const auto& ji : jf.at("instances")) {
                InstanceProposal p;
                p.category = ji.at("category").get<int>();
                if (!registry.contains(p.category)) {
                    throw FormatError(loc, "unknown category id " + std::to_string(p.category));
                }
                p.cls_score = ji.at("score").get<double>();
                if (!(p.cls_score >= 0.0 && p.cls_score <= 1.0)) {
                    throw FormatError(loc, "score " + std::to_string(p.cls_score) + " outside [0,1]");
                }
                const auto& jr = ji.at("rle");
                RleMask rle{jr.at("w").get<int>(), jr.at("h").get<int>(), jr.at("runs").get<std::vector<std::uint32_t>>()};
                try {
                    p.region = rle_decode(rle);
                } catch (const FormatError& e) {
                    throw FormatError(loc, e.what());
                }
                list.push_back(std::move(p));
            }
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(loc, e.what());
        }
    }
    return out;
}

DetectionSet read_detections(const fsys::path& path, const CategoryRegistry& registry) {
    return parse_detections(read_json(path), registry, path.string());
}

nlohmann::json detections_to_json(const DetectionSet& frames) {
    nlohmann::json doc;
    doc["frames"] = nlohmann::json::array();
    for (std::size_t t = 0; t < frames.size(); ++t) {
        nlohmann::json jf;
        jf["index"] = t;
        jf["instances"] = nlohmann::json::array();
        for (const auto& p : frames[t]) {
            const auto rle = rle_encode(p.region);
            jf["instances"].push_back({{"category", p.category},
                                       {"score", p.cls_score},
                                       {"rle", {{"w", rle.width}, {"h", rle.height}, {"runs", rle.runs}}}});
        }
        doc["frames"].push_back(std::move(jf));
    }
    return doc;
}

void write_detections(const fsys::path& path, const DetectionSet& frames) {
    write_text(path, detections_to_json(frames).dump() + "\n");
}

std::vector<std::vector<Box>> read_proposal_boxes(const fsys::path& path) {
    const auto doc = read_json(path);
    std::vector<std::vector<Box>> out;
    std::string loc = path.string();
    try {
        for (const auto& jf : doc.at("frames")) {
            const int index = jf.at("index").get<int>();
            loc = path.string() + " frame " + std::to_string(index);
            if (index < 0) throw FormatError(loc, "negative frame index");
            if (out.size() <= static_cast<std::size_t>(index)) out.resize(static_cast<std::size_t>(index) + 1);
            for (const auto& jb : jf.at("boxes")) {
                const auto v = jb.get<std::vector<int>>();
                if (v.size() != 4) throw FormatError(loc, "box must be [x,y,w,h]");
                out[static_cast<std::size_t>(index)].push_back({v[0], v[1], v[2], v[3]});
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(loc, e.what());
    }
    return out;
}

void write_proposal_boxes(const fsys::path& path, const std::vector<std::vector<Box>>& frames) {
    nlohmann::json doc;
    doc["frames"] = nlohmann::json::array();
    for (std::size_t t = 0; t < frames.size(); ++t) {
        nlohmann::json boxes = nlohmann::json::array();
        for (const auto& b : frames[t]) boxes.push_back({b.x, b.y, b.w, b.h});
        doc["frames"].push_back({{"index", t}, {"boxes", boxes}});
    }
    write_json(path, doc);
}

namespace {

int contiguous_frames(const fsys::path& dir, const std::string& ext) {
    int n = 0;
    while (fsys::exists(dir / frame_file(n, ext))) ++n;
    return n;
}

}  // namespace

LabeledVideo read_ground_truth(const fsys::path& dir) {
    const auto sidecar = dir / "semantics.json";
    if (!fsys::exists(sidecar)) throw IoError(sidecar, "file not found");
    LabeledVideo video;
    const auto doc = read_json(sidecar);
    if (!doc.is_object()) throw FormatError(sidecar.string(), "expected an object {identity: category}");
    for (const auto& [key, value] : doc.items()) {
        Identity id = 0;
        try {
            const auto parsed = std::stoul(key);
            if (parsed == 0 || parsed > 0xFFFF) throw std::out_of_range(key);
            id = static_cast<Identity>(parsed);
        } catch (const std::exception&) {
            throw FormatError(sidecar.string(), "invalid identity key \"" + key + "\"");
        }
        if (!value.is_number_integer()) throw FormatError(sidecar.string(), "category of identity " + key + " is not an integer");
        video.categories[id] = value.get<CategoryId>();
    }

    const int n = contiguous_frames(dir, ".png");
    for (int t = 0; t < n; ++t) {
        const auto path = dir / frame_file(t, ".png");
        LabelMap labels = read_label_map(path);
        if (t == 0) {
            video.width = labels.width;
            video.height = labels.height;
        } else if (labels.width != video.width || labels.height != video.height) {
            throw FormatError(path.string(), "frame size differs from frame 0");
        }
        std::set<Identity> ids(labels.ids.begin(), labels.ids.end());
        for (Identity id : ids) {
            if (id != kBackground && !video.categories.count(id)) {
                throw FormatError(path.string(), "identity " + std::to_string(id) + " missing from semantics.json");
            }
        }
        video.frames.push_back(std::move(labels));
    }
    return video;
}

void write_labels(const fsys::path& dir, const LabeledVideo& video) {
    fsys::create_directories(dir);
    for (std::size_t t = 0; t < video.frames.size(); ++t) {
        write_label_map(dir / frame_file(static_cast<int>(t), ".png"), video.frames[t]);
    }
    nlohmann::json sidecar = nlohmann::json::object();
    for (const auto& [id, category] : video.categories) sidecar[std::to_string(id)] = category;
    write_json(dir / "semantics.json", sidecar);
}

nlohmann::json to_json(const RunReport& report) {
    nlohmann::json j;
    j["frames"] = report.final_fc.size();
    j["identities"] = report.identities;
    j["propagation"] = {{"iterations", report.propagation_iterations},
                        {"commits", report.propagation_commits},
                        {"mean_fc", report.mean_fc_history}};
    j["fc"] = {{"initial", report.initial_fc}, {"final", report.final_fc}};
    j["events"] = nlohmann::json::array();
    for (const auto& e : report.events) {
        j["events"].push_back({{"frame", e.frame}, {"identity", e.identity}, {"event", std::string(to_string(e.kind))}});
    }
    j["config"] = report.config;
    return j;
}

void write_results(const fsys::path& dir, const LabeledVideo& labels, const RunReport& report) {
    write_labels(dir, labels);
    write_json(dir / "report.json", to_json(report));
}

int VideoLayout::frame_count() const { return contiguous_frames(root / "images", ".png"); }

std::vector<FrameBundle> load_video(const fsys::path& dir, const CategoryRegistry& registry) {
    const VideoLayout layout{dir};
    std::vector<std::string> problems;
    if (!fsys::is_directory(dir)) throw ValidationError({dir.string() + ": not a directory"});
    const int n = layout.frame_count();
    if (n == 0) problems.push_back(layout.image(0).string() + ": no frames found");
    if (!fsys::exists(layout.detections())) problems.push_back(layout.detections().string() + ": missing");
    for (int t = 0; t < n; ++t) {
        if (!fsys::exists(layout.saliency(t))) problems.push_back(layout.saliency(t).string() + ": missing");
        if (t + 1 < n && !fsys::exists(layout.flow_fwd(t))) problems.push_back(layout.flow_fwd(t).string() + ": missing");
        if (t > 0 && !fsys::exists(layout.flow_bwd(t))) problems.push_back(layout.flow_bwd(t).string() + ": missing");
    }
    if (!problems.empty()) throw ValidationError(std::move(problems));

    auto detections = read_detections(layout.detections(), registry);
    if (detections.size() > static_cast<std::size_t>(n)) {
        problems.push_back(layout.detections().string() + ": frame " + std::to_string(detections.size() - 1) +
                           " beyond last image " + std::to_string(n - 1));
    }
    detections.resize(static_cast<std::size_t>(n));
    std::vector<std::vector<Box>> boxes;
    if (fsys::exists(layout.proposals())) boxes = read_proposal_boxes(layout.proposals());
    boxes.resize(std::max(boxes.size(), static_cast<std::size_t>(n)));

    std::vector<FrameBundle> frames(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) {
        auto& b = frames[static_cast<std::size_t>(t)];
        b.index = t;
        b.image = read_image(layout.image(t));
        b.saliency = read_saliency(layout.saliency(t));
        b.proposals = std::move(detections[static_cast<std::size_t>(t)]);
        if (t + 1 < n) b.flow_fwd = read_flo(layout.flow_fwd(t));
        if (t > 0) b.flow_bwd = read_flo(layout.flow_bwd(t));
        b.external_boxes = boxes[static_cast<std::size_t>(t)];
        const auto d = validate_bundle(b);
        problems.insert(problems.end(), d.messages.begin(), d.messages.end());
        if (t > 0 && (b.image.width != frames[0].image.width || b.image.height != frames[0].image.height)) {
            problems.push_back(layout.image(t).string() + ": frame size differs from frame 0");
        }
    }
    if (!problems.empty()) throw ValidationError(std::move(problems));
    return frames;
}

void write_video(const fsys::path& dir, const std::vector<FrameBundle>& frames) {
    const VideoLayout layout{dir};
    fsys::create_directories(dir);
    DetectionSet detections;
    std::vector<std::vector<Box>> boxes;
    bool any_boxes = false;
    for (const auto& b : frames) {
        write_image(layout.image(b.index), b.image);
        write_saliency(layout.saliency(b.index), b.saliency);
        if (b.flow_fwd) write_flo(layout.flow_fwd(b.index), *b.flow_fwd);
        if (b.flow_bwd) write_flo(layout.flow_bwd(b.index), *b.flow_bwd);
        detections.push_back(b.proposals);
        boxes.push_back(b.external_boxes);
        any_boxes = any_boxes || !b.external_boxes.empty();
    }
    write_detections(layout.detections(), detections);
    if (any_boxes) write_proposal_boxes(layout.proposals(), boxes);
}

}  // namespace siso
