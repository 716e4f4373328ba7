#include "siso/commands.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <sstream>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <spdlog/spdlog.h>

#include "siso/error.hpp"
#include "siso/io.hpp"
#include "siso/synth.hpp"

namespace siso {

namespace fsys = std::filesystem;

bool is_video_dir(const fsys::path& dir) { return fsys::is_directory(dir / "images"); }

namespace {

std::vector<fsys::path> subdirectories(const fsys::path& root) {
    std::vector<fsys::path> out;
    for (const auto& e : fsys::directory_iterator(root)) {
        if (e.is_directory()) out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

void fuse_one(const fsys::path& video, const RunConfig& config, const fsys::path& out) {
    spdlog::info("fusing {}", video.string());
    const auto bundles = load_video(video, CategoryRegistry::coco29());
    const auto result = run_pipeline(bundles, config);
    write_results(out, result.labels, result.report);
}

/// A label directory itself, or a video folder holding one under gt/.
std::optional<fsys::path> label_dir(const fsys::path& p) {
    if (fsys::exists(p / "semantics.json")) return p;
    if (fsys::exists(p / "gt" / "semantics.json")) return p / "gt";
    return std::nullopt;
}

}  // namespace

int cmd_fuse(const fsys::path& input, const RunConfig& config, const fsys::path& out) {
    if (!fsys::is_directory(input)) throw ValidationError({input.string() + ": not a directory"});
    if (is_video_dir(input)) {
        fuse_one(input, config, out);
        return 1;
    }
    std::vector<fsys::path> videos;
    for (const auto& d : subdirectories(input)) {
        if (is_video_dir(d)) videos.push_back(d);
    }
    if (videos.empty()) throw ValidationError({input.string() + ": no video folders (expected images/)"});
    // Validate every video before processing any of them.
    std::vector<std::string> problems;
    std::vector<std::vector<FrameBundle>> loaded;
    for (const auto& v : videos) {
        try {
            loaded.push_back(load_video(v, CategoryRegistry::coco29()));
        } catch (const ValidationError& e) {
            problems.insert(problems.end(), e.problems().begin(), e.problems().end());
        }
    }
    if (!problems.empty()) throw ValidationError(std::move(problems));
    for (std::size_t i = 0; i < videos.size(); ++i) {
        spdlog::info("fusing {}", videos[i].string());
        const auto result = run_pipeline(loaded[i], config);
        write_results(out / videos[i].filename(), result.labels, result.report);
    }
    return static_cast<int>(videos.size());
}

EvalReport cmd_eval(const fsys::path& pred, const fsys::path& gt, const std::optional<fsys::path>& out,
                    const EvalParams& params) {
    std::vector<VideoScore> scores;
    if (const auto g = label_dir(gt)) {
        const auto p = label_dir(pred);
        if (!p) throw IoError(pred / "semantics.json", "prediction labels not found");
        scores.push_back(evaluate_video(gt.filename().string(), read_ground_truth(*p), read_ground_truth(*g), params));
    } else {
        if (!fsys::is_directory(gt)) throw IoError(gt, "ground-truth directory not found");
        for (const auto& d : subdirectories(gt)) {
            const auto g2 = label_dir(d);
            if (!g2) continue;
            const auto name = d.filename();
            const auto p = label_dir(pred / name);
            if (!p) throw IoError(pred / name / "semantics.json", "prediction labels not found");
            scores.push_back(evaluate_video(name.string(), read_ground_truth(*p), read_ground_truth(*g2), params));
        }
        if (scores.empty()) throw IoError(gt, "no ground-truth label directories found");
    }
    auto report = aggregate(std::move(scores));
    if (out) {
        fsys::create_directories(*out);
        write_json(*out / "eval.json", to_json(report));
        write_text(*out / "eval.csv", to_csv(report));
    }
    return report;
}

void cmd_synth(const fsys::path& config, const fsys::path& out) {
    const auto c = synth_config_from_json(read_json(config));
    generate(c, out);
}

namespace {

cv::Vec3b identity_color(Identity id) {
    static constexpr std::array<std::array<std::uint8_t, 3>, 10> palette{{{230, 25, 75},
                                                                          {60, 180, 75},
                                                                          {255, 225, 25},
                                                                          {0, 130, 200},
                                                                          {245, 130, 48},
                                                                          {145, 30, 180},
                                                                          {70, 240, 240},
                                                                          {240, 50, 230},
                                                                          {210, 245, 60},
                                                                          {0, 128, 128}}};
    const auto& c = palette[(id - 1) % palette.size()];
    return {c[2], c[1], c[0]};
}

}  // namespace

int cmd_render(const fsys::path& results, const fsys::path& images, const fsys::path& out) {
    std::map<Identity, CategoryId> categories;
    if (fsys::exists(results / "semantics.json")) {
        const auto doc = read_json(results / "semantics.json");
        for (const auto& [key, value] : doc.items()) {
            categories[static_cast<Identity>(std::stoul(key))] = value.get<CategoryId>();
        }
    }
    const auto& registry = CategoryRegistry::coco29();
    fsys::create_directories(out);
    int n = 0;
    for (;; ++n) {
        const auto image_path = images / frame_file(n, ".png");
        if (!fsys::exists(image_path)) break;
        cv::Mat canvas = cv::imread(image_path.string(), cv::IMREAD_COLOR);
        if (canvas.empty()) throw IoError(image_path, "cannot decode image");
        const auto label_path = results / frame_file(n, ".png");
        if (fsys::exists(label_path)) {
            const LabelMap labels = read_label_map(label_path);
            if (labels.width != canvas.cols || labels.height != canvas.rows) {
                throw DimensionMismatch(labels.width, labels.height, canvas.cols, canvas.rows);
            }
            for (int y = 0; y < canvas.rows; ++y) {
                for (int x = 0; x < canvas.cols; ++x) {
                    const Identity id = labels.ids[static_cast<std::size_t>(y) * labels.width + x];
                    if (id == kBackground) continue;
                    auto& px = canvas.at<cv::Vec3b>(y, x);
                    const auto c = identity_color(id);
                    for (int k = 0; k < 3; ++k) px[k] = static_cast<std::uint8_t>((px[k] + c[k]) / 2);
                }
            }
            for (const auto& [id, mask] : labels.masks()) {
                const auto box = mask.bounding_box();
                const auto cat = categories.find(id);
                std::string text = "#" + std::to_string(id);
                if (cat != categories.end()) {
                    const auto name = registry.name(cat->second);
                    text += " " + (name ? std::string(*name) : std::to_string(cat->second));
                }
                const cv::Point org(box->x, std::max(box->y - 2, 10));
                cv::putText(canvas, text, org, cv::FONT_HERSHEY_PLAIN, 0.8, cv::Scalar(255, 255, 255), 1, cv::LINE_8);
            }
        }
        const auto target = out / frame_file(n, ".png");
        if (!cv::imwrite(target.string(), canvas)) throw IoError(target, "cannot write overlay");
    }
    if (n == 0) throw IoError(images / frame_file(0, ".png"), "no images found");
    return n;
}

namespace {

VideoStats stats_of(const std::string& name, const LabeledVideo& v) {
    std::set<Identity> ids;
    for (const auto& f : v.frames) {
        for (Identity id : f.ids) {
            if (id != kBackground) ids.insert(id);
        }
    }
    std::set<CategoryId> cats;
    for (Identity id : ids) cats.insert(v.categories.at(id));
    return {name, static_cast<int>(ids.size()), static_cast<int>(cats.size())};
}

}  // namespace

StatsReport cmd_stats(const fsys::path& gt) {
    StatsReport s;
    if (const auto d = label_dir(gt)) {
        s.videos.push_back(stats_of(gt.filename().string(), read_ground_truth(*d)));
    } else {
        if (!fsys::is_directory(gt)) throw IoError(gt, "ground-truth directory not found");
        for (const auto& sub : subdirectories(gt)) {
            if (const auto d2 = label_dir(sub)) s.videos.push_back(stats_of(sub.filename().string(), read_ground_truth(*d2)));
        }
        if (s.videos.empty()) throw IoError(gt, "no ground-truth label directories found");
    }
    for (const auto& v : s.videos) {
        ++s.instance_histogram[v.instances];
        ++s.category_histogram[v.categories];
    }
    return s;
}

std::string to_text(const StatsReport& s) {
    std::ostringstream os;
    os << "video,instances,categories\n";
    for (const auto& v : s.videos) os << v.video << ',' << v.instances << ',' << v.categories << '\n';
    os << "\ninstances per video:\n";
    for (const auto& [k, n] : s.instance_histogram) os << "  " << k << ": " << std::string(static_cast<std::size_t>(n), '#') << ' ' << n << '\n';
    os << "categories per video:\n";
    for (const auto& [k, n] : s.category_histogram) os << "  " << k << ": " << std::string(static_cast<std::size_t>(n), '#') << ' ' << n << '\n';
    return os.str();
}

}  // namespace siso
