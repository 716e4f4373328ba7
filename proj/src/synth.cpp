#include "siso/synth.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include <opencv2/imgproc.hpp>
#include <spdlog/spdlog.h>

#include "siso/error.hpp"
#include "siso/io.hpp"

namespace siso {

bool SynthObject::visible_at(int frame) const {
    return std::none_of(hidden.begin(), hidden.end(),
                        [frame](const auto& r) { return frame >= r.first && frame <= r.second; });
}

bool SynthObject::covers(int frame, int px, int py) const {
    const int ox = x + vx * frame;
    const int oy = y + vy * frame;
    if (shape == SynthShape::rectangle) return px >= ox && py >= oy && px < ox + width && py < oy + height;
    const long dx = px - ox;
    const long dy = py - oy;
    return dx * dx + dy * dy <= static_cast<long>(radius) * radius;
}

void SynthConfig::validate() const {
    if (width <= 0 || height <= 0) throw ConfigError("synth: frame size must be positive");
    if (frames < 1) throw ConfigError("synth: need at least one frame");
    if (noise.morph_radius < 0) throw ConfigError("synth: morph_radius must be non-negative");
    if (noise.score_jitter < 0.0) throw ConfigError("synth: score_jitter must be non-negative");
    if (!(noise.drop_prob >= 0.0 && noise.drop_prob <= 1.0)) throw ConfigError("synth: drop_prob must lie in [0,1]");
    for (std::size_t k = 0; k < objects.size(); ++k) {
        const auto& o = objects[k];
        const std::string name = "synth: object " + std::to_string(k);
        if (o.shape == SynthShape::rectangle) {
            if (o.width <= 0 || o.height <= 0) throw ConfigError(name + " has non-positive size");
            if (o.width > width || o.height > height) throw ConfigError(name + " is larger than the frame");
        } else {
            if (o.radius < 0) throw ConfigError(name + " has negative radius");
            if (2 * o.radius + 1 > width || 2 * o.radius + 1 > height) throw ConfigError(name + " is larger than the frame");
        }
        if (!(o.score >= 0.0 && o.score <= 1.0)) throw ConfigError(name + " score outside [0,1]");
    }
}

namespace {

using Owners = std::vector<int>;  // object index per pixel, -1 for background

Owners owners_at(const SynthConfig& c, int t) {
    Owners owner(static_cast<std::size_t>(c.width) * c.height, -1);
    std::vector<std::size_t> order(c.objects.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return c.objects[a].z < c.objects[b].z; });
    for (auto k : order) {
        const auto& o = c.objects[k];
        if (!o.visible_at(t)) continue;
        for (int y = 0; y < c.height; ++y) {
            for (int x = 0; x < c.width; ++x) {
                if (o.covers(t, x, y)) owner[static_cast<std::size_t>(y) * c.width + x] = static_cast<int>(k);
            }
        }
    }
    return owner;
}

FlowField flow_between(const SynthConfig& c, const Owners& from, const Owners& to, int sign) {
    FlowField f(c.width, c.height);
    for (int y = 0; y < c.height; ++y) {
        for (int x = 0; x < c.width; ++x) {
            const auto i = f.index(x, y);
            const int o = from[i];
            const int dx = o >= 0 ? sign * c.objects[static_cast<std::size_t>(o)].vx : 0;
            const int dy = o >= 0 ? sign * c.objects[static_cast<std::size_t>(o)].vy : 0;
            const int qx = x + dx;
            const int qy = y + dy;
            const bool inside = qx >= 0 && qy >= 0 && qx < c.width && qy < c.height;
            if (inside && to[static_cast<std::size_t>(qy) * c.width + qx] != o) {
                f.u[i] = kUnknownFlow;
                f.v[i] = kUnknownFlow;
            } else {
                f.u[i] = static_cast<float>(dx);
                f.v[i] = static_cast<float>(dy);
            }
        }
    }
    return f;
}

Mask morph(const Mask& m, int radius, bool dilate) {
    cv::Mat src(m.height(), m.width(), CV_8UC1, const_cast<std::uint8_t*>(m.bits().data()));
    cv::Mat dst;
    const cv::Mat kernel = cv::getStructuringElement(cv::MORPH_RECT, cv::Size(2 * radius + 1, 2 * radius + 1));
    if (dilate) {
        cv::dilate(src, dst, kernel);
    } else {
        cv::erode(src, dst, kernel);
    }
    Mask out(m.width(), m.height());
    for (int y = 0; y < dst.rows; ++y) {
        const auto* row = dst.ptr<std::uint8_t>(y);
        for (int x = 0; x < dst.cols; ++x) {
            if (row[x] != 0) out.set(x, y);
        }
    }
    return out;
}

}  // namespace

SynthVideo render_synthetic(const SynthConfig& c) {
    c.validate();
    SynthVideo out;
    out.gt.width = c.width;
    out.gt.height = c.height;
    for (std::size_t k = 0; k < c.objects.size(); ++k) {
        if (c.objects[k].salient) out.gt.categories[static_cast<Identity>(k + 1)] = c.objects[k].category;
    }

    std::vector<Owners> owners;
    owners.reserve(static_cast<std::size_t>(c.frames));
    for (int t = 0; t < c.frames; ++t) owners.push_back(owners_at(c, t));

    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const auto npix = static_cast<std::size_t>(c.width) * c.height;
    for (int t = 0; t < c.frames; ++t) {
        const auto& own = owners[static_cast<std::size_t>(t)];
        FrameBundle b;
        b.index = t;
        b.image = FrameImage(c.width, c.height, c.background);
        b.saliency = SaliencyMap(c.width, c.height, 0.0);
        LabelMap gt(c.width, c.height);
        std::vector<Mask> visible(c.objects.size(), Mask(c.width, c.height));
        std::size_t salient_pixels = 0;
        for (std::size_t i = 0; i < npix; ++i) {
            const int o = own[i];
            if (o < 0) continue;
            const auto& obj = c.objects[static_cast<std::size_t>(o)];
            b.image.rgb[i] = obj.color;
            visible[static_cast<std::size_t>(o)].set_at(i);
            if (obj.salient) {
                b.saliency.values[i] = 1.0;
                gt.ids[i] = static_cast<Identity>(o + 1);
                ++salient_pixels;
            }
        }
        out.max_salient_fraction =
            std::max(out.max_salient_fraction, static_cast<double>(salient_pixels) / static_cast<double>(npix));

        for (std::size_t k = 0; k < c.objects.size(); ++k) {
            const double u_drop = uniform(rng);
            const double u_morph = uniform(rng);
            const double jitter = gauss(rng);
            if (visible[k].empty() || u_drop < c.noise.drop_prob) continue;
            Mask region = visible[k];
            if (c.noise.morph_radius > 0) region = morph(region, c.noise.morph_radius, u_morph >= 0.5);
            if (region.empty()) continue;
            const double score = std::clamp(c.objects[k].score + c.noise.score_jitter * jitter, 0.0, 1.0);
            b.proposals.push_back({std::move(region), c.objects[k].category, score, 0});
        }

        if (t + 1 < c.frames) b.flow_fwd = flow_between(c, own, owners[static_cast<std::size_t>(t + 1)], 1);
        if (t > 0) b.flow_bwd = flow_between(c, own, owners[static_cast<std::size_t>(t - 1)], -1);
        out.bundles.push_back(std::move(b));
        out.gt.frames.push_back(std::move(gt));
    }
    if (out.max_salient_fraction >= 0.5) {
        spdlog::warn("synthetic salient objects cover {:.0f}% of a frame; mean+std binarisation will not recover them",
                     100.0 * out.max_salient_fraction);
    }
    return out;
}

SynthVideo generate(const SynthConfig& c, const std::filesystem::path& out_dir) {
    SynthVideo video = render_synthetic(c);
    write_video(out_dir, video.bundles);
    write_labels(VideoLayout{out_dir}.gt(), video.gt);
    return video;
}

namespace {

std::array<std::uint8_t, 3> color_from_json(const nlohmann::json& j) {
    const auto v = j.get<std::vector<int>>();
    if (v.size() != 3) throw ConfigError("synth: colour must be [r,g,b]");
    std::array<std::uint8_t, 3> out{};
    for (std::size_t i = 0; i < 3; ++i) {
        if (v[i] < 0 || v[i] > 255) throw ConfigError("synth: colour component outside [0,255]");
        out[i] = static_cast<std::uint8_t>(v[i]);
    }
    return out;
}

}  // namespace

SynthConfig synth_config_from_json(const nlohmann::json& j) {
    SynthConfig c;
    try {
        c.width = j.value("width", c.width);
        c.height = j.value("height", c.height);
        c.frames = j.value("frames", c.frames);
        c.seed = j.value("seed", c.seed);
        if (j.contains("background")) c.background = color_from_json(j["background"]);
        if (j.contains("noise")) {
            const auto& n = j["noise"];
            c.noise.morph_radius = n.value("morph_radius", 0);
            c.noise.score_jitter = n.value("score_jitter", 0.0);
            c.noise.drop_prob = n.value("drop_prob", 0.0);
        }
        for (const auto& jo : j.value("objects", nlohmann::json::array())) {
            SynthObject o;
            const auto shape = jo.value("shape", std::string("rectangle"));
            if (shape == "rectangle") {
                o.shape = SynthShape::rectangle;
            } else if (shape == "disk") {
                o.shape = SynthShape::disk;
            } else {
                throw ConfigError("synth: unknown shape \"" + shape + "\"");
            }
            o.x = jo.at("x").get<int>();
            o.y = jo.at("y").get<int>();
            o.width = jo.value("width", o.width);
            o.height = jo.value("height", o.height);
            o.radius = jo.value("radius", o.radius);
            if (jo.contains("color")) o.color = color_from_json(jo["color"]);
            o.category = jo.value("category", o.category);
            o.vx = jo.value("vx", 0);
            o.vy = jo.value("vy", 0);
            o.z = jo.value("z", 0);
            o.salient = jo.value("salient", true);
            o.score = jo.value("score", o.score);
            for (const auto& r : jo.value("hidden", nlohmann::json::array())) {
                const auto v = r.get<std::vector<int>>();
                if (v.size() != 2) throw ConfigError("synth: hidden range must be [first,last]");
                o.hidden.emplace_back(v[0], v[1]);
            }
            c.objects.push_back(std::move(o));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("synth config: ") + e.what());
    }
    c.validate();
    return c;
}

nlohmann::json to_json(const SynthConfig& c) {
    nlohmann::json j;
    j["width"] = c.width;
    j["height"] = c.height;
    j["frames"] = c.frames;
    j["seed"] = c.seed;
    j["background"] = c.background;
    j["noise"] = {{"morph_radius", c.noise.morph_radius},
                  {"score_jitter", c.noise.score_jitter},
                  {"drop_prob", c.noise.drop_prob}};
    j["objects"] = nlohmann::json::array();
    for (const auto& o : c.objects) {
        nlohmann::json jo{{"shape", o.shape == SynthShape::rectangle ? "rectangle" : "disk"},
                          {"x", o.x},
                          {"y", o.y},
                          {"color", o.color},
                          {"category", o.category},
                          {"vx", o.vx},
                          {"vy", o.vy},
                          {"z", o.z},
                          {"salient", o.salient},
                          {"score", o.score}};
        if (o.shape == SynthShape::rectangle) {
            jo["width"] = o.width;
            jo["height"] = o.height;
        } else {
            jo["radius"] = o.radius;
        }
        nlohmann::json hidden = nlohmann::json::array();
        for (const auto& [a, b] : o.hidden) hidden.push_back({a, b});
        jo["hidden"] = hidden;
        j["objects"].push_back(std::move(jo));
    }
    return j;
}

SynthConfig random_scene(std::uint64_t seed, const SceneOptions& opt) {
    static constexpr std::array<std::array<std::uint8_t, 3>, 8> palette{{{230, 25, 75},
                                                                         {60, 180, 75},
                                                                         {255, 225, 25},
                                                                         {0, 130, 200},
                                                                         {245, 130, 48},
                                                                         {145, 30, 180},
                                                                         {70, 240, 240},
                                                                         {240, 50, 230}}};
    std::mt19937_64 rng(seed);
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

    SynthConfig c;
    c.width = opt.width;
    c.height = opt.height;
    c.frames = opt.frames;
    c.noise = opt.noise;
    c.seed = seed;

    const auto& cats = CategoryRegistry::coco29().entries();
    std::vector<int> z(static_cast<std::size_t>(opt.objects));
    std::iota(z.begin(), z.end(), 0);
    std::shuffle(z.begin(), z.end(), rng);
    for (int k = 0; k < opt.objects; ++k) {
        SynthObject o;
        o.shape = pick(0, 1) == 0 ? SynthShape::rectangle : SynthShape::disk;
        if (o.shape == SynthShape::rectangle) {
            o.width = pick(opt.min_size, opt.max_size);
            o.height = pick(opt.min_size, opt.max_size);
            o.x = pick(0, opt.width - o.width);
            o.y = pick(0, opt.height - o.height);
        } else {
            o.radius = pick(opt.min_size / 2, opt.max_size / 2);
            o.x = pick(o.radius, opt.width - 1 - o.radius);
            o.y = pick(o.radius, opt.height - 1 - o.radius);
        }
        o.color = palette[static_cast<std::size_t>(k) % palette.size()];
        o.category = cats[static_cast<std::size_t>(pick(0, static_cast<int>(cats.size()) - 1))].id;
        o.vx = pick(-opt.max_speed, opt.max_speed);
        o.vy = pick(-opt.max_speed, opt.max_speed);
        o.z = z[static_cast<std::size_t>(k)];
        c.objects.push_back(std::move(o));
    }
    return c;
}

}  // namespace siso
