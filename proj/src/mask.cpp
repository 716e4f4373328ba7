#include "siso/mask.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "siso/error.hpp"

namespace siso {

Mask::Mask(int width, int height) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) {
        throw Error("mask dimensions must be positive, got " + std::to_string(width) + "x" +
                    std::to_string(height));
    }
    bits_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
}

Mask Mask::full(int width, int height) {
    Mask m(width, height);
    std::fill(m.bits_.begin(), m.bits_.end(), 1);
    return m;
}

Mask Mask::from_box(int width, int height, const Box& box) {
    Mask m(width, height);
    const int x0 = std::max(box.x, 0);
    const int y0 = std::max(box.y, 0);
    const int x1 = std::min(box.x + box.w, width);
    const int y1 = std::min(box.y + box.h, height);
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) m.set(x, y);
    }
    return m;
}

std::size_t Mask::count() const noexcept {
    std::size_t n = 0;
    for (auto b : bits_) n += b;
    return n;
}

bool Mask::empty() const noexcept {
    return std::none_of(bits_.begin(), bits_.end(), [](std::uint8_t b) { return b != 0; });
}

std::optional<Box> Mask::bounding_box() const {
    int x0 = width_, y0 = height_, x1 = -1, y1 = -1;
    for (int y = 0; y < height_; ++y) {
        for (int x = 0; x < width_; ++x) {
            if (!get(x, y)) continue;
            x0 = std::min(x0, x);
            y0 = std::min(y0, y);
            x1 = std::max(x1, x);
            y1 = std::max(y1, y);
        }
    }
    if (x1 < 0) return std::nullopt;
    return Box{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

Mask& Mask::operator&=(const Mask& other) {
    require_same_shape(*this, other);
    for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] &= other.bits_[i];
    return *this;
}

Mask& Mask::operator|=(const Mask& other) {
    require_same_shape(*this, other);
    for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] |= other.bits_[i];
    return *this;
}

Mask& Mask::operator-=(const Mask& other) {
    require_same_shape(*this, other);
    for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] &= static_cast<std::uint8_t>(!other.bits_[i]);
    return *this;
}

RleMask rle_encode(const Mask& m) {
    RleMask r{m.width(), m.height(), {}};
    std::uint8_t current = 0;
    std::uint32_t run = 0;
    for (auto b : m.bits()) {
        if (b != current) {
            r.runs.push_back(run);
            run = 0;
            current = b;
        }
        ++run;
    }
    r.runs.push_back(run);
    return r;
}

Mask rle_decode(const RleMask& r) {
    if (r.width <= 0 || r.height <= 0) {
        throw FormatError("rle", "non-positive dimensions " + std::to_string(r.width) + "x" +
                                     std::to_string(r.height));
    }
    const std::uint64_t expected = static_cast<std::uint64_t>(r.width) * static_cast<std::uint64_t>(r.height);
    const std::uint64_t total = std::accumulate(r.runs.begin(), r.runs.end(), std::uint64_t{0});
    if (total != expected) {
        throw FormatError("rle", "run lengths sum to " + std::to_string(total) + ", expected " +
                                     std::to_string(expected));
    }
    Mask m(r.width, r.height);
    std::size_t pos = 0;
    bool on = false;
    for (auto run : r.runs) {
        if (on) {
            for (std::size_t i = 0; i < run; ++i) m.set_at(pos + i);
        }
        pos += run;
        on = !on;
    }
    return m;
}

void require_same_shape(const Mask& a, const Mask& b) {
    if (!a.same_shape(b)) throw DimensionMismatch(a.width(), a.height(), b.width(), b.height());
}

std::size_t intersection_count(const Mask& a, const Mask& b) {
    require_same_shape(a, b);
    const auto& x = a.bits();
    const auto& y = b.bits();
    std::size_t n = 0;
    for (std::size_t i = 0; i < x.size(); ++i) n += x[i] & y[i];
    return n;
}

std::size_t union_count(const Mask& a, const Mask& b) {
    require_same_shape(a, b);
    const auto& x = a.bits();
    const auto& y = b.bits();
    std::size_t n = 0;
    for (std::size_t i = 0; i < x.size(); ++i) n += x[i] | y[i];
    return n;
}

double iou(const Mask& a, const Mask& b) {
    const auto inter = intersection_count(a, b);
    const auto uni = union_count(a, b);
    if (uni == 0) return 0.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double region_similarity_j(const Mask& pred, const Mask& gt) {
    const auto inter = intersection_count(pred, gt);
    const auto uni = union_count(pred, gt);
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

Mask boundary(const Mask& m) {
    Mask out(m.width(), m.height());
    const int w = m.width();
    const int h = m.height();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!m.get(x, y)) continue;
            const bool edge = x == 0 || y == 0 || x == w - 1 || y == h - 1 || !m.get(x - 1, y) ||
                              !m.get(x + 1, y) || !m.get(x, y - 1) || !m.get(x, y + 1);
            if (edge) out.set(x, y);
        }
    }
    return out;
}

int default_contour_radius(int width, int height) {
    const double diag = std::hypot(static_cast<double>(width), static_cast<double>(height));
    return static_cast<int>(std::ceil(0.008 * diag));
}

namespace {

// Number of set pixels in `from` that lie within `radius` of a set pixel in `to`.
std::size_t matched_within(const Mask& from, const Mask& to, int radius) {
    const int w = from.width();
    const int h = from.height();
    const long r2 = static_cast<long>(radius) * radius;
    std::size_t hits = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!from.get(x, y)) continue;
            bool found = false;
            for (int dy = -radius; dy <= radius && !found; ++dy) {
                const int yy = y + dy;
                if (yy < 0 || yy >= h) continue;
                for (int dx = -radius; dx <= radius; ++dx) {
                    const int xx = x + dx;
                    if (xx < 0 || xx >= w) continue;
                    if (static_cast<long>(dx) * dx + static_cast<long>(dy) * dy > r2) continue;
                    if (to.get(xx, yy)) {
                        found = true;
                        break;
                    }
                }
            }
            if (found) ++hits;
        }
    }
    return hits;
}

}  // namespace

ContourMatch contour_match(const Mask& pred, const Mask& gt, int radius) {
    require_same_shape(pred, gt);
    if (radius < 0) throw Error("contour radius must be non-negative");
    const bool pred_empty = pred.empty();
    const bool gt_empty = gt.empty();
    if (pred_empty && gt_empty) return {1.0, 1.0, 1.0};
    if (pred_empty || gt_empty) return {0.0, 0.0, 0.0};

    const Mask bp = boundary(pred);
    const Mask bg = boundary(gt);
    const auto np = bp.count();
    const auto ng = bg.count();
    ContourMatch out;
    out.precision = static_cast<double>(matched_within(bp, bg, radius)) / static_cast<double>(np);
    out.recall = static_cast<double>(matched_within(bg, bp, radius)) / static_cast<double>(ng);
    const double denom = out.precision + out.recall;
    out.f = denom == 0.0 ? 0.0 : 2.0 * out.precision * out.recall / denom;
    return out;
}

int connected_components(const Mask& m) {
    const int w = m.width();
    const int h = m.height();
    std::vector<std::uint8_t> seen(m.size(), 0);
    std::vector<std::size_t> stack;
    int components = 0;
    for (std::size_t start = 0; start < m.size(); ++start) {
        if (!m.at(start) || seen[start]) continue;
        ++components;
        seen[start] = 1;
        stack.push_back(start);
        while (!stack.empty()) {
            const auto i = stack.back();
            stack.pop_back();
            const int x = static_cast<int>(i % static_cast<std::size_t>(w));
            const int y = static_cast<int>(i / static_cast<std::size_t>(w));
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int xx = x + dx;
                    const int yy = y + dy;
                    if (xx < 0 || yy < 0 || xx >= w || yy >= h) continue;
                    const auto j = static_cast<std::size_t>(yy) * static_cast<std::size_t>(w) +
                                   static_cast<std::size_t>(xx);
                    if (m.at(j) && !seen[j]) {
                        seen[j] = 1;
                        stack.push_back(j);
                    }
                }
            }
        }
    }
    return components;
}

}  // namespace siso
