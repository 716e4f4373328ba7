#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace siso {

/// Axis-aligned pixel box; `x`,`y` is the top-left corner, extents are exclusive.
struct Box {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    bool empty() const noexcept { return w <= 0 || h <= 0; }
    friend bool operator==(const Box&, const Box&) = default;
};

/// Binary pixel region on a fixed-size frame grid, stored row-major with one
/// byte of occupancy (0 or 1) per pixel.
class Mask {
public:
    Mask() = default;
    Mask(int width, int height);

    static Mask full(int width, int height);
    static Mask from_box(int width, int height, const Box& box);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return bits_.size(); }

    bool get(int x, int y) const { return bits_[index(x, y)] != 0; }
    void set(int x, int y, bool on = true) { bits_[index(x, y)] = on ? 1 : 0; }
    bool at(std::size_t i) const { return bits_[i] != 0; }
    void set_at(std::size_t i, bool on = true) { bits_[i] = on ? 1 : 0; }
    bool contains(int x, int y) const noexcept {
        return x >= 0 && y >= 0 && x < width_ && y < height_;
    }

    const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }

    std::size_t count() const noexcept;
    bool empty() const noexcept;
    bool same_shape(const Mask& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_;
    }

    /// Tight bounding box of the set pixels, or nullopt for an empty mask.
    std::optional<Box> bounding_box() const;

    Mask& operator&=(const Mask& other);
    Mask& operator|=(const Mask& other);
    /// Set difference: clears every pixel set in `other`.
    Mask& operator-=(const Mask& other);

    friend Mask operator&(Mask a, const Mask& b) { return a &= b; }
    friend Mask operator|(Mask a, const Mask& b) { return a |= b; }
    friend Mask operator-(Mask a, const Mask& b) { return a -= b; }
    friend bool operator==(const Mask&, const Mask&) = default;

private:
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
};

/// Run-length form: alternating runs of 0s then 1s in row-major order. The
/// first run counts zeros and may have length 0.
struct RleMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint32_t> runs;

    friend bool operator==(const RleMask&, const RleMask&) = default;
};

RleMask rle_encode(const Mask& m);
/// Throws FormatError when the runs do not sum to width*height.
Mask rle_decode(const RleMask& r);

/// Throws DimensionMismatch unless both masks share a grid.
void require_same_shape(const Mask& a, const Mask& b);

std::size_t intersection_count(const Mask& a, const Mask& b);
std::size_t union_count(const Mask& a, const Mask& b);

/// |a∩b| / |a∪b|, and 0 when both masks are empty.
double iou(const Mask& a, const Mask& b);

/// Region similarity J. Same as iou() except that two empty masks score 1.
double region_similarity_j(const Mask& pred, const Mask& gt);

/// Pixels of `m` with at least one 4-neighbour that is unset or off-frame.
Mask boundary(const Mask& m);

/// ceil(0.008 * frame diagonal), the DAVIS boundary tolerance.
int default_contour_radius(int width, int height);

struct ContourMatch {
    double precision = 0.0;
    double recall = 0.0;
    double f = 0.0;
};

/// Boundary precision/recall with an exact Euclidean tolerance of `radius`
/// pixels. Both-empty scores F = 1, one-empty scores F = 0.
ContourMatch contour_match(const Mask& pred, const Mask& gt, int radius);

inline double contour_accuracy_f(const Mask& pred, const Mask& gt, int radius) {
    return contour_match(pred, gt, radius).f;
}

/// Number of 8-connected components.
int connected_components(const Mask& m);

}  // namespace siso
