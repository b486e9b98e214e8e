#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "scrawl/error.hpp"
#include "scrawl/rng.hpp"

namespace scrawl::ink {

struct RawPoint {
    double x = 0.0;
    double y = 0.0;
    int stroke_id = 0;
};

// A pen trajectory: ordered points whose stroke ids are non-decreasing.
// Each maximal run of one stroke id is a pen-down stroke.
struct InkSequence {
    std::vector<RawPoint> points;
    std::optional<int> label;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    int stroke_count() const;
};

// Thresholds for redundant-point removal. The distance threshold is
// dist_factor * max{H, W} of the raw bounding box.
struct PreprocessConfig {
    double dist_factor = 0.01;
    double cos_threshold = 0.99;
};

inline PreprocessConfig recognition_preset() { return {0.01, 0.99}; }
inline PreprocessConfig generation_preset() { return {0.05, 0.9}; }

struct NormalizationStats {
    double mu_x = 0.0;
    double mu_y = 0.0;
    double delta_x = 1.0;
};

// Characters whose x-deviation falls below this cannot be normalized.
inline constexpr double kDegenerateDeltaX = 1e-6;

// [x, y, dx, dy, pen_down, pen_up] per within-sequence segment.
using LineFeature = std::array<double, 6>;

enum class PenState : std::uint8_t { Down = 0, Up = 1, End = 2 };

struct GenToken {
    double dx = 0.0;
    double dy = 0.0;
    PenState pen = PenState::Down;
};

std::array<double, 3> one_hot(PenState s);

struct BoundingBox {
    double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;
    double width() const { return max_x - min_x; }
    double height() const { return max_y - min_y; }
};

BoundingBox bounding_box(const InkSequence& seq);

// Single forward scan. An interior point of a stroke is dropped when it is
// closer than the distance threshold to the most recently kept point, or
// when the kept-to-here and here-to-next segments are nearly collinear
// (cosine above the threshold). Stroke endpoints always survive.
InkSequence remove_redundant_points(const InkSequence& seq, const PreprocessConfig& cfg);

// Length-weighted first and second moments over all within-stroke segments,
// then (x - mu_x)/delta_x, (y - mu_y)/delta_x. Both axes share delta_x so
// the aspect ratio is preserved.
std::pair<InkSequence, NormalizationStats> normalize_coordinates(const InkSequence& seq);

InkSequence preprocess(const InkSequence& seq, const PreprocessConfig& cfg);

std::vector<LineFeature> to_line_features(const InkSequence& seq);

// Direction tokens for generation; the list always ends with a single
// end-of-char token whose direction is (0, 0).
std::vector<GenToken> to_gen_tokens(const InkSequence& seq);

// Inverse of to_gen_tokens up to the starting position: prefix-sum the
// directions from (start_x, start_y), opening a new stroke after each
// pen-up token.
InkSequence tokens_to_ink(const std::vector<GenToken>& tokens,
                          double start_x = 0.0, double start_y = 0.0);

// Drop each element independently with probability p, preserving order.
// A draw that would empty the list is redone (at most 100 times, then one
// uniformly random element is kept).
template <class T>
std::vector<T> sequential_dropout(const std::vector<T>& items, double p, Rng& rng) {
    if (!(p >= 0.0 && p < 1.0)) throw InvalidConfigError("dropout probability must lie in [0, 1)");
    if (items.empty()) return {};
    for (int attempt = 0; attempt < 100; ++attempt) {
        std::vector<T> kept;
        kept.reserve(items.size());
        for (const T& item : items)
            if (uniform(rng, 0.0, 1.0) >= p) kept.push_back(item);
        if (!kept.empty()) return kept;
    }
    return {items[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(items.size()) - 1))]};
}

} // namespace scrawl::ink
