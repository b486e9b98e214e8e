#include "scrawl/ink.hpp"

#include <algorithm>
#include <cmath>

namespace scrawl::ink {

int InkSequence::stroke_count() const {
    int count = 0;
    int prev = -1;
    for (const auto& p : points) {
        if (p.stroke_id != prev) {
            ++count;
            prev = p.stroke_id;
        }
    }
    return count;
}

std::array<double, 3> one_hot(PenState s) {
    std::array<double, 3> v{0.0, 0.0, 0.0};
    v[static_cast<std::size_t>(s)] = 1.0;
    return v;
}

BoundingBox bounding_box(const InkSequence& seq) {
    if (seq.empty()) throw EmptyInkError("bounding_box: empty sequence");
    BoundingBox box{seq.points[0].x, seq.points[0].y, seq.points[0].x, seq.points[0].y};
    for (const auto& p : seq.points) {
        box.min_x = std::min(box.min_x, p.x);
        box.min_y = std::min(box.min_y, p.y);
        box.max_x = std::max(box.max_x, p.x);
        box.max_y = std::max(box.max_y, p.y);
    }
    return box;
}

namespace {

double distance(const RawPoint& a, const RawPoint& b) {
    return std::hypot(b.x - a.x, b.y - a.y);
}

// Cosine between (a -> b) and (b -> c); 0 when either segment vanishes so
// a zero-length leg never triggers the collinearity condition on its own.
double turn_cosine(const RawPoint& a, const RawPoint& b, const RawPoint& c) {
    const double ux = b.x - a.x, uy = b.y - a.y;
    const double vx = c.x - b.x, vy = c.y - b.y;
    const double nu = std::hypot(ux, uy), nv = std::hypot(vx, vy);
    if (nu == 0.0 || nv == 0.0) return 0.0;
    return (ux * vx + uy * vy) / (nu * nv);
}

} // namespace

InkSequence remove_redundant_points(const InkSequence& seq, const PreprocessConfig& cfg) {
    if (seq.empty()) throw EmptyInkError("remove_redundant_points: empty sequence");
    if (!(cfg.dist_factor > 0.0)) throw InvalidConfigError("dist_factor must be positive");
    const BoundingBox box = bounding_box(seq);
    const double t_dist = cfg.dist_factor * std::max(box.width(), box.height());

    InkSequence out;
    out.label = seq.label;
    out.points.reserve(seq.points.size());

    const auto& pts = seq.points;
    std::size_t i = 0;
    while (i < pts.size()) {
        std::size_t end = i;
        while (end + 1 < pts.size() && pts[end + 1].stroke_id == pts[i].stroke_id) ++end;
        // stroke spans [i, end]
        out.points.push_back(pts[i]);
        const RawPoint* kept = &out.points.back();
        for (std::size_t j = i + 1; j < end; ++j) {
            const bool too_close = distance(*kept, pts[j]) < t_dist;
            const bool collinear = turn_cosine(*kept, pts[j], pts[j + 1]) > cfg.cos_threshold;
            if (too_close || collinear) continue;
            out.points.push_back(pts[j]);
            kept = &out.points.back();
        }
        if (end > i) out.points.push_back(pts[end]);
        i = end + 1;
    }
    return out;
}

std::pair<InkSequence, NormalizationStats> normalize_coordinates(const InkSequence& seq) {
    if (seq.empty()) throw EmptyInkError("normalize_coordinates: empty sequence");

    // Length-weighted line integrals over all within-stroke segments.
    double total_len = 0.0, px = 0.0, py = 0.0;
    const auto& pts = seq.points;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (pts[i].stroke_id != pts[i + 1].stroke_id) continue;
        const double len = distance(pts[i], pts[i + 1]);
        total_len += len;
        px += 0.5 * len * (pts[i].x + pts[i + 1].x);
        py += 0.5 * len * (pts[i].y + pts[i + 1].y);
    }
    if (total_len == 0.0) throw EmptyInkError("normalize_coordinates: no segments of nonzero length");

    NormalizationStats stats;
    stats.mu_x = px / total_len;
    stats.mu_y = py / total_len;

    double dx_sum = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (pts[i].stroke_id != pts[i + 1].stroke_id) continue;
        const double len = distance(pts[i], pts[i + 1]);
        const double a = pts[i].x - stats.mu_x;
        const double b = pts[i + 1].x - stats.mu_x;
        dx_sum += len / 3.0 * (b * b + a * a + a * b);
    }
    stats.delta_x = std::sqrt(dx_sum / total_len);
    if (!(stats.delta_x > kDegenerateDeltaX))
        throw DegenerateInkError("normalize_coordinates: x-deviation below " +
                                 std::to_string(kDegenerateDeltaX));

    InkSequence out;
    out.label = seq.label;
    out.points.reserve(pts.size());
    for (const auto& p : pts)
        out.points.push_back({(p.x - stats.mu_x) / stats.delta_x,
                              (p.y - stats.mu_y) / stats.delta_x, p.stroke_id});
    return {std::move(out), stats};
}

InkSequence preprocess(const InkSequence& seq, const PreprocessConfig& cfg) {
    return normalize_coordinates(remove_redundant_points(seq, cfg)).first;
}

std::vector<LineFeature> to_line_features(const InkSequence& seq) {
    if (seq.size() < 2) throw EmptyInkError("to_line_features: need at least 2 points");
    std::vector<LineFeature> feats;
    feats.reserve(seq.size() - 1);
    const auto& pts = seq.points;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const bool same_stroke = pts[i].stroke_id == pts[i + 1].stroke_id;
        feats.push_back({pts[i].x, pts[i].y,
                         pts[i + 1].x - pts[i].x, pts[i + 1].y - pts[i].y,
                         same_stroke ? 1.0 : 0.0, same_stroke ? 0.0 : 1.0});
    }
    return feats;
}

std::vector<GenToken> to_gen_tokens(const InkSequence& seq) {
    if (seq.size() < 2) throw EmptyInkError("to_gen_tokens: need at least 2 points");
    std::vector<GenToken> tokens;
    tokens.reserve(seq.size());
    const auto& pts = seq.points;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const bool same_stroke = pts[i].stroke_id == pts[i + 1].stroke_id;
        tokens.push_back({pts[i + 1].x - pts[i].x, pts[i + 1].y - pts[i].y,
                          same_stroke ? PenState::Down : PenState::Up});
    }
    tokens.push_back({0.0, 0.0, PenState::End});
    return tokens;
}

InkSequence tokens_to_ink(const std::vector<GenToken>& tokens, double start_x, double start_y) {
    InkSequence out;
    double x = start_x, y = start_y;
    int stroke = 0;
    out.points.push_back({x, y, stroke});
    for (const auto& tok : tokens) {
        if (tok.pen == PenState::End) break;
        x += tok.dx;
        y += tok.dy;
        if (tok.pen == PenState::Up) ++stroke;
        out.points.push_back({x, y, stroke});
    }
    return out;
}

} // namespace scrawl::ink
