#include "clipal/uncertainty.hpp"

#include <algorithm>
#include <cmath>

#include "clipal/errors.hpp"

namespace clipal {

void UncertaintyConfig::validate() const {
    if (!(tau_conf >= 0.0 && tau_conf <= 1.0)) throw ConfigError("tau_conf must lie in [0,1]");
    if (!(tau_iou >= 0.0 && tau_iou <= 1.0)) throw ConfigError("tau_iou must lie in [0,1]");
}

double entropy(std::span<const double> p) {
    validate_probability_vector(p);
    double h = 0.0;
    for (double v : p) {
        if (v > 0.0) h -= v * std::log(v);
    }
    return std::max(0.0, h);
}

double iou(const BoundingBox& a, const BoundingBox& b) {
    const double w = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
    const double h = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
    const double inter = (w > 0.0 && h > 0.0) ? w * h : 0.0;
    const double uni = a.area() + b.area() - inter;
    if (!(uni > 0.0)) return 0.0;
    return std::clamp(inter / uni, 0.0, 1.0);
}

MatchedPairSet id_matched_pairs(const FramePredictions& frame_u, const FramePredictions& frame_u1) {
    MatchedPairSet pairs;
    const auto& qa = frame_u.queries();
    const auto& qb = frame_u1.queries();
    for (std::size_t i = 0; i < qa.size(); ++i) {
        if (!qa[i].is_track()) continue;
        for (std::size_t j = 0; j < qb.size(); ++j) {
            if (qb[j].is_track() && *qb[j].track_id() == *qa[i].track_id()) {
                pairs.push_back({i, j, iou(qa[i].box(), qb[j].box())});
                break;  // track ids are unique within a frame
            }
        }
    }
    return pairs;
}

MatchedPairSet greedy_iou_match(std::span<const BoundingBox> a, std::span<const BoundingBox> b,
                                double tau_iou) {
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    std::vector<double> grid(n * m);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) grid[i * m + j] = iou(a[i], b[j]);
    }
    std::vector<bool> used_a(n, false);
    std::vector<bool> used_b(m, false);
    MatchedPairSet pairs;
    while (true) {
        bool found = false;
        std::size_t best_i = 0;
        std::size_t best_j = 0;
        double best = 0.0;
        // Row-major scan with strict '>' keeps the lowest (index_a, index_b) on ties.
        for (std::size_t i = 0; i < n; ++i) {
            if (used_a[i]) continue;
            for (std::size_t j = 0; j < m; ++j) {
                if (used_b[j]) continue;
                const double v = grid[i * m + j];
                if (v >= tau_iou && (!found || v > best)) {
                    found = true;
                    best = v;
                    best_i = i;
                    best_j = j;
                }
            }
        }
        if (!found) break;
        used_a[best_i] = true;
        used_b[best_j] = true;
        pairs.push_back({best_i, best_j, best});
    }
    return pairs;
}

namespace {

std::vector<double> entropies(const FramePredictions& frame) {
    std::vector<double> out;
    out.reserve(frame.queries().size());
    for (const auto& q : frame.queries()) out.push_back(entropy(q.class_probs()));
    return out;
}

}  // namespace

double entropy_variation(const ClipPredictions& preds) {
    const auto& frames = preds.forward();
    double total = 0.0;
    std::size_t valid = 0;
    std::vector<double> h_prev = frames.empty() ? std::vector<double>{} : entropies(frames[0]);
    for (std::size_t u = 0; u + 1 < frames.size(); ++u) {
        std::vector<double> h_next = entropies(frames[u + 1]);
        const auto pairs = id_matched_pairs(frames[u], frames[u + 1]);
        if (!pairs.empty()) {
            double best = 0.0;
            for (const auto& pair : pairs) {
                best = std::max(best, std::abs(h_next[pair.index_b] - h_prev[pair.index_a]));
            }
            total += best;
            ++valid;
        }
        h_prev = std::move(h_next);
    }
    return valid == 0 ? 0.0 : total / static_cast<double>(valid);
}

double mean_entropy(const ClipPredictions& preds, const UncertaintyConfig& cfg) {
    double total = 0.0;
    std::size_t valid = 0;
    for (const auto& frame : preds.forward()) {
        bool any = false;
        double best = 0.0;
        for (const auto& q : frame.queries()) {
            const bool filtered = !q.is_track() || cfg.filter_track_queries;
            if (filtered && q.confidence() < cfg.tau_conf) continue;
            best = std::max(best, entropy(q.class_probs()));
            any = true;
        }
        if (any) {
            total += best;
            ++valid;
        }
    }
    return valid == 0 ? 0.0 : total / static_cast<double>(valid);
}

double bidirectional_inconsistency(const ClipPredictions& preds, const UncertaintyConfig& cfg) {
    if (!preds.backward()) {
        if (cfg.strict_bidir) {
            throw MissingBackward("clip " + to_string(preds.clip()) + " has no backward predictions");
        }
        return 0.0;
    }
    const auto& fwd = preds.forward();
    const auto& bwd = *preds.backward();
    double total = 0.0;
    std::size_t valid = 0;
    std::vector<BoundingBox> boxes_f;
    std::vector<BoundingBox> boxes_b;
    for (std::size_t u = 0; u < fwd.size(); ++u) {
        boxes_f.clear();
        boxes_b.clear();
        for (const auto& q : fwd[u].queries()) boxes_f.push_back(q.box());
        for (const auto& q : bwd[u].queries()) boxes_b.push_back(q.box());
        const auto matches = greedy_iou_match(boxes_f, boxes_b, cfg.tau_iou);
        if (matches.empty()) continue;
        double best = 0.0;
        for (const auto& match : matches) {
            const double s_f = fwd[u].queries()[match.index_a].confidence();
            const double s_b = bwd[u].queries()[match.index_b].confidence();
            best = std::max(best, std::abs(s_f - s_b));
        }
        total += best;
        ++valid;
    }
    return valid == 0 ? 0.0 : total / static_cast<double>(valid);
}

RawComponents score_clip_raw(const ClipPredictions& preds, const UncertaintyConfig& cfg) {
    cfg.validate();
    return RawComponents{entropy_variation(preds), mean_entropy(preds, cfg),
                         bidirectional_inconsistency(preds, cfg)};
}

}  // namespace clipal
