#pragma once
// Raw clip uncertainty from multi-frame tracker predictions.
//
// Three components are computed per clip:
//   h_var  ID-linked entropy variation: mean over sampled-frame transitions
//          that share at least one track id of the largest entropy change
//          among id-matched track queries.
//   h_e    mean entropy: mean over frames with at least one valid query of
//          the largest class entropy among valid queries (all track queries
//          plus object queries whose confidence reaches tau_conf).
//   d_bi   bidirectional inconsistency: mean over frames with at least one
//          IoU-matched forward/backward pair of the largest confidence gap
//          among matched pairs.
// Each component is 0 when the set it averages over is empty.

#include <span>
#include <vector>

#include "clipal/model.hpp"

namespace clipal {

struct UncertaintyConfig {
    double tau_conf = 0.5;
    double tau_iou = 0.5;
    // Throw MissingBackward instead of scoring d_bi = 0 when a clip has no backward pass.
    bool strict_bidir = false;
    // Apply the tau_conf filter to track queries as well as object queries.
    bool filter_track_queries = false;

    void validate() const;
};

struct MatchedPair {
    std::size_t index_a;
    std::size_t index_b;
    double iou;

    bool operator==(const MatchedPair&) const = default;
};

using MatchedPairSet = std::vector<MatchedPair>;

// -sum p_i ln p_i with 0 ln 0 = 0. Throws MalformedProbabilities.
double entropy(std::span<const double> p);

double iou(const BoundingBox& a, const BoundingBox& b);

// Pairs of track queries (index into frame_u, index into frame_u1) sharing a
// track id, ordered by index_a. Object queries never match. The iou field is
// informational here.
MatchedPairSet id_matched_pairs(const FramePredictions& frame_u, const FramePredictions& frame_u1);

// Repeatedly takes the unmatched pair with the highest IoU >= tau_iou.
// Ties prefer the lower index_a, then the lower index_b. Result is in pick order.
MatchedPairSet greedy_iou_match(std::span<const BoundingBox> a, std::span<const BoundingBox> b,
                                double tau_iou);

double entropy_variation(const ClipPredictions& preds);
double mean_entropy(const ClipPredictions& preds, const UncertaintyConfig& cfg);
double bidirectional_inconsistency(const ClipPredictions& preds, const UncertaintyConfig& cfg);

RawComponents score_clip_raw(const ClipPredictions& preds, const UncertaintyConfig& cfg);

}  // namespace clipal
