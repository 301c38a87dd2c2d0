#pragma once
// Batch construction by k-center greedy, either on the per-video timeline
// (temporal gaps between clips) or in an embedding space.

#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "clipal/model.hpp"

namespace clipal {

// Distance of a clip from a video that holds no annotated clip. Compares
// greater than every finite gap.
inline constexpr std::int64_t kInfiniteDistance = std::numeric_limits<std::int64_t>::max();

// max(0, |t_a - t_b| - (T-1) delta). Throws DifferentVideo, and
// ValidationError when the clips disagree on (T, delta).
std::int64_t temporal_gap(const Clip& a, const Clip& b);

// Minimum temporal_gap to same-video annotated clips, kInfiniteDistance if none.
std::int64_t nearest_distance(const Clip& c, const std::vector<Clip>& annotated);

struct GreedySelection {
    std::vector<Clip> clips;  // in pick order
    // Set when fewer than b clips could be picked because every remaining
    // candidate overlapped the annotated set (NoAdmissibleCandidate).
    std::vector<std::string> warnings;
};

// Picks up to b candidates one at a time, each maximizing nearest_distance
// against labeled plus the picks so far. Candidates that share a frame with
// labeled or picked clips are skipped. Distance ties prefer the higher
// aggregate, then the lower (video, start); so with nothing annotated in any
// candidate video the first pick is the most uncertain candidate.
GreedySelection k_center_greedy_temporal(const std::vector<ClipScore>& candidates,
                                         const std::set<Clip>& labeled, int b);

struct EmbeddedClip {
    Clip clip;
    std::vector<double> embedding;
};

// Same greedy scheme with Euclidean distance between embeddings. With no
// labeled clips the first pick is the lowest (video, start) candidate.
// Distance ties prefer the lower (video, start). Throws DimensionMismatch.
GreedySelection k_center_greedy_features(const std::vector<EmbeddedClip>& candidates,
                                         const std::vector<EmbeddedClip>& labeled, int b);

// Mean of all forward track-query embeddings across the clip.
// Throws MissingEmbeddings if no track query carries one.
std::vector<double> mean_clip_embedding(const ClipPredictions& preds);

}  // namespace clipal
