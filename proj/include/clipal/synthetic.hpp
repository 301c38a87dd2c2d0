#pragma once
// Synthetic tracker outputs with planted uncertainty hotspots.
//
// Inside a hotspot of intensity I, class distributions flatten and fluctuate
// between frames, track ids churn, and forward/backward confidences disagree,
// all scaled by I. Outside hotspots predictions stay near one-hot and stable,
// perturbed only by noise_level.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "clipal/clip_pool.hpp"
#include "clipal/strategies.hpp"

namespace clipal {

struct Hotspot {
    VideoId video;
    std::int64_t first_frame;  // inclusive
    std::int64_t last_frame;   // inclusive
    double intensity;          // in [0,1]
};

// True iff some sampled frame of the clip falls inside the hotspot.
bool intersects(const Clip& clip, const Hotspot& hotspot);

struct SyntheticConfig {
    int n_videos = 4;
    std::int64_t frames_per_video = 200;
    int n_classes = 5;
    int tracks_per_frame = 3;
    std::vector<Hotspot> hotspots;
    double noise_level = 0.02;
    std::uint64_t rng_seed = 0;
    int embedding_dim = 8;
    PoolParams pool{4, 5, 1};

    // Throws ConfigError.
    void validate() const;
};

// "vid000", "vid001", ... zero padded so lexicographic order matches index order.
VideoId synthetic_video_id(int index, int n_videos);

// Intensity at a frame: the largest intensity among hotspots covering it.
double hotspot_intensity(const std::vector<Hotspot>& hotspots, const VideoId& video, std::int64_t frame);

struct SyntheticDataset {
    DatasetManifest manifest;
    ClipPool pool;
    PredictionSet predictions;
};

// Deterministic in cfg; every clip of the pool receives forward and backward predictions.
SyntheticDataset generate_synthetic(const SyntheticConfig& cfg);

// Predictions for a single clip, identical to what generate_synthetic produces for it.
ClipPredictions synthesize_clip(const SyntheticConfig& cfg, const Clip& clip, int video_index);

}  // namespace clipal
