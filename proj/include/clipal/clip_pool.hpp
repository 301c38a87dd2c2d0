#pragma once
// Clip pool enumeration and the per-video frame-disjointness constraint.

#include <cstdint>
#include <set>
#include <span>
#include <vector>

#include "clipal/model.hpp"

namespace clipal {

struct VideoEntry {
    VideoId video;
    std::int64_t frame_count;

    bool operator==(const VideoEntry&) const = default;
};

class DatasetManifest {
public:
    explicit DatasetManifest(std::vector<VideoEntry> videos);

    const std::vector<VideoEntry>& videos() const noexcept { return videos_; }
    std::int64_t total_frames() const noexcept;
    // Throws ValidationError for unknown videos.
    std::int64_t frame_count(const VideoId& video) const;

    bool operator==(const DatasetManifest&) const = default;

private:
    std::vector<VideoEntry> videos_;
};

struct PoolParams {
    int length = 4;
    int interval = 5;
    int start_stride = 1;

    bool operator==(const PoolParams&) const = default;
};

class ClipPool {
public:
    // Validates ordering, uniqueness, and that every clip matches `params`.
    ClipPool(std::vector<Clip> clips, PoolParams params);

    const std::vector<Clip>& clips() const noexcept { return clips_; }
    const PoolParams& params() const noexcept { return params_; }
    std::size_t size() const noexcept { return clips_.size(); }

    bool operator==(const ClipPool&) const = default;

private:
    std::vector<Clip> clips_;
    PoolParams params_;
};

// Every clip whose start is a multiple of start_stride and whose last sampled
// frame still lies inside its video. Throws EmptyPool when no video admits a clip.
ClipPool build_pool(const DatasetManifest& manifest, int length, int interval, int start_stride = 1);

// K(c) = { t_c + k * delta | k = 0..T-1 }
std::vector<std::int64_t> frames_of(const Clip& clip);

// True iff both clips come from the same video and share a sampled frame.
// Note that interleaved clips (offset not a multiple of delta) never overlap.
bool overlaps(const Clip& a, const Clip& b);

bool admissible(const Clip& candidate, std::span<const Clip> annotated);
bool admissible(const Clip& candidate, const std::set<Clip>& annotated);

}  // namespace clipal
