#include "clipal/clip_pool.hpp"

#include <algorithm>

#include "clipal/errors.hpp"

namespace clipal {

DatasetManifest::DatasetManifest(std::vector<VideoEntry> videos) : videos_(std::move(videos)) {
    std::set<VideoId> seen;
    for (const auto& entry : videos_) {
        if (entry.frame_count < 1) {
            throw InvariantViolation("video " + entry.video.str() + " must have >= 1 frame");
        }
        if (!seen.insert(entry.video).second) {
            throw InvariantViolation("duplicate video id " + entry.video.str() + " in manifest");
        }
    }
}

std::int64_t DatasetManifest::total_frames() const noexcept {
    std::int64_t total = 0;
    for (const auto& entry : videos_) total += entry.frame_count;
    return total;
}

std::int64_t DatasetManifest::frame_count(const VideoId& video) const {
    for (const auto& entry : videos_) {
        if (entry.video == video) return entry.frame_count;
    }
    throw ValidationError("video " + video.str() + " is not in the manifest");
}

ClipPool::ClipPool(std::vector<Clip> clips, PoolParams params)
    : clips_(std::move(clips)), params_(params) {
    if (params_.length < 2 || params_.interval < 1 || params_.start_stride < 1) {
        throw InvariantViolation("pool params require T >= 2, delta >= 1, stride >= 1");
    }
    for (const auto& clip : clips_) {
        if (clip.length() != params_.length || clip.interval() != params_.interval) {
            throw InvariantViolation("clip " + to_string(clip) + " does not match pool params");
        }
        if (clip.start() % params_.start_stride != 0) {
            throw InvariantViolation("clip " + to_string(clip) + " is off the start stride");
        }
    }
    for (std::size_t i = 1; i < clips_.size(); ++i) {
        if (!(clips_[i - 1] < clips_[i])) {
            throw InvariantViolation("pool clips must be sorted by (video, start) and unique");
        }
    }
}

ClipPool build_pool(const DatasetManifest& manifest, int length, int interval, int start_stride) {
    if (length < 2) throw ConfigError("T must be >= 2");
    if (interval < 1) throw ConfigError("delta must be >= 1");
    if (start_stride < 1) throw ConfigError("stride must be >= 1");

    const std::int64_t span = static_cast<std::int64_t>(length - 1) * interval;
    std::vector<Clip> clips;
    for (const auto& entry : manifest.videos()) {
        for (std::int64_t start = 0; start + span <= entry.frame_count - 1; start += start_stride) {
            clips.emplace_back(entry.video, start, length, interval);
        }
    }
    if (clips.empty()) throw EmptyPool("no video is long enough for a clip of the requested span");
    std::sort(clips.begin(), clips.end());
    return ClipPool(std::move(clips), PoolParams{length, interval, start_stride});
}

std::vector<std::int64_t> frames_of(const Clip& clip) {
    std::vector<std::int64_t> frames(static_cast<std::size_t>(clip.length()));
    for (int k = 0; k < clip.length(); ++k) {
        frames[static_cast<std::size_t>(k)] = clip.start() + static_cast<std::int64_t>(k) * clip.interval();
    }
    return frames;
}

bool overlaps(const Clip& a, const Clip& b) {
    if (a.video() != b.video()) return false;
    if (a.last_frame() < b.start() || b.last_frame() < a.start()) return false;
    // A frame f of `a` is in K(b) iff f >= t_b, (f - t_b) % delta_b == 0 and f <= last(b).
    for (int k = 0; k < a.length(); ++k) {
        const std::int64_t f = a.start() + static_cast<std::int64_t>(k) * a.interval();
        const std::int64_t offset = f - b.start();
        if (offset >= 0 && offset <= b.span() && offset % b.interval() == 0) return true;
    }
    return false;
}

bool admissible(const Clip& candidate, std::span<const Clip> annotated) {
    return std::none_of(annotated.begin(), annotated.end(),
                        [&](const Clip& other) { return overlaps(candidate, other); });
}

bool admissible(const Clip& candidate, const std::set<Clip>& annotated) {
    // The set is ordered by video first, so only one contiguous run is relevant.
    auto it = annotated.lower_bound(Clip(candidate.video(), 0, 2, 1));
    for (; it != annotated.end() && it->video() == candidate.video(); ++it) {
        if (it->start() > candidate.last_frame()) break;
        if (overlaps(candidate, *it)) return false;
    }
    return true;
}

}  // namespace clipal
