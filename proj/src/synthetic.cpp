#include "clipal/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "clipal/errors.hpp"
#include "clipal/rng.hpp"

namespace clipal {

bool intersects(const Clip& clip, const Hotspot& hotspot) {
    if (clip.video() != hotspot.video) return false;
    if (clip.last_frame() < hotspot.first_frame || clip.start() > hotspot.last_frame) return false;
    // First sampled frame at or after the hotspot start.
    std::int64_t k = 0;
    if (hotspot.first_frame > clip.start()) {
        k = (hotspot.first_frame - clip.start() + clip.interval() - 1) / clip.interval();
    }
    const std::int64_t f = clip.start() + k * clip.interval();
    return k < clip.length() && f <= hotspot.last_frame;
}

VideoId synthetic_video_id(int index, int n_videos) {
    const int width = std::max<int>(3, static_cast<int>(std::to_string(std::max(0, n_videos - 1)).size()));
    std::string digits = std::to_string(index);
    return VideoId("vid" + std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(digits.size()))), '0') +
                   digits);
}

void SyntheticConfig::validate() const {
    if (n_videos < 1) throw ConfigError("n_videos must be >= 1");
    if (frames_per_video < 1) throw ConfigError("frames_per_video must be >= 1");
    if (n_classes < 2) throw ConfigError("n_classes must be >= 2");
    if (tracks_per_frame < 0) throw ConfigError("tracks_per_frame must be >= 0");
    if (!(noise_level >= 0.0 && noise_level <= 1.0)) throw ConfigError("noise_level must lie in [0,1]");
    if (embedding_dim < 1) throw ConfigError("embedding_dim must be >= 1");
    if (pool.length < 2 || pool.interval < 1 || pool.start_stride < 1) {
        throw ConfigError("pool params require T >= 2, delta >= 1, stride >= 1");
    }
    for (const auto& h : hotspots) {
        bool known = false;
        for (int v = 0; v < n_videos && !known; ++v) known = synthetic_video_id(v, n_videos) == h.video;
        if (!known) throw ConfigError("hotspot refers to unknown video " + h.video.str());
        if (h.first_frame < 0 || h.last_frame < h.first_frame || h.last_frame >= frames_per_video) {
            throw ConfigError("hotspot range [" + std::to_string(h.first_frame) + ", " +
                              std::to_string(h.last_frame) + "] outside video bounds");
        }
        if (!(h.intensity >= 0.0 && h.intensity <= 1.0)) throw ConfigError("hotspot intensity must lie in [0,1]");
    }
}

double hotspot_intensity(const std::vector<Hotspot>& hotspots, const VideoId& video, std::int64_t frame) {
    double out = 0.0;
    for (const auto& h : hotspots) {
        if (h.video == video && frame >= h.first_frame && frame <= h.last_frame) out = std::max(out, h.intensity);
    }
    return out;
}

namespace {

constexpr double kBoxSize = 100.0;
constexpr double kTrackSpacing = 160.0;

// A near one-hot distribution on `true_class` flattened by `drop` in [0,1];
// drop = 1 gives the true class mass 1/K.
std::vector<double> make_probs(int n_classes, int true_class, double drop, CounterRng& rng) {
    drop = std::clamp(drop, 0.0, 1.0);
    const double k = static_cast<double>(n_classes);
    const double p_true = 1.0 - drop * (k - 1.0) / k;
    std::vector<double> weights(static_cast<std::size_t>(n_classes), 0.0);
    double total = 0.0;
    for (int c = 0; c < n_classes; ++c) {
        if (c == true_class) continue;
        weights[static_cast<std::size_t>(c)] = 0.5 + rng.uniform();
        total += weights[static_cast<std::size_t>(c)];
    }
    std::vector<double> probs(static_cast<std::size_t>(n_classes));
    for (int c = 0; c < n_classes; ++c) {
        probs[static_cast<std::size_t>(c)] =
            c == true_class ? p_true : (1.0 - p_true) * weights[static_cast<std::size_t>(c)] / total;
    }
    return probs;
}

double flattening(double intensity, double noise, CounterRng& rng) {
    const double base = noise * rng.uniform();
    const double spike = intensity * (0.2 + 0.8 * rng.uniform());
    return base + spike;
}

BoundingBox jittered(double x, double y, double jitter, CounterRng& rng) {
    const double dx = jitter * (rng.uniform() - 0.5);
    const double dy = jitter * (rng.uniform() - 0.5);
    return BoundingBox(x + dx, y + dy, x + dx + kBoxSize, y + dy + kBoxSize);
}

}  // namespace

ClipPredictions synthesize_clip(const SyntheticConfig& cfg, const Clip& clip, int video_index) {
    const auto stream = (static_cast<std::uint64_t>(video_index) << 40) ^ static_cast<std::uint64_t>(clip.start());
    CounterRng rng(cfg.rng_seed, stream);

    // Per-video embedding phases, shared by every clip of the video.
    CounterRng phase_rng(cfg.rng_seed, 0xE3B0C442ULL + static_cast<std::uint64_t>(video_index));
    std::vector<double> phase(static_cast<std::size_t>(cfg.embedding_dim));
    for (double& p : phase) p = 2.0 * std::numbers::pi * phase_rng.uniform();

    const int tracks = cfg.tracks_per_frame;
    std::vector<std::int64_t> ids(static_cast<std::size_t>(tracks));
    for (int j = 0; j < tracks; ++j) ids[static_cast<std::size_t>(j)] = j + 1;

    std::vector<FramePredictions> forward;
    std::vector<FramePredictions> backward;
    const double jitter = 2.0 + 20.0 * cfg.noise_level;
    for (int k = 0; k < clip.length(); ++k) {
        const std::int64_t frame = clip.start() + static_cast<std::int64_t>(k) * clip.interval();
        const double intensity = hotspot_intensity(cfg.hotspots, clip.video(), frame);
        const double drift = 0.3 * static_cast<double>(frame);
        const double y = 100.0 + 10.0 * std::sin(static_cast<double>(frame) / 20.0);

        std::vector<QueryPrediction> fwd;
        std::vector<QueryPrediction> bwd;
        for (int j = 0; j < tracks; ++j) {
            const double churn = rng.uniform();
            if (k > 0 && churn < 0.5 * intensity) {
                ids[static_cast<std::size_t>(j)] = 1000 + static_cast<std::int64_t>(k) * (tracks + 1) + j;
            }
            const int true_class = j % cfg.n_classes;
            const double x = 20.0 + kTrackSpacing * j + drift;

            std::vector<double> emb(static_cast<std::size_t>(cfg.embedding_dim));
            for (int d = 0; d < cfg.embedding_dim; ++d) {
                const double t = static_cast<double>(frame) / static_cast<double>(cfg.frames_per_video);
                emb[static_cast<std::size_t>(d)] =
                    std::cos(2.0 * std::numbers::pi * (d + 1) * t + phase[static_cast<std::size_t>(d)]) +
                    0.05 * (rng.uniform() - 0.5);
            }
            auto probs_f = make_probs(cfg.n_classes, true_class, flattening(intensity, cfg.noise_level, rng), rng);
            auto probs_b = make_probs(cfg.n_classes, true_class, flattening(intensity, cfg.noise_level, rng), rng);
            const BoundingBox box_f = jittered(x, y, jitter, rng);
            const BoundingBox box_b = jittered(x, y, jitter, rng);
            fwd.emplace_back(QueryKind::track, ids[static_cast<std::size_t>(j)], std::move(probs_f), box_f, emb);
            bwd.emplace_back(QueryKind::track, ids[static_cast<std::size_t>(j)], std::move(probs_b), box_b,
                             std::move(emb));
        }
        // One newborn-object query per frame, placed clear of the tracks.
        {
            const int true_class = tracks % cfg.n_classes;
            const double x = 20.0 + kTrackSpacing * tracks + drift;
            auto probs_f = make_probs(cfg.n_classes, true_class, flattening(intensity, cfg.noise_level, rng), rng);
            auto probs_b = make_probs(cfg.n_classes, true_class, flattening(intensity, cfg.noise_level, rng), rng);
            const BoundingBox box_f = jittered(x, y, jitter, rng);
            const BoundingBox box_b = jittered(x, y, jitter, rng);
            fwd.emplace_back(QueryKind::object, std::nullopt, std::move(probs_f), box_f);
            bwd.emplace_back(QueryKind::object, std::nullopt, std::move(probs_b), box_b);
        }
        forward.emplace_back(frame, std::move(fwd));
        backward.emplace_back(frame, std::move(bwd));
    }
    return ClipPredictions(clip, std::move(forward), std::move(backward));
}

SyntheticDataset generate_synthetic(const SyntheticConfig& cfg) {
    cfg.validate();
    std::vector<VideoEntry> videos;
    for (int v = 0; v < cfg.n_videos; ++v) {
        videos.push_back(VideoEntry{synthetic_video_id(v, cfg.n_videos), cfg.frames_per_video});
    }
    DatasetManifest manifest(std::move(videos));
    ClipPool pool = build_pool(manifest, cfg.pool.length, cfg.pool.interval, cfg.pool.start_stride);

    PredictionSet predictions;
    int video_index = 0;
    for (std::size_t i = 0; i < pool.clips().size(); ++i) {
        const Clip& clip = pool.clips()[i];
        while (manifest.videos()[static_cast<std::size_t>(video_index)].video != clip.video()) ++video_index;
        predictions.emplace_hint(predictions.end(), clip, synthesize_clip(cfg, clip, video_index));
    }
    return SyntheticDataset{std::move(manifest), std::move(pool), std::move(predictions)};
}

}  // namespace clipal
