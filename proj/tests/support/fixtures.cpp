#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include <unistd.h>

namespace fixtures {

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

int integer(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

bool coin(Rng& rng, double p) { return uniform(rng) < p; }

std::vector<double> random_probs(Rng& rng, int n_classes) {
    std::vector<double> w(static_cast<std::size_t>(n_classes));
    const int style = integer(rng, 0, 3);
    double total = 0.0;
    for (auto& v : w) {
        v = uniform(rng);
        if (style == 0) v = v * v * v * v;  // peaked
        total += v;
    }
    if (style == 3) {  // one-hot
        std::fill(w.begin(), w.end(), 0.0);
        w[static_cast<std::size_t>(integer(rng, 0, n_classes - 1))] = 1.0;
        return w;
    }
    if (total == 0.0) {
        w[0] = total = 1.0;
    }
    for (auto& v : w) v /= total;
    return w;
}

clipal::QueryPrediction track(std::int64_t id, std::vector<double> probs, clipal::BoundingBox box,
                              std::optional<std::vector<double>> emb) {
    return clipal::QueryPrediction(clipal::QueryKind::track, id, std::move(probs), box, std::move(emb));
}

clipal::QueryPrediction object(std::vector<double> probs, clipal::BoundingBox box) {
    return clipal::QueryPrediction(clipal::QueryKind::object, std::nullopt, std::move(probs), box);
}

std::vector<double> probs_with_entropy(double h) {
    auto ent = [](double p) {
        double out = 0.0;
        if (p > 0) out -= p * std::log(p);
        if (p < 1) out -= (1 - p) * std::log(1 - p);
        return out;
    };
    double lo = 0.0, hi = 0.5;  // entropy increases on [0, 0.5]
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (ent(mid) < h ? lo : hi) = mid;
    }
    const double p = 0.5 * (lo + hi);
    return {p, 1.0 - p};
}

namespace {

clipal::BoundingBox anchor_box(Rng& rng, int anchor, bool exact) {
    const double x = 30.0 * anchor;
    const double y = 10.0 * (anchor % 2);
    if (exact) return {x, y, x + 20, y + 20};
    const double dx = uniform(rng, -4, 4), dy = uniform(rng, -4, 4);
    const double w = uniform(rng, 14, 26), h = uniform(rng, 14, 26);
    return {x + dx, y + dy, x + dx + w, y + dy + h};
}

std::vector<clipal::QueryPrediction> random_frame(Rng& rng, int n_classes, const ClipShape& shape) {
    const int n = integer(rng, 0, shape.max_queries);
    std::vector<std::int64_t> ids{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::shuffle(ids.begin(), ids.end(), rng);
    std::vector<clipal::QueryPrediction> out;
    for (int i = 0; i < n; ++i) {
        const bool is_track = coin(rng, 0.6);
        const auto box = anchor_box(rng, integer(rng, 0, 4), coin(rng, shape.exact_box_rate));
        auto probs = random_probs(rng, n_classes);
        std::optional<std::vector<double>> emb;
        if (shape.embedding_dim > 0 && is_track) {
            emb.emplace();
            for (int d = 0; d < shape.embedding_dim; ++d) emb->push_back(uniform(rng, -1, 1));
        }
        if (is_track) {
            out.push_back(track(ids[static_cast<std::size_t>(i) % 5], std::move(probs), box, std::move(emb)));
        } else {
            out.push_back(object(std::move(probs), box));
        }
    }
    // Track ids must be unique within a frame; demote duplicates to object queries.
    std::set<std::int64_t> seen;
    for (auto& q : out) {
        if (q.is_track() && !seen.insert(*q.track_id()).second) q = object(q.class_probs(), q.box());
    }
    return out;
}

}  // namespace

clipal::ClipPredictions random_clip_predictions(Rng& rng, const clipal::Clip& c, const ClipShape& shape) {
    const int n_classes = integer(rng, 1, shape.max_classes);
    std::vector<clipal::FramePredictions> fwd;
    std::vector<clipal::FramePredictions> bwd;
    const bool with_backward = coin(rng, shape.backward_rate);
    for (int k = 0; k < c.length(); ++k) {
        const std::int64_t f = c.start() + static_cast<std::int64_t>(k) * c.interval();
        auto queries = random_frame(rng, n_classes, shape);
        if (with_backward) {
            // Backward pass: mostly the forward queries, perturbed and reordered.
            std::vector<clipal::QueryPrediction> back;
            for (const auto& q : queries) {
                if (coin(rng, 0.15)) continue;
                auto box = q.box();
                if (coin(rng, 0.5)) {
                    const double d = uniform(rng, -3, 3);
                    box = clipal::BoundingBox(box.x_min + d, box.y_min, box.x_max + d, box.y_max);
                }
                auto probs = coin(rng, 0.3) ? q.class_probs() : random_probs(rng, n_classes);
                back.emplace_back(q.kind(), q.track_id(), std::move(probs), box, q.embedding());
            }
            if (coin(rng, 0.3)) {
                back.push_back(object(random_probs(rng, n_classes), anchor_box(rng, integer(rng, 0, 4), false)));
            }
            std::shuffle(back.begin(), back.end(), rng);
            bwd.emplace_back(f, std::move(back));
        }
        fwd.emplace_back(f, std::move(queries));
    }
    if (!with_backward) return clipal::ClipPredictions(c, std::move(fwd));
    return clipal::ClipPredictions(c, std::move(fwd), std::move(bwd));
}

clipal::DatasetManifest random_manifest(Rng& rng, int max_videos, std::int64_t min_frames, std::int64_t max_frames) {
    std::vector<clipal::VideoEntry> videos;
    const int n = integer(rng, 1, max_videos);
    for (int v = 0; v < n; ++v) {
        videos.push_back({clipal::VideoId("v" + std::to_string(v)),
                          static_cast<std::int64_t>(integer(rng, static_cast<int>(min_frames),
                                                            static_cast<int>(max_frames)))});
    }
    return clipal::DatasetManifest(std::move(videos));
}

clipal::PredictionSet predictions_for_pool(Rng& rng, const clipal::ClipPool& pool, const ClipShape& shape) {
    clipal::PredictionSet out;
    for (const auto& c : pool.clips()) out.emplace(c, random_clip_predictions(rng, c, shape));
    return out;
}

std::set<clipal::Clip> random_labeled(Rng& rng, const std::vector<clipal::Clip>& pool, int attempts) {
    std::set<clipal::Clip> out;
    if (pool.empty()) return out;
    for (int i = 0; i < attempts; ++i) {
        const auto& c = pool[static_cast<std::size_t>(integer(rng, 0, static_cast<int>(pool.size()) - 1))];
        if (clipal::admissible(c, out)) out.insert(c);
    }
    return out;
}

clipal::Clip clip(const std::string& video, std::int64_t start, int length, int interval) {
    return clipal::Clip(clipal::VideoId(video), start, length, interval);
}

TempDir::TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("clipal_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

}  // namespace fixtures
