#pragma once
// Random instance generators and small builders shared by the test binaries.

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "clipal/clip_pool.hpp"
#include "clipal/model.hpp"
#include "clipal/strategies.hpp"

namespace fixtures {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo = 0.0, double hi = 1.0);
int integer(Rng& rng, int lo, int hi);  // inclusive
bool coin(Rng& rng, double p = 0.5);

std::vector<double> random_probs(Rng& rng, int n_classes);

clipal::QueryPrediction track(std::int64_t id, std::vector<double> probs, clipal::BoundingBox box = {0, 0, 10, 10},
                              std::optional<std::vector<double>> emb = std::nullopt);
clipal::QueryPrediction object(std::vector<double> probs, clipal::BoundingBox box = {0, 0, 10, 10});

// Two-class distribution with entropy h (0 <= h <= ln 2), solved by bisection.
std::vector<double> probs_with_entropy(double h);

struct ClipShape {
    int max_queries = 8;
    int max_classes = 5;
    double backward_rate = 0.8;
    int embedding_dim = 0;  // 0: no embeddings
    double exact_box_rate = 0.25;  // share of boxes placed exactly on an anchor (IoU ties)
};

// Random predictions on K(clip): a handful of anchor boxes so IoU matches and
// exact ties both happen, track ids from a small range so ids recur.
clipal::ClipPredictions random_clip_predictions(Rng& rng, const clipal::Clip& clip, const ClipShape& shape = {});

clipal::DatasetManifest random_manifest(Rng& rng, int max_videos, std::int64_t min_frames, std::int64_t max_frames);

// Predictions for every clip in the pool.
clipal::PredictionSet predictions_for_pool(Rng& rng, const clipal::ClipPool& pool, const ClipShape& shape = {});

// A random set of pairwise frame-disjoint clips drawn from the pool.
std::set<clipal::Clip> random_labeled(Rng& rng, const std::vector<clipal::Clip>& pool, int attempts);

clipal::Clip clip(const std::string& video, std::int64_t start, int length = 4, int interval = 5);

// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace fixtures
