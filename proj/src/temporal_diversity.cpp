#include "clipal/temporal_diversity.hpp"

#include <algorithm>
#include <map>

#include "clipal/clip_pool.hpp"
#include "clipal/errors.hpp"

namespace clipal {

std::int64_t temporal_gap(const Clip& a, const Clip& b) {
    if (a.video() != b.video()) {
        throw DifferentVideo(to_string(a) + " and " + to_string(b) + " come from different videos");
    }
    if (a.length() != b.length() || a.interval() != b.interval()) {
        throw ValidationError("temporal gap needs clips with identical (T, delta)");
    }
    const std::int64_t diff = a.start() > b.start() ? a.start() - b.start() : b.start() - a.start();
    return std::max<std::int64_t>(0, diff - a.span());
}

std::int64_t nearest_distance(const Clip& c, const std::vector<Clip>& annotated) {
    std::int64_t best = kInfiniteDistance;
    for (const auto& other : annotated) {
        if (other.video() == c.video()) best = std::min(best, temporal_gap(c, other));
    }
    return best;
}

namespace {

std::string shortfall_warning(std::size_t picked, int b) {
    return "NoAdmissibleCandidate: selected " + std::to_string(picked) + " of " +
           std::to_string(b) + " clips; every remaining candidate overlaps the annotated set";
}

bool before_by_position(const Clip& a, const Clip& b) {
    if (a.video() != b.video()) return a.video() < b.video();
    return a.start() < b.start();
}

}  // namespace

GreedySelection k_center_greedy_temporal(const std::vector<ClipScore>& candidates,
                                         const std::set<Clip>& labeled, int b) {
    if (b < 1) throw ConfigError("clip budget b must be >= 1");
    struct Entry {
        const ClipScore* score;
        std::int64_t distance;
        bool alive;
    };

    std::vector<Entry> entries;
    entries.reserve(candidates.size());
    std::set<Clip> annotated = labeled;
    for (const auto& cand : candidates) {
        std::int64_t d = kInfiniteDistance;
        for (auto it = labeled.lower_bound(Clip(cand.clip().video(), 0, 2, 1));
             it != labeled.end() && it->video() == cand.clip().video(); ++it) {
            d = std::min(d, temporal_gap(cand.clip(), *it));
        }
        entries.push_back({&cand, d, true});
    }

    GreedySelection out;
    while (static_cast<int>(out.clips.size()) < b) {
        Entry* best = nullptr;
        for (auto& e : entries) {
            if (!e.alive) continue;
            if (!admissible(e.score->clip(), annotated)) {
                // Annotations only grow within a round, so this never recovers.
                e.alive = false;
                continue;
            }
            if (best == nullptr || e.distance > best->distance ||
                (e.distance == best->distance &&
                 (e.score->aggregate() > best->score->aggregate() ||
                  (e.score->aggregate() == best->score->aggregate() &&
                   before_by_position(e.score->clip(), best->score->clip()))))) {
                best = &e;
            }
        }
        if (best == nullptr) break;
        best->alive = false;
        const Clip& picked = best->score->clip();
        out.clips.push_back(picked);
        annotated.insert(picked);
        for (auto& e : entries) {
            if (e.alive && e.score->clip().video() == picked.video()) {
                e.distance = std::min(e.distance, temporal_gap(e.score->clip(), picked));
            }
        }
    }
    if (static_cast<int>(out.clips.size()) < b) out.warnings.push_back(shortfall_warning(out.clips.size(), b));
    return out;
}

namespace {

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

}  // namespace

GreedySelection k_center_greedy_features(const std::vector<EmbeddedClip>& candidates,
                                         const std::vector<EmbeddedClip>& labeled, int b) {
    if (b < 1) throw ConfigError("clip budget b must be >= 1");
    std::size_t dim = 0;
    auto check_dim = [&](const EmbeddedClip& e) {
        if (e.embedding.empty()) throw MissingEmbeddings("clip " + to_string(e.clip) + " has no embedding");
        if (dim == 0) dim = e.embedding.size();
        if (e.embedding.size() != dim) {
            throw DimensionMismatch("embedding of " + to_string(e.clip) + " has dimension " +
                                    std::to_string(e.embedding.size()) + ", expected " +
                                    std::to_string(dim));
        }
    };
    for (const auto& e : candidates) check_dim(e);
    for (const auto& e : labeled) check_dim(e);

    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> distance(candidates.size(), kInf);
    std::vector<bool> alive(candidates.size(), true);
    std::set<Clip> annotated;
    for (const auto& l : labeled) annotated.insert(l.clip);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        for (const auto& l : labeled) {
            distance[i] = std::min(distance[i], squared_distance(candidates[i].embedding, l.embedding));
        }
    }

    GreedySelection out;
    while (static_cast<int>(out.clips.size()) < b) {
        std::size_t best = candidates.size();
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (!alive[i]) continue;
            if (!admissible(candidates[i].clip, annotated)) {
                alive[i] = false;
                continue;
            }
            if (best == candidates.size() || distance[i] > distance[best] ||
                (distance[i] == distance[best] &&
                 before_by_position(candidates[i].clip, candidates[best].clip))) {
                best = i;
            }
        }
        if (best == candidates.size()) break;
        alive[best] = false;
        out.clips.push_back(candidates[best].clip);
        annotated.insert(candidates[best].clip);
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (alive[i]) {
                distance[i] = std::min(distance[i],
                                       squared_distance(candidates[i].embedding, candidates[best].embedding));
            }
        }
    }
    if (static_cast<int>(out.clips.size()) < b) out.warnings.push_back(shortfall_warning(out.clips.size(), b));
    return out;
}

std::vector<double> mean_clip_embedding(const ClipPredictions& preds) {
    std::vector<double> sum;
    std::size_t count = 0;
    for (const auto& frame : preds.forward()) {
        for (const auto& q : frame.queries()) {
            if (!q.is_track() || !q.embedding()) continue;
            const auto& e = *q.embedding();
            if (sum.empty()) sum.assign(e.size(), 0.0);
            if (e.size() != sum.size()) {
                throw DimensionMismatch("mixed embedding dimensions within " + to_string(preds.clip()));
            }
            for (std::size_t i = 0; i < e.size(); ++i) sum[i] += e[i];
            ++count;
        }
    }
    if (count == 0) {
        throw MissingEmbeddings("clip " + to_string(preds.clip()) + " has no track-query embeddings");
    }
    for (double& v : sum) v /= static_cast<double>(count);
    return sum;
}

}  // namespace clipal
