#pragma once
// Domain types shared by every part of the engine.
//
// All types validate their invariants on construction and are immutable
// afterwards, so a live instance is always a valid one.

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace clipal {

class VideoId {
public:
    explicit VideoId(std::string id);

    const std::string& str() const noexcept { return id_; }

    auto operator<=>(const VideoId&) const = default;

private:
    std::string id_;
};

// A fixed-length acquisition unit: `length` frames sampled every `interval`
// frames starting at `start`. Labeling a clip costs `length` frame annotations.
class Clip {
public:
    Clip(VideoId video, std::int64_t start, int length, int interval);

    const VideoId& video() const noexcept { return video_; }
    std::int64_t start() const noexcept { return start_; }
    int length() const noexcept { return length_; }
    int interval() const noexcept { return interval_; }

    // (T-1) * delta
    std::int64_t span() const noexcept {
        return static_cast<std::int64_t>(length_ - 1) * interval_;
    }
    std::int64_t last_frame() const noexcept { return start_ + span(); }
    int annotation_cost() const noexcept { return length_; }

    auto operator<=>(const Clip&) const = default;

private:
    VideoId video_;
    std::int64_t start_;
    int length_;
    int interval_;
};

std::string to_string(const Clip& clip);

struct BoundingBox {
    BoundingBox(double x_min, double y_min, double x_max, double y_max);

    double x_min;
    double y_min;
    double x_max;
    double y_max;

    double area() const noexcept { return (x_max - x_min) * (y_max - y_min); }

    bool operator==(const BoundingBox&) const = default;
};

// Succeeds iff every entry is in [0,1] and the entries sum to 1 within 1e-6.
// Throws MalformedProbabilities otherwise.
void validate_probability_vector(std::span<const double> p);

enum class QueryKind { track, object };

std::string to_string(QueryKind kind);
QueryKind parse_query_kind(const std::string& text);

class QueryPrediction {
public:
    // Validates the class probabilities, renormalizes them when their sum is
    // off by more than rounding noise, and derives the confidence as max(p).
    QueryPrediction(QueryKind kind, std::optional<std::int64_t> track_id,
                    std::vector<double> class_probs, BoundingBox box,
                    std::optional<std::vector<double>> embedding = std::nullopt);

    QueryKind kind() const noexcept { return kind_; }
    bool is_track() const noexcept { return kind_ == QueryKind::track; }
    const std::optional<std::int64_t>& track_id() const noexcept { return track_id_; }
    const std::vector<double>& class_probs() const noexcept { return class_probs_; }
    double confidence() const noexcept { return confidence_; }
    const BoundingBox& box() const noexcept { return box_; }
    const std::optional<std::vector<double>>& embedding() const noexcept { return embedding_; }

    bool operator==(const QueryPrediction&) const = default;

private:
    QueryKind kind_;
    std::optional<std::int64_t> track_id_;
    std::vector<double> class_probs_;
    double confidence_;
    BoundingBox box_;
    std::optional<std::vector<double>> embedding_;
};

class FramePredictions {
public:
    FramePredictions(std::int64_t frame_index, std::vector<QueryPrediction> queries);

    std::int64_t frame_index() const noexcept { return frame_index_; }
    const std::vector<QueryPrediction>& queries() const noexcept { return queries_; }

    bool operator==(const FramePredictions&) const = default;

private:
    std::int64_t frame_index_;
    std::vector<QueryPrediction> queries_;
};

// Forward (and optionally backward, i.e. reversed-order) inference results for
// one clip. Both directions are stored in ascending frame order and cover the
// clip's sampled frames exactly.
class ClipPredictions {
public:
    ClipPredictions(Clip clip, std::vector<FramePredictions> forward,
                    std::optional<std::vector<FramePredictions>> backward = std::nullopt);

    const Clip& clip() const noexcept { return clip_; }
    const std::vector<FramePredictions>& forward() const noexcept { return forward_; }
    const std::optional<std::vector<FramePredictions>>& backward() const noexcept {
        return backward_;
    }

    bool operator==(const ClipPredictions&) const = default;

private:
    Clip clip_;
    std::vector<FramePredictions> forward_;
    std::optional<std::vector<FramePredictions>> backward_;
};

enum class AggregationMode { product, sum };

std::string to_string(AggregationMode mode);
AggregationMode parse_aggregation_mode(const std::string& text);

struct RawComponents {
    double h_var = 0.0;
    double h_e = 0.0;
    double d_bi = 0.0;

    bool operator==(const RawComponents&) const = default;
};

struct NormalizedComponents {
    double phi_h_var = 0.0;
    double phi_h_e = 0.0;
    double phi_d_bi = 0.0;

    bool operator==(const NormalizedComponents&) const = default;
};

// Raw and normalized uncertainty components of one clip plus the aggregate
// score. The aggregate is always derived from the normalized components.
class ClipScore {
public:
    ClipScore(Clip clip, RawComponents raw, NormalizedComponents normalized,
              AggregationMode mode);

    const Clip& clip() const noexcept { return clip_; }
    const RawComponents& raw() const noexcept { return raw_; }
    const NormalizedComponents& normalized() const noexcept { return normalized_; }
    AggregationMode mode() const noexcept { return mode_; }
    double aggregate() const noexcept { return aggregate_; }

    bool operator==(const ClipScore&) const = default;

private:
    Clip clip_;
    RawComponents raw_;
    NormalizedComponents normalized_;
    AggregationMode mode_;
    double aggregate_;
};

// Per-round frame budgets expressed as fractions of all training frames.
struct BudgetSchedule {
    BudgetSchedule(double initial_fraction, double increment_fraction, std::int64_t total_frames);

    // "5+5" -> (0.05, 0.05); "20+10" -> (0.20, 0.10)
    static BudgetSchedule parse(const std::string& text, std::int64_t total_frames);

    double initial_fraction;
    double increment_fraction;
    std::int64_t total_frames;

    bool operator==(const BudgetSchedule&) const = default;
};

std::string to_string(const BudgetSchedule& schedule);

struct HistoryEntry {
    int round_index = 0;
    std::vector<Clip> selected;
    std::string strategy;

    bool operator==(const HistoryEntry&) const = default;
};

// Labeled set L, clip pool C, and the bookkeeping of past rounds.
// Invariants: L is a subset of C and same-video labeled clips never share a
// sampled frame.
class RoundState {
public:
    RoundState(int round_index, std::set<Clip> labeled, std::vector<Clip> pool,
               BudgetSchedule schedule, std::vector<HistoryEntry> history,
               std::uint64_t rng_seed);

    int round_index() const noexcept { return round_index_; }
    const std::set<Clip>& labeled() const noexcept { return labeled_; }
    // Sorted by (video, start_frame).
    const std::vector<Clip>& pool() const noexcept { return pool_; }
    const BudgetSchedule& schedule() const noexcept { return schedule_; }
    const std::vector<HistoryEntry>& history() const noexcept { return history_; }
    std::uint64_t rng_seed() const noexcept { return rng_seed_; }

    // U = C \ L, in pool order.
    std::vector<Clip> unlabeled() const;
    bool is_labeled(const Clip& clip) const { return labeled_.count(clip) != 0; }

    bool operator==(const RoundState&) const = default;

private:
    int round_index_;
    std::set<Clip> labeled_;
    std::vector<Clip> pool_;
    BudgetSchedule schedule_;
    std::vector<HistoryEntry> history_;
    std::uint64_t rng_seed_;
};

}  // namespace clipal
