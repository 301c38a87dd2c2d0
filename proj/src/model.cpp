#include "clipal/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "clipal/clip_pool.hpp"
#include "clipal/errors.hpp"
#include "clipal/scoring.hpp"

namespace clipal {

namespace {

constexpr double kProbabilityTolerance = 1e-6;
// Sums this close to 1 are treated as already normalized so that
// renormalization is a fixed point and serialized files round-trip bit-exactly.
constexpr double kRenormalizeThreshold = 1e-12;

}  // namespace

VideoId::VideoId(std::string id) : id_(std::move(id)) {
    if (id_.empty()) throw InvariantViolation("video id must be non-empty");
}

Clip::Clip(VideoId video, std::int64_t start, int length, int interval)
    : video_(std::move(video)), start_(start), length_(length), interval_(interval) {
    if (start_ < 0) throw InvariantViolation("clip start frame must be >= 0");
    if (length_ < 2) throw InvariantViolation("clip length T must be >= 2");
    if (interval_ < 1) throw InvariantViolation("clip interval must be >= 1");
}

std::string to_string(const Clip& clip) {
    std::ostringstream out;
    out << clip.video().str() << '@' << clip.start() << "(T=" << clip.length()
        << ",delta=" << clip.interval() << ')';
    return out.str();
}

BoundingBox::BoundingBox(double x_min_, double y_min_, double x_max_, double y_max_)
    : x_min(x_min_), y_min(y_min_), x_max(x_max_), y_max(y_max_) {
    if (!(std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
          std::isfinite(y_max))) {
        throw InvariantViolation("bounding box coordinates must be finite");
    }
    if (x_max < x_min || y_max < y_min) {
        throw InvariantViolation("bounding box requires x_max >= x_min and y_max >= y_min");
    }
}

void validate_probability_vector(std::span<const double> p) {
    if (p.empty()) {
        throw MalformedProbabilities(0, 0.0, "MalformedProbabilities: empty probability vector");
    }
    double sum = 0.0;
    for (double v : p) sum += v;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!(p[i] >= 0.0 && p[i] <= 1.0)) {
            std::ostringstream msg;
            msg << "MalformedProbabilities: entry " << i << " = " << p[i] << " outside [0,1]";
            throw MalformedProbabilities(i, sum, msg.str());
        }
    }
    if (!(std::abs(sum - 1.0) <= kProbabilityTolerance)) {
        std::ostringstream msg;
        msg << "MalformedProbabilities: sum=" << sum << " differs from 1 by more than "
            << kProbabilityTolerance;
        throw MalformedProbabilities(p.size(), sum, msg.str());
    }
}

std::string to_string(QueryKind kind) {
    return kind == QueryKind::track ? "track" : "object";
}

QueryKind parse_query_kind(const std::string& text) {
    if (text == "track") return QueryKind::track;
    if (text == "object") return QueryKind::object;
    throw SchemaError("unknown query kind '" + text + "'");
}

QueryPrediction::QueryPrediction(QueryKind kind, std::optional<std::int64_t> track_id,
                                 std::vector<double> class_probs, BoundingBox box,
                                 std::optional<std::vector<double>> embedding)
    : kind_(kind),
      track_id_(track_id),
      class_probs_(std::move(class_probs)),
      confidence_(0.0),
      box_(box),
      embedding_(std::move(embedding)) {
    if ((kind_ == QueryKind::track) != track_id_.has_value()) {
        throw InvariantViolation("track_id must be present iff the query is a track query");
    }
    validate_probability_vector(class_probs_);
    double sum = 0.0;
    for (double v : class_probs_) sum += v;
    if (std::abs(sum - 1.0) > kRenormalizeThreshold) {
        for (double& v : class_probs_) v /= sum;
    }
    confidence_ = *std::max_element(class_probs_.begin(), class_probs_.end());
    if (embedding_) {
        if (embedding_->empty()) throw InvariantViolation("embedding must be non-empty when present");
        for (double v : *embedding_) {
            if (!std::isfinite(v)) throw InvariantViolation("embedding entries must be finite");
        }
    }
}

FramePredictions::FramePredictions(std::int64_t frame_index, std::vector<QueryPrediction> queries)
    : frame_index_(frame_index), queries_(std::move(queries)) {
    if (frame_index_ < 0) throw InvariantViolation("frame index must be >= 0");
    std::set<std::int64_t> seen;
    for (const auto& q : queries_) {
        if (!q.is_track()) continue;
        if (!seen.insert(*q.track_id()).second) {
            throw InvariantViolation("duplicate track id " + std::to_string(*q.track_id()) +
                                     " in frame " + std::to_string(frame_index_));
        }
    }
}

namespace {

void check_frames_cover(const Clip& clip, const std::vector<FramePredictions>& frames,
                        const char* direction) {
    const auto expected = frames_of(clip);
    bool ok = frames.size() == expected.size();
    for (std::size_t k = 0; ok && k < frames.size(); ++k) {
        ok = frames[k].frame_index() == expected[k];
    }
    if (!ok) {
        std::ostringstream msg;
        msg << direction << " frames of " << to_string(clip) << " do not match K(c) = {";
        for (std::size_t k = 0; k < expected.size(); ++k) msg << (k ? "," : "") << expected[k];
        msg << "}";
        throw SchemaError(msg.str());
    }
}

}  // namespace

ClipPredictions::ClipPredictions(Clip clip, std::vector<FramePredictions> forward,
                                 std::optional<std::vector<FramePredictions>> backward)
    : clip_(std::move(clip)), forward_(std::move(forward)), backward_(std::move(backward)) {
    check_frames_cover(clip_, forward_, "forward");
    if (backward_) check_frames_cover(clip_, *backward_, "backward");
}

std::string to_string(AggregationMode mode) {
    return mode == AggregationMode::product ? "product" : "sum";
}

AggregationMode parse_aggregation_mode(const std::string& text) {
    if (text == "product") return AggregationMode::product;
    if (text == "sum") return AggregationMode::sum;
    throw ConfigError("unknown aggregation mode '" + text + "' (expected product|sum)");
}

ClipScore::ClipScore(Clip clip, RawComponents raw, NormalizedComponents normalized,
                     AggregationMode mode)
    : clip_(std::move(clip)), raw_(raw), normalized_(normalized), mode_(mode), aggregate_(0.0) {
    for (double v : {raw_.h_var, raw_.h_e, raw_.d_bi, normalized_.phi_h_var, normalized_.phi_h_e,
                     normalized_.phi_d_bi}) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw InvariantViolation("score components must be finite and >= 0");
        }
    }
    aggregate_ = clipal::aggregate(normalized_.phi_h_e, normalized_.phi_h_var, normalized_.phi_d_bi, mode_);
}

BudgetSchedule::BudgetSchedule(double initial, double increment, std::int64_t total)
    : initial_fraction(initial), increment_fraction(increment), total_frames(total) {
    if (!(initial_fraction > 0.0 && initial_fraction <= 1.0)) {
        throw InvariantViolation("initial_fraction must lie in (0,1]");
    }
    if (!(increment_fraction > 0.0 && increment_fraction <= 1.0)) {
        throw InvariantViolation("increment_fraction must lie in (0,1]");
    }
    if (total_frames < 1) throw InvariantViolation("total_frames must be >= 1");
}

BudgetSchedule BudgetSchedule::parse(const std::string& text, std::int64_t total_frames) {
    const auto plus = text.find('+');
    if (plus == std::string::npos) {
        throw ConfigError("schedule must look like '<initial%>+<increment%>', got '" + text + "'");
    }
    try {
        std::size_t used_a = 0;
        std::size_t used_b = 0;
        const std::string a = text.substr(0, plus);
        const std::string b = text.substr(plus + 1);
        const double initial = std::stod(a, &used_a);
        const double increment = std::stod(b, &used_b);
        if (used_a != a.size() || used_b != b.size()) throw std::invalid_argument(text);
        return BudgetSchedule(initial / 100.0, increment / 100.0, total_frames);
    } catch (const std::logic_error&) {
        throw ConfigError("cannot parse schedule '" + text + "'");
    }
}

std::string to_string(const BudgetSchedule& schedule) {
    std::ostringstream out;
    out << schedule.initial_fraction * 100.0 << '+' << schedule.increment_fraction * 100.0;
    return out.str();
}

RoundState::RoundState(int round_index, std::set<Clip> labeled, std::vector<Clip> pool,
                       BudgetSchedule schedule, std::vector<HistoryEntry> history,
                       std::uint64_t rng_seed)
    : round_index_(round_index),
      labeled_(std::move(labeled)),
      pool_(std::move(pool)),
      schedule_(schedule),
      history_(std::move(history)),
      rng_seed_(rng_seed) {
    if (round_index_ < 0) throw InvariantViolation("round index must be >= 0");
    if (!std::is_sorted(pool_.begin(), pool_.end()) ||
        std::adjacent_find(pool_.begin(), pool_.end()) != pool_.end()) {
        throw InvariantViolation("pool must be sorted by (video, start) without duplicates");
    }
    for (const auto& clip : labeled_) {
        if (!std::binary_search(pool_.begin(), pool_.end(), clip)) {
            throw InvariantViolation("labeled clip " + to_string(clip) + " is not in the pool");
        }
    }
    // Same-video labeled clips are adjacent in the sorted set.
    for (auto it = labeled_.begin(); it != labeled_.end(); ++it) {
        for (auto jt = std::next(it); jt != labeled_.end() && jt->video() == it->video(); ++jt) {
            if (jt->start() > it->last_frame()) break;
            if (overlaps(*it, *jt)) {
                throw InvariantViolation("labeled clips " + to_string(*it) + " and " +
                                         to_string(*jt) + " share a sampled frame");
            }
        }
    }
}

std::vector<Clip> RoundState::unlabeled() const {
    std::vector<Clip> out;
    out.reserve(pool_.size() - std::min(pool_.size(), labeled_.size()));
    for (const auto& clip : pool_) {
        if (!is_labeled(clip)) out.push_back(clip);
    }
    return out;
}

}  // namespace clipal
