#pragma once
// Acquisition strategies, per-round budgets, and round-state evolution.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "clipal/model.hpp"
#include "clipal/scoring.hpp"
#include "clipal/uncertainty.hpp"

namespace clipal {

// Predictions indexed by clip. Must cover every clip a strategy scores.
using PredictionSet = std::map<Clip, ClipPredictions>;

enum class StrategyName { cutal, random, entropy, coreset };

std::string to_string(StrategyName name);
StrategyName parse_strategy_name(const std::string& text);

struct Ablation {
    bool no_var = false;
    bool no_ent = false;
    bool no_bidir = false;
    bool no_temporal = false;

    bool any() const noexcept { return no_var || no_ent || no_bidir || no_temporal; }
    ComponentMask mask() const noexcept { return ComponentMask{!no_var, !no_ent, !no_bidir}; }

    // Comma separated subset of no_var,no_ent,no_bidir,no_temporal; "" for none.
    static Ablation parse(const std::string& text);
    std::string str() const;

    bool operator==(const Ablation&) const = default;
};

struct StrategyConfig {
    StrategyName name = StrategyName::cutal;
    Ablation ablation;
    AggregationMode aggregation = AggregationMode::product;
    int delta = 4;
    UncertaintyConfig uncertainty;
    std::uint64_t rng_seed = 0;

    // Throws ConfigError, e.g. for ablation flags on a baseline.
    void validate() const;
    // "cutal", "cutal[no_temporal]", "cutal[sum]", "random", ...
    std::string label() const;
};

struct RoundBudget {
    std::int64_t frames;
    int clips;

    bool operator==(const RoundBudget&) const = default;
};

// Round 0 gets floor(initial_fraction * total_frames) frames, later rounds
// floor(increment_fraction * total_frames); clips = floor(frames / T).
// Throws BudgetTooSmall when that leaves zero clips.
RoundBudget budget_for_round(const BudgetSchedule& schedule, int round_index, int length);

struct Selection {
    std::vector<Clip> clips;        // in pick order
    std::vector<ClipScore> scores;  // scores of the picked clips (cutal only)
    std::vector<std::string> warnings;
};

Selection select_cutal(const PredictionSet& predictions, const RoundState& state,
                       const RoundBudget& budget, const StrategyConfig& cfg);
// Same selection from precomputed raw components of the unlabeled clips.
Selection select_cutal_scored(const std::vector<RawScore>& raw, const RoundState& state,
                              const RoundBudget& budget, const StrategyConfig& cfg);

// Uniform draws without replacement over admissible unlabeled clips, skipping
// draws that overlap earlier picks. Uses CounterRng so results replay exactly.
Selection select_random(const RoundState& state, const RoundBudget& budget, std::uint64_t rng_seed);

// Baseline score: mean over frames with track queries of the largest
// track-query entropy. Picks the best admissible clips.
double entropy_baseline_score(const ClipPredictions& preds);
Selection select_entropy(const PredictionSet& predictions, const RoundState& state,
                         const RoundBudget& budget);

Selection select_coreset(const PredictionSet& predictions, const RoundState& state,
                         const RoundBudget& budget);

// Dispatches on cfg.name. The random strategy draws with derive_seed(cfg.rng_seed, round).
Selection select(const StrategyConfig& cfg, const PredictionSet& predictions,
                 const RoundState& state, const RoundBudget& budget);

// Appends the selection to the labeled set, records history, and increments
// the round index. Throws InvariantViolation for inadmissible selections.
RoundState advance_round(const RoundState& state, const std::vector<Clip>& selection,
                         const std::string& strategy_name);

}  // namespace clipal
