#pragma once
// Multi-round simulation over a fixed clip pool and coverage reporting.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "clipal/clip_pool.hpp"
#include "clipal/strategies.hpp"
#include "clipal/synthetic.hpp"

namespace clipal {

struct VideoCoverage {
    // t_c / (frame_count - 1) per selected clip, ascending.
    std::vector<double> positions;
    // Over all pairs of selected clips in the video; absent with fewer than two.
    std::optional<std::int64_t> min_gap;
    std::optional<double> mean_gap;
};

std::map<VideoId, VideoCoverage> coverage_metrics(const std::vector<Clip>& selection,
                                                  const DatasetManifest& manifest);

// |selected clips intersecting a hotspot| / min(b, hotspot-intersecting clips in the pool),
// clamped to [0,1]. Absent when the pool holds no hotspot clip.
std::optional<double> hotspot_recall(const std::vector<Clip>& selection, const std::vector<Clip>& pool,
                                     const std::vector<Hotspot>& hotspots, int b);

enum class InitialRound { random, strategy };

struct SimulationConfig {
    BudgetSchedule schedule;
    int n_rounds = 3;
    std::uint64_t rng_seed = 0;
    // Round 0 draws the initial labeled set at random for every arm (shared),
    // unless set to `strategy`.
    InitialRound initial_round = InitialRound::random;
    std::vector<Hotspot> hotspots;
};

struct RoundReport {
    int round_index = 0;
    std::string acting_strategy;  // "random" for a shared random initial round
    RoundBudget budget{0, 0};
    std::vector<Clip> selected;
    std::vector<std::string> warnings;
    std::optional<double> hotspot_recall;
    std::map<VideoId, VideoCoverage> coverage;
    // Means over videos with at least two selected clips this round.
    std::optional<double> mean_min_gap;
    std::optional<double> mean_pairwise_gap;
};

struct ArmReport {
    std::string label;
    std::vector<RoundReport> rounds;
    RoundState final_state;
};

struct SimulationReport {
    std::vector<ArmReport> arms;
};

// Runs every arm from the same initial state for cfg.n_rounds rounds of
// select -> advance_round. Re-validates budgets and disjointness of each
// round before reporting it.
SimulationReport run_simulation(const DatasetManifest& manifest, const ClipPool& pool,
                                const PredictionSet& predictions,
                                const std::vector<StrategyConfig>& strategies, const SimulationConfig& cfg);

std::string report_to_json(const SimulationReport& report);
// CSV rows: arm,round,video,position.
std::string report_positions_csv(const SimulationReport& report);
// Plain-text table: one row per (arm, round).
std::string render_report_table(const std::string& report_json);

}  // namespace clipal
