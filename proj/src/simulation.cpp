#include "clipal/simulation.hpp"

#include <algorithm>
#include <functional>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "clipal/errors.hpp"
#include "clipal/rng.hpp"
#include "clipal/temporal_diversity.hpp"

namespace clipal {

using Json = nlohmann::ordered_json;

std::map<VideoId, VideoCoverage> coverage_metrics(const std::vector<Clip>& selection,
                                                  const DatasetManifest& manifest) {
    std::map<VideoId, std::vector<Clip>> by_video;
    for (const auto& clip : selection) by_video[clip.video()].push_back(clip);

    std::map<VideoId, VideoCoverage> out;
    for (auto& [video, clips] : by_video) {
        std::sort(clips.begin(), clips.end());
        VideoCoverage cov;
        const std::int64_t n = manifest.frame_count(video);
        for (const auto& clip : clips) {
            cov.positions.push_back(n > 1 ? static_cast<double>(clip.start()) / static_cast<double>(n - 1) : 0.0);
        }
        if (clips.size() >= 2) {
            std::int64_t min_gap = kInfiniteDistance;
            double sum = 0.0;
            std::size_t pairs = 0;
            for (std::size_t i = 0; i < clips.size(); ++i) {
                for (std::size_t j = i + 1; j < clips.size(); ++j) {
                    const auto g = temporal_gap(clips[i], clips[j]);
                    min_gap = std::min(min_gap, g);
                    sum += static_cast<double>(g);
                    ++pairs;
                }
            }
            cov.min_gap = min_gap;
            cov.mean_gap = sum / static_cast<double>(pairs);
        }
        out.emplace(video, std::move(cov));
    }
    return out;
}

std::optional<double> hotspot_recall(const std::vector<Clip>& selection, const std::vector<Clip>& pool,
                                     const std::vector<Hotspot>& hotspots, int b) {
    auto hits = [&](const Clip& clip) {
        return std::any_of(hotspots.begin(), hotspots.end(), [&](const Hotspot& h) { return intersects(clip, h); });
    };
    const auto total = std::count_if(pool.begin(), pool.end(), hits);
    if (total == 0 || b < 1) return std::nullopt;
    const auto selected = std::count_if(selection.begin(), selection.end(), hits);
    const double denom = static_cast<double>(std::min<std::int64_t>(b, total));
    return std::clamp(static_cast<double>(selected) / denom, 0.0, 1.0);
}

namespace {

void revalidate(const RoundState& before, const RoundReport& round) {
    if (static_cast<int>(round.selected.size()) > round.budget.clips) {
        throw InvariantViolation("round " + std::to_string(round.round_index) + " exceeds its clip budget");
    }
    std::set<Clip> annotated = before.labeled();
    for (const auto& clip : round.selected) {
        if (before.is_labeled(clip)) throw InvariantViolation("re-selected labeled clip " + to_string(clip));
        if (!admissible(clip, annotated)) throw InvariantViolation("frame overlap at " + to_string(clip));
        annotated.insert(clip);
    }
}

RoundReport make_round(const RoundState& before, const std::string& acting, const RoundBudget& budget,
                       Selection sel, const DatasetManifest& manifest, const SimulationConfig& cfg) {
    RoundReport r;
    r.round_index = before.round_index();
    r.acting_strategy = acting;
    r.budget = budget;
    r.selected = std::move(sel.clips);
    r.warnings = std::move(sel.warnings);
    revalidate(before, r);
    if (!cfg.hotspots.empty()) r.hotspot_recall = hotspot_recall(r.selected, before.pool(), cfg.hotspots, budget.clips);
    r.coverage = coverage_metrics(r.selected, manifest);
    double min_sum = 0.0;
    double mean_sum = 0.0;
    std::size_t videos = 0;
    for (const auto& [video, cov] : r.coverage) {
        if (!cov.min_gap) continue;
        min_sum += static_cast<double>(*cov.min_gap);
        mean_sum += *cov.mean_gap;
        ++videos;
    }
    if (videos > 0) {
        r.mean_min_gap = min_sum / static_cast<double>(videos);
        r.mean_pairwise_gap = mean_sum / static_cast<double>(videos);
    }
    return r;
}

// One round: select, report, advance. An exhausted pool yields an empty round.
RoundState play_round(const RoundState& state, const std::string& acting, const DatasetManifest& manifest,
                      const SimulationConfig& cfg, int length,
                      const std::function<Selection(const RoundState&, const RoundBudget&)>& choose,
                      std::vector<RoundReport>& rounds) {
    const RoundBudget budget = budget_for_round(state.schedule(), state.round_index(), length);
    Selection sel;
    if (state.unlabeled().empty()) {
        sel.warnings.push_back("pool exhausted: no unlabeled clips remain");
    } else {
        sel = choose(state, budget);
    }
    const std::vector<Clip> picked = sel.clips;
    rounds.push_back(make_round(state, acting, budget, std::move(sel), manifest, cfg));
    return advance_round(state, picked, acting);
}

}  // namespace

SimulationReport run_simulation(const DatasetManifest& manifest, const ClipPool& pool,
                                const PredictionSet& predictions,
                                const std::vector<StrategyConfig>& strategies, const SimulationConfig& cfg) {
    if (cfg.n_rounds < 1) throw ConfigError("n_rounds must be >= 1");
    if (strategies.empty()) throw ConfigError("at least one strategy is required");
    for (const auto& s : strategies) s.validate();
    const int length = pool.params().length;

    const RoundState initial(0, {}, pool.clips(), cfg.schedule, {}, cfg.rng_seed);

    std::vector<RoundReport> shared_rounds;
    RoundState start = initial;
    if (cfg.initial_round == InitialRound::random) {
        start = play_round(
            initial, "random", manifest, cfg, length,
            [&](const RoundState& st, const RoundBudget& budget) {
                return select_random(st, budget, derive_seed(cfg.rng_seed, 0x1A17));
            },
            shared_rounds);
    }

    SimulationReport report;
    for (const auto& base : strategies) {
        StrategyConfig arm_cfg = base;
        arm_cfg.rng_seed = cfg.rng_seed;
        ArmReport arm{arm_cfg.label(), shared_rounds, start};
        while (static_cast<int>(arm.rounds.size()) < cfg.n_rounds) {
            arm.final_state = play_round(
                arm.final_state, arm_cfg.label(), manifest, cfg, length,
                [&](const RoundState& st, const RoundBudget& budget) {
                    return select(arm_cfg, predictions, st, budget);
                },
                arm.rounds);
        }
        report.arms.push_back(std::move(arm));
    }
    return report;
}

namespace {

Json clip_json(const Clip& clip) {
    return Json{{"video", clip.video().str()}, {"start", clip.start()}, {"T", clip.length()}, {"delta", clip.interval()}};
}

template <typename T>
Json optional_json(const std::optional<T>& v) {
    return v ? Json(*v) : Json(nullptr);
}

}  // namespace

std::string report_to_json(const SimulationReport& report) {
    Json j;
    j["arms"] = Json::array();
    for (const auto& arm : report.arms) {
        Json a;
        a["label"] = arm.label;
        a["rounds"] = Json::array();
        for (const auto& r : arm.rounds) {
            Json jr;
            jr["round"] = r.round_index;
            jr["strategy"] = r.acting_strategy;
            jr["budget"] = {{"frames", r.budget.frames}, {"clips", r.budget.clips}};
            jr["selected"] = Json::array();
            for (const auto& clip : r.selected) jr["selected"].push_back(clip_json(clip));
            jr["warnings"] = r.warnings;
            jr["hotspot_recall"] = optional_json(r.hotspot_recall);
            jr["mean_min_gap"] = optional_json(r.mean_min_gap);
            jr["mean_pairwise_gap"] = optional_json(r.mean_pairwise_gap);
            Json cov = Json::object();
            for (const auto& [video, c] : r.coverage) {
                cov[video.str()] = {{"positions", c.positions},
                                    {"min_gap", optional_json(c.min_gap)},
                                    {"mean_gap", optional_json(c.mean_gap)}};
            }
            jr["coverage"] = std::move(cov);
            a["rounds"].push_back(std::move(jr));
        }
        a["final_labeled"] = arm.final_state.labeled().size();
        j["arms"].push_back(std::move(a));
    }
    return j.dump(1) + "\n";
}

std::string report_positions_csv(const SimulationReport& report) {
    std::ostringstream out;
    out << "arm,round,video,position\n";
    out << std::setprecision(17);
    for (const auto& arm : report.arms) {
        for (const auto& r : arm.rounds) {
            for (const auto& [video, cov] : r.coverage) {
                for (double p : cov.positions) {
                    out << arm.label << ',' << r.round_index << ',' << video.str() << ',' << p << '\n';
                }
            }
        }
    }
    return out.str();
}

std::string render_report_table(const std::string& report_json) {
    Json j;
    try {
        j = Json::parse(report_json);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("report: ") + e.what());
    }
    if (!j.contains("arms") || !j["arms"].is_array()) throw SchemaError("report: missing 'arms' array");

    std::ostringstream out;
    out << std::left << std::setw(28) << "arm" << std::setw(7) << "round" << std::setw(28) << "acting"
        << std::right << std::setw(6) << "b" << std::setw(10) << "selected" << std::setw(10) << "recall"
        << std::setw(14) << "min_gap" << std::setw(14) << "mean_gap" << '\n';
    auto num = [](const Json& v) {
        if (v.is_null()) return std::string("-");
        std::ostringstream s;
        s << std::fixed << std::setprecision(3) << v.get<double>();
        return s.str();
    };
    for (const auto& arm : j["arms"]) {
        for (const auto& r : arm["rounds"]) {
            out << std::left << std::setw(28) << arm["label"].get<std::string>() << std::setw(7)
                << r["round"].get<int>() << std::setw(28) << r["strategy"].get<std::string>() << std::right
                << std::setw(6) << r["budget"]["clips"].get<int>() << std::setw(10) << r["selected"].size()
                << std::setw(10) << num(r["hotspot_recall"]) << std::setw(14) << num(r["mean_min_gap"])
                << std::setw(14) << num(r["mean_pairwise_gap"]) << '\n';
        }
    }
    return out.str();
}

}  // namespace clipal
