#include "clipal/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "clipal/clip_pool.hpp"
#include "clipal/errors.hpp"
#include "clipal/rng.hpp"
#include "clipal/temporal_diversity.hpp"

namespace clipal {

std::string to_string(StrategyName name) {
    switch (name) {
        case StrategyName::cutal: return "cutal";
        case StrategyName::random: return "random";
        case StrategyName::entropy: return "entropy";
        case StrategyName::coreset: return "coreset";
    }
    return "unknown";
}

StrategyName parse_strategy_name(const std::string& text) {
    if (text == "cutal") return StrategyName::cutal;
    if (text == "random") return StrategyName::random;
    if (text == "entropy") return StrategyName::entropy;
    if (text == "coreset") return StrategyName::coreset;
    throw ConfigError("unknown strategy '" + text + "' (expected cutal|random|entropy|coreset)");
}

Ablation Ablation::parse(const std::string& text) {
    Ablation a;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        if (item == "no_var") a.no_var = true;
        else if (item == "no_ent") a.no_ent = true;
        else if (item == "no_bidir") a.no_bidir = true;
        else if (item == "no_temporal") a.no_temporal = true;
        else throw ConfigError("unknown ablation flag '" + item + "'");
    }
    return a;
}

std::string Ablation::str() const {
    std::string out;
    auto add = [&](bool on, const char* name) {
        if (!on) return;
        if (!out.empty()) out += ',';
        out += name;
    };
    add(no_var, "no_var");
    add(no_ent, "no_ent");
    add(no_bidir, "no_bidir");
    add(no_temporal, "no_temporal");
    return out;
}

void StrategyConfig::validate() const {
    if (name != StrategyName::cutal && ablation.any()) {
        throw ConfigError("ablation flags are only valid with the cutal strategy");
    }
    if (name != StrategyName::cutal && aggregation != AggregationMode::product) {
        throw ConfigError("aggregation mode is only meaningful for the cutal strategy");
    }
    if (delta < 1) throw ConfigError("delta must be >= 1");
    uncertainty.validate();
}

std::string StrategyConfig::label() const {
    std::string out = to_string(name);
    std::string extra = ablation.str();
    if (aggregation == AggregationMode::sum) extra += extra.empty() ? "sum" : ",sum";
    if (!extra.empty()) out += "[" + extra + "]";
    return out;
}

RoundBudget budget_for_round(const BudgetSchedule& schedule, int round_index, int length) {
    if (round_index < 0) throw ValidationError("round index must be >= 0");
    if (length < 2) throw ValidationError("clip length must be >= 2");
    const double fraction = round_index == 0 ? schedule.initial_fraction : schedule.increment_fraction;
    // The slack absorbs representation error such as 0.29 * 100 = 28.999999999999996.
    const auto frames = static_cast<std::int64_t>(
        std::floor(fraction * static_cast<double>(schedule.total_frames) + 1e-9));
    const std::int64_t clips = frames / length;
    if (clips < 1) {
        throw BudgetTooSmall("budget of " + std::to_string(frames) + " frames holds no clip of length " +
                             std::to_string(length));
    }
    return RoundBudget{frames, static_cast<int>(clips)};
}

namespace {

const ClipPredictions& predictions_for(const PredictionSet& predictions, const Clip& clip) {
    const auto it = predictions.find(clip);
    if (it == predictions.end()) throw ValidationError("no predictions for clip " + to_string(clip));
    return it->second;
}

std::vector<Clip> require_unlabeled(const RoundState& state) {
    auto unlabeled = state.unlabeled();
    if (unlabeled.empty()) throw EmptyPool("the unlabeled pool is empty");
    return unlabeled;
}

void note_shortfall(Selection& sel, const RoundBudget& budget) {
    if (static_cast<int>(sel.clips.size()) < budget.clips && sel.warnings.empty()) {
        sel.warnings.push_back("shortfall: selected " + std::to_string(sel.clips.size()) + " of " +
                               std::to_string(budget.clips) + " clips; admissible candidates ran out");
    }
}

// Walks `ranked` in order, keeping clips that stay disjoint from labeled and earlier picks.
template <typename Ranked, typename ClipOf>
std::vector<std::size_t> take_admissible(const Ranked& ranked, ClipOf clip_of,
                                         const std::set<Clip>& labeled, int b) {
    std::set<Clip> annotated = labeled;
    std::vector<std::size_t> picked;
    for (std::size_t i = 0; i < ranked.size() && static_cast<int>(picked.size()) < b; ++i) {
        const Clip& clip = clip_of(ranked[i]);
        if (!admissible(clip, annotated)) continue;
        annotated.insert(clip);
        picked.push_back(i);
    }
    return picked;
}

}  // namespace

Selection select_cutal(const PredictionSet& predictions, const RoundState& state,
                       const RoundBudget& budget, const StrategyConfig& cfg) {
    cfg.validate();
    const auto unlabeled = require_unlabeled(state);

    std::vector<RawScore> raw;
    raw.reserve(unlabeled.size());
    for (const auto& clip : unlabeled) {
        raw.push_back({clip, score_clip_raw(predictions_for(predictions, clip), cfg.uncertainty)});
    }
    return select_cutal_scored(raw, state, budget, cfg);
}

Selection select_cutal_scored(const std::vector<RawScore>& raw, const RoundState& state,
                              const RoundBudget& budget, const StrategyConfig& cfg) {
    cfg.validate();
    if (raw.empty()) throw EmptyPool("no raw scores to select from");
    for (const auto& r : raw) {
        if (state.is_labeled(r.clip)) throw InvariantViolation("raw score for labeled clip " + to_string(r.clip));
    }
    // Statistics cover all of U; only clips disjoint from L can become candidates.
    const auto scored = score_pool(raw, cfg.aggregation, cfg.ablation.mask());
    std::vector<ClipScore> eligible;
    for (const auto& s : scored) {
        if (admissible(s.clip(), state.labeled())) eligible.push_back(s);
    }

    Selection sel;
    if (cfg.ablation.no_temporal) {
        std::sort(eligible.begin(), eligible.end(), score_order);
        for (std::size_t i : take_admissible(eligible, [](const ClipScore& s) -> const Clip& { return s.clip(); },
                                             state.labeled(), budget.clips)) {
            sel.clips.push_back(eligible[i].clip());
            sel.scores.push_back(eligible[i]);
        }
    } else if (!eligible.empty()) {
        const auto candidates = top_candidates(eligible, budget.clips, cfg.delta);
        auto greedy = k_center_greedy_temporal(candidates, state.labeled(), budget.clips);
        sel.clips = std::move(greedy.clips);
        sel.warnings = std::move(greedy.warnings);
        for (const auto& clip : sel.clips) {
            sel.scores.push_back(*std::find_if(candidates.begin(), candidates.end(),
                                               [&](const ClipScore& s) { return s.clip() == clip; }));
        }
    }
    note_shortfall(sel, budget);
    return sel;
}

Selection select_random(const RoundState& state, const RoundBudget& budget, std::uint64_t rng_seed) {
    auto order = require_unlabeled(state);
    CounterRng rng(rng_seed, 0x52414E44 /* "RAND" */);
    std::set<Clip> annotated = state.labeled();
    Selection sel;
    // Partial Fisher-Yates: position i receives a uniform draw from the not-yet-drawn tail.
    for (std::size_t i = 0; i < order.size() && static_cast<int>(sel.clips.size()) < budget.clips; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(order.size() - i));
        std::swap(order[i], order[j]);
        if (!admissible(order[i], annotated)) continue;
        annotated.insert(order[i]);
        sel.clips.push_back(order[i]);
    }
    note_shortfall(sel, budget);
    return sel;
}

double entropy_baseline_score(const ClipPredictions& preds) {
    double total = 0.0;
    std::size_t frames = 0;
    for (const auto& frame : preds.forward()) {
        bool any = false;
        double best = 0.0;
        for (const auto& q : frame.queries()) {
            if (!q.is_track()) continue;
            best = std::max(best, entropy(q.class_probs()));
            any = true;
        }
        if (any) {
            total += best;
            ++frames;
        }
    }
    return frames == 0 ? 0.0 : total / static_cast<double>(frames);
}

Selection select_entropy(const PredictionSet& predictions, const RoundState& state,
                         const RoundBudget& budget) {
    const auto unlabeled = require_unlabeled(state);
    std::vector<std::pair<double, Clip>> ranked;
    ranked.reserve(unlabeled.size());
    for (const auto& clip : unlabeled) {
        ranked.emplace_back(entropy_baseline_score(predictions_for(predictions, clip)), clip);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    Selection sel;
    for (std::size_t i : take_admissible(ranked, [](const auto& r) -> const Clip& { return r.second; },
                                         state.labeled(), budget.clips)) {
        sel.clips.push_back(ranked[i].second);
    }
    note_shortfall(sel, budget);
    return sel;
}

Selection select_coreset(const PredictionSet& predictions, const RoundState& state,
                         const RoundBudget& budget) {
    const auto unlabeled = require_unlabeled(state);
    std::vector<EmbeddedClip> candidates;
    for (const auto& clip : unlabeled) {
        if (!admissible(clip, state.labeled())) continue;
        candidates.push_back({clip, mean_clip_embedding(predictions_for(predictions, clip))});
    }
    std::vector<EmbeddedClip> labeled;
    for (const auto& clip : state.labeled()) {
        const auto it = predictions.find(clip);
        if (it == predictions.end()) {
            throw MissingEmbeddings("no predictions (and so no embedding) for labeled clip " + to_string(clip));
        }
        labeled.push_back({clip, mean_clip_embedding(it->second)});
    }
    Selection sel;
    if (!candidates.empty()) {
        auto greedy = k_center_greedy_features(candidates, labeled, budget.clips);
        sel.clips = std::move(greedy.clips);
        sel.warnings = std::move(greedy.warnings);
    }
    note_shortfall(sel, budget);
    return sel;
}

Selection select(const StrategyConfig& cfg, const PredictionSet& predictions,
                 const RoundState& state, const RoundBudget& budget) {
    cfg.validate();
    switch (cfg.name) {
        case StrategyName::cutal: return select_cutal(predictions, state, budget, cfg);
        case StrategyName::random:
            return select_random(state, budget,
                                 derive_seed(cfg.rng_seed, static_cast<std::uint64_t>(state.round_index())));
        case StrategyName::entropy: return select_entropy(predictions, state, budget);
        case StrategyName::coreset: return select_coreset(predictions, state, budget);
    }
    throw ConfigError("unhandled strategy");
}

RoundState advance_round(const RoundState& state, const std::vector<Clip>& selection,
                         const std::string& strategy_name) {
    std::set<Clip> labeled = state.labeled();
    for (const auto& clip : selection) {
        if (!std::binary_search(state.pool().begin(), state.pool().end(), clip)) {
            throw InvariantViolation("selected clip " + to_string(clip) + " is not in the pool");
        }
        if (!admissible(clip, labeled)) {
            throw InvariantViolation("selected clip " + to_string(clip) +
                                     " overlaps the labeled set or another selected clip");
        }
        labeled.insert(clip);
    }
    auto history = state.history();
    history.push_back(HistoryEntry{state.round_index(), selection, strategy_name});
    return RoundState(state.round_index() + 1, std::move(labeled), state.pool(), state.schedule(),
                      std::move(history), state.rng_seed());
}

}  // namespace clipal
