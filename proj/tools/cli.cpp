#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "clipal/clip_pool.hpp"
#include "clipal/errors.hpp"
#include "clipal/prediction_io.hpp"
#include "clipal/rng.hpp"
#include "clipal/scoring.hpp"
#include "clipal/simulation.hpp"
#include "clipal/strategies.hpp"
#include "clipal/synthetic.hpp"

namespace clipal::cli {

namespace {

using Json = nlohmann::json;

// Lets `--config file.json` supply option defaults; nested objects address subcommands.
class JsonConfig : public CLI::Config {
public:
    std::string to_config(const CLI::App* app, bool default_also, bool, std::string prefix) const override {
        Json j;
        for (const CLI::Option* opt : app->get_options({})) {
            if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
            const std::string name = prefix + opt->get_lnames()[0];
            if (opt->count() > 0) {
                j[name] = opt->as<std::string>();
            } else if (default_also && !opt->get_default_str().empty()) {
                j[name] = opt->get_default_str();
            }
        }
        return j.dump(2);
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        Json j;
        try {
            j = Json::parse(input);
        } catch (const Json::parse_error& e) {
            throw CLI::ConversionError(std::string("invalid JSON config: ") + e.what());
        }
        std::vector<CLI::ConfigItem> items;
        collect(j, {}, items);
        return items;
    }

private:
    static std::string scalar(const Json& v) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        return v.dump();
    }

    static void collect(const Json& j, const std::vector<std::string>& parents,
                        std::vector<CLI::ConfigItem>& items) {
        for (const auto& [key, value] : j.items()) {
            if (value.is_object()) {
                auto nested = parents;
                nested.push_back(key);
                collect(value, nested, items);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = key;
            if (value.is_array()) {
                for (const auto& v : value) item.inputs.push_back(scalar(v));
            } else {
                item.inputs.push_back(scalar(value));
            }
            items.push_back(std::move(item));
        }
    }
};

struct UncertaintyFlags {
    double tau_conf = 0.5;
    double tau_iou = 0.5;
    bool strict_bidir = false;
    bool filter_track_queries = false;

    void attach(CLI::App* app) {
        app->add_option("--tau-conf", tau_conf, "Confidence threshold for object queries")->capture_default_str();
        app->add_option("--tau-iou", tau_iou, "IoU threshold for forward/backward matching")->capture_default_str();
        app->add_flag("--strict-bidir", strict_bidir, "Fail on clips without backward predictions");
        app->add_flag("--filter-track-queries", filter_track_queries,
                      "Apply the confidence threshold to track queries too");
    }

    UncertaintyConfig config() const {
        UncertaintyConfig cfg{tau_conf, tau_iou, strict_bidir, filter_track_queries};
        cfg.validate();
        return cfg;
    }
};

std::string read_json_text(const std::string& path) { return read_text_file(path); }

Json parse_json_file(const std::string& path) {
    try {
        return Json::parse(read_json_text(path));
    } catch (const Json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
}

template <typename T>
T json_or(const Json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("field '") + key + "': " + e.what());
    }
}

SyntheticConfig synthetic_from_json(const Json& j) {
    SyntheticConfig cfg;
    cfg.n_videos = json_or(j, "n_videos", cfg.n_videos);
    cfg.frames_per_video = json_or(j, "frames_per_video", cfg.frames_per_video);
    cfg.n_classes = json_or(j, "n_classes", cfg.n_classes);
    cfg.tracks_per_frame = json_or(j, "tracks_per_frame", cfg.tracks_per_frame);
    cfg.noise_level = json_or(j, "noise_level", cfg.noise_level);
    cfg.rng_seed = json_or<std::uint64_t>(j, "seed", cfg.rng_seed);
    cfg.embedding_dim = json_or(j, "embedding_dim", cfg.embedding_dim);
    cfg.pool.length = json_or(j, "T", cfg.pool.length);
    cfg.pool.interval = json_or(j, "delta", cfg.pool.interval);
    cfg.pool.start_stride = json_or(j, "stride", cfg.pool.start_stride);
    if (j.contains("hotspots")) {
        for (const auto& h : j.at("hotspots")) {
            if (!h.contains("video") || !h.contains("first") || !h.contains("last")) {
                throw ConfigError("hotspot entries need 'video', 'first', and 'last'");
            }
            cfg.hotspots.push_back(Hotspot{VideoId(h.at("video").get<std::string>()), h.at("first").get<std::int64_t>(),
                                           h.at("last").get<std::int64_t>(), json_or(h, "intensity", 1.0)});
        }
    }
    cfg.validate();
    return cfg;
}

StrategyConfig strategy_from_json(const Json& j) {
    StrategyConfig cfg;
    cfg.name = parse_strategy_name(json_or<std::string>(j, "name", "cutal"));
    cfg.ablation = Ablation::parse(json_or<std::string>(j, "ablate", ""));
    cfg.aggregation = parse_aggregation_mode(json_or<std::string>(j, "agg", "product"));
    cfg.delta = json_or(j, "delta", cfg.delta);
    cfg.uncertainty.tau_conf = json_or(j, "tau_conf", cfg.uncertainty.tau_conf);
    cfg.uncertainty.tau_iou = json_or(j, "tau_iou", cfg.uncertainty.tau_iou);
    cfg.uncertainty.strict_bidir = json_or(j, "strict_bidir", cfg.uncertainty.strict_bidir);
    cfg.uncertainty.filter_track_queries = json_or(j, "filter_track_queries", cfg.uncertainty.filter_track_queries);
    cfg.validate();
    return cfg;
}

std::vector<Clip> unlabeled_or_all(const std::optional<RoundState>& state, const PredictionSet& predictions) {
    if (state) return state->unlabeled();
    std::vector<Clip> out;
    for (const auto& [clip, preds] : predictions) out.push_back(clip);
    return out;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Clip-level active learning selection engine for multi-frame trackers", "clipal"};
    app.fallthrough();
    app.require_subcommand(1);

    std::optional<std::uint64_t> seed;
    bool verbose = false;
    app.add_option("--seed", seed, "Random seed");
    app.add_flag("-v,--verbose", verbose, "Print progress and warnings");
    app.set_config("--config", "", "TOML or JSON file with option defaults");
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        std::string path;
        if (arg == "--config" && i + 1 < argc) path = argv[i + 1];
        if (arg.rfind("--config=", 0) == 0) path = arg.substr(9);
        if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
            app.config_formatter(std::make_shared<JsonConfig>());
        }
    }

    // build-pool
    auto* build_pool_cmd = app.add_subcommand("build-pool", "Enumerate the clip pool of a dataset manifest");
    std::string bp_manifest, bp_out;
    int bp_t = 4, bp_delta = 5, bp_stride = 1;
    build_pool_cmd->add_option("--manifest", bp_manifest, "Manifest JSON")->required();
    build_pool_cmd->add_option("--T", bp_t, "Frames per clip")->capture_default_str();
    build_pool_cmd->add_option("--delta", bp_delta, "Intra-clip frame interval")->capture_default_str();
    build_pool_cmd->add_option("--stride", bp_stride, "Step between clip starts")->capture_default_str();
    build_pool_cmd->add_option("--out", bp_out, "Output pool JSON")->required();

    // score
    auto* score_cmd = app.add_subcommand("score", "Score the unlabeled pool and dump every component");
    std::string sc_predictions, sc_state, sc_out, sc_agg = "product", sc_ablate;
    UncertaintyFlags sc_unc;
    score_cmd->add_option("--predictions", sc_predictions, "Prediction file or directory")->required();
    score_cmd->add_option("--state", sc_state, "Round state; scores only its unlabeled clips");
    score_cmd->add_option("--agg", sc_agg, "product|sum")->capture_default_str();
    score_cmd->add_option("--ablate", sc_ablate, "Comma separated no_var,no_ent,no_bidir");
    score_cmd->add_option("--out", sc_out, "Output score dump JSON")->required();
    sc_unc.attach(score_cmd);

    // select
    auto* select_cmd = app.add_subcommand("select", "Select the next batch of clips to annotate");
    std::string se_strategy = "cutal", se_ablate, se_agg = "product", se_schedule, se_state, se_predictions, se_out;
    int se_delta = 4;
    UncertaintyFlags se_unc;
    select_cmd->add_option("--strategy", se_strategy, "cutal|random|entropy|coreset")->capture_default_str();
    select_cmd->add_option("--ablate", se_ablate, "Comma separated no_var,no_ent,no_bidir,no_temporal");
    select_cmd->add_option("--agg", se_agg, "product|sum")->capture_default_str();
    select_cmd->add_option("--delta", se_delta, "Candidate multiplier: keep the top delta*b clips")
        ->capture_default_str();
    select_cmd->add_option("--schedule", se_schedule, "Override the state's schedule, e.g. 5+5 or 20+10");
    select_cmd->add_option("--state", se_state, "Round state JSON")->required();
    select_cmd->add_option("--predictions", se_predictions, "Prediction file or directory");
    select_cmd->add_option("--out", se_out, "Output selection JSON")->required();
    se_unc.attach(select_cmd);

    // round
    auto* round_cmd = app.add_subcommand("round", "Create, advance, or inspect round state");
    round_cmd->require_subcommand(1);
    auto* round_init = round_cmd->add_subcommand("init", "Create round 0 state from a manifest");
    std::string ri_manifest, ri_schedule = "5+5", ri_out;
    int ri_t = 4, ri_delta = 5, ri_stride = 1;
    round_init->add_option("--manifest", ri_manifest, "Manifest JSON")->required();
    round_init->add_option("--T", ri_t, "Frames per clip")->capture_default_str();
    round_init->add_option("--delta", ri_delta, "Intra-clip frame interval")->capture_default_str();
    round_init->add_option("--stride", ri_stride, "Step between clip starts")->capture_default_str();
    round_init->add_option("--schedule", ri_schedule, "Budget schedule, e.g. 5+5 or 20+10")->capture_default_str();
    round_init->add_option("--out", ri_out, "Output state JSON")->required();
    auto* round_advance = round_cmd->add_subcommand("advance", "Label a selection and move to the next round");
    std::string ra_state, ra_selection, ra_out;
    round_advance->add_option("--state", ra_state, "Round state JSON")->required();
    round_advance->add_option("--selection", ra_selection, "Selection JSON written by select")->required();
    round_advance->add_option("--out", ra_out, "Output state JSON (defaults to --state)");
    auto* round_show = round_cmd->add_subcommand("show", "Summarize a round state");
    std::string rs_state;
    round_show->add_option("--state", rs_state, "Round state JSON")->required();

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "Synthetic scenarios");
    synth_cmd->require_subcommand(1);
    auto* synth_generate = synth_cmd->add_subcommand("generate", "Write a synthetic manifest and predictions");
    std::string sg_scenario, sg_out_dir;
    synth_generate->add_option("--scenario", sg_scenario, "Scenario JSON (its 'synthetic' object)")->required();
    synth_generate->add_option("--out-dir", sg_out_dir, "Output directory")->required();

    // simulate
    auto* simulate_cmd = app.add_subcommand("simulate", "Run a multi-round simulation of several strategies");
    std::string sim_scenario, sim_out, sim_csv;
    simulate_cmd->add_option("--scenario", sim_scenario, "Scenario JSON")->required();
    simulate_cmd->add_option("--out", sim_out, "Output report JSON")->required();
    simulate_cmd->add_option("--csv", sim_csv, "Also write selection positions as CSV");

    // report
    auto* report_cmd = app.add_subcommand("report", "Render a simulation report as a text table");
    std::string rep_report, rep_csv;
    report_cmd->add_option("--report", rep_report, "Report JSON written by simulate")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitValidation;
    }

    auto log = [&](const std::string& msg) {
        if (verbose) err << msg << '\n';
    };

    try {
        if (build_pool_cmd->parsed()) {
            const auto manifest = load_manifest(bp_manifest);
            const auto pool = build_pool(manifest, bp_t, bp_delta, bp_stride);
            save_pool(pool, bp_out);
            out << "pool: " << pool.size() << " clips from " << manifest.videos().size() << " videos\n";
        } else if (score_cmd->parsed()) {
            const auto predictions = load_prediction_set(sc_predictions);
            std::optional<RoundState> state;
            if (!sc_state.empty()) state = load_round_state(sc_state);
            const auto ucfg = sc_unc.config();
            const auto ablation = Ablation::parse(sc_ablate);
            if (ablation.no_temporal) throw ConfigError("no_temporal does not affect scoring");
            std::vector<RawScore> raw;
            for (const auto& clip : unlabeled_or_all(state, predictions)) {
                const auto it = predictions.find(clip);
                if (it == predictions.end()) throw ValidationError("no predictions for clip " + to_string(clip));
                raw.push_back({clip, score_clip_raw(it->second, ucfg)});
            }
            const auto scores = score_pool(raw, parse_aggregation_mode(sc_agg), ablation.mask());
            write_score_dump(scores, sc_out);
            out << "scored " << scores.size() << " clips\n";
        } else if (select_cmd->parsed()) {
            const auto state = load_round_state(se_state);
            StrategyConfig cfg;
            cfg.name = parse_strategy_name(se_strategy);
            cfg.ablation = Ablation::parse(se_ablate);
            cfg.aggregation = parse_aggregation_mode(se_agg);
            cfg.delta = se_delta;
            cfg.uncertainty = se_unc.config();
            cfg.rng_seed = seed.value_or(state.rng_seed());
            cfg.validate();
            const BudgetSchedule schedule =
                se_schedule.empty() ? state.schedule() : BudgetSchedule::parse(se_schedule, state.schedule().total_frames);
            const int length = state.pool().empty() ? 2 : state.pool().front().length();
            const auto budget = budget_for_round(schedule, state.round_index(), length);
            PredictionSet predictions;
            if (cfg.name != StrategyName::random) {
                if (se_predictions.empty()) throw ConfigError("--predictions is required for " + se_strategy);
                predictions = load_prediction_set(se_predictions);
                log("loaded predictions for " + std::to_string(predictions.size()) + " clips");
            }
            const auto sel = select(cfg, predictions, state, budget);
            for (const auto& w : sel.warnings) err << "warning: " << w << '\n';
            SelectionRecord record{cfg.label(), state.round_index(), budget, sel.clips, sel.scores, sel.warnings};
            write_selection(record, se_out);
            out << "round " << state.round_index() << ": selected " << sel.clips.size() << " of " << budget.clips
                << " clips (" << budget.frames << " frames) with " << cfg.label() << '\n';
        } else if (round_init->parsed()) {
            const auto manifest = load_manifest(ri_manifest);
            const auto pool = build_pool(manifest, ri_t, ri_delta, ri_stride);
            const auto schedule = BudgetSchedule::parse(ri_schedule, manifest.total_frames());
            RoundState state(0, {}, pool.clips(), schedule, {}, seed.value_or(0));
            save_round_state(state, ri_out);
            out << "round 0 state with " << pool.size() << " clips, schedule " << ri_schedule << '\n';
        } else if (round_advance->parsed()) {
            const auto state = load_round_state(ra_state);
            const auto record = load_selection(ra_selection);
            if (record.round_index != state.round_index()) {
                throw ValidationError("selection was made for round " + std::to_string(record.round_index) +
                                      " but the state is at round " + std::to_string(state.round_index()));
            }
            const auto next = advance_round(state, record.clips, record.strategy);
            save_round_state(next, ra_out.empty() ? ra_state : ra_out);
            out << "advanced to round " << next.round_index() << " with " << next.labeled().size()
                << " labeled clips\n";
        } else if (round_show->parsed()) {
            const auto state = load_round_state(rs_state);
            std::int64_t frames = 0;
            for (const auto& clip : state.labeled()) frames += clip.annotation_cost();
            out << "round: " << state.round_index() << '\n'
                << "pool: " << state.pool().size() << " clips\n"
                << "labeled: " << state.labeled().size() << " clips (" << frames << " frames of "
                << state.schedule().total_frames << ")\n"
                << "schedule: " << to_string(state.schedule()) << '\n'
                << "seed: " << state.rng_seed() << '\n';
            for (const auto& h : state.history()) {
                out << "  round " << h.round_index << ": " << h.strategy << " selected " << h.selected.size()
                    << " clips\n";
            }
        } else if (synth_generate->parsed()) {
            const Json scenario = parse_json_file(sg_scenario);
            auto scfg = synthetic_from_json(scenario.contains("synthetic") ? scenario.at("synthetic") : scenario);
            if (seed) scfg.rng_seed = *seed;
            const auto data = generate_synthetic(scfg);
            const std::filesystem::path dir(sg_out_dir);
            std::error_code ec;
            std::filesystem::create_directories(dir, ec);
            if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
            save_manifest(data.manifest, dir / "manifest.json");
            save_pool(data.pool, dir / "pool.json");
            save_prediction_set(data.predictions, dir / "predictions");
            out << "wrote " << data.predictions.size() << " clip prediction files to " << (dir / "predictions").string()
                << '\n';
        } else if (simulate_cmd->parsed()) {
            const Json scenario = parse_json_file(sim_scenario);
            std::optional<SyntheticDataset> synthetic;
            std::optional<DatasetManifest> manifest;
            std::optional<ClipPool> pool;
            PredictionSet predictions;
            std::vector<Hotspot> hotspots;
            if (scenario.contains("synthetic")) {
                auto scfg = synthetic_from_json(scenario.at("synthetic"));
                if (seed) scfg.rng_seed = *seed;
                hotspots = scfg.hotspots;
                synthetic = generate_synthetic(scfg);
                manifest = synthetic->manifest;
                pool = synthetic->pool;
                predictions = std::move(synthetic->predictions);
            } else {
                if (!scenario.contains("manifest") || !scenario.contains("predictions")) {
                    throw ConfigError("scenario needs either 'synthetic' or both 'manifest' and 'predictions'");
                }
                manifest = load_manifest(scenario.at("manifest").get<std::string>());
                pool = build_pool(*manifest, json_or(scenario, "T", 4), json_or(scenario, "delta", 5),
                                  json_or(scenario, "stride", 1));
                predictions = load_prediction_set(scenario.at("predictions").get<std::string>());
            }
            SimulationConfig sim{BudgetSchedule::parse(json_or<std::string>(scenario, "schedule", "5+5"),
                                                       manifest->total_frames()),
                                 json_or(scenario, "rounds", 3),
                                 seed.value_or(json_or<std::uint64_t>(scenario, "seed", 0)),
                                 json_or<std::string>(scenario, "initial_round", "random") == "strategy"
                                     ? InitialRound::strategy
                                     : InitialRound::random,
                                 hotspots};
            std::vector<StrategyConfig> strategies;
            if (scenario.contains("strategies")) {
                for (const auto& s : scenario.at("strategies")) strategies.push_back(strategy_from_json(s));
            } else {
                strategies.push_back(StrategyConfig{});
            }
            log("simulating " + std::to_string(strategies.size()) + " arms over " + std::to_string(pool->size()) +
                " clips");
            const auto report = run_simulation(*manifest, *pool, predictions, strategies, sim);
            const std::string text = report_to_json(report);
            write_text_file(sim_out, text);
            if (!sim_csv.empty()) write_text_file(sim_csv, report_positions_csv(report));
            out << render_report_table(text);
        } else if (report_cmd->parsed()) {
            out << render_report_table(read_text_file(rep_report));
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.category() == ErrorCategory::io ? kExitIo : kExitValidation;
    } catch (const Json::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    return kExitOk;
}

}  // namespace clipal::cli
