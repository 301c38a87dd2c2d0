#include "clipal/prediction_io.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "clipal/errors.hpp"

namespace clipal {

using Json = nlohmann::ordered_json;

namespace {

const Json& field(const Json& obj, const char* key, const std::string& where) {
    if (!obj.is_object()) throw SchemaError(where + ": expected a JSON object");
    const auto it = obj.find(key);
    if (it == obj.end()) throw SchemaError(where + ": missing field '" + key + "'");
    return *it;
}

template <typename T>
T get_as(const Json& obj, const char* key, const std::string& where) {
    const Json& v = field(obj, key, where);
    try {
        if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) throw SchemaError(where + ": field '" + key + "' must be an integer");
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) throw SchemaError(where + ": field '" + key + "' must be a number");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw SchemaError(where + ": field '" + key + "' must be a string");
        }
        return v.get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(where + ": field '" + key + "': " + e.what());
    }
}

std::vector<double> number_array(const Json& v, const std::string& where) {
    if (!v.is_array()) throw SchemaError(where + ": expected an array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& x : v) {
        if (!x.is_number()) throw SchemaError(where + ": expected an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

Json parse_json(const std::string& text, const std::string& where) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(where + ": " + e.what());
    }
}

Json clip_to_json(const Clip& clip) {
    Json j;
    j["video"] = clip.video().str();
    j["start"] = clip.start();
    j["T"] = clip.length();
    j["delta"] = clip.interval();
    return j;
}

Clip clip_from_json(const Json& j, const std::string& where) {
    return Clip(VideoId(get_as<std::string>(j, "video", where)), get_as<std::int64_t>(j, "start", where),
                get_as<int>(j, "T", where), get_as<int>(j, "delta", where));
}

Json query_to_json(const QueryPrediction& q) {
    Json j;
    j["kind"] = to_string(q.kind());
    j["id"] = q.track_id() ? Json(*q.track_id()) : Json(nullptr);
    j["probs"] = q.class_probs();
    const auto& b = q.box();
    j["box"] = {b.x_min, b.y_min, b.x_max, b.y_max};
    j["emb"] = q.embedding() ? Json(*q.embedding()) : Json(nullptr);
    return j;
}

QueryPrediction query_from_json(const Json& j, const std::string& where) {
    const auto kind = parse_query_kind(get_as<std::string>(j, "kind", where));
    std::optional<std::int64_t> id;
    const Json& id_field = field(j, "id", where);
    if (!id_field.is_null()) {
        if (!id_field.is_number_integer()) throw SchemaError(where + ": 'id' must be an integer or null");
        id = id_field.get<std::int64_t>();
    }
    auto probs = number_array(field(j, "probs", where), where + " probs");
    const auto box = number_array(field(j, "box", where), where + " box");
    if (box.size() != 4) throw SchemaError(where + ": 'box' must have 4 entries");
    std::optional<std::vector<double>> emb;
    if (const auto it = j.find("emb"); it != j.end() && !it->is_null()) {
        emb = number_array(*it, where + " emb");
    }
    return QueryPrediction(kind, id, std::move(probs), BoundingBox(box[0], box[1], box[2], box[3]),
                           std::move(emb));
}

struct PendingClip {
    Clip clip;
    std::map<std::int64_t, FramePredictions> forward;
    std::map<std::int64_t, FramePredictions> backward;
    bool has_backward = false;
};

ClipPredictions finish(PendingClip&& pending) {
    std::vector<FramePredictions> fwd;
    for (auto& [frame, preds] : pending.forward) fwd.push_back(std::move(preds));
    std::optional<std::vector<FramePredictions>> bwd;
    if (pending.has_backward) {
        bwd.emplace();
        for (auto& [frame, preds] : pending.backward) bwd->push_back(std::move(preds));
    }
    return ClipPredictions(pending.clip, std::move(fwd), std::move(bwd));
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    return in;
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("failed reading " + path.string());
    return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("failed writing " + path.string());
}

std::vector<ClipPredictions> parse_prediction_stream(std::istream& in, const std::string& source) {
    std::vector<ClipPredictions> out;
    std::optional<PendingClip> pending;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const std::string where = source + ":" + std::to_string(line_no);
        const Json j = parse_json(line, where);
        if (!j.is_object()) throw SchemaError(where + ": each line must be a JSON object");

        if (j.contains("schema")) {
            const int schema = get_as<int>(j, "schema", where);
            if (schema != kPredictionSchemaVersion) {
                throw SchemaError(where + ": unsupported schema version " + std::to_string(schema));
            }
            if (pending) out.push_back(finish(std::move(*pending)));
            pending.emplace(PendingClip{clip_from_json(j, where), {}, {}, false});
            continue;
        }
        if (!pending) throw SchemaError(where + ": frame record before any header line");

        const auto dir = get_as<std::string>(j, "dir", where);
        const auto frame = get_as<std::int64_t>(j, "frame", where);
        const Json& queries_json = field(j, "queries", where);
        if (!queries_json.is_array()) throw SchemaError(where + ": 'queries' must be an array");
        std::vector<QueryPrediction> queries;
        queries.reserve(queries_json.size());
        for (const auto& q : queries_json) queries.push_back(query_from_json(q, where));

        std::map<std::int64_t, FramePredictions>* target = nullptr;
        if (dir == "fwd") {
            target = &pending->forward;
        } else if (dir == "bwd") {
            target = &pending->backward;
            pending->has_backward = true;
        } else {
            throw SchemaError(where + ": 'dir' must be \"fwd\" or \"bwd\"");
        }
        if (!target->emplace(frame, FramePredictions(frame, std::move(queries))).second) {
            throw SchemaError(where + ": duplicate " + dir + " record for frame " + std::to_string(frame));
        }
    }
    if (in.bad()) throw IoError("failed reading " + source);
    if (pending) out.push_back(finish(std::move(*pending)));
    return out;
}

void write_clip_predictions(std::ostream& out, const ClipPredictions& preds) {
    Json header;
    header["schema"] = kPredictionSchemaVersion;
    const Json clip = clip_to_json(preds.clip());
    for (const auto& [k, v] : clip.items()) header[k] = v;
    out << header.dump() << '\n';
    auto write_frames = [&](const std::vector<FramePredictions>& frames, const char* dir) {
        for (const auto& frame : frames) {
            Json line;
            line["dir"] = dir;
            line["frame"] = frame.frame_index();
            line["queries"] = Json::array();
            for (const auto& q : frame.queries()) line["queries"].push_back(query_to_json(q));
            out << line.dump() << '\n';
        }
    };
    write_frames(preds.forward(), "fwd");
    if (preds.backward()) write_frames(*preds.backward(), "bwd");
}

ClipPredictions load_clip_predictions(const std::filesystem::path& path) {
    auto in = open_in(path);
    auto clips = parse_prediction_stream(in, path.string());
    if (clips.size() != 1) {
        throw SchemaError(path.string() + ": expected exactly one clip, found " + std::to_string(clips.size()));
    }
    return std::move(clips.front());
}

void save_clip_predictions(const ClipPredictions& preds, const std::filesystem::path& path) {
    std::ostringstream out;
    write_clip_predictions(out, preds);
    write_text_file(path, out.str());
}

PredictionSet load_prediction_set(const std::filesystem::path& path) {
    std::vector<std::filesystem::path> files;
    std::error_code ec;
    if (std::filesystem::is_directory(path, ec)) {
        for (const auto& entry : std::filesystem::directory_iterator(path, ec)) {
            if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
        }
        if (ec) throw IoError("cannot list " + path.string() + ": " + ec.message());
        std::sort(files.begin(), files.end());
    } else {
        files.push_back(path);
    }
    PredictionSet out;
    for (const auto& file : files) {
        auto in = open_in(file);
        for (auto& preds : parse_prediction_stream(in, file.string())) {
            const Clip clip = preds.clip();
            if (!out.emplace(clip, std::move(preds)).second) {
                throw SchemaError("duplicate predictions for clip " + to_string(clip) + " in " + file.string());
            }
        }
    }
    return out;
}

void save_prediction_set(const PredictionSet& predictions, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    for (const auto& [clip, preds] : predictions) {
        std::string name = clip.video().str();
        for (char& ch : name) {
            const bool ok = std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '.';
            if (!ok) ch = '_';
        }
        name += "_" + std::to_string(clip.start()) + "_T" + std::to_string(clip.length()) + "_d" +
                std::to_string(clip.interval()) + ".jsonl";
        save_clip_predictions(preds, dir / name);
    }
}

std::string serialize_round_state(const RoundState& state) {
    Json j;
    j["schema"] = kStateSchemaVersion;
    j["round"] = state.round_index();
    j["rng_seed"] = state.rng_seed();
    j["schedule"] = {{"initial_fraction", state.schedule().initial_fraction},
                     {"increment_fraction", state.schedule().increment_fraction},
                     {"total_frames", state.schedule().total_frames}};
    j["pool"] = Json::array();
    for (const auto& clip : state.pool()) j["pool"].push_back(clip_to_json(clip));
    j["labeled"] = Json::array();
    for (const auto& clip : state.labeled()) j["labeled"].push_back(clip_to_json(clip));
    j["history"] = Json::array();
    for (const auto& h : state.history()) {
        Json entry;
        entry["round"] = h.round_index;
        entry["strategy"] = h.strategy;
        entry["selected"] = Json::array();
        for (const auto& clip : h.selected) entry["selected"].push_back(clip_to_json(clip));
        j["history"].push_back(std::move(entry));
    }
    return j.dump(1) + "\n";
}

RoundState parse_round_state(const std::string& text) {
    const std::string where = "round state";
    const Json j = parse_json(text, where);
    const int schema = get_as<int>(j, "schema", where);
    if (schema != kStateSchemaVersion) throw SchemaError("unsupported round state schema " + std::to_string(schema));
    const Json& sched = field(j, "schedule", where);
    BudgetSchedule schedule(get_as<double>(sched, "initial_fraction", where),
                            get_as<double>(sched, "increment_fraction", where),
                            get_as<std::int64_t>(sched, "total_frames", where));
    auto clips = [&](const Json& arr, const std::string& what) {
        if (!arr.is_array()) throw SchemaError(where + ": '" + what + "' must be an array");
        std::vector<Clip> out;
        out.reserve(arr.size());
        for (const auto& c : arr) out.push_back(clip_from_json(c, where + " " + what));
        return out;
    };
    auto pool = clips(field(j, "pool", where), "pool");
    const auto labeled_list = clips(field(j, "labeled", where), "labeled");
    std::set<Clip> labeled(labeled_list.begin(), labeled_list.end());
    if (labeled.size() != labeled_list.size()) throw InvariantViolation("duplicate labeled clip in round state");
    std::vector<HistoryEntry> history;
    const Json& hist = field(j, "history", where);
    if (!hist.is_array()) throw SchemaError(where + ": 'history' must be an array");
    for (const auto& h : hist) {
        history.push_back(HistoryEntry{get_as<int>(h, "round", where), clips(field(h, "selected", where), "selected"),
                                       get_as<std::string>(h, "strategy", where)});
    }
    const Json& seed = field(j, "rng_seed", where);
    if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0)) {
        throw SchemaError(where + ": 'rng_seed' must be a non-negative integer");
    }
    return RoundState(get_as<int>(j, "round", where), std::move(labeled), std::move(pool), schedule,
                      std::move(history), seed.get<std::uint64_t>());
}

void save_round_state(const RoundState& state, const std::filesystem::path& path) {
    write_text_file(path, serialize_round_state(state));
}

RoundState load_round_state(const std::filesystem::path& path) {
    return parse_round_state(read_text_file(path));
}

namespace {

Json score_to_json(const ClipScore& s) {
    Json j;
    j["h_var"] = s.raw().h_var;
    j["h_e"] = s.raw().h_e;
    j["d_bi"] = s.raw().d_bi;
    j["phi_h_e"] = s.normalized().phi_h_e;
    j["phi_h_var"] = s.normalized().phi_h_var;
    j["phi_d_bi"] = s.normalized().phi_d_bi;
    j["aggregate"] = s.aggregate();
    j["mode"] = to_string(s.mode());
    return j;
}

ClipScore score_from_json(const Clip& clip, const Json& j, const std::string& where) {
    return ClipScore(clip,
                     RawComponents{get_as<double>(j, "h_var", where), get_as<double>(j, "h_e", where),
                                   get_as<double>(j, "d_bi", where)},
                     NormalizedComponents{get_as<double>(j, "phi_h_var", where), get_as<double>(j, "phi_h_e", where),
                                          get_as<double>(j, "phi_d_bi", where)},
                     parse_aggregation_mode(get_as<std::string>(j, "mode", where)));
}

}  // namespace

std::string serialize_selection(const SelectionRecord& record) {
    if (record.clips.empty()) throw ValidationError("refusing to write an empty selection");
    Json j;
    j["schema"] = kStateSchemaVersion;
    j["strategy"] = record.strategy;
    j["round"] = record.round_index;
    if (record.budget) j["budget"] = {{"frames", record.budget->frames}, {"clips", record.budget->clips}};
    j["selected"] = Json::array();
    for (const auto& clip : record.clips) {
        Json entry = clip_to_json(clip);
        const auto it = std::find_if(record.scores.begin(), record.scores.end(),
                                     [&](const ClipScore& s) { return s.clip() == clip; });
        if (it != record.scores.end()) entry["score"] = score_to_json(*it);
        j["selected"].push_back(std::move(entry));
    }
    j["warnings"] = record.warnings;
    return j.dump(1) + "\n";
}

void write_selection(const SelectionRecord& record, const std::filesystem::path& path) {
    write_text_file(path, serialize_selection(record));
}

void write_selection(const std::vector<Clip>& selection, const std::vector<ClipScore>& scores,
                     const std::filesystem::path& path) {
    SelectionRecord record;
    record.clips = selection;
    record.scores = scores;
    write_selection(record, path);
}

SelectionRecord load_selection(const std::filesystem::path& path) {
    const std::string where = path.string();
    const Json j = parse_json(read_text_file(path), where);
    SelectionRecord record;
    record.strategy = j.contains("strategy") ? get_as<std::string>(j, "strategy", where) : "";
    record.round_index = j.contains("round") ? get_as<int>(j, "round", where) : 0;
    if (j.contains("budget")) {
        const Json& b = j["budget"];
        record.budget = RoundBudget{get_as<std::int64_t>(b, "frames", where), get_as<int>(b, "clips", where)};
    }
    const Json& sel = field(j, "selected", where);
    if (!sel.is_array()) throw SchemaError(where + ": 'selected' must be an array");
    for (const auto& c : sel) {
        record.clips.push_back(clip_from_json(c, where));
        if (c.contains("score")) record.scores.push_back(score_from_json(record.clips.back(), c["score"], where));
    }
    if (j.contains("warnings")) {
        for (const auto& w : j["warnings"]) {
            if (!w.is_string()) throw SchemaError(where + ": warnings must be strings");
            record.warnings.push_back(w.get<std::string>());
        }
    }
    return record;
}

DatasetManifest parse_manifest(const std::string& text) {
    const std::string where = "manifest";
    const Json j = parse_json(text, where);
    if (!j.is_array()) throw SchemaError("manifest must be a JSON array of {\"video\", \"frames\"}");
    std::vector<VideoEntry> videos;
    for (const auto& v : j) {
        videos.push_back(VideoEntry{VideoId(get_as<std::string>(v, "video", where)),
                                    get_as<std::int64_t>(v, "frames", where)});
    }
    return DatasetManifest(std::move(videos));
}

std::string serialize_manifest(const DatasetManifest& manifest) {
    Json j = Json::array();
    for (const auto& v : manifest.videos()) j.push_back({{"video", v.video.str()}, {"frames", v.frame_count}});
    return j.dump(1) + "\n";
}

DatasetManifest load_manifest(const std::filesystem::path& path) { return parse_manifest(read_text_file(path)); }

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
    write_text_file(path, serialize_manifest(manifest));
}

std::string serialize_pool(const ClipPool& pool) {
    Json j;
    j["T"] = pool.params().length;
    j["delta"] = pool.params().interval;
    j["stride"] = pool.params().start_stride;
    j["clips"] = Json::array();
    for (const auto& clip : pool.clips()) j["clips"].push_back({{"video", clip.video().str()}, {"start", clip.start()}});
    return j.dump(1) + "\n";
}

ClipPool parse_pool(const std::string& text) {
    const std::string where = "pool";
    const Json j = parse_json(text, where);
    PoolParams params{get_as<int>(j, "T", where), get_as<int>(j, "delta", where), get_as<int>(j, "stride", where)};
    const Json& arr = field(j, "clips", where);
    if (!arr.is_array()) throw SchemaError("pool: 'clips' must be an array");
    std::vector<Clip> clips;
    for (const auto& c : arr) {
        clips.emplace_back(VideoId(get_as<std::string>(c, "video", where)), get_as<std::int64_t>(c, "start", where),
                           params.length, params.interval);
    }
    return ClipPool(std::move(clips), params);
}

void save_pool(const ClipPool& pool, const std::filesystem::path& path) { write_text_file(path, serialize_pool(pool)); }

ClipPool load_pool(const std::filesystem::path& path) { return parse_pool(read_text_file(path)); }

std::string serialize_score_dump(const std::vector<ClipScore>& scores) {
    Json j = Json::array();
    for (const auto& s : scores) {
        Json entry = clip_to_json(s.clip());
        const Json fields = score_to_json(s);
        for (const auto& [k, v] : fields.items()) entry[k] = v;
        j.push_back(std::move(entry));
    }
    return j.dump(1) + "\n";
}

void write_score_dump(const std::vector<ClipScore>& scores, const std::filesystem::path& path) {
    write_text_file(path, serialize_score_dump(scores));
}

}  // namespace clipal
