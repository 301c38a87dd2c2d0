#pragma once
// File formats.
//
// Prediction files are JSON Lines. A header line
//   {"schema": 1, "video": "...", "start": t, "T": n, "delta": d}
// is followed by one line per (direction, sampled frame):
//   {"dir": "fwd"|"bwd", "frame": f, "queries": [{"kind": "track"|"object",
//    "id": int|null, "probs": [...], "box": [x_min,y_min,x_max,y_max],
//    "emb": [...]|null}]}
// A stream may hold several clips back to back; each header starts a new clip.
//
// Round state, selections, manifests, pools, and score dumps are JSON.
// Doubles are written in shortest round-trip form, so reloading is bit-exact.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "clipal/clip_pool.hpp"
#include "clipal/model.hpp"
#include "clipal/scoring.hpp"
#include "clipal/strategies.hpp"

namespace clipal {

inline constexpr int kPredictionSchemaVersion = 1;
inline constexpr int kStateSchemaVersion = 1;

std::vector<ClipPredictions> parse_prediction_stream(std::istream& in, const std::string& source = "<stream>");
void write_clip_predictions(std::ostream& out, const ClipPredictions& preds);

// Exactly one clip per file. Throws IoError, ParseError, SchemaError, MalformedProbabilities.
ClipPredictions load_clip_predictions(const std::filesystem::path& path);
void save_clip_predictions(const ClipPredictions& preds, const std::filesystem::path& path);

// A single prediction file, or every *.jsonl file in a directory.
PredictionSet load_prediction_set(const std::filesystem::path& path);
// One file per clip named <video>_<start>.jsonl. Creates the directory.
void save_prediction_set(const PredictionSet& predictions, const std::filesystem::path& dir);

std::string serialize_round_state(const RoundState& state);
RoundState parse_round_state(const std::string& text);
void save_round_state(const RoundState& state, const std::filesystem::path& path);
RoundState load_round_state(const std::filesystem::path& path);

struct SelectionRecord {
    std::string strategy;
    int round_index = 0;
    std::optional<RoundBudget> budget;
    std::vector<Clip> clips;
    std::vector<ClipScore> scores;  // matched to clips by identity; may be empty
    std::vector<std::string> warnings;
};

// Throws ValidationError for an empty selection and IoError on write failure.
std::string serialize_selection(const SelectionRecord& record);
void write_selection(const SelectionRecord& record, const std::filesystem::path& path);
void write_selection(const std::vector<Clip>& selection, const std::vector<ClipScore>& scores,
                     const std::filesystem::path& path);
SelectionRecord load_selection(const std::filesystem::path& path);

// JSON array of {"video": string, "frames": integer}.
DatasetManifest parse_manifest(const std::string& text);
std::string serialize_manifest(const DatasetManifest& manifest);
DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

std::string serialize_pool(const ClipPool& pool);
ClipPool parse_pool(const std::string& text);
void save_pool(const ClipPool& pool, const std::filesystem::path& path);
ClipPool load_pool(const std::filesystem::path& path);

// One record per clip; normalized columns in the order phi_h_e, phi_h_var, phi_d_bi.
std::string serialize_score_dump(const std::vector<ClipScore>& scores);
void write_score_dump(const std::vector<ClipScore>& scores, const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace clipal
