#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mirsom/analysis.hpp"
#include "mirsom/common.hpp"
#include "mirsom/notes.hpp"
#include "mirsom/pitch.hpp"
#include "mirsom/som.hpp"
#include "mirsom/spectral.hpp"
#include "mirsom/timbre.hpp"
#include "mirsom/tonal.hpp"

namespace mirsom {

constexpr const char* kTimbreStoreSchema = "mirsom.timbre_store/1";
constexpr const char* kTonalStoreSchema = "mirsom.tonal_store/1";
constexpr const char* kGridSchema = "mirsom.som_grid/1";
constexpr const char* kReportSchema = "mirsom.report/1";

// Every stage parameter in one place; serialized alongside each output so a
// result can always be traced to the settings that produced it.
struct RunConfig {
    std::uint64_t seed = 1;

    SpectralOptions spectral;
    TimbreOptions timbre;
    PitchOptions pitch;
    NoteOptions notes;
    TonalOptions tonal;

    std::size_t tonal_rows = 26, tonal_cols = 26;
    std::size_t timbre_rows = 15, timbre_cols = 15;
    TrainOptions train;

    void validate() const {
        if (spectral.frame_seconds <= 0.0 || pitch.window_s <= 0.0 || pitch.hop_s <= 0.0 ||
            notes.min_event_s <= 0.0 || notes.min_note_s <= 0.0)
            throw UsageError("config: durations must be positive");
        if (tonal_rows < 2 || tonal_cols < 2 || timbre_rows < 2 || timbre_cols < 2)
            throw UsageError("config: map dimensions must be at least 2");
        if (pitch.fmin_hz <= 0.0 || pitch.fmax_hz <= pitch.fmin_hz)
            throw UsageError("config: need 0 < fmin < fmax");
        if (train.cycles == 0) throw UsageError("config: training cycles must be positive");
    }
};

inline void to_json(nlohmann::json& j, const RunConfig& c) {
    j = nlohmann::json{
        {"seed", c.seed},
        {"frame_seconds", c.spectral.frame_seconds},
        {"hann_window", c.spectral.hann_window},
        {"partial_rel_threshold", c.timbre.partial_rel_threshold},
        {"a_ref", c.timbre.a_ref},
        {"pitch_window_s", c.pitch.window_s},
        {"pitch_hop_s", c.pitch.hop_s},
        {"fmin_hz", c.pitch.fmin_hz},
        {"fmax_hz", c.pitch.fmax_hz},
        {"voicing_threshold", c.pitch.voicing_threshold},
        {"dip_threshold", c.pitch.dip_threshold},
        {"min_event_s", c.notes.min_event_s},
        {"max_dev_cents", c.notes.max_dev_cents},
        {"bridge_frames", c.notes.bridge_frames},
        {"min_note_s", c.notes.min_note_s},
        {"max_interval_cents", c.notes.max_interval_cents},
        {"min_melody_notes", c.tonal.min_melody_notes},
        {"tonal_rows", c.tonal_rows},
        {"tonal_cols", c.tonal_cols},
        {"timbre_rows", c.timbre_rows},
        {"timbre_cols", c.timbre_cols},
        {"cycles", c.train.cycles},
        {"alpha_start", c.train.alpha_start},
        {"alpha_end", c.train.alpha_end},
        {"sigma_end", c.train.sigma_end},
    };
}

inline void from_json(const nlohmann::json& j, RunConfig& c) {
    c.seed = j.value("seed", c.seed);
    c.spectral.frame_seconds = j.value("frame_seconds", c.spectral.frame_seconds);
    c.spectral.hann_window = j.value("hann_window", c.spectral.hann_window);
    c.timbre.partial_rel_threshold = j.value("partial_rel_threshold", c.timbre.partial_rel_threshold);
    c.timbre.a_ref = j.value("a_ref", c.timbre.a_ref);
    c.pitch.window_s = j.value("pitch_window_s", c.pitch.window_s);
    c.pitch.hop_s = j.value("pitch_hop_s", c.pitch.hop_s);
    c.pitch.fmin_hz = j.value("fmin_hz", c.pitch.fmin_hz);
    c.pitch.fmax_hz = j.value("fmax_hz", c.pitch.fmax_hz);
    c.pitch.voicing_threshold = j.value("voicing_threshold", c.pitch.voicing_threshold);
    c.pitch.dip_threshold = j.value("dip_threshold", c.pitch.dip_threshold);
    c.notes.min_event_s = j.value("min_event_s", c.notes.min_event_s);
    c.notes.max_dev_cents = j.value("max_dev_cents", c.notes.max_dev_cents);
    c.notes.bridge_frames = j.value("bridge_frames", c.notes.bridge_frames);
    c.notes.min_note_s = j.value("min_note_s", c.notes.min_note_s);
    c.notes.max_interval_cents = j.value("max_interval_cents", c.notes.max_interval_cents);
    c.tonal.min_melody_notes = j.value("min_melody_notes", c.tonal.min_melody_notes);
    c.tonal_rows = j.value("tonal_rows", c.tonal_rows);
    c.tonal_cols = j.value("tonal_cols", c.tonal_cols);
    c.timbre_rows = j.value("timbre_rows", c.timbre_rows);
    c.timbre_cols = j.value("timbre_cols", c.timbre_cols);
    c.train.cycles = j.value("cycles", c.train.cycles);
    c.train.alpha_start = j.value("alpha_start", c.train.alpha_start);
    c.train.alpha_end = j.value("alpha_end", c.train.alpha_end);
    c.train.sigma_end = j.value("sigma_end", c.train.sigma_end);
}

inline std::string config_hash(const RunConfig& c) {
    nlohmann::json j = c;
    return fnv1a64_hex(j.dump());
}

namespace store_detail {

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path.string());
    out << text;
    if (!out) throw DataError("write failed: " + path.string());
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

inline void check_schema(const nlohmann::json& j, const std::string& expected,
                         const std::filesystem::path& path) {
    const std::string got = j.value("schema", "");
    if (got != expected)
        throw ValidationError(path.string() + ": expected schema " + expected + ", found " +
                              (got.empty() ? "<none>" : got));
}

inline void check_config_hash(const nlohmann::json& j, const std::string& expected,
                              const std::filesystem::path& path) {
    if (expected.empty()) return;
    const std::string got = j.value("config_hash", "");
    if (got != expected)
        throw ValidationError(path.string() + ": config hash " + got +
                              " does not match the current run config " + expected +
                              "; stores from different configs cannot be mixed");
}

}  // namespace store_detail

struct PieceTimbre {
    std::string id;
    std::string group;
    TimbreVector features;
    std::size_t frame_count = 0;
};

struct TimbreStore {
    std::string config_hash;
    std::vector<PieceTimbre> pieces;
};

inline void save_timbre_store(const std::filesystem::path& path, const TimbreStore& store,
                              const RunConfig& config) {
    nlohmann::json pieces = nlohmann::json::array();
    for (const auto& p : store.pieces) {
        nlohmann::json rec{{"id", p.id}, {"group", p.group}, {"frame_count", p.frame_count}};
        const auto vals = p.features.as_array();
        const auto& names = TimbreVector::field_names();
        for (std::size_t k = 0; k < vals.size(); ++k) rec[names[k]] = vals[k];
        pieces.push_back(std::move(rec));
    }
    nlohmann::json j{{"schema", kTimbreStoreSchema},
                     {"config_hash", store.config_hash},
                     {"config", config},
                     {"pieces", pieces}};
    store_detail::write_text_file(path, j.dump(1));
}

inline TimbreStore load_timbre_store(const std::filesystem::path& path,
                                     const std::string& expected_hash = "") {
    const auto j = store_detail::read_json_file(path);
    store_detail::check_schema(j, kTimbreStoreSchema, path);
    store_detail::check_config_hash(j, expected_hash, path);
    TimbreStore store;
    store.config_hash = j.value("config_hash", "");
    for (const auto& rec : j.at("pieces")) {
        PieceTimbre p;
        p.id = rec.at("id").get<std::string>();
        p.group = rec.at("group").get<std::string>();
        p.frame_count = rec.value("frame_count", std::size_t{0});
        p.features.centroid_mean = rec.at("centroid_mean").get<double>();
        p.features.centroid_std = rec.at("centroid_std").get<double>();
        p.features.roughness_mean = rec.at("roughness_mean").get<double>();
        p.features.roughness_std = rec.at("roughness_std").get<double>();
        p.features.sharpness_mean = rec.at("sharpness_mean").get<double>();
        p.features.sharpness_std = rec.at("sharpness_std").get<double>();
        p.features.loudness_mean = rec.at("loudness_mean").get<double>();
        p.features.loudness_std = rec.at("loudness_std").get<double>();
        store.pieces.push_back(std::move(p));
    }
    return store;
}

struct PieceTonal {
    std::string id;
    std::string group;
    TonalSystem system;
};

struct TonalStore {
    std::string config_hash;
    std::vector<PieceTonal> pieces;
};

inline void save_tonal_store(const std::filesystem::path& path, const TonalStore& store,
                             const RunConfig& config) {
    nlohmann::json pieces = nlohmann::json::array();
    for (const auto& p : store.pieces)
        pieces.push_back(nlohmann::json{{"id", p.id},
                                        {"group", p.group},
                                        {"octave_base_cents", p.system.octave_base_cents},
                                        {"total_frames", p.system.total_frames},
                                        {"bins", p.system.bins}});
    nlohmann::json j{{"schema", kTonalStoreSchema},
                     {"config_hash", store.config_hash},
                     {"config", config},
                     {"pieces", pieces}};
    store_detail::write_text_file(path, j.dump(1));
}

inline TonalStore load_tonal_store(const std::filesystem::path& path,
                                   const std::string& expected_hash = "") {
    const auto j = store_detail::read_json_file(path);
    store_detail::check_schema(j, kTonalStoreSchema, path);
    store_detail::check_config_hash(j, expected_hash, path);
    TonalStore store;
    store.config_hash = j.value("config_hash", "");
    for (const auto& rec : j.at("pieces")) {
        PieceTonal p;
        p.id = rec.at("id").get<std::string>();
        p.group = rec.at("group").get<std::string>();
        p.system.octave_base_cents = rec.at("octave_base_cents").get<double>();
        p.system.total_frames = rec.value("total_frames", std::size_t{0});
        p.system.bins = rec.at("bins").get<std::vector<double>>();
        if (p.system.bins.size() != kTonalBins)
            throw ValidationError(path.string() + ": piece " + p.id + " has " +
                                  std::to_string(p.system.bins.size()) + " bins, expected 1200");
        store.pieces.push_back(std::move(p));
    }
    return store;
}

inline void save_grid(const std::filesystem::path& path, const SomGrid& grid,
                      const std::string& kind, const std::string& cfg_hash,
                      const TrainOptions& train,
                      const std::optional<NormalizationRecord>& norm = std::nullopt) {
    nlohmann::json j{{"schema", kGridSchema},
                     {"config_hash", cfg_hash},
                     {"kind", kind},
                     {"rows", grid.rows},
                     {"cols", grid.cols},
                     {"dim", grid.dim},
                     {"seed", grid.rng_seed},
                     {"cycles_trained", grid.cycles_trained},
                     {"alpha_start", train.alpha_start},
                     {"alpha_end", train.alpha_end},
                     {"sigma_end", train.sigma_end},
                     {"weights", grid.weights}};
    if (norm) {
        j["normalization"] = {{"means", norm->means},
                              {"stds", norm->stds},
                              {"zero_variance", norm->zero_variance}};
    }
    store_detail::write_text_file(path, j.dump(1));
}

struct LoadedGrid {
    SomGrid grid;
    std::string kind;
    std::string config_hash;
    std::optional<NormalizationRecord> normalization;
};

inline LoadedGrid load_grid(const std::filesystem::path& path,
                            const std::string& expected_hash = "") {
    const auto j = store_detail::read_json_file(path);
    store_detail::check_schema(j, kGridSchema, path);
    store_detail::check_config_hash(j, expected_hash, path);
    LoadedGrid lg;
    lg.kind = j.value("kind", "");
    lg.config_hash = j.value("config_hash", "");
    lg.grid.rows = j.at("rows").get<std::size_t>();
    lg.grid.cols = j.at("cols").get<std::size_t>();
    lg.grid.dim = j.at("dim").get<std::size_t>();
    lg.grid.rng_seed = j.at("seed").get<std::uint64_t>();
    lg.grid.cycles_trained = j.value("cycles_trained", std::size_t{0});
    lg.grid.weights = j.at("weights").get<std::vector<double>>();
    if (lg.grid.weights.size() != lg.grid.rows * lg.grid.cols * lg.grid.dim)
        throw ValidationError(path.string() + ": weight count does not match rows*cols*dim");
    lg.grid.rng.seed(lg.grid.rng_seed);
    if (j.contains("normalization")) {
        NormalizationRecord rec;
        rec.means = j["normalization"].at("means").get<std::vector<double>>();
        rec.stds = j["normalization"].at("stds").get<std::vector<double>>();
        rec.zero_variance = j["normalization"].at("zero_variance").get<std::vector<std::uint8_t>>();
        lg.normalization = std::move(rec);
    }
    return lg;
}

}  // namespace mirsom
