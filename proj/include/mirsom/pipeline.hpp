#pragma once

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mirsom/analysis.hpp"
#include "mirsom/audio.hpp"
#include "mirsom/csv.hpp"
#include "mirsom/notes.hpp"
#include "mirsom/pitch.hpp"
#include "mirsom/som.hpp"
#include "mirsom/spectral.hpp"
#include "mirsom/stores.hpp"
#include "mirsom/svg.hpp"
#include "mirsom/timbre.hpp"
#include "mirsom/tonal.hpp"

namespace mirsom {

namespace pipeline_detail {

inline std::string fmt_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline std::string fmt_f(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

}  // namespace pipeline_detail

// Full single-piece analysis: spectra -> timbre aggregate, pitch track ->
// events -> melody notes -> tonal histogram. The tonal side can fail on its
// own (too few melody notes) without invalidating the timbre side.
struct PieceExtraction {
    TimbreVector timbre;
    std::size_t frame_count = 0;
    PitchTrack track;
    std::vector<NoteEvent> events;
    std::vector<NoteEvent> melody;
    std::optional<TonalSystem> tonal;
    std::string tonal_exclusion;  // reason when tonal is absent
};

inline PieceExtraction extract_piece(const AudioClip& clip, const RunConfig& config) {
    PieceExtraction out;
    const auto specs = analyze_clip(clip, config.spectral);
    std::vector<FrameFeatures> feats;
    feats.reserve(specs.size());
    for (const auto& s : specs) feats.push_back(compute_frame_features(s, config.timbre));
    out.frame_count = feats.size();
    out.timbre = aggregate(feats);

    out.track = track_f0(clip, config.pitch);
    out.events = segment_events(out.track, config.notes);
    out.melody = filter_melody_notes(out.events, config.notes);
    try {
        out.tonal = build_piece_tonal(out.melody, config.tonal);
    } catch (const DataError& e) {
        out.tonal_exclusion = e.what();
    }
    return out;
}

inline std::string pitch_dump_csv(const PitchTrack& track) {
    using pipeline_detail::fmt_f;
    std::string out = "time_s,f0_cents,confidence\n";
    for (const auto& f : track.frames) {
        out += fmt_f(f.time_s, 3) + ",";
        if (f.voiced) out += fmt_f(f.cents, 2);
        out += "," + fmt_f(f.confidence, 3) + "\n";
    }
    return out;
}

inline std::string notes_dump_csv(const std::vector<NoteEvent>& events,
                                  const std::vector<NoteEvent>& melody) {
    using pipeline_detail::fmt_f;
    std::set<std::pair<long long, long long>> melodic;
    for (const auto& m : melody)
        melodic.emplace(std::llround(m.start_s * 1e6), std::llround(m.end_s * 1e6));
    std::string out = "start_s,end_s,pitch_cents,qualifies_melody\n";
    for (const auto& e : events) {
        const bool q = melodic.count({std::llround(e.start_s * 1e6), std::llround(e.end_s * 1e6)}) > 0;
        out += fmt_f(e.start_s, 3) + "," + fmt_f(e.end_s, 3) + "," + fmt_f(e.pitch_cents, 2) + "," +
               (q ? "1" : "0") + "\n";
    }
    return out;
}

struct ExtractOptions {
    int jobs = 1;
    bool dump_pitch = false;
    bool dump_notes = false;
};

struct ExtractSummary {
    std::size_t pieces_total = 0;
    std::size_t timbre_written = 0;
    std::size_t tonal_written = 0;
    std::vector<std::string> diagnostics;  // one line per skipped/excluded piece
};

inline ExtractSummary cmd_extract(const std::filesystem::path& manifest_path,
                                  const std::filesystem::path& out_dir, const RunConfig& config,
                                  const ExtractOptions& opt = {}, std::ostream& log = std::cerr) {
    config.validate();
    const CorpusManifest manifest = load_manifest(manifest_path);
    std::filesystem::create_directories(out_dir);
    const std::string hash = config_hash(config);

    struct PieceResult {
        bool ok = false;
        std::string error;
        PieceExtraction ex;
        std::string pitch_csv, notes_csv;
    };
    const std::size_t n = manifest.entries.size();
    std::vector<PieceResult> results(n);

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) break;
            PieceResult& res = results[i];
            try {
                AudioClip clip = decode(manifest.entries[i].path);
                clip.id = manifest.entries[i].id;
                res.ex = extract_piece(clip, config);
                if (opt.dump_pitch) res.pitch_csv = pitch_dump_csv(res.ex.track);
                if (opt.dump_notes) res.notes_csv = notes_dump_csv(res.ex.events, res.ex.melody);
                res.ok = true;
            } catch (const std::exception& e) {
                res.error = e.what();
            }
        }
    };
    const int jobs = std::max(1, opt.jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    TimbreStore timbre_store;
    timbre_store.config_hash = hash;
    TonalStore tonal_store;
    tonal_store.config_hash = hash;
    ExtractSummary summary;
    summary.pieces_total = n;
    nlohmann::json diag_entries = nlohmann::json::array();

    for (std::size_t i = 0; i < n; ++i) {
        const auto& entry = manifest.entries[i];
        const auto& res = results[i];
        if (!res.ok) {
            summary.diagnostics.push_back(entry.id + ": skipped (" + res.error + ")");
            diag_entries.push_back({{"id", entry.id}, {"status", "error"}, {"message", res.error}});
            continue;
        }
        timbre_store.pieces.push_back({entry.id, entry.group, res.ex.timbre, res.ex.frame_count});
        if (res.ex.tonal) {
            tonal_store.pieces.push_back({entry.id, entry.group, *res.ex.tonal});
        } else {
            summary.diagnostics.push_back(entry.id + ": tonal excluded (" + res.ex.tonal_exclusion + ")");
            diag_entries.push_back(
                {{"id", entry.id}, {"status", "tonal_excluded"}, {"message", res.ex.tonal_exclusion}});
        }
        if (opt.dump_pitch) {
            std::filesystem::create_directories(out_dir / "pitch");
            store_detail::write_text_file(out_dir / "pitch" / (entry.id + ".csv"), res.pitch_csv);
        }
        if (opt.dump_notes) {
            std::filesystem::create_directories(out_dir / "notes");
            store_detail::write_text_file(out_dir / "notes" / (entry.id + ".csv"), res.notes_csv);
        }
    }
    summary.timbre_written = timbre_store.pieces.size();
    summary.tonal_written = tonal_store.pieces.size();
    for (const auto& line : summary.diagnostics) log << line << "\n";

    if (timbre_store.pieces.empty()) throw DataError("extraction produced no usable pieces");
    save_timbre_store(out_dir / "timbre_store.json", timbre_store, config);
    save_tonal_store(out_dir / "tonal_store.json", tonal_store, config);
    store_detail::write_text_file(
        out_dir / "extract_diagnostics.json",
        nlohmann::json{{"schema", "mirsom.diagnostics/1"}, {"config_hash", hash}, {"entries", diag_entries}}
            .dump(1));
    return summary;
}

inline void write_placements_csv(const std::filesystem::path& path,
                                 const std::vector<Placement>& placements,
                                 const std::map<std::string, std::string>& group_of,
                                 const std::string& hash) {
    std::string out = "# config_hash=" + hash + "\nid,group,row,col,correlation\n";
    for (const auto& p : placements) {
        auto it = group_of.find(p.id);
        out += csv_escape(p.id) + "," + csv_escape(it != group_of.end() ? it->second : "") + "," +
               std::to_string(p.row) + "," + std::to_string(p.col) + "," +
               pipeline_detail::fmt_f(p.correlation, 6) + "\n";
    }
    store_detail::write_text_file(path, out);
}

struct LoadedPlacements {
    std::vector<Placement> placements;
    std::map<std::string, std::string> group_of;
};

inline LoadedPlacements load_placements_csv(const std::filesystem::path& path,
                                            const std::string& expected_hash = "") {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open placements: " + path.string());
    LoadedPlacements lp;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            const auto eq = line.find("config_hash=");
            if (eq != std::string::npos && !expected_hash.empty()) {
                const std::string got = line.substr(eq + 12);
                if (got != expected_hash)
                    throw ValidationError(path.string() + ": config hash " + got +
                                          " does not match the current run config " + expected_hash);
            }
            continue;
        }
        if (!header_seen) {
            header_seen = true;  // id,group,row,col,correlation
            continue;
        }
        const auto f = split_csv_record(line);
        if (f.size() < 5) throw ValidationError(path.string() + ": malformed placement row: " + line);
        Placement p;
        p.id = f[0];
        p.row = static_cast<std::size_t>(std::stoull(f[2]));
        p.col = static_cast<std::size_t>(std::stoull(f[3]));
        p.correlation = std::stod(f[4]);
        lp.group_of[p.id] = f[1];
        lp.placements.push_back(std::move(p));
    }
    return lp;
}

inline void write_matrix_csv(const std::filesystem::path& path, std::size_t rows, std::size_t cols,
                             const std::vector<double>& values, const std::string& hash) {
    std::string out = "# config_hash=" + hash + "\n";
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            out += pipeline_detail::fmt_g(values[r * cols + c]);
            out += c + 1 < cols ? "," : "\n";
        }
    }
    store_detail::write_text_file(path, out);
}

struct TrainResult {
    SomGrid grid;
    UMatrix umatrix;
    std::vector<Placement> placements;
    std::map<std::string, std::string> group_of;
};

// Train a map of the requested kind from the stores in out_dir, then persist
// grid, u-matrix and placements next to them.
inline TrainResult cmd_train(const std::filesystem::path& out_dir, const RunConfig& config,
                             const std::string& which) {
    config.validate();
    const std::string hash = config_hash(config);
    TrainResult result;
    std::vector<std::vector<double>> vectors;
    std::vector<std::string> ids;
    std::optional<NormalizationRecord> norm;

    if (which == "timbre") {
        const TimbreStore store = load_timbre_store(out_dir / "timbre_store.json", hash);
        if (store.pieces.size() < 2) throw DataError("timbre store holds fewer than 2 pieces");
        std::vector<std::vector<double>> raw;
        for (const auto& p : store.pieces) {
            const auto a = p.features.as_array();
            raw.emplace_back(a.begin(), a.end());
            ids.push_back(p.id);
            result.group_of[p.id] = p.group;
        }
        auto [normalized, rec] = normalize_features(raw);
        vectors = std::move(normalized);
        norm = std::move(rec);
        result.grid = som_init(config.timbre_rows, config.timbre_cols, 8, config.seed);
    } else if (which == "tonal") {
        const TonalStore store = load_tonal_store(out_dir / "tonal_store.json", hash);
        if (store.pieces.size() < 2) throw DataError("tonal store holds fewer than 2 pieces");
        for (const auto& p : store.pieces) {
            vectors.push_back(p.system.bins);
            ids.push_back(p.id);
            result.group_of[p.id] = p.group;
        }
        result.grid = som_init(config.tonal_rows, config.tonal_cols, kTonalBins, config.seed);
    } else {
        throw UsageError("train: kind must be 'timbre' or 'tonal', got '" + which + "'");
    }

    som_train(result.grid, vectors, config.train);
    result.umatrix = u_matrix(result.grid);
    for (std::size_t i = 0; i < vectors.size(); ++i)
        result.placements.push_back(best_match(result.grid, vectors[i], ids[i]));

    save_grid(out_dir / (which + "_grid.json"), result.grid, which, hash, config.train, norm);
    write_matrix_csv(out_dir / (which + "_umatrix.csv"), result.umatrix.rows, result.umatrix.cols,
                     result.umatrix.values, hash);
    write_placements_csv(out_dir / (which + "_placements.csv"), result.placements, result.group_of,
                         hash);
    store_detail::write_text_file(
        out_dir / (which + "_umatrix.svg"),
        svg_heatmap(result.umatrix.rows, result.umatrix.cols, result.umatrix.values,
                    result.placements, result.group_of, which + " u-matrix"));
    return result;
}

// Project the pieces of a store onto an already-trained grid. Timbre vectors
// go through the normalization recorded at training time.
inline std::vector<Placement> cmd_place(const std::filesystem::path& out_dir,
                                        const RunConfig& config, const std::string& which) {
    config.validate();
    const std::string hash = config_hash(config);
    const LoadedGrid lg = load_grid(out_dir / (which + "_grid.json"), hash);
    std::vector<Placement> placements;
    std::map<std::string, std::string> group_of;

    if (lg.kind == "timbre") {
        if (!lg.normalization)
            throw ValidationError("grid file lacks the normalization record needed for placement");
        const TimbreStore store = load_timbre_store(out_dir / "timbre_store.json", hash);
        for (const auto& p : store.pieces) {
            const auto a = p.features.as_array();
            const auto v = apply_normalization(std::span<const double>(a.data(), a.size()),
                                               *lg.normalization);
            placements.push_back(best_match(lg.grid, v, p.id));
            group_of[p.id] = p.group;
        }
    } else {
        const TonalStore store = load_tonal_store(out_dir / "tonal_store.json", hash);
        for (const auto& p : store.pieces) {
            placements.push_back(best_match(lg.grid, p.system.bins, p.id));
            group_of[p.id] = p.group;
        }
    }
    write_placements_csv(out_dir / (which + "_place.csv"), placements, group_of, hash);
    return placements;
}

struct UmatrixOptions {
    bool planes = false;  // also emit per-dimension component planes
};

inline void cmd_umatrix(const std::filesystem::path& out_dir, const RunConfig& config,
                        const std::string& which, const UmatrixOptions& opt = {}) {
    config.validate();
    const std::string hash = config_hash(config);
    const LoadedGrid lg = load_grid(out_dir / (which + "_grid.json"), hash);
    const UMatrix um = u_matrix(lg.grid);
    write_matrix_csv(out_dir / (which + "_umatrix.csv"), um.rows, um.cols, um.values, hash);

    std::vector<Placement> placements;
    std::map<std::string, std::string> group_of;
    const auto placements_path = out_dir / (which + "_placements.csv");
    if (std::filesystem::exists(placements_path)) {
        auto lp = load_placements_csv(placements_path, hash);
        placements = std::move(lp.placements);
        group_of = std::move(lp.group_of);
    }
    store_detail::write_text_file(out_dir / (which + "_umatrix.svg"),
                                  svg_heatmap(um.rows, um.cols, um.values, placements, group_of,
                                              which + " u-matrix"));

    if (opt.planes) {
        if (lg.grid.dim > 16)
            throw UsageError("component planes are emitted per dimension; a dim-" +
                             std::to_string(lg.grid.dim) + " map is too wide (use the timbre map)");
        for (std::size_t k = 0; k < lg.grid.dim; ++k) {
            const auto plane = component_plane(lg.grid, k);
            const std::string name = lg.kind == "timbre" && k < TimbreVector::field_names().size()
                                         ? TimbreVector::field_names()[k]
                                         : "dim" + std::to_string(k);
            write_matrix_csv(out_dir / (which + "_plane_" + name + ".csv"), lg.grid.rows,
                             lg.grid.cols, plane, hash);
            store_detail::write_text_file(
                out_dir / (which + "_plane_" + name + ".svg"),
                svg_heatmap(lg.grid.rows, lg.grid.cols, plane, placements, group_of,
                            which + " component plane: " + name));
        }
    }
}

inline DifferenceProfile cmd_diff(const std::filesystem::path& out_dir, const RunConfig& config,
                                  const DiffOptions& opt = {}) {
    config.validate();
    const std::string hash = config_hash(config);
    const LoadedGrid lg = load_grid(out_dir / "tonal_grid.json", hash);
    const auto lp = load_placements_csv(out_dir / "tonal_placements.csv", hash);
    const TonalStore store = load_tonal_store(out_dir / "tonal_store.json", hash);

    std::map<std::string, std::vector<double>> histograms;
    for (const auto& p : store.pieces) histograms[p.id] = p.system.bins;
    const DifferenceProfile prof = triangular_split_diff(lg.grid, lp.placements, histograms, opt);

    std::string csv = "# config_hash=" + hash + "\ncent_bin,delta,std_upper,std_lower\n";
    const std::size_t first = prof.omit_fundamental ? 1 : 0;
    for (std::size_t k = first; k < prof.delta.size(); ++k)
        csv += std::to_string(k) + "," + pipeline_detail::fmt_g(prof.delta[k]) + "," +
               pipeline_detail::fmt_g(prof.std_upper[k]) + "," +
               pipeline_detail::fmt_g(prof.std_lower[k]) + "\n";
    store_detail::write_text_file(out_dir / "diff_profile.csv", csv);
    store_detail::write_text_file(out_dir / "diff_profile.svg",
                                  svg_diff_profile(prof, "tonal difference: upper right - lower left"));
    return prof;
}

struct ReportOptions {
    std::string group_filter;  // restrict importance plots to one group
};

inline SeparationReport cmd_report(const std::filesystem::path& out_dir, const RunConfig& config,
                                   const std::string& which, const ReportOptions& opt = {}) {
    config.validate();
    const std::string hash = config_hash(config);
    const LoadedGrid lg = load_grid(out_dir / (which + "_grid.json"), hash);
    const auto lp = load_placements_csv(out_dir / (which + "_placements.csv"), hash);
    const UMatrix um = u_matrix(lg.grid);
    const SeparationReport rep = separation_report(lp.placements, lp.group_of, um);

    nlohmann::json groups = nlohmann::json::array();
    for (const auto& g : rep.groups)
        groups.push_back({{"group", g.group},
                          {"count", g.count},
                          {"centroid_row", g.centroid_row},
                          {"centroid_col", g.centroid_col}});
    nlohmann::json j{{"schema", kReportSchema},
                     {"config_hash", hash},
                     {"kind", which},
                     {"groups", groups},
                     {"mean_intra_distance", rep.mean_intra},
                     {"mean_inter_distance", rep.mean_inter},
                     {"purity", rep.purity},
                     {"degenerate", rep.degenerate}};
    if (rep.degenerate) j["warning"] = "all pieces share one neuron; purity defined 0";
    if (rep.boundary_defined) {
        j["boundary_max_u"] = rep.boundary_max_u;
        j["occupied_median_u"] = rep.occupied_median_u;
        j["boundary_ratio"] = rep.boundary_ratio;
    }
    store_detail::write_text_file(out_dir / (which + "_report.json"), j.dump(1));

    // Feature-importance export is only meaningful for the 8-dimension
    // timbre map; per-piece vectors are reconstructed via the stored
    // normalization.
    if (lg.kind == "timbre" && lg.normalization) {
        const TimbreStore store = load_timbre_store(out_dir / "timbre_store.json", hash);
        std::map<std::string, std::vector<double>> vec_of;
        for (const auto& p : store.pieces) {
            const auto a = p.features.as_array();
            vec_of[p.id] =
                apply_normalization(std::span<const double>(a.data(), a.size()), *lg.normalization);
        }
        std::string csv = "# config_hash=" + hash +
                          "\ngroup,id,row,col,rank,dim_index,dim_name,strength,importance\n";
        std::map<std::string, std::vector<std::pair<Placement, std::vector<FeatureImportance>>>>
            panels_by_group;
        for (const auto& p : lp.placements) {
            auto vit = vec_of.find(p.id);
            if (vit == vec_of.end()) continue;
            const std::string group = lp.group_of.at(p.id);
            if (!opt.group_filter.empty() && group != opt.group_filter) continue;
            const auto ranking = feature_importance(lg.grid, p, vit->second);
            for (std::size_t rank = 0; rank < ranking.size(); ++rank) {
                const auto& fi = ranking[rank];
                csv += csv_escape(group) + "," + csv_escape(p.id) + "," + std::to_string(p.row) +
                       "," + std::to_string(p.col) + "," + std::to_string(rank) + "," +
                       std::to_string(fi.dim_index) + "," +
                       TimbreVector::field_names()[fi.dim_index] + "," +
                       pipeline_detail::fmt_f(fi.strength, 6) + "," +
                       pipeline_detail::fmt_f(fi.importance, 6) + "\n";
            }
            panels_by_group[group].emplace_back(p, ranking);
        }
        store_detail::write_text_file(out_dir / "timbre_importance.csv", csv);
        for (const auto& [group, panels] : panels_by_group)
            store_detail::write_text_file(
                out_dir / ("timbre_importance_" + group + ".svg"),
                svg_importance_grid(lg.grid, panels, "feature importance: " + group));
    }
    return rep;
}

}  // namespace mirsom
