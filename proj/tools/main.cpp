// Command-line front end: extract features from a corpus, train the maps,
// and emit the comparison artifacts (u-matrix, difference profile, report).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mirsom/mirsom.hpp"

namespace {

mirsom::RunConfig load_config(const std::string& config_file, bool seed_given, std::uint64_t seed) {
    mirsom::RunConfig cfg;
    if (!config_file.empty()) {
        std::ifstream in(config_file);
        if (!in) throw mirsom::UsageError("cannot open config file: " + config_file);
        try {
            nlohmann::json j = nlohmann::json::parse(in);
            cfg = j.get<mirsom::RunConfig>();
        } catch (const nlohmann::json::exception& e) {
            throw mirsom::UsageError("malformed config file " + config_file + ": " + e.what());
        }
    }
    if (seed_given) cfg.seed = seed;
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mirsom: corpus comparison by psychoacoustic timbre and tonal system"};
    app.require_subcommand(1);

    std::string manifest, out_dir, config_file, kind, group_filter;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int jobs = 1;
    bool dump_pitch = false, dump_notes = false;
    bool planes = false, include_bin0 = false, swap_sides = false, neuron_means = false;

    auto add_common = [&](CLI::App* cmd, bool needs_out = true) {
        cmd->add_option("--config", config_file, "JSON config overriding the built-in defaults");
        cmd->add_option("--seed", seed, "random seed (overrides config)")
            ->each([&](const std::string&) { seed_given = true; });
        if (needs_out) cmd->add_option("--out", out_dir, "output directory")->required();
    };

    CLI::App* extract = app.add_subcommand("extract", "decode the corpus and write feature stores");
    extract->add_option("--manifest", manifest, "corpus manifest CSV")->required();
    extract->add_option("--jobs", jobs, "parallel decode/extract workers")->check(CLI::PositiveNumber);
    extract->add_flag("--dump-pitch", dump_pitch, "write per-piece pitch track CSVs");
    extract->add_flag("--dump-notes", dump_notes, "write per-piece note event CSVs");
    add_common(extract);

    CLI::App* train = app.add_subcommand("train", "train a SOM from a feature store");
    train->add_option("kind", kind, "timbre or tonal")->required();
    add_common(train);

    CLI::App* place = app.add_subcommand("place", "project store pieces onto a trained map");
    place->add_option("kind", kind, "timbre or tonal")->required();
    add_common(place);

    CLI::App* umatrix = app.add_subcommand("umatrix", "recompute u-matrix (and component planes)");
    umatrix->add_option("kind", kind, "timbre or tonal")->required();
    umatrix->add_flag("--planes", planes, "emit per-dimension component planes");
    add_common(umatrix);

    CLI::App* diff = app.add_subcommand("diff", "triangular-split tonal difference profile");
    diff->add_flag("--include-bin0", include_bin0, "keep the fundamental bin in the CSV/plot");
    diff->add_flag("--swap-sides", swap_sides, "flip the triangle assignment");
    diff->add_flag("--neuron-means", neuron_means, "average neuron weights instead of piece histograms");
    add_common(diff);

    CLI::App* report = app.add_subcommand("report", "group separation summary and feature importance");
    report->add_option("kind", kind, "timbre or tonal")->required();
    report->add_option("--group", group_filter, "restrict importance plots to one group");
    add_common(report);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const mirsom::RunConfig cfg = load_config(config_file, seed_given, seed);
        if (extract->parsed()) {
            mirsom::ExtractOptions opt;
            opt.jobs = jobs;
            opt.dump_pitch = dump_pitch;
            opt.dump_notes = dump_notes;
            const auto summary = mirsom::cmd_extract(manifest, out_dir, cfg, opt);
            std::cout << "extracted " << summary.timbre_written << "/" << summary.pieces_total
                      << " pieces (" << summary.tonal_written << " with tonal systems)\n";
        } else if (train->parsed()) {
            const auto result = mirsom::cmd_train(out_dir, cfg, kind);
            std::cout << "trained " << kind << " map: " << result.grid.rows << "x"
                      << result.grid.cols << ", " << result.placements.size() << " placements\n";
        } else if (place->parsed()) {
            const auto placements = mirsom::cmd_place(out_dir, cfg, kind);
            std::cout << "placed " << placements.size() << " pieces\n";
        } else if (umatrix->parsed()) {
            mirsom::UmatrixOptions opt;
            opt.planes = planes;
            mirsom::cmd_umatrix(out_dir, cfg, kind, opt);
            std::cout << "u-matrix written\n";
        } else if (diff->parsed()) {
            mirsom::DiffOptions opt;
            opt.include_bin0 = include_bin0;
            opt.swap_sides = swap_sides;
            opt.mean_over_neurons = neuron_means;
            const auto prof = mirsom::cmd_diff(out_dir, cfg, opt);
            std::cout << "difference profile written (" << prof.upper_count << " upper, "
                      << prof.lower_count << " lower)\n";
        } else if (report->parsed()) {
            mirsom::ReportOptions opt;
            opt.group_filter = group_filter;
            const auto rep = mirsom::cmd_report(out_dir, cfg, kind, opt);
            std::cout << "report written: purity " << rep.purity << "\n";
        }
        return 0;
    } catch (const mirsom::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const mirsom::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
