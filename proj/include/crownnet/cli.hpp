#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "crownnet/ensemble.hpp"
#include "crownnet/ingest.hpp"
#include "crownnet/synthforest.hpp"

namespace crownnet {

/// Flat JSON run configuration. Every key is optional except `seed`; see
/// README.md for the schema.
struct RunConfig {
    std::uint64_t seed = 0;

    // inputs; empty means the conventional file inside the output directory
    std::string points;
    std::string stems;
    std::string labels;

    bool intensity_norm = true;
    double norm_cell = 10.0;
    double norm_alpha = 0.05;
    CrownPrepOptions prep;

    InputConfig input;

    CorrectionConfig correction;
    EnsembleConfig classification{50, 100, 5, 32, 0.01, 0, 1};

    SweepSpec sweep;

    SynthParams synth;
};

/// Parses a config document; throws ValidationError on unknown keys, bad
/// values or a missing seed.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::ordered_json config_to_json(const RunConfig& cfg);

/// Sweep values used when the config leaves them empty.
std::vector<double> default_sweep_values(SweepKind kind);

/// Points -> optional intensity normalization -> crowns -> registration ->
/// labelled instances. Labels come from `labels_file` when given.
LabeledDataset build_dataset(const RunConfig& cfg, const std::filesystem::path& points_path,
                             const std::filesystem::path& stems_path,
                             const std::optional<std::filesystem::path>& labels_file = {});

// Result tables.
struct LabelRecord {
    std::string crown_id;
    Species label = Species::Deciduous;
    Species original_label = Species::Deciduous;
};

struct AccuracyRecord {
    Species species = Species::Deciduous;
    ClassAccuracy accuracy;
};

void write_history(const std::filesystem::path& path, std::span<const CorrectionIteration> history);
std::vector<CorrectionIteration> read_history(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, std::span<const LabelRecord> labels);
std::vector<LabelRecord> read_labels(const std::filesystem::path& path);
void write_predictions(const std::filesystem::path& path, std::span<const InstancePrediction> predictions);
std::vector<InstancePrediction> read_predictions(const std::filesystem::path& path);
void write_accuracy(const std::filesystem::path& path, std::span<const AccuracyRecord> rows);
std::vector<AccuracyRecord> read_accuracy(const std::filesystem::path& path);
void write_sweep(const std::filesystem::path& path, std::span<const SweepRow> rows);
std::vector<SweepRow> read_sweep(const std::filesystem::path& path);
void write_density(const std::filesystem::path& path, std::span<const DensityCorrelation> rows);
std::vector<DensityCorrelation> read_density(const std::filesystem::path& path);

struct ReportRow {
    std::string figure;
    std::string series;
    std::string x;
    double y = 0.0;
};

/// Collects whichever result tables exist in `dir` into a long-format
/// `figure,series,x,y` table written to `dir/report.csv`.
std::vector<ReportRow> write_report(const std::filesystem::path& dir);
std::vector<ReportRow> read_report(const std::filesystem::path& path);

/// Entry point of the command-line tool. Returns 0 on success, 1 on invalid
/// usage or input, 2 on runtime failure.
int run_command(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace crownnet
