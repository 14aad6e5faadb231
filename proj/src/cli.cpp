#include "crownnet/cli.hpp"

#include <functional>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <thread>

#include <CLI11.hpp>

#include "crownnet/csv.hpp"
#include "crownnet/intensity.hpp"
#include "crownnet/rasterize.hpp"
#include "crownnet/registration.hpp"
#include "crownnet/rng.hpp"

namespace crownnet {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Seed streams for the pipeline stages.
constexpr std::uint64_t kNormStream = 11;
constexpr std::uint64_t kCorrectionStream = 21;
constexpr std::uint64_t kClassifyStream = 31;
constexpr std::uint64_t kSweepStream = 41;

template <class T>
T get_as(const json& v, const std::string& key) {
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        throw ValidationError("config key '" + key + "' has the wrong type");
    }
}

int positive(const json& v, const std::string& key) {
    const int n = get_as<int>(v, key);
    if (n < 1) throw ValidationError("config key '" + key + "' must be positive");
    return n;
}

void set_ensemble(EnsembleConfig& e, const std::string& field, const json& v, const std::string& key) {
    if (field == "networks") e.networks = positive(v, key);
    else if (field == "per_class") e.per_class = positive(v, key);
    else if (field == "epochs") e.epochs = positive(v, key);
    else throw ValidationError("unknown config key '" + key + "'");
}

}  // namespace

std::vector<double> default_sweep_values(SweepKind kind) {
    if (kind == SweepKind::Size) return {0.2, 0.4, 0.6, 0.8, 1.0};
    if (kind == SweepKind::Augmentation) return {20, 40, 60, 80, 100, 120, 140, 160, 180, 240, 300, 360};
    return {};
}

RunConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw ValidationError("config must be a JSON object");
    if (!doc.contains("seed")) throw ValidationError("config key 'seed' is required");
    RunConfig c;
    bool have_sweep_values = false;
    bool have_sweep_ablations = false;
    for (const auto& [key, v] : doc.items()) {
        auto number = [&] { return get_as<double>(v, key); };
        if (key == "seed") c.seed = get_as<std::uint64_t>(v, key);
        else if (key == "points") c.points = get_as<std::string>(v, key);
        else if (key == "stems") c.stems = get_as<std::string>(v, key);
        else if (key == "labels") c.labels = get_as<std::string>(v, key);
        else if (key == "intensity_norm") c.intensity_norm = get_as<bool>(v, key);
        else if (key == "norm_cell") c.norm_cell = number();
        else if (key == "norm_alpha") c.norm_alpha = number();
        else if (key == "canopy_threshold") c.prep.canopy_threshold = number();
        else if (key == "min_crown_width") c.prep.min_crown_width = number();
        else if (key == "representation") c.input.representation = parse_representation(get_as<std::string>(v, key));
        else if (key == "ablation") c.input.ablation = parse_ablation(get_as<std::string>(v, key));
        else if (key == "augmentations") c.input.augmentations = positive(v, key);
        else if (key == "step_degrees") c.input.step_degrees = number();
        else if (key == "learning_rate") c.correction.ensemble.learning_rate = c.classification.learning_rate = number();
        else if (key == "batch_size") c.correction.ensemble.batch_size = c.classification.batch_size = positive(v, key);
        else if (key == "correct_alpha") c.correction.alpha = number();
        else if (key == "correct_max_iterations") c.correction.max_iterations = positive(v, key);
        else if (key.starts_with("correct_")) set_ensemble(c.correction.ensemble, key.substr(8), v, key);
        else if (key.starts_with("classify_")) set_ensemble(c.classification, key.substr(9), v, key);
        else if (key == "sweep_kind") c.sweep.kind = parse_sweep_kind(get_as<std::string>(v, key));
        else if (key == "sweep_values") c.sweep.values = get_as<std::vector<double>>(v, key), have_sweep_values = true;
        else if (key == "sweep_ablations") {
            c.sweep.ablations.clear();
            for (const auto& a : get_as<std::vector<std::string>>(v, key)) c.sweep.ablations.push_back(parse_ablation(a));
            have_sweep_ablations = true;
        } else if (key == "sweep_repeats") c.sweep.repeats = positive(v, key);
        else if (key == "synth_crowns") c.synth.crowns = positive(v, key);
        else if (key == "synth_conifer_fraction") c.synth.conifer_fraction = number();
        else if (key == "synth_label_noise") c.synth.label_noise = number();
        else if (key == "synth_gps_jitter") c.synth.gps_jitter = number();
        else if (key == "synth_spacing") c.synth.spacing = number();
        else if (key == "synth_leaf_on_density") c.synth.leaf_on_density = number();
        else if (key == "synth_conifer_retention") c.synth.conifer_retention = number();
        else if (key == "synth_deciduous_retention") c.synth.deciduous_retention = number();
        else if (key == "synth_conifer_leaf_on_ambiguity") c.synth.conifer_leaf_on_ambiguity = number();
        else if (key == "synth_dead_stem_fraction") c.synth.dead_stem_fraction = number();
        else if (key == "synth_ground_density") c.synth.ground_density = number();
        else throw ValidationError("unknown config key '" + key + "'");
    }
    if (!have_sweep_values) c.sweep.values = default_sweep_values(c.sweep.kind);
    if (!have_sweep_ablations)
        c.sweep.ablations = {Ablation::None, Ablation::NoLeafOff, Ablation::NoLeafOn, Ablation::RawIntensity,
                             Ablation::BinaryIntensity};
    if (!(c.norm_cell > 0.0)) throw ValidationError("norm_cell must be positive");
    if (!(c.input.step_degrees > 0.0)) throw ValidationError("step_degrees must be positive");
    c.synth.seed = c.seed;
    validate(c.synth);
    c.correction.ensemble.seed = derive_seed(c.seed, kCorrectionStream);
    c.classification.seed = derive_seed(c.seed, kClassifyStream);
    return c;
}

RunConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open input file: " + path.string());
    try {
        return parse_config(json::parse(in));
    } catch (const json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

ordered_json config_to_json(const RunConfig& c) {
    ordered_json j;
    j["seed"] = c.seed;
    j["points"] = c.points;
    j["stems"] = c.stems;
    j["labels"] = c.labels;
    j["intensity_norm"] = c.intensity_norm;
    j["norm_cell"] = c.norm_cell;
    j["norm_alpha"] = c.norm_alpha;
    j["canopy_threshold"] = c.prep.canopy_threshold;
    j["min_crown_width"] = c.prep.min_crown_width;
    j["representation"] = to_string(c.input.representation);
    j["ablation"] = to_string(c.input.ablation);
    j["augmentations"] = c.input.augmentations;
    j["step_degrees"] = c.input.step_degrees;
    j["learning_rate"] = c.classification.learning_rate;
    j["batch_size"] = c.classification.batch_size;
    j["correct_networks"] = c.correction.ensemble.networks;
    j["correct_per_class"] = c.correction.ensemble.per_class;
    j["correct_epochs"] = c.correction.ensemble.epochs;
    j["correct_alpha"] = c.correction.alpha;
    j["correct_max_iterations"] = c.correction.max_iterations;
    j["classify_networks"] = c.classification.networks;
    j["classify_per_class"] = c.classification.per_class;
    j["classify_epochs"] = c.classification.epochs;
    j["sweep_kind"] = to_string(c.sweep.kind);
    j["sweep_values"] = c.sweep.values;
    std::vector<std::string> ablations;
    for (auto a : c.sweep.ablations) ablations.push_back(to_string(a));
    j["sweep_ablations"] = ablations;
    j["sweep_repeats"] = c.sweep.repeats;
    j["synth_crowns"] = c.synth.crowns;
    j["synth_conifer_fraction"] = c.synth.conifer_fraction;
    j["synth_label_noise"] = c.synth.label_noise;
    j["synth_gps_jitter"] = c.synth.gps_jitter;
    j["synth_spacing"] = c.synth.spacing;
    j["synth_leaf_on_density"] = c.synth.leaf_on_density;
    j["synth_conifer_retention"] = c.synth.conifer_retention;
    j["synth_deciduous_retention"] = c.synth.deciduous_retention;
    j["synth_conifer_leaf_on_ambiguity"] = c.synth.conifer_leaf_on_ambiguity;
    j["synth_dead_stem_fraction"] = c.synth.dead_stem_fraction;
    j["synth_ground_density"] = c.synth.ground_density;
    return j;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<LidarPoint> normalize_points(const RunConfig& cfg, std::span<const LidarPoint> raw,
                                         IntensityModels* models_out = nullptr) {
    const auto samples = sample_normalization_grid(raw, cfg.norm_cell, derive_seed(cfg.seed, kNormStream));
    const auto models = fit_intensity_models(samples);
    if (models_out) *models_out = models;
    return apply_residualization(raw, models, cfg.norm_alpha);
}

std::map<std::string, LabelRecord> labels_by_id(const fs::path& path) {
    std::map<std::string, LabelRecord> out;
    for (auto& r : read_labels(path)) out.emplace(r.crown_id, r);
    return out;
}

}  // namespace

LabeledDataset build_dataset(const RunConfig& cfg, const fs::path& points_path, const fs::path& stems_path,
                             const std::optional<fs::path>& labels_file) {
    const auto raw = read_points(points_path);
    const auto stems = read_stems(stems_path);
    const auto raw_crowns = prepare_crowns(raw, cfg.prep);
    std::vector<CrownCloud> crowns = cfg.intensity_norm ? prepare_crowns(normalize_points(cfg, raw), cfg.prep)
                                                        : raw_crowns;
    const auto records = register_crowns(crowns, stems);

    std::map<std::string, const CrownCloud*> raw_by_id;
    for (const auto& c : raw_crowns) raw_by_id.emplace(c.crown_id, &c);
    std::map<std::string, const CrownCloud*> by_id;
    for (const auto& c : crowns) by_id.emplace(c.crown_id, &c);
    std::map<std::string, LabelRecord> overrides;
    if (labels_file) overrides = labels_by_id(*labels_file);

    LabeledDataset ds;
    ds.input = cfg.input;
    for (const auto& r : records) {
        Instance inst;
        inst.crown = *by_id.at(r.crown_id);
        if (auto it = raw_by_id.find(r.crown_id); it != raw_by_id.end()) inst.raw_crown = *it->second;
        inst.label = inst.original_label = r.label;
        inst.crown_class = r.crown_class;
        if (auto it = overrides.find(r.crown_id); it != overrides.end()) {
            inst.label = it->second.label;
            inst.original_label = it->second.original_label;
        }
        ds.instances.push_back(std::move(inst));
    }
    return ds;
}

// ---------------------------------------------------------------------------

namespace {

const std::string& cell(const csv::Table& t, const std::vector<std::string>& row, std::string_view name) {
    return row.at(t.column(name));
}

std::string label_text(Species s) { return std::string(to_string(s)); }

}  // namespace

void write_history(const fs::path& path, std::span<const CorrectionIteration> history) {
    csv::Table t{{"iter", "flips_conifer", "flips_deciduous", "mean_acc"}, {}};
    for (const auto& h : history)
        t.rows.push_back({std::to_string(h.iteration), std::to_string(h.flips_conifer),
                          std::to_string(h.flips_deciduous), csv::format(h.mean_training_accuracy)});
    csv::write(path, t);
}

std::vector<CorrectionIteration> read_history(const fs::path& path) {
    const auto t = csv::read(path);
    std::vector<CorrectionIteration> out;
    for (const auto& r : t.rows) {
        CorrectionIteration h;
        h.iteration = static_cast<int>(csv::to_long(cell(t, r, "iter")));
        h.flips_conifer = static_cast<int>(csv::to_long(cell(t, r, "flips_conifer")));
        h.flips_deciduous = static_cast<int>(csv::to_long(cell(t, r, "flips_deciduous")));
        h.mean_training_accuracy = csv::to_double(cell(t, r, "mean_acc"));
        out.push_back(h);
    }
    return out;
}

void write_labels(const fs::path& path, std::span<const LabelRecord> labels) {
    csv::Table t{{"crown_id", "label", "original_label"}, {}};
    for (const auto& l : labels) t.rows.push_back({l.crown_id, label_text(l.label), label_text(l.original_label)});
    csv::write(path, t);
}

std::vector<LabelRecord> read_labels(const fs::path& path) {
    const auto t = csv::read(path);
    std::vector<LabelRecord> out;
    for (const auto& r : t.rows)
        out.push_back({cell(t, r, "crown_id"), parse_species(cell(t, r, "label")),
                       parse_species(cell(t, r, "original_label"))});
    return out;
}

void write_predictions(const fs::path& path, std::span<const InstancePrediction> predictions) {
    csv::Table t{{"crown_id", "true_label", "pred_label", "p_conifer", "held_out_by"}, {}};
    for (const auto& p : predictions)
        t.rows.push_back({p.crown_id, label_text(p.label), p.held_out_by > 0 ? label_text(p.predicted) : "none",
                          csv::format(p.p_conifer), std::to_string(p.held_out_by)});
    csv::write(path, t);
}

std::vector<InstancePrediction> read_predictions(const fs::path& path) {
    const auto t = csv::read(path);
    std::vector<InstancePrediction> out;
    for (const auto& r : t.rows) {
        InstancePrediction p;
        p.crown_id = cell(t, r, "crown_id");
        p.label = parse_species(cell(t, r, "true_label"));
        p.held_out_by = static_cast<int>(csv::to_long(cell(t, r, "held_out_by")));
        if (p.held_out_by > 0) p.predicted = parse_species(cell(t, r, "pred_label"));
        p.p_conifer = csv::to_double(cell(t, r, "p_conifer"));
        out.push_back(std::move(p));
    }
    return out;
}

void write_accuracy(const fs::path& path, std::span<const AccuracyRecord> rows) {
    csv::Table t{{"class", "accuracy", "ci95", "n"}, {}};
    for (const auto& a : rows)
        t.rows.push_back({label_text(a.species), csv::format(a.accuracy.accuracy), csv::format(a.accuracy.ci95),
                          std::to_string(a.accuracy.n)});
    csv::write(path, t);
}

std::vector<AccuracyRecord> read_accuracy(const fs::path& path) {
    const auto t = csv::read(path);
    std::vector<AccuracyRecord> out;
    for (const auto& r : t.rows)
        out.push_back({parse_species(cell(t, r, "class")),
                       {csv::to_double(cell(t, r, "accuracy")), csv::to_double(cell(t, r, "ci95")),
                        static_cast<std::size_t>(csv::to_long(cell(t, r, "n")))}});
    return out;
}

void write_sweep(const fs::path& path, std::span<const SweepRow> rows) {
    csv::Table t{{"variant", "param", "acc_conifer", "ci_conifer", "acc_deciduous", "ci_deciduous"}, {}};
    for (const auto& s : rows)
        t.rows.push_back({s.variant, s.param, csv::format(s.acc_conifer), csv::format(s.ci_conifer),
                          csv::format(s.acc_deciduous), csv::format(s.ci_deciduous)});
    csv::write(path, t);
}

std::vector<SweepRow> read_sweep(const fs::path& path) {
    const auto t = csv::read(path);
    std::vector<SweepRow> out;
    for (const auto& r : t.rows)
        out.push_back({cell(t, r, "variant"), cell(t, r, "param"), csv::to_double(cell(t, r, "acc_conifer")),
                       csv::to_double(cell(t, r, "ci_conifer")), csv::to_double(cell(t, r, "acc_deciduous")),
                       csv::to_double(cell(t, r, "ci_deciduous"))});
    return out;
}

void write_density(const fs::path& path, std::span<const DensityCorrelation> rows) {
    csv::Table t{{"season", "stratum", "pearson_r", "n"}, {}};
    for (const auto& d : rows)
        t.rows.push_back({d.season, d.stratum, csv::format(d.pearson), std::to_string(d.n)});
    csv::write(path, t);
}

std::vector<DensityCorrelation> read_density(const fs::path& path) {
    const auto t = csv::read(path);
    std::vector<DensityCorrelation> out;
    for (const auto& r : t.rows)
        out.push_back({cell(t, r, "season"), cell(t, r, "stratum"), csv::to_double(cell(t, r, "pearson_r")),
                       static_cast<std::size_t>(csv::to_long(cell(t, r, "n")))});
    return out;
}

std::vector<ReportRow> write_report(const fs::path& dir) {
    std::vector<ReportRow> rows;
    if (fs::exists(dir / "correction_history.csv"))
        for (const auto& h : read_history(dir / "correction_history.csv")) {
            const auto x = std::to_string(h.iteration);
            rows.push_back({"correction_flips", "conifer", x, static_cast<double>(h.flips_conifer)});
            rows.push_back({"correction_flips", "deciduous", x, static_cast<double>(h.flips_deciduous)});
            rows.push_back({"correction_accuracy", "mean_acc", x, h.mean_training_accuracy});
        }
    if (fs::exists(dir / "accuracy.csv"))
        for (const auto& a : read_accuracy(dir / "accuracy.csv"))
            rows.push_back({"classification", "accuracy", label_text(a.species), a.accuracy.accuracy});
    if (fs::exists(dir / "sweep.csv"))
        for (const auto& s : read_sweep(dir / "sweep.csv")) {
            rows.push_back({"sweep_" + s.variant, "conifer", s.param, s.acc_conifer});
            rows.push_back({"sweep_" + s.variant, "deciduous", s.param, s.acc_deciduous});
        }
    if (fs::exists(dir / "density.csv"))
        for (const auto& d : read_density(dir / "density.csv"))
            rows.push_back({"density_correlation", d.season, d.stratum, d.pearson});

    csv::Table t{{"figure", "series", "x", "y"}, {}};
    for (const auto& r : rows) t.rows.push_back({r.figure, r.series, r.x, csv::format(r.y)});
    csv::write(dir / "report.csv", t);
    return rows;
}

std::vector<ReportRow> read_report(const fs::path& path) {
    const auto t = csv::read(path);
    std::vector<ReportRow> out;
    for (const auto& r : t.rows)
        out.push_back({cell(t, r, "figure"), cell(t, r, "series"), cell(t, r, "x"), csv::to_double(cell(t, r, "y"))});
    return out;
}

// ---------------------------------------------------------------------------

namespace {

struct Invocation {
    std::string command;
    fs::path config_path;
    fs::path out_dir = ".";
    int threads = 0;
    bool no_intensity_norm = false;
    std::string representation;
    std::string ablation;
};

struct Context {
    Invocation inv;
    RunConfig cfg;
    std::ostream& out;

    fs::path points() const { return cfg.points.empty() ? inv.out_dir / "points.csv" : fs::path(cfg.points); }
    fs::path stems() const { return cfg.stems.empty() ? inv.out_dir / "stems.csv" : fs::path(cfg.stems); }
    std::optional<fs::path> labels() const {
        if (!cfg.labels.empty()) return fs::path(cfg.labels);
        if (fs::exists(inv.out_dir / "corrected_labels.csv")) return inv.out_dir / "corrected_labels.csv";
        return std::nullopt;
    }
    LabeledDataset dataset() const { return build_dataset(cfg, points(), stems(), labels()); }
};

void write_manifest(const Context& ctx, const ordered_json& seeds, const std::vector<std::string>& outputs) {
    ordered_json m;
    m["command"] = ctx.inv.command;
    m["version"] = CROWNNET_VERSION;
    m["config"] = config_to_json(ctx.cfg);
    m["seeds"] = seeds;
    m["outputs"] = outputs;
    std::ofstream f(ctx.inv.out_dir / ("manifest_" + ctx.inv.command + ".json"));
    if (!f) throw std::runtime_error("cannot write manifest in " + ctx.inv.out_dir.string());
    f << m.dump(2) << '\n';
}

void cmd_synth(Context& ctx) {
    const auto data = generate_dataset(ctx.cfg.synth);
    write_points(ctx.inv.out_dir / "points.csv", data.points);
    write_stems(ctx.inv.out_dir / "stems.csv", data.stems);
    write_truth(ctx.inv.out_dir / "truth.csv", data.truth);
    write_manifest(ctx, {{"synth", ctx.cfg.synth.seed}}, {"points.csv", "stems.csv", "truth.csv"});
    ctx.out << "wrote " << data.points.size() << " points, " << data.stems.size() << " stems\n";
}

void cmd_normalize(Context& ctx) {
    const auto raw = read_points(ctx.points());
    IntensityModels models;
    const auto normalized = normalize_points(ctx.cfg, raw, &models);
    write_models(ctx.inv.out_dir / "intensity_models.json", models);
    write_points(ctx.inv.out_dir / "points_normalized.csv", normalized);
    write_manifest(ctx, {{"normalization", derive_seed(ctx.cfg.seed, kNormStream)}},
                   {"intensity_models.json", "points_normalized.csv"});
    ctx.out << "fitted " << models.size() << " intensity models\n";
}

void cmd_register(Context& ctx) {
    const auto raw = read_points(ctx.points());
    const auto stems = read_stems(ctx.stems());
    const auto crowns = prepare_crowns(raw, ctx.cfg.prep);
    const auto records = register_crowns(crowns, stems);
    write_registration(ctx.inv.out_dir / "registration.csv", records);
    write_manifest(ctx, ordered_json::object(), {"registration.csv"});
    ctx.out << "registered " << records.size() << " of " << crowns.size() << " crowns\n";
}

void cmd_rasterize(Context& ctx) {
    const auto ds = ctx.dataset();
    AugmentOptions opts;
    opts.count = ds.input.augmentations;
    opts.step_degrees = ds.input.step_degrees;
    opts.with_dsm = ds.input.representation == RepresentationKind::Dsm4;
    opts.with_views = !opts.with_dsm;
    TensorStoreWriter writer(ctx.inv.out_dir / "representations.bin", ctx.inv.out_dir / "representations.json",
                             ds.input.representation);
    for (const auto& inst : ds.instances) {
        auto set = augment_rotations(inst.crown, inst.label, inst.crown_class, opts);
        for (auto& e : set.entries) {
            if (e.dsm) e.dsm = scale_for_network(*e.dsm);
            if (e.views) e.views = scale_for_network(*e.views);
        }
        writer.add(set);
    }
    writer.finish();
    write_manifest(ctx, {{"normalization", derive_seed(ctx.cfg.seed, kNormStream)}},
                   {"representations.bin", "representations.json"});
    ctx.out << "rasterized " << ds.instances.size() << " crowns\n";
}

void cmd_correct(Context& ctx) {
    auto ds = build_dataset(ctx.cfg, ctx.points(), ctx.stems(),
                            ctx.cfg.labels.empty() ? std::nullopt : std::optional<fs::path>(ctx.cfg.labels));
    const auto result = correct_mislabels(std::move(ds), ctx.cfg.correction);
    write_history(ctx.inv.out_dir / "correction_history.csv", result.history);
    std::vector<LabelRecord> labels;
    for (const auto& inst : result.dataset.instances)
        labels.push_back({inst.crown_id(), inst.label, inst.original_label});
    write_labels(ctx.inv.out_dir / "corrected_labels.csv", labels);
    write_manifest(ctx,
                   {{"normalization", derive_seed(ctx.cfg.seed, kNormStream)},
                    {"correction", ctx.cfg.correction.ensemble.seed}},
                   {"correction_history.csv", "corrected_labels.csv"});
    ctx.out << "correction " << (result.converged ? "converged" : "stopped") << " after " << result.history.size()
            << " iterations\n";
}

void cmd_classify(Context& ctx) {
    const auto ds = ctx.dataset();
    const auto result = ensemble_classify(ds, ctx.cfg.classification);
    write_predictions(ctx.inv.out_dir / "predictions.csv", result.predictions);
    const std::array<AccuracyRecord, 2> acc{AccuracyRecord{Species::Conifer, result.conifer},
                                            AccuracyRecord{Species::Deciduous, result.deciduous}};
    write_accuracy(ctx.inv.out_dir / "accuracy.csv", acc);
    write_manifest(ctx,
                   {{"normalization", derive_seed(ctx.cfg.seed, kNormStream)},
                    {"classification", ctx.cfg.classification.seed}},
                   {"predictions.csv", "accuracy.csv"});
    ctx.out << "conifer " << csv::format_fixed(result.conifer.accuracy, 4) << " +/- "
            << csv::format_fixed(result.conifer.ci95, 4) << ", deciduous "
            << csv::format_fixed(result.deciduous.accuracy, 4) << " +/- "
            << csv::format_fixed(result.deciduous.ci95, 4) << '\n';
}

void cmd_sweep(Context& ctx) {
    const auto ds = ctx.dataset();
    EnsembleConfig ec = ctx.cfg.classification;
    ec.seed = derive_seed(ctx.cfg.seed, kSweepStream);
    const auto result = run_sweep(ds, ctx.cfg.sweep, ec);
    write_sweep(ctx.inv.out_dir / "sweep.csv", result.rows);
    write_density(ctx.inv.out_dir / "density.csv", result.density);
    write_manifest(ctx, {{"normalization", derive_seed(ctx.cfg.seed, kNormStream)}, {"sweep", ec.seed}},
                   {"sweep.csv", "density.csv"});
    ctx.out << "sweep wrote " << result.rows.size() << " rows\n";
}

void cmd_report(Context& ctx) {
    const auto rows = write_report(ctx.inv.out_dir);
    write_manifest(ctx, ordered_json::object(), {"report.csv"});
    ctx.out << "report has " << rows.size() << " rows\n";
}

struct Command {
    std::string description;
    std::function<void(Context&)> run;
};

const std::map<std::string, Command>& commands() {
    static const std::map<std::string, Command> table{
        {"synth", {"generate a synthetic forest (points, stems, truth)", cmd_synth}},
        {"normalize-intensity", {"fit intensity models and residualize intensities", cmd_normalize}},
        {"register", {"match crowns to field stems", cmd_register}},
        {"rasterize", {"write augmented network inputs to a tensor store", cmd_rasterize}},
        {"correct-labels", {"iterative ensemble mislabel correction", cmd_correct}},
        {"classify", {"cross-validated ensemble classification", cmd_classify}},
        {"sweep", {"size, augmentation, ablation, crown-class or density experiment", cmd_sweep}},
        {"report", {"collect result tables into a long-format report", cmd_report}}};
    return table;
}

// First bare word that is not an option value.
std::string first_word(std::span<const std::string> args) {
    static const std::set<std::string> with_value{"--config", "--out", "--threads", "--representation", "--ablation"};
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (with_value.contains(args[i])) {
            ++i;
            continue;
        }
        if (!args[i].starts_with("-")) return args[i];
    }
    return {};
}

}  // namespace

int run_command(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Conifer/deciduous classification of LiDAR tree crowns", "crownnet"};
    app.require_subcommand(1);
    app.fallthrough();
    Invocation inv;
    app.add_option("--config", inv.config_path, "JSON run configuration")->required();
    app.add_option("--out", inv.out_dir, "output directory");
    app.add_option("--threads", inv.threads, "worker threads (default: hardware threads)")
        ->check(CLI::PositiveNumber);
    app.add_flag("--no-intensity-norm", inv.no_intensity_norm, "skip intensity normalization");
    app.add_option("--representation", inv.representation, "dsm4 or views4")
        ->check(CLI::IsMember({"dsm4", "views4"}));
    app.add_option("--ablation", inv.ablation, "input ablation")
        ->check(CLI::IsMember({"none", "no-leaf-off", "no-leaf-on", "raw-intensity", "binary-intensity"}));
    for (const auto& [name, command] : commands())
        app.add_subcommand(name, command.description)->callback([&inv, n = name] { inv.command = n; });

    std::vector<std::string> argv(args.begin(), args.end());
    std::reverse(argv.begin(), argv.end());
    try {
        app.parse(argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        const auto word = first_word(args);
        if (!word.empty() && !commands().contains(word))
            err << "error: unknown subcommand '" << word << "'\n\n" << app.help();
        else
            err << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    }

    try {
        Context ctx{inv, load_config(inv.config_path), out};
        if (inv.no_intensity_norm) ctx.cfg.intensity_norm = false;
        if (!inv.representation.empty()) ctx.cfg.input.representation = parse_representation(inv.representation);
        if (!inv.ablation.empty()) ctx.cfg.input.ablation = parse_ablation(inv.ablation);
        const int threads = inv.threads > 0 ? inv.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
        ctx.cfg.correction.ensemble.threads = ctx.cfg.classification.threads = threads;
        fs::create_directories(inv.out_dir);
        commands().at(inv.command).run(ctx);
        return 0;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "runtime error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace crownnet
