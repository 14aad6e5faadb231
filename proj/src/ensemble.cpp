#include "crownnet/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iostream>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "crownnet/csv.hpp"
#include "crownnet/rng.hpp"
#include "crownnet/stats.hpp"

namespace crownnet {

std::string to_string(Ablation a) {
    switch (a) {
        case Ablation::None: return "none";
        case Ablation::NoLeafOff: return "no-leaf-off";
        case Ablation::NoLeafOn: return "no-leaf-on";
        case Ablation::RawIntensity: return "raw-intensity";
        case Ablation::BinaryIntensity: return "binary-intensity";
    }
    return "none";
}

Ablation parse_ablation(const std::string& s) {
    for (auto a : {Ablation::None, Ablation::NoLeafOff, Ablation::NoLeafOn, Ablation::RawIntensity,
                   Ablation::BinaryIntensity})
        if (to_string(a) == s) return a;
    throw ValidationError("unknown ablation '" + s + "'");
}

std::string to_string(RepresentationKind k) { return k == RepresentationKind::Dsm4 ? "dsm4" : "views4"; }

RepresentationKind parse_representation(const std::string& s) {
    if (s == "dsm4") return RepresentationKind::Dsm4;
    if (s == "views4") return RepresentationKind::Views4;
    throw ValidationError("unknown representation '" + s + "'");
}

std::string to_string(SweepKind k) {
    switch (k) {
        case SweepKind::Size: return "size";
        case SweepKind::Augmentation: return "augmentation";
        case SweepKind::Ablation: return "ablation";
        case SweepKind::CrownClass: return "crown-class";
        case SweepKind::Density: return "density";
    }
    return "size";
}

SweepKind parse_sweep_kind(const std::string& s) {
    for (auto k : {SweepKind::Size, SweepKind::Augmentation, SweepKind::Ablation, SweepKind::CrownClass,
                   SweepKind::Density})
        if (to_string(k) == s) return k;
    throw ValidationError("unknown sweep kind '" + s + "'");
}

nn::Architecture InputConfig::architecture() const {
    if (representation == RepresentationKind::Dsm4) return nn::Architecture::Dsm;
    if (ablation == Ablation::NoLeafOff || ablation == Ablation::NoLeafOn) return nn::Architecture::ViewsReduced;
    return nn::Architecture::Views;
}

std::vector<std::size_t> LabeledDataset::indices_of(Species s) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < instances.size(); ++i)
        if (instances[i].label == s) out.push_back(i);
    return out;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    const auto workers = static_cast<std::size_t>(std::max(1, threads));
    if (workers == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(workers, n); ++w)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < n;) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    pool.clear();
    if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------

namespace {

nn::Tensor<float> to_tensor(std::span<const Image* const> planes) {
    const auto h = static_cast<int>(planes.front()->rows());
    const auto w = static_cast<int>(planes.front()->cols());
    nn::Tensor<float> t(nn::Shape{static_cast<int>(planes.size()), h, w});
    for (std::size_t c = 0; c < planes.size(); ++c)
        t.values.segment(static_cast<Eigen::Index>(c) * h * w, static_cast<Eigen::Index>(h) * w) =
            Eigen::Map<const nn::Vec<float>>(planes[c]->data(), planes[c]->size());
    return t;
}

void binarize(Image& im) { im = (im > 0.0f).cast<float>(); }

}  // namespace

nn::NetworkInput<float> make_input(const Instance& inst, int augmentation, const InputConfig& cfg) {
    const CrownCloud* source = &inst.crown;
    if (cfg.ablation == Ablation::RawIntensity) {
        if (!inst.raw_crown) throw ValidationError("raw-intensity ablation needs un-normalized crowns");
        source = &*inst.raw_crown;
    }
    const double degrees = augmentation * cfg.step_degrees;
    const CrownCloud rotated = augmentation == 0 ? *source : rotate_about_apex(*source, degrees);

    nn::NetworkInput<float> in;
    if (cfg.representation == RepresentationKind::Dsm4) {
        Dsm4 d = scale_for_network(make_dsm4(rotated));
        if (cfg.ablation == Ablation::BinaryIntensity) {
            binarize(d.channels[1]);
            binarize(d.channels[3]);
        }
        if (cfg.ablation == Ablation::NoLeafOff) d.channels[2].setZero(), d.channels[3].setZero();
        if (cfg.ablation == Ablation::NoLeafOn) d.channels[0].setZero(), d.channels[1].setZero();
        const std::array<const Image*, 4> planes{&d.channels[0], &d.channels[1], &d.channels[2], &d.channels[3]};
        in.images.push_back(to_tensor(planes));
        in.side = nn::Vec<float>::Constant(1, static_cast<float>(d.crown_area));
        return in;
    }

    Views4 v = scale_for_network(make_views4(rotated));
    if (cfg.ablation == Ablation::BinaryIntensity)
        for (auto& im : v.images) binarize(im);
    std::vector<int> keep{0, 1, 2, 3};
    if (cfg.ablation == Ablation::NoLeafOff) keep = {0, 2};
    if (cfg.ablation == Ablation::NoLeafOn) keep = {1, 3};
    for (int k : keep) {
        const std::array<const Image*, 1> plane{&v.images[static_cast<std::size_t>(k)]};
        in.images.push_back(to_tensor(plane));
    }
    in.side.resize(2);
    in.side << static_cast<float>(v.crown_width), static_cast<float>(v.tree_height);
    return in;
}

std::vector<std::vector<std::size_t>> balanced_cyclic_sample(const LabeledDataset& dataset, int per_class,
                                                             int n_networks, std::uint64_t seed) {
    if (per_class < 1) throw ValidationError("per_class must be at least 1");
    std::vector<std::vector<std::size_t>> memberships(static_cast<std::size_t>(std::max(0, n_networks)));
    for (Species s : {Species::Conifer, Species::Deciduous}) {
        const auto members = dataset.indices_of(s);
        if (members.size() < static_cast<std::size_t>(per_class))
            throw ValidationError("class " + std::string(to_string(s)) + " has " + std::to_string(members.size()) +
                                  " instances, fewer than per_class = " + std::to_string(per_class));
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(class_index(s))));
        std::vector<std::size_t> pool = members;
        rng.shuffle(std::span<std::size_t>(pool));
        std::size_t pos = 0;
        for (auto& m : memberships) {
            std::vector<std::size_t> drawn;
            drawn.reserve(static_cast<std::size_t>(per_class));
            while (drawn.size() < static_cast<std::size_t>(per_class)) {
                if (pos == pool.size()) {
                    rng.shuffle(std::span<std::size_t>(pool));
                    pos = 0;
                }
                // A draw spanning a pool restart must not repeat an instance.
                std::size_t pick = pos;
                while (std::find(drawn.begin(), drawn.end(), pool[pick]) != drawn.end()) ++pick;
                std::swap(pool[pos], pool[pick]);
                drawn.push_back(pool[pos++]);
            }
            m.insert(m.end(), drawn.begin(), drawn.end());
        }
    }
    for (auto& m : memberships) std::sort(m.begin(), m.end());
    return memberships;
}

bool TrainedNetwork::trained_on(std::size_t instance) const {
    return std::binary_search(membership.begin(), membership.end(), instance);
}

namespace {

constexpr std::size_t kInputCacheBytes = std::size_t{256} << 20;

std::size_t input_bytes(const InputConfig& cfg) {
    return cfg.representation == RepresentationKind::Dsm4 ? 4u * 128 * 128 * sizeof(float)
                                                          : 4u * 64 * 64 * sizeof(float);
}

}  // namespace

EnsembleRun train_ensemble(const LabeledDataset& dataset, const EnsembleConfig& cfg) {
    EnsembleRun run;
    run.seed = cfg.seed;
    run.config = cfg;
    const auto memberships = balanced_cyclic_sample(dataset, cfg.per_class, cfg.networks, derive_seed(cfg.seed, 1));
    run.networks.resize(memberships.size());
    const auto arch = dataset.input.architecture();
    const int augs = dataset.input.augmentations;

    parallel_for(memberships.size(), cfg.threads, [&](std::size_t k) {
        auto& net = run.networks[k];
        net.seed = derive_seed(cfg.seed, 1000 + k);
        net.membership = memberships[k];
        net.params = nn::init_params<float>(arch, derive_seed(net.seed, 1));

        std::vector<std::pair<std::size_t, int>> samples;
        std::vector<int> labels;
        for (auto i : net.membership)
            for (int a = 0; a < augs; ++a) {
                samples.emplace_back(i, a);
                labels.push_back(class_index(dataset.instances[i].label));
            }

        std::vector<nn::NetworkInput<float>> cache;
        if (samples.size() * input_bytes(dataset.input) <= kInputCacheBytes / std::max(1, cfg.threads)) {
            cache.reserve(samples.size());
            for (const auto& [i, a] : samples) cache.push_back(make_input(dataset.instances[i], a, dataset.input));
        }
        const nn::InputFn<float> input = [&](std::size_t s) {
            if (!cache.empty()) return cache[s];
            return make_input(dataset.instances[samples[s].first], samples[s].second, dataset.input);
        };
        nn::TrainOptions opts;
        opts.epochs = cfg.epochs;
        opts.batch_size = cfg.batch_size;
        opts.learning_rate = cfg.learning_rate;
        opts.seed = derive_seed(net.seed, 2);
        net.training_accuracy = nn::train_network(net.params, input, labels, opts);
    });
    return run;
}

double holdout_accuracy(const TrainedNetwork& net, const LabeledDataset& dataset, std::size_t instance) {
    if (net.trained_on(instance)) throw ValidationError("instance was used to train this network");
    const auto& inst = dataset.instances.at(instance);
    const int augs = dataset.input.augmentations;
    int correct = 0;
    for (int a = 0; a < augs; ++a)
        correct += nn::predict_class(net.params, make_input(inst, a, dataset.input)) == class_index(inst.label);
    return static_cast<double>(correct) / augs;
}

HoldoutTable evaluate_holdout(const EnsembleRun& run, const LabeledDataset& dataset, int threads) {
    const auto n_nets = static_cast<Eigen::Index>(run.networks.size());
    const auto n_inst = static_cast<Eigen::Index>(dataset.instances.size());
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    HoldoutTable table{Eigen::MatrixXd::Constant(n_nets, n_inst, nan), Eigen::MatrixXd::Constant(n_nets, n_inst, nan)};
    const int augs = dataset.input.augmentations;

    // Instance-major so each augmentation is rasterized once for all networks.
    parallel_for(static_cast<std::size_t>(n_inst), threads, [&](std::size_t i) {
        const auto& inst = dataset.instances[i];
        std::vector<Eigen::Index> holders;
        for (Eigen::Index k = 0; k < n_nets; ++k)
            if (!run.networks[static_cast<std::size_t>(k)].trained_on(i)) holders.push_back(k);
        if (holders.empty()) return;
        Eigen::VectorXd correct = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(holders.size()));
        Eigen::VectorXd p_sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(holders.size()));
        for (int a = 0; a < augs; ++a) {
            const auto input = make_input(inst, a, dataset.input);
            for (std::size_t h = 0; h < holders.size(); ++h) {
                const auto probs = nn::network_forward(run.networks[static_cast<std::size_t>(holders[h])].params, input);
                const int predicted = probs(0) >= probs(1) ? 0 : 1;
                correct(static_cast<Eigen::Index>(h)) += predicted == class_index(inst.label);
                p_sum(static_cast<Eigen::Index>(h)) += probs(0);
            }
        }
        for (std::size_t h = 0; h < holders.size(); ++h) {
            table.accuracy(holders[h], static_cast<Eigen::Index>(i)) = correct(static_cast<Eigen::Index>(h)) / augs;
            table.p_conifer(holders[h], static_cast<Eigen::Index>(i)) = p_sum(static_cast<Eigen::Index>(h)) / augs;
        }
    });
    return table;
}

std::vector<FlipDecision> mislabel_iteration(const EnsembleRun& run, const LabeledDataset& dataset, double alpha,
                                             const HoldoutTable* table) {
    HoldoutTable local;
    if (!table) {
        local = evaluate_holdout(run, dataset, run.config.threads);
        table = &local;
    }
    std::vector<FlipDecision> out;
    out.reserve(dataset.instances.size());
    for (std::size_t i = 0; i < dataset.instances.size(); ++i) {
        FlipDecision d;
        d.crown_id = dataset.instances[i].crown_id();
        for (std::size_t k = 0; k < run.networks.size(); ++k) {
            const double acc_ni = table->accuracy(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i));
            if (std::isnan(acc_ni)) continue;
            d.d_values.push_back(acc_ni - (1.0 - run.networks[k].training_accuracy));
        }
        if (d.d_values.size() >= 2) {
            const auto t = stats::one_sided_t_test_below_zero(d.d_values);
            d.tested = true;
            d.t_statistic = t.t_statistic;
            d.p_value = t.p_value;
            d.flipped = t.p_value < alpha;
        }
        out.push_back(std::move(d));
    }
    return out;
}

CorrectionResult correct_mislabels(LabeledDataset dataset, const CorrectionConfig& cfg) {
    CorrectionResult result;
    for (int it = 1; it <= cfg.max_iterations; ++it) {
        EnsembleConfig ec = cfg.ensemble;
        ec.seed = derive_seed(cfg.ensemble.seed, static_cast<std::uint64_t>(it));
        const auto run = train_ensemble(dataset, ec);
        const auto decisions = mislabel_iteration(run, dataset, cfg.alpha);

        CorrectionIteration row;
        row.iteration = it;
        double acc_sum = 0.0;
        for (const auto& n : run.networks) acc_sum += n.training_accuracy;
        row.mean_training_accuracy = run.networks.empty() ? 0.0 : acc_sum / static_cast<double>(run.networks.size());
        for (std::size_t i = 0; i < decisions.size(); ++i) {
            if (!decisions[i].tested) {
                ++row.skipped;
                continue;
            }
            if (!decisions[i].flipped) continue;
            auto& inst = dataset.instances[i];
            (inst.label == Species::Conifer ? row.flips_conifer : row.flips_deciduous) += 1;
            inst.label = flipped(inst.label);
        }
        if (row.skipped > 0)
            std::cerr << "warning: iteration " << it << ": " << row.skipped
                      << " instances held out by fewer than two networks were not tested\n";
        result.history.push_back(row);
        if (row.flips_conifer + row.flips_deciduous == 0) {
            result.converged = true;
            break;
        }
    }
    if (!result.converged)
        std::cerr << "warning: mislabel correction did not converge within " << cfg.max_iterations << " iterations\n";
    result.dataset = std::move(dataset);
    return result;
}

ClassAccuracy class_accuracy(std::span<const InstancePrediction> predictions, Species species) {
    ClassAccuracy a;
    std::size_t correct = 0;
    for (const auto& p : predictions) {
        if (p.label != species || p.held_out_by == 0) continue;
        ++a.n;
        correct += p.predicted == p.label;
    }
    if (a.n > 0) {
        a.accuracy = static_cast<double>(correct) / static_cast<double>(a.n);
        a.ci95 = stats::binomial_ci95(a.accuracy, a.n);
    }
    return a;
}

ClassificationResult ensemble_classify(const LabeledDataset& dataset, const EnsembleConfig& cfg) {
    const auto run = train_ensemble(dataset, cfg);
    const auto table = evaluate_holdout(run, dataset, cfg.threads);
    ClassificationResult result;
    for (std::size_t i = 0; i < dataset.instances.size(); ++i) {
        const auto& inst = dataset.instances[i];
        InstancePrediction p;
        p.crown_id = inst.crown_id();
        p.label = inst.label;
        p.crown_class = inst.crown_class;
        double sum = 0.0;
        for (Eigen::Index k = 0; k < table.p_conifer.rows(); ++k) {
            const double v = table.p_conifer(k, static_cast<Eigen::Index>(i));
            if (std::isnan(v)) continue;
            sum += v;
            ++p.held_out_by;
        }
        if (p.held_out_by == 0) {
            ++result.excluded;
            std::cerr << "warning: " << p.crown_id << " was used by every network; excluded from accuracy\n";
            p.p_conifer = std::numeric_limits<double>::quiet_NaN();
        } else {
            p.p_conifer = sum / p.held_out_by;
            p.predicted = p.p_conifer >= 0.5 ? Species::Conifer : Species::Deciduous;
        }
        result.predictions.push_back(std::move(p));
    }
    result.conifer = class_accuracy(result.predictions, Species::Conifer);
    result.deciduous = class_accuracy(result.predictions, Species::Deciduous);
    return result;
}

double point_density(const CrownCloud& crown, Season season) {
    if (!(crown.area > 0.0)) return 0.0;
    const auto n = std::count_if(crown.points.begin(), crown.points.end(),
                                 [&](const LidarPoint& p) { return p.season == season; });
    return static_cast<double>(n) / crown.area;
}

namespace {

SweepRow row_from(const std::string& variant, const std::string& param, const ClassAccuracy& con,
                  const ClassAccuracy& dec) {
    return {variant, param, con.accuracy, con.ci95, dec.accuracy, dec.ci95};
}

LabeledDataset stratified_subsample(const LabeledDataset& ds, double fraction, std::uint64_t seed) {
    LabeledDataset out;
    out.input = ds.input;
    Rng rng(seed);
    std::vector<std::size_t> keep;
    for (Species s : {Species::Conifer, Species::Deciduous}) {
        auto idx = ds.indices_of(s);
        rng.shuffle(std::span<std::size_t>(idx));
        const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(fraction * idx.size())));
        keep.insert(keep.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(std::min(n, idx.size())));
    }
    std::sort(keep.begin(), keep.end());
    for (auto i : keep) out.instances.push_back(ds.instances[i]);
    return out;
}

}  // namespace

SweepResult run_sweep(const LabeledDataset& dataset, const SweepSpec& spec, const EnsembleConfig& cfg) {
    SweepResult result;
    const int repeats = std::max(1, spec.repeats);
    switch (spec.kind) {
        case SweepKind::Size: {
            for (std::size_t v = 0; v < spec.values.size(); ++v) {
                const double fraction = spec.values[v];
                SweepRow acc{"size", csv::format(fraction)};
                for (int r = 0; r < repeats; ++r) {
                    const auto sub = stratified_subsample(dataset, fraction, derive_seed(cfg.seed, 100 * v + r));
                    EnsembleConfig ec = cfg;
                    const auto smallest =
                        std::min(sub.indices_of(Species::Conifer).size(), sub.indices_of(Species::Deciduous).size());
                    ec.per_class = static_cast<int>(std::clamp<long>(std::lround(cfg.per_class * fraction), 1,
                                                                     static_cast<long>(smallest)));
                    ec.seed = derive_seed(cfg.seed, 10000 + 100 * v + r);
                    const auto res = ensemble_classify(sub, ec);
                    acc.acc_conifer += res.conifer.accuracy / repeats;
                    acc.ci_conifer += res.conifer.ci95 / repeats;
                    acc.acc_deciduous += res.deciduous.accuracy / repeats;
                    acc.ci_deciduous += res.deciduous.ci95 / repeats;
                }
                result.rows.push_back(acc);
            }
            break;
        }
        case SweepKind::Augmentation: {
            for (std::size_t v = 0; v < spec.values.size(); ++v) {
                LabeledDataset ds = dataset;
                ds.input.augmentations = static_cast<int>(spec.values[v]);
                if (ds.input.augmentations < 1) throw ValidationError("augmentation count must be positive");
                ds.input.step_degrees = 360.0 / ds.input.augmentations;
                EnsembleConfig ec = cfg;
                ec.seed = derive_seed(cfg.seed, 20000 + v);
                const auto res = ensemble_classify(ds, ec);
                result.rows.push_back(
                    row_from("augmentation", std::to_string(ds.input.augmentations), res.conifer, res.deciduous));
            }
            break;
        }
        case SweepKind::Ablation: {
            for (std::size_t v = 0; v < spec.ablations.size(); ++v) {
                LabeledDataset ds = dataset;
                ds.input.ablation = spec.ablations[v];
                const auto res = ensemble_classify(ds, cfg);
                result.rows.push_back(row_from("ablation", to_string(spec.ablations[v]), res.conifer, res.deciduous));
            }
            break;
        }
        case SweepKind::CrownClass:
        case SweepKind::Density: {
            const auto res = ensemble_classify(dataset, cfg);
            std::vector<InstancePrediction> over, under;
            for (const auto& p : res.predictions) (is_overstory(p.crown_class) ? over : under).push_back(p);
            if (spec.kind == SweepKind::CrownClass) {
                result.rows.push_back(row_from("crown_class", "all", res.conifer, res.deciduous));
                result.rows.push_back(row_from("crown_class", "overstory", class_accuracy(over, Species::Conifer),
                                               class_accuracy(over, Species::Deciduous)));
                result.rows.push_back(row_from("crown_class", "understory", class_accuracy(under, Species::Conifer),
                                               class_accuracy(under, Species::Deciduous)));
                break;
            }
            for (Season season : {Season::LeafOn, Season::LeafOff}) {
                for (const std::string stratum : {"all", "overstory", "understory"}) {
                    std::vector<double> density, p_correct;
                    for (std::size_t i = 0; i < res.predictions.size(); ++i) {
                        const auto& p = res.predictions[i];
                        if (p.held_out_by == 0) continue;
                        if (stratum == "overstory" && !is_overstory(p.crown_class)) continue;
                        if (stratum == "understory" && is_overstory(p.crown_class)) continue;
                        density.push_back(point_density(dataset.instances[i].crown, season));
                        p_correct.push_back(p.label == Species::Conifer ? p.p_conifer : 1.0 - p.p_conifer);
                    }
                    result.density.push_back({std::string(season == Season::LeafOn ? "leaf_on" : "leaf_off"), stratum,
                                              stats::pearson(density, p_correct), density.size()});
                }
            }
            result.rows.push_back(row_from("density", "all", res.conifer, res.deciduous));
            break;
        }
    }
    return result;
}

}  // namespace crownnet
