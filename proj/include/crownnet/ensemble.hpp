#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "crownnet/rasterize.hpp"
#include "crownnet/tinynet.hpp"
#include "crownnet/types.hpp"

namespace crownnet {

enum class Ablation { None, NoLeafOff, NoLeafOn, RawIntensity, BinaryIntensity };

std::string to_string(Ablation a);
Ablation parse_ablation(const std::string& s);
std::string to_string(RepresentationKind k);
RepresentationKind parse_representation(const std::string& s);

/// How an instance becomes network inputs.
struct InputConfig {
    RepresentationKind representation = RepresentationKind::Views4;
    int augmentations = 180;
    double step_degrees = 2.0;
    Ablation ablation = Ablation::None;

    nn::Architecture architecture() const;
};

struct Instance {
    CrownCloud crown;
    std::optional<CrownCloud> raw_crown;  // intensities before normalization
    Species label = Species::Deciduous;
    Species original_label = Species::Deciduous;
    CrownClass crown_class = CrownClass::Dominant;

    const std::string& crown_id() const { return crown.crown_id; }
};

struct LabeledDataset {
    std::vector<Instance> instances;
    InputConfig input;

    std::vector<std::size_t> indices_of(Species s) const;
};

inline int class_index(Species s) { return s == Species::Conifer ? 0 : 1; }
inline Species class_of(int index) { return index == 0 ? Species::Conifer : Species::Deciduous; }

/// Rasterized, scaled, ablated network input for one augmentation of one instance.
nn::NetworkInput<float> make_input(const Instance& inst, int augmentation, const InputConfig& cfg);

/// Training-set memberships (sorted instance indices), per_class of each class
/// per network, drawn without replacement from per-class pools that reshuffle
/// when exhausted.
std::vector<std::vector<std::size_t>> balanced_cyclic_sample(const LabeledDataset& dataset, int per_class,
                                                             int n_networks, std::uint64_t seed);

struct EnsembleConfig {
    int networks = 50;
    int per_class = 100;
    int epochs = 5;
    int batch_size = 32;
    double learning_rate = 0.01;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct TrainedNetwork {
    nn::NetworkParams<float> params;
    double training_accuracy = 0.0;  // acc_n
    std::vector<std::size_t> membership;
    std::uint64_t seed = 0;

    bool trained_on(std::size_t instance) const;
};

struct EnsembleRun {
    std::vector<TrainedNetwork> networks;
    std::uint64_t seed = 0;
    EnsembleConfig config;
};

EnsembleRun train_ensemble(const LabeledDataset& dataset, const EnsembleConfig& cfg);

/// Fraction of the instance's augmentations classified as its current label.
double holdout_accuracy(const TrainedNetwork& net, const LabeledDataset& dataset, std::size_t instance);

/// Held-out evaluation of every network on every instance it did not train
/// on. Entries for training members are NaN.
struct HoldoutTable {
    Eigen::MatrixXd accuracy;   // networks x instances, acc_ni
    Eigen::MatrixXd p_conifer;  // mean softmax conifer probability over augmentations
};

HoldoutTable evaluate_holdout(const EnsembleRun& run, const LabeledDataset& dataset, int threads = 1);

struct FlipDecision {
    std::string crown_id;
    std::vector<double> d_values;
    double t_statistic = 0.0;
    double p_value = 1.0;
    bool tested = false;
    bool flipped = false;
};

std::vector<FlipDecision> mislabel_iteration(const EnsembleRun& run, const LabeledDataset& dataset,
                                             double alpha = 1e-8, const HoldoutTable* table = nullptr);

struct CorrectionConfig {
    EnsembleConfig ensemble{100, 80, 3, 32, 0.01, 0, 1};
    double alpha = 1e-8;
    int max_iterations = 20;
};

struct CorrectionIteration {
    int iteration = 0;
    int flips_conifer = 0;    // conifer labels turned deciduous
    int flips_deciduous = 0;  // deciduous labels turned conifer
    double mean_training_accuracy = 0.0;
    int skipped = 0;          // instances held out by fewer than two networks
};

struct CorrectionResult {
    LabeledDataset dataset;
    std::vector<CorrectionIteration> history;
    bool converged = false;
};

CorrectionResult correct_mislabels(LabeledDataset dataset, const CorrectionConfig& cfg);

struct InstancePrediction {
    std::string crown_id;
    Species label = Species::Deciduous;
    Species predicted = Species::Deciduous;
    double p_conifer = 0.0;
    int held_out_by = 0;
    CrownClass crown_class = CrownClass::Dominant;
};

struct ClassAccuracy {
    double accuracy = 0.0;
    double ci95 = 0.0;
    std::size_t n = 0;
};

struct ClassificationResult {
    std::vector<InstancePrediction> predictions;
    ClassAccuracy conifer;
    ClassAccuracy deciduous;
    std::size_t excluded = 0;  // held out by no network
};

ClassificationResult ensemble_classify(const LabeledDataset& dataset, const EnsembleConfig& cfg);

/// Accuracy summary over a subset of predictions.
ClassAccuracy class_accuracy(std::span<const InstancePrediction> predictions, Species species);

enum class SweepKind { Size, Augmentation, Ablation, CrownClass, Density };

std::string to_string(SweepKind k);
SweepKind parse_sweep_kind(const std::string& s);

struct SweepSpec {
    SweepKind kind = SweepKind::Size;
    std::vector<double> values;           // fractions or augmentation counts
    std::vector<Ablation> ablations;      // for SweepKind::Ablation
    int repeats = 1;
};

struct SweepRow {
    std::string variant;
    std::string param;
    double acc_conifer = 0.0;
    double ci_conifer = 0.0;
    double acc_deciduous = 0.0;
    double ci_deciduous = 0.0;
};

struct DensityCorrelation {
    std::string season;
    std::string stratum;  // all, overstory, understory
    double pearson = 0.0;
    std::size_t n = 0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<DensityCorrelation> density;
};

SweepResult run_sweep(const LabeledDataset& dataset, const SweepSpec& spec, const EnsembleConfig& cfg);

/// Points per m^2 of hull area for one season.
double point_density(const CrownCloud& crown, Season season);

/// Runs fn(i) for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace crownnet
