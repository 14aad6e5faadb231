#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "crownnet/types.hpp"

namespace crownnet {

/// Range of a uniformly drawn quantity.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct IntensityDist {
    double mean = 100.0;
    double sd = 10.0;
};

/// Knobs of the synthetic forest. Conifers keep their foliage in the leaf-off
/// acquisition, deciduous crowns leave only sparse branch returns.
struct SynthParams {
    int crowns = 400;
    double conifer_fraction = 0.08;

    Interval tree_height{12.0, 24.0};
    // conifer cone
    Interval cone_radius{1.8, 3.2};
    Interval cone_depth_ratio{0.45, 0.7};
    // deciduous ellipsoid
    Interval ellipsoid_radius{1.8, 3.2};
    Interval ellipsoid_depth{2.5, 4.5};

    double leaf_on_density = 12.0;  // points per m^2 of crown footprint
    double conifer_retention = 0.8;
    double deciduous_retention = 0.05;

    /// Fraction of conifers whose leaf-on returns look broadleaf (shape and
    /// brightness), e.g. crowns seen through overstory gaps.
    double conifer_leaf_on_ambiguity = 0.35;

    IntensityDist conifer_on{150.0, 12.0};
    IntensityDist deciduous_on{105.0, 12.0};
    IntensityDist conifer_off{130.0, 12.0};
    IntensityDist deciduous_off{60.0, 15.0};

    /// Leaf-on intensity response to ln(range) and cos(scan angle).
    double range_coefficient = -20.0;
    double angle_coefficient = 30.0;

    double gps_jitter = 0.5;  // metres, per axis
    double label_noise = 0.0;
    double spacing = 10.0;  // metres between crown centres
    double ground_density = 0.5;
    double dead_stem_fraction = 0.03;
    std::uint64_t seed = 1;
};

void validate(const SynthParams& p);

/// One crown with heights above ground, centred at (cx, cy).
CrownCloud generate_crown(Species species, const SynthParams& params, std::uint64_t seed, double cx = 0.0,
                          double cy = 0.0, const std::string& crown_id = "c");

struct TruthRecord {
    std::string crown_id;
    Species true_label = Species::Deciduous;
    Species recorded_label = Species::Deciduous;
};

struct SynthDataset {
    std::vector<LidarPoint> points;  // ground + vegetation, z as elevation
    std::vector<FieldStem> stems;
    std::vector<TruthRecord> truth;
    std::vector<CrownCloud> crowns;  // z as height above ground
};

SynthDataset generate_dataset(const SynthParams& params);

/// Terrain elevation used for the synthetic plots.
double synth_terrain(double x, double y);

void write_truth(const std::filesystem::path& path, std::span<const TruthRecord> truth);
std::vector<TruthRecord> read_truth(const std::filesystem::path& path);

}  // namespace crownnet
