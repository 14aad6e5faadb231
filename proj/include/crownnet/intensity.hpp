#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "crownnet/types.hpp"

namespace crownnet {

/// OLS fit of intensity on [1, ln(range), cos(scan angle)] for one
/// (season, return number) group.
struct IntensityModel {
    Season season = Season::LeafOn;
    int return_number = 1;
    double beta0 = 0.0;
    double beta1 = 0.0;  // ln(range)
    double beta2 = 0.0;  // cos(angle)
    double p1 = 1.0;
    double p2 = 1.0;
    double mean_intensity = 0.0;
    std::size_t n = 0;

    double predict(double range, double scan_angle_deg) const;
    bool significant(double alpha) const { return p1 < alpha && p2 < alpha; }
};

using GroupKey = std::pair<Season, int>;
using IntensityModels = std::map<GroupKey, IntensityModel>;

/// "on:2" style key used in the JSON model file.
std::string group_key(Season s, int return_number);

/// At most one leaf-on and one leaf-off vegetation point per grid cell, drawn
/// uniformly with the given seed.
std::vector<LidarPoint> sample_normalization_grid(std::span<const LidarPoint> points, double cell,
                                                  std::uint64_t seed);

/// Fits one group. Throws ValidationError on fewer than 10 samples or a
/// rank-deficient design ("degenerate regressors").
IntensityModel fit_intensity_model(std::span<const LidarPoint> samples);

/// Fits every (season, return) group present in samples with at least 10 members.
IntensityModels fit_intensity_models(std::span<const LidarPoint> samples);

/// Residualizes vegetation points of significant groups and shifts them back
/// onto the 8-bit scale. Other groups, and groups without a model, pass through.
std::vector<LidarPoint> apply_residualization(std::span<const LidarPoint> points,
                                              const IntensityModels& models, double alpha = 0.05);

void write_models(const std::filesystem::path& path, const IntensityModels& models);
IntensityModels read_models(const std::filesystem::path& path);

}  // namespace crownnet
