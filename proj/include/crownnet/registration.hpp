#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "crownnet/types.hpp"

namespace crownnet {

/// Tiered score from relative height difference and lean angle (degrees).
int score_from(double height_diff_ratio, double lean_deg);

/// Scores a crown-stem pair: one of {0, 40, 70, 100}.
int pair_score(const CrownCloud& crown, const FieldStem& stem);

/// Maximum-weight one-to-one assignment on a rectangular nonnegative score
/// matrix. Returns, for each row, the matched column or -1. Zero-score edges
/// are never reported as matched.
std::vector<int> max_score_assignment(const Eigen::MatrixXi& scores);

struct RegistrationRecord {
    std::string crown_id;
    std::string stem_id;
    int score = 0;
    Species label = Species::Deciduous;
    CrownClass crown_class = CrownClass::Dominant;
};

/// Scores every pair and keeps the maximum-total matching. Dead stems are ignored.
std::vector<RegistrationRecord> register_crowns(std::span<const CrownCloud> crowns,
                                                std::span<const FieldStem> stems);

void write_registration(const std::filesystem::path& path, std::span<const RegistrationRecord> records);
std::vector<RegistrationRecord> read_registration(const std::filesystem::path& path);

}  // namespace crownnet
