#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace crownnet {

/// Raised for malformed inputs and violated preconditions.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Season { LeafOn, LeafOff };
enum class PointClass { Ground, Vegetation };
enum class Species { Conifer, Deciduous };
enum class CrownClass { Dominant, Codominant, Intermediate, Overtopped };
enum class StemStatus { Live, Dead };

struct LidarPoint {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;  // elevation, or height above ground once normalized
    int intensity = 0;
    int return_number = 1;
    double scan_angle = 0.0;  // degrees from nadir
    double range = 1.0;       // meters
    Season season = Season::LeafOn;
    PointClass pclass = PointClass::Vegetation;
    std::string crown_id;  // empty for ground points
};

/// Throws ValidationError when a point breaks the attribute ranges.
void validate(const LidarPoint& p);

struct CrownCloud {
    std::string crown_id;
    std::vector<LidarPoint> points;
    std::size_t apex = 0;  // index into points
    double area = 0.0;
    double width = 0.0;
    double tree_height = 0.0;

    const LidarPoint& apex_point() const { return points.at(apex); }
};

/// Index of the highest point; first wins on equal heights.
std::size_t find_apex(const std::vector<LidarPoint>& points);

struct FieldStem {
    std::string stem_id;
    double x = 0.0;
    double y = 0.0;
    double height = 0.0;
    Species species = Species::Deciduous;
    CrownClass crown_class = CrownClass::Dominant;
    StemStatus status = StemStatus::Live;
};

std::string_view to_string(Season s);
std::string_view to_string(PointClass c);
std::string_view to_string(Species s);
std::string_view to_string(CrownClass c);
std::string_view to_string(StemStatus s);

Season parse_season(std::string_view s);
PointClass parse_point_class(std::string_view s);
Species parse_species(std::string_view s);
CrownClass parse_crown_class(std::string_view s);
StemStatus parse_stem_status(std::string_view s);

inline bool is_overstory(CrownClass c) {
    return c == CrownClass::Dominant || c == CrownClass::Codominant;
}

inline Species flipped(Species s) {
    return s == Species::Conifer ? Species::Deciduous : Species::Conifer;
}

}  // namespace crownnet
