#include "crownnet/types.hpp"

#include <cmath>

namespace crownnet {

void validate(const LidarPoint& p) {
    auto fail = [&](const std::string& what) {
        throw ValidationError("invalid point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                              ", " + std::to_string(p.z) + "): " + what);
    };
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) fail("non-finite coordinate");
    if (p.intensity < 0 || p.intensity > 255) fail("intensity outside [0,255]");
    if (p.return_number < 1 || p.return_number > 4) fail("return number outside 1..4");
    if (p.season == Season::LeafOff && p.return_number > 3) fail("leaf-off return number above 3");
    if (!(p.range > 0.0)) fail("range must be positive");
    if (!(std::abs(p.scan_angle) <= 30.0)) fail("scan angle outside [-30,30]");
}

std::size_t find_apex(const std::vector<LidarPoint>& points) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < points.size(); ++i)
        if (points[i].z > points[best].z) best = i;
    return best;
}

std::string_view to_string(Season s) { return s == Season::LeafOn ? "on" : "off"; }
std::string_view to_string(PointClass c) { return c == PointClass::Ground ? "ground" : "vegetation"; }
std::string_view to_string(Species s) { return s == Species::Conifer ? "conifer" : "deciduous"; }
std::string_view to_string(StemStatus s) { return s == StemStatus::Live ? "live" : "dead"; }

std::string_view to_string(CrownClass c) {
    switch (c) {
        case CrownClass::Dominant: return "dominant";
        case CrownClass::Codominant: return "codominant";
        case CrownClass::Intermediate: return "intermediate";
        case CrownClass::Overtopped: return "overtopped";
    }
    return "dominant";
}

namespace {
[[noreturn]] void bad(std::string_view what, std::string_view value) {
    throw ValidationError("unknown " + std::string(what) + " '" + std::string(value) + "'");
}
}  // namespace

Season parse_season(std::string_view s) {
    if (s == "on") return Season::LeafOn;
    if (s == "off") return Season::LeafOff;
    bad("season", s);
}

PointClass parse_point_class(std::string_view s) {
    if (s == "ground") return PointClass::Ground;
    if (s == "vegetation") return PointClass::Vegetation;
    bad("point class", s);
}

Species parse_species(std::string_view s) {
    if (s == "conifer") return Species::Conifer;
    if (s == "deciduous") return Species::Deciduous;
    bad("species", s);
}

CrownClass parse_crown_class(std::string_view s) {
    if (s == "dominant") return CrownClass::Dominant;
    if (s == "codominant" || s == "co-dominant") return CrownClass::Codominant;
    if (s == "intermediate") return CrownClass::Intermediate;
    if (s == "overtopped") return CrownClass::Overtopped;
    bad("crown class", s);
}

StemStatus parse_stem_status(std::string_view s) {
    if (s == "live") return StemStatus::Live;
    if (s == "dead") return StemStatus::Dead;
    bad("stem status", s);
}

}  // namespace crownnet
