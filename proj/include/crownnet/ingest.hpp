#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "crownnet/types.hpp"

namespace crownnet {

/// Axis-aligned horizontal extent.
struct Bounds {
    Eigen::Vector2d min{0.0, 0.0};
    Eigen::Vector2d max{0.0, 0.0};

    void extend(const Eigen::Vector2d& p);
    static Bounds of(std::span<const LidarPoint> points);
};

/// Ground elevation grid. Cells are addressed (row, col) with row along y.
/// Binning is floor((coord - origin) / cell) on both axes.
struct Dem {
    Eigen::Vector2d origin{0.0, 0.0};
    double cell = 1.0;
    Eigen::MatrixXd elevation;

    Eigen::Index rows() const { return elevation.rows(); }
    Eigen::Index cols() const { return elevation.cols(); }

    /// Cell containing (x, y), or nullopt outside the grid.
    std::optional<std::pair<Eigen::Index, Eigen::Index>> locate(double x, double y) const;
    /// Elevation under (x, y); throws ValidationError outside the grid.
    double at(double x, double y) const;
};

/// Mean-per-cell DEM with nearest-populated-cell void fill. The grid spans the
/// ground points plus `extent` when given, so vegetation outside the ground
/// footprint still gets an elevation.
Dem build_dem(std::span<const LidarPoint> ground, const std::optional<Bounds>& extent = {});

/// Replaces each point's elevation with its height above the DEM.
std::vector<LidarPoint> height_normalize(std::span<const LidarPoint> points, const Dem& dem);

/// Keeps points with height >= threshold.
std::vector<LidarPoint> filter_canopy(std::span<const LidarPoint> points, double threshold = 3.0);

struct CrownFeatures {
    double tree_height = 0.0;
    double width = 0.0;
    double area = 0.0;
};

/// Counter-clockwise convex hull of the horizontal projections, without
/// repeated or collinear vertices.
std::vector<Eigen::Vector2d> convex_hull(std::span<const Eigen::Vector2d> pts);
double polygon_area(std::span<const Eigen::Vector2d> polygon);

/// Apex height, equivalent-circle width and hull area. Throws
/// ValidationError("degenerate crown") for fewer than three points or a
/// collinear projection.
CrownFeatures crown_features(std::span<const LidarPoint> points);

/// Builds a CrownCloud with apex and features filled in.
CrownCloud make_crown(std::string crown_id, std::vector<LidarPoint> points);

struct CrownPrepOptions {
    double canopy_threshold = 3.0;
    double min_crown_width = 1.5;
};

/// Ground points -> DEM -> heights -> canopy filter -> per-crown clouds.
/// Degenerate and narrow crowns are dropped. Output is sorted by crown_id.
std::vector<CrownCloud> prepare_crowns(std::span<const LidarPoint> points,
                                       const CrownPrepOptions& opts = {});

// Text file formats.
std::vector<LidarPoint> read_points(const std::filesystem::path& path);
void write_points(const std::filesystem::path& path, std::span<const LidarPoint> points);
/// Reads stems; dead stems are dropped unless keep_dead.
std::vector<FieldStem> read_stems(const std::filesystem::path& path, bool keep_dead = false);
void write_stems(const std::filesystem::path& path, std::span<const FieldStem> stems);

}  // namespace crownnet
