#include "crownnet/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "crownnet/csv.hpp"

namespace crownnet {

void Bounds::extend(const Eigen::Vector2d& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
}

Bounds Bounds::of(std::span<const LidarPoint> points) {
    Bounds b;
    if (points.empty()) return b;
    b.min = b.max = Eigen::Vector2d(points.front().x, points.front().y);
    for (const auto& p : points) b.extend({p.x, p.y});
    return b;
}

std::optional<std::pair<Eigen::Index, Eigen::Index>> Dem::locate(double x, double y) const {
    const double c = std::floor((x - origin.x()) / cell);
    const double r = std::floor((y - origin.y()) / cell);
    if (!(r >= 0 && c >= 0 && r < static_cast<double>(rows()) && c < static_cast<double>(cols())))
        return std::nullopt;
    return std::make_pair(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
}

double Dem::at(double x, double y) const {
    const auto rc = locate(x, y);
    if (!rc)
        throw ValidationError("point (" + csv::format(x) + ", " + csv::format(y) +
                              ") outside DEM extent");
    return elevation(rc->first, rc->second);
}

namespace {

// Exact nearest populated cell under squared integer distance; ties go to the
// lowest (row, col).
void fill_voids(Eigen::MatrixXd& elev, const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& populated) {
    const Eigen::Index rows = elev.rows();
    const Eigen::Index cols = elev.cols();
    const Eigen::MatrixXd source = elev;
    const Eigen::Index max_ring = std::max(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            if (populated(r, c)) continue;
            long best_d2 = std::numeric_limits<long>::max();
            Eigen::Index br = -1, bc = -1;
            for (Eigen::Index k = 1; k <= max_ring; ++k) {
                if (k * k > best_d2) break;
                for (Eigen::Index dr = -k; dr <= k; ++dr) {
                    for (Eigen::Index dc = -k; dc <= k; ++dc) {
                        if (std::max(std::abs(dr), std::abs(dc)) != k) continue;
                        const Eigen::Index rr = r + dr, cc = c + dc;
                        if (rr < 0 || cc < 0 || rr >= rows || cc >= cols || !populated(rr, cc)) continue;
                        const long d2 = dr * dr + dc * dc;
                        if (d2 < best_d2 || (d2 == best_d2 && std::make_pair(rr, cc) < std::make_pair(br, bc))) {
                            best_d2 = d2;
                            br = rr;
                            bc = cc;
                        }
                    }
                }
            }
            elev(r, c) = source(br, bc);
        }
    }
}

}  // namespace

Dem build_dem(std::span<const LidarPoint> ground, const std::optional<Bounds>& extent) {
    if (ground.empty()) throw ValidationError("no ground points");
    Bounds b = Bounds::of(ground);
    if (extent) {
        b.extend(extent->min);
        b.extend(extent->max);
    }
    Dem dem;
    dem.cell = 1.0;
    dem.origin = (b.min / dem.cell).array().floor().matrix() * dem.cell;
    const auto cols = static_cast<Eigen::Index>(std::floor((b.max.x() - dem.origin.x()) / dem.cell)) + 1;
    const auto rows = static_cast<Eigen::Index>(std::floor((b.max.y() - dem.origin.y()) / dem.cell)) + 1;

    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(rows, cols);
    Eigen::MatrixXi count = Eigen::MatrixXi::Zero(rows, cols);
    dem.elevation.resize(rows, cols);
    for (const auto& p : ground) {
        const auto rc = dem.locate(p.x, p.y);
        sum(rc->first, rc->second) += p.z;
        count(rc->first, rc->second) += 1;
    }
    const auto populated = (count.array() > 0).matrix().eval();
    dem.elevation = (populated.array()).select(sum.array() / count.cast<double>().array().max(1.0), 0.0);
    fill_voids(dem.elevation, populated);
    return dem;
}

std::vector<LidarPoint> height_normalize(std::span<const LidarPoint> points, const Dem& dem) {
    std::vector<LidarPoint> out(points.begin(), points.end());
    for (auto& p : out) p.z -= dem.at(p.x, p.y);
    return out;
}

std::vector<LidarPoint> filter_canopy(std::span<const LidarPoint> points, double threshold) {
    std::vector<LidarPoint> out;
    std::copy_if(points.begin(), points.end(), std::back_inserter(out),
                 [&](const LidarPoint& p) { return p.z >= threshold; });
    return out;
}

namespace {
double cross(const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}
}  // namespace

std::vector<Eigen::Vector2d> convex_hull(std::span<const Eigen::Vector2d> input) {
    std::vector<Eigen::Vector2d> pts(input.begin(), input.end());
    auto less = [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    };
    std::sort(pts.begin(), pts.end(), less);
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;

    std::vector<Eigen::Vector2d> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

double polygon_area(std::span<const Eigen::Vector2d> poly) {
    double twice = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const auto& a = poly[i];
        const auto& b = poly[(i + 1) % poly.size()];
        twice += a.x() * b.y() - b.x() * a.y();
    }
    return std::abs(twice) / 2.0;
}

CrownFeatures crown_features(std::span<const LidarPoint> points) {
    if (points.size() < 3) throw ValidationError("degenerate crown");
    std::vector<Eigen::Vector2d> xy;
    xy.reserve(points.size());
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& p : points) {
        xy.emplace_back(p.x, p.y);
        top = std::max(top, p.z);
    }
    const auto hull = convex_hull(xy);
    const double area = hull.size() >= 3 ? polygon_area(hull) : 0.0;
    const Bounds b = Bounds::of(points);
    const double span = (b.max - b.min).norm();
    if (!(area > 1e-12 * span * span)) throw ValidationError("degenerate crown");
    return {top, std::sqrt(4.0 * area / M_PI), area};
}

CrownCloud make_crown(std::string crown_id, std::vector<LidarPoint> points) {
    CrownCloud c;
    c.crown_id = std::move(crown_id);
    const auto f = crown_features(points);
    c.points = std::move(points);
    c.apex = find_apex(c.points);
    c.area = f.area;
    c.width = f.width;
    c.tree_height = f.tree_height;
    return c;
}

std::vector<CrownCloud> prepare_crowns(std::span<const LidarPoint> points, const CrownPrepOptions& opts) {
    std::vector<LidarPoint> ground, vegetation;
    for (const auto& p : points) {
        if (p.pclass == PointClass::Ground)
            ground.push_back(p);
        else if (!p.crown_id.empty())
            vegetation.push_back(p);
    }
    const Dem dem = build_dem(ground, Bounds::of(vegetation));
    const auto canopy = filter_canopy(height_normalize(vegetation, dem), opts.canopy_threshold);

    std::map<std::string, std::vector<LidarPoint>> grouped;
    for (const auto& p : canopy) grouped[p.crown_id].push_back(p);

    std::vector<CrownCloud> crowns;
    for (auto& [id, pts] : grouped) {
        try {
            auto crown = make_crown(id, std::move(pts));
            if (crown.width >= opts.min_crown_width) crowns.push_back(std::move(crown));
        } catch (const ValidationError&) {
            // degenerate crowns are noise
        }
    }
    return crowns;
}

// ---------------------------------------------------------------------------

std::vector<LidarPoint> read_points(const std::filesystem::path& path) {
    const auto t = csv::read(path);
    const std::size_t ci = t.column("crown_id"), xi = t.column("x"), yi = t.column("y"),
                      zi = t.column("z"), ii = t.column("intensity"), ri = t.column("return_number"),
                      ai = t.column("scan_angle"), gi = t.column("range"), si = t.column("season"),
                      pi = t.column("pclass");
    std::vector<LidarPoint> out;
    out.reserve(t.rows.size());
    for (const auto& row : t.rows) {
        LidarPoint p;
        p.crown_id = row[ci];
        p.x = csv::to_double(row[xi]);
        p.y = csv::to_double(row[yi]);
        p.z = csv::to_double(row[zi]);
        p.intensity = static_cast<int>(csv::to_long(row[ii]));
        p.return_number = static_cast<int>(csv::to_long(row[ri]));
        p.scan_angle = csv::to_double(row[ai]);
        p.range = csv::to_double(row[gi]);
        p.season = parse_season(row[si]);
        p.pclass = parse_point_class(row[pi]);
        validate(p);
        out.push_back(std::move(p));
    }
    return out;
}

void write_points(const std::filesystem::path& path, std::span<const LidarPoint> points) {
    csv::Table t;
    t.header = {"crown_id", "x", "y", "z", "intensity", "return_number", "scan_angle", "range", "season", "pclass"};
    t.rows.reserve(points.size());
    for (const auto& p : points)
        t.rows.push_back({p.crown_id, csv::format(p.x), csv::format(p.y), csv::format(p.z),
                          std::to_string(p.intensity), std::to_string(p.return_number),
                          csv::format(p.scan_angle), csv::format(p.range), std::string(to_string(p.season)),
                          std::string(to_string(p.pclass))});
    csv::write(path, t);
}

std::vector<FieldStem> read_stems(const std::filesystem::path& path, bool keep_dead) {
    const auto t = csv::read(path);
    const std::size_t idi = t.column("stem_id"), xi = t.column("x"), yi = t.column("y"),
                      hi = t.column("height"), si = t.column("species"), ci = t.column("crown_class"),
                      sti = t.column("status");
    std::vector<FieldStem> out;
    for (const auto& row : t.rows) {
        FieldStem s;
        s.stem_id = row[idi];
        s.x = csv::to_double(row[xi]);
        s.y = csv::to_double(row[yi]);
        s.height = csv::to_double(row[hi]);
        s.species = parse_species(row[si]);
        s.crown_class = parse_crown_class(row[ci]);
        s.status = parse_stem_status(row[sti]);
        if (s.status == StemStatus::Dead && !keep_dead) continue;
        out.push_back(std::move(s));
    }
    return out;
}

void write_stems(const std::filesystem::path& path, std::span<const FieldStem> stems) {
    csv::Table t;
    t.header = {"stem_id", "x", "y", "height", "species", "crown_class", "status"};
    for (const auto& s : stems)
        t.rows.push_back({s.stem_id, csv::format(s.x), csv::format(s.y), csv::format(s.height),
                          std::string(to_string(s.species)), std::string(to_string(s.crown_class)),
                          std::string(to_string(s.status))});
    csv::write(path, t);
}

}  // namespace crownnet
