#include "crownnet/synthforest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "crownnet/csv.hpp"
#include "crownnet/ingest.hpp"
#include "crownnet/rng.hpp"

namespace crownnet {

namespace {

constexpr double kLeafOnAltitude = 214.0;
constexpr double kLeafOffAltitude = 3096.0;

double draw(Rng& rng, const Interval& iv) { return rng.uniform(iv.lo, iv.hi); }

int draw_intensity(Rng& rng, const IntensityDist& d, double shift = 0.0) {
    return static_cast<int>(std::clamp<long>(std::lround(rng.normal(d.mean, d.sd) + shift), 0, 255));
}

std::string numbered(char prefix, int i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%c%04d", prefix, i);
    return buf;
}

/// Crown envelope: upper surface height at an offset, plus its footprint.
struct Envelope {
    bool cone = true;
    double apex_height = 0.0;
    double rx = 1.0, ry = 1.0;  // footprint semi-axes
    double depth = 1.0;         // cone depth or ellipsoid vertical semi-axis

    double surface(double dx, double dy) const {
        const double q = (dx / rx) * (dx / rx) + (dy / ry) * (dy / ry);
        if (cone) return apex_height - depth * std::sqrt(q);
        return apex_height - depth + depth * std::sqrt(std::max(0.0, 1.0 - q));
    }
    double bottom() const { return apex_height - (cone ? depth : 1.6 * depth); }
    double footprint() const { return M_PI * rx * ry; }
};

Eigen::Vector2d sample_footprint(Rng& rng, const Envelope& env) {
    const double r = std::sqrt(rng.uniform());
    const double t = 2.0 * M_PI * rng.uniform();
    return {env.rx * r * std::cos(t), env.ry * r * std::sin(t)};
}

int leaf_on_return(double depth) {
    if (depth < 0.3) return 1;
    if (depth < 0.8) return 2;
    if (depth < 1.5) return 3;
    return 4;
}

}  // namespace

void validate(const SynthParams& p) {
    if (p.crowns < 1) throw ValidationError("synthetic forest needs at least one crown");
    if (!(p.conifer_fraction >= 0.0 && p.conifer_fraction <= 1.0))
        throw ValidationError("conifer_fraction must lie in [0,1]");
    if (!(p.leaf_on_density > 0.0)) throw ValidationError("leaf-on density must be positive");
    for (double r : {p.conifer_retention, p.deciduous_retention, p.conifer_leaf_on_ambiguity})
        if (!(r >= 0.0 && r <= 1.0)) throw ValidationError("retention and ambiguity must lie in [0,1]");
    if (!(p.label_noise >= 0.0 && p.label_noise < 1.0)) throw ValidationError("label noise must lie in [0,1)");
    if (!(p.tree_height.lo > 4.0)) throw ValidationError("tree heights must exceed 4 m");
    if (!(p.gps_jitter >= 0.0)) throw ValidationError("GPS jitter must be nonnegative");
}

double synth_terrain(double x, double y) {
    return 300.0 + 0.03 * x + 0.02 * y + 1.5 * std::sin(x / 40.0) * std::cos(y / 50.0);
}

CrownCloud generate_crown(Species species, const SynthParams& params, std::uint64_t seed, double cx, double cy,
                          const std::string& crown_id) {
    Rng rng(seed);
    const bool conifer = species == Species::Conifer;
    const bool looks_conifer = conifer && !rng.bernoulli(params.conifer_leaf_on_ambiguity);

    Envelope env;
    env.cone = looks_conifer;
    env.apex_height = draw(rng, params.tree_height);
    if (env.cone) {
        env.rx = env.ry = draw(rng, params.cone_radius);
        env.depth = draw(rng, params.cone_depth_ratio) * env.apex_height;
    } else {
        env.rx = draw(rng, params.ellipsoid_radius);
        env.ry = env.rx * rng.uniform(0.85, 1.0);
        env.depth = draw(rng, params.ellipsoid_depth);
    }
    const IntensityDist& on_dist = looks_conifer ? params.conifer_on : params.deciduous_on;
    const IntensityDist& off_dist = conifer ? params.conifer_off : params.deciduous_off;
    const double retention = conifer ? params.conifer_retention : params.deciduous_retention;
    const double flight_angle = rng.uniform(-20.0, 20.0);
    const double top = env.apex_height - 0.01;
    const double floor_z = std::max(env.bottom(), 3.5);

    auto base_point = [&](double dx, double dy, double z, Season season) {
        LidarPoint p;
        p.crown_id = crown_id;
        p.x = cx + dx;
        p.y = cy + dy;
        p.z = z;
        p.season = season;
        p.pclass = PointClass::Vegetation;
        p.scan_angle = std::clamp(flight_angle + rng.normal(0.0, 1.0), -30.0, 30.0);
        const double altitude = season == Season::LeafOn ? kLeafOnAltitude : kLeafOffAltitude;
        p.range = (altitude - z) / std::cos(p.scan_angle * M_PI / 180.0);
        return p;
    };
    auto leaf_on_intensity = [&](const LidarPoint& p) {
        const double shift = params.range_coefficient * (std::log(p.range) - std::log(kLeafOnAltitude)) +
                             params.angle_coefficient * (std::cos(p.scan_angle * M_PI / 180.0) - 0.98);
        return draw_intensity(rng, on_dist, shift);
    };

    std::vector<LidarPoint> pts;
    {
        LidarPoint apex = base_point(0.0, 0.0, env.apex_height, Season::LeafOn);
        apex.return_number = 1;
        apex.intensity = leaf_on_intensity(apex);
        pts.push_back(apex);
    }
    const auto n_on = static_cast<int>(std::lround(params.leaf_on_density * env.footprint()));
    for (int i = 0; i < n_on; ++i) {
        const auto off = sample_footprint(rng, env);
        const double depth = std::abs(rng.normal(0.0, 0.35));
        const double z = std::clamp(env.surface(off.x(), off.y()) - depth, floor_z, top);
        LidarPoint p = base_point(off.x(), off.y(), z, Season::LeafOn);
        p.return_number = leaf_on_return(depth);
        p.intensity = leaf_on_intensity(p);
        pts.push_back(p);
    }

    const std::size_t leaf_on_count = pts.size();
    for (std::size_t i = 0; i < leaf_on_count; ++i) {
        if (!rng.bernoulli(retention)) continue;
        double dx, dy, z;
        if (conifer) {
            // evergreen foliage returns where the summer returns were
            dx = pts[i].x - cx + rng.normal(0.0, 0.05);
            dy = pts[i].y - cy + rng.normal(0.0, 0.05);
            z = std::clamp(pts[i].z + rng.normal(0.0, 0.05), floor_z, top);
        } else {
            // bare branches: scattered through the crown volume
            const auto off = sample_footprint(rng, env);
            dx = off.x();
            dy = off.y();
            z = rng.uniform(floor_z, std::max(floor_z, std::min(top, env.surface(dx, dy))));
        }
        LidarPoint p = base_point(dx, dy, z, Season::LeafOff);
        p.return_number = 1 + static_cast<int>(rng.index(3));
        p.intensity = draw_intensity(rng, off_dist);
        pts.push_back(p);
    }
    return make_crown(crown_id, std::move(pts));
}

SynthDataset generate_dataset(const SynthParams& params) {
    validate(params);
    const int n = params.crowns;
    const int n_conifer = static_cast<int>(std::lround(params.conifer_fraction * n));
    std::vector<Species> species(static_cast<std::size_t>(n), Species::Deciduous);
    std::fill_n(species.begin(), n_conifer, Species::Conifer);
    Rng layout(derive_seed(params.seed, 0xC0FFEE));
    layout.shuffle(std::span<Species>(species));

    static constexpr std::array<CrownClass, 4> kClasses{CrownClass::Dominant, CrownClass::Codominant,
                                                        CrownClass::Intermediate, CrownClass::Overtopped};
    static constexpr std::array<double, 4> kClassWeights{0.05, 0.30, 0.37, 0.28};

    SynthDataset ds;
    const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
    Bounds extent;
    for (int i = 0; i < n; ++i) {
        const double cx = (i % side) * params.spacing + layout.uniform(-1.0, 1.0);
        const double cy = (i / side) * params.spacing + layout.uniform(-1.0, 1.0);
        const std::string id = numbered('c', i + 1);
        auto crown = generate_crown(species[static_cast<std::size_t>(i)], params,
                                    derive_seed(params.seed, static_cast<std::uint64_t>(i) + 1), cx, cy, id);
        for (const auto& p : crown.points) {
            LidarPoint q = p;
            q.z += synth_terrain(p.x, p.y);
            if (i == 0 && &p == &crown.points.front()) extent.min = extent.max = {q.x, q.y};
            extent.extend({q.x, q.y});
            ds.points.push_back(std::move(q));
        }

        Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
        for (const auto& p : crown.points) centroid += Eigen::Vector2d(p.x, p.y);
        centroid /= static_cast<double>(crown.points.size());

        FieldStem stem;
        stem.stem_id = numbered('s', i + 1);
        stem.x = centroid.x() + layout.normal(0.0, params.gps_jitter);
        stem.y = centroid.y() + layout.normal(0.0, params.gps_jitter);
        stem.height = crown.tree_height * (1.0 + layout.normal(0.0, 0.02));
        stem.species = species[static_cast<std::size_t>(i)];
        double u = layout.uniform(), acc = 0.0;
        stem.crown_class = kClasses.back();
        for (std::size_t k = 0; k < kClasses.size(); ++k) {
            acc += kClassWeights[k];
            if (u < acc) {
                stem.crown_class = kClasses[k];
                break;
            }
        }
        ds.stems.push_back(stem);
        ds.truth.push_back({id, stem.species, stem.species});
        ds.crowns.push_back(std::move(crown));
    }

    const auto n_noisy = static_cast<std::size_t>(std::lround(params.label_noise * n));
    std::vector<std::size_t> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng noise(derive_seed(params.seed, 0xBAD1AB));
    noise.shuffle(std::span<std::size_t>(order));
    for (std::size_t k = 0; k < n_noisy; ++k) {
        const auto i = order[k];
        ds.stems[i].species = flipped(ds.stems[i].species);
        ds.truth[i].recorded_label = ds.stems[i].species;
    }

    const auto n_dead = static_cast<int>(std::lround(params.dead_stem_fraction * n));
    for (int k = 0; k < n_dead; ++k) {
        FieldStem dead;
        dead.stem_id = numbered('d', k + 1);
        dead.x = layout.uniform(extent.min.x(), extent.max.x());
        dead.y = layout.uniform(extent.min.y(), extent.max.y());
        dead.height = draw(layout, params.tree_height);
        dead.species = layout.bernoulli(params.conifer_fraction) ? Species::Conifer : Species::Deciduous;
        dead.status = StemStatus::Dead;
        ds.stems.push_back(dead);
    }

    Rng ground(derive_seed(params.seed, 0x6A0D));
    const Eigen::Vector2d lo = extent.min.array() - 5.0, hi = extent.max.array() + 5.0;
    const auto n_ground =
        static_cast<std::size_t>(std::lround(params.ground_density * (hi - lo).prod()));
    for (std::size_t k = 0; k < n_ground; ++k) {
        LidarPoint g;
        g.x = ground.uniform(lo.x(), hi.x());
        g.y = ground.uniform(lo.y(), hi.y());
        g.z = synth_terrain(g.x, g.y) + ground.normal(0.0, 0.03);
        g.pclass = PointClass::Ground;
        g.season = ground.bernoulli(0.5) ? Season::LeafOn : Season::LeafOff;
        g.return_number = 1;
        g.scan_angle = ground.uniform(-20.0, 20.0);
        g.range = (g.season == Season::LeafOn ? kLeafOnAltitude : kLeafOffAltitude) /
                  std::cos(g.scan_angle * M_PI / 180.0);
        g.intensity = static_cast<int>(ground.index(80)) + 20;
        ds.points.push_back(g);
    }
    return ds;
}

void write_truth(const std::filesystem::path& path, std::span<const TruthRecord> truth) {
    csv::Table t;
    t.header = {"crown_id", "true_label", "recorded_label"};
    for (const auto& r : truth)
        t.rows.push_back({r.crown_id, std::string(to_string(r.true_label)), std::string(to_string(r.recorded_label))});
    csv::write(path, t);
}

std::vector<TruthRecord> read_truth(const std::filesystem::path& path) {
    const auto t = csv::read(path);
    const auto ci = t.column("crown_id"), ti = t.column("true_label"), ri = t.column("recorded_label");
    std::vector<TruthRecord> out;
    for (const auto& row : t.rows) out.push_back({row[ci], parse_species(row[ti]), parse_species(row[ri])});
    return out;
}

}  // namespace crownnet
