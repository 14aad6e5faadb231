#include "crownnet/intensity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <tuple>

#include <Eigen/Dense>
#include <json.hpp>

#include "crownnet/rng.hpp"
#include "crownnet/stats.hpp"

namespace crownnet {

namespace {
constexpr double kDegToRad = M_PI / 180.0;
}

double IntensityModel::predict(double range, double scan_angle_deg) const {
    return beta0 + beta1 * std::log(range) + beta2 * std::cos(scan_angle_deg * kDegToRad);
}

std::string group_key(Season s, int return_number) {
    return std::string(to_string(s)) + ":" + std::to_string(return_number);
}

std::vector<LidarPoint> sample_normalization_grid(std::span<const LidarPoint> points, double cell,
                                                  std::uint64_t seed) {
    using CellKey = std::tuple<long, long, int>;
    std::map<CellKey, std::vector<std::size_t>> buckets;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        if (p.pclass != PointClass::Vegetation) continue;
        const auto cx = static_cast<long>(std::floor(p.x / cell));
        const auto cy = static_cast<long>(std::floor(p.y / cell));
        buckets[{cy, cx, static_cast<int>(p.season)}].push_back(i);
    }
    Rng rng(seed);
    std::vector<LidarPoint> out;
    out.reserve(buckets.size());
    for (const auto& [key, members] : buckets) out.push_back(points[members[rng.index(members.size())]]);
    return out;
}

IntensityModel fit_intensity_model(std::span<const LidarPoint> samples) {
    const auto n = static_cast<Eigen::Index>(samples.size());
    if (n < 10) throw ValidationError("intensity model needs at least 10 samples, got " + std::to_string(n));

    Eigen::MatrixXd X(n, 3);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& p = samples[i];
        X(i, 0) = 1.0;
        X(i, 1) = std::log(p.range);
        X(i, 2) = std::cos(p.scan_angle * kDegToRad);
        y(i) = p.intensity;
    }
    // Column scaling keeps the rank test meaningful for near-constant regressors.
    const Eigen::Vector3d col_mean = X.colwise().mean();
    Eigen::MatrixXd centered = X;
    centered.col(1).array() -= col_mean(1);
    centered.col(2).array() -= col_mean(2);
    const Eigen::Vector3d spread(1.0, centered.col(1).norm(), centered.col(2).norm());
    const double tol = 1e-9 * std::sqrt(static_cast<double>(n));
    if (!(spread(1) > tol * (1.0 + std::abs(col_mean(1))) && spread(2) > tol * (1.0 + std::abs(col_mean(2)))))
        throw ValidationError("degenerate regressors");

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < 3) throw ValidationError("degenerate regressors");
    const Eigen::Vector3d beta = qr.solve(y);
    const Eigen::VectorXd resid = y - X * beta;
    const double rss = resid.squaredNorm();
    const double dof = static_cast<double>(n - 3);

    IntensityModel m;
    m.season = samples.front().season;
    m.return_number = samples.front().return_number;
    m.beta0 = beta(0);
    m.beta1 = beta(1);
    m.beta2 = beta(2);
    m.mean_intensity = y.mean();
    m.n = static_cast<std::size_t>(n);

    const Eigen::Matrix3d xtx_inv = (X.transpose() * X).inverse();
    auto p_value = [&](int j) {
        const double scale = 1.0 + std::abs(beta(0));
        // Exact fit: a coefficient is either there or not.
        if (rss <= 1e-18 * (1.0 + y.squaredNorm())) return std::abs(beta(j)) <= 1e-9 * scale ? 1.0 : 0.0;
        const double se = std::sqrt(rss / dof * xtx_inv(j, j));
        const double t = beta(j) / se;
        return std::clamp(2.0 * stats::student_t_cdf(-std::abs(t), dof), 0.0, 1.0);
    };
    m.p1 = p_value(1);
    m.p2 = p_value(2);
    return m;
}

IntensityModels fit_intensity_models(std::span<const LidarPoint> samples) {
    std::map<GroupKey, std::vector<LidarPoint>> groups;
    for (const auto& p : samples) groups[{p.season, p.return_number}].push_back(p);
    IntensityModels models;
    for (const auto& [key, pts] : groups) {
        if (pts.size() < 10) continue;
        models.emplace(key, fit_intensity_model(pts));
    }
    return models;
}

std::vector<LidarPoint> apply_residualization(std::span<const LidarPoint> points, const IntensityModels& models,
                                              double alpha) {
    std::vector<LidarPoint> out(points.begin(), points.end());
    for (auto& p : out) {
        if (p.pclass != PointClass::Vegetation) continue;
        const auto it = models.find({p.season, p.return_number});
        if (it == models.end() || !it->second.significant(alpha)) continue;
        const auto& m = it->second;
        const double residual = p.intensity - m.predict(p.range, p.scan_angle);
        p.intensity = static_cast<int>(std::clamp<long>(std::lround(residual + m.mean_intensity), 0, 255));
    }
    return out;
}

void write_models(const std::filesystem::path& path, const IntensityModels& models) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::object();
    for (const auto& [key, m] : models) {
        doc[group_key(m.season, m.return_number)] = {
            {"season", std::string(to_string(m.season))},
            {"return_number", m.return_number},
            {"beta0", m.beta0},
            {"beta1", m.beta1},
            {"beta2", m.beta2},
            {"p1", m.p1},
            {"p2", m.p2},
            {"mean_intensity", m.mean_intensity},
            {"n", m.n},
        };
    }
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path.string());
    out << doc.dump(2) << '\n';
}

IntensityModels read_models(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open input file: " + path.string());
    const auto doc = nlohmann::json::parse(in);
    IntensityModels models;
    for (const auto& [key, v] : doc.items()) {
        IntensityModel m;
        m.season = parse_season(v.at("season").get<std::string>());
        m.return_number = v.at("return_number").get<int>();
        m.beta0 = v.at("beta0").get<double>();
        m.beta1 = v.at("beta1").get<double>();
        m.beta2 = v.at("beta2").get<double>();
        m.p1 = v.at("p1").get<double>();
        m.p2 = v.at("p2").get<double>();
        m.mean_intensity = v.at("mean_intensity").get<double>();
        m.n = v.at("n").get<std::size_t>();
        models.emplace(GroupKey{m.season, m.return_number}, m);
    }
    return models;
}

}  // namespace crownnet
