#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "crownnet/intensity.hpp"
#include "crownnet/stats.hpp"
#include "support.hpp"

using namespace crownnet;

namespace {

LidarPoint sample(double range, double angle, int intensity, Season s = Season::LeafOn, int ret = 1) {
    LidarPoint p;
    p.range = range;
    p.scan_angle = angle;
    p.intensity = intensity;
    p.season = s;
    p.return_number = ret;
    return p;
}

std::vector<LidarPoint> linear_group(int n, std::uint64_t seed, double noise = 1.0) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> r(600.0, 1400.0), a(-30.0, 30.0);
    std::normal_distribution<double> e(0.0, noise);
    std::vector<LidarPoint> out;
    for (int i = 0; i < n; ++i) {
        const double range = r(gen), angle = a(gen);
        const double v = 200.0 - 20.0 * std::log(range) + 30.0 * std::cos(angle * M_PI / 180.0) + e(gen);
        out.push_back(sample(range, angle, static_cast<int>(std::lround(v))));
    }
    return out;
}

}  // namespace

TEST(IntensityFit, RecoversGeneratingCoefficients) {
    const auto m = fit_intensity_model(linear_group(10000, 1));
    EXPECT_GE(m.beta1, -21.0);
    EXPECT_LE(m.beta1, -19.0);
    EXPECT_GE(m.beta2, 28.0);
    EXPECT_LE(m.beta2, 32.0);
    EXPECT_LT(m.p1, 1e-4);
    EXPECT_LT(m.p2, 1e-4);
    EXPECT_EQ(m.n, 10000u);
}

TEST(IntensityFit, ConstantIntensity) {
    std::vector<LidarPoint> pts;
    for (int i = 0; i < 50; ++i) pts.push_back(sample(500.0 + 13.0 * i, -30.0 + 1.1 * i, 120));
    const auto m = fit_intensity_model(pts);
    EXPECT_NEAR(m.beta1, 0.0, 1e-9);
    EXPECT_NEAR(m.beta2, 0.0, 1e-9);
    EXPECT_GT(m.p1, 0.9);
    EXPECT_GT(m.p2, 0.9);
    EXPECT_DOUBLE_EQ(m.mean_intensity, 120.0);
}

TEST(IntensityFit, DegenerateRegressors) {
    std::vector<LidarPoint> pts;
    for (int i = 0; i < 20; ++i) pts.push_back(sample(800.0, -20.0 + 2.0 * i, 100 + i));
    try {
        fit_intensity_model(pts);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_STREQ(e.what(), "degenerate regressors");
    }
    const auto few = linear_group(9, 2);
    EXPECT_THROW(fit_intensity_model(few), ValidationError);
}

TEST(IntensityFit, OlsResidualsSumToZero) {
    const auto pts = linear_group(2000, 3, 5.0);
    const auto m = fit_intensity_model(pts);
    double sum = 0.0;
    for (const auto& p : pts) sum += p.intensity - m.predict(p.range, p.scan_angle);
    EXPECT_LT(std::abs(sum), 1e-6 * pts.size());
}

TEST(Residualization, RemovesCorrelation) {
    auto pts = linear_group(10000, 4, 3.0);
    IntensityModels models{{{Season::LeafOn, 1}, fit_intensity_model(pts)}};
    const auto out = apply_residualization(pts, models);
    std::vector<double> v, lr, ca;
    for (std::size_t i = 0; i < out.size(); ++i) {
        v.push_back(out[i].intensity);
        lr.push_back(std::log(out[i].range));
        ca.push_back(std::cos(out[i].scan_angle * M_PI / 180.0));
        EXPECT_GE(out[i].intensity, 0);
        EXPECT_LE(out[i].intensity, 255);
    }
    EXPECT_LT(std::abs(stats::pearson(v, lr)), 0.05);
    EXPECT_LT(std::abs(stats::pearson(v, ca)), 0.05);
}

TEST(Residualization, OnSurfaceClampAndPassThrough) {
    IntensityModel m;
    m.beta0 = 10.0;
    m.beta1 = 0.0;
    m.beta2 = 100.0;
    m.p1 = m.p2 = 0.0;
    m.mean_intensity = 200.4;
    IntensityModels models{{{Season::LeafOn, 1}, m}};
    std::vector<LidarPoint> pts{sample(1.0, 0.0, 110), sample(1.0, 0.0, 255), sample(1.0, 0.0, 7, Season::LeafOff),
                                sample(1.0, 0.0, 9, Season::LeafOn, 2)};
    const auto out = apply_residualization(pts, models);
    EXPECT_EQ(out[0].intensity, 200);  // on the surface -> round(mean)
    EXPECT_EQ(out[1].intensity, 255);  // residual +145 above 200.4 -> clamped
    EXPECT_EQ(out[2].intensity, 7);    // no model for the group
    EXPECT_EQ(out[3].intensity, 9);

    models.begin()->second.p1 = 0.3;  // not significant
    EXPECT_EQ(apply_residualization(pts, models)[0].intensity, 110);
}

TEST(Residualization, GroundPointsUntouched) {
    IntensityModel m;
    m.beta0 = 50.0;
    m.p1 = m.p2 = 0.0;
    m.mean_intensity = 100.0;
    std::vector<LidarPoint> pts{sample(1.0, 0.0, 30)};
    pts[0].pclass = PointClass::Ground;
    EXPECT_EQ(apply_residualization(pts, {{{Season::LeafOn, 1}, m}})[0].intensity, 30);
}

TEST(NormalizationGrid, OnePointPerCellAndSeason) {
    std::vector<LidarPoint> pts;
    for (int i = 0; i < 5; ++i) {
        auto p = sample(800.0, 0.0, 100 + i);
        p.x = 1.0 + i;
        p.y = 2.0;
        pts.push_back(p);
    }
    auto off = sample(800.0, 0.0, 50, Season::LeafOff);
    off.x = 25.0;
    off.y = 3.0;
    pts.push_back(off);
    auto g = off;
    g.pclass = PointClass::Ground;
    g.x = 55.0;
    pts.push_back(g);
    const auto s = sample_normalization_grid(pts, 10.0, 42);
    ASSERT_EQ(s.size(), 2u);
    std::set<Season> seasons{s[0].season, s[1].season};
    EXPECT_EQ(seasons.size(), 2u);

    const auto again = sample_normalization_grid(pts, 10.0, 42);
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(s[i].intensity, again[i].intensity);
}

TEST(NormalizationGrid, UniformChoice) {
    std::vector<LidarPoint> pts;
    for (int i = 0; i < 4; ++i) {
        auto p = sample(800.0, 0.0, i);
        p.x = 0.5 + i;
        pts.push_back(p);
    }
    std::vector<int> hits(4, 0);
    for (std::uint64_t seed = 0; seed < 4000; ++seed) ++hits[sample_normalization_grid(pts, 10.0, seed)[0].intensity];
    for (int h : hits) EXPECT_NEAR(h, 1000, 120);
}

TEST(IntensityModels, FitGroupsAndJsonRoundTrip) {
    auto on1 = linear_group(40, 5);
    auto on2 = linear_group(40, 6);
    for (auto& p : on2) p.return_number = 2;
    auto tiny = linear_group(5, 7);
    for (auto& p : tiny) p.return_number = 3;
    std::vector<LidarPoint> all(on1.begin(), on1.end());
    all.insert(all.end(), on2.begin(), on2.end());
    all.insert(all.end(), tiny.begin(), tiny.end());
    const auto models = fit_intensity_models(all);
    ASSERT_EQ(models.size(), 2u);
    EXPECT_TRUE(models.count({Season::LeafOn, 2}));

    const auto dir = crownnet::testing::scratch_dir("models");
    write_models(dir / "m.json", models);
    const auto back = read_models(dir / "m.json");
    ASSERT_EQ(back.size(), 2u);
    for (const auto& [k, m] : models) {
        const auto& b = back.at(k);
        EXPECT_EQ(b.beta0, m.beta0);
        EXPECT_EQ(b.beta1, m.beta1);
        EXPECT_EQ(b.beta2, m.beta2);
        EXPECT_EQ(b.p1, m.p1);
        EXPECT_EQ(b.n, m.n);
    }
    EXPECT_EQ(group_key(Season::LeafOff, 3), "off:3");
}
