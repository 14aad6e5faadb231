#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "crownnet/registration.hpp"
#include "support.hpp"

using namespace crownnet;

namespace {

CrownCloud crown_at(const std::string& id, double x, double y, double h) {
    CrownCloud c;
    c.crown_id = id;
    LidarPoint p;
    p.x = x;
    p.y = y;
    p.z = h;
    c.points = {p};
    c.tree_height = h;
    return c;
}

FieldStem stem_at(const std::string& id, double x, double y, double h, Species s = Species::Deciduous) {
    FieldStem st;
    st.stem_id = id;
    st.x = x;
    st.y = y;
    st.height = h;
    st.species = s;
    return st;
}

// Best total over every injective row -> column map (rows <= cols) or the transpose.
int brute_force_total(const Eigen::MatrixXi& m) {
    const Eigen::MatrixXi s = m.rows() <= m.cols() ? m : Eigen::MatrixXi(m.transpose());
    std::vector<int> cols(static_cast<std::size_t>(s.cols()));
    std::iota(cols.begin(), cols.end(), 0);
    int best = 0;
    do {
        int total = 0;
        for (Eigen::Index i = 0; i < s.rows(); ++i) total += s(i, cols[static_cast<std::size_t>(i)]);
        best = std::max(best, total);
    } while (std::next_permutation(cols.begin(), cols.end()));
    return best;
}

int assignment_total(const Eigen::MatrixXi& m, const std::vector<int>& match) {
    int total = 0;
    std::set<int> used;
    for (std::size_t i = 0; i < match.size(); ++i) {
        if (match[i] < 0) continue;
        EXPECT_TRUE(used.insert(match[i]).second);
        EXPECT_GT(m(static_cast<Eigen::Index>(i), match[i]), 0);
        total += m(static_cast<Eigen::Index>(i), match[i]);
    }
    return total;
}

}  // namespace

TEST(Score, Tiers) {
    EXPECT_EQ(score_from(0.05, 3.0), 100);
    EXPECT_EQ(score_from(0.15, 8.0), 70);
    EXPECT_EQ(score_from(0.25, 12.0), 40);
    EXPECT_EQ(score_from(0.35, 2.0), 0);
    EXPECT_EQ(score_from(0.05, 16.0), 0);
    // strict thresholds
    EXPECT_EQ(score_from(0.10, 1.0), 70);
    EXPECT_EQ(score_from(0.01, 5.0), 70);
    EXPECT_EQ(score_from(0.30, 1.0), 0);
}

TEST(Score, PairGeometry) {
    // lean = atan(1 / 20) = 2.86 deg, hdiff = 1 / 19
    EXPECT_EQ(pair_score(crown_at("c", 1.0, 0.0, 20.0), stem_at("s", 0.0, 0.0, 19.0)), 100);
    // lean = atan(3 / 20) = 8.53 deg
    EXPECT_EQ(pair_score(crown_at("c", 3.0, 0.0, 20.0), stem_at("s", 0.0, 0.0, 20.0)), 70);
    // lean = atan(5 / 20) = 14.04 deg
    EXPECT_EQ(pair_score(crown_at("c", 0.0, 5.0, 20.0), stem_at("s", 0.0, 0.0, 20.0)), 40);
    EXPECT_EQ(pair_score(crown_at("c", 0.0, 0.0, 20.0), stem_at("s", 0.0, 0.0, 30.0)), 0);
}

TEST(Score, TranslationInvariant) {
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> u(-8.0, 8.0), h(5.0, 30.0), t(-1e4, 1e4);
    for (int k = 0; k < 200; ++k) {
        const double cx = u(gen), cy = u(gen), sx = u(gen), sy = u(gen), ch = h(gen), sh = h(gen);
        const double dx = t(gen), dy = t(gen);
        EXPECT_EQ(pair_score(crown_at("c", cx, cy, ch), stem_at("s", sx, sy, sh)),
                  pair_score(crown_at("c", cx + dx, cy + dy, ch), stem_at("s", sx + dx, sy + dy, sh)));
    }
}

TEST(Assignment, CrossPairingWins) {
    Eigen::MatrixXi m(2, 2);
    m << 100, 70,
         70, 0;
    EXPECT_EQ(max_score_assignment(m), (std::vector<int>{1, 0}));
}

TEST(Assignment, ZeroEdgesNeverMatched) {
    EXPECT_EQ(max_score_assignment(Eigen::MatrixXi::Zero(3, 2)), (std::vector<int>{-1, -1, -1}));
    Eigen::MatrixXi m(2, 2);
    m << 100, 0,
         0, 0;
    EXPECT_EQ(max_score_assignment(m), (std::vector<int>{0, -1}));
    EXPECT_TRUE(max_score_assignment(Eigen::MatrixXi(0, 4)).empty());
}

TEST(Assignment, MatchesBruteForce) {
    std::mt19937_64 gen(1234);
    const int tiers[] = {0, 40, 70, 100};
    std::uniform_int_distribution<int> dim(1, 7), tier(0, 3);
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::MatrixXi m(dim(gen), dim(gen));
        for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = tiers[tier(gen)];
        const auto match = max_score_assignment(m);
        ASSERT_EQ(match.size(), static_cast<std::size_t>(m.rows()));
        EXPECT_EQ(assignment_total(m, match), brute_force_total(m)) << m;
    }
}

TEST(Register, LabelsFromMatchedStems) {
    std::vector<CrownCloud> crowns{crown_at("c1", 0.0, 0.0, 20.0), crown_at("c2", 10.0, 0.0, 15.0),
                                   crown_at("c3", 50.0, 50.0, 10.0)};
    std::vector<FieldStem> stems{stem_at("s1", 0.5, 0.0, 20.0, Species::Conifer), stem_at("s2", 10.0, 0.5, 15.5),
                                 stem_at("s3", 10.0, 0.0, 15.0)};
    stems[2].status = StemStatus::Dead;
    stems[0].crown_class = CrownClass::Intermediate;
    const auto recs = register_crowns(crowns, stems);
    ASSERT_EQ(recs.size(), 2u);
    EXPECT_EQ(recs[0].crown_id, "c1");
    EXPECT_EQ(recs[0].stem_id, "s1");
    EXPECT_EQ(recs[0].label, Species::Conifer);
    EXPECT_EQ(recs[0].crown_class, CrownClass::Intermediate);
    EXPECT_EQ(recs[0].score, 100);
    EXPECT_EQ(recs[1].stem_id, "s2");

    const auto dir = crownnet::testing::scratch_dir("registration");
    write_registration(dir / "r.csv", recs);
    const auto back = read_registration(dir / "r.csv");
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0].crown_id, "c1");
    EXPECT_EQ(back[0].score, 100);
    EXPECT_EQ(back[0].label, Species::Conifer);
    EXPECT_EQ(back[1].crown_class, CrownClass::Dominant);
}

TEST(Register, EmptyInputs) {
    EXPECT_TRUE(register_crowns({}, {}).empty());
    std::vector<CrownCloud> crowns{crown_at("c1", 0.0, 0.0, 20.0)};
    EXPECT_TRUE(register_crowns(crowns, {}).empty());
}

TEST(Register, PartialMatchingIsOneToOne) {
    std::mt19937_64 gen(77);
    std::uniform_real_distribution<double> u(0.0, 20.0), h(10.0, 25.0), j(-2.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<CrownCloud> crowns;
        std::vector<FieldStem> stems;
        for (int i = 0; i < 8; ++i) {
            const double x = u(gen), y = u(gen), ht = h(gen);
            crowns.push_back(crown_at("c" + std::to_string(i), x, y, ht));
            stems.push_back(stem_at("s" + std::to_string(i), x + j(gen), y + j(gen), ht + j(gen)));
        }
        std::set<std::string> cs, ss;
        for (const auto& r : register_crowns(crowns, stems)) {
            EXPECT_TRUE(cs.insert(r.crown_id).second);
            EXPECT_TRUE(ss.insert(r.stem_id).second);
            EXPECT_GT(r.score, 0);
        }
    }
}
