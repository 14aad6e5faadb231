#include "crownnet/registration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crownnet/csv.hpp"

namespace crownnet {

int score_from(double hdiff, double lean) {
    if (hdiff < 0.10 && lean < 5.0) return 100;
    if (hdiff < 0.20 && lean < 10.0) return 70;
    if (hdiff < 0.30 && lean < 15.0) return 40;
    return 0;
}

int pair_score(const CrownCloud& crown, const FieldStem& stem) {
    if (!(crown.tree_height > 0.0)) throw ValidationError("crown apex height must be positive");
    const auto& apex = crown.apex_point();
    const double hdiff = std::abs(crown.tree_height - stem.height) / stem.height;
    const double horizontal = std::hypot(apex.x - stem.x, apex.y - stem.y);
    const double lean = std::atan2(horizontal, crown.tree_height) * 180.0 / M_PI;
    return score_from(hdiff, lean);
}

std::vector<int> max_score_assignment(const Eigen::MatrixXi& scores) {
    const Eigen::Index rows = scores.rows(), cols = scores.cols();
    std::vector<int> result(static_cast<std::size_t>(rows), -1);
    if (rows == 0 || cols == 0) return result;

    // Minimization form on a zero-padded square matrix (potentials method).
    const Eigen::Index n = std::max(rows, cols);
    const long top = scores.maxCoeff();
    auto cost = [&](Eigen::Index i, Eigen::Index j) -> long {
        return (i < rows && j < cols) ? top - scores(i, j) : top;
    };
    constexpr long inf = std::numeric_limits<long>::max() / 4;
    std::vector<long> u(n + 1, 0), v(n + 1, 0);
    std::vector<Eigen::Index> p(n + 1, 0), way(n + 1, 0);
    for (Eigen::Index i = 1; i <= n; ++i) {
        p[0] = i;
        Eigen::Index j0 = 0;
        std::vector<long> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const Eigen::Index i0 = p[j0];
            long delta = inf;
            Eigen::Index j1 = 0;
            for (Eigen::Index j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const long cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (Eigen::Index j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const Eigen::Index j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    for (Eigen::Index j = 1; j <= n; ++j) {
        const Eigen::Index i = p[j] - 1;
        if (i < rows && j - 1 < cols && scores(i, j - 1) > 0) result[static_cast<std::size_t>(i)] = static_cast<int>(j - 1);
    }
    return result;
}

std::vector<RegistrationRecord> register_crowns(std::span<const CrownCloud> crowns, std::span<const FieldStem> stems) {
    std::vector<const CrownCloud*> cs;
    std::vector<const FieldStem*> ss;
    for (const auto& c : crowns) cs.push_back(&c);
    for (const auto& s : stems)
        if (s.status == StemStatus::Live) ss.push_back(&s);
    std::sort(cs.begin(), cs.end(), [](auto* a, auto* b) { return a->crown_id < b->crown_id; });
    std::sort(ss.begin(), ss.end(), [](auto* a, auto* b) { return a->stem_id < b->stem_id; });

    Eigen::MatrixXi scores(static_cast<Eigen::Index>(cs.size()), static_cast<Eigen::Index>(ss.size()));
    for (Eigen::Index i = 0; i < scores.rows(); ++i)
        for (Eigen::Index j = 0; j < scores.cols(); ++j) scores(i, j) = pair_score(*cs[i], *ss[j]);

    const auto match = max_score_assignment(scores);
    std::vector<RegistrationRecord> out;
    for (std::size_t i = 0; i < match.size(); ++i) {
        if (match[i] < 0) continue;
        const auto& stem = *ss[static_cast<std::size_t>(match[i])];
        out.push_back({cs[i]->crown_id, stem.stem_id, scores(static_cast<Eigen::Index>(i), match[i]), stem.species,
                       stem.crown_class});
    }
    return out;
}

void write_registration(const std::filesystem::path& path, std::span<const RegistrationRecord> records) {
    csv::Table t;
    t.header = {"crown_id", "stem_id", "score", "label", "crown_class"};
    for (const auto& r : records)
        t.rows.push_back({r.crown_id, r.stem_id, std::to_string(r.score), std::string(to_string(r.label)),
                          std::string(to_string(r.crown_class))});
    csv::write(path, t);
}

std::vector<RegistrationRecord> read_registration(const std::filesystem::path& path) {
    const auto t = csv::read(path);
    const auto ci = t.column("crown_id"), si = t.column("stem_id"), sc = t.column("score"), li = t.column("label"),
               cc = t.column("crown_class");
    std::vector<RegistrationRecord> out;
    for (const auto& row : t.rows)
        out.push_back({row[ci], row[si], static_cast<int>(csv::to_long(row[sc])), parse_species(row[li]),
                       parse_crown_class(row[cc])});
    return out;
}

}  // namespace crownnet
