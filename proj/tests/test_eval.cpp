#include <doctest.h>

#include <cmath>
#include <random>

#include "ssg/eval.hpp"
#include "ssg/model.hpp"
#include "support/fixtures.hpp"

using namespace ssg;

namespace {

// Independent AP oracle: no sorting. For each positive example, its rank is
// the number of examples scoring strictly higher plus the number of equal
// scorers at or before it in input order.
double ap_brute_force(const std::vector<double>& scores, const std::vector<int>& labels) {
    int positives = 0;
    double sum = 0;
    for (size_t i = 0; i < scores.size(); ++i) {
        if (!labels[i]) continue;
        positives += 1;
        int rank = 0, hits = 0;
        for (size_t j = 0; j < scores.size(); ++j) {
            const bool before = scores[j] > scores[i] || (scores[j] == scores[i] && j <= i);
            if (before) {
                rank += 1;
                hits += labels[j] ? 1 : 0;
            }
        }
        sum += static_cast<double>(hits) / rank;
    }
    return sum / positives;
}

}  // namespace

TEST_CASE("average_precision basics") {
    // Perfect ranking.
    CHECK(eval::average_precision(std::vector<double>{0.9, 0.8, 0.2, 0.1},
                                  std::vector<int>{1, 1, 0, 0})
              .ap == doctest::Approx(1.0));

    // Worked example: positives at ranks 1 and 3.
    const auto r = eval::average_precision(std::vector<double>{0.9, 0.8, 0.7, 0.6},
                                           std::vector<int>{1, 0, 1, 0});
    CHECK(r.defined);
    CHECK(r.positives == 2);
    CHECK(r.ap == doctest::Approx((1.0 + 2.0 / 3.0) / 2.0).epsilon(1e-12));

    // All positives: AP is 1 regardless of scores.
    CHECK(eval::average_precision(std::vector<double>{0.1, 0.5, 0.3},
                                  std::vector<int>{1, 1, 1})
              .ap == doctest::Approx(1.0));

    // No positives: undefined.
    CHECK(!eval::average_precision(std::vector<double>{0.1, 0.5}, std::vector<int>{0, 0}).defined);
}

TEST_CASE("average_precision matches the brute-force oracle on random instances") {
    std::mt19937_64 rng(61);
    std::uniform_int_distribution<int> len(1, 8);
    std::uniform_int_distribution<int> coin(0, 1);
    std::uniform_int_distribution<int> bucket(0, 3);  // few buckets force ties
    int defined = 0;
    for (int it = 0; it < 500; ++it) {
        const int n = len(rng);
        std::vector<double> scores(n);
        std::vector<int> labels(n);
        for (int i = 0; i < n; ++i) {
            scores[i] = bucket(rng) / 4.0;
            labels[i] = coin(rng);
        }
        const auto r = eval::average_precision(scores, labels);
        const bool any = std::any_of(labels.begin(), labels.end(), [](int l) { return l != 0; });
        CHECK(r.defined == any);
        if (!any) continue;
        defined += 1;
        CHECK(r.ap == doctest::Approx(ap_brute_force(scores, labels)).epsilon(1e-12));
    }
    CHECK(defined > 300);
}

TEST_CASE("average_precision is invariant under strictly monotone score transforms") {
    std::mt19937_64 rng(67);
    std::uniform_real_distribution<double> s(0, 1);
    std::uniform_int_distribution<int> coin(0, 1);
    for (int it = 0; it < 200; ++it) {
        std::vector<double> scores(10);
        std::vector<int> labels(10);
        for (int i = 0; i < 10; ++i) {
            scores[i] = s(rng);
            labels[i] = coin(rng);
        }
        labels[0] = 1;
        auto transformed = scores;
        for (double& x : transformed) x = std::exp(3 * x) + 1;
        CHECK(eval::average_precision(scores, labels).ap ==
              doctest::Approx(eval::average_precision(transformed, labels).ap).epsilon(1e-12));
    }
}

TEST_CASE("map_multilabel") {
    SUBCASE("identity scores give mAP exactly 1") {
        std::mt19937_64 rng(71);
        std::uniform_int_distribution<int> coin(0, 1);
        std::vector<std::vector<double>> scores(12, std::vector<double>(5));
        std::vector<std::vector<int>> labels(12, std::vector<int>(5));
        for (auto& row : labels)
            for (auto& l : row) l = coin(rng);
        labels[0] = {1, 1, 1, 1, 1};  // every label has a positive
        for (int i = 0; i < 12; ++i)
            for (int j = 0; j < 5; ++j) scores[i][j] = labels[i][j];
        const auto rep = eval::map_multilabel(scores, labels, {"a", "b", "c", "d", "e"}, "t", "s");
        CHECK(rep.map == 1.0);
        CHECK(rep.defined_labels == 5);
    }

    SUBCASE("labels without positives are excluded and flagged") {
        std::vector<std::vector<double>> scores = {{0.8, 0.9}, {0.7, 0.1}};
        std::vector<std::vector<int>> labels = {{1, 0}, {0, 0}};
        const auto rep = eval::map_multilabel(scores, labels, {"hot", "cold"}, "t", "s");
        CHECK(rep.defined_labels == 1);
        CHECK(rep.undefined_label_names() == std::vector<std::string>{"cold"});
        CHECK(rep.map == doctest::Approx(1.0));
        CHECK(rep.to_csv().find("cold,NA,0") != std::string::npos);
    }

    SUBCASE("random instance matches per-column brute force") {
        std::mt19937_64 rng(73);
        std::uniform_real_distribution<double> s(0, 1);
        std::uniform_int_distribution<int> coin(0, 1);
        std::vector<std::vector<double>> scores(10, std::vector<double>(5));
        std::vector<std::vector<int>> labels(10, std::vector<int>(5));
        for (int i = 0; i < 10; ++i)
            for (int j = 0; j < 5; ++j) {
                scores[i][j] = s(rng);
                labels[i][j] = coin(rng);
            }
        const auto rep = eval::map_multilabel(scores, labels, {"a", "b", "c", "d", "e"}, "t", "s");
        double sum = 0;
        int defined = 0;
        for (int j = 0; j < 5; ++j) {
            std::vector<double> col_s(10);
            std::vector<int> col_l(10);
            for (int i = 0; i < 10; ++i) {
                col_s[i] = scores[i][j];
                col_l[i] = labels[i][j];
            }
            if (std::none_of(col_l.begin(), col_l.end(), [](int l) { return l != 0; })) continue;
            sum += ap_brute_force(col_s, col_l);
            defined += 1;
        }
        CHECK(rep.defined_labels == defined);
        CHECK(rep.map == doctest::Approx(sum / defined).epsilon(1e-12));
    }

    SUBCASE("shape mismatch throws") {
        CHECK_THROWS_AS(eval::map_multilabel({{0.1}}, {{1, 0}}, {"a", "b"}, "t", "s"),
                        std::invalid_argument);
    }
}

TEST_CASE("evaluate_with_scorer: ground-truth echo reaches mAP 1") {
    const auto d = testing::table2_fixture();
    const auto spec = model::make_task_spec(model::Task::Triplet, d);
    REQUIRE(spec.width() == 34);

    const auto rep = eval::evaluate_with_scorer(
        [&](const schema::FrameAnnotation& f) { return *model::frame_labels(spec, f); }, spec, d,
        "test");
    CHECK(rep.map == 1.0);
    CHECK(rep.frames == 312);

    // Determinism: a second run produces the identical CSV.
    const auto rep2 = eval::evaluate_with_scorer(
        [&](const schema::FrameAnnotation& f) { return *model::frame_labels(spec, f); }, spec, d,
        "test");
    CHECK(rep.to_csv() == rep2.to_csv());
}

TEST_CASE("evaluate: empty split is an error") {
    auto d = testing::tiny_dataset();  // test split is empty
    const auto spec = model::make_task_spec(model::Task::Cvs, d);
    CHECK_THROWS(eval::evaluate_with_scorer(
        [&](const schema::FrameAnnotation&) { return std::vector<double>(3, 0.0); }, spec, d,
        "test"));
}
