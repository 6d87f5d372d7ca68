#include "reviewtypes/errors.hpp"
#include "reviewtypes/models.hpp"
#include "reviewtypes/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

using namespace rvt;

namespace {

// Two well-separated 24-dim blobs around +/- margin along a fixed direction.
std::vector<FeatureRow> separable_rows(int n, double margin, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> noise(0.0, 0.05);
    std::vector<FeatureRow> rows;
    for (int i = 0; i < n; ++i) {
        FeatureRow r;
        r.id = "x" + std::to_string(i);
        r.target = i % 2;
        double sign = r.target > 0.5 ? 1.0 : -1.0;
        for (int d = 0; d < 24; ++d) {
            double direction = (d % 3 == 0) ? 1.0 : 0.0;
            r.features.push_back(0.5 + sign * margin * direction + noise(gen));
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<FeatureRow> linear_rows(int n, const std::vector<double>& w, double b,
                                    double sigma, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, sigma);
    std::vector<FeatureRow> rows;
    for (int i = 0; i < n; ++i) {
        FeatureRow r;
        r.id = "r" + std::to_string(i);
        double y = b;
        for (double wj : w) {
            double x = unit(gen);
            r.features.push_back(x);
            y += wj * x;
        }
        r.target = y + (sigma > 0.0 ? noise(gen) : 0.0);
        rows.push_back(std::move(r));
    }
    return rows;
}

} // namespace

TEST_CASE("svm separates blob data and is deterministic") {
    auto rows = separable_rows(120, 0.5, 31);
    SvmConfig cfg;
    cfg.seed = 4;
    LinearModel m1 = train_svm(rows, cfg);
    LinearModel m2 = train_svm(rows, cfg);
    CHECK(m1.weights == m2.weights);
    CHECK(m1.bias == m2.bias);
    CHECK(m1.standardized);

    int correct = 0;
    for (const auto& r : rows)
        correct += predict_class(m1, r.features) == (r.target > 0.5 ? 1 : 0);
    CHECK(correct == 120);

    // A different seed shuffles differently but still separates.
    cfg.seed = 5;
    LinearModel m3 = train_svm(rows, cfg);
    correct = 0;
    for (const auto& r : rows)
        correct += predict_class(m3, r.features) == (r.target > 0.5 ? 1 : 0);
    CHECK(correct == 120);
}

TEST_CASE("svm requires both classes and consistent dimensions") {
    auto rows = separable_rows(20, 0.5, 32);
    for (auto& r : rows)
        r.target = 1.0;
    CHECK_THROWS_AS(train_svm(rows, {}), DataError);
    CHECK_THROWS_AS(train_svm({}, {}), DataError);

    auto good = separable_rows(20, 0.5, 33);
    LinearModel m = train_svm(good, {});
    CHECK_THROWS_AS(decision_value(m, {0.5, 0.5}), DataError);
}

TEST_CASE("constant features survive standardization") {
    auto rows = separable_rows(40, 0.5, 34);
    for (auto& r : rows)
        r.features[7] = 3.0; // zero variance column
    LinearModel m = train_svm(rows, {});
    CHECK(m.standardization.stdev[7] == 1.0);
    for (const auto& r : rows) {
        double v = decision_value(m, r.features);
        CHECK(std::isfinite(v));
    }
}

TEST_CASE("regression recovers a noiseless linear target") {
    std::vector<double> w = {1.5, -2.0, 0.0, 3.25};
    auto rows = linear_rows(40, w, 0.75, 0.0, 35);
    LinearModel m = train_regression(rows, {});
    REQUIRE(m.weights.size() == 4);
    for (std::size_t j = 0; j < w.size(); ++j)
        CHECK(m.weights[j] == doctest::Approx(w[j]).epsilon(1e-6));
    CHECK(m.bias == doctest::Approx(0.75).epsilon(1e-6));
    auto fresh = linear_rows(10, w, 0.75, 0.0, 36);
    for (const auto& r : fresh)
        CHECK(predict_value(m, r.features) == doctest::Approx(r.target).epsilon(1e-6));
}

TEST_CASE("regression needs more rows than parameters") {
    std::vector<double> w = {1.0, 2.0, 3.0};
    CHECK_THROWS_AS(train_regression(linear_rows(3, w, 0.0, 0.0, 37), {}), DataError);
    CHECK_NOTHROW(train_regression(linear_rows(4, w, 0.0, 0.0, 37), {}));
}

TEST_CASE("ridge term keeps duplicated features solvable") {
    std::vector<double> w = {2.0, 1.0};
    auto rows = linear_rows(30, w, 0.5, 0.0, 38);
    for (auto& r : rows)
        r.features.push_back(r.features[0]); // exact copy column
    LinearModel m = train_regression(rows, {});
    // Predictions stay right even though the split between the twin columns
    // is arbitrary.
    for (const auto& r : rows)
        CHECK(predict_value(m, r.features) == doctest::Approx(r.target).epsilon(1e-4));
}

TEST_CASE("cross validation is invariant to row order") {
    auto rows = separable_rows(60, 0.4, 39);
    CvConfig cfg;
    cfg.n_iterations = 10;
    cfg.seed = 12;
    auto trainer = [](const std::vector<FeatureRow>& train) {
        SvmConfig sc;
        sc.seed = 2;
        return train_svm(train, sc);
    };
    CvReport a = cross_validate(rows, trainer, accuracy_metric, cfg);

    std::mt19937_64 gen(40);
    auto shuffled = rows;
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    CvReport b = cross_validate(shuffled, trainer, accuracy_metric, cfg);
    CHECK(a.per_iteration == b.per_iteration);
    CHECK(a.mean == b.mean);
    CHECK(a.ci.lo == b.ci.lo);
    CHECK(a.ci.hi == b.ci.hi);

    CvConfig par = cfg;
    par.exec = Execution::parallel;
    CvReport c = cross_validate(rows, trainer, accuracy_metric, par);
    CHECK(a.per_iteration == c.per_iteration);
    CHECK(a.ci.lo == c.ci.lo);
    CHECK(a.ci.hi == c.ci.hi);
}

TEST_CASE("cross validation rejects duplicate ids and degenerate splits") {
    auto rows = separable_rows(10, 0.4, 41);
    rows[3].id = rows[0].id;
    CHECK_THROWS_AS(cross_validate(
                        rows, [](const auto& t) { return train_svm(t, {}); }, accuracy_metric,
                        {}),
                    DataError);

    // Two rows, one per class: every split leaves a single-class train side,
    // so the redraw budget runs out.
    std::vector<FeatureRow> two;
    for (int i = 0; i < 2; ++i) {
        FeatureRow r;
        r.id = "t" + std::to_string(i);
        r.target = i;
        r.features = {static_cast<double>(i), 1.0};
        two.push_back(std::move(r));
    }
    CvConfig tiny;
    tiny.n_iterations = 1;
    tiny.train_fraction = 0.5;
    CHECK_THROWS_AS(cross_validate(
                        two, [](const auto& t) { return train_svm(t, {}); }, accuracy_metric,
                        tiny),
                    DataError);
}

TEST_CASE("train fraction is clamped to leave both sides non-empty") {
    auto rows = separable_rows(4, 0.5, 42);
    CvConfig cfg;
    cfg.n_iterations = 3;
    cfg.train_fraction = 0.99; // lround(3.96) = 4 would empty the test side
    auto trainer = [](const std::vector<FeatureRow>& train) {
        SvmConfig sc;
        return train_svm(train, sc);
    };
    CvReport r = cross_validate(rows, trainer, accuracy_metric, cfg);
    CHECK(r.per_iteration.size() == 3);
    for (double acc : r.per_iteration) {
        CHECK(acc >= 0.0);
        CHECK(acc <= 1.0);
    }
}

TEST_CASE("feature subsets resolve names, groups, and 'all'") {
    CHECK(subset_indices("all").size() == 24);
    auto opinions = subset_indices("opinions");
    CHECK(opinions == std::vector<std::size_t>{0, 1});
    auto listed = subset_indices("price,opinion");
    CHECK(listed == std::vector<std::size_t>{0, 13}); // canonical order, not input order
    auto stylistic = subset_indices("stylistic");
    CHECK(stylistic == std::vector<std::size_t>{20, 21, 22, 23});
    CHECK_THROWS_AS(subset_indices("nonsense"), ConfigError);
    CHECK_THROWS_AS(subset_indices(""), ConfigError);
    CHECK_THROWS_AS(subset_indices("opinion,,tip"), ConfigError);

    FeatureRow r;
    r.id = "a";
    r.target = 1.0;
    for (int i = 0; i < 24; ++i)
        r.features.push_back(i);
    auto picked = select_features({r}, "opinions");
    REQUIRE(picked.size() == 1);
    CHECK(picked[0].features == std::vector<double>{0.0, 1.0});
    FeatureRow short_row = r;
    short_row.features.resize(8);
    CHECK_THROWS_AS(select_features({short_row}, "opinions"), ConfigError);
}

TEST_CASE("models survive a json round trip bitwise") {
    auto rows = separable_rows(40, 0.5, 43);
    LinearModel m = train_svm(rows, {});
    LinearModel back = model_from_json(model_to_json(m));
    CHECK(back.weights == m.weights);
    CHECK(back.bias == m.bias);
    CHECK(back.standardized == m.standardized);
    CHECK(back.standardization.mean == m.standardization.mean);
    CHECK(back.standardization.stdev == m.standardization.stdev);
    for (const auto& r : rows)
        CHECK(decision_value(back, r.features) == decision_value(m, r.features));

    CvConfig cfg;
    cfg.n_iterations = 4;
    CvReport report = cross_validate(
        rows, [](const auto& t) { return train_svm(t, {}); }, accuracy_metric, cfg);
    Json j = cv_report_to_json(report);
    CHECK(j["mean"].get<double>() == report.mean);
    CHECK(j["per_iteration"].size() == 4);
}
