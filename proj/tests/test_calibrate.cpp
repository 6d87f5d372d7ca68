#include "reviewtypes/calibrate.hpp"
#include "reviewtypes/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <string>
#include <vector>

using namespace rvt;

namespace {

std::string fixture(const char* rel) {
    return std::string(RVT_FIXTURE_DIR) + "/" + rel;
}

// Brute-force per-type grid scan, written flat so it shares nothing with the
// library's implementation.
std::array<double, kNumTypes> brute_force_grid(const std::vector<LabeledExample>& dev) {
    std::array<double, kNumTypes> out{};
    for (std::size_t t = 0; t < kNumTypes; ++t) {
        InfoType type = static_cast<InfoType>(t);
        bool any_gold = false;
        for (const auto& ex : dev)
            any_gold = any_gold || ex.gold.count(type) > 0;
        if (!any_gold) {
            out[t] = 1.0;
            continue;
        }
        double best_theta = 0.0, best_f1 = -1.0;
        for (int i = 1; i <= 10; ++i) {
            double theta = static_cast<double>(i) / 10.0;
            long long tp = 0, fp = 0, fn = 0;
            for (const auto& ex : dev) {
                bool pred = ex.vector[t] >= theta;
                bool gold = ex.gold.count(type) > 0;
                if (pred && gold)
                    ++tp;
                else if (pred)
                    ++fp;
                else if (gold)
                    ++fn;
            }
            double p = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
            double r = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
            double f1 = p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
            if (f1 > best_f1) { // strict: ties keep the smaller theta
                best_f1 = f1;
                best_theta = theta;
            }
        }
        out[t] = best_theta;
    }
    return out;
}

std::vector<LabeledExample> random_dev(std::uint64_t seed, int n) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<LabeledExample> dev;
    for (int i = 0; i < n; ++i) {
        LabeledExample ex;
        ex.sentence_id = "s" + std::to_string(i);
        for (std::size_t t = 0; t < kNumTypes; ++t) {
            bool member = unit(gen) < 0.3;
            if (member)
                ex.gold.insert(static_cast<InfoType>(t));
            ex.vector[t] = member ? 0.3 + 0.7 * unit(gen) : 0.7 * unit(gen);
        }
        if (ex.gold.empty())
            ex.gold.insert(static_cast<InfoType>(gen() % kNumTypes));
        dev.push_back(std::move(ex));
    }
    return dev;
}

} // namespace

TEST_CASE("optimal thresholds equal the exhaustive grid scan") {
    for (std::uint64_t trial = 0; trial < 5; ++trial) {
        auto dev = random_dev(1000 + trial, 60);
        ThresholdProfile p = optimal_thresholds(dev);
        auto expected = brute_force_grid(dev);
        for (std::size_t t = 0; t < kNumTypes; ++t)
            CHECK(p.thresholds[t] == expected[t]);
        // Serial and parallel tuning agree bitwise.
        ThresholdProfile q = optimal_thresholds(dev, nullptr, Execution::parallel);
        CHECK(p.thresholds == q.thresholds);
    }
}

TEST_CASE("threshold grid membership and tie-breaking") {
    std::vector<LabeledExample> dev;
    LabeledExample pos;
    pos.sentence_id = "a";
    pos.gold = {InfoType::opinion};
    pos.vector[0] = 0.5;
    LabeledExample neg;
    neg.sentence_id = "b";
    neg.gold = {InfoType::tip};
    neg.vector[0] = 0.4;
    neg.vector[10] = 0.9;
    dev = {pos, neg};

    ThresholdProfile p = optimal_thresholds(dev);
    // theta 0.5 is the only grid point with a perfect F1: probabilities at
    // the threshold count as positive.
    CHECK(p.thresholds[0] == 0.5);
    // tip is perfect from 0.1 through 0.9; the tie keeps the smallest.
    CHECK(p.thresholds[10] == 0.1);
    for (double t : p.thresholds) {
        bool on_grid = false;
        for (int i = 1; i <= 10; ++i)
            on_grid = on_grid || t == static_cast<double>(i) / 10.0;
        CHECK(on_grid);
    }
}

TEST_CASE("types without gold positives default to 1.0 with a warning") {
    auto dev = random_dev(7, 20);
    for (auto& ex : dev) {
        ex.gold.erase(InfoType::sarcasm);
        ex.gold.erase(InfoType::imagery);
        if (ex.gold.empty())
            ex.gold.insert(InfoType::opinion);
    }
    std::vector<std::string> warnings;
    ThresholdProfile p = optimal_thresholds(dev, &warnings);
    CHECK(p.thresholds[static_cast<std::size_t>(InfoType::sarcasm)] == 1.0);
    CHECK(p.thresholds[static_cast<std::size_t>(InfoType::imagery)] == 1.0);
    REQUIRE(warnings.size() >= 2);
    // Warnings arrive in canonical type order: imagery before sarcasm.
    std::size_t imagery_at = warnings.size(), sarcasm_at = warnings.size();
    for (std::size_t i = 0; i < warnings.size(); ++i) {
        if (warnings[i].find("imagery") != std::string::npos)
            imagery_at = i;
        if (warnings[i].find("sarcasm") != std::string::npos)
            sarcasm_at = i;
    }
    CHECK(imagery_at < sarcasm_at);
    CHECK_THROWS_AS(optimal_thresholds({}), DataError);
}

TEST_CASE("apply_thresholds uses >= at the boundary") {
    ThresholdProfile p;
    p.thresholds.fill(1.0);
    p.thresholds[0] = 0.4;
    p.thresholds[10] = 0.5;
    TypeVector v{};
    v[0] = 0.4;   // exactly at threshold: in
    v[10] = 0.49; // just below: out
    v[13] = 1.0;  // at the 1.0 default: in
    auto labels = apply_thresholds(v, p);
    CHECK(labels == std::set<InfoType>{InfoType::opinion, InfoType::price});
}

TEST_CASE("threshold profiles survive a json round trip and reject bad grids") {
    auto dev = random_dev(3, 30);
    ThresholdProfile p = optimal_thresholds(dev);
    p.provenance = "dev round trip";
    Json j = profile_to_json(p);
    ThresholdProfile q = profile_from_json(j);
    CHECK(q.thresholds == p.thresholds);
    CHECK(q.provenance == p.provenance);

    Json off_grid = profile_to_json(p);
    off_grid["thresholds"]["opinion"] = 0.35;
    CHECK_THROWS_AS(profile_from_json(off_grid), ConfigError);

    Json missing = profile_to_json(p);
    missing["thresholds"].erase("tip");
    CHECK_THROWS_AS(profile_from_json(missing), ConfigError);

    // A representation wobble within 1e-9 of a grid point is accepted.
    Json close = profile_to_json(p);
    close["thresholds"]["opinion"] = 0.3 + 2e-10;
    CHECK(profile_from_json(close).thresholds[0] == 0.3);
}

TEST_CASE("youden threshold maximizes TPR minus FPR") {
    // Perfect separation: J = 1 at the midpoint between the classes.
    YoudenResult r = youden_threshold({0.1, 0.2, 0.35, 0.8}, {0, 0, 1, 1});
    CHECK(r.j == doctest::Approx(1.0));
    CHECK(r.threshold == (0.2 + 0.35) / 2.0);
    // Mixed case, hand-checked: scores sorted .1 .4 .5 .6 .9 with labels
    // 0 1 0 1 1 -> best J = 2/3 - 0 at the .5/.6 midpoint.
    YoudenResult m = youden_threshold({0.9, 0.4, 0.6, 0.1, 0.5}, {1, 1, 1, 0, 0});
    CHECK(m.j == doctest::Approx(2.0 / 3.0));
    CHECK(m.threshold == (0.5 + 0.6) / 2.0);
    CHECK_THROWS_AS(youden_threshold({0.5, 0.6}, {1, 1}), DataError);
    CHECK_THROWS_AS(youden_threshold({0.5}, {1, 0}), DataError);
}

TEST_CASE("labeled examples load embedded or joined") {
    auto dev = load_labeled_examples(fixture("scripted_eval/dev.jsonl"));
    REQUIRE(dev.size() == 6);
    CHECK(dev[0].sentence_id == "d1");
    CHECK(dev[0].gold == std::set<InfoType>{InfoType::opinion, InfoType::tip});
    CHECK(dev[0].vector[0] == 0.9);
    CHECK(dev[0].vector[10] == 0.8);
    CHECK(dev[0].vector[13] == 0.1);
    CHECK(dev[0].vector[5] == 0.0);
}

TEST_CASE("labeled loader rejects malformed rows") {
    auto dir = std::filesystem::path(RVT_SCRATCH_DIR) / "calibrate";
    std::filesystem::create_directories(dir);
    auto write = [&](const char* name, const std::string& content) {
        auto p = dir / name;
        std::ofstream out(p, std::ios::trunc);
        out << content;
        return p;
    };
    auto empty_gold = write("empty_gold.jsonl",
                            R"({"sentence_id":"x","gold":[],"probs":[0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0]})"
                            "\n");
    CHECK_THROWS_AS(load_labeled_examples(empty_gold), DataError);
    auto bad_type = write("bad_type.jsonl",
                          R"({"sentence_id":"x","gold":["opinionz"],"probs":[0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0]})"
                          "\n");
    CHECK_THROWS_AS(load_labeled_examples(bad_type), ConfigError);
    auto short_probs = write("short_probs.jsonl",
                             R"({"sentence_id":"x","gold":["opinion"],"probs":[0.5]})"
                             "\n");
    CHECK_THROWS_AS(load_labeled_examples(short_probs), DataError);

    // Label-only rows join against a predictions file by sentence id.
    auto labels = write("labels.jsonl", R"({"sentence_id":"s1","gold":["opinion"]})"
                                        "\n");
    std::string probs24 = "[0.9";
    for (int i = 1; i < 24; ++i)
        probs24 += ",0.0";
    probs24 += "]";
    std::string valids24 = "[10";
    for (int i = 1; i < 24; ++i)
        valids24 += ",10";
    valids24 += "]";
    auto preds = write("preds.jsonl",
                       R"({"sentence_id":"s1","model_id":"m","temperature":0.3,"n":10,"probs":)" +
                           probs24 + R"(,"valid_counts":)" + valids24 + "}\n");
    auto joined = load_labeled_examples(labels, preds);
    REQUIRE(joined.size() == 1);
    CHECK(joined[0].vector[0] == 0.9);

    auto orphan = write("orphan.jsonl", R"({"sentence_id":"missing","gold":["opinion"]})"
                                        "\n");
    CHECK_THROWS_AS(load_labeled_examples(orphan, preds), DataError);
}
