// Acceptance suite: end-to-end guarantees checked against independent
// re-computations and scripted fixtures. One PASS/FAIL line per criterion;
// the exit code is the number of failures.
#include "reviewtypes/analysis.hpp"
#include "reviewtypes/calibrate.hpp"
#include "reviewtypes/classify.hpp"
#include "reviewtypes/jsonl.hpp"
#include "reviewtypes/metrics.hpp"
#include "reviewtypes/models.hpp"
#include "reviewtypes/rng.hpp"
#include "reviewtypes/typology.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace {

namespace fs = std::filesystem;

const std::string kCli = RVT_CLI_PATH;
const std::string kFixGen = RVT_FIXGEN_PATH;
const fs::path kFixtures = RVT_FIXTURE_DIR;

fs::path scratch() {
    static fs::path dir = [] {
        fs::path d = fs::path(RVT_SCRATCH_DIR) / "acceptance";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int run_cmd(const std::string& cmd) {
    static int counter = 0;
    fs::path log = scratch() / ("cmd_" + std::to_string(counter++) + ".log");
    int status = std::system((cmd + " > " + log.string() + " 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in.good())
        throw std::runtime_error("cannot open " + p.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

rvt::Json jread(const fs::path& p) {
    return rvt::Json::parse(slurp(p));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. The scripted corpus classifies in bounded time, fills the cache, reruns
// for free, and reproduces every scripted yes/valid count as a probability.
bool replay_determinism() {
    fs::path dir = scratch() / "c1";
    fs::create_directories(dir);
    fs::path reviews = kFixtures / "replay" / "reviews.jsonl";
    fs::path log = dir / "replay.jsonl";
    fs::path man = dir / "manifest.json";
    if (run_cmd(kFixGen + " --reviews " + reviews.string() + " --out " + log.string() +
                " --manifest " + man.string()) != 0)
        return false;

    fs::path cache = dir / "cache.jsonl";
    auto classify_into = [&](const fs::path& out) {
        return run_cmd(kCli + " classify --reviews " + reviews.string() + " --replay " +
                       log.string() + " --cache " + cache.string() + " --out " + out.string());
    };
    auto t0 = std::chrono::steady_clock::now();
    if (classify_into(dir / "cold") != 0 || classify_into(dir / "warm") != 0)
        return false;
    double secs = seconds_since(t0);
    std::printf("  cold+warm classify took %.2fs\n", secs);

    rvt::Json manifest = jread(man);
    rvt::Json cold = jread(dir / "cold" / "summary.json");
    rvt::Json warm = jread(dir / "warm" / "summary.json");
    auto n = manifest["n_sentences"].get<long long>();
    bool ok = secs < 5.0;
    ok = ok && cold["n_failures"].get<long long>() == 0;
    ok = ok && cold["llm_calls"].get<long long>() == n * 24 * 10;
    ok = ok && warm["llm_calls"].get<long long>() == 0;
    ok = ok && slurp(dir / "cold" / "predictions.jsonl") ==
                   slurp(dir / "warm" / "predictions.jsonl");

    auto preds = rvt::load_predictions(dir / "cold" / "predictions.jsonl");
    if (preds.size() != static_cast<std::size_t>(n))
        return false;
    std::size_t i = 0;
    for (const auto& sent : manifest["sentences"]) {
        ok = ok && preds[i].sentence_id == sent["sentence_id"].get<std::string>();
        const rvt::Json& types = sent["types"];
        for (rvt::InfoType t : rvt::all_types()) {
            const rvt::Json& counts = types[std::string(rvt::type_name(t))];
            int yes = counts["yes"].get<int>();
            int valid = counts["valid"].get<int>();
            auto ti = static_cast<std::size_t>(t);
            ok = ok && preds[i].valid_counts[ti] == valid;
            ok = ok && preds[i].probs[ti] == static_cast<double>(yes) / valid;
        }
        ++i;
    }
    return ok && i == preds.size();
}

// Same arithmetic as the library's binary F1, recomputed from scratch.
double mirror_f1(long long tp, long long fp, long long fn) {
    long long pd = tp + fp;
    long long rd = tp + fn;
    double p = pd > 0 ? static_cast<double>(tp) / static_cast<double>(pd) : 0.0;
    double r = rd > 0 ? static_cast<double>(tp) / static_cast<double>(rd) : 0.0;
    return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

// 2. Grid calibration agrees with an exhaustive scan on random dev sets, in
// both execution modes, including the no-gold default.
bool calibration_vs_brute_force() {
    bool ok = true;
    for (int trial = 0; trial < 20; ++trial) {
        rvt::Rng gen(rvt::derive_seed(400, "acc-cal", static_cast<std::uint64_t>(trial)));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::vector<rvt::LabeledExample> dev(100);
        for (std::size_t i = 0; i < dev.size(); ++i) {
            dev[i].sentence_id = "s" + std::to_string(i);
            for (rvt::InfoType t : rvt::all_types()) {
                dev[i].vector[static_cast<std::size_t>(t)] = unit(gen);
                if (unit(gen) < 0.3)
                    dev[i].gold.insert(t);
            }
            if (trial % 2 == 1)
                dev[i].gold.erase(rvt::InfoType::inappropriate); // no-gold default path
        }
        auto serial = rvt::optimal_thresholds(dev, nullptr, rvt::Execution::serial);
        auto parallel = rvt::optimal_thresholds(dev, nullptr, rvt::Execution::parallel);
        for (rvt::InfoType t : rvt::all_types()) {
            auto ti = static_cast<std::size_t>(t);
            bool any_gold = false;
            for (const auto& ex : dev)
                any_gold = any_gold || ex.gold.count(t) > 0;
            double expect = 1.0;
            if (any_gold) {
                double best_f1 = -1.0;
                for (int g = 1; g <= 10; ++g) {
                    double theta = static_cast<double>(g) / 10.0;
                    long long tp = 0, fp = 0, fn = 0;
                    for (const auto& ex : dev) {
                        bool pred = ex.vector[ti] >= theta;
                        bool gold = ex.gold.count(t) > 0;
                        tp += pred && gold;
                        fp += pred && !gold;
                        fn += !pred && gold;
                    }
                    double score = mirror_f1(tp, fp, fn);
                    if (score > best_f1) { // ties keep the smallest theta
                        best_f1 = score;
                        expect = theta;
                    }
                }
            }
            ok = ok && serial.thresholds[ti] == expect;
            ok = ok && parallel.thresholds[ti] == expect;
        }
    }
    return ok;
}

// 3. Combining precision/recall and per-type scores lands on the frozen
// reference values.
bool f1_reference_values() {
    bool ok = std::abs(rvt::f1_from_pr(0.866, 0.903) - 0.884) <= 0.0005;
    std::vector<double> per_type = {88.4, 46.7, 50.0, 68.9, 38.2, 69.6, 44.2, 66.7,
                                    51.1, 64.9, 50.0, 46.2, 63.2, 78.4, 55.3, 65.7,
                                    32.3, 54.5, 52.9, 72.7, 62.5, 27.6, 44.4, 66.7};
    ok = ok && per_type.size() == rvt::kNumTypes;
    ok = ok && std::abs(rvt::macro_f1(per_type) - 56.7) <= 0.05;
    return ok;
}

// 4. Chance baselines: closed forms hit the frozen values and simulations
// converge to the closed forms.
bool chance_baselines() {
    double p1 = 4012.0 / 5000.0;
    double p2 = 562.0 / 1304.0;
    double c1 = rvt::proportion_known_accuracy(p1);
    double c2 = rvt::proportion_known_accuracy(p2);
    bool ok = std::abs(c1 - 0.683) <= 0.003;
    ok = ok && std::abs(c2 - 0.510) <= 0.005;
    ok = ok && std::abs(rvt::simulate_proportion_known_accuracy(p1, 10000, 17) - c1) <= 0.015;
    ok = ok && std::abs(rvt::simulate_proportion_known_accuracy(p2, 10000, 18) - c2) <= 0.015;

    std::vector<double> prevalence = {0.690, 0.192, 0.038, 0.113, 0.084, 0.142,
                                      0.117, 0.205, 0.180, 0.059, 0.113, 0.184,
                                      0.368, 0.092, 0.063, 0.452, 0.038, 0.029,
                                      0.038, 0.063, 0.088, 0.038, 0.096, 0.021};
    double closed = rvt::random_macro_f1(prevalence);
    ok = ok && std::abs(closed - 0.409) <= 0.005;
    double sim = rvt::simulate_random_macro_f1(prevalence, 20000, 19, rvt::Execution::parallel);
    ok = ok && std::abs(sim - closed) <= 0.01;
    return ok;
}

// Two gaussian blobs separated along every third dimension.
std::vector<rvt::FeatureRow> blob_rows(int n, double margin, std::uint64_t seed) {
    rvt::Rng rng(seed);
    std::normal_distribution<double> noise(0.0, 0.05);
    std::vector<rvt::FeatureRow> rows(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto& row = rows[static_cast<std::size_t>(i)];
        row.id = "b" + std::to_string(i);
        row.target = static_cast<double>(i % 2);
        double sign = i % 2 == 0 ? -1.0 : 1.0;
        row.features.resize(rvt::kNumTypes);
        for (std::size_t d = 0; d < rvt::kNumTypes; ++d)
            row.features[d] = (d % 3 == 0 ? sign * margin : 0.0) + noise(rng);
    }
    return rows;
}

// 5. Cross-validated SVM accuracy: near-perfect on separable blobs, chance
// once the same targets are shuffled, both inside the time budget.
bool svm_separability() {
    auto rows = blob_rows(200, 0.5, rvt::derive_seed(500, "acc-blobs", 0));
    rvt::Trainer trainer = [](const std::vector<rvt::FeatureRow>& train) {
        rvt::SvmConfig cfg;
        cfg.seed = 99;
        return rvt::train_svm(train, cfg);
    };
    rvt::CvConfig cv;
    cv.n_iterations = 50;
    cv.seed = 11;
    cv.exec = rvt::Execution::parallel;

    auto t0 = std::chrono::steady_clock::now();
    auto sep = rvt::cross_validate(rows, trainer, rvt::accuracy_metric, cv);

    auto shuffled = rows; // same features, permuted targets: no signal left
    std::vector<double> targets;
    for (const auto& row : shuffled)
        targets.push_back(row.target);
    rvt::Rng rng(rvt::derive_seed(500, "acc-shuffle", 0));
    std::shuffle(targets.begin(), targets.end(), rng);
    for (std::size_t i = 0; i < shuffled.size(); ++i)
        shuffled[i].target = targets[i];
    auto chance = rvt::cross_validate(shuffled, trainer, rvt::accuracy_metric, cv);
    double secs = seconds_since(t0);
    std::printf("  two 50-iteration cv runs took %.2fs (separable %.3f, shuffled %.3f)\n",
                secs, sep.mean, chance.mean);
    return secs < 10.0 && sep.mean >= 0.99 && std::abs(chance.mean - 0.5) <= 0.05;
}

// Rows with target w.x + b, optionally plus gaussian noise.
std::vector<rvt::FeatureRow> planted_rows(int n, const std::vector<double>& w, double b,
                                          double sigma, std::uint64_t seed) {
    rvt::Rng rng(seed);
    std::uniform_real_distribution<double> unit(-2.0, 2.0);
    std::normal_distribution<double> noise(0.0, sigma > 0.0 ? sigma : 1.0);
    std::vector<rvt::FeatureRow> rows(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto& row = rows[static_cast<std::size_t>(i)];
        row.id = "r" + std::to_string(i);
        row.features.resize(w.size());
        double y = b;
        for (std::size_t d = 0; d < w.size(); ++d) {
            row.features[d] = unit(rng);
            y += w[d] * row.features[d];
        }
        row.target = sigma > 0.0 ? y + noise(rng) : y;
    }
    return rows;
}

// 6. Regression recovers planted coefficients: exact on clean data, noise
// floor on noisy data.
bool regression_recovery() {
    std::vector<double> w = {1.5, -2.0, 0.0, 3.25};
    rvt::RegressionConfig tight;
    tight.ridge_lambda = 1e-10; // keeps the clean fit within 1e-6
    auto train = planted_rows(40, w, 0.75, 0.0, rvt::derive_seed(600, "acc-reg", 0));
    auto model = rvt::train_regression(train, tight);
    auto heldout = planted_rows(20, w, 0.75, 0.0, rvt::derive_seed(600, "acc-reg", 1));
    double worst = 0.0;
    for (const auto& row : heldout)
        worst = std::max(worst, std::abs(rvt::predict_value(model, row.features) - row.target));
    bool ok = worst <= 1e-6;

    auto noisy_train = planted_rows(2000, w, 0.75, 0.1, rvt::derive_seed(600, "acc-reg", 2));
    auto noisy_model = rvt::train_regression(noisy_train, rvt::RegressionConfig{});
    auto noisy_test = planted_rows(2000, w, 0.75, 0.1, rvt::derive_seed(600, "acc-reg", 3));
    std::vector<double> pred, gold;
    for (const auto& row : noisy_test) {
        pred.push_back(rvt::predict_value(noisy_model, row.features));
        gold.push_back(row.target);
    }
    double err = rvt::mse(pred, gold);
    std::printf("  clean worst abs error %.2e, noisy test mse %.4f\n", worst, err);
    return ok && err >= 0.008 && err <= 0.012; // sigma^2 = 0.01
}

// 7. Ranking metrics agree with brute-force recomputations on random
// fixtures, and recall tightens as the precision target rises.
bool ranking_vs_brute_force() {
    bool ok = true;
    for (int trial = 0; trial < 100; ++trial) {
        rvt::Rng rng(rvt::derive_seed(700, "acc-rank", static_cast<std::uint64_t>(trial)));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::uniform_int_distribution<int> gain_dist(0, 3);

        auto n_groups = static_cast<std::size_t>(2 + rng() % 4);
        std::vector<std::vector<rvt::RankedItem>> groups(n_groups);
        double total = 0.0;
        for (auto& group : groups) {
            group.resize(1 + rng() % 6);
            for (auto& item : group) {
                item.predicted = unit(rng); // continuous, so ties have measure zero
                item.gain = static_cast<double>(gain_dist(rng));
            }
            double best_pred = group[0].predicted;
            double top_gain = group[0].gain;
            double max_gain = 0.0;
            for (const auto& item : group) {
                if (item.predicted > best_pred) {
                    best_pred = item.predicted;
                    top_gain = item.gain;
                }
                max_gain = std::max(max_gain, item.gain);
            }
            total += max_gain > 0.0 ? top_gain / max_gain : 1.0;
        }
        double brute = total / static_cast<double>(n_groups);
        ok = ok && std::abs(rvt::ndcg_at_k(groups, 1) - brute) <= 1e-12;

        auto n = static_cast<std::size_t>(30 + rng() % 51);
        std::vector<double> scores(n);
        std::vector<int> labels(n);
        bool any_pos = false;
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = unit(rng);
            labels[i] = unit(rng) < 0.4 ? 1 : 0;
            any_pos = any_pos || labels[i] == 1;
        }
        if (!any_pos)
            labels[0] = 1;
        auto positives = static_cast<long long>(std::count(labels.begin(), labels.end(), 1));
        double prev = 2.0;
        for (double target : {0.75, 0.80, 0.85}) {
            double best = 0.0;
            for (double th : scores) {
                long long tp = 0, fp = 0;
                for (std::size_t i = 0; i < n; ++i)
                    if (scores[i] >= th)
                        (labels[i] == 1 ? tp : fp) += 1;
                double p = static_cast<double>(tp) / static_cast<double>(tp + fp);
                double r = static_cast<double>(tp) / static_cast<double>(positives);
                if (p >= target)
                    best = std::max(best, r);
            }
            double got = rvt::recall_at_precision(scores, labels, target);
            ok = ok && std::abs(got - best) <= 1e-12;
            ok = ok && got <= prev;
            prev = got;
        }
    }
    return ok;
}

rvt::TypeVector constant_vector(double v) {
    rvt::TypeVector vec{};
    vec.fill(v);
    return vec;
}

// 8. Corpus profiles are two-stage means (document first), bounded, and
// bitwise invariant to document and sentence order.
bool profile_two_stage() {
    rvt::ClassifiedDoc one;
    one.doc_id = "a";
    one.sentences = {constant_vector(1.0)};
    rvt::ClassifiedDoc three;
    three.doc_id = "b";
    three.sentences = {constant_vector(0.0), constant_vector(0.0), constant_vector(0.0)};
    auto profile = rvt::corpus_profile({one, three}, "review-set");
    bool ok = profile.n_units == 2;
    for (double v : profile.vector)
        ok = ok && v == 0.5; // the 3-sentence document cannot dominate

    rvt::Rng rng(rvt::derive_seed(800, "acc-prof", 0));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<rvt::ClassifiedDoc> docs(25);
    for (std::size_t i = 0; i < docs.size(); ++i) {
        docs[i].doc_id = "d" + std::to_string(i);
        docs[i].sentences.resize(1 + rng() % 5);
        for (auto& sentence : docs[i].sentences)
            for (auto& v : sentence)
                v = unit(rng);
    }
    auto base = rvt::corpus_profile(docs, "review-set");
    for (double v : base.vector)
        ok = ok && v >= 0.0 && v <= 1.0;

    auto permuted = docs;
    std::shuffle(permuted.begin(), permuted.end(), rng);
    for (auto& doc : permuted)
        std::shuffle(doc.sentences.begin(), doc.sentences.end(), rng);
    auto again = rvt::corpus_profile(permuted, "review-set");
    return ok && again.vector == base.vector;
}

// 9. Youden tuning: J = 1 on separated classes, and near zero when scores
// carry no information about labels.
bool youden_behaviour() {
    std::vector<double> scores = {0.1, 0.2, 0.3, 0.7, 0.8, 0.9};
    std::vector<int> labels = {0, 0, 0, 1, 1, 1};
    auto tuned = rvt::youden_threshold(scores, labels);
    bool ok = tuned.j == 1.0 && tuned.threshold > 0.3 && tuned.threshold < 0.7;

    int low = 0;
    for (int trial = 0; trial < 100; ++trial) {
        rvt::Rng rng(rvt::derive_seed(900, "acc-youden", static_cast<std::uint64_t>(trial)));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::vector<double> s(1000);
        std::vector<int> l(1000);
        for (std::size_t i = 0; i < s.size(); ++i) {
            s[i] = unit(rng);
            l[i] = unit(rng) < 0.5 ? 1 : 0;
        }
        l[0] = 0;
        l[1] = 1; // both classes guaranteed
        low += rvt::youden_threshold(s, l).j < 0.15;
    }
    std::printf("  independent scores stayed below j=0.15 in %d/100 trials\n", low);
    return ok && low >= 95;
}

// 10. Bootstrap intervals: identical across reruns and execution modes, and
// sized like the normal-theory interval for a mean.
bool bootstrap_interval() {
    rvt::Rng rng(rvt::derive_seed(1000, "acc-boot", 0));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> samples(1000);
    for (auto& v : samples)
        v = normal(rng);
    auto mean_fn = [](const std::vector<double>& xs) {
        return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    };
    auto a = rvt::bootstrap_ci(mean_fn, samples, 0.025, 1000, 77, rvt::Execution::serial);
    auto b = rvt::bootstrap_ci(mean_fn, samples, 0.025, 1000, 77, rvt::Execution::serial);
    auto c = rvt::bootstrap_ci(mean_fn, samples, 0.025, 1000, 77, rvt::Execution::parallel);
    bool ok = a.lo == b.lo && a.hi == b.hi && a.lo == c.lo && a.hi == c.hi;
    double width = a.hi - a.lo;
    double expected = 2.0 * 1.96 / std::sqrt(1000.0); // normal-theory width for a mean
    std::printf("  ci [%.4f, %.4f], width %.4f vs normal-theory %.4f\n", a.lo, a.hi, width,
                expected);
    return ok && a.lo < a.hi && width >= 0.8 * expected && width <= 1.2 * expected;
}

// 11. The CLI calibrate/eval pair reproduces the scripted thresholds and
// report exactly.
bool cli_scripted_eval() {
    fs::path dir = scratch() / "c11";
    fs::create_directories(dir);
    fs::path dev = kFixtures / "scripted_eval" / "dev.jsonl";
    fs::path test = kFixtures / "scripted_eval" / "test.jsonl";
    fs::path cal = dir / "cal";
    if (run_cmd(kCli + " calibrate --labeled " + dev.string() + " --out " + cal.string()) != 0)
        return false;

    rvt::Json expected = jread(kFixtures / "scripted_eval" / "manifest.json");
    rvt::Json thresholds = jread(cal / "thresholds.json");
    bool ok = thresholds["thresholds"].size() == rvt::kNumTypes;
    double fallback = expected["default_threshold"].get<double>();
    for (const auto& [name, value] : thresholds["thresholds"].items()) {
        double want = expected["thresholds"].contains(name)
                          ? expected["thresholds"][name].get<double>()
                          : fallback;
        ok = ok && value.get<double>() == want;
    }

    fs::path eval = dir / "eval";
    if (run_cmd(kCli + " eval-typology --labeled " + test.string() + " --thresholds " +
                (cal / "thresholds.json").string() + " --out " + eval.string()) != 0)
        return false;
    rvt::Json report = jread(eval / "report.json");
    ok = ok && report["macro_f1"].get<double>() == expected["fine_macro_f1"].get<double>();
    ok = ok &&
         report["coarse_macro_f1"].get<double>() == expected["coarse_macro_f1"].get<double>();
    for (const auto& [name, f1v] : expected["fine_f1"].items())
        ok = ok && report["types"][name]["f1"].get<double>() == f1v.get<double>();
    for (const auto& [name, f1v] : expected["coarse_f1"].items())
        ok = ok && report["groups"][name]["f1"].get<double>() == f1v.get<double>();
    return ok;
}

} // namespace

int main() {
    int failures = 0;
    int n = 0;
    auto criterion = [&](const char* label, const std::function<bool()>& body) {
        ++n;
        bool ok = false;
        try {
            ok = body();
        } catch (const std::exception& e) {
            std::printf("  criterion %d threw: %s\n", n, e.what());
        }
        std::printf("%s %2d %s\n", ok ? "PASS" : "FAIL", n, label);
        failures += !ok;
    };

    criterion("scripted replay is deterministic and cache-complete", replay_determinism);
    criterion("threshold calibration matches exhaustive search", calibration_vs_brute_force);
    criterion("f1 arithmetic reproduces reference values", f1_reference_values);
    criterion("chance baselines match closed forms", chance_baselines);
    criterion("svm separates blobs and stays at chance on shuffled labels", svm_separability);
    criterion("regression recovers planted coefficients", regression_recovery);
    criterion("ranking metrics match brute force", ranking_vs_brute_force);
    criterion("corpus profiles are order-invariant two-stage means", profile_two_stage);
    criterion("youden threshold separates signal and stays low on noise", youden_behaviour);
    criterion("bootstrap interval is deterministic and well-sized", bootstrap_interval);
    criterion("cli calibrate and eval reproduce the scripted report", cli_scripted_eval);

    std::printf("%d/%d criteria passed\n", n - failures, n);
    return failures;
}
