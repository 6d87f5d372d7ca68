#include "reviewtypes/analysis.hpp"
#include "reviewtypes/calibrate.hpp"
#include "reviewtypes/classify.hpp"
#include "reviewtypes/errors.hpp"
#include "reviewtypes/ingest.hpp"
#include "reviewtypes/jsonl.hpp"
#include "reviewtypes/llm.hpp"
#include "reviewtypes/metrics.hpp"
#include "reviewtypes/models.hpp"
#include "reviewtypes/rng.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <unordered_map>

namespace fs = std::filesystem;
using rvt::Json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitPartial = 4;

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw rvt::ConfigError("cannot create output directory " + dir.string());
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw rvt::DataError("cannot write " + path.string());
    out << content;
}

void write_json(const fs::path& path, const Json& j) {
    write_text(path, j.dump(2) + "\n");
}

Json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in)
        throw rvt::ConfigError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw rvt::DataError(path.string() + ": " + e.what());
    }
}

// Shortest round-trip decimal repr, for CSV cells.
std::string num(double v) {
    return Json(v).dump();
}

void write_run_config(CLI::App& app, const fs::path& out_dir) {
    // Set options only: emitting every default would feed "" back through
    // the option validators on reload.
    write_text(out_dir / "run_config.ini", app.config_to_str(false, true));
}

std::unordered_map<std::string, rvt::TypeVector> prediction_map(const fs::path& path) {
    std::unordered_map<std::string, rvt::TypeVector> map;
    for (const auto& p : rvt::load_predictions(path))
        map[p.sentence_id] = p.probs;
    return map;
}

// Review sentences joined against predictions; unclassified sentences drop out.
std::vector<rvt::ClassifiedDoc>
docs_from_reviews(const std::vector<rvt::Review>& reviews,
                  const std::unordered_map<std::string, rvt::TypeVector>& preds) {
    std::vector<rvt::ClassifiedDoc> docs;
    for (const auto& r : reviews) {
        rvt::ClassifiedDoc doc;
        doc.doc_id = r.review_id;
        doc.category_id = r.category_id;
        for (const auto& s : rvt::split_into_sentences(r.review_id, r.text)) {
            auto it = preds.find(s.sentence_id);
            if (it != preds.end())
                doc.sentences.push_back(it->second);
        }
        docs.push_back(std::move(doc));
    }
    return docs;
}

std::vector<rvt::ClassifiedDoc>
docs_from_summaries(const std::vector<rvt::SummaryDoc>& summaries,
                    const std::unordered_map<std::string, rvt::TypeVector>& preds) {
    std::vector<rvt::ClassifiedDoc> docs;
    for (const auto& sd : summaries) {
        rvt::ClassifiedDoc doc;
        doc.doc_id = sd.product_id;
        for (const auto& s : rvt::summary_sentences(sd)) {
            auto it = preds.find(s.sentence_id);
            if (it != preds.end())
                doc.sentences.push_back(it->second);
        }
        docs.push_back(std::move(doc));
    }
    return docs;
}

// 24-dim review mean vector, or its 8-dim coarse projection per sentence
// before averaging.
std::vector<double> doc_features(const rvt::ClassifiedDoc& doc, bool coarse) {
    if (!coarse) {
        rvt::TypeVector v = rvt::aggregate_mean(doc.sentences);
        return {v.begin(), v.end()};
    }
    std::vector<double> acc(rvt::kNumGroups, 0.0);
    for (const auto& s : doc.sentences) {
        rvt::GroupVector g = rvt::coarse_project(s);
        for (std::size_t i = 0; i < rvt::kNumGroups; ++i)
            acc[i] += g[i];
    }
    for (auto& x : acc)
        x /= static_cast<double>(doc.sentences.size());
    return acc;
}

struct ClassifyOpts {
    std::string reviews_path, summaries_path, sentences_path;
    std::string endpoint, replay_path, cache_path;
    std::string out_dir;
    std::string model_id = "default";
    double temperature = 0.3;
    int max_tokens = 8;
    int n_reps = 10;
    int max_parallel = 4;
    int max_retries = 2;
    double timeout_s = 30.0;
    std::string response_field = "text";
    std::string typology_file, categories_file;
    std::string default_category = "product";
    bool parallel = false;
};

int run_classify(CLI::App& app, const ClassifyOpts& o) {
    int provided = (!o.reviews_path.empty()) + (!o.summaries_path.empty()) +
                   (!o.sentences_path.empty());
    if (provided != 1)
        throw rvt::ConfigError("provide exactly one of --reviews, --summaries, --sentences");
    if (o.endpoint.empty() == o.replay_path.empty())
        throw rvt::ConfigError("provide exactly one of --endpoint, --replay");
    if (o.out_dir.empty())
        throw rvt::ConfigError("--out is required");
    ensure_dir(o.out_dir);

    rvt::Typology typology =
        o.typology_file.empty() ? rvt::Typology::builtin() : rvt::Typology::from_file(o.typology_file);
    rvt::CategoryCatalog categories = o.categories_file.empty()
                                          ? rvt::CategoryCatalog::builtin()
                                          : rvt::CategoryCatalog::from_file(o.categories_file);

    std::vector<rvt::Sentence> sentences;
    std::vector<std::string> category_ids;
    if (!o.reviews_path.empty()) {
        for (const auto& r : rvt::load_reviews(o.reviews_path))
            for (auto& s : rvt::split_into_sentences(r.review_id, r.text)) {
                sentences.push_back(std::move(s));
                category_ids.push_back(r.category_id);
            }
    } else if (!o.summaries_path.empty()) {
        for (const auto& sd : rvt::load_summaries(o.summaries_path))
            for (auto& s : rvt::summary_sentences(sd)) {
                sentences.push_back(std::move(s));
                category_ids.push_back(o.default_category);
            }
    } else {
        std::string stem = fs::path(o.sentences_path).stem().string();
        int idx = 0;
        for (const auto& row : rvt::load_scored_sentences(o.sentences_path)) {
            rvt::Sentence s;
            s.doc_id = stem;
            s.position = idx;
            s.sentence_id = stem + "#" + std::to_string(idx);
            s.text = rvt::normalize_text(row.text);
            if (s.text.empty())
                throw rvt::DataError(o.sentences_path + ": row " + std::to_string(idx) +
                                     " is empty after normalization");
            sentences.push_back(std::move(s));
            category_ids.push_back(o.default_category);
            ++idx;
        }
    }
    if (sentences.empty())
        throw rvt::DataError("no sentences to classify");

    rvt::ModelConfig mc;
    mc.endpoint_url = o.endpoint;
    mc.model_id = o.model_id;
    mc.temperature = o.temperature;
    mc.max_tokens = o.max_tokens;
    mc.request_timeout_s = o.timeout_s;
    mc.max_parallel = o.max_parallel;
    mc.max_retries = o.max_retries;
    mc.response_field = o.response_field;

    std::unique_ptr<rvt::CompletionClient> client;
    if (!o.replay_path.empty())
        client = std::make_unique<rvt::ReplayClient>(o.replay_path);
    else
        client = std::make_unique<rvt::HttpClient>(mc);

    rvt::PredictionCache cache =
        o.cache_path.empty() ? rvt::PredictionCache() : rvt::PredictionCache(o.cache_path);

    rvt::ClassifyConfig cc;
    cc.model = mc;
    cc.n_repetitions = o.n_reps;
    cc.typology = &typology;
    cc.categories = &categories;
    cc.exec = o.parallel ? rvt::Execution::parallel : rvt::Execution::serial;

    rvt::Engine engine(*client, cache, cc);
    rvt::CorpusResult result = engine.classify_corpus(sentences, category_ids);

    fs::path out(o.out_dir);
    rvt::write_predictions(out / "predictions.jsonl", result.predictions);
    if (!result.failures.empty()) {
        std::vector<Json> rows;
        for (const auto& f : result.failures)
            rows.push_back(Json{{"sentence_id", f.sentence_id}, {"reason", f.reason}});
        rvt::write_jsonl(out / "failures.jsonl", rows);
    }
    Json summary = {{"n_sentences", sentences.size()},
                    {"n_predictions", result.predictions.size()},
                    {"n_failures", result.failures.size()},
                    {"llm_calls", engine.llm_calls()},
                    {"cache_entries", cache.size()}};
    write_json(out / "summary.json", summary);
    write_run_config(app, out);
    std::cout << "classified " << result.predictions.size() << "/" << sentences.size()
              << " sentences (" << engine.llm_calls() << " llm calls, "
              << result.failures.size() << " failures)\n";
    return result.failures.empty() ? kExitOk : kExitPartial;
}

struct CalibrateOpts {
    std::string labeled_path, predictions_path, out_dir;
    bool parallel = false;
};

int run_calibrate(CLI::App& app, const CalibrateOpts& o) {
    if (o.labeled_path.empty() || o.out_dir.empty())
        throw rvt::ConfigError("--labeled and --out are required");
    ensure_dir(o.out_dir);
    std::vector<rvt::LabeledExample> dev =
        o.predictions_path.empty()
            ? rvt::load_labeled_examples(o.labeled_path)
            : rvt::load_labeled_examples(o.labeled_path, o.predictions_path);
    std::vector<std::string> warnings;
    rvt::ThresholdProfile profile = rvt::optimal_thresholds(
        dev, &warnings, o.parallel ? rvt::Execution::parallel : rvt::Execution::serial);
    profile.provenance = fs::path(o.labeled_path).filename().string() + " (" +
                         std::to_string(dev.size()) + " examples)";
    fs::path out(o.out_dir);
    write_json(out / "thresholds.json", rvt::profile_to_json(profile));
    write_run_config(app, out);
    for (const auto& w : warnings)
        std::cerr << "warning: " << w << "\n";
    std::cout << "calibrated 24 thresholds on " << dev.size() << " examples ("
              << warnings.size() << " defaulted)\n";
    return kExitOk;
}

struct EvalOpts {
    std::string labeled_path, predictions_path, thresholds_path, out_dir;
};

int run_eval_typology(CLI::App& app, const EvalOpts& o) {
    if (o.labeled_path.empty() || o.thresholds_path.empty() || o.out_dir.empty())
        throw rvt::ConfigError("--labeled, --thresholds, and --out are required");
    ensure_dir(o.out_dir);
    std::vector<rvt::LabeledExample> test =
        o.predictions_path.empty()
            ? rvt::load_labeled_examples(o.labeled_path)
            : rvt::load_labeled_examples(o.labeled_path, o.predictions_path);
    rvt::ThresholdProfile profile = rvt::profile_from_json(read_json(o.thresholds_path));

    std::vector<std::set<rvt::InfoType>> gold, pred;
    gold.reserve(test.size());
    pred.reserve(test.size());
    for (const auto& ex : test) {
        gold.push_back(ex.gold);
        pred.push_back(rvt::apply_thresholds(ex.vector, profile));
    }
    rvt::EvalReport report = rvt::evaluate_labels(gold, pred);

    fs::path out(o.out_dir);
    write_json(out / "report.json", rvt::report_to_json(report));
    write_text(out / "report.txt", rvt::format_report(report));
    write_run_config(app, out);
    std::cout << rvt::format_report(report);
    return kExitOk;
}

struct TaskOpts {
    std::string reviews_path, predictions_path;
    std::string features = "fine"; // fine | coarse
    std::string subset = "all";    // fine-feature subset
    int cv_iterations = 50;
    double train_fraction = 0.7;
    double svm_lambda = 0.01;
    int svm_epochs = 200;
    std::uint64_t seed = 0;
    std::string out_dir;
    bool parallel = false;
};

std::vector<rvt::FeatureRow>
labeled_review_rows(const std::vector<rvt::Review>& reviews,
                    const std::unordered_map<std::string, rvt::TypeVector>& preds,
                    const std::function<std::optional<double>(const rvt::Review&)>& label_fn,
                    const TaskOpts& o, std::size_t& n_excluded) {
    bool coarse = o.features == "coarse";
    std::vector<rvt::FeatureRow> rows;
    for (const auto& r : reviews) {
        std::optional<double> target = label_fn(r);
        if (!target) {
            ++n_excluded;
            continue;
        }
        rvt::ClassifiedDoc doc;
        doc.doc_id = r.review_id;
        for (const auto& s : rvt::split_into_sentences(r.review_id, r.text)) {
            auto it = preds.find(s.sentence_id);
            if (it != preds.end())
                doc.sentences.push_back(it->second);
        }
        if (doc.sentences.empty()) {
            ++n_excluded;
            continue;
        }
        rvt::FeatureRow row;
        row.id = r.review_id;
        row.features = doc_features(doc, coarse);
        row.target = *target;
        rows.push_back(std::move(row));
    }
    if (!coarse && o.subset != "all") {
        for (auto& row : rows)
            if (row.features.size() != rvt::kNumTypes)
                throw rvt::ConfigError("subset selection needs 24-dim features");
        rows = rvt::select_features(rows, o.subset);
    }
    return rows;
}

Json run_classification_cv(std::vector<rvt::FeatureRow> rows, const TaskOpts& o) {
    long long positives = 0;
    for (const auto& r : rows)
        positives += r.target >= 0.5;
    double p = static_cast<double>(positives) / static_cast<double>(rows.size());

    rvt::SvmConfig svm;
    svm.lambda = o.svm_lambda;
    svm.epochs = o.svm_epochs;
    rvt::CvConfig cv;
    cv.n_iterations = o.cv_iterations;
    cv.train_fraction = o.train_fraction;
    cv.seed = o.seed;
    cv.exec = o.parallel ? rvt::Execution::parallel : rvt::Execution::serial;
    rvt::CvReport report = rvt::cross_validate(
        rows,
        [&, svm](const std::vector<rvt::FeatureRow>& train) {
            rvt::SvmConfig c = svm;
            c.seed = rvt::derive_seed(o.seed, "svm-train", train.size());
            return rvt::train_svm(train, c);
        },
        rvt::accuracy_metric, cv);

    return Json{{"n_rows", rows.size()},
                {"positive_rate", p},
                {"cv", rvt::cv_report_to_json(report)},
                {"baselines",
                 {{"random_5050", 0.5},
                  {"proportion_known", rvt::proportion_known_accuracy(p)}}}};
}

int run_task_helpful_reviews(CLI::App& app, const TaskOpts& o) {
    if (o.reviews_path.empty() || o.predictions_path.empty() || o.out_dir.empty())
        throw rvt::ConfigError("--reviews, --predictions, and --out are required");
    ensure_dir(o.out_dir);
    auto reviews = rvt::load_reviews(o.reviews_path);
    auto preds = prediction_map(o.predictions_path);
    std::size_t n_excluded = 0;
    auto rows = labeled_review_rows(
        reviews, preds,
        [](const rvt::Review& r) -> std::optional<double> {
            switch (rvt::derive_review_helpfulness(r)) {
            case rvt::HelpfulLabel::helpful: return 1.0;
            case rvt::HelpfulLabel::unhelpful: return 0.0;
            case rvt::HelpfulLabel::excluded: return std::nullopt;
            }
            return std::nullopt;
        },
        o, n_excluded);
    if (rows.empty())
        throw rvt::DataError("no labeled reviews after vote filtering");
    Json report = run_classification_cv(std::move(rows), o);
    report["task"] = "helpful-reviews";
    report["features"] = o.features;
    report["subset"] = o.subset;
    report["n_excluded"] = n_excluded;
    fs::path out(o.out_dir);
    write_json(out / "report.json", report);
    write_run_config(app, out);
    std::cout << "helpful-reviews: cv accuracy mean " << report["cv"]["mean"].dump()
              << " over " << o.cv_iterations << " iterations\n";
    return kExitOk;
}

int run_task_sentiment(CLI::App& app, const TaskOpts& o) {
    if (o.reviews_path.empty() || o.predictions_path.empty() || o.out_dir.empty())
        throw rvt::ConfigError("--reviews, --predictions, and --out are required");
    ensure_dir(o.out_dir);
    auto reviews = rvt::load_reviews(o.reviews_path);
    auto preds = prediction_map(o.predictions_path);
    std::size_t n_excluded = 0;
    std::size_t n_unrated = 0;
    auto rows = labeled_review_rows(
        reviews, preds,
        [&](const rvt::Review& r) -> std::optional<double> {
            if (!r.rating) {
                ++n_unrated;
                return std::nullopt;
            }
            return rvt::derive_sentiment(r) == rvt::Sentiment::positive ? 1.0 : 0.0;
        },
        o, n_excluded);
    if (rows.empty())
        throw rvt::DataError("no rated reviews with classified sentences");
    if (n_unrated > 0)
        std::cerr << "warning: skipped " << n_unrated << " reviews without a rating\n";
    Json report = run_classification_cv(std::move(rows), o);
    report["task"] = "sentiment";
    report["features"] = o.features;
    report["subset"] = o.subset;
    report["n_excluded"] = n_excluded;
    fs::path out(o.out_dir);
    write_json(out / "report.json", report);
    write_run_config(app, out);
    std::cout << "sentiment: cv accuracy mean " << report["cv"]["mean"].dump() << " over "
              << o.cv_iterations << " iterations\n";
    return kExitOk;
}

struct SentenceTaskOpts {
    std::string train_path, test_path;
    std::string train_predictions, test_predictions;
    std::string mode = "regression"; // regression | svm
    int cv_iterations = 50;
    double train_fraction = 0.7;
    double svm_lambda = 0.01;
    int svm_epochs = 200;
    double ridge_lambda = 1e-6;
    std::uint64_t seed = 0;
    std::string out_dir;
    bool parallel = false;
};

// Scored-sentence ids mirror the classify ids: "<file stem>#<row index>".
std::vector<rvt::FeatureRow>
scored_sentence_rows(const std::string& scored_path, const std::string& predictions_path,
                     std::vector<std::string>* product_ids, std::vector<double>* scores) {
    auto preds = prediction_map(predictions_path);
    std::string stem = fs::path(scored_path).stem().string();
    std::vector<rvt::FeatureRow> rows;
    int idx = 0;
    for (const auto& s : rvt::load_scored_sentences(scored_path)) {
        std::string id = stem + "#" + std::to_string(idx++);
        auto it = preds.find(id);
        if (it == preds.end())
            throw rvt::DataError("no prediction for sentence '" + id + "' in " +
                                 predictions_path);
        rvt::FeatureRow row;
        row.id = id;
        row.features.assign(it->second.begin(), it->second.end());
        row.target = s.helpfulness_score;
        rows.push_back(std::move(row));
        if (product_ids)
            product_ids->push_back(s.product_id);
        if (scores)
            scores->push_back(s.helpfulness_score);
    }
    return rows;
}

int run_task_helpful_sentences(CLI::App& app, const SentenceTaskOpts& o) {
    if (o.train_path.empty() || o.test_path.empty() || o.train_predictions.empty() ||
        o.test_predictions.empty() || o.out_dir.empty())
        throw rvt::ConfigError(
            "--train, --test, --train-predictions, --test-predictions, --out are required");
    ensure_dir(o.out_dir);

    std::vector<double> train_scores;
    auto train_rows = scored_sentence_rows(o.train_path, o.train_predictions, nullptr,
                                           &train_scores);
    std::vector<std::string> test_products;
    std::vector<double> test_scores;
    auto test_rows = scored_sentence_rows(o.test_path, o.test_predictions, &test_products,
                                          &test_scores);

    Json report;
    if (o.mode == "regression") {
        rvt::RegressionConfig rc;
        rc.ridge_lambda = o.ridge_lambda;
        rvt::LinearModel model = rvt::train_regression(train_rows, rc);

        std::vector<double> raw_pred, clamped;
        for (const auto& row : test_rows) {
            double v = rvt::predict_value(model, row.features);
            raw_pred.push_back(v);
            clamped.push_back(std::clamp(v, 0.0, 2.0)); // score range for MSE
        }
        double test_mse = rvt::mse(clamped, test_scores);
        Json pearson_j;
        try {
            pearson_j = rvt::pearson(raw_pred, test_scores);
        } catch (const rvt::DataError& e) {
            pearson_j = nullptr;
            report["pearson_note"] = e.what();
        }
        std::unordered_map<std::string, std::vector<rvt::RankedItem>> groups;
        for (std::size_t i = 0; i < test_rows.size(); ++i)
            groups[test_products[i]].push_back({raw_pred[i], test_scores[i]});
        std::vector<std::vector<rvt::RankedItem>> group_list;
        group_list.reserve(groups.size());
        {
            std::vector<std::string> keys;
            for (const auto& [k, _] : groups)
                keys.push_back(k);
            std::sort(keys.begin(), keys.end());
            for (const auto& k : keys)
                group_list.push_back(groups[k]);
        }
        double train_mean = std::accumulate(train_scores.begin(), train_scores.end(), 0.0) /
                            static_cast<double>(train_scores.size());
        std::vector<double> mean_pred(test_scores.size(), std::clamp(train_mean, 0.0, 2.0));
        report["task"] = "helpful-sentences";
        report["mode"] = "regression";
        report["n_train"] = train_rows.size();
        report["n_test"] = test_rows.size();
        report["mse"] = test_mse;
        report["pearson"] = pearson_j;
        report["ndcg_at_1"] = rvt::ndcg_at_k(group_list, 1);
        report["n_groups"] = group_list.size();
        report["baselines"] = {{"mean_predictor_mse", rvt::mse(mean_pred, test_scores)}};
        report["model"] = rvt::model_to_json(model);
    } else if (o.mode == "svm") {
        auto [lo, hi] = rvt::compute_tertile_borders(train_scores);
        std::vector<rvt::FeatureRow> labeled;
        long long n_train_lab = 0;
        auto add_labeled = [&](const std::vector<rvt::FeatureRow>& rows, bool is_train) {
            for (const auto& row : rows) {
                rvt::TertileLabel lab = rvt::derive_tertile_label(row.target, lo, hi);
                if (lab == rvt::TertileLabel::neutral)
                    continue;
                rvt::FeatureRow r = row;
                r.target = lab == rvt::TertileLabel::helpful ? 1.0 : 0.0;
                labeled.push_back(std::move(r));
                n_train_lab += is_train;
            }
        };
        add_labeled(train_rows, true);
        add_labeled(test_rows, false);
        if (labeled.size() < 2)
            throw rvt::DataError("too few tertile-labeled sentences");

        TaskOpts to;
        to.cv_iterations = o.cv_iterations;
        to.train_fraction = o.train_fraction;
        to.svm_lambda = o.svm_lambda;
        to.svm_epochs = o.svm_epochs;
        to.seed = o.seed;
        to.parallel = o.parallel;
        report = run_classification_cv(std::move(labeled), to);
        report["task"] = "helpful-sentences";
        report["mode"] = "svm";
        report["tertile_borders"] = {lo, hi};
        report["n_train_labeled"] = n_train_lab;
    } else {
        throw rvt::ConfigError("--mode must be 'regression' or 'svm'");
    }

    fs::path out(o.out_dir);
    write_json(out / "report.json", report);
    write_run_config(app, out);
    if (o.mode == "regression")
        std::cout << "helpful-sentences: mse " << report["mse"].dump() << ", ndcg@1 "
                  << report["ndcg_at_1"].dump() << "\n";
    else
        std::cout << "helpful-sentences (svm): cv accuracy mean " << report["cv"]["mean"].dump()
                  << "\n";
    return kExitOk;
}

struct BenchmarkOpts {
    std::string type_id;
    std::string train_labeled, test_labeled;
    std::string train_predictions, test_predictions;
    std::string tuner = "youden"; // youden | grid
    int train_size = 0;           // 0 = all
    std::vector<double> targets = {0.75, 0.80, 0.85};
    int bootstrap_resamples = 1000;
    std::uint64_t seed = 0;
    std::string out_dir;
    bool parallel = false;
};

int run_task_type_benchmark(CLI::App& app, const BenchmarkOpts& o) {
    if (o.type_id.empty() || o.train_labeled.empty() || o.test_labeled.empty() ||
        o.out_dir.empty())
        throw rvt::ConfigError("--type, --train-labeled, --test-labeled, --out are required");
    ensure_dir(o.out_dir);
    rvt::InfoType type = rvt::type_from_name(o.type_id);
    auto tidx = static_cast<std::size_t>(type);

    auto train = o.train_predictions.empty()
                     ? rvt::load_labeled_examples(o.train_labeled)
                     : rvt::load_labeled_examples(o.train_labeled, o.train_predictions);
    auto test = o.test_predictions.empty()
                    ? rvt::load_labeled_examples(o.test_labeled)
                    : rvt::load_labeled_examples(o.test_labeled, o.test_predictions);

    if (o.train_size > 0 && static_cast<std::size_t>(o.train_size) < train.size()) {
        std::sort(train.begin(), train.end(),
                  [](const auto& a, const auto& b) { return a.sentence_id < b.sentence_id; });
        rvt::Rng rng(rvt::derive_seed(o.seed, "bench-subsample", 0));
        std::shuffle(train.begin(), train.end(), rng);
        train.resize(static_cast<std::size_t>(o.train_size));
    }

    std::vector<double> train_scores;
    std::vector<int> train_labels;
    for (const auto& ex : train) {
        train_scores.push_back(ex.vector[tidx]);
        train_labels.push_back(ex.gold.count(type) ? 1 : 0);
    }

    double threshold = 0.0;
    Json tuner_info;
    if (o.tuner == "youden") {
        rvt::YoudenResult yr = rvt::youden_threshold(train_scores, train_labels);
        threshold = yr.threshold;
        tuner_info = {{"tuner", "youden"}, {"j", yr.j}};
    } else if (o.tuner == "grid") {
        double best_f1 = -1.0;
        for (int i = 1; i <= 10; ++i) {
            double theta = static_cast<double>(i) / 10.0;
            rvt::BinaryCounts c;
            for (std::size_t k = 0; k < train_scores.size(); ++k) {
                bool pred = train_scores[k] >= theta;
                bool gold = train_labels[k] == 1;
                if (pred && gold)
                    ++c.tp;
                else if (pred)
                    ++c.fp;
                else if (gold)
                    ++c.fn;
                else
                    ++c.tn;
            }
            double score = rvt::f1(c);
            if (score > best_f1) {
                best_f1 = score;
                threshold = theta;
            }
        }
        tuner_info = {{"tuner", "grid"}, {"train_f1", best_f1}};
    } else {
        throw rvt::ConfigError("--tuner must be 'youden' or 'grid'");
    }

    std::vector<double> test_scores;
    std::vector<int> test_labels;
    for (const auto& ex : test) {
        test_scores.push_back(ex.vector[tidx]);
        test_labels.push_back(ex.gold.count(type) ? 1 : 0);
    }

    auto f1_over = [&](const std::vector<std::size_t>& idxs) {
        rvt::BinaryCounts c;
        for (std::size_t k : idxs) {
            bool pred = test_scores[k] >= threshold;
            bool gold = test_labels[k] == 1;
            if (pred && gold)
                ++c.tp;
            else if (pred)
                ++c.fp;
            else if (gold)
                ++c.fn;
            else
                ++c.tn;
        }
        return rvt::f1(c);
    };
    auto rp_over = [&](const std::vector<std::size_t>& idxs, double target) -> double {
        std::vector<double> s;
        std::vector<int> l;
        bool any_pos = false;
        for (std::size_t k : idxs) {
            s.push_back(test_scores[k]);
            l.push_back(test_labels[k]);
            any_pos = any_pos || test_labels[k] == 1;
        }
        if (!any_pos)
            return 0.0; // resample without positives: no recall attainable
        return rvt::recall_at_precision(s, l, target);
    };

    std::vector<std::size_t> all_idx(test.size());
    std::iota(all_idx.begin(), all_idx.end(), 0);
    std::vector<double> index_samples(test.size());
    std::iota(index_samples.begin(), index_samples.end(), 0.0);
    auto exec = o.parallel ? rvt::Execution::parallel : rvt::Execution::serial;
    auto ci_of = [&](const std::function<double(const std::vector<std::size_t>&)>& stat,
                     std::string_view tag) {
        return rvt::bootstrap_ci(
            [&](const std::vector<double>& resampled) {
                std::vector<std::size_t> idxs;
                idxs.reserve(resampled.size());
                for (double v : resampled)
                    idxs.push_back(static_cast<std::size_t>(v));
                return stat(idxs);
            },
            index_samples, 0.025, o.bootstrap_resamples,
            rvt::derive_seed(o.seed, tag, 0), exec);
    };

    Json rp = Json::object();
    for (double target : o.targets) {
        auto stat = [&, target](const std::vector<std::size_t>& idxs) {
            return rp_over(idxs, target);
        };
        rvt::Interval ci = ci_of(stat, "bench-rp");
        rp[num(target)] = {{"value", rp_over(all_idx, target)}, {"ci", {ci.lo, ci.hi}}};
    }
    rvt::Interval f1_ci = ci_of(f1_over, "bench-f1");

    Json report = {{"task", "type-benchmark"},
                   {"type", o.type_id},
                   {"threshold", threshold},
                   {"tuning", tuner_info},
                   {"n_train", train.size()},
                   {"n_test", test.size()},
                   {"f1", f1_over(all_idx)},
                   {"f1_ci", {f1_ci.lo, f1_ci.hi}},
                   {"recall_at_precision", rp}};
    fs::path out(o.out_dir);
    write_json(out / "report.json", report);
    write_run_config(app, out);
    std::cout << "type-benchmark " << o.type_id << ": threshold " << num(threshold) << ", f1 "
              << report["f1"].dump() << "\n";
    return kExitOk;
}

struct CompareOpts {
    std::string reviews_a, summaries_a, predictions_a;
    std::string reviews_b, summaries_b, predictions_b;
    double min_prob = 0.2;
    std::string out_dir;
};

rvt::Profile side_profile(const std::string& reviews_path, const std::string& summaries_path,
                          const std::string& predictions_path, const char* side,
                          std::vector<std::string>& warnings) {
    if (reviews_path.empty() == summaries_path.empty())
        throw rvt::ConfigError(std::string("side ") + side +
                               ": provide exactly one of reviews/summaries");
    if (predictions_path.empty())
        throw rvt::ConfigError(std::string("side ") + side + ": predictions are required");
    auto preds = prediction_map(predictions_path);
    if (!reviews_path.empty())
        return rvt::corpus_profile(docs_from_reviews(rvt::load_reviews(reviews_path), preds),
                                   "review-set", &warnings);
    return rvt::corpus_profile(docs_from_summaries(rvt::load_summaries(summaries_path), preds),
                               "summary-set", &warnings);
}

int run_analyze_compare(CLI::App& app, const CompareOpts& o) {
    if (o.out_dir.empty())
        throw rvt::ConfigError("--out is required");
    ensure_dir(o.out_dir);
    std::vector<std::string> warnings;
    rvt::Profile a = side_profile(o.reviews_a, o.summaries_a, o.predictions_a, "a", warnings);
    rvt::Profile b = side_profile(o.reviews_b, o.summaries_b, o.predictions_b, "b", warnings);
    rvt::ProfileComparison cmp = rvt::compare_profiles(a, b);

    std::string profiles_csv = "side,type,value\n";
    for (rvt::InfoType t : rvt::all_types()) {
        auto i = static_cast<std::size_t>(t);
        profiles_csv += "a," + std::string(rvt::type_name(t)) + "," + num(a.vector[i]) + "\n";
        profiles_csv += "b," + std::string(rvt::type_name(t)) + "," + num(b.vector[i]) + "\n";
    }
    std::string deltas_csv = "type,delta\n";
    for (const auto& d : cmp.deltas)
        deltas_csv += std::string(rvt::type_name(d.type)) + "," + num(d.delta) + "\n";

    auto displayed = rvt::types_above({a.vector, b.vector}, o.min_prob);
    Json displayed_j = Json::array();
    for (rvt::InfoType t : displayed)
        displayed_j.push_back(rvt::type_name(t));

    Json summary = {{"n_a", a.n_units},
                    {"n_b", b.n_units},
                    {"level_a", a.level},
                    {"level_b", b.level},
                    {"pearson_r", cmp.pearson_r ? Json(*cmp.pearson_r) : Json(nullptr)},
                    {"displayed_types", displayed_j},
                    {"min_prob", o.min_prob},
                    {"warnings", warnings}};
    if (!cmp.pearson_note.empty())
        summary["pearson_note"] = cmp.pearson_note;

    fs::path out(o.out_dir);
    write_text(out / "profiles.csv", profiles_csv);
    write_text(out / "deltas.csv", deltas_csv);
    write_json(out / "summary.json", summary);
    write_run_config(app, out);
    std::cout << "compare: r = " << (cmp.pearson_r ? num(*cmp.pearson_r) : "undefined")
              << " over " << a.n_units << " vs " << b.n_units << " documents\n";
    return kExitOk;
}

struct CategoriesOpts {
    std::string reviews_path, predictions_path;
    double min_prob = 0.2;
    std::string out_dir;
};

int run_analyze_categories(CLI::App& app, const CategoriesOpts& o) {
    if (o.reviews_path.empty() || o.predictions_path.empty() || o.out_dir.empty())
        throw rvt::ConfigError("--reviews, --predictions, and --out are required");
    ensure_dir(o.out_dir);
    auto preds = prediction_map(o.predictions_path);
    auto docs = docs_from_reviews(rvt::load_reviews(o.reviews_path), preds);
    std::vector<std::string> warnings;
    auto profiles = rvt::category_profiles(docs, &warnings);
    if (profiles.empty())
        throw rvt::DataError("no category has classified documents");

    std::vector<rvt::TypeVector> vectors;
    for (const auto& [_, p] : profiles)
        vectors.push_back(p.vector);
    auto displayed = rvt::types_above(vectors, o.min_prob);

    std::string csv = "category,type,value\n";
    for (const auto& [category, profile] : profiles)
        for (rvt::InfoType t : displayed)
            csv += category + "," + std::string(rvt::type_name(t)) + "," +
                   num(profile.vector[static_cast<std::size_t>(t)]) + "\n";

    Json cats = Json::array();
    for (const auto& [category, profile] : profiles)
        cats.push_back(Json{{"category", category}, {"n_documents", profile.n_units}});
    Json summary = {{"categories", cats}, {"min_prob", o.min_prob}, {"warnings", warnings}};

    fs::path out(o.out_dir);
    write_text(out / "categories.csv", csv);
    write_json(out / "summary.json", summary);
    write_run_config(app, out);
    std::cout << "categories: " << profiles.size() << " profiles (" << displayed.size()
              << " displayed types)\n";
    return kExitOk;
}

struct StructureOpts {
    std::string reviews_path, summaries_path, predictions_path;
    int length = 0;
    double min_prob = 0.2;
    std::string out_dir;
};

int run_analyze_structure(CLI::App& app, const StructureOpts& o) {
    if (o.predictions_path.empty() || o.out_dir.empty() || o.length < 1)
        throw rvt::ConfigError("--predictions, --length >= 1, and --out are required");
    if (o.reviews_path.empty() == o.summaries_path.empty())
        throw rvt::ConfigError("provide exactly one of --reviews, --summaries");
    ensure_dir(o.out_dir);
    auto preds = prediction_map(o.predictions_path);
    auto docs = o.reviews_path.empty()
                    ? docs_from_summaries(rvt::load_summaries(o.summaries_path), preds)
                    : docs_from_reviews(rvt::load_reviews(o.reviews_path), preds);
    rvt::PositionalProfile pp = rvt::positional_profile(docs, o.length);

    auto displayed = rvt::types_above(pp.positions, o.min_prob);
    std::string csv = "position,type,value\n";
    for (int pos = 0; pos < pp.length; ++pos)
        for (rvt::InfoType t : displayed)
            csv += std::to_string(pos) + "," + std::string(rvt::type_name(t)) + "," +
                   num(pp.positions[static_cast<std::size_t>(pos)][static_cast<std::size_t>(t)]) +
                   "\n";

    Json summary = {{"length", pp.length},
                    {"n_documents", pp.n_documents},
                    {"min_prob", o.min_prob}};
    fs::path out(o.out_dir);
    write_text(out / "positions.csv", csv);
    write_json(out / "summary.json", summary);
    write_run_config(app, out);
    std::cout << "structure: " << pp.n_documents << " documents of length " << pp.length
              << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"review-sentence type classification and analysis toolkit"};
    app.set_config("--config", "", "INI config file (a run_config.ini snapshot reloads a run)");
    app.require_subcommand(1);

    ClassifyOpts classify_opts;
    auto* classify = app.add_subcommand("classify", "classify corpus sentences into 24 types");
    classify->add_option("--reviews", classify_opts.reviews_path, "reviews JSONL");
    classify->add_option("--summaries", classify_opts.summaries_path, "summaries JSONL");
    classify->add_option("--sentences", classify_opts.sentences_path,
                         "scored-sentences JSONL (standalone sentences)");
    classify->add_option("--endpoint", classify_opts.endpoint, "completion endpoint URL");
    classify->add_option("--replay", classify_opts.replay_path, "replay log JSONL");
    classify->add_option("--cache", classify_opts.cache_path, "prediction cache JSONL");
    classify->add_option("--out", classify_opts.out_dir, "output directory");
    classify->add_option("--model", classify_opts.model_id, "model identifier");
    classify->add_option("--temperature", classify_opts.temperature, "sampling temperature");
    classify->add_option("--max-tokens", classify_opts.max_tokens, "completion token cap");
    classify->add_option("--n-reps", classify_opts.n_reps, "repetitions per prompt");
    classify->add_option("--max-parallel", classify_opts.max_parallel,
                         "in-flight request ceiling");
    classify->add_option("--max-retries", classify_opts.max_retries, "transport retries");
    classify->add_option("--timeout", classify_opts.timeout_s, "request timeout seconds");
    classify->add_option("--response-field", classify_opts.response_field,
                         "dotted path to the response text field");
    classify->add_option("--typology-file", classify_opts.typology_file,
                         "TSV question override");
    classify->add_option("--categories-file", classify_opts.categories_file,
                         "TSV category subprompts");
    classify->add_option("--default-category", classify_opts.default_category,
                         "category for summaries/sentences input");
    classify->add_flag("--parallel", classify_opts.parallel, "classify sentences concurrently");

    CalibrateOpts calibrate_opts;
    auto* calibrate = app.add_subcommand("calibrate", "fit per-type thresholds on a dev set");
    calibrate->add_option("--labeled", calibrate_opts.labeled_path,
                          "labeled JSONL (gold sets, with probs or joined via --predictions)");
    calibrate->add_option("--predictions", calibrate_opts.predictions_path,
                          "predictions JSONL to join by sentence_id");
    calibrate->add_option("--out", calibrate_opts.out_dir, "output directory");
    calibrate->add_flag("--parallel", calibrate_opts.parallel, "tune types concurrently");

    EvalOpts eval_opts;
    auto* evalcmd = app.add_subcommand("eval-typology", "apply thresholds and score a test set");
    evalcmd->add_option("--labeled", eval_opts.labeled_path, "labeled test JSONL");
    evalcmd->add_option("--predictions", eval_opts.predictions_path,
                        "predictions JSONL to join by sentence_id");
    evalcmd->add_option("--thresholds", eval_opts.thresholds_path, "thresholds.json");
    evalcmd->add_option("--out", eval_opts.out_dir, "output directory");

    auto* task = app.add_subcommand("task", "downstream experiments");
    task->require_subcommand(1);

    TaskOpts hr_opts;
    auto* hr = task->add_subcommand("helpful-reviews", "vote-derived review helpfulness SVM");
    TaskOpts sent_opts;
    auto* sent = task->add_subcommand("sentiment", "rating-derived review sentiment SVM");
    for (auto [cmd, opts] : {std::pair{hr, &hr_opts}, std::pair{sent, &sent_opts}}) {
        cmd->add_option("--reviews", opts->reviews_path, "reviews JSONL");
        cmd->add_option("--predictions", opts->predictions_path, "predictions JSONL");
        cmd->add_option("--features", opts->features, "fine|coarse")
            ->check(CLI::IsMember({"fine", "coarse"}));
        cmd->add_option("--subset", opts->subset,
                        "all, a group name, or comma-separated type names");
        cmd->add_option("--cv-iterations", opts->cv_iterations, "cross-validation repeats");
        cmd->add_option("--train-fraction", opts->train_fraction, "train split fraction");
        cmd->add_option("--svm-lambda", opts->svm_lambda, "hinge regularization");
        cmd->add_option("--svm-epochs", opts->svm_epochs, "training epochs");
        cmd->add_option("--seed", opts->seed, "root seed");
        cmd->add_option("--out", opts->out_dir, "output directory");
        cmd->add_flag("--parallel", opts->parallel, "run CV iterations concurrently");
    }

    SentenceTaskOpts hs_opts;
    auto* hs = task->add_subcommand("helpful-sentences",
                                    "sentence helpfulness regression / tertile SVM");
    hs->add_option("--train", hs_opts.train_path, "train scored-sentences JSONL");
    hs->add_option("--test", hs_opts.test_path, "test scored-sentences JSONL");
    hs->add_option("--train-predictions", hs_opts.train_predictions, "train predictions JSONL");
    hs->add_option("--test-predictions", hs_opts.test_predictions, "test predictions JSONL");
    hs->add_option("--mode", hs_opts.mode, "regression|svm")
        ->check(CLI::IsMember({"regression", "svm"}));
    hs->add_option("--cv-iterations", hs_opts.cv_iterations, "cross-validation repeats (svm)");
    hs->add_option("--train-fraction", hs_opts.train_fraction, "train split fraction (svm)");
    hs->add_option("--svm-lambda", hs_opts.svm_lambda, "hinge regularization (svm)");
    hs->add_option("--svm-epochs", hs_opts.svm_epochs, "training epochs (svm)");
    hs->add_option("--ridge-lambda", hs_opts.ridge_lambda, "ridge stabilizer (regression)");
    hs->add_option("--seed", hs_opts.seed, "root seed");
    hs->add_option("--out", hs_opts.out_dir, "output directory");
    hs->add_flag("--parallel", hs_opts.parallel, "run CV iterations concurrently");

    BenchmarkOpts bench_opts;
    auto* bench = task->add_subcommand("type-benchmark",
                                       "single-type threshold benchmark with CIs");
    bench->add_option("--type", bench_opts.type_id, "type to benchmark (e.g. tip)");
    bench->add_option("--train-labeled", bench_opts.train_labeled, "labeled train JSONL");
    bench->add_option("--test-labeled", bench_opts.test_labeled, "labeled test JSONL");
    bench->add_option("--train-predictions", bench_opts.train_predictions,
                      "train predictions JSONL to join");
    bench->add_option("--test-predictions", bench_opts.test_predictions,
                      "test predictions JSONL to join");
    bench->add_option("--tuner", bench_opts.tuner, "youden|grid")
        ->check(CLI::IsMember({"youden", "grid"}));
    bench->add_option("--train-size", bench_opts.train_size,
                      "subsample train to N examples (0 = all)");
    bench->add_option("--targets", bench_opts.targets, "precision targets");
    bench->add_option("--bootstrap-resamples", bench_opts.bootstrap_resamples,
                      "bootstrap resample count");
    bench->add_option("--seed", bench_opts.seed, "root seed");
    bench->add_option("--out", bench_opts.out_dir, "output directory");
    bench->add_flag("--parallel", bench_opts.parallel, "bootstrap concurrently");

    auto* analyze = app.add_subcommand("analyze", "profile analyses over predictions");
    analyze->require_subcommand(1);

    CompareOpts cmp_opts;
    auto* cmp = analyze->add_subcommand("compare", "two-corpus profile comparison");
    cmp->add_option("--reviews-a", cmp_opts.reviews_a, "side-a reviews JSONL");
    cmp->add_option("--summaries-a", cmp_opts.summaries_a, "side-a summaries JSONL");
    cmp->add_option("--predictions-a", cmp_opts.predictions_a, "side-a predictions JSONL");
    cmp->add_option("--reviews-b", cmp_opts.reviews_b, "side-b reviews JSONL");
    cmp->add_option("--summaries-b", cmp_opts.summaries_b, "side-b summaries JSONL");
    cmp->add_option("--predictions-b", cmp_opts.predictions_b, "side-b predictions JSONL");
    cmp->add_option("--min-prob", cmp_opts.min_prob, "display filter threshold");
    cmp->add_option("--out", cmp_opts.out_dir, "output directory");

    CategoriesOpts cat_opts;
    auto* cats = analyze->add_subcommand("categories", "per-category profiles");
    cats->add_option("--reviews", cat_opts.reviews_path, "reviews JSONL");
    cats->add_option("--predictions", cat_opts.predictions_path, "predictions JSONL");
    cats->add_option("--min-prob", cat_opts.min_prob, "display filter threshold");
    cats->add_option("--out", cat_opts.out_dir, "output directory");

    StructureOpts struct_opts;
    auto* structure = analyze->add_subcommand("structure", "positional type profiles");
    structure->add_option("--reviews", struct_opts.reviews_path, "reviews JSONL");
    structure->add_option("--summaries", struct_opts.summaries_path, "summaries JSONL");
    structure->add_option("--predictions", struct_opts.predictions_path, "predictions JSONL");
    structure->add_option("--length", struct_opts.length, "document length to profile");
    structure->add_option("--min-prob", struct_opts.min_prob, "display filter threshold");
    structure->add_option("--out", struct_opts.out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (classify->parsed())
            return run_classify(app, classify_opts);
        if (calibrate->parsed())
            return run_calibrate(app, calibrate_opts);
        if (evalcmd->parsed())
            return run_eval_typology(app, eval_opts);
        if (task->parsed()) {
            if (hr->parsed())
                return run_task_helpful_reviews(app, hr_opts);
            if (sent->parsed())
                return run_task_sentiment(app, sent_opts);
            if (hs->parsed())
                return run_task_helpful_sentences(app, hs_opts);
            if (bench->parsed())
                return run_task_type_benchmark(app, bench_opts);
        }
        if (analyze->parsed()) {
            if (cmp->parsed())
                return run_analyze_compare(app, cmp_opts);
            if (cats->parsed())
                return run_analyze_categories(app, cat_opts);
            if (structure->parsed())
                return run_analyze_structure(app, struct_opts);
        }
        throw rvt::ConfigError("no subcommand selected");
    } catch (const rvt::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const rvt::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const rvt::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
