#include "reviewtypes/calibrate.hpp"

#include "reviewtypes/classify.hpp"
#include "reviewtypes/errors.hpp"
#include "reviewtypes/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>

namespace rvt {

namespace {

constexpr int kGridSize = 10;

double grid_value(int i) {
    return static_cast<double>(i) / 10.0; // i in 1..10
}

double f1_at_threshold(const std::vector<LabeledExample>& dev, InfoType t, double theta) {
    BinaryCounts c;
    auto idx = static_cast<std::size_t>(t);
    for (const auto& ex : dev) {
        bool pred = ex.vector[idx] >= theta;
        bool gold = ex.gold.count(t) > 0;
        if (pred && gold)
            ++c.tp;
        else if (pred)
            ++c.fp;
        else if (gold)
            ++c.fn;
        else
            ++c.tn;
    }
    return f1(c);
}

std::set<InfoType> parse_gold(const Json& row, const std::string& ctx) {
    if (!row.contains("gold") || !row["gold"].is_array())
        throw DataError(ctx + ": field 'gold' must be an array of type names");
    std::set<InfoType> gold;
    for (const auto& name : row["gold"]) {
        if (!name.is_string())
            throw DataError(ctx + ": gold entries must be strings");
        gold.insert(type_from_name(name.get<std::string>()));
    }
    if (gold.empty())
        throw DataError(ctx + ": gold label set is empty");
    return gold;
}

} // namespace

ThresholdProfile optimal_thresholds(const std::vector<LabeledExample>& dev,
                                    std::vector<std::string>* warnings, Execution exec) {
    if (dev.empty())
        throw DataError("threshold search needs a non-empty dev set");
    for (const auto& ex : dev)
        validate(ex.vector);

    ThresholdProfile profile;
    std::array<bool, kNumTypes> no_gold{};
    auto tune_one = [&](int ti) {
        auto t = static_cast<InfoType>(ti);
        bool any_gold = std::any_of(dev.begin(), dev.end(),
                                    [&](const LabeledExample& ex) { return ex.gold.count(t); });
        if (!any_gold) {
            no_gold[static_cast<std::size_t>(ti)] = true;
            profile.thresholds[static_cast<std::size_t>(ti)] = 1.0;
            return;
        }
        double best_f1 = -1.0;
        double best_theta = grid_value(1);
        for (int i = 1; i <= kGridSize; ++i) {
            double theta = grid_value(i);
            double score = f1_at_threshold(dev, t, theta);
            if (score > best_f1) { // strict: ties keep the smallest theta
                best_f1 = score;
                best_theta = theta;
            }
        }
        profile.thresholds[static_cast<std::size_t>(ti)] = best_theta;
    };

    if (exec == Execution::parallel) {
#pragma omp parallel for schedule(static)
        for (int ti = 0; ti < static_cast<int>(kNumTypes); ++ti)
            tune_one(ti);
    } else {
        for (int ti = 0; ti < static_cast<int>(kNumTypes); ++ti)
            tune_one(ti);
    }

    if (warnings)
        for (std::size_t i = 0; i < kNumTypes; ++i)
            if (no_gold[i])
                warnings->push_back("type " + std::string(type_name(static_cast<InfoType>(i))) +
                                    " has no gold positives; threshold defaults to 1.0");
    return profile;
}

YoudenResult youden_threshold(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size() || scores.empty())
        throw DataError("youden needs equal-length non-empty inputs");
    long long pos = std::count(labels.begin(), labels.end(), 1);
    long long neg = static_cast<long long>(labels.size()) - pos;
    if (pos == 0 || neg == 0)
        throw DataError("youden needs both classes present");

    std::vector<double> distinct = scores;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    std::vector<double> candidates;
    candidates.push_back(-std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i + 1 < distinct.size(); ++i)
        candidates.push_back(0.5 * (distinct[i] + distinct[i + 1]));
    candidates.push_back(std::numeric_limits<double>::infinity());

    YoudenResult best{candidates.front(), -2.0};
    for (double th : candidates) {
        long long tp = 0, fp = 0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            if (scores[i] >= th)
                (labels[i] == 1 ? tp : fp) += 1;
        }
        double j = static_cast<double>(tp) / pos - static_cast<double>(fp) / neg;
        if (j > best.j) { // strict: ties keep the smallest threshold
            best.j = j;
            best.threshold = th;
        }
    }
    return best;
}

std::set<InfoType> apply_thresholds(const TypeVector& v, const ThresholdProfile& p) {
    std::set<InfoType> out;
    for (InfoType t : all_types())
        if (v[static_cast<std::size_t>(t)] >= p.thresholds[static_cast<std::size_t>(t)])
            out.insert(t);
    return out;
}

Json profile_to_json(const ThresholdProfile& p) {
    Json thresholds = Json::object();
    for (InfoType t : all_types())
        thresholds[std::string(type_name(t))] = p.thresholds[static_cast<std::size_t>(t)];
    return Json{{"provenance", p.provenance}, {"thresholds", std::move(thresholds)}};
}

ThresholdProfile profile_from_json(const Json& j) {
    ThresholdProfile p;
    if (j.contains("provenance") && j["provenance"].is_string())
        p.provenance = j["provenance"].get<std::string>();
    if (!j.contains("thresholds") || !j["thresholds"].is_object())
        throw ConfigError("threshold profile needs a 'thresholds' object");
    const auto& th = j["thresholds"];
    for (InfoType t : all_types()) {
        std::string name(type_name(t));
        if (!th.contains(name) || !th[name].is_number())
            throw ConfigError("threshold profile is missing type '" + name + "'");
        double v = th[name].get<double>();
        bool on_grid = false;
        for (int i = 1; i <= kGridSize; ++i)
            if (std::abs(v - grid_value(i)) < 1e-9) {
                v = grid_value(i); // canonical grid double, not the parsed wobble
                on_grid = true;
                break;
            }
        if (!on_grid)
            throw ConfigError("threshold for '" + name + "' is not on the 0.1..1.0 grid");
        p.thresholds[static_cast<std::size_t>(t)] = v;
    }
    return p;
}

std::vector<LabeledExample> load_labeled_examples(const std::filesystem::path& labels_path) {
    std::vector<LabeledExample> out;
    std::set<std::string> seen;
    for_each_jsonl(labels_path, [&](const Json& row, std::size_t line_no) {
        std::string ctx = labels_path.string() + ":" + std::to_string(line_no);
        LabeledExample ex;
        ex.sentence_id = require_string(row, "sentence_id", ctx);
        if (!seen.insert(ex.sentence_id).second)
            throw DataError(ctx + ": duplicate sentence_id '" + ex.sentence_id + "'");
        ex.gold = parse_gold(row, ctx);
        if (!row.contains("probs") || !row["probs"].is_array() ||
            row["probs"].size() != kNumTypes)
            throw DataError(ctx + ": field 'probs' must be an array of 24 numbers");
        for (std::size_t i = 0; i < kNumTypes; ++i)
            ex.vector[i] = row["probs"][i].get<double>();
        validate(ex.vector);
        out.push_back(std::move(ex));
    });
    if (out.empty())
        throw DataError(labels_path.string() + ": no labeled examples");
    return out;
}

std::vector<LabeledExample> load_labeled_examples(const std::filesystem::path& labels_path,
                                                  const std::filesystem::path& predictions_path) {
    std::unordered_map<std::string, TypeVector> probs;
    for (const auto& p : load_predictions(predictions_path))
        probs[p.sentence_id] = p.probs;
    std::vector<LabeledExample> out;
    std::set<std::string> seen;
    for_each_jsonl(labels_path, [&](const Json& row, std::size_t line_no) {
        std::string ctx = labels_path.string() + ":" + std::to_string(line_no);
        LabeledExample ex;
        ex.sentence_id = require_string(row, "sentence_id", ctx);
        if (!seen.insert(ex.sentence_id).second)
            throw DataError(ctx + ": duplicate sentence_id '" + ex.sentence_id + "'");
        ex.gold = parse_gold(row, ctx);
        auto it = probs.find(ex.sentence_id);
        if (it == probs.end())
            throw DataError(ctx + ": no prediction for sentence '" + ex.sentence_id + "'");
        ex.vector = it->second;
        out.push_back(std::move(ex));
    });
    if (out.empty())
        throw DataError(labels_path.string() + ": no labeled examples");
    return out;
}

} // namespace rvt
