#pragma once

#include "reviewtypes/exec.hpp"
#include "reviewtypes/jsonl.hpp"
#include "reviewtypes/typology.hpp"

#include <filesystem>
#include <set>
#include <string>
#include <vector>

namespace rvt {

// Per-type decision thresholds from the grid {0.1, 0.2, ..., 1.0}.
struct ThresholdProfile {
    std::array<double, kNumTypes> thresholds{};
    std::string provenance; // dev-set identifier
};

struct LabeledExample {
    std::string sentence_id;
    std::set<InfoType> gold; // non-empty
    TypeVector vector{};
};

// Per type, the grid threshold maximizing F1 of (prob >= theta) against gold
// membership; ties broken by the smallest theta. Types with zero gold
// positives default to 1.0 and are reported via `warnings`.
ThresholdProfile optimal_thresholds(const std::vector<LabeledExample>& dev,
                                    std::vector<std::string>* warnings = nullptr,
                                    Execution exec = Execution::serial);

struct YoudenResult {
    double threshold = 0.0;
    double j = 0.0; // TPR - FPR at the threshold
};

// Maximizes J over candidate thresholds: midpoints of adjacent distinct
// sorted scores plus the +/- infinity boundaries; prediction = score >=
// threshold; ties -> smallest. Requires both classes.
YoudenResult youden_threshold(const std::vector<double>& scores, const std::vector<int>& labels);

// {t : v[t] >= theta_t}.
std::set<InfoType> apply_thresholds(const TypeVector& v, const ThresholdProfile& p);

Json profile_to_json(const ThresholdProfile& p);
// Requires all 24 types present.
ThresholdProfile profile_from_json(const Json& j);

// Labeled file rows: {sentence_id, gold: [type names], probs: [24 floats]}.
std::vector<LabeledExample> load_labeled_examples(const std::filesystem::path& labels_path);

// Label-only rows {sentence_id, gold} joined against a predictions file by
// sentence_id; a label without a prediction is a DataError.
std::vector<LabeledExample> load_labeled_examples(const std::filesystem::path& labels_path,
                                                  const std::filesystem::path& predictions_path);

} // namespace rvt
