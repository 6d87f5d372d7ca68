#pragma once

#include "reviewtypes/exec.hpp"
#include "reviewtypes/jsonl.hpp"
#include "reviewtypes/metrics.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace rvt {

struct FeatureRow {
    std::string id; // unique; splits key off ids, not positions
    std::vector<double> features;
    double target = 0.0; // 0/1 for classification, real score for regression
};

struct Standardization {
    std::vector<double> mean;
    std::vector<double> stdev; // zero-variance features stored as 1
};

struct LinearModel {
    std::vector<double> weights;
    double bias = 0.0;
    bool standardized = false; // z-scoring fitted on train rows only
    Standardization standardization;
};

double decision_value(const LinearModel& m, const std::vector<double>& features);
int predict_class(const LinearModel& m, const std::vector<double>& features); // 0/1
double predict_value(const LinearModel& m, const std::vector<double>& features);

struct SvmConfig {
    double lambda = 0.01;
    int epochs = 200;
    std::uint64_t seed = 0;
};

// Hinge-loss subgradient descent with step 1/(lambda*t) over z-scored
// features; no class weighting. Requires both classes.
LinearModel train_svm(const std::vector<FeatureRow>& rows, const SvmConfig& cfg);

struct RegressionConfig {
    double ridge_lambda = 1e-6; // on weights, not bias
};

// Least squares via normal equations; the ridge term keeps degenerate
// feature sets solvable. Requires n >= d+1.
LinearModel train_regression(const std::vector<FeatureRow>& rows, const RegressionConfig& cfg);

struct CvConfig {
    int n_iterations = 50;
    double train_fraction = 0.7;
    std::uint64_t seed = 0;
    bool classification = true; // redraw splits whose train side is single-class
    Execution exec = Execution::serial;
};

struct CvReport {
    std::vector<double> per_iteration;
    double mean = 0.0;
    Interval ci; // bootstrap percentile CI over iteration values
    int n_iterations = 0;
    double train_fraction = 0.0;
};

using Trainer = std::function<LinearModel(const std::vector<FeatureRow>&)>;
using EvalMetric = std::function<double(const LinearModel&, const std::vector<FeatureRow>&)>;

// n independent splits drawn from row ids (sorted then shuffled), so row
// order never affects results. Single-class train splits are redrawn up to
// 10 times, then error.
CvReport cross_validate(const std::vector<FeatureRow>& rows, const Trainer& trainer,
                        const EvalMetric& metric, const CvConfig& cfg);

// Held-out accuracy of predict_class against 0/1 targets.
double accuracy_metric(const LinearModel& m, const std::vector<FeatureRow>& rows);

// Resolves "all", a coarse group name, or a comma-separated list of type
// names into canonical-order feature indices (for 24-dim rows).
std::vector<std::size_t> subset_indices(const std::string& subset);
std::vector<FeatureRow> select_features(const std::vector<FeatureRow>& rows,
                                        const std::string& subset);

Json model_to_json(const LinearModel& m);
LinearModel model_from_json(const Json& j);
Json cv_report_to_json(const CvReport& r);

} // namespace rvt
