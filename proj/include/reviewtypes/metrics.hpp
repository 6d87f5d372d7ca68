#pragma once

#include "reviewtypes/exec.hpp"
#include "reviewtypes/jsonl.hpp"
#include "reviewtypes/typology.hpp"

#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

namespace rvt {

struct BinaryCounts {
    long long tp = 0, fp = 0, fn = 0, tn = 0;
};

// Zero-denominator convention throughout: P, R, F1 are 0 when undefined.
double precision(const BinaryCounts& c);
double recall(const BinaryCounts& c);
double f1(const BinaryCounts& c);
double f1_from_pr(double p, double r);

// Unweighted mean.
double macro_f1(const std::vector<double>& per_type_f1);

double accuracy(const std::vector<int>& pred, const std::vector<int>& gold);
double mse(const std::vector<double>& pred, const std::vector<double>& gold);

// Throws DataError when either input has zero variance.
double pearson(const std::vector<double>& xs, const std::vector<double>& ys);

struct RankedItem {
    double predicted = 0.0;
    double gain = 0.0; // >= 0
};

// Mean over groups of DCG@k / IDCG@k with gain/log2(rank+1) discounting.
// Groups whose gains are all zero contribute 1.0.
double ndcg_at_k(const std::vector<std::vector<RankedItem>>& groups, int k);

// Max recall over operating points (threshold = each distinct score,
// prediction = score >= threshold) whose precision meets the target; 0 if
// none qualifies. Requires at least one positive label.
double recall_at_precision(const std::vector<double>& scores, const std::vector<int>& labels,
                           double target_precision);

// Multi-label agreement: per-type binary kappa, averaged over types whose
// expected agreement is not 1. Skipped type names reported via `skipped`.
double cohen_kappa(const std::vector<std::set<InfoType>>& ann_a,
                   const std::vector<std::set<InfoType>>& ann_b,
                   std::vector<std::string>* skipped = nullptr);

// Closed-form baselines for a guesser matching the class distribution /
// flipping a fair coin.
double proportion_known_accuracy(double p);
double simulate_proportion_known_accuracy(double p, int n_trials, std::uint64_t seed);

// Coin-flip macro-F1 over types with gold prevalences q: per type, mean of
// the positive-class F1 q/(q+0.5) and the negative-class F1 (1-q)/((1-q)+0.5).
double random_macro_f1(const std::vector<double>& prevalence);
double simulate_random_macro_f1(const std::vector<double>& prevalence, int n_per_type,
                                std::uint64_t seed, Execution exec = Execution::serial);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

// Percentile bootstrap over resamples drawn with replacement. Seeded per
// resample, so serial and parallel execution agree bitwise.
Interval bootstrap_ci(const std::function<double(const std::vector<double>&)>& metric_fn,
                      const std::vector<double>& samples, double alpha = 0.025,
                      int n_resamples = 1000, std::uint64_t seed = 0,
                      Execution exec = Execution::serial);

struct TypeScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    long long support = 0; // gold positives
};

struct EvalReport {
    std::array<TypeScore, kNumTypes> per_type{};
    double macro_f1 = 0.0;
    std::array<TypeScore, kNumGroups> per_group{};
    double coarse_macro_f1 = 0.0;
    std::size_t n_examples = 0;
};

// Per-type scores from gold/predicted label sets; coarse scores from the
// group projection of the same sets.
EvalReport evaluate_labels(const std::vector<std::set<InfoType>>& gold,
                           const std::vector<std::set<InfoType>>& pred);

// Aligned-column text: type, F1, recall, precision, support.
std::string format_report(const EvalReport& report);
Json report_to_json(const EvalReport& report);

} // namespace rvt
