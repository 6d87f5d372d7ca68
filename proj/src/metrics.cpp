#include "reviewtypes/metrics.hpp"

#include "reviewtypes/errors.hpp"
#include "reviewtypes/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace rvt {

namespace {

// Linear-interpolation percentile over a sorted vector, q in [0,1].
double percentile_sorted(const std::vector<double>& sorted, double q) {
    double rank = q * static_cast<double>(sorted.size() - 1);
    auto idx = static_cast<std::size_t>(rank);
    if (idx + 1 >= sorted.size())
        return sorted.back();
    double frac = rank - static_cast<double>(idx);
    return sorted[idx] * (1.0 - frac) + sorted[idx + 1] * frac;
}

double kappa_from_counts(long long n11, long long n10, long long n01, long long n00,
                         bool& defined) {
    double n = static_cast<double>(n11 + n10 + n01 + n00);
    double po = (static_cast<double>(n11) + static_cast<double>(n00)) / n;
    double pa = (static_cast<double>(n11) + static_cast<double>(n10)) / n;
    double pb = (static_cast<double>(n11) + static_cast<double>(n01)) / n;
    double pe = pa * pb + (1.0 - pa) * (1.0 - pb);
    if (pe == 1.0) {
        defined = false;
        return 0.0;
    }
    defined = true;
    return (po - pe) / (1.0 - pe);
}

} // namespace

double precision(const BinaryCounts& c) {
    long long denom = c.tp + c.fp;
    return denom > 0 ? static_cast<double>(c.tp) / static_cast<double>(denom) : 0.0;
}

double recall(const BinaryCounts& c) {
    long long denom = c.tp + c.fn;
    return denom > 0 ? static_cast<double>(c.tp) / static_cast<double>(denom) : 0.0;
}

double f1_from_pr(double p, double r) {
    return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

double f1(const BinaryCounts& c) {
    return f1_from_pr(precision(c), recall(c));
}

double macro_f1(const std::vector<double>& per_type_f1) {
    if (per_type_f1.empty())
        throw DataError("macro_f1 needs at least one value");
    return std::accumulate(per_type_f1.begin(), per_type_f1.end(), 0.0) /
           static_cast<double>(per_type_f1.size());
}

double accuracy(const std::vector<int>& pred, const std::vector<int>& gold) {
    if (pred.size() != gold.size() || pred.empty())
        throw DataError("accuracy needs equal-length non-empty inputs");
    long long hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        hits += pred[i] == gold[i];
    return static_cast<double>(hits) / static_cast<double>(pred.size());
}

double mse(const std::vector<double>& pred, const std::vector<double>& gold) {
    if (pred.size() != gold.size() || pred.empty())
        throw DataError("mse needs equal-length non-empty inputs");
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        double d = pred[i] - gold[i];
        sum += d * d;
    }
    return sum / static_cast<double>(pred.size());
}

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw DataError("pearson needs equal-length inputs with n >= 2");
    double n = static_cast<double>(xs.size());
    double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double dx = xs[i] - mx, dy = ys[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw DataError("pearson undefined: zero variance input");
    return sxy / std::sqrt(sxx * syy);
}

double ndcg_at_k(const std::vector<std::vector<RankedItem>>& groups, int k) {
    if (groups.empty() || k < 1)
        throw DataError("ndcg needs groups and k >= 1");
    double total = 0.0;
    for (const auto& group : groups) {
        if (group.empty())
            throw DataError("ndcg group is empty");
        for (const auto& item : group)
            if (item.gain < 0.0)
                throw DataError("ndcg gains must be non-negative");
        bool any_gain = std::any_of(group.begin(), group.end(),
                                    [](const RankedItem& it) { return it.gain > 0.0; });
        if (!any_gain) {
            total += 1.0;
            continue;
        }
        auto by_pred = group;
        std::stable_sort(by_pred.begin(), by_pred.end(),
                         [](const RankedItem& a, const RankedItem& b) {
                             return a.predicted > b.predicted;
                         });
        auto by_gain = group;
        std::stable_sort(by_gain.begin(), by_gain.end(),
                         [](const RankedItem& a, const RankedItem& b) { return a.gain > b.gain; });
        double dcg = 0.0, idcg = 0.0;
        auto top = std::min<std::size_t>(static_cast<std::size_t>(k), group.size());
        for (std::size_t r = 0; r < top; ++r) {
            double discount = std::log2(static_cast<double>(r) + 2.0);
            dcg += by_pred[r].gain / discount;
            idcg += by_gain[r].gain / discount;
        }
        total += dcg / idcg;
    }
    return total / static_cast<double>(groups.size());
}

double recall_at_precision(const std::vector<double>& scores, const std::vector<int>& labels,
                           double target_precision) {
    if (scores.size() != labels.size() || scores.empty())
        throw DataError("recall_at_precision needs equal-length non-empty inputs");
    long long positives = std::count(labels.begin(), labels.end(), 1);
    if (positives == 0)
        throw DataError("recall_at_precision needs at least one positive label");
    std::vector<double> thresholds = scores;
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    double best = 0.0;
    for (double th : thresholds) {
        long long tp = 0, fp = 0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            if (scores[i] >= th)
                (labels[i] == 1 ? tp : fp) += 1;
        }
        if (tp + fp == 0)
            continue;
        double p = static_cast<double>(tp) / static_cast<double>(tp + fp);
        double r = static_cast<double>(tp) / static_cast<double>(positives);
        if (p >= target_precision)
            best = std::max(best, r);
    }
    return best;
}

double cohen_kappa(const std::vector<std::set<InfoType>>& ann_a,
                   const std::vector<std::set<InfoType>>& ann_b,
                   std::vector<std::string>* skipped) {
    if (ann_a.size() != ann_b.size() || ann_a.empty())
        throw DataError("kappa needs equal-length non-empty annotations");
    double sum = 0.0;
    int defined_types = 0;
    for (InfoType t : all_types()) {
        long long n11 = 0, n10 = 0, n01 = 0, n00 = 0;
        for (std::size_t i = 0; i < ann_a.size(); ++i) {
            bool a = ann_a[i].count(t) > 0;
            bool b = ann_b[i].count(t) > 0;
            (a ? (b ? n11 : n10) : (b ? n01 : n00)) += 1;
        }
        bool defined = false;
        double k = kappa_from_counts(n11, n10, n01, n00, defined);
        if (!defined) {
            if (skipped)
                skipped->emplace_back(type_name(t));
            continue;
        }
        sum += k;
        ++defined_types;
    }
    if (defined_types == 0)
        throw DataError("kappa undefined for every type");
    return sum / defined_types;
}

double proportion_known_accuracy(double p) {
    return p * p + (1.0 - p) * (1.0 - p);
}

double simulate_proportion_known_accuracy(double p, int n_trials, std::uint64_t seed) {
    Rng rng(derive_seed(seed, "prop-known", 0));
    std::bernoulli_distribution truth(p), guess(p);
    long long hits = 0;
    for (int i = 0; i < n_trials; ++i)
        hits += truth(rng) == guess(rng);
    return static_cast<double>(hits) / n_trials;
}

double random_macro_f1(const std::vector<double>& prevalence) {
    if (prevalence.empty())
        throw DataError("random_macro_f1 needs prevalences");
    double sum = 0.0;
    for (double q : prevalence) {
        double pos = q / (q + 0.5);
        double neg = (1.0 - q) / ((1.0 - q) + 0.5);
        sum += 0.5 * (pos + neg);
    }
    return sum / static_cast<double>(prevalence.size());
}

double simulate_random_macro_f1(const std::vector<double>& prevalence, int n_per_type,
                                std::uint64_t seed, Execution exec) {
    auto n_types = static_cast<int>(prevalence.size());
    std::vector<double> per_type(n_types, 0.0);
    auto one_type = [&](int t) {
        Rng rng(derive_seed(seed, "rand-macro-f1", static_cast<std::uint64_t>(t)));
        std::bernoulli_distribution gold_dist(prevalence[t]), coin(0.5);
        BinaryCounts c;
        for (int i = 0; i < n_per_type; ++i) {
            bool gold = gold_dist(rng);
            bool pred = coin(rng);
            if (pred && gold)
                ++c.tp;
            else if (pred)
                ++c.fp;
            else if (gold)
                ++c.fn;
            else
                ++c.tn;
        }
        BinaryCounts neg{c.tn, c.fn, c.fp, c.tp}; // negative class as positive
        per_type[t] = 0.5 * (f1(c) + f1(neg));
    };
    if (exec == Execution::parallel) {
#pragma omp parallel for schedule(static)
        for (int t = 0; t < n_types; ++t)
            one_type(t);
    } else {
        for (int t = 0; t < n_types; ++t)
            one_type(t);
    }
    return std::accumulate(per_type.begin(), per_type.end(), 0.0) / n_types;
}

Interval bootstrap_ci(const std::function<double(const std::vector<double>&)>& metric_fn,
                      const std::vector<double>& samples, double alpha, int n_resamples,
                      std::uint64_t seed, Execution exec) {
    if (samples.empty())
        throw DataError("bootstrap needs samples");
    if (n_resamples < 1 || alpha <= 0.0 || alpha >= 0.5)
        throw ConfigError("bootstrap needs n_resamples >= 1 and alpha in (0, 0.5)");
    std::vector<double> stats(static_cast<std::size_t>(n_resamples), 0.0);
    auto n = samples.size();
    auto one_resample = [&](int i) {
        Rng rng(derive_seed(seed, "bootstrap", static_cast<std::uint64_t>(i)));
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        std::vector<double> resample(n);
        for (std::size_t j = 0; j < n; ++j)
            resample[j] = samples[pick(rng)];
        stats[static_cast<std::size_t>(i)] = metric_fn(resample);
    };
    if (exec == Execution::parallel) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n_resamples; ++i)
            one_resample(i);
    } else {
        for (int i = 0; i < n_resamples; ++i)
            one_resample(i);
    }
    std::sort(stats.begin(), stats.end());
    return {percentile_sorted(stats, alpha), percentile_sorted(stats, 1.0 - alpha)};
}

EvalReport evaluate_labels(const std::vector<std::set<InfoType>>& gold,
                           const std::vector<std::set<InfoType>>& pred) {
    if (gold.size() != pred.size() || gold.empty())
        throw DataError("evaluation needs equal-length non-empty gold/pred");
    EvalReport report;
    report.n_examples = gold.size();

    std::vector<double> fine_f1;
    for (InfoType t : all_types()) {
        BinaryCounts c;
        for (std::size_t i = 0; i < gold.size(); ++i) {
            bool g = gold[i].count(t) > 0;
            bool p = pred[i].count(t) > 0;
            if (p && g)
                ++c.tp;
            else if (p)
                ++c.fp;
            else if (g)
                ++c.fn;
            else
                ++c.tn;
        }
        auto& slot = report.per_type[static_cast<std::size_t>(t)];
        slot = {precision(c), recall(c), f1(c), c.tp + c.fn};
        fine_f1.push_back(slot.f1);
    }
    report.macro_f1 = macro_f1(fine_f1);

    std::vector<std::set<CoarseGroup>> gold_groups(gold.size()), pred_groups(pred.size());
    for (std::size_t i = 0; i < gold.size(); ++i) {
        gold_groups[i] = coarse_project_labels(gold[i]);
        pred_groups[i] = coarse_project_labels(pred[i]);
    }
    std::vector<double> coarse_f1;
    for (CoarseGroup g : all_groups()) {
        BinaryCounts c;
        for (std::size_t i = 0; i < gold.size(); ++i) {
            bool gg = gold_groups[i].count(g) > 0;
            bool pp = pred_groups[i].count(g) > 0;
            if (pp && gg)
                ++c.tp;
            else if (pp)
                ++c.fp;
            else if (gg)
                ++c.fn;
            else
                ++c.tn;
        }
        auto& slot = report.per_group[static_cast<std::size_t>(g)];
        slot = {precision(c), recall(c), f1(c), c.tp + c.fn};
        coarse_f1.push_back(slot.f1);
    }
    report.coarse_macro_f1 = macro_f1(coarse_f1);
    return report;
}

std::string format_report(const EvalReport& report) {
    std::ostringstream out;
    auto row = [&out](std::string_view name, const TypeScore& s) {
        out << "  ";
        out << name;
        for (std::size_t i = name.size(); i < 22; ++i)
            out << ' ';
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%6.1f %7.1f %10.1f %8lld", 100.0 * s.f1,
                      100.0 * s.recall, 100.0 * s.precision, s.support);
        out << buf << '\n';
    };
    out << "  type                      F1  Recall  Precision  support\n";
    for (InfoType t : all_types())
        row(type_name(t), report.per_type[static_cast<std::size_t>(t)]);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * report.macro_f1);
    out << "  macro-F1: " << buf << '\n';
    out << "  group                     F1  Recall  Precision  support\n";
    for (CoarseGroup g : all_groups())
        row(group_name(g), report.per_group[static_cast<std::size_t>(g)]);
    std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * report.coarse_macro_f1);
    out << "  coarse macro-F1: " << buf << '\n';
    return out.str();
}

Json report_to_json(const EvalReport& report) {
    Json types = Json::object();
    for (InfoType t : all_types()) {
        const auto& s = report.per_type[static_cast<std::size_t>(t)];
        types[std::string(type_name(t))] = {{"precision", s.precision},
                                            {"recall", s.recall},
                                            {"f1", s.f1},
                                            {"support", s.support}};
    }
    Json groups = Json::object();
    for (CoarseGroup g : all_groups()) {
        const auto& s = report.per_group[static_cast<std::size_t>(g)];
        groups[std::string(group_name(g))] = {{"precision", s.precision},
                                              {"recall", s.recall},
                                              {"f1", s.f1},
                                              {"support", s.support}};
    }
    return Json{{"n_examples", report.n_examples},
                {"macro_f1", report.macro_f1},
                {"coarse_macro_f1", report.coarse_macro_f1},
                {"types", std::move(types)},
                {"groups", std::move(groups)}};
}

} // namespace rvt
