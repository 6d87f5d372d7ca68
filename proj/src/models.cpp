#include "reviewtypes/models.hpp"

#include "reviewtypes/errors.hpp"
#include "reviewtypes/rng.hpp"
#include "reviewtypes/typology.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace rvt {

namespace {

void check_rows(const std::vector<FeatureRow>& rows) {
    if (rows.empty())
        throw DataError("training needs rows");
    std::size_t d = rows.front().features.size();
    if (d == 0)
        throw DataError("training needs at least one feature");
    for (const auto& r : rows)
        if (r.features.size() != d)
            throw DataError("inconsistent feature dimension at row '" + r.id + "'");
}

Standardization fit_standardization(const std::vector<FeatureRow>& rows) {
    std::size_t d = rows.front().features.size();
    Standardization s;
    s.mean.assign(d, 0.0);
    s.stdev.assign(d, 0.0);
    for (const auto& r : rows)
        for (std::size_t j = 0; j < d; ++j)
            s.mean[j] += r.features[j];
    for (std::size_t j = 0; j < d; ++j)
        s.mean[j] /= static_cast<double>(rows.size());
    for (const auto& r : rows)
        for (std::size_t j = 0; j < d; ++j) {
            double dx = r.features[j] - s.mean[j];
            s.stdev[j] += dx * dx;
        }
    for (std::size_t j = 0; j < d; ++j) {
        s.stdev[j] = std::sqrt(s.stdev[j] / static_cast<double>(rows.size()));
        if (s.stdev[j] == 0.0)
            s.stdev[j] = 1.0; // constant feature: leave it centered
    }
    return s;
}

std::vector<double> apply_standardization(const Standardization& s,
                                          const std::vector<double>& x) {
    std::vector<double> z(x.size());
    for (std::size_t j = 0; j < x.size(); ++j)
        z[j] = (x[j] - s.mean[j]) / s.stdev[j];
    return z;
}

// Solves A x = b in place by Gaussian elimination with partial pivoting.
std::vector<double> solve_linear(std::vector<std::vector<double>> a, std::vector<double> b) {
    std::size_t n = a.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col]))
                pivot = r;
        if (std::abs(a[pivot][col]) < 1e-12)
            throw DataError("normal equations are singular");
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (std::size_t r = col + 1; r < n; ++r) {
            double factor = a[r][col] / a[col][col];
            if (factor == 0.0)
                continue;
            for (std::size_t c = col; c < n; ++c)
                a[r][c] -= factor * a[col][c];
            b[r] -= factor * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t ri = n; ri-- > 0;) {
        double acc = b[ri];
        for (std::size_t c = ri + 1; c < n; ++c)
            acc -= a[ri][c] * x[c];
        x[ri] = acc / a[ri][ri];
    }
    return x;
}

} // namespace

double decision_value(const LinearModel& m, const std::vector<double>& features) {
    if (features.size() != m.weights.size())
        throw DataError("feature dimension does not match the model");
    const std::vector<double>* x = &features;
    std::vector<double> z;
    if (m.standardized) {
        z = apply_standardization(m.standardization, features);
        x = &z;
    }
    double acc = m.bias;
    for (std::size_t j = 0; j < x->size(); ++j)
        acc += m.weights[j] * (*x)[j];
    return acc;
}

int predict_class(const LinearModel& m, const std::vector<double>& features) {
    return decision_value(m, features) >= 0.0 ? 1 : 0;
}

double predict_value(const LinearModel& m, const std::vector<double>& features) {
    return decision_value(m, features);
}

LinearModel train_svm(const std::vector<FeatureRow>& rows, const SvmConfig& cfg) {
    check_rows(rows);
    if (cfg.lambda <= 0.0 || cfg.epochs < 1)
        throw ConfigError("svm needs lambda > 0 and epochs >= 1");
    bool has_pos = false, has_neg = false;
    for (const auto& r : rows)
        (r.target >= 0.5 ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg)
        throw DataError("svm training needs both classes");

    std::size_t d = rows.front().features.size();
    LinearModel model;
    model.standardized = true;
    model.standardization = fit_standardization(rows);
    std::vector<std::vector<double>> x(rows.size());
    std::vector<double> y(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        x[i] = apply_standardization(model.standardization, rows[i].features);
        y[i] = rows[i].target >= 0.5 ? 1.0 : -1.0;
    }

    std::vector<double> w(d, 0.0);
    double b = 0.0;
    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(cfg.seed, "svm-shuffle", 0));
    long long t = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t i : order) {
            ++t;
            double eta = 1.0 / (cfg.lambda * static_cast<double>(t));
            double margin = y[i] * (std::inner_product(w.begin(), w.end(), x[i].begin(), 0.0) + b);
            double shrink = 1.0 - eta * cfg.lambda;
            if (margin < 1.0) {
                for (std::size_t j = 0; j < d; ++j)
                    w[j] = shrink * w[j] + eta * y[i] * x[i][j];
                // Unregularized, but on the 1/t schedule: the 1/(lambda*t)
                // step would start at 1/lambda and offset the boundary.
                b += y[i] / static_cast<double>(t);
            } else {
                for (std::size_t j = 0; j < d; ++j)
                    w[j] = shrink * w[j];
            }
        }
    }
    model.weights = std::move(w);
    model.bias = b;
    return model;
}

LinearModel train_regression(const std::vector<FeatureRow>& rows, const RegressionConfig& cfg) {
    check_rows(rows);
    if (cfg.ridge_lambda < 0.0)
        throw ConfigError("ridge lambda must be >= 0");
    std::size_t d = rows.front().features.size();
    if (rows.size() < d + 1)
        throw DataError("regression needs n >= d+1 rows");

    // Normal equations over [features, 1]; ridge on the weight block only.
    std::size_t dim = d + 1;
    std::vector<std::vector<double>> a(dim, std::vector<double>(dim, 0.0));
    std::vector<double> b(dim, 0.0);
    for (const auto& r : rows) {
        std::vector<double> ext = r.features;
        ext.push_back(1.0);
        for (std::size_t i = 0; i < dim; ++i) {
            for (std::size_t j = 0; j < dim; ++j)
                a[i][j] += ext[i] * ext[j];
            b[i] += ext[i] * r.target;
        }
    }
    for (std::size_t j = 0; j < d; ++j)
        a[j][j] += cfg.ridge_lambda;

    std::vector<double> beta = solve_linear(std::move(a), std::move(b));
    LinearModel model;
    model.weights.assign(beta.begin(), beta.begin() + static_cast<std::ptrdiff_t>(d));
    model.bias = beta[d];
    return model;
}

CvReport cross_validate(const std::vector<FeatureRow>& rows, const Trainer& trainer,
                        const EvalMetric& metric, const CvConfig& cfg) {
    if (cfg.n_iterations < 1 || cfg.train_fraction <= 0.0 || cfg.train_fraction >= 1.0)
        throw ConfigError("cross-validation needs n >= 1 and train_fraction in (0,1)");
    check_rows(rows);
    if (rows.size() < 2)
        throw DataError("cross-validation needs at least 2 rows");
    {
        std::set<std::string> ids;
        for (const auto& r : rows)
            if (!ids.insert(r.id).second)
                throw DataError("duplicate row id '" + r.id + "'");
    }

    // Canonical order by id so splits depend on identities, not input order.
    std::vector<std::size_t> by_id(rows.size());
    std::iota(by_id.begin(), by_id.end(), 0);
    std::sort(by_id.begin(), by_id.end(),
              [&](std::size_t lhs, std::size_t rhs) { return rows[lhs].id < rows[rhs].id; });

    auto train_size = static_cast<std::size_t>(
        std::lround(cfg.train_fraction * static_cast<double>(rows.size())));
    train_size = std::clamp<std::size_t>(train_size, 1, rows.size() - 1);

    constexpr int kMaxRedraws = 10;
    std::vector<double> per_iteration(static_cast<std::size_t>(cfg.n_iterations), 0.0);
    std::vector<int> failed(static_cast<std::size_t>(cfg.n_iterations), 0);

    auto run_iteration = [&](int iter) {
        for (int attempt = 0; attempt <= kMaxRedraws; ++attempt) {
            std::vector<std::size_t> perm = by_id;
            Rng rng(derive_seed(cfg.seed, "cv-split",
                                static_cast<std::uint64_t>(iter) * (kMaxRedraws + 1) +
                                    static_cast<std::uint64_t>(attempt)));
            std::shuffle(perm.begin(), perm.end(), rng);
            std::vector<FeatureRow> train, test;
            train.reserve(train_size);
            test.reserve(rows.size() - train_size);
            for (std::size_t i = 0; i < perm.size(); ++i)
                (i < train_size ? train : test).push_back(rows[perm[i]]);
            if (cfg.classification) {
                bool has_pos = false, has_neg = false;
                for (const auto& r : train)
                    (r.target >= 0.5 ? has_pos : has_neg) = true;
                if (!has_pos || !has_neg)
                    continue; // redraw
            }
            LinearModel model = trainer(train);
            per_iteration[static_cast<std::size_t>(iter)] = metric(model, test);
            return;
        }
        failed[static_cast<std::size_t>(iter)] = 1;
    };

    if (cfg.exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int iter = 0; iter < cfg.n_iterations; ++iter)
            run_iteration(iter);
    } else {
        for (int iter = 0; iter < cfg.n_iterations; ++iter)
            run_iteration(iter);
    }
    if (std::any_of(failed.begin(), failed.end(), [](int f) { return f != 0; }))
        throw DataError("cross-validation could not draw a two-class train split in 10 redraws");

    CvReport report;
    report.per_iteration = per_iteration;
    report.mean = std::accumulate(per_iteration.begin(), per_iteration.end(), 0.0) /
                  static_cast<double>(per_iteration.size());
    report.ci = bootstrap_ci(
        [](const std::vector<double>& xs) {
            return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
        },
        per_iteration, 0.025, 1000, derive_seed(cfg.seed, "cv-ci", 0), cfg.exec);
    report.n_iterations = cfg.n_iterations;
    report.train_fraction = cfg.train_fraction;
    return report;
}

double accuracy_metric(const LinearModel& m, const std::vector<FeatureRow>& rows) {
    if (rows.empty())
        throw DataError("metric needs rows");
    long long hits = 0;
    for (const auto& r : rows)
        hits += predict_class(m, r.features) == (r.target >= 0.5 ? 1 : 0);
    return static_cast<double>(hits) / static_cast<double>(rows.size());
}

std::vector<std::size_t> subset_indices(const std::string& subset) {
    if (subset.empty())
        throw ConfigError("feature subset must not be empty");
    if (subset == "all") {
        std::vector<std::size_t> idx(kNumTypes);
        std::iota(idx.begin(), idx.end(), 0);
        return idx;
    }
    bool is_group = true;
    try {
        group_from_name(subset);
    } catch (const ConfigError&) {
        is_group = false;
    }
    if (is_group) {
        std::vector<std::size_t> idx;
        for (InfoType t : group_members(group_from_name(subset)))
            idx.push_back(static_cast<std::size_t>(t));
        return idx; // members are already in canonical order
    }
    std::set<std::size_t> picked;
    std::size_t start = 0;
    while (start <= subset.size()) {
        auto comma = subset.find(',', start);
        std::string name =
            subset.substr(start, comma == std::string::npos ? comma : comma - start);
        auto b = name.find_first_not_of(" \t");
        auto e = name.find_last_not_of(" \t");
        if (b == std::string::npos)
            throw ConfigError("empty type name in subset '" + subset + "'");
        name = name.substr(b, e - b + 1);
        picked.insert(static_cast<std::size_t>(type_from_name(name)));
        if (comma == std::string::npos)
            break;
        start = comma + 1;
    }
    return {picked.begin(), picked.end()};
}

std::vector<FeatureRow> select_features(const std::vector<FeatureRow>& rows,
                                        const std::string& subset) {
    check_rows(rows);
    auto idx = subset_indices(subset);
    if (rows.front().features.size() != kNumTypes)
        throw ConfigError("feature subsets apply to 24-dim rows");
    std::vector<FeatureRow> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        FeatureRow nr;
        nr.id = r.id;
        nr.target = r.target;
        nr.features.reserve(idx.size());
        for (std::size_t j : idx)
            nr.features.push_back(r.features[j]);
        out.push_back(std::move(nr));
    }
    return out;
}

Json model_to_json(const LinearModel& m) {
    Json j = {{"weights", m.weights}, {"bias", m.bias}, {"standardized", m.standardized}};
    if (m.standardized)
        j["standardization"] = {{"mean", m.standardization.mean},
                                {"stdev", m.standardization.stdev}};
    return j;
}

LinearModel model_from_json(const Json& j) {
    LinearModel m;
    if (!j.contains("weights") || !j["weights"].is_array() || !j.contains("bias"))
        throw ConfigError("model json needs 'weights' and 'bias'");
    m.weights = j["weights"].get<std::vector<double>>();
    m.bias = j["bias"].get<double>();
    m.standardized = j.value("standardized", false);
    if (m.standardized) {
        m.standardization.mean = j.at("standardization").at("mean").get<std::vector<double>>();
        m.standardization.stdev = j.at("standardization").at("stdev").get<std::vector<double>>();
        if (m.standardization.mean.size() != m.weights.size() ||
            m.standardization.stdev.size() != m.weights.size())
            throw ConfigError("model standardization dimensions do not match weights");
    }
    return m;
}

Json cv_report_to_json(const CvReport& r) {
    return Json{{"n_iterations", r.n_iterations},
                {"train_fraction", r.train_fraction},
                {"mean", r.mean},
                {"ci", {r.ci.lo, r.ci.hi}},
                {"per_iteration", r.per_iteration}};
}

} // namespace rvt
