// Times the serial reference path against the OpenMP path for each numeric
// kernel and checks that both produce bitwise-identical results. On a
// single-core host the interesting column is the equality check, not the
// speedup.
#include "reviewtypes/calibrate.hpp"
#include "reviewtypes/metrics.hpp"
#include "reviewtypes/models.hpp"
#include "reviewtypes/rng.hpp"

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace {

using Clock = std::chrono::steady_clock;

template <typename F> double time_ms(F&& fn) {
    auto start = Clock::now();
    fn();
    auto stop = Clock::now();
    return std::chrono::duration<double, std::milli>(stop - start).count();
}

void report(const char* name, double serial_ms, double parallel_ms, bool equal) {
    std::printf("%-28s serial %9.2f ms   parallel %9.2f ms   speedup %5.2fx   %s\n", name,
                serial_ms, parallel_ms, serial_ms / parallel_ms,
                equal ? "results equal" : "RESULTS DIFFER");
}

} // namespace

int main() {
#if defined(_OPENMP)
    std::printf("openmp max threads: %d\n\n", omp_get_max_threads());
#else
    std::printf("built without openmp\n\n");
#endif
    bool all_equal = true;

    {
        std::mt19937_64 gen(11);
        std::normal_distribution<double> dist(0.0, 1.0);
        std::vector<double> samples(2000);
        for (auto& s : samples)
            s = dist(gen);
        auto mean_fn = [](const std::vector<double>& xs) {
            double sum = 0.0;
            for (double x : xs)
                sum += x;
            return sum / static_cast<double>(xs.size());
        };
        rvt::Interval a, b;
        double ts = time_ms([&] {
            a = rvt::bootstrap_ci(mean_fn, samples, 0.025, 4000, 3, rvt::Execution::serial);
        });
        double tp = time_ms([&] {
            b = rvt::bootstrap_ci(mean_fn, samples, 0.025, 4000, 3, rvt::Execution::parallel);
        });
        bool eq = a.lo == b.lo && a.hi == b.hi;
        all_equal = all_equal && eq;
        report("bootstrap_ci", ts, tp, eq);
    }

    {
        std::mt19937_64 gen(12);
        std::normal_distribution<double> noise(0.0, 0.8);
        std::vector<rvt::FeatureRow> rows;
        for (int i = 0; i < 400; ++i) {
            rvt::FeatureRow r;
            r.id = "row" + std::to_string(i);
            r.target = i % 2;
            for (int d = 0; d < 24; ++d)
                r.features.push_back((r.target > 0.5 ? 0.6 : 0.4) + noise(gen) * 0.1);
            rows.push_back(std::move(r));
        }
        auto trainer = [](const std::vector<rvt::FeatureRow>& train) {
            rvt::SvmConfig cfg;
            cfg.seed = 5;
            return rvt::train_svm(train, cfg);
        };
        rvt::CvConfig cs;
        cs.seed = 9;
        rvt::CvConfig cp = cs;
        cp.exec = rvt::Execution::parallel;
        rvt::CvReport a, b;
        double ts = time_ms([&] { a = rvt::cross_validate(rows, trainer, rvt::accuracy_metric, cs); });
        double tp = time_ms([&] { b = rvt::cross_validate(rows, trainer, rvt::accuracy_metric, cp); });
        bool eq = a.per_iteration == b.per_iteration && a.ci.lo == b.ci.lo && a.ci.hi == b.ci.hi;
        all_equal = all_equal && eq;
        report("cross_validate", ts, tp, eq);
    }

    {
        std::mt19937_64 gen(13);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::vector<rvt::LabeledExample> dev;
        for (int i = 0; i < 4000; ++i) {
            rvt::LabeledExample ex;
            ex.sentence_id = "s" + std::to_string(i);
            for (rvt::InfoType t : rvt::all_types()) {
                bool member = unit(gen) < 0.25;
                if (member)
                    ex.gold.insert(t);
                double p = member ? 0.35 + 0.65 * unit(gen) : 0.65 * unit(gen);
                ex.vector[static_cast<std::size_t>(t)] = p;
            }
            if (ex.gold.empty())
                ex.gold.insert(rvt::InfoType::opinion);
            dev.push_back(std::move(ex));
        }
        rvt::ThresholdProfile a, b;
        double ts = time_ms([&] { a = rvt::optimal_thresholds(dev, nullptr, rvt::Execution::serial); });
        double tp = time_ms([&] { b = rvt::optimal_thresholds(dev, nullptr, rvt::Execution::parallel); });
        bool eq = a.thresholds == b.thresholds;
        all_equal = all_equal && eq;
        report("optimal_thresholds", ts, tp, eq);
    }

    {
        std::vector<double> prevalence;
        for (int t = 0; t < 24; ++t)
            prevalence.push_back(0.02 + 0.03 * t);
        double a = 0, b = 0;
        double ts = time_ms(
            [&] { a = rvt::simulate_random_macro_f1(prevalence, 200000, 21, rvt::Execution::serial); });
        double tp = time_ms(
            [&] { b = rvt::simulate_random_macro_f1(prevalence, 200000, 21, rvt::Execution::parallel); });
        bool eq = a == b;
        all_equal = all_equal && eq;
        report("simulate_random_macro_f1", ts, tp, eq);
    }

    if (!all_equal) {
        std::printf("\nserial/parallel mismatch\n");
        return 1;
    }
    return 0;
}
