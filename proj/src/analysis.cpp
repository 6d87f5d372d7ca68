#include "reviewtypes/analysis.hpp"

#include "reviewtypes/errors.hpp"
#include "reviewtypes/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace rvt {

TypeVector aggregate_mean(const std::vector<TypeVector>& vectors) {
    if (vectors.empty())
        throw DataError("cannot average an empty vector list");
    TypeVector out{};
    std::vector<double> column(vectors.size());
    for (std::size_t t = 0; t < kNumTypes; ++t) {
        for (std::size_t i = 0; i < vectors.size(); ++i)
            column[i] = vectors[i][t];
        std::sort(column.begin(), column.end());
        double sum = 0.0;
        for (double v : column)
            sum += v;
        out[t] = sum / static_cast<double>(vectors.size());
    }
    return out;
}

Profile corpus_profile(const std::vector<ClassifiedDoc>& docs, const std::string& level,
                       std::vector<std::string>* warnings) {
    std::vector<TypeVector> doc_vectors;
    for (const auto& doc : docs) {
        if (doc.sentences.empty()) {
            if (warnings)
                warnings->push_back("document '" + doc.doc_id +
                                    "' has no classified sentences; skipped");
            continue;
        }
        doc_vectors.push_back(aggregate_mean(doc.sentences));
    }
    if (doc_vectors.empty())
        throw DataError("no documents with classified sentences");
    Profile p;
    p.vector = aggregate_mean(doc_vectors);
    p.n_units = doc_vectors.size();
    p.level = level;
    return p;
}

ProfileComparison compare_profiles(const Profile& a, const Profile& b) {
    ProfileComparison cmp;
    for (InfoType t : all_types())
        cmp.deltas.push_back(
            {t, b.vector[static_cast<std::size_t>(t)] - a.vector[static_cast<std::size_t>(t)]});
    std::stable_sort(cmp.deltas.begin(), cmp.deltas.end(),
                     [](const ProfileDelta& lhs, const ProfileDelta& rhs) {
                         return std::abs(lhs.delta) > std::abs(rhs.delta);
                     });
    try {
        std::vector<double> xs(a.vector.begin(), a.vector.end());
        std::vector<double> ys(b.vector.begin(), b.vector.end());
        cmp.pearson_r = pearson(xs, ys);
    } catch (const DataError& e) {
        cmp.pearson_note = e.what();
    }
    return cmp;
}

PositionalProfile positional_profile(const std::vector<ClassifiedDoc>& docs, int length) {
    if (length < 1)
        throw ConfigError("positional profile needs length >= 1");
    std::vector<const ClassifiedDoc*> selected;
    std::map<std::size_t, std::size_t> histogram;
    for (const auto& doc : docs) {
        ++histogram[doc.sentences.size()];
        if (doc.sentences.size() == static_cast<std::size_t>(length))
            selected.push_back(&doc);
    }
    if (selected.empty()) {
        std::string msg = "no documents with exactly " + std::to_string(length) +
                          " sentences; available lengths:";
        for (const auto& [len, count] : histogram)
            msg += " " + std::to_string(len) + "->" + std::to_string(count);
        throw DataError(msg);
    }
    PositionalProfile pp;
    pp.length = length;
    pp.n_documents = selected.size();
    pp.positions.resize(static_cast<std::size_t>(length));
    std::vector<TypeVector> column(selected.size());
    for (int pos = 0; pos < length; ++pos) {
        for (std::size_t i = 0; i < selected.size(); ++i)
            column[i] = selected[i]->sentences[static_cast<std::size_t>(pos)];
        pp.positions[static_cast<std::size_t>(pos)] = aggregate_mean(column);
    }
    return pp;
}

std::vector<std::pair<std::string, Profile>>
category_profiles(const std::vector<ClassifiedDoc>& docs, std::vector<std::string>* warnings) {
    std::map<std::string, std::vector<ClassifiedDoc>> by_category;
    for (const auto& doc : docs)
        by_category[doc.category_id].push_back(doc);
    std::vector<std::pair<std::string, Profile>> out;
    for (const auto& [category, group] : by_category) {
        try {
            out.emplace_back(category, corpus_profile(group, "review-set", warnings));
        } catch (const DataError&) {
            if (warnings)
                warnings->push_back("category '" + category +
                                    "' has no classified documents; omitted");
        }
    }
    return out;
}

std::vector<InfoType> types_above(const std::vector<TypeVector>& vectors, double min_prob) {
    std::vector<InfoType> out;
    for (InfoType t : all_types()) {
        auto idx = static_cast<std::size_t>(t);
        bool any = std::any_of(vectors.begin(), vectors.end(),
                               [&](const TypeVector& v) { return v[idx] > min_prob; });
        if (any)
            out.push_back(t);
    }
    return out;
}

} // namespace rvt
