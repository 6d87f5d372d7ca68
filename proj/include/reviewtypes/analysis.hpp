#pragma once

#include "reviewtypes/typology.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rvt {

struct Profile {
    TypeVector vector{};
    std::size_t n_units = 0;
    std::string level; // "sentence-set" | "review-set" | "summary-set"
};

struct PositionalProfile {
    int length = 0;
    std::vector<TypeVector> positions; // one mean vector per position
    std::size_t n_documents = 0;
};

// A document whose sentences have been classified, in position order.
struct ClassifiedDoc {
    std::string doc_id;
    std::string category_id; // may be empty (summaries)
    std::vector<TypeVector> sentences;
};

// Per-type mean. Accumulates each type's values in sorted order, so any
// permutation of the input produces bitwise-identical output.
TypeVector aggregate_mean(const std::vector<TypeVector>& vectors);

// Two-stage mean: sentences -> document vector -> mean of document vectors.
// Documents without classified sentences are skipped and reported.
Profile corpus_profile(const std::vector<ClassifiedDoc>& docs, const std::string& level,
                       std::vector<std::string>* warnings = nullptr);

struct ProfileDelta {
    InfoType type;
    double delta; // b - a
};

struct ProfileComparison {
    std::vector<ProfileDelta> deltas; // sorted by |delta| descending
    std::optional<double> pearson_r;  // empty when either profile is constant
    std::string pearson_note;
};

ProfileComparison compare_profiles(const Profile& a, const Profile& b);

// Mean vector at each position over documents of exactly `length` sentences.
// No qualifying documents -> DataError listing the available lengths.
PositionalProfile positional_profile(const std::vector<ClassifiedDoc>& docs, int length);

// corpus_profile per category, key-sorted; categories that lose every
// document to the zero-sentence filter are omitted with a warning.
std::vector<std::pair<std::string, Profile>>
category_profiles(const std::vector<ClassifiedDoc>& docs,
                  std::vector<std::string>* warnings = nullptr);

// Types whose probability exceeds min_prob anywhere; the plot-emission filter.
std::vector<InfoType> types_above(const std::vector<TypeVector>& vectors, double min_prob);

} // namespace rvt
