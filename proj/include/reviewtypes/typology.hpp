#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace rvt {

// The 24 sentence information types, in canonical order. All TypeVector
// indexing, serialization, and feature layouts follow this order.
enum class InfoType : int {
    opinion = 0,
    opinion_with_reason,
    improvement_desire,
    comparative,
    comparative_general,
    buy_decision,
    speculative,
    personal_usage,
    situation,
    setup,
    tip,
    product_usage,
    product_description,
    price,
    compatibility,
    personal_info,
    general_info,
    comparative_seller,
    seller_experience,
    delivery_experience,
    imagery,
    sarcasm,
    rhetorical,
    inappropriate,
};

inline constexpr std::size_t kNumTypes = 24;

// The 8 overlapping coarse groups.
enum class CoarseGroup : int {
    subjective = 0,
    opinions,
    objective,
    description,
    comparisons,
    personal,
    non_product,
    stylistic,
};

inline constexpr std::size_t kNumGroups = 8;

// Per-sentence probabilities, one per InfoType. Entries are independent;
// they do not sum to 1.
using TypeVector = std::array<double, kNumTypes>;
using GroupVector = std::array<double, kNumGroups>;

const std::array<InfoType, kNumTypes>& all_types();
const std::array<CoarseGroup, kNumGroups>& all_groups();

std::string_view type_name(InfoType t);
std::string_view group_name(CoarseGroup g);

// Throws ConfigError on an unknown name.
InfoType type_from_name(std::string_view name);
CoarseGroup group_from_name(std::string_view name);

// Members in canonical type order.
const std::vector<InfoType>& group_members(CoarseGroup g);

// Throws DataError if any entry is outside [0,1].
void validate(const TypeVector& v);

// Group value = max over member probabilities.
GroupVector coarse_project(const TypeVector& v);

// Group present iff any member type present.
std::set<CoarseGroup> coarse_project_labels(const std::set<InfoType>& labels);

// Prompt question registry. Immutable after construction.
class Typology {
public:
    // The built-in question set.
    static const Typology& builtin();

    // TSV override: one "type_id<TAB>question" line per type, all 24 required.
    static Typology from_file(const std::filesystem::path& path);

    const std::string& question_for(InfoType t) const { return questions_[static_cast<int>(t)]; }

private:
    std::array<std::string, kNumTypes> questions_;
};

// Category subprompts: the fragment slotted after "about" in the prompt.
class CategoryCatalog {
public:
    static const CategoryCatalog& builtin();

    // TSV override/extension: "category_id<TAB>subprompt" lines.
    static CategoryCatalog from_file(const std::filesystem::path& path);

    // Lowercases and maps non-alphanumeric runs to '_': "Toys and Games" -> "toys_and_games".
    static std::string canonical_key(std::string_view category_id);

    bool has(std::string_view category_id) const;

    // Throws ConfigError on unknown category.
    const std::string& subprompt_for(std::string_view category_id) const;

    std::vector<std::string> known_keys() const;

private:
    std::vector<std::pair<std::string, std::string>> entries_; // sorted by key
};

} // namespace rvt
