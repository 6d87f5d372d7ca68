#include "reviewtypes/typology.hpp"

#include "reviewtypes/errors.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace rvt {

namespace {

const std::array<std::string_view, kNumTypes> kTypeNames = {
    "opinion",
    "opinion_with_reason",
    "improvement_desire",
    "comparative",
    "comparative_general",
    "buy_decision",
    "speculative",
    "personal_usage",
    "situation",
    "setup",
    "tip",
    "product_usage",
    "product_description",
    "price",
    "compatibility",
    "personal_info",
    "general_info",
    "comparative_seller",
    "seller_experience",
    "delivery_experience",
    "imagery",
    "sarcasm",
    "rhetorical",
    "inappropriate",
};

const std::array<std::string_view, kNumGroups> kGroupNames = {
    "subjective", "opinions", "objective", "description",
    "comparisons", "personal", "non_product", "stylistic",
};

const std::array<std::string_view, kNumTypes> kQuestions = {
    "does the sentence express an opinion about anything",
    "does the sentence express an opinion about anything and also provide reasoning for it",
    "does the sentence say how the product could be improved",
    "does the sentence compare to another product",
    "does the sentence describe something that compares the product generally to something that is "
    "not a product",
    "does the sentence explicitly talk about buying the product",
    "does the sentence speculate about something",
    "does the sentence describe how someone used the product",
    "does the sentence describe a condition under which the product is used",
    "does the sentence describe something about the setup or installation of the product",
    "does the sentence provide a tip on the product",
    "does the sentence describe how the product can be used",
    "does the sentence describe something objective about the product like its characteristics or "
    "its plot",
    "does the sentence explicitly talk about the price of the product",
    "does the sentence describe the compatibility of the product with another product",
    "does the sentence say something about someone",
    "does the sentence describe general information that is not necesarilly in regards to the "
    "product",
    "does the sentence compare between sellers of the product",
    "does the sentence describe something about the experience with the seller",
    "does the sentence describe the shipment of the product",
    "is the sentence written in a figurative style",
    "does the sentence contain a sarcastic expression",
    "is the sentence rhetorical or used as a filler or for transition without any real value",
    "does the sentence contain content that is toxic or unnecessarily racy",
};

std::vector<InfoType> make_members(std::initializer_list<InfoType> ts) {
    std::vector<InfoType> v(ts);
    std::sort(v.begin(), v.end());
    return v;
}

const std::array<std::vector<InfoType>, kNumGroups>& membership() {
    using T = InfoType;
    static const std::array<std::vector<InfoType>, kNumGroups> m = {
        make_members({T::opinion, T::opinion_with_reason, T::improvement_desire, T::buy_decision,
                      T::speculative, T::seller_experience, T::delivery_experience}),
        make_members({T::opinion, T::opinion_with_reason}),
        make_members({T::comparative, T::comparative_general, T::personal_usage, T::situation,
                      T::setup, T::tip, T::product_usage, T::product_description, T::price,
                      T::compatibility, T::general_info, T::comparative_seller}),
        make_members({T::setup, T::tip, T::product_usage, T::product_description, T::price,
                      T::compatibility}),
        make_members({T::comparative, T::comparative_general, T::comparative_seller}),
        make_members({T::personal_usage, T::personal_info}),
        make_members({T::personal_info, T::general_info, T::comparative_seller,
                      T::seller_experience, T::delivery_experience}),
        make_members({T::imagery, T::sarcasm, T::rhetorical, T::inappropriate}),
    };
    return m;
}

// Parses "key<TAB>value" lines; '#' lines and blanks skipped.
std::vector<std::pair<std::string, std::string>> read_tsv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open " + path.string());
    std::vector<std::pair<std::string, std::string>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line[0] == '#')
            continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size())
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": expected 'key<TAB>value'");
        rows.emplace_back(line.substr(0, tab), line.substr(tab + 1));
    }
    return rows;
}

} // namespace

const std::array<InfoType, kNumTypes>& all_types() {
    static const auto types = [] {
        std::array<InfoType, kNumTypes> a{};
        for (std::size_t i = 0; i < kNumTypes; ++i)
            a[i] = static_cast<InfoType>(i);
        return a;
    }();
    return types;
}

const std::array<CoarseGroup, kNumGroups>& all_groups() {
    static const auto groups = [] {
        std::array<CoarseGroup, kNumGroups> a{};
        for (std::size_t i = 0; i < kNumGroups; ++i)
            a[i] = static_cast<CoarseGroup>(i);
        return a;
    }();
    return groups;
}

std::string_view type_name(InfoType t) {
    return kTypeNames[static_cast<std::size_t>(t)];
}

std::string_view group_name(CoarseGroup g) {
    return kGroupNames[static_cast<std::size_t>(g)];
}

InfoType type_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kNumTypes; ++i)
        if (kTypeNames[i] == name)
            return static_cast<InfoType>(i);
    throw ConfigError("unknown type name '" + std::string(name) + "'");
}

CoarseGroup group_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kNumGroups; ++i)
        if (kGroupNames[i] == name)
            return static_cast<CoarseGroup>(i);
    throw ConfigError("unknown group name '" + std::string(name) + "'");
}

const std::vector<InfoType>& group_members(CoarseGroup g) {
    return membership()[static_cast<std::size_t>(g)];
}

void validate(const TypeVector& v) {
    for (std::size_t i = 0; i < kNumTypes; ++i)
        if (!(v[i] >= 0.0 && v[i] <= 1.0))
            throw DataError("probability for " + std::string(kTypeNames[i]) + " outside [0,1]");
}

GroupVector coarse_project(const TypeVector& v) {
    GroupVector out{};
    for (std::size_t g = 0; g < kNumGroups; ++g) {
        double best = 0.0;
        for (InfoType t : membership()[g])
            best = std::max(best, v[static_cast<std::size_t>(t)]);
        out[g] = best;
    }
    return out;
}

std::set<CoarseGroup> coarse_project_labels(const std::set<InfoType>& labels) {
    std::set<CoarseGroup> out;
    for (std::size_t g = 0; g < kNumGroups; ++g)
        for (InfoType t : membership()[g])
            if (labels.count(t)) {
                out.insert(static_cast<CoarseGroup>(g));
                break;
            }
    return out;
}

const Typology& Typology::builtin() {
    static const Typology t = [] {
        Typology ty;
        for (std::size_t i = 0; i < kNumTypes; ++i)
            ty.questions_[i] = std::string(kQuestions[i]);
        return ty;
    }();
    return t;
}

Typology Typology::from_file(const std::filesystem::path& path) {
    Typology ty;
    std::array<bool, kNumTypes> seen{};
    for (auto& [key, value] : read_tsv(path)) {
        InfoType t = type_from_name(key);
        auto idx = static_cast<std::size_t>(t);
        if (seen[idx])
            throw ConfigError(path.string() + ": duplicate type '" + key + "'");
        if (value.empty())
            throw ConfigError(path.string() + ": empty question for '" + key + "'");
        seen[idx] = true;
        ty.questions_[idx] = value;
    }
    for (std::size_t i = 0; i < kNumTypes; ++i)
        if (!seen[i])
            throw ConfigError(path.string() + ": missing type '" + std::string(kTypeNames[i]) +
                              "'");
    return ty;
}

std::string CategoryCatalog::canonical_key(std::string_view category_id) {
    std::string out;
    bool pending_sep = false;
    for (unsigned char c : category_id) {
        if (std::isalnum(c)) {
            if (pending_sep && !out.empty())
                out += '_';
            pending_sep = false;
            out += static_cast<char>(std::tolower(c));
        } else {
            pending_sep = true;
        }
    }
    return out;
}

const CategoryCatalog& CategoryCatalog::builtin() {
    static const CategoryCatalog c = [] {
        CategoryCatalog cat;
        cat.entries_ = {
            {"automotive", "an automotive product"},
            {"baby", "a baby product"},
            {"books", "a book"},
            {"camera", "a camera product"},
            {"cds_and_vinyl", "a music album"},
            {"digital_music", "a music album"},
            {"electronics", "an electronics product"},
            {"fashion", "a fashion item"},
            {"headphones", "a pair of headphones"},
            {"home", "a home product"},
            {"kitchen", "a kitchen product"},
            {"movies", "a movie or TV show"},
            {"movies_and_tv", "a movie or TV show"},
            {"music", "a music album"},
            {"musical_instruments", "a musical instrument"},
            {"pet_supplies", "a pet product"},
            {"product", "a product"},
            {"sports_and_outdoors", "a sports or outdoors product"},
            {"tools_and_home_improvement", "a tool or home improvement product"},
            {"toys", "a toy or game"},
            {"toys_and_games", "a toy or game"},
        };
        return cat;
    }();
    return c;
}

CategoryCatalog CategoryCatalog::from_file(const std::filesystem::path& path) {
    CategoryCatalog cat = builtin();
    for (auto& [key, value] : read_tsv(path)) {
        std::string k = canonical_key(key);
        if (k.empty() || value.empty())
            throw ConfigError(path.string() + ": empty category key or subprompt");
        auto it = std::find_if(cat.entries_.begin(), cat.entries_.end(),
                               [&](const auto& e) { return e.first == k; });
        if (it != cat.entries_.end())
            it->second = value;
        else
            cat.entries_.emplace_back(k, value);
    }
    std::sort(cat.entries_.begin(), cat.entries_.end());
    return cat;
}

bool CategoryCatalog::has(std::string_view category_id) const {
    std::string k = canonical_key(category_id);
    return std::any_of(entries_.begin(), entries_.end(),
                       [&](const auto& e) { return e.first == k; });
}

const std::string& CategoryCatalog::subprompt_for(std::string_view category_id) const {
    std::string k = canonical_key(category_id);
    for (const auto& e : entries_)
        if (e.first == k)
            return e.second;
    throw ConfigError("unknown category '" + std::string(category_id) + "'");
}

std::vector<std::string> CategoryCatalog::known_keys() const {
    std::vector<std::string> keys;
    keys.reserve(entries_.size());
    for (const auto& e : entries_)
        keys.push_back(e.first);
    return keys;
}

} // namespace rvt
