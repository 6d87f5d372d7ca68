#include "reviewtypes/ingest.hpp"

#include "reviewtypes/errors.hpp"
#include "reviewtypes/jsonl.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <set>
#include <string_view>

namespace rvt {

namespace {

const std::set<std::string, std::less<>>& abbreviations() {
    static const std::set<std::string, std::less<>> abbrev = {
        "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st",
        "etc", "vs", "eg", "ie", "approx", "dept", "inc",
    };
    return abbrev;
}

bool is_terminal(char c) {
    return c == '.' || c == '!' || c == '?';
}

// True if the bytes at i start an uppercase letter, digit, or opening quote.
bool starts_new_sentence(const std::string& s, std::size_t i) {
    unsigned char c = s[i];
    if (std::isupper(c) || std::isdigit(c))
        return true;
    if (c == '"' || c == '\'')
        return true;
    // U+201C and U+2018
    if (i + 2 < s.size() && c == 0xe2 && static_cast<unsigned char>(s[i + 1]) == 0x80) {
        unsigned char b = s[i + 2];
        return b == 0x9c || b == 0x98;
    }
    return false;
}

// Token ending at punct_start, dots stripped, lowercased.
std::string trailing_token(const std::string& s, std::size_t punct_start) {
    std::size_t begin = punct_start;
    while (begin > 0 && !std::isspace(static_cast<unsigned char>(s[begin - 1])))
        --begin;
    std::string tok;
    for (std::size_t i = begin; i < punct_start; ++i) {
        unsigned char c = s[i];
        if (c == '.')
            continue;
        tok += static_cast<char>(std::tolower(c));
    }
    return tok;
}

int count_word_tokens(const std::string& s) {
    int count = 0;
    bool in_word = false;
    for (unsigned char c : s) {
        if (std::isspace(c)) {
            in_word = false;
            continue;
        }
        if (!in_word && std::isalnum(c))
            ++count;
        if (std::isalnum(c))
            in_word = true;
    }
    return count;
}

} // namespace

std::string normalize_text(const std::string& text) {
    static const std::array<std::pair<std::string_view, char>, 5> entities = {{
        {"&amp;", '&'},
        {"&lt;", '<'},
        {"&gt;", '>'},
        {"&quot;", '"'},
        {"&apos;", '\''},
    }};
    std::string decoded;
    decoded.reserve(text.size());
    for (std::size_t i = 0; i < text.size();) {
        if (text[i] == '&') {
            bool matched = false;
            for (const auto& [ent, ch] : entities) {
                if (text.compare(i, ent.size(), ent) == 0) {
                    decoded += ch;
                    i += ent.size();
                    matched = true;
                    break;
                }
            }
            if (matched)
                continue;
        }
        decoded += text[i++];
    }
    std::string out;
    out.reserve(decoded.size());
    bool pending_space = false;
    for (unsigned char c : decoded) {
        if (std::isspace(c)) {
            pending_space = true;
            continue;
        }
        if (pending_space && !out.empty())
            out += ' ';
        pending_space = false;
        out += static_cast<char>(c);
    }
    return out;
}

std::vector<std::string> split_sentences(const std::string& text) {
    std::string norm = normalize_text(text);
    if (norm.empty())
        return {};

    std::vector<std::string> segments;
    std::size_t start = 0;
    std::size_t i = 0;
    while (i < norm.size()) {
        if (!is_terminal(norm[i])) {
            ++i;
            continue;
        }
        std::size_t punct_start = i;
        while (i < norm.size() && is_terminal(norm[i]))
            ++i;
        // Split after the punctuation run when whitespace then a sentence
        // opener follows; '.'-only runs defer to the abbreviation list.
        if (i >= norm.size() || norm[i] != ' ')
            continue;
        if (i + 1 >= norm.size() || !starts_new_sentence(norm, i + 1))
            continue;
        bool dots_only = true;
        for (std::size_t p = punct_start; p < i; ++p)
            if (norm[p] != '.')
                dots_only = false;
        if (dots_only && abbreviations().count(trailing_token(norm, punct_start)))
            continue;
        segments.push_back(norm.substr(start, i - start));
        start = i + 1;
    }
    if (start < norm.size())
        segments.push_back(norm.substr(start));

    std::vector<std::string> merged;
    for (auto& seg : segments) {
        while (!seg.empty() && seg.back() == ' ')
            seg.pop_back();
        if (seg.empty())
            continue;
        if (!merged.empty() && count_word_tokens(seg) < 2)
            merged.back() += " " + seg;
        else
            merged.push_back(std::move(seg));
    }
    return merged;
}

std::vector<Sentence> split_into_sentences(const std::string& doc_id, const std::string& text) {
    std::vector<Sentence> out;
    int pos = 0;
    for (auto& s : split_sentences(text)) {
        Sentence sent;
        sent.doc_id = doc_id;
        sent.position = pos;
        sent.sentence_id = doc_id + "#" + std::to_string(pos);
        sent.text = std::move(s);
        out.push_back(std::move(sent));
        ++pos;
    }
    return out;
}

std::vector<Sentence> summary_sentences(const SummaryDoc& doc) {
    std::vector<Sentence> out;
    int pos = 0;
    for (const auto* section : {&doc.verdict, &doc.pros, &doc.cons}) {
        for (const auto& raw : *section) {
            std::string norm = normalize_text(raw);
            if (norm.empty())
                continue;
            Sentence sent;
            sent.doc_id = doc.product_id;
            sent.position = pos;
            sent.sentence_id = doc.product_id + "#" + std::to_string(pos);
            sent.text = std::move(norm);
            out.push_back(std::move(sent));
            ++pos;
        }
    }
    return out;
}

HelpfulLabel derive_review_helpfulness(const Review& r) {
    if (!r.helpful_votes || !r.unhelpful_votes)
        return HelpfulLabel::excluded;
    long long up = *r.helpful_votes, down = *r.unhelpful_votes;
    if (up >= 9 && down == 0)
        return HelpfulLabel::helpful;
    if (down >= 3 && up == 0)
        return HelpfulLabel::unhelpful;
    return HelpfulLabel::excluded;
}

Sentiment derive_sentiment(const Review& r) {
    if (!r.rating)
        throw DataError("review '" + r.review_id + "' has no rating");
    return *r.rating >= 4 ? Sentiment::positive : Sentiment::negative;
}

TertileLabel derive_tertile_label(double score, double lo, double hi) {
    if (score >= hi)
        return TertileLabel::helpful;
    if (score <= lo)
        return TertileLabel::unhelpful;
    return TertileLabel::neutral;
}

std::pair<double, double> compute_tertile_borders(std::vector<double> scores) {
    if (scores.size() < 3)
        throw DataError("tertile borders need at least 3 scores");
    std::sort(scores.begin(), scores.end());
    auto n = scores.size();
    std::size_t rank_lo = (n + 2) / 3;      // ceil(n/3)
    std::size_t rank_hi = (2 * n + 2) / 3;  // ceil(2n/3)
    return {scores[rank_lo - 1], scores[rank_hi - 1]};
}

std::vector<Review> load_reviews(const std::filesystem::path& path) {
    std::vector<Review> reviews;
    std::set<std::string> seen;
    for_each_jsonl(path, [&](const Json& row, std::size_t line_no) {
        std::string ctx = path.string() + ":" + std::to_string(line_no);
        Review r;
        r.review_id = require_string(row, "review_id", ctx);
        r.product_id = require_string(row, "product_id", ctx);
        r.category_id = require_string(row, "category_id", ctx);
        r.text = require_string(row, "text", ctx);
        if (!seen.insert(r.review_id).second)
            throw DataError(ctx + ": duplicate review_id '" + r.review_id + "'");
        if (row.contains("rating") && !row["rating"].is_null()) {
            if (!row["rating"].is_number_integer())
                throw DataError(ctx + ": rating must be an integer");
            int rating = row["rating"].get<int>();
            if (rating < 1 || rating > 5)
                throw DataError(ctx + ": rating " + std::to_string(rating) + " outside 1..5");
            r.rating = rating;
        }
        for (const char* key : {"helpful_votes", "unhelpful_votes"}) {
            if (!row.contains(key) || row[key].is_null())
                continue;
            if (!row[key].is_number_integer() || row[key].get<long long>() < 0)
                throw DataError(ctx + ": " + key + " must be a non-negative integer");
            (std::string_view(key) == "helpful_votes" ? r.helpful_votes : r.unhelpful_votes) =
                row[key].get<long long>();
        }
        reviews.push_back(std::move(r));
    });
    if (reviews.empty())
        throw DataError(path.string() + ": no reviews");
    return reviews;
}

std::vector<SummaryDoc> load_summaries(const std::filesystem::path& path) {
    std::vector<SummaryDoc> docs;
    auto read_section = [](const Json& row, const char* key, const std::string& ctx) {
        std::vector<std::string> out;
        if (!row.contains(key))
            return out;
        if (!row[key].is_array())
            throw DataError(ctx + ": field '" + std::string(key) + "' must be an array");
        for (const auto& item : row[key]) {
            if (!item.is_string())
                throw DataError(ctx + ": '" + std::string(key) + "' entries must be strings");
            out.push_back(item.get<std::string>());
        }
        return out;
    };
    for_each_jsonl(path, [&](const Json& row, std::size_t line_no) {
        std::string ctx = path.string() + ":" + std::to_string(line_no);
        SummaryDoc d;
        d.product_id = require_string(row, "product_id", ctx);
        d.verdict = read_section(row, "verdict", ctx);
        d.pros = read_section(row, "pros", ctx);
        d.cons = read_section(row, "cons", ctx);
        docs.push_back(std::move(d));
    });
    if (docs.empty())
        throw DataError(path.string() + ": no summaries");
    return docs;
}

std::vector<ScoredSentence> load_scored_sentences(const std::filesystem::path& path) {
    std::vector<ScoredSentence> rows;
    for_each_jsonl(path, [&](const Json& row, std::size_t line_no) {
        std::string ctx = path.string() + ":" + std::to_string(line_no);
        ScoredSentence s;
        s.text = require_string(row, "text", ctx);
        s.product_id = require_string(row, "product_id", ctx);
        s.helpfulness_score = require_number(row, "helpfulness_score", ctx);
        if (s.helpfulness_score < 0.0 || s.helpfulness_score > 2.0)
            throw DataError(ctx + ": helpfulness_score outside [0,2]");
        rows.push_back(std::move(s));
    });
    if (rows.empty())
        throw DataError(path.string() + ": no scored sentences");
    return rows;
}

} // namespace rvt
