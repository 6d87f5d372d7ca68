#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rvt {

struct Review {
    std::string review_id;
    std::string product_id;
    std::string category_id;
    std::string text;
    std::optional<int> rating;            // 1..5
    std::optional<long long> helpful_votes;
    std::optional<long long> unhelpful_votes;
};

struct Sentence {
    std::string sentence_id; // "<doc_id>#<position>"
    std::string doc_id;
    int position = 0; // 0-based, contiguous within the document
    std::string text; // normalized, non-empty
};

struct SummaryDoc {
    std::string product_id;
    std::vector<std::string> verdict;
    std::vector<std::string> pros;
    std::vector<std::string> cons;
};

struct ScoredSentence {
    std::string text;
    std::string product_id;
    double helpfulness_score = 0.0; // in [0,2]
};

enum class HelpfulLabel { helpful, unhelpful, excluded };
enum class Sentiment { positive, negative };
enum class TertileLabel { helpful, unhelpful, neutral };

// Trim, collapse whitespace runs to single spaces, decode the five XML
// entities (&amp; &lt; &gt; &quot; &apos;). No case folding.
std::string normalize_text(const std::string& text);

// Rule-based segmentation over normalized text. Splits after '.', '!', '?'
// runs followed by whitespace then an uppercase letter, digit, or opening
// quote; an abbreviation list suppresses '.' splits; segments with fewer
// than 2 word tokens merge into the preceding segment (a first segment
// stays). Idempotent on its own outputs.
std::vector<std::string> split_sentences(const std::string& text);

// split_sentences plus ids: "<doc_id>#<position>".
std::vector<Sentence> split_into_sentences(const std::string& doc_id, const std::string& text);

// Summary sentences in verdict->pros->cons order; each section entry is one
// sentence, normalized; empties dropped.
std::vector<Sentence> summary_sentences(const SummaryDoc& doc);

// helpful iff votes (>=9, ==0); unhelpful iff (==0, >=3); else excluded.
// Missing vote fields -> excluded.
HelpfulLabel derive_review_helpfulness(const Review& r);

// positive iff rating in {4,5}; negative iff in {1,2,3}. Missing rating -> DataError.
Sentiment derive_sentiment(const Review& r);

// helpful iff score >= hi, else unhelpful iff score <= lo, else neutral.
// Helpful is checked first so degenerate lo == hi stays deterministic.
TertileLabel derive_tertile_label(double score, double lo, double hi);

// Tertile borders on train scores: 1-based nearest rank ceil(N/3) and
// ceil(2N/3) into the sorted scores. Requires >= 3 scores.
std::pair<double, double> compute_tertile_borders(std::vector<double> scores);

// JSONL corpus loaders. Unknown fields ignored; malformed rows -> DataError.
std::vector<Review> load_reviews(const std::filesystem::path& path);
std::vector<SummaryDoc> load_summaries(const std::filesystem::path& path);
std::vector<ScoredSentence> load_scored_sentences(const std::filesystem::path& path);

} // namespace rvt
