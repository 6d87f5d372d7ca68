#pragma once

#include "reviewtypes/exec.hpp"
#include "reviewtypes/ingest.hpp"
#include "reviewtypes/jsonl.hpp"
#include "reviewtypes/llm.hpp"
#include "reviewtypes/typology.hpp"

#include <array>
#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace rvt {

// Renders the fixed three-slot prompt. Double quotes inside the sentence are
// normalized to a closing typographic quote so the quoted slot stays
// unambiguous.
std::string build_prompt(const std::string& sentence, const std::string& category_subprompt,
                         const std::string& question);

struct SentencePrediction {
    std::string sentence_id;
    std::string model_id;
    double temperature = 0.3;
    int n_repetitions = 10;
    TypeVector probs{};
    std::array<int, kNumTypes> valid_counts{};
};

// Append-only JSONL store keyed by (sentence hash, type, model, temperature,
// n). A hit returns stored counts with no LLM call. Writes are serialized;
// lookups are safe from any thread once loaded.
class PredictionCache {
public:
    // In-memory only.
    PredictionCache() = default;
    // Loads existing entries (duplicate keys last-wins) and appends new ones.
    explicit PredictionCache(std::filesystem::path path);

    std::optional<std::pair<int, int>> lookup(const std::string& sentence_sha256,
                                              InfoType type, const std::string& model_id,
                                              double temperature, int n) const;
    void store(const std::string& sentence_sha256, InfoType type, const std::string& model_id,
               double temperature, int n, int yes_count, int valid_count);

    // Rewrites the file with one row per key, key-sorted.
    void compact();
    std::size_t size() const { return index_.size(); }

private:
    std::filesystem::path path_;
    std::unordered_map<std::string, std::pair<int, int>> index_;
    mutable std::mutex mu_;
};

struct ScoreResult {
    double probability = 0.0;
    int yes_count = 0;
    int valid_count = 0;
};

struct ClassifyConfig {
    ModelConfig model;
    int n_repetitions = 10;
    const Typology* typology = nullptr;          // builtin when null
    const CategoryCatalog* categories = nullptr; // builtin when null
    Execution exec = Execution::serial;          // corpus-level work scheduling
};

struct CorpusFailure {
    std::string sentence_id;
    std::string reason; // includes the failing type where known
};

struct CorpusResult {
    std::vector<SentencePrediction> predictions; // input order, complete rows only
    std::vector<CorpusFailure> failures;         // input order
};

// Repeated-prompt scorer over one client + cache. Thread-safe.
class Engine {
public:
    Engine(CompletionClient& client, PredictionCache& cache, ClassifyConfig cfg);

    // probability = yes / (yes + no) over valid responses; cache consulted
    // first and updated after. valid < ceil(n/2) -> LowValidityError.
    ScoreResult score_type(const std::string& sentence_text, const std::string& category_id,
                           InfoType type);

    // All 24 types; any failed type propagates (the caller records the failure).
    SentencePrediction classify_sentence(const Sentence& sentence,
                                         const std::string& category_id);

    // Bounded-parallel batch; failures collected, successes kept. Predictions
    // come back in input order regardless of scheduling.
    CorpusResult classify_corpus(const std::vector<Sentence>& sentences,
                                 const std::vector<std::string>& category_ids);

    long long llm_calls() const { return llm_calls_; }

private:
    CompletionClient& client_;
    PredictionCache& cache_;
    ClassifyConfig cfg_;
    std::atomic<long long> llm_calls_{0};
};

// Predictions file rows: {sentence_id, model_id, temperature, n, probs: 24
// floats, valid_counts: 24 ints}.
std::vector<SentencePrediction> load_predictions(const std::filesystem::path& path);
void write_predictions(const std::filesystem::path& path,
                       const std::vector<SentencePrediction>& predictions);

} // namespace rvt
