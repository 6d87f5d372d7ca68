#include "reviewtypes/classify.hpp"

#include "reviewtypes/errors.hpp"
#include "reviewtypes/sha256.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ctime>
#include <fstream>
#include <map>
#include <thread>

namespace rvt {

namespace {

std::string cache_key(const std::string& sentence_sha256, InfoType type,
                      const std::string& model_id, double temperature, int n) {
    return sentence_sha256 + "|" + std::string(type_name(type)) + "|" + model_id + "|" +
           Json(temperature).dump() + "|" + std::to_string(n);
}

} // namespace

std::string build_prompt(const std::string& sentence, const std::string& category_subprompt,
                         const std::string& question) {
    if (sentence.empty())
        throw DataError("cannot build a prompt for an empty sentence");
    std::string quoted;
    quoted.reserve(sentence.size());
    for (char c : sentence) {
        if (c == '"')
            quoted += "\xe2\x80\x9d"; // U+201D
        else
            quoted += c;
    }
    std::string out = "Given that this sentence is from a product review about ";
    out += category_subprompt;
    out += ", ";
    out += question;
    out += "? Answer yes or no. The sentence is: \"";
    out += quoted;
    out += "\"";
    return out;
}

PredictionCache::PredictionCache(std::filesystem::path path) : path_(std::move(path)) {
    if (!std::filesystem::exists(path_))
        return;
    for_each_jsonl(path_, [&](const Json& row, std::size_t line_no) {
        std::string ctx = path_.string() + ":" + std::to_string(line_no);
        std::string sha = require_string(row, "sentence_sha256", ctx);
        InfoType type = type_from_name(require_string(row, "type", ctx));
        std::string model = require_string(row, "model_id", ctx);
        double temp = require_number(row, "temperature", ctx);
        int n = static_cast<int>(require_number(row, "n", ctx));
        int yes = static_cast<int>(require_number(row, "yes_count", ctx));
        int valid = static_cast<int>(require_number(row, "valid_count", ctx));
        index_[cache_key(sha, type, model, temp, n)] = {yes, valid};
    });
}

std::optional<std::pair<int, int>> PredictionCache::lookup(const std::string& sentence_sha256,
                                                           InfoType type,
                                                           const std::string& model_id,
                                                           double temperature, int n) const {
    std::lock_guard lock(mu_);
    auto it = index_.find(cache_key(sentence_sha256, type, model_id, temperature, n));
    if (it == index_.end())
        return std::nullopt;
    return it->second;
}

void PredictionCache::store(const std::string& sentence_sha256, InfoType type,
                            const std::string& model_id, double temperature, int n,
                            int yes_count, int valid_count) {
    std::lock_guard lock(mu_);
    index_[cache_key(sentence_sha256, type, model_id, temperature, n)] = {yes_count, valid_count};
    if (path_.empty())
        return;
    Json row = {{"sentence_sha256", sentence_sha256}, {"type", type_name(type)},
                {"model_id", model_id},               {"temperature", temperature},
                {"n", n},                             {"yes_count", yes_count},
                {"valid_count", valid_count},         {"ts", std::time(nullptr)}};
    std::ofstream out(path_, std::ios::app);
    if (!out)
        throw DataError("cannot append to cache " + path_.string());
    out << row.dump() << '\n';
}

void PredictionCache::compact() {
    std::lock_guard lock(mu_);
    if (path_.empty())
        return;
    // Key layout is "sha|type|model|temp|n"; rebuild rows from the index.
    std::map<std::string, std::pair<int, int>> sorted(index_.begin(), index_.end());
    std::ofstream out(path_, std::ios::trunc);
    if (!out)
        throw DataError("cannot rewrite cache " + path_.string());
    for (const auto& [key, counts] : sorted) {
        std::vector<std::string> parts;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= key.size(); ++i) {
            if (i == key.size() || key[i] == '|') {
                parts.push_back(key.substr(start, i - start));
                start = i + 1;
            }
        }
        Json row = {{"sentence_sha256", parts[0]},
                    {"type", parts[1]},
                    {"model_id", parts[2]},
                    {"temperature", Json::parse(parts[3])},
                    {"n", std::stoi(parts[4])},
                    {"yes_count", counts.first},
                    {"valid_count", counts.second},
                    {"ts", std::time(nullptr)}};
        out << row.dump() << '\n';
    }
}

Engine::Engine(CompletionClient& client, PredictionCache& cache, ClassifyConfig cfg)
    : client_(client), cache_(cache), cfg_(std::move(cfg)) {
    if (cfg_.n_repetitions < 1)
        throw ConfigError("n_repetitions must be >= 1");
    if (!cfg_.typology)
        cfg_.typology = &Typology::builtin();
    if (!cfg_.categories)
        cfg_.categories = &CategoryCatalog::builtin();
}

ScoreResult Engine::score_type(const std::string& sentence_text, const std::string& category_id,
                               InfoType type) {
    int n = cfg_.n_repetitions;
    std::string sha = sha256_hex(sentence_text);
    if (auto hit = cache_.lookup(sha, type, cfg_.model.model_id, cfg_.model.temperature, n)) {
        auto [yes, valid] = *hit;
        return {valid > 0 ? static_cast<double>(yes) / valid : 0.0, yes, valid};
    }
    std::string prompt = build_prompt(sentence_text, cfg_.categories->subprompt_for(category_id),
                                      cfg_.typology->question_for(type));
    int yes = 0, no = 0;
    for (int rep = 0; rep < n; ++rep) {
        CompletionRequest req{prompt, cfg_.model.temperature, cfg_.model.max_tokens, rep};
        ++llm_calls_;
        CompletionResponse res = client_.complete(req);
        switch (parse_yes_no(res.text)) {
        case YesNo::yes: ++yes; break;
        case YesNo::no: ++no; break;
        case YesNo::invalid: break;
        }
    }
    int valid = yes + no;
    if (valid < (n + 1) / 2)
        throw LowValidityError("only " + std::to_string(valid) + "/" + std::to_string(n) +
                                   " valid responses for type " + std::string(type_name(type)),
                               valid, n);
    cache_.store(sha, type, cfg_.model.model_id, cfg_.model.temperature, n, yes, valid);
    return {static_cast<double>(yes) / valid, yes, valid};
}

SentencePrediction Engine::classify_sentence(const Sentence& sentence,
                                             const std::string& category_id) {
    SentencePrediction pred;
    pred.sentence_id = sentence.sentence_id;
    pred.model_id = cfg_.model.model_id;
    pred.temperature = cfg_.model.temperature;
    pred.n_repetitions = cfg_.n_repetitions;
    for (InfoType t : all_types()) {
        ScoreResult r = score_type(sentence.text, category_id, t);
        pred.probs[static_cast<std::size_t>(t)] = r.probability;
        pred.valid_counts[static_cast<std::size_t>(t)] = r.valid_count;
    }
    return pred;
}

CorpusResult Engine::classify_corpus(const std::vector<Sentence>& sentences,
                                     const std::vector<std::string>& category_ids) {
    if (sentences.size() != category_ids.size())
        throw ConfigError("classify_corpus needs one category per sentence");
    // Unknown categories fail fast, before any LLM traffic.
    {
        std::vector<std::string> missing;
        for (const auto& cat : category_ids)
            if (!cfg_.categories->has(cat) &&
                std::find(missing.begin(), missing.end(), cat) == missing.end())
                missing.push_back(cat);
        if (!missing.empty()) {
            std::string msg = "unknown categories:";
            for (const auto& m : missing)
                msg += " '" + m + "'";
            throw ConfigError(msg);
        }
    }

    std::vector<std::optional<SentencePrediction>> slots(sentences.size());
    std::vector<std::optional<CorpusFailure>> failed(sentences.size());
    auto work_one = [&](std::size_t i) {
        try {
            slots[i] = classify_sentence(sentences[i], category_ids[i]);
        } catch (const LowValidityError& e) {
            failed[i] = CorpusFailure{sentences[i].sentence_id, e.what()};
        } catch (const FixtureMissError& e) {
            failed[i] = CorpusFailure{sentences[i].sentence_id, e.what()};
        } catch (const TransportError& e) {
            failed[i] = CorpusFailure{sentences[i].sentence_id, e.what()};
        } catch (const ProtocolError& e) {
            failed[i] = CorpusFailure{sentences[i].sentence_id, e.what()};
        }
    };

    if (cfg_.exec == Execution::parallel && cfg_.model.max_parallel > 1 && sentences.size() > 1) {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i = next.fetch_add(1); i < sentences.size();
                 i = next.fetch_add(1))
                work_one(i);
        };
        auto n_workers = std::min<std::size_t>(
            static_cast<std::size_t>(cfg_.model.max_parallel), sentences.size());
        std::vector<std::thread> threads;
        threads.reserve(n_workers);
        for (std::size_t w = 0; w < n_workers; ++w)
            threads.emplace_back(worker);
        for (auto& t : threads)
            t.join();
    } else {
        for (std::size_t i = 0; i < sentences.size(); ++i)
            work_one(i);
    }

    CorpusResult result;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        if (slots[i])
            result.predictions.push_back(std::move(*slots[i]));
        else if (failed[i])
            result.failures.push_back(std::move(*failed[i]));
    }
    return result;
}

std::vector<SentencePrediction> load_predictions(const std::filesystem::path& path) {
    std::vector<SentencePrediction> out;
    for_each_jsonl(path, [&](const Json& row, std::size_t line_no) {
        std::string ctx = path.string() + ":" + std::to_string(line_no);
        SentencePrediction p;
        p.sentence_id = require_string(row, "sentence_id", ctx);
        p.model_id = require_string(row, "model_id", ctx);
        p.temperature = require_number(row, "temperature", ctx);
        p.n_repetitions = static_cast<int>(require_number(row, "n", ctx));
        if (!row.contains("probs") || !row["probs"].is_array() ||
            row["probs"].size() != kNumTypes)
            throw DataError(ctx + ": field 'probs' must be an array of 24 numbers");
        if (!row.contains("valid_counts") || !row["valid_counts"].is_array() ||
            row["valid_counts"].size() != kNumTypes)
            throw DataError(ctx + ": field 'valid_counts' must be an array of 24 integers");
        for (std::size_t i = 0; i < kNumTypes; ++i) {
            p.probs[i] = row["probs"][i].get<double>();
            p.valid_counts[i] = row["valid_counts"][i].get<int>();
            if (p.probs[i] < 0.0 || p.probs[i] > 1.0)
                throw DataError(ctx + ": probability outside [0,1]");
            if (p.valid_counts[i] < 0 || p.valid_counts[i] > p.n_repetitions)
                throw DataError(ctx + ": valid_count outside [0,n]");
        }
        out.push_back(std::move(p));
    });
    return out;
}

void write_predictions(const std::filesystem::path& path,
                       const std::vector<SentencePrediction>& predictions) {
    std::vector<Json> rows;
    rows.reserve(predictions.size());
    for (const auto& p : predictions) {
        Json probs = Json::array();
        Json valids = Json::array();
        for (std::size_t i = 0; i < kNumTypes; ++i) {
            probs.push_back(p.probs[i]);
            valids.push_back(p.valid_counts[i]);
        }
        rows.push_back(Json{{"sentence_id", p.sentence_id},
                            {"model_id", p.model_id},
                            {"temperature", p.temperature},
                            {"n", p.n_repetitions},
                            {"probs", std::move(probs)},
                            {"valid_counts", std::move(valids)}});
    }
    write_jsonl(path, rows);
}

} // namespace rvt
