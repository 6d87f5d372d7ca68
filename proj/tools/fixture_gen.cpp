// Generates a replay log plus a manifest of the scripted yes/no counts for a
// review corpus. The prompt text is assembled here from scratch, on purpose:
// the classifier must reproduce these exact bytes through its own renderer
// for the replay keys to resolve.
#include "reviewtypes/ingest.hpp"
#include "reviewtypes/jsonl.hpp"
#include "reviewtypes/rng.hpp"
#include "reviewtypes/sha256.hpp"
#include "reviewtypes/typology.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <string>
#include <vector>

using rvt::Json;

namespace {

std::string render_prompt(const std::string& sentence, const std::string& subprompt,
                          const std::string& question) {
    std::string quoted;
    for (char c : sentence) {
        if (c == '"')
            quoted += "\xE2\x80\x9D";
        else
            quoted += c;
    }
    std::string out = "Given that this sentence is from a product review about ";
    out += subprompt;
    out += ", ";
    out += question;
    out += "? Answer yes or no. The sentence is: \"";
    out += quoted;
    out += "\"";
    return out;
}

const std::vector<std::string> kYes = {"Yes.", "yes", "Yes, it does.", " YES"};
const std::vector<std::string> kNo = {"No.", "no", "No, it does not.", " NO"};
const std::vector<std::string> kInvalid = {"maybe", "It depends.", ""};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"scripted replay-log generator for classifier fixtures"};
    std::string reviews_path, summaries_path, out_path, manifest_path, categories_file;
    std::string default_category = "product";
    std::uint64_t seed = 7;
    int n_reps = 10;
    app.add_option("--reviews", reviews_path, "reviews JSONL");
    app.add_option("--summaries", summaries_path, "summaries JSONL");
    app.add_option("--out", out_path, "replay log JSONL to write")->required();
    app.add_option("--manifest", manifest_path, "scripted-counts manifest JSON to write")
        ->required();
    app.add_option("--seed", seed, "script seed");
    app.add_option("--n-reps", n_reps, "responses per (sentence, type)");
    app.add_option("--categories-file", categories_file, "TSV category subprompts");
    app.add_option("--default-category", default_category, "category for summary sentences");

    CLI11_PARSE(app, argc, argv);

    try {
        if (reviews_path.empty() == summaries_path.empty())
            throw std::runtime_error("provide exactly one of --reviews, --summaries");
        rvt::Typology typology = rvt::Typology::builtin();
        rvt::CategoryCatalog categories = categories_file.empty()
                                              ? rvt::CategoryCatalog::builtin()
                                              : rvt::CategoryCatalog::from_file(categories_file);

        std::vector<std::pair<rvt::Sentence, std::string>> corpus;
        if (!reviews_path.empty()) {
            for (const auto& review : rvt::load_reviews(reviews_path))
                for (auto& s : rvt::split_into_sentences(review.review_id, review.text))
                    corpus.emplace_back(std::move(s), review.category_id);
        } else {
            for (const auto& doc : rvt::load_summaries(summaries_path))
                for (auto& s : rvt::summary_sentences(doc))
                    corpus.emplace_back(std::move(s), default_category);
        }

        std::vector<Json> log_rows;
        Json manifest_sentences = Json::array();
        int min_valid = (n_reps + 1) / 2;
        std::size_t sentence_index = 0;

        {
            for (const auto& [sentence, category_id] : corpus) {
                Json types = Json::object();
                for (rvt::InfoType type : rvt::all_types()) {
                    auto type_idx = static_cast<std::size_t>(type);
                    rvt::Rng rng(rvt::derive_seed(seed, "fixture",
                                                  sentence_index * rvt::kNumTypes + type_idx));
                    // A few invalid responses per pair, never enough to
                    // drop valid below the classifier's floor.
                    int max_invalid = std::min(2, n_reps - min_valid);
                    int invalid = static_cast<int>(rng() % static_cast<std::uint64_t>(max_invalid + 1));
                    int valid = n_reps - invalid;
                    int yes = static_cast<int>(rng() % static_cast<std::uint64_t>(valid + 1));

                    std::vector<std::string> responses;
                    for (int i = 0; i < yes; ++i)
                        responses.push_back(kYes[rng() % kYes.size()]);
                    for (int i = 0; i < valid - yes; ++i)
                        responses.push_back(kNo[rng() % kNo.size()]);
                    for (int i = 0; i < invalid; ++i)
                        responses.push_back(kInvalid[rng() % kInvalid.size()]);
                    std::shuffle(responses.begin(), responses.end(), rng);

                    std::string prompt = render_prompt(
                        sentence.text, categories.subprompt_for(category_id),
                        typology.question_for(type));
                    std::string key = rvt::sha256_hex(prompt);
                    for (int rep = 0; rep < n_reps; ++rep)
                        log_rows.push_back(Json{{"prompt_sha256", key},
                                                {"repetition", rep},
                                                {"response", responses[static_cast<std::size_t>(rep)]}});

                    types[std::string(rvt::type_name(type))] =
                        Json{{"yes", yes}, {"valid", valid}};
                }
                manifest_sentences.push_back(Json{{"sentence_id", sentence.sentence_id},
                                                  {"category", category_id},
                                                  {"text", sentence.text},
                                                  {"types", types}});
                ++sentence_index;
            }
        }

        rvt::write_jsonl(out_path, log_rows);
        Json manifest = {{"n_reps", n_reps},
                         {"seed", seed},
                         {"n_sentences", sentence_index},
                         {"sentences", manifest_sentences}};
        std::ofstream mf(manifest_path, std::ios::trunc);
        if (!mf) {
            std::cerr << "cannot write " << manifest_path << "\n";
            return 1;
        }
        mf << manifest.dump(2) << "\n";
        std::cout << "scripted " << log_rows.size() << " responses for " << sentence_index
                  << " sentences\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
