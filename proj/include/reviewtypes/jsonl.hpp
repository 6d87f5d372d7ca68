#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace rvt {

// ordered_json keeps insertion order, so emitted files are byte-stable.
using Json = nlohmann::ordered_json;

// Whole-file parse. Blank lines are skipped; a malformed line raises
// DataError naming the path and 1-based line number.
std::vector<Json> read_jsonl(const std::filesystem::path& path);

// Streaming variant for large corpora.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const Json&, std::size_t line_no)>& fn);

// One compact object per line, '\n' terminated. Truncates any existing file.
void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& rows);

// Required-field accessors that turn missing/mistyped fields into DataError.
std::string require_string(const Json& row, const char* key, const std::string& context);
double require_number(const Json& row, const char* key, const std::string& context);

} // namespace rvt
