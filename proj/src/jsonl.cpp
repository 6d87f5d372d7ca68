#include "reviewtypes/jsonl.hpp"

#include "reviewtypes/errors.hpp"

#include <fstream>

namespace rvt {

namespace {

std::ifstream open_for_read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open " + path.string());
    return in;
}

} // namespace

std::vector<Json> read_jsonl(const std::filesystem::path& path) {
    std::vector<Json> rows;
    for_each_jsonl(path, [&](const Json& row, std::size_t) { rows.push_back(row); });
    return rows;
}

void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const Json&, std::size_t)>& fn) {
    auto in = open_for_read(path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        Json row;
        try {
            row = Json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        fn(row, line_no);
    }
}

void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw DataError("cannot write " + path.string());
    for (const auto& row : rows)
        out << row.dump() << '\n';
}

std::string require_string(const Json& row, const char* key, const std::string& context) {
    if (!row.contains(key) || !row[key].is_string())
        throw DataError(context + ": missing or non-string field '" + key + "'");
    return row[key].get<std::string>();
}

double require_number(const Json& row, const char* key, const std::string& context) {
    if (!row.contains(key) || !row[key].is_number())
        throw DataError(context + ": missing or non-numeric field '" + key + "'");
    return row[key].get<double>();
}

} // namespace rvt
