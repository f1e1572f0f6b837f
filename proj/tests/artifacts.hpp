// Helpers shared by the CLI tests and the acceptance runner: in-process
// command invocation and structural checks on every written artifact.
#ifndef LAPSOM_TESTS_ARTIFACTS_HPP
#define LAPSOM_TESTS_ARTIFACTS_HPP

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lapsom/cli.hpp"

namespace artifacts {

namespace fs = std::filesystem;

struct Outcome
{
    int code = 0;
    std::string err;
};

inline Outcome run(std::vector<std::string> args)
{
    args.insert(args.begin(), "lapsom");
    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    std::ostringstream err;
    const int code = lapsom::cli::main(static_cast<int>(argv.size()), argv.data(), err);
    return {code, err.str()};
}

inline std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline fs::path scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / ("lapsom_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

/// Rows of a CSV file with a header; throws if any row has a different width
/// from the header.
inline std::vector<std::vector<std::string>> read_csv(const fs::path& p)
{
    std::istringstream in(slurp(p));
    std::vector<std::vector<std::string>> rows;
    for (std::string line; std::getline(in, line);) {
        std::vector<std::string> fields;
        std::string cur;
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            const char c = line[i];
            if (quoted) {
                if (c == '"' && i + 1 < line.size() && line[i + 1] == '"')
                    cur += line[++i];
                else if (c == '"')
                    quoted = false;
                else
                    cur += c;
            } else if (c == '"') {
                quoted = true;
            } else if (c == ',') {
                fields.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        if (quoted)
            throw std::runtime_error(p.string() + ": unterminated quote");
        fields.push_back(cur);
        if (!rows.empty() && fields.size() != rows.front().size())
            throw std::runtime_error(p.string() + ": ragged row '" + line + "'");
        rows.push_back(std::move(fields));
    }
    if (rows.empty())
        throw std::runtime_error(p.string() + ": empty CSV");
    return rows;
}

/// Parses every .json, .csv and .dot file in a directory; returns how many
/// were checked. Throws on the first malformed artifact.
inline std::size_t check_all(const fs::path& dir)
{
    std::size_t checked = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto ext = entry.path().extension();
        if (ext == ".json") {
            const auto j = nlohmann::json::parse(slurp(entry.path()));
            if (j.value("schema_version", "") != "1")
                throw std::runtime_error(entry.path().string() + ": missing schema_version");
        } else if (ext == ".csv") {
            read_csv(entry.path());
        } else if (ext == ".dot") {
            lapsom::dot::parse(slurp(entry.path()));
        } else {
            continue;
        }
        ++checked;
    }
    return checked;
}

} // namespace artifacts

#endif
