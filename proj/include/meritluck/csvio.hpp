#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace meritluck {

// Minimal CSV table: a header row plus string cells. Fields containing commas,
// quotes or newlines are quoted on write and unquoted on read.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Column index by name; throws ParseError naming the file if absent.
    std::size_t column(const std::string& name, const std::string& path) const;
};

CsvTable read_csv(const std::filesystem::path& path);

// Writes atomically enough for our purposes: to a temp file in the same
// directory, then rename.
void write_csv(const std::filesystem::path& path, const CsvTable& table);

// Reads a whole file into a string; throws IoError on failure.
std::string read_file(const std::filesystem::path& path);

void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace meritluck
