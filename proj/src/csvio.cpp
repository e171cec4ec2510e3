#include "meritluck/csvio.hpp"

#include <fstream>
#include <sstream>

#include "meritluck/errors.hpp"

namespace meritluck {

namespace {

bool needs_quoting(const std::string& field) {
    return field.find_first_of(",\"\n\r") != std::string::npos;
}

void append_field(std::string& line, const std::string& field) {
    if (!needs_quoting(field)) {
        line += field;
        return;
    }
    line += '"';
    for (char c : field) {
        if (c == '"') line += '"';
        line += c;
    }
    line += '"';
}

// Splits one logical CSV record starting at `pos`; handles quoted fields with
// embedded newlines. Returns false at end of input.
bool next_record(const std::string& text, std::size_t& pos, std::vector<std::string>& fields,
                 const std::string& path, std::size_t record_no) {
    fields.clear();
    if (pos >= text.size()) return false;
    std::string cur;
    bool in_quotes = false;
    bool any = false;
    while (pos < text.size()) {
        char c = text[pos];
        if (in_quotes) {
            if (c == '"') {
                if (pos + 1 < text.size() && text[pos + 1] == '"') {
                    cur += '"';
                    ++pos;
                } else {
                    in_quotes = false;
                }
            } else {
                cur += c;
            }
            ++pos;
            continue;
        }
        if (c == '"') {
            in_quotes = true;
            any = true;
            ++pos;
            continue;
        }
        if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
            any = true;
            ++pos;
            continue;
        }
        if (c == '\n' || c == '\r') {
            if (c == '\r' && pos + 1 < text.size() && text[pos + 1] == '\n') ++pos;
            ++pos;
            fields.push_back(std::move(cur));
            return true;
        }
        cur += c;
        any = true;
        ++pos;
    }
    if (in_quotes)
        throw ParseError(path + ": record " + std::to_string(record_no) + ": unterminated quote");
    if (!any && cur.empty() && fields.empty()) return false;
    fields.push_back(std::move(cur));
    return true;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name, const std::string& path) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw ParseError(path + ": missing column '" + name + "'");
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::string text = read_file(path);
    CsvTable table;
    std::size_t pos = 0;
    std::size_t record_no = 1;
    if (!next_record(text, pos, table.header, path.string(), record_no))
        throw ParseError(path.string() + ": empty file");
    std::vector<std::string> fields;
    while (next_record(text, pos, fields, path.string(), ++record_no)) {
        if (fields.size() != table.header.size())
            throw ParseError(path.string() + ": record " + std::to_string(record_no) + ": expected " +
                             std::to_string(table.header.size()) + " fields, got " +
                             std::to_string(fields.size()));
        table.rows.push_back(fields);
    }
    return table;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    std::string out;
    std::string line;
    auto emit = [&](const std::vector<std::string>& fields) {
        line.clear();
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) line += ',';
            append_field(line, fields[i]);
        }
        line += '\n';
        out += line;
    };
    emit(table.header);
    for (const auto& row : table.rows) emit(row);
    write_file(path, out);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failed: " + path.string());
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("rename failed: " + path.string() + ": " + ec.message());
}

}  // namespace meritluck
