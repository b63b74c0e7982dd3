#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "feederopt/errors.hpp"

namespace feederopt {

// Minimal strict CSV: comma separated, mandatory header row, no quoting.
// All datasets consumed by the toolkit are plain numeric tables.
class CsvTable {
public:
    static CsvTable read_file(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in)
            throw IoError("cannot open CSV file: " + path.string());
        return parse(in, path.string());
    }

    static CsvTable parse(std::istream& in, std::string source) {
        CsvTable t;
        t.source_ = std::move(source);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            if (trimmed(line).empty())
                continue;
            auto fields = split(line);
            if (t.header_.empty()) {
                t.header_ = std::move(fields);
                continue;
            }
            if (fields.size() != t.header_.size())
                throw SchemaError(t.source_ + ":" + std::to_string(line_no) +
                                  ": expected " + std::to_string(t.header_.size()) +
                                  " fields, got " + std::to_string(fields.size()));
            t.rows_.push_back(std::move(fields));
        }
        if (t.header_.empty())
            throw SchemaError(t.source_ + ": missing header row");
        return t;
    }

    // The toolkit's file formats pin both the column names and their order.
    void require_columns(std::initializer_list<std::string_view> names) const {
        if (header_.size() != names.size())
            throw SchemaError(source_ + ": expected " + std::to_string(names.size()) +
                              " columns, got " + std::to_string(header_.size()));
        std::size_t i = 0;
        for (auto name : names) {
            if (header_[i] != name)
                throw SchemaError(source_ + ": column " + std::to_string(i + 1) +
                                  " must be '" + std::string(name) + "', got '" + header_[i] + "'");
            ++i;
        }
    }

    std::size_t rows() const { return rows_.size(); }
    const std::vector<std::string>& header() const { return header_; }
    const std::string& source() const { return source_; }

    const std::string& cell(std::size_t row, std::size_t col) const {
        return rows_.at(row).at(col);
    }

    long long int_cell(std::size_t row, std::size_t col) const {
        const std::string& s = cell(row, col);
        long long v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || p != s.data() + s.size())
            throw SchemaError(cell_context(row, col) + ": not an integer: '" + s + "'");
        return v;
    }

    double double_cell(std::size_t row, std::size_t col) const {
        const std::string& s = cell(row, col);
        double v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v))
            throw SchemaError(cell_context(row, col) + ": not a finite number: '" + s + "'");
        return v;
    }

private:
    std::string cell_context(std::size_t row, std::size_t col) const {
        return source_ + ": row " + std::to_string(row + 1) + ", column '" +
               (col < header_.size() ? header_[col] : std::to_string(col)) + "'";
    }

    static std::string trimmed(std::string_view s) {
        const char* ws = " \t";
        auto b = s.find_first_not_of(ws);
        if (b == std::string_view::npos)
            return {};
        auto e = s.find_last_not_of(ws);
        return std::string(s.substr(b, e - b + 1));
    }

    static std::vector<std::string> split(const std::string& line) {
        std::vector<std::string> out;
        std::string field;
        std::istringstream ss(line);
        while (std::getline(ss, field, ','))
            out.push_back(trimmed(field));
        if (!line.empty() && line.back() == ',')
            out.push_back("");
        return out;
    }

    std::string source_;
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

} // namespace feederopt
