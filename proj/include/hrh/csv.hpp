// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace hrh {

inline constexpr int csv_schema_version = 1;

using CsvCell = std::variant<double, long long, std::string>;

// Tabular output with a versioned schema line and round-trip precision.
class CsvTable {
public:
    CsvTable(std::string schema, std::vector<std::string> columns)
        : schema_(std::move(schema)), columns_(std::move(columns))
    {
    }

    void add(std::vector<CsvCell> row)
    {
        if (row.size() != columns_.size())
            throw std::invalid_argument("CsvTable: row width does not match the " + schema_ + " schema");
        rows_.push_back(std::move(row));
    }

    const std::vector<std::string>& columns() const { return columns_; }
    const std::vector<std::vector<CsvCell>>& rows() const { return rows_; }
    const std::string& schema() const { return schema_; }

    void write(std::ostream& out) const
    {
        out << "# hrh-csv schema=" << schema_ << " version=" << csv_schema_version << '\n';
        for (std::size_t k = 0; k < columns_.size(); ++k)
            out << (k ? "," : "") << columns_[k];
        out << '\n';
        for (const auto& row : rows_) {
            for (std::size_t k = 0; k < row.size(); ++k)
                out << (k ? "," : "") << format(row[k]);
            out << '\n';
        }
    }

    static std::string format(const CsvCell& c)
    {
        if (const auto* d = std::get_if<double>(&c)) {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", *d);
            return buf;
        }
        if (const auto* i = std::get_if<long long>(&c))
            return std::to_string(*i);
        return std::get<std::string>(c);
    }

private:
    std::string schema_;
    std::vector<std::string> columns_;
    std::vector<std::vector<CsvCell>> rows_;
};

} // namespace hrh
