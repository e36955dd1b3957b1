#pragma once

#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "skewt/errors.hpp"

namespace skewt {

/// Column-ordered result table writable as CSV (UTF-8, comma separator,
/// '.' decimal point, header row, 17 significant digits) or as a JSON
/// array of row objects. Column order is fixed by construction.
class ResultTable {
public:
    using Cell = std::variant<std::string, double, long long>;

    explicit ResultTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void add_row(std::vector<Cell> row) {
        if (row.size() != columns_.size())
            throw ValidationError("result table: row width does not match header");
        rows_.push_back(std::move(row));
    }

    void write_csv(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ValidationError("results: cannot write " + path);
        for (std::size_t c = 0; c < columns_.size(); ++c)
            out << (c ? "," : "") << columns_[c];
        out << "\n";
        char buf[64];
        for (const auto& row : rows_) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (c) out << ",";
                if (const auto* s = std::get_if<std::string>(&row[c])) {
                    out << *s;
                } else if (const auto* d = std::get_if<double>(&row[c])) {
                    std::snprintf(buf, sizeof(buf), "%.17g", *d);
                    out << buf;
                } else {
                    out << std::get<long long>(row[c]);
                }
            }
            out << "\n";
        }
    }

    void write_json(const std::string& path) const {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& row : rows_) {
            nlohmann::json obj;
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (const auto* s = std::get_if<std::string>(&row[c]))
                    obj[columns_[c]] = *s;
                else if (const auto* d = std::get_if<double>(&row[c]))
                    obj[columns_[c]] = *d;
                else
                    obj[columns_[c]] = std::get<long long>(row[c]);
            }
            rows.push_back(std::move(obj));
        }
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ValidationError("results: cannot write " + path);
        out << rows.dump(2) << "\n";
    }

    void write(const std::string& path, const std::string& format) const {
        if (format == "json")
            write_json(path);
        else
            write_csv(path);
    }

    std::size_t row_count() const { return rows_.size(); }

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<Cell>> rows_;
};

}  // namespace skewt
