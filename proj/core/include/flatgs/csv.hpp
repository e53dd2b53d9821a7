#pragma once

#include <string>
#include <vector>

namespace flatgs {

// 17 significant digits, '.' decimal separator, locale independent.
std::string format_double(double x);

// RFC-4180 quoting where needed.
std::string csv_escape(const std::string& cell);

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::vector<std::string> row) { rows_.push_back(std::move(row)); }
    void add_numeric_row(const std::vector<double>& row);
    std::string str() const;
    void write(const std::string& path) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

void write_text_file(const std::string& path, const std::string& content);

}  // namespace flatgs
