#ifndef LITMINE_CSV_HPP
#define LITMINE_CSV_HPP

#include <filesystem>
#include <string>
#include <vector>

namespace litmine::csv {

/// Quotes a field when it contains a comma, quote or newline.
std::string field(const std::string& s);

/// Splits one CSV line, honouring double-quoted fields.
std::vector<std::string> split_line(const std::string& line);

/// Header plus rows; the header is required.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a header column; throws when absent.
    std::size_t column(const std::string& name) const;
};

Table read_file(const std::filesystem::path& path);

} // namespace litmine::csv

#endif
