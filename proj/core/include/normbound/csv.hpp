#ifndef NORMBOUND_CSV_HPP
#define NORMBOUND_CSV_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace normbound {

// Shortest round-trip rendering ("." decimal, "inf"/"-inf"/"nan" literals);
// every trace byte flows through here so reruns are bit-identical.
std::string format_double(double v);
std::string format_u64(std::uint64_t v);

// Parses the dialect back (used by analyze/report and the tests).
double parse_double(const std::string& s);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const; // throws data_error if absent
};

CsvTable read_csv(const std::string& path);

std::string join_csv_row(const std::vector<std::string>& cells);

} // namespace normbound

#endif
