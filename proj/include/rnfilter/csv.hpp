#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rnf {

/// 17 significant digits; round-trips any double exactly.
std::string format_double(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

CsvTable read_csv(std::istream& in);
void write_csv(std::ostream& out, const CsvTable& table);

}  // namespace rnf
