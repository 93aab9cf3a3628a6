#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace abspec {

// 15 significant digits, deterministic.
std::string csv_double(double v);

// "# abspec-csv-v1 <name>" comment, then the header, then the rows.
void write_csv_table(std::ostream& os, const std::string& name,
                     const std::string& header,
                     const std::vector<std::vector<std::string>>& rows);

}  // namespace abspec
