#include "abspec/csv.hpp"

#include <cstdio>
#include <ostream>

#include "abspec/version.hpp"

namespace abspec {

std::string csv_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

void write_csv_table(std::ostream& os, const std::string& name,
                     const std::string& header,
                     const std::vector<std::vector<std::string>>& rows) {
  os << "# " << kCsvSchema << " " << name << "\n";
  os << header << "\n";
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); i++) {
      if (i) os << ",";
      os << row[i];
    }
    os << "\n";
  }
}

}  // namespace abspec
