#pragma once

namespace abspec {
inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kCsvSchema = "abspec-csv-v1";
}  // namespace abspec
