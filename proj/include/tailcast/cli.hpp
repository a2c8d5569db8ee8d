#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tailcast/tail_models.hpp"

namespace tailcast::cli {

struct EventRecord {
  std::chrono::sys_days date;
  double value = 0.0;
  std::optional<double> x;  ///< explicit covariate, when a covariate column is mapped
};

struct ColumnMapping {
  std::string date = "date";
  std::string value = "value";
  std::string x;  ///< empty: covariate derived from dates
};

struct IngestResult {
  std::vector<EventRecord> records;  ///< sorted by date (stable)
  std::size_t kept = 0;
  std::size_t dropped = 0;  ///< rows whose value was missing
};

/// Reads a headed CSV. Empty, "NA" and "NaN" values are missing and dropped;
/// unparseable dates or values raise InvalidInput naming the line.
[[nodiscard]] IngestResult ingest_csv(const std::string& path, const ColumnMapping& columns,
                                      ModelKind kind);

/// Normalized time (date - first) / (horizon_end - first) for every record.
[[nodiscard]] std::vector<double> normalized_time(const std::vector<EventRecord>& records,
                                                  std::chrono::sys_days horizon_end);

/// Entry point of the `tailcast` executable. Returns the process exit code:
/// 0 on success, 1 on a module error, 2 on a usage error.
int run(int argc, const char* const* argv);

}  // namespace tailcast::cli
