#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace tailcast::cli {

/// Shortest text that round-trips the double; "nan"/"inf" for non-finite.
std::string fmt(double v);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string> header);
  CsvWriter& cell(const std::string& text);
  CsvWriter& cell(double v) { return cell(fmt(v)); }
  CsvWriter& cell(std::size_t v) { return cell(std::to_string(v)); }
  void end_row();
  void close();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  bool first_ = true;
};

struct HistogramBin {
  double lo;
  double hi;
  double density;
};

/// Equal-width bins over [min, max] normalized to unit area.
std::vector<HistogramBin> histogram(std::span<const double> values, std::size_t bins);

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& doc);

}  // namespace tailcast::cli
