#include "report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "tailcast/error.hpp"

namespace tailcast::cli {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string> header)
    : path_(path), out_(path) {
  if (!out_) throw InvalidInput("cannot open '" + path.string() + "' for writing");
  for (const auto& h : header) cell(h);
  end_row();
}

CsvWriter& CsvWriter::cell(const std::string& text) {
  if (!first_) out_ << ',';
  out_ << text;
  first_ = false;
  return *this;
}

void CsvWriter::end_row() {
  out_ << '\n';
  first_ = true;
}

void CsvWriter::close() {
  out_.close();
  if (!out_) throw InvalidInput("failed writing '" + path_.string() + "'");
}

std::vector<HistogramBin> histogram(std::span<const double> values, std::size_t bins) {
  std::vector<HistogramBin> out;
  if (values.empty() || bins == 0) return out;
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  const double lo = *mn;
  const double width = (*mx - lo) / static_cast<double>(bins);
  if (!(width > 0.0)) return {{lo, lo, INFINITY}};
  std::vector<std::size_t> counts(bins, 0);
  for (double v : values) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    counts[std::min(b, bins - 1)] += 1;
  }
  const double total = static_cast<double>(values.size()) * width;
  for (std::size_t b = 0; b < bins; ++b) {
    out.push_back({lo + width * static_cast<double>(b), lo + width * static_cast<double>(b + 1),
                   static_cast<double>(counts[b]) / total});
  }
  return out;
}

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& doc) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open '" + path.string() + "' for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw InvalidInput("failed writing '" + path.string() + "'");
}

}  // namespace tailcast::cli
