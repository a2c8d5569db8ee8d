#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <string>
#include <string_view>

#include "tailcast/cli.hpp"
#include "tailcast/dates.hpp"
#include "tailcast/error.hpp"

namespace tailcast::cli {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool is_missing(std::string_view s) { return s.empty() || s == "NA" || s == "NaN" || s == "nan"; }

std::size_t column_index(const std::vector<std::string>& header, const std::string& name,
                         const std::string& path) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (trim(header[i]) == name) return i;
  }
  throw InvalidInput(path + ": header has no column named '" + name + "'");
}

double parse_number(std::string_view text, const std::string& where) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw InvalidInput(where + ": cannot parse number '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

IngestResult ingest_csv(const std::string& path, const ColumnMapping& columns, ModelKind kind) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open data file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput(path + ": file is empty");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_csv_line(line);
  const std::size_t di = column_index(header, columns.date, path);
  const std::size_t vi = column_index(header, columns.value, path);
  const bool with_x = !columns.x.empty();
  const std::size_t xi = with_x ? column_index(header, columns.x, path) : 0;

  IngestResult out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    const std::string where = path + ":" + std::to_string(line_no);
    const std::size_t needed = std::max({di, vi, xi});
    if (fields.size() <= needed) throw InvalidInput(where + ": too few fields");
    const auto value_text = trim(fields[vi]);
    if (is_missing(value_text)) {
      ++out.dropped;
      continue;
    }
    EventRecord rec;
    try {
      rec.date = parse_iso_date(trim(fields[di]));
    } catch (const InvalidInput& e) {
      throw InvalidInput(where + ": " + e.what());
    }
    rec.value = parse_number(value_text, where);
    if (rec.value < 0.0) throw InvalidInput(where + ": negative value");
    if (kind == ModelKind::Discrete && rec.value != std::floor(rec.value)) {
      throw InvalidInput(where + ": discrete data must be integer counts");
    }
    if (with_x) {
      rec.x = parse_number(trim(fields[xi]), where);
      if (!(*rec.x >= 0.0 && *rec.x <= 1.0)) throw InvalidInput(where + ": covariate outside [0, 1]");
    }
    out.records.push_back(rec);
  }
  if (out.records.empty()) throw InvalidInput(path + ": no records left after dropping missing values");
  std::stable_sort(out.records.begin(), out.records.end(),
                   [](const EventRecord& a, const EventRecord& b) { return a.date < b.date; });
  out.kept = out.records.size();
  return out;
}

std::vector<double> normalized_time(const std::vector<EventRecord>& records,
                                    std::chrono::sys_days horizon_end) {
  if (records.empty()) throw InvalidInput("normalized_time: no records");
  const auto first = records.front().date;
  const double span = static_cast<double>((horizon_end - first).count());
  if (!(span > 0.0)) throw InvalidInput("horizon end must fall after the first observation");
  std::vector<double> xs;
  xs.reserve(records.size());
  for (const auto& r : records) {
    const double x = static_cast<double>((r.date - first).count()) / span;
    if (x > 1.0) throw InvalidInput("horizon end precedes observation dated " + format_iso_date(r.date));
    xs.push_back(x);
  }
  return xs;
}

}  // namespace tailcast::cli
