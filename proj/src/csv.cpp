#include "heatnmf/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "heatnmf/error.hpp"

namespace heatnmf {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<double> parse_number(std::string_view cell) {
  if (cell.empty()) return std::nullopt;
  if (cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

struct ParsedGrid {
  Matrix data;
  std::optional<std::vector<double>> times;
};

ParsedGrid parse_grid(std::string_view text) {
  std::vector<std::pair<std::size_t, std::string_view>> lines;
  std::size_t start = 0;
  std::size_t number = 1;
  while (start <= text.size()) {
    const std::size_t pos = text.find('\n', start);
    std::string_view line = text.substr(start, pos == std::string_view::npos ? pos : pos - start);
    if (!trim(line).empty()) lines.emplace_back(number, line);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
    ++number;
  }
  if (lines.empty()) throw validation_error("csv: no data rows");

  ParsedGrid out;
  std::size_t first = 0;
  if (trim(split(lines[0].second, ',')[0]).starts_with("t=")) {
    std::vector<double> times;
    std::size_t col = 1;
    for (std::string_view cell : split(lines[0].second, ',')) {
      std::optional<double> v;
      if (cell.starts_with("t=")) v = parse_number(trim(cell.substr(2)));
      if (!v) {
        throw validation_error("csv: bad header cell '" + std::string(cell) + "' at line " +
                               std::to_string(lines[0].first) + ", column " + std::to_string(col));
      }
      times.push_back(*v);
      ++col;
    }
    out.times = std::move(times);
    first = 1;
  }
  if (first == lines.size()) throw validation_error("csv: header but no data rows");

  const std::size_t m = split(lines[first].second, ',').size();
  const std::size_t n = lines.size() - first;
  if (out.times && out.times->size() != m) {
    throw validation_error("csv: header has " + std::to_string(out.times->size()) +
                           " time labels but rows have " + std::to_string(m) + " values");
  }
  std::vector<double> values;
  values.reserve(n * m);
  for (std::size_t r = first; r < lines.size(); ++r) {
    const auto [line_no, line] = lines[r];
    const auto cells = split(line, ',');
    if (cells.size() != m) {
      throw validation_error("csv: row at line " + std::to_string(line_no) + " has " +
                             std::to_string(cells.size()) + " values, expected " + std::to_string(m));
    }
    for (std::size_t c = 0; c < m; ++c) {
      const auto v = parse_number(cells[c]);
      if (!v) {
        throw validation_error("csv: non-numeric value '" + std::string(cells[c]) + "' at line " +
                               std::to_string(line_no) + ", column " + std::to_string(c + 1));
      }
      if (*v < 0.0) {
        throw validation_error("csv: negative value " + std::string(cells[c]) + " at line " +
                               std::to_string(line_no) + ", column " + std::to_string(c + 1));
      }
      values.push_back(*v);
    }
  }
  out.data = Matrix(n, m, std::move(values));
  return out;
}

}  // namespace

TimeSeriesSet parse_dataset(std::string_view text, std::optional<double> dt_flag) {
  ParsedGrid parsed = parse_grid(text);
  TimeSeriesSet set;
  const std::size_t m = parsed.data.cols();
  double dt = 1.0;
  if (parsed.times && m >= 2) {
    const auto& t = *parsed.times;
    dt = t[1] - t[0];
    for (std::size_t j = 1; j < m; ++j) {
      if (std::abs((t[j] - t[j - 1]) - dt) > 1e-9 * std::max(1.0, std::abs(dt))) {
        throw validation_error("csv: header time labels are not evenly spaced");
      }
    }
    if (!(dt > 0.0)) throw validation_error("csv: header time labels must increase");
    set.dt_source = DtSource::Header;
  } else if (dt_flag) {
    dt = *dt_flag;
    set.dt_source = DtSource::Flag;
  } else {
    set.dt_source = DtSource::Default;
    set.warnings.push_back("no time step in header or flags; assuming dt = 1");
  }
  set.grid = TimeGrid(m, dt);
  set.data = std::move(parsed.data);
  return set;
}

TimeSeriesSet ingest_csv(const std::filesystem::path& path, std::optional<double> dt_flag) {
  return parse_dataset(read_text_file(path), dt_flag);
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  return parse_grid(read_text_file(path)).data;
}

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw numerical_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

std::string to_csv(const Matrix& m, std::optional<std::span<const double>> times) {
  std::string out;
  if (times) {
    for (std::size_t j = 0; j < times->size(); ++j) {
      out += j ? ",t=" : "t=";
      out += format_double((*times)[j]);
    }
    out += '\n';
  }
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw io_error("error while reading '" + path.string() + "'");
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw io_error("error while writing '" + path.string() + "'");
}

}  // namespace heatnmf
