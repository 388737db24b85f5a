#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "heatnmf/init.hpp"
#include "heatnmf/matrix.hpp"

namespace heatnmf {

enum class DtSource { Header, Flag, Default };

/// The data matrix with its sampling grid. Rows are recordings in file order.
struct TimeSeriesSet {
  Matrix data;
  TimeGrid grid{1, 1.0};
  DtSource dt_source = DtSource::Default;
  std::vector<std::string> warnings;
};

/// Parses a dataset: optional `t=<seconds>` header, then N rows of M
/// comma-separated non-negative numbers. dt comes from the header, else
/// `dt_flag`, else 1.0 (with a warning).
TimeSeriesSet parse_dataset(std::string_view text, std::optional<double> dt_flag = {});
TimeSeriesSet ingest_csv(const std::filesystem::path& path, std::optional<double> dt_flag = {});

/// Same grammar as a dataset, without the dt bookkeeping.
Matrix read_matrix_csv(const std::filesystem::path& path);

/// Shortest decimal string that parses back to exactly `x`.
std::string format_double(double x);

/// Rows of comma-separated values, optionally preceded by a `t=` header.
std::string to_csv(const Matrix& m, std::optional<std::span<const double>> times = {});

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace heatnmf
