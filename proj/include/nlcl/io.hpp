#pragma once

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "nlcl/adjoint.hpp"
#include "nlcl/grid.hpp"
#include "nlcl/matrix.hpp"
#include "nlcl/optimizer.hpp"

namespace nlcl::io {

/// Shortest text that round-trips: 17 significant digits.
std::string format_double(double v);

/// Two columns "x,<name>", one row per cell.
void write_profile_csv(const std::filesystem::path& path, const Grid& grid,
                       std::string_view name, std::span<const double> values);

/// Several profiles side by side: "x,<name_0>,<name_1>,...".
void write_profiles_csv(const std::filesystem::path& path, const Grid& grid,
                        std::span<const std::string> names,
                        std::span<const std::vector<double>> columns);

/// Header "t,<x_0>,...,<x_P>", then one line per selected row.
void write_trajectory_csv(const std::filesystem::path& path, const Grid& grid, const Matrix& q,
                          double dt, std::span<const std::size_t> rows);

/// Row indices 0, N and `count` evenly spaced rows in between.
std::vector<std::size_t> snapshot_rows(std::size_t total_rows, int count);

// Binary trajectory layout, little-endian throughout:
//   bytes 0..7   magic "NLCLTRJ1"
//   bytes 8..15  uint64 rows
//   bytes 16..23 uint64 cols
//   then rows*cols IEEE-754 binary64 values, row-major.
void write_trajectory_binary(const std::filesystem::path& path, const Matrix& q);
Matrix read_trajectory_binary(const std::filesystem::path& path);

/// "index,x,gradient,fd_gradient,rel_err"; the last two columns are empty
/// for unchecked indices.
void write_gradient_csv(const std::filesystem::path& path, const Grid& grid,
                        const GradientReport& report);

/// Writes one line per iteration and flushes after each.
class IterationLogWriter {
 public:
  explicit IterationLogWriter(const std::filesystem::path& path);
  void append(const IterationRecord& rec);

 private:
  std::ofstream out_;
};

/// Wall-clock timings kept apart from the deterministic artifacts.
void write_timing_csv(const std::filesystem::path& path, const IterationLog& log);

std::vector<double> read_column_csv(const std::filesystem::path& path, std::size_t column);

}  // namespace nlcl::io
