#include "nlcl/io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <sstream>

namespace nlcl::io {

namespace {

constexpr char kMagic[8] = {'N', 'L', 'C', 'L', 'T', 'R', 'J', '1'};

std::ofstream open_out(const std::filesystem::path& path, bool binary = false) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw SolverError(fmt::format("cannot open {} for writing", path.string()));
  return out;
}

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

}  // namespace

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

void write_profile_csv(const std::filesystem::path& path, const Grid& grid,
                       std::string_view name, std::span<const double> values) {
  require_length(values, grid.cells(), "write_profile_csv");
  auto out = open_out(path);
  out << "x," << name << '\n';
  for (std::size_t j = 0; j < values.size(); ++j) {
    out << format_double(grid.centers[j]) << ',' << format_double(values[j]) << '\n';
  }
}

void write_profiles_csv(const std::filesystem::path& path, const Grid& grid,
                        std::span<const std::string> names,
                        std::span<const std::vector<double>> columns) {
  if (names.size() != columns.size()) throw ValidationError("write_profiles_csv: name/column mismatch");
  for (const auto& c : columns) require_length(c, grid.cells(), "write_profiles_csv");
  auto out = open_out(path);
  out << 'x';
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (std::size_t j = 0; j < grid.cells(); ++j) {
    out << format_double(grid.centers[j]);
    for (const auto& c : columns) out << ',' << format_double(c[j]);
    out << '\n';
  }
}

void write_trajectory_csv(const std::filesystem::path& path, const Grid& grid, const Matrix& q,
                          double dt, std::span<const std::size_t> rows) {
  if (q.cols() != grid.cells()) throw ValidationError("write_trajectory_csv: column mismatch");
  auto out = open_out(path);
  out << 't';
  for (double x : grid.centers) out << ',' << format_double(x);
  out << '\n';
  for (std::size_t r : rows) {
    if (r >= q.rows()) throw ValidationError("write_trajectory_csv: row out of range");
    const double t = r + 1 == q.rows() ? (q.rows() - 1) * dt : static_cast<double>(r) * dt;
    out << format_double(t);
    for (double v : q.row(r)) out << ',' << format_double(v);
    out << '\n';
  }
}

std::vector<std::size_t> snapshot_rows(std::size_t total_rows, int count) {
  std::vector<std::size_t> rows;
  if (total_rows == 0) return rows;
  const std::size_t last = total_rows - 1;
  rows.push_back(0);
  for (int k = 1; k <= count; ++k) {
    rows.push_back(last * static_cast<std::size_t>(k) / static_cast<std::size_t>(count + 1));
  }
  rows.push_back(last);
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  return rows;
}

void write_trajectory_binary(const std::filesystem::path& path, const Matrix& q) {
  auto out = open_out(path, true);
  out.write(kMagic, sizeof kMagic);
  put_u64(out, q.rows());
  put_u64(out, q.cols());
  for (double v : q.data()) put_u64(out, std::bit_cast<std::uint64_t>(v));
}

Matrix read_trajectory_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(fmt::format("cannot open {}", path.string()));
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) {
    throw ValidationError(fmt::format("{}: not a trajectory dump", path.string()));
  }
  const std::uint64_t rows = get_u64(in);
  const std::uint64_t cols = get_u64(in);
  if (!in) throw ValidationError(fmt::format("{}: truncated header", path.string()));
  Matrix q(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) q(r, c) = std::bit_cast<double>(get_u64(in));
  }
  if (!in) throw ValidationError(fmt::format("{}: truncated data", path.string()));
  return q;
}

void write_gradient_csv(const std::filesystem::path& path, const Grid& grid,
                        const GradientReport& report) {
  require_length(report.gradient, grid.cells(), "write_gradient_csv");
  std::vector<int> slot(grid.cells(), -1);
  for (std::size_t k = 0; k < report.checked_indices.size(); ++k) {
    slot[report.checked_indices[k]] = static_cast<int>(k);
  }
  auto out = open_out(path);
  out << "index,x,gradient,fd_gradient,rel_err\n";
  for (std::size_t j = 0; j < grid.cells(); ++j) {
    out << j << ',' << format_double(grid.centers[j]) << ',' << format_double(report.gradient[j]);
    if (slot[j] >= 0 && !report.fd_gradient.empty()) {
      const double fd = report.fd_gradient[slot[j]];
      const double err = std::abs(report.gradient[j] - fd) / std::max(std::abs(fd), 1e-12);
      out << ',' << format_double(fd) << ',' << format_double(err);
    } else {
      out << ",,";
    }
    out << '\n';
  }
}

IterationLogWriter::IterationLogWriter(const std::filesystem::path& path) : out_(open_out(path)) {
  out_ << "iter,objective,step,backtracks,projected_grad_norm\n";
  out_.flush();
}

void IterationLogWriter::append(const IterationRecord& rec) {
  out_ << rec.iter << ',' << format_double(rec.objective) << ',' << format_double(rec.step) << ','
       << rec.backtracks << ',' << format_double(rec.projected_grad_norm) << '\n';
  out_.flush();
}

void write_timing_csv(const std::filesystem::path& path, const IterationLog& log) {
  auto out = open_out(path);
  out << "iter,wall_time\n";
  for (const auto& rec : log) out << rec.iter << ',' << format_double(rec.wall_time) << '\n';
}

std::vector<double> read_column_csv(const std::filesystem::path& path, std::size_t column) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot open {}", path.string()));
  std::vector<double> values;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {
      first = false;
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    for (std::size_t c = 0; c <= column; ++c) {
      if (!std::getline(ss, cell, ',')) {
        throw ValidationError(fmt::format("{}: missing column {}", path.string(), column));
      }
    }
    double v = 0.0;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc()) throw ValidationError(fmt::format("{}: bad number '{}'", path.string(), cell));
    values.push_back(v);
  }
  return values;
}

}  // namespace nlcl::io
