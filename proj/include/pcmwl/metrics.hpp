#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pcmwl {

struct SimResult;

__extension__ using uint128 = unsigned __int128;

struct CovSample {
  std::uint64_t writes = 0;
  double cov = 0.0;
  friend bool operator==(const CovSample&, const CovSample&) = default;
};

struct CapacitySample {
  std::uint64_t writes = 0;
  double usable_fraction = 1.0;
  friend bool operator==(const CapacitySample&, const CapacitySample&) = default;
};

/// Population standard deviation over mean; 0 for an all-zero vector.
/// Throws std::invalid_argument on an empty list.
double cov(std::span<const std::uint64_t> counts);

/// First checkpoint whose CoV is at most (1 - drop) times the first sample's.
std::optional<std::uint64_t> writes_to_cov_drop(std::span<const CovSample> series, double drop);

/// Running sums over a contiguous scope of rows, updated one increment at a
/// time so the CoV of the scope is O(1) at every checkpoint.
class ScopeMoments {
 public:
  ScopeMoments() = default;
  ScopeMoments(std::uint64_t first_row, std::uint64_t rows) : first_(first_row), rows_(rows) {}

  bool contains(std::uint64_t row) const { return row - first_ < rows_; }
  /// Account one write to a scope row whose count was `old_count`.
  void bump(std::uint64_t old_count) {
    ++sum_;
    sum_sq_ += 2 * static_cast<uint128>(old_count) + 1;
  }
  /// Add a scope row that already carries `count` writes.
  void add_row(std::uint64_t count) {
    sum_ += count;
    sum_sq_ += static_cast<uint128>(count) * count;
  }
  double cov() const;

  std::uint64_t first_row() const { return first_; }
  std::uint64_t rows() const { return rows_; }
  std::uint64_t sum() const { return sum_; }

 private:
  std::uint64_t first_ = 0;
  std::uint64_t rows_ = 0;
  std::uint64_t sum_ = 0;
  uint128 sum_sq_ = 0;
};

/// Shortest decimal that parses back to the same double, always carrying a
/// decimal point or exponent ("1.0", not "1").
std::string format_decimal(double v);

/// Writes cov.csv, capacity.csv, histogram.csv and summary.csv (one row).
/// Throws std::runtime_error on I/O failure.
void emit_csv(const SimResult& result, const std::filesystem::path& out_dir);

/// Per-trial files only (cov, capacity, histogram).
void emit_series_csv(const SimResult& result, const std::filesystem::path& out_dir);
/// summary.csv with one row per result, written only after all rows are formatted.
void emit_summary_csv(std::span<const SimResult> results, const std::filesystem::path& path);

std::string summary_header();
std::string summary_row(const SimResult& r);

std::vector<CovSample> read_cov_csv(const std::filesystem::path& path);
std::vector<CapacitySample> read_capacity_csv(const std::filesystem::path& path);

}  // namespace pcmwl
