#pragma once

#include <compare>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pcmwl {

/// Raised for invalid geometry, endurance, policy or simulation settings.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an operation is applied to an object in the wrong state
/// (write to a retired block, disabling a disabled decoder row, ...).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct LogicalAddress {
  std::uint64_t value = 0;
  friend constexpr auto operator<=>(LogicalAddress, LogicalAddress) = default;
};

struct PhysicalRow {
  std::uint64_t value = 0;
  friend constexpr auto operator<=>(PhysicalRow, PhysicalRow) = default;
};

/// Bank shape. One memory block per row, so "block" and "row" coincide.
class Geometry {
 public:
  std::uint32_t subarrays() const { return subarrays_; }
  std::uint32_t rows_per_subarray() const { return rows_per_subarray_; }
  std::uint32_t bits_per_block() const { return bits_per_block_; }
  std::uint64_t total_rows() const {
    return std::uint64_t{subarrays_} * rows_per_subarray_;
  }

  std::pair<std::uint32_t, std::uint32_t> decompose(LogicalAddress a) const {
    return {static_cast<std::uint32_t>(a.value / rows_per_subarray_),
            static_cast<std::uint32_t>(a.value % rows_per_subarray_)};
  }
  LogicalAddress compose(std::uint32_t subarray, std::uint32_t row) const {
    return LogicalAddress{std::uint64_t{subarray} * rows_per_subarray_ + row};
  }

  friend bool operator==(const Geometry&, const Geometry&) = default;

 private:
  friend Geometry build_geometry(std::uint64_t, std::uint64_t, std::uint64_t);
  std::uint32_t subarrays_ = 1;
  std::uint32_t rows_per_subarray_ = 1;
  std::uint32_t bits_per_block_ = 1;
};

/// Validates the dimensions; total rows must fit in 32 bits.
Geometry build_geometry(std::uint64_t subarrays, std::uint64_t rows_per_subarray,
                        std::uint64_t bits_per_block);

enum class SamplingMode { exact, order_statistic };

/// Per-cell write endurance: normal(mean, mean*cov) truncated below at 1.
/// An infinite mean models cells that never wear out.
struct EnduranceModel {
  double mean = 1e8;
  double cov = 0.15;
  SamplingMode mode = SamplingMode::order_statistic;

  bool unbounded() const;
  void validate() const;
};

struct WolframPolicy {
  double sigma1 = 0.01;
  double sigma2 = 0.00002;

  void validate() const;
};

enum class Decision { none, block_swap, subarray_swap };

/// Deterministic stream. mt19937_64 is fully specified by the standard, and
/// the mappings to integers and reals below are fixed here rather than
/// delegated to the implementation-defined <random> distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  /// Independent substream: same (seed, stream) pair gives the same stream.
  Rng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform in (0, 1].
  double uniform_open0() { return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; }
  /// Uniform in (0, 1), midpoints of the 2^53 grid.
  double uniform_open() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// The k+1 smallest cell endurances of a block of `cells` cells, ascending.
/// Exact mode samples every cell; order-statistic mode draws only the k+1
/// smallest uniform order statistics and maps them through the inverse CDF.
std::vector<double> sample_block_thresholds(Rng& rng, const EnduranceModel& model,
                                            std::uint64_t cells, std::uint32_t k);

/// One uniform draw classifies both thresholds; the subarray swap wins
/// when u <= sigma2 <= sigma1.
Decision draw_decision(Rng& rng, const WolframPolicy& policy);

const char* to_string(Decision d);

}  // namespace pcmwl
