#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <variant>
#include <vector>

namespace pcmwl {

/// One associative decoder position. An enabled row without a stored
/// address is empty (a spare, or a row whose block was vacated).
struct DecoderRow {
  std::optional<std::uint32_t> stored_address;
  bool enabled = true;
  std::uint64_t program_count = 0;
};

struct Remapped {
  std::uint32_t new_row;
};
struct NoEmptyRow {};

/// Programmable address decoder: a reprogrammable injection from decoder
/// addresses to decoder rows. The hardware matches all rows in parallel; a
/// reverse index gives the same answer in O(1).
///
/// Used at two levels: the global decoder maps logical subarrays to physical
/// subarrays, each local decoder maps row addresses to rows of its subarray.
class Prad {
 public:
  /// `rows` decoder rows; addresses [0, programmed) are programmed to rows
  /// of the same index (one program event each), the remaining rows are empty.
  Prad(std::uint32_t rows, std::uint32_t programmed);

  /// Enabled row storing `address`, or nullopt if the address is mapped out
  /// (the OR of all row-selects is 0).
  std::optional<std::uint32_t> lookup(std::uint32_t address) const;

  /// Exchange the rows of two mapped addresses.
  /// Throws std::invalid_argument on a1 == a2, StateError if either is unmapped.
  void reprogram_swap(std::uint32_t a1, std::uint32_t a2);

  /// Disable a failed row for good and move its address to the lowest empty
  /// enabled row, if there is one. Without a spare the address is left
  /// unmapped. Throws StateError if the row is already disabled or empty.
  std::variant<Remapped, NoEmptyRow> disable_and_remap(std::uint32_t failed_row);

  /// Program `address` into an empty enabled row.
  void program(std::uint32_t row, std::uint32_t address);
  /// Clear a row's stored address; the row becomes empty.
  void erase(std::uint32_t row);
  /// Replace the address stored in an enabled, programmed row with an
  /// address that is currently unmapped.
  void reassign(std::uint32_t row, std::uint32_t new_address);

  std::uint32_t empty_count() const { return static_cast<std::uint32_t>(empty_rows_.size()); }
  std::uint32_t mapped_count() const { return mapped_; }
  std::uint32_t enabled_count() const { return enabled_; }
  std::optional<std::uint32_t> lowest_empty_row() const;

  std::uint32_t size() const { return static_cast<std::uint32_t>(rows_.size()); }
  std::uint32_t address_range() const { return static_cast<std::uint32_t>(index_.size()); }
  const DecoderRow& row(std::uint32_t r) const { return rows_.at(r); }
  std::uint64_t total_program_count() const;

 private:
  static constexpr std::uint32_t kUnmapped = 0xFFFFFFFFu;

  std::vector<DecoderRow> rows_;
  std::vector<std::uint32_t> index_;  // address -> row
  std::set<std::uint32_t> empty_rows_;
  std::uint32_t mapped_ = 0;
  std::uint32_t enabled_ = 0;
};

}  // namespace pcmwl
