#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pcmwl/core.hpp"
#include "pcmwl/fault.hpp"
#include "pcmwl/write_outcome.hpp"

namespace pcmwl {

/// One Security Refresh region: logical block m lives at m^k_prev until the
/// refresh pointer has passed it (or its partner m^k_prev^k_cur), then at
/// m^k_cur. Starts at identity with both keys zero.
class SrRegion {
 public:
  /// Data exchange performed by one refresh step: logical `a` moves to
  /// physical `dest_a`, logical `b` to `dest_b` (each into the other's slot).
  struct Move {
    std::uint64_t logical_a;
    std::uint64_t logical_b;
    std::uint64_t dest_a;
    std::uint64_t dest_b;
  };

  /// `size` must be a power of two, `interval` positive.
  SrRegion(std::uint64_t size, std::uint64_t interval);

  bool refreshed(std::uint64_t m) const {
    return m < sp_ || (m ^ k_prev_ ^ k_cur_) < sp_;
  }
  std::uint64_t translate(std::uint64_t m) const {
    return m ^ (refreshed(m) ? k_cur_ : k_prev_);
  }
  /// Logical block currently stored at physical slot x.
  std::uint64_t inverse(std::uint64_t x) const;

  /// Count one write to the region; true when a refresh step is due.
  bool count_write() {
    if (++write_counter_ < interval_) return false;
    write_counter_ = 0;
    return true;
  }

  /// Advance the refresh pointer by one. Returns the swap to perform, or
  /// nullopt when the block at sp is already in place. Completing a round
  /// retires k_cur into k_prev and draws a fresh key uniformly from [0, size).
  std::optional<Move> refresh_step(Rng& rng);

  std::uint64_t size() const { return size_; }
  std::uint64_t interval() const { return interval_; }
  std::uint64_t k_prev() const { return k_prev_; }
  std::uint64_t k_cur() const { return k_cur_; }
  std::uint64_t sp() const { return sp_; }
  std::uint64_t rounds() const { return rounds_; }

  /// Test hook: place the region in an arbitrary mid-round state.
  void set_state(std::uint64_t k_prev, std::uint64_t k_cur, std::uint64_t sp);

 private:
  std::uint64_t size_;
  std::uint64_t interval_;
  std::uint64_t k_prev_ = 0;
  std::uint64_t k_cur_ = 0;
  std::uint64_t sp_ = 0;
  std::uint64_t write_counter_ = 0;
  std::uint64_t rounds_ = 0;
};

/// Applies a refresh move to the array: both blocks are rewritten (two extra
/// writes) when both are live and both destinations healthy, otherwise the
/// step costs nothing. `physical` maps a region slot to a bank row,
/// `logical` maps a region block to a bank address. Returns extra writes.
template <class PhysicalOf, class LogicalOf>
std::uint64_t apply_refresh_move(const SrRegion::Move& move, PhysicalOf physical, LogicalOf logical,
                                 BlockArray& blocks, const AddressSpace& space, WriteOutcome& out) {
  const PhysicalRow pa = physical(move.dest_a);
  const PhysicalRow pb = physical(move.dest_b);
  if (!space.live(logical(move.logical_a)) || !space.live(logical(move.logical_b)) ||
      blocks.at(pa).mapped_out || blocks.at(pb).mapped_out) {
    return 0;
  }
  blocks.write(pa);
  blocks.write(pb);
  out.physical_targets.push_back(pa);
  out.physical_targets.push_back(pb);
  out.extra_array_writes += 2;
  out.buffered_writes += 2;
  out.sr_swap_steps += 1;
  return 2;
}

/// Demand write with retired-row absorption shared by the page-map-out schemes.
void write_or_absorb(PhysicalRow row, BlockArray& blocks, WriteOutcome& out);

/// One SR region per subarray.
class SrOneLevel {
 public:
  SrOneLevel(const Geometry& geometry, std::uint64_t interval);

  PhysicalRow translate(LogicalAddress a) const;
  LogicalAddress resident(PhysicalRow row) const;
  void on_write(LogicalAddress a, Rng& rng, BlockArray& blocks, const AddressSpace& space,
                WriteOutcome& out);

  const SrRegion& region(std::uint32_t subarray) const { return regions_.at(subarray); }

 private:
  Geometry geometry_;
  std::vector<SrRegion> regions_;
};

/// Outer SR region over the whole bank, then one inner region per
/// subarray-sized subregion of the outer result.
class SrTwoLevel {
 public:
  SrTwoLevel(const Geometry& geometry, std::uint64_t inner_interval, std::uint64_t outer_interval);

  PhysicalRow translate(LogicalAddress a) const;
  LogicalAddress resident(PhysicalRow row) const;
  void on_write(LogicalAddress a, Rng& rng, BlockArray& blocks, const AddressSpace& space,
                WriteOutcome& out);

  const SrRegion& outer() const { return outer_; }
  const SrRegion& inner(std::uint32_t subregion) const { return inner_.at(subregion); }
  SrRegion& outer_mut() { return outer_; }
  SrRegion& inner_mut(std::uint32_t subregion) { return inner_.at(subregion); }

 private:
  PhysicalRow physical_of_intermediate(std::uint64_t x) const;

  Geometry geometry_;
  SrRegion outer_;
  std::vector<SrRegion> inner_;
};

/// Static identity mapping.
class NoLeveling {
 public:
  PhysicalRow translate(LogicalAddress a) const { return PhysicalRow{a.value}; }
  LogicalAddress resident(PhysicalRow row) const { return LogicalAddress{row.value}; }
  void on_write(LogicalAddress a, BlockArray& blocks, WriteOutcome& out) const;
};

/// Reference leveler: write i goes to live row i mod (live rows).
class IdealLeveling {
 public:
  explicit IdealLeveling(std::uint64_t rows);

  void on_write(BlockArray& blocks, WriteOutcome& out);
  /// Drop rows [first, first+count) from the rotation.
  void remove_rows(std::uint64_t first, std::uint64_t count);
  std::uint64_t live_rows() const { return live_.size(); }

 private:
  std::vector<std::uint64_t> live_;
  std::uint64_t writes_ = 0;
};

/// Retire a failed row and map out the aligned page of the logical address
/// stored in it.
FailureResult handle_failure_page_mapout(PhysicalRow failed, LogicalAddress resident,
                                         std::uint32_t page_blocks, BlockArray& blocks,
                                         AddressSpace& space);

}  // namespace pcmwl
