#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pcmwl/core.hpp"
#include "pcmwl/fault.hpp"
#include "pcmwl/prad.hpp"
#include "pcmwl/write_outcome.hpp"

namespace pcmwl {

/// Probabilistic remap-and-swap wear-leveler with fault tolerance.
///
/// A logical address (s, r) resolves through the global decoder to a
/// physical subarray ps, then through ps's local decoder to a row. Each
/// physical subarray has rows_per_subarray + spares decoder rows; physical
/// row ids are ps * (rows_per_subarray + spares) + row.
class WolframLeveler {
 public:
  WolframLeveler(const Geometry& geometry, WolframPolicy policy, std::uint32_t spares_per_subarray);

  const Geometry& geometry() const { return geometry_; }
  const WolframPolicy& policy() const { return policy_; }
  std::uint32_t physical_rows_per_subarray() const { return rows_per_physical_; }
  std::uint64_t physical_rows() const {
    return std::uint64_t{geometry_.subarrays()} * rows_per_physical_;
  }

  /// Tag every programmed row with the logical address it holds.
  void init_data_tags(BlockArray& blocks) const;

  std::optional<PhysicalRow> lookup(LogicalAddress a) const;
  /// Logical address whose data sits in `row`, if any.
  std::optional<LogicalAddress> resident(PhysicalRow row) const;

  /// Serve one demand write to a live address. Throws StateError if `a` is
  /// mapped out (the engine redirects such writes before they get here).
  void on_write(LogicalAddress a, Rng& rng, BlockArray& blocks, WriteOutcome& out);

  /// Swap the physical rows of two live addresses of one subarray, merged
  /// with the demand write to `demand`: the demand data lands in the
  /// partner's old row, the partner's data in the demand's old row.
  void remap_swap_blocks(LogicalAddress demand, LogicalAddress partner, BlockArray& blocks,
                         WriteOutcome& out);

  /// Exchange two logical subarrays between their physical subarrays by
  /// reprogramming the global decoder and rewriting every live block of both.
  /// Requires can_swap_subarrays(s1, s2).
  void remap_swap_subarrays(std::uint32_t s1, std::uint32_t s2, BlockArray& blocks,
                            WriteOutcome& out);
  /// Each physical subarray has enough enabled rows for the other's live rows.
  bool can_swap_subarrays(std::uint32_t s1, std::uint32_t s2) const;

  /// Uniform live partner in the source's subarray, redrawing (and counting
  /// a retry) whenever the draw hits a mapped-out address. nullopt when the
  /// source is the only live row.
  std::optional<LogicalAddress> retry_on_mapped_out(LogicalAddress source, Rng& rng,
                                                    std::uint64_t& retries) const;

  /// Uniform among the other subarrays that can swap with `s`.
  std::optional<std::uint32_t> pick_partner_subarray(std::uint32_t s, Rng& rng) const;

  /// Recover an uncorrectable row: disable it and move its address to an
  /// empty row of the same subarray, or map the address out.
  FailureResult handle_failure(PhysicalRow failed, BlockArray& blocks, AddressSpace& space);

  const Prad& global_decoder() const { return global_; }
  const Prad& local_decoder(std::uint32_t physical_subarray) const {
    return locals_.at(physical_subarray);
  }
  std::uint32_t physical_subarray_of(std::uint32_t logical_subarray) const;

 private:
  PhysicalRow physical(std::uint32_t physical_subarray, std::uint32_t row) const {
    return PhysicalRow{std::uint64_t{physical_subarray} * rows_per_physical_ + row};
  }

  Geometry geometry_;
  WolframPolicy policy_;
  std::uint32_t rows_per_physical_;
  Prad global_;
  std::vector<Prad> locals_;  // indexed by physical subarray
};

}  // namespace pcmwl
